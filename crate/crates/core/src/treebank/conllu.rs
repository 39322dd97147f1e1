use std::io::{BufRead, Write};

use super::{Corpus, Morph, Sentence, Split, Token, TreebankError};

const COLUMNS: usize = 10;

/// Parses CoNLL-U text into a corpus tagged as the training split.
///
/// Range lines (`3-4`) and empty nodes (`5.1`) are skipped. `_` fields
/// become absent values, except FORM which is kept verbatim.
pub fn parse_conllu<R: BufRead>(input: R) -> Result<Corpus, TreebankError> {
    let mut sentences = Vec::new();
    let mut pending = Pending::default();

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| TreebankError::parse(lineno, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);

        if line.trim().is_empty() {
            if let Some(s) = pending.finish()? {
                sentences.push(s);
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(text) = comment.trim_start().strip_prefix("text") {
                if let Some(value) = text.trim_start().strip_prefix('=') {
                    pending.text = Some(value.trim().to_string());
                }
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != COLUMNS {
            return Err(TreebankError::parse(
                lineno,
                format!(
                    "expected {COLUMNS} tab-separated columns, found {}",
                    cols.len()
                ),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let token = parse_row(&cols, lineno)?;
        pending.tokens.push((lineno, token));
    }
    if let Some(s) = pending.finish()? {
        sentences.push(s);
    }
    Ok(Corpus::new(sentences, Split::Train))
}

#[derive(Default)]
struct Pending {
    tokens: Vec<(usize, Token)>,
    text: Option<String>,
}

impl Pending {
    fn finish(&mut self) -> Result<Option<Sentence>, TreebankError> {
        let tokens = std::mem::take(&mut self.tokens);
        let text = self.text.take();
        if tokens.is_empty() {
            return Ok(None);
        }
        let n = tokens.len();
        for (i, (lineno, tok)) in tokens.iter().enumerate() {
            if tok.id != i + 1 {
                return Err(TreebankError::parse(
                    *lineno,
                    format!("expected token id {}, found {}", i + 1, tok.id),
                ));
            }
            if tok.head > n {
                return Err(TreebankError::parse(
                    *lineno,
                    format!(
                        "head {} out of range for sentence of {} tokens",
                        tok.head, n
                    ),
                ));
            }
            if tok.head == tok.id {
                return Err(TreebankError::parse(*lineno, "token is its own head"));
            }
        }
        if !tokens.iter().any(|(_, t)| t.head == 0) {
            return Err(TreebankError::parse(
                tokens[0].0,
                "sentence has no root token",
            ));
        }
        Ok(Some(Sentence {
            tokens: tokens.into_iter().map(|(_, t)| t).collect(),
            text,
        }))
    }
}

fn optional(field: &str) -> Option<String> {
    if field == "_" || field.is_empty() {
        None
    } else {
        Some(field.to_string())
    }
}

fn parse_row(cols: &[&str], lineno: usize) -> Result<Token, TreebankError> {
    let id: usize = cols[0]
        .parse()
        .map_err(|_| TreebankError::parse(lineno, format!("invalid token id {:?}", cols[0])))?;
    if id == 0 {
        return Err(TreebankError::parse(lineno, "token id must be at least 1"));
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| TreebankError::parse(lineno, format!("non-integer head {:?}", cols[6])))?;
    Ok(Token {
        id,
        form: cols[1].to_string(),
        lemma: optional(cols[2]),
        upos: optional(cols[3]),
        xpos: optional(cols[4]),
        morph: parse_feats(cols[5], lineno)?,
        head,
        deprel: optional(cols[7]),
    })
}

fn parse_feats(field: &str, lineno: usize) -> Result<Morph, TreebankError> {
    let mut morph = Morph::new();
    if field == "_" || field.is_empty() {
        return Ok(morph);
    }
    for pair in field.split('|') {
        match pair.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => {
                morph.insert(k.to_string(), v.to_string());
            }
            _ => {
                return Err(TreebankError::parse(
                    lineno,
                    format!("malformed feature {pair:?}"),
                ))
            }
        }
    }
    Ok(morph)
}

fn field(value: &Option<String>) -> &str {
    value.as_deref().unwrap_or("_")
}

/// Writes a corpus back out as CoNLL-U. DEPS and MISC are written as `_`.
pub fn write_conllu<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if !corpus.treebank_id.is_empty() {
            writeln!(out, "# sent_id = {}-{}", corpus.treebank_id, i + 1)?;
        }
        if let Some(text) = &sentence.text {
            writeln!(out, "# text = {text}")?;
        }
        for tok in &sentence.tokens {
            let feats = if tok.morph.is_empty() {
                "_".to_string()
            } else {
                tok.morph
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join("|")
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t_\t_",
                tok.id,
                tok.form,
                field(&tok.lemma),
                field(&tok.upos),
                field(&tok.xpos),
                feats,
                tok.head,
                field(&tok.deprel),
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Corpus, TreebankError> {
        parse_conllu(s.as_bytes())
    }

    #[test]
    fn minimal_sentence() {
        let corpus = parse(
            "1\tcuatro\tcuatro\tADJ\t_\tNumType=Card\t2\tmod\t_\t_\n\
             2\tlibros\tlibro\tNOUN\t_\tGender=Masc|Number=Plur\t0\troot\t_\t_\n",
        )
        .unwrap();
        assert_eq!(corpus.sentences.len(), 1);
        let s = &corpus.sentences[0];
        assert_eq!(s.len(), 2);
        assert_eq!(s.tokens[0].head, 2);
        assert_eq!(s.tokens[1].feature("Number"), Some("Plur"));
    }

    #[test]
    fn ranges_and_empty_nodes_are_dropped() {
        let corpus = parse(
            "# text = del libro\n\
             1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n\
             1\tde\tde\tADP\t_\t_\t0\troot\t_\t_\n\
             2\tel\tel\tDET\t_\t_\t3\tdet\t_\t_\n\
             2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\
             3\tlibro\tlibro\tNOUN\t_\t_\t1\tcomp:obj\t_\t_\n\n",
        )
        .unwrap();
        let s = &corpus.sentences[0];
        assert_eq!(s.len(), 3);
        assert_eq!(s.text.as_deref(), Some("del libro"));
    }

    #[test]
    fn underscores_become_absent() {
        let corpus = parse("1\t_\t_\t_\t_\t_\t0\t_\t_\t_\n").unwrap();
        let tok = &corpus.sentences[0].tokens[0];
        assert_eq!(tok.form, "_");
        assert!(tok.lemma.is_none() && tok.upos.is_none() && tok.deprel.is_none());
        assert!(tok.morph.is_empty());
    }

    #[test]
    fn head_out_of_range_names_line() {
        let err = parse(
            "# text = a b c\n\
             1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\
             2\tb\tb\tX\t_\t_\t5\tdep\t_\t_\n\
             3\tc\tc\tX\t_\t_\t1\tdep\t_\t_\n",
        )
        .unwrap_err();
        match err {
            TreebankError::Parse { line, reason } => {
                assert_eq!(line, 3);
                assert!(reason.contains("head 5"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn wrong_column_count() {
        let err = parse("1\ta\ta\tX\t_\t_\t0\troot\n").unwrap_err();
        assert!(matches!(err, TreebankError::Parse { line: 1, .. }));
    }

    #[test]
    fn non_integer_head() {
        let err = parse("1\ta\ta\tX\t_\t_\tx\troot\t_\t_\n").unwrap_err();
        assert!(err.to_string().contains("non-integer head"));
    }

    #[test]
    fn missing_root_and_id_gap() {
        assert!(parse("1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n").is_err());
        assert!(
            parse("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n3\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n").is_err()
        );
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("\n\n# just a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn write_then_parse_preserves_tokens() {
        let src = "# text = Las primeras horas\n\
                   1\tLas\tel\tDET\t_\tDefinite=Def|Number=Plur\t3\tdet\t_\t_\n\
                   2\tprimeras\tprimero\tADJ\t_\tNumType=Ord\t3\tmod\t_\t_\n\
                   3\thoras\thora\tNOUN\t_\t_\t0\troot\t_\t_\n\n";
        let corpus = parse(src).unwrap();
        let mut buf = Vec::new();
        write_conllu(&corpus, &mut buf).unwrap();
        let again = parse_conllu(buf.as_slice()).unwrap();
        assert_eq!(corpus.sentences, again.sentences);
    }
}
