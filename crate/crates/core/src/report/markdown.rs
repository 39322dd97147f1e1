use std::fmt::Write;

use super::{format_p, marks, support_text, Mark, RunMetadata, NO_SIGNIFICANT_RULES};
use crate::eval::EvalReport;
use crate::ruleset::{Example, Rule};

/// Escapes text so CommonMark renders it literally.
fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\\' | '`' | '*' | '_' | '[' | ']' | '#' | '|' | '~' | '!' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

fn example_line(example: &Example) -> String {
    marks(example)
        .map(|(form, mark)| match mark {
            Mark::Dep => format!("**{}**", escape(form)),
            Mark::Head => format!("<u>{}</u>", escape(form)),
            Mark::Plain => escape(form),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn rule_section(out: &mut String, rule: &Rule) {
    let heading = if rule.conditions.is_empty() {
        "all instances".to_string()
    } else {
        rule.describe()
    };
    let _ = writeln!(
        out,
        "### {} → {}\n",
        escape(&heading),
        escape(&rule.label.to_string())
    );
    if !rule.conditions.is_empty() {
        let _ = writeln!(out, "Conditions:\n");
        for c in &rule.conditions {
            let _ = writeln!(out, "- {}", escape(&c.to_string()));
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "Label: {}. Majority: {}. Support: {}. p-value: {}.\n",
        escape(&rule.label.to_string()),
        escape(&rule.majority),
        escape(&support_text(rule)),
        format_p(rule.p_value)
    );
    for (title, list) in [
        ("Examples", &rule.positives),
        ("Counter-examples", &rule.negatives),
    ] {
        if list.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}:\n");
        for (i, ex) in list.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}. {} ({})",
                i + 1,
                example_line(ex),
                escape(&ex.label)
            );
        }
        out.push('\n');
    }
}

/// Renders the rules as a CommonMark document. The dependent of each
/// example is set in bold, the head underlined.
pub fn emit_markdown(rules: &[Rule], eval: Option<&EvalReport>, metadata: &RunMetadata) -> Vec<u8> {
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", escape(&metadata.title()));
    let _ = writeln!(
        out,
        "Language: {}. Features: {}. Model: {} tree, depth {}, min leaf {}. alpha = {}, seed = {}.\n",
        escape(&metadata.language),
        escape(&metadata.features),
        metadata.params.criterion,
        metadata.params.max_depth,
        metadata.params.min_leaf,
        metadata.alpha,
        metadata.seed,
    );
    if let Some(e) = eval {
        let _ = writeln!(out, "## Evaluation\n");
        let _ = writeln!(out, "| metric | value |\n| --- | --- |");
        let _ = writeln!(out, "| test instances | {} |", e.n_test);
        let _ = writeln!(out, "| model accuracy | {:.4} |", e.model_accuracy);
        let _ = writeln!(
            out,
            "| baseline accuracy ({}) | {:.4} |",
            escape(&e.baseline_label),
            e.baseline_accuracy
        );
        let _ = writeln!(out, "| gain | {:+.4} |", e.gain);
        if let Some(h) = e.entropy {
            let _ = writeln!(out, "| prediction entropy (bits) | {h:.4} |");
        }
        if let Some(a) = e.arm {
            let _ = writeln!(out, "| ARM (tau = {}) | {a:.4} |", metadata.tau);
        }
        out.push('\n');
    }

    let _ = writeln!(out, "## Rules\n");
    let significant: Vec<&Rule> = rules.iter().filter(|r| r.is_significant()).collect();
    if significant.is_empty() {
        let _ = writeln!(out, "_{NO_SIGNIFICANT_RULES}_\n");
    }
    for rule in significant {
        rule_section(&mut out, rule);
    }

    let uncertain: Vec<&Rule> = rules.iter().filter(|r| !r.is_significant()).collect();
    if !uncertain.is_empty() {
        let _ = writeln!(out, "## Uncertain\n");
        let _ = writeln!(
            out,
            "Leaves whose label distribution does not differ significantly from chance.\n"
        );
        for rule in uncertain {
            rule_section(&mut out, rule);
        }
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::tests::{metadata, rules};

    #[test]
    fn sections_and_marks() {
        let md = String::from_utf8(emit_markdown(&rules(), None, &metadata())).unwrap();
        let sig = md.find("### dep-numtype-is-ord → before").unwrap();
        let unc = md.find("## Uncertain").unwrap();
        assert!(sig < unc);
        assert!(md[unc..].contains("NOT (dep-numtype-is-ord) → cannot decide"));
        assert!(md.contains("la **primera** <u>casa&lt;&amp;&gt;</u> (before)"));
        assert!(!md.contains(NO_SIGNIFICANT_RULES));
    }

    #[test]
    fn notice_when_nothing_is_significant() {
        let md = String::from_utf8(emit_markdown(&rules()[..1], None, &metadata())).unwrap();
        assert!(md.contains(NO_SIGNIFICANT_RULES));
        let md = String::from_utf8(emit_markdown(&[], None, &metadata())).unwrap();
        assert!(md.contains(NO_SIGNIFICANT_RULES));
        assert!(!md.contains("## Uncertain"));
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a_b*c"), "a\\_b\\*c");
        assert_eq!(escape("niño"), "niño");
    }
}
