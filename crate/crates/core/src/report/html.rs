use std::fmt::Write;

use super::{format_p, marks, support_text, Mark, RunMetadata, NO_SIGNIFICANT_RULES};
use crate::eval::EvalReport;
use crate::ruleset::{Example, Rule};

const STYLE: &str =
    "body{font-family:sans-serif;max-width:60em;margin:2em auto;padding:0 1em;color:#222}\
table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.2em .6em;text-align:left}\
section.rule{border-left:4px solid #2a6;padding:.2em 1em;margin:1.5em 0}\
section.uncertain{border-left-color:#bbb;color:#777}\
.dep{font-weight:bold}.head{text-decoration:underline}\
.cond{font-family:monospace}.notice{font-style:italic}";

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn example_html(example: &Example) -> String {
    marks(example)
        .map(|(form, mark)| match mark {
            Mark::Dep => format!("<b class=\"dep\">{}</b>", escape(form)),
            Mark::Head => format!("<u class=\"head\">{}</u>", escape(form)),
            Mark::Plain => escape(form),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn rule_html(out: &mut String, rule: &Rule) {
    let class = if rule.is_significant() {
        "rule"
    } else {
        "rule uncertain"
    };
    let _ = writeln!(out, "<section class=\"{class}\" id=\"leaf-{}\">", rule.leaf);
    let _ = writeln!(out, "<h3>→ {}</h3>", escape(&rule.label.to_string()));
    if rule.conditions.is_empty() {
        let _ = writeln!(out, "<p class=\"cond\">all instances</p>");
    } else {
        out.push_str("<ul>\n");
        for c in &rule.conditions {
            let _ = writeln!(out, "<li class=\"cond\">{}</li>", escape(&c.to_string()));
        }
        out.push_str("</ul>\n");
    }
    let _ = writeln!(
        out,
        "<p>Majority: {}. Support: {}. p-value: {}.</p>",
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
        let _ = writeln!(out, "<h4>{title}</h4>\n<ol>");
        for ex in list {
            let _ = writeln!(
                out,
                "<li>{} <small>({})</small></li>",
                example_html(ex),
                escape(&ex.label)
            );
        }
        out.push_str("</ol>\n");
    }
    out.push_str("</section>\n");
}

/// Renders a single self-contained HTML5 page. Markup is kept XML
/// well-formed.
pub fn emit_html(rules: &[Rule], eval: Option<&EvalReport>, metadata: &RunMetadata) -> Vec<u8> {
    let title = escape(&metadata.title());
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n");
    let _ = writeln!(
        out,
        "<title>{title}</title>\n<style>{STYLE}</style>\n</head>\n<body>"
    );
    let _ = writeln!(out, "<h1>{title}</h1>");
    let _ = writeln!(
        out,
        "<p>Language: {}. Features: {}. Model: {} tree, depth {}, min leaf {}. alpha = {}, seed = {}.</p>",
        escape(&metadata.language),
        escape(&metadata.features),
        metadata.params.criterion,
        metadata.params.max_depth,
        metadata.params.min_leaf,
        metadata.alpha,
        metadata.seed,
    );
    if let Some(e) = eval {
        out.push_str("<h2>Evaluation</h2>\n<table>\n");
        let mut row = |k: String, v: String| {
            let _ = writeln!(out, "<tr><th>{k}</th><td>{v}</td></tr>");
        };
        row("test instances".into(), e.n_test.to_string());
        row("model accuracy".into(), format!("{:.4}", e.model_accuracy));
        row(
            format!("baseline accuracy ({})", escape(&e.baseline_label)),
            format!("{:.4}", e.baseline_accuracy),
        );
        row("gain".into(), format!("{:+.4}", e.gain));
        if let Some(h) = e.entropy {
            row("prediction entropy (bits)".into(), format!("{h:.4}"));
        }
        if let Some(a) = e.arm {
            row(format!("ARM (tau = {})", metadata.tau), format!("{a:.4}"));
        }
        out.push_str("</table>\n");
    }
    out.push_str("<h2>Rules</h2>\n");
    if !rules.iter().any(Rule::is_significant) {
        let _ = writeln!(out, "<p class=\"notice\">{NO_SIGNIFICANT_RULES}</p>");
    }
    for rule in rules.iter().filter(|r| r.is_significant()) {
        rule_html(&mut out, rule);
    }
    if rules.iter().any(|r| !r.is_significant()) {
        out.push_str("<h2>Uncertain</h2>\n");
        for rule in rules.iter().filter(|r| !r.is_significant()) {
            rule_html(&mut out, rule);
        }
    }
    out.push_str("</body>\n</html>\n");
    out.into_bytes()
}
