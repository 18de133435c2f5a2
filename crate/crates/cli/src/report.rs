//! Ablation and cross-validation tables from evaluation files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use anyhow::{bail, Result};
use mcsf_core::model::Strategy;
use mcsf_core::EvalMode;

use crate::commands::pipeline::EvaluationFile;
use crate::fail::Usage;

/// `(fusion, features)` cells of an ablation row.
pub fn row_labels(s: Strategy) -> (&'static str, &'static str) {
    match s {
        Strategy::Single(mcsf_core::SourceTag::Objects) => ("-", "O"),
        Strategy::Single(mcsf_core::SourceTag::Places) => ("-", "P"),
        Strategy::Early => ("Early", "O + P"),
        Strategy::Intermediate => ("Intermediate", "O + P"),
        Strategy::Late => ("Late", "O + P"),
    }
}

fn method_label(s: Strategy) -> String {
    match row_labels(s) {
        ("-", f) => f.to_string(),
        (fusion, f) => format!("{f} ({})", fusion.to_lowercase()),
    }
}

/// Percent with one decimal; `-` when absent.
pub fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{:.1}", 100.0 * v))
}

fn label_order(a: &str, b: &str) -> std::cmp::Ordering {
    let rank = |s: &str| match s {
        "F1" => 0,
        "F1'" => 1,
        "F1*" => 2,
        _ => 3,
    };
    rank(a).cmp(&rank(b)).then_with(|| a.cmp(b))
}

type Key = (String, Strategy, String, EvalMode);

pub struct Tables {
    pub markdown: String,
    pub ablation_csv: Vec<u8>,
    pub cross_validation_csv: Vec<u8>,
}

/// Renders both tables. Row and column order depend only on the contents,
/// never on the order of `evals`.
pub fn render(evals: &[EvaluationFile], only_mode: Option<EvalMode>) -> Result<Tables> {
    let mut scores: BTreeMap<Key, f64> = BTreeMap::new();
    for e in evals {
        let key = (e.dataset.clone(), e.strategy, e.split_label.clone(), e.mode);
        if scores.insert(key, e.overall).is_some() {
            bail!(Usage(format!(
                "two evaluations for {} / {} / {} / {}",
                e.dataset, e.strategy, e.split_label, e.mode
            )));
        }
    }
    if scores.is_empty() {
        bail!(Usage("no evaluations to report".into()));
    }
    let datasets: BTreeSet<&String> = scores.keys().map(|k| &k.0).collect();
    let mut labels: Vec<&String> = scores.keys().map(|k| &k.2).collect::<BTreeSet<_>>().into_iter().collect();
    labels.sort_by(|a, b| label_order(a, b));
    let get = |d: &str, s: Strategy, l: &str, m: EvalMode| scores.get(&(d.to_string(), s, l.to_string(), m)).copied();

    let mut md = String::new();
    let mut ablation = csv::Writer::from_writer(Vec::new());

    md.push_str("## Ablation\n\n| Dataset | Fusion | Features |");
    let mut header = vec!["dataset".to_string(), "mode".into(), "fusion".into(), "features".into()];
    for l in &labels {
        let _ = write!(md, " {l} |");
        header.push(l.to_string());
    }
    md.push_str("\n|---|---|---|");
    md.push_str(&"---:|".repeat(labels.len()));
    md.push('\n');
    ablation.write_record(&header)?;
    for d in &datasets {
        let modes: BTreeSet<EvalMode> = scores
            .keys()
            .filter(|k| &k.0 == *d && only_mode.map_or(true, |m| m == k.3))
            .map(|k| k.3)
            .collect();
        for &m in &modes {
            let name = if modes.len() > 1 { format!("{d} ({m})") } else { d.to_string() };
            for s in Strategy::ALL {
                let (fusion, features) = row_labels(s);
                let cells: Vec<String> = labels.iter().map(|l| cell(get(d, s, l, m))).collect();
                let _ = writeln!(md, "| {name} | {fusion} | {features} | {} |", cells.join(" | "));
                let mut rec = vec![d.to_string(), m.to_string(), fusion.into(), features.into()];
                rec.extend(cells);
                ablation.write_record(&rec)?;
            }
        }
    }

    md.push_str("\n## Cross-validation\n\n| Dataset | Method |");
    let mut cv = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset".to_string(), "method".into()];
    for l in &labels {
        let _ = write!(md, " {l} Avg | {l} Max |");
        header.push(format!("{l} avg"));
        header.push(format!("{l} max"));
    }
    md.push_str("\n|---|---|");
    md.push_str(&"---:|".repeat(2 * labels.len()));
    md.push('\n');
    cv.write_record(&header)?;
    for d in &datasets {
        for s in Strategy::ALL {
            if !scores.keys().any(|k| &k.0 == *d && k.1 == s) {
                continue;
            }
            let mut cells = Vec::new();
            for l in &labels {
                cells.push(cell(get(d, s, l, EvalMode::Avg)));
                cells.push(cell(get(d, s, l, EvalMode::Max)));
            }
            let _ = writeln!(md, "| {d} | {} | {} |", method_label(s), cells.join(" | "));
            let mut rec = vec![d.to_string(), method_label(s)];
            rec.extend(cells);
            cv.write_record(&rec)?;
        }
    }

    Ok(Tables {
        markdown: md,
        ablation_csv: ablation.into_inner()?,
        cross_validation_csv: cv.into_inner()?,
    })
}
