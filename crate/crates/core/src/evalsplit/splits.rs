use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train_keys: Vec<String>,
    pub test_keys: Vec<String>,
}

/// k-fold layout; serialized as a bare JSON list of folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitSet {
    pub folds: Vec<Fold>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SplitFile {
    Bare(Vec<Fold>),
    Wrapped { splits: Vec<Fold> },
}

impl SplitSet {
    /// Accepts a bare list of folds or a `{"splits": [...]}` wrapper.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        // Parse once into a value so syntax errors keep their position.
        let value: serde_json::Value = serde_json::from_str(text)?;
        let file: SplitFile = serde_json::from_value(value)?;
        Ok(match file {
            SplitFile::Bare(folds) | SplitFile::Wrapped { splits: folds } => SplitSet { folds },
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SplitSet::from_json(&text).map_err(|e| Error::json(path, e))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("splits serialize");
        s.push('\n');
        s
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Folds whose train and test lists share a key.
    pub fn overlapping_folds(&self) -> Vec<usize> {
        self.folds
            .iter()
            .enumerate()
            .filter(|(_, f)| {
                let train: BTreeSet<&String> = f.train_keys.iter().collect();
                f.test_keys.iter().any(|k| train.contains(k))
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Seeded non-overlapping k-fold split: every key is tested exactly once.
///
/// Test folds are consecutive slices of a shuffled copy of `universe`; the
/// first `|universe| mod k` folds hold one extra key. Train keys keep
/// universe order.
pub fn generate_splits(universe: &[String], k: usize, seed: u64) -> Result<SplitSet> {
    if k == 0 || k > universe.len() {
        return Err(Error::range(
            "k",
            format!("{k} folds for {} keys", universe.len()),
        ));
    }
    let distinct: BTreeSet<&String> = universe.iter().collect();
    if distinct.len() != universe.len() {
        return Err(Error::Invalid(vec!["universe contains duplicate keys".into()]));
    }
    let mut shuffled = universe.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let base = universe.len() / k;
    let extra = universe.len() % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        let test_keys = shuffled[start..start + len].to_vec();
        start += len;
        let test: BTreeSet<&String> = test_keys.iter().collect();
        let train_keys = universe.iter().filter(|key| !test.contains(key)).cloned().collect();
        folds.push(Fold {
            train_keys,
            test_keys,
        });
    }
    Ok(SplitSet { folds })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyCount {
    pub key: String,
    pub count: usize,
}

/// Test-set coverage of a split layout over a key universe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub universe_size: usize,
    /// Universe keys never tested.
    pub missing: Vec<String>,
    /// Universe keys tested in two or more folds.
    pub duplicated: Vec<KeyCount>,
    /// Split keys absent from the universe.
    pub unknown: Vec<String>,
    pub missing_fraction: f64,
    pub duplicated_fraction: f64,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.duplicated.is_empty() && self.unknown.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("audit serializes");
        s.push('\n');
        s
    }

    /// Markdown summary table followed by the key lists.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let pct = |f: f64| format!("{:.1}%", 100.0 * f);
        s.push_str("| metric | count | fraction |\n|---|---:|---:|\n");
        let _ = writeln!(s, "| universe | {} | |", self.universe_size);
        let _ = writeln!(s, "| never tested | {} | {} |", self.missing.len(), pct(self.missing_fraction));
        let _ = writeln!(s, "| tested more than once | {} | {} |", self.duplicated.len(), pct(self.duplicated_fraction));
        let _ = writeln!(s, "| unknown keys | {} | |", self.unknown.len());
        if !self.missing.is_empty() {
            let _ = writeln!(s, "\nnever tested: {}", self.missing.join(", "));
        }
        if !self.duplicated.is_empty() {
            let list: Vec<String> = self.duplicated.iter().map(|d| format!("{}×{}", d.key, d.count)).collect();
            let _ = writeln!(s, "tested more than once: {}", list.join(", "));
        }
        if !self.unknown.is_empty() {
            let _ = writeln!(s, "unknown: {}", self.unknown.join(", "));
        }
        s
    }
}

/// Counts each key's test multiplicity across folds.
pub fn audit_splits(splits: &SplitSet, universe: &[String]) -> AuditReport {
    let known: BTreeSet<&str> = universe.iter().map(String::as_str).collect();
    let mut counts: BTreeMap<&str, usize> = universe.iter().map(|k| (k.as_str(), 0)).collect();
    let mut unknown = BTreeSet::new();
    for fold in &splits.folds {
        for key in &fold.test_keys {
            match counts.get_mut(key.as_str()) {
                Some(c) => *c += 1,
                None => {
                    unknown.insert(key.clone());
                }
            }
        }
        for key in &fold.train_keys {
            if !known.contains(key.as_str()) {
                unknown.insert(key.clone());
            }
        }
    }

    let mut missing: Vec<String> = counts
        .iter()
        .filter(|(_, &c)| c == 0)
        .map(|(k, _)| k.to_string())
        .collect();
    let mut duplicated: Vec<KeyCount> = counts
        .iter()
        .filter(|(_, &c)| c >= 2)
        .map(|(k, &c)| KeyCount {
            key: k.to_string(),
            count: c,
        })
        .collect();
    let mut unknown: Vec<String> = unknown.into_iter().collect();
    missing.sort_by(|a, b| natural_cmp(a, b));
    duplicated.sort_by(|a, b| natural_cmp(&a.key, &b.key));
    unknown.sort_by(|a, b| natural_cmp(a, b));

    let n = counts.len();
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    AuditReport {
        universe_size: n,
        missing_fraction: frac(missing.len()),
        duplicated_fraction: frac(duplicated.len()),
        missing,
        duplicated,
        unknown,
    }
}

/// Orders `video_2` before `video_10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(&cb) {
        let ord = if *da && *db {
            let (ta, tb) = (sa.trim_start_matches('0'), sb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then(ta.cmp(tb))
        } else {
            sa.cmp(sb)
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then(a.cmp(b))
}
