//! Weighted leaderboard scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use slbench_core::evaluator::LengthVerdict;
use slbench_core::Class;

use crate::benchmark::{Setting, STANDARD_K, STANDARD_RULES, STANDARD_SIGMA};
use crate::record::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `|Σ|^k` over its grid total.
    Linear,
    /// `k·ln|Σ|` over its grid total.
    Log,
}

impl FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(WeightMode::Linear),
            "log" => Ok(WeightMode::Log),
            other => Err(format!("unknown weight mode {other:?}")),
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Linear => "linear",
            WeightMode::Log => "log",
        })
    }
}

/// The settings a leaderboard expects to see.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub ks: Vec<usize>,
    pub sigmas: Vec<usize>,
    pub rule_counts: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            ks: STANDARD_K.to_vec(),
            sigmas: STANDARD_SIGMA.to_vec(),
            rule_counts: STANDARD_RULES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardWeights {
    pub mode: WeightMode,
    /// Normalized weight per `(k, |Σ|)` cell.
    pub cells: BTreeMap<(usize, usize), f64>,
    /// Sum of the raw weights.
    pub normalizer: f64,
}

impl LeaderboardWeights {
    pub fn new(mode: WeightMode, grid: &Grid) -> Self {
        let raw = |k: usize, s: usize| match mode {
            WeightMode::Linear => (s as f64).powi(k as i32),
            WeightMode::Log => k as f64 * (s as f64).ln(),
        };
        let mut normalizer = 0.0;
        for &k in &grid.ks {
            for &s in &grid.sigmas {
                normalizer += raw(k, s);
            }
        }
        let mut cells = BTreeMap::new();
        for &k in &grid.ks {
            for &s in &grid.sigmas {
                cells.insert((k, s), raw(k, s) / normalizer);
            }
        }
        Self {
            mode,
            cells,
            normalizer,
        }
    }

    pub fn weight(&self, k: usize, alphabet_size: usize) -> f64 {
        self.cells.get(&(k, alphabet_size)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.cells.values().sum()
    }
}

/// Mean metrics over the records of one setting, as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingScore {
    pub setting: Setting,
    pub count: usize,
    pub recall: f64,
    pub precision: f64,
    pub compatibility: f64,
}

/// Weighted metrics for one class, as percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: Class,
    pub recall: f64,
    pub precision: f64,
    pub compatibility: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthCounts {
    pub shorter: usize,
    pub equal: usize,
    pub longer: usize,
    pub incompatible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub model: String,
    pub mode: WeightMode,
    pub rows: Vec<ClassRow>,
    /// Mean of the class scores over the standard classes present.
    pub overall: Option<ClassRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<LengthCounts>,
    pub settings: Vec<SettingScore>,
    pub warnings: Vec<String>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Per-setting means for every setting present in `records`.
pub fn setting_scores(records: &[&RunRecord]) -> Vec<SettingScore> {
    let mut groups: BTreeMap<Setting, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.setting()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(setting, rs)| SettingScore {
            setting,
            count: rs.len(),
            recall: mean(rs.iter().map(|r| r.recall)),
            precision: mean(rs.iter().map(|r| r.precision)),
            compatibility: mean(rs.iter().map(|r| if r.compatible { 1.0 } else { 0.0 })),
        })
        .collect()
}

fn class_row(
    class: Class,
    settings: &[SettingScore],
    weights: &LeaderboardWeights,
    grid: &Grid,
    warnings: &mut Vec<String>,
) -> ClassRow {
    let (mut recall, mut precision, mut compatibility) = (0.0, 0.0, 0.0);
    for &k in &grid.ks {
        for &s in &grid.sigmas {
            let mut per_n = Vec::new();
            for &n in &grid.rule_counts {
                let setting = Setting {
                    class,
                    k,
                    alphabet_size: s,
                    num_rules: n,
                };
                match settings.iter().find(|x| x.setting == setting) {
                    Some(x) => per_n.push((x.recall, x.precision, x.compatibility)),
                    None => {
                        warnings.push(format!("{class} k={k} |Σ|={s} n={n}: no records, scored 0"));
                        per_n.push((0.0, 0.0, 0.0));
                    }
                }
            }
            let w = weights.weight(k, s);
            recall += w * mean(per_n.iter().map(|x| x.0));
            precision += w * mean(per_n.iter().map(|x| x.1));
            compatibility += w * mean(per_n.iter().map(|x| x.2));
        }
    }
    ClassRow {
        class,
        recall: 100.0 * recall,
        precision: 100.0 * precision,
        compatibility: 100.0 * compatibility,
        score: 100.0 * (recall + precision + compatibility) / 3.0,
    }
}

/// One leaderboard per model in `records`, sorted by model name.
///
/// Within each `(k, |Σ|)` cell the per-setting means are averaged over the
/// rule counts with equal weight, then weighted. Settings of the grid with
/// no records count as zero and produce a warning. Records outside the grid
/// are ignored with a warning.
pub fn score_leaderboard(records: &[RunRecord], mode: WeightMode, grid: &Grid) -> Vec<Leaderboard> {
    let weights = LeaderboardWeights::new(mode, grid);
    let models: BTreeSet<&str> = records.iter().map(|r| r.model.as_str()).collect();
    models
        .into_iter()
        .map(|model| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| r.model == model).collect();
            let settings = setting_scores(&mine);
            let mut warnings = Vec::new();
            for s in &settings {
                let in_grid = grid.ks.contains(&s.setting.k)
                    && grid.sigmas.contains(&s.setting.alphabet_size)
                    && grid.rule_counts.contains(&s.setting.num_rules);
                if !in_grid {
                    warnings.push(format!(
                        "{} k={} |Σ|={} n={}: outside the grid, ignored",
                        s.setting.class, s.setting.k, s.setting.alphabet_size, s.setting.num_rules
                    ));
                }
            }
            let present: BTreeSet<Class> = mine.iter().map(|r| r.class).collect();
            let mut classes: Vec<Class> = Vec::new();
            if Class::STANDARD.iter().any(|c| present.contains(c)) {
                classes.extend(Class::STANDARD);
            }
            if present.contains(&Class::Iosl) {
                classes.push(Class::Iosl);
            }
            let rows: Vec<ClassRow> = classes
                .iter()
                .map(|&c| class_row(c, &settings, &weights, grid, &mut warnings))
                .collect();
            let standard: Vec<&ClassRow> = rows.iter().filter(|r| r.class != Class::Iosl).collect();
            let overall = (!standard.is_empty()).then(|| ClassRow {
                class: Class::Isl,
                recall: mean(standard.iter().map(|r| r.recall)),
                precision: mean(standard.iter().map(|r| r.precision)),
                compatibility: mean(standard.iter().map(|r| r.compatibility)),
                score: mean(standard.iter().map(|r| r.score)),
            });
            let lengths = present.contains(&Class::Iosl).then(|| {
                let mut c = LengthCounts::default();
                for r in mine.iter().filter(|r| r.class == Class::Iosl) {
                    match r.description_length {
                        Some(LengthVerdict::Shorter) => c.shorter += 1,
                        Some(LengthVerdict::Equal) => c.equal += 1,
                        Some(LengthVerdict::Longer) => c.longer += 1,
                        None => c.incompatible += 1,
                    }
                }
                c
            });
            Leaderboard {
                model: model.to_string(),
                mode,
                rows,
                overall,
                lengths,
                settings,
                warnings,
            }
        })
        .collect()
}

/// CSV summary: one line per class plus an `overall` line per model.
/// Percentages have two decimals.
pub fn summary_csv(boards: &[Leaderboard]) -> String {
    let mut out = String::from("model,weights,class,recall,precision,compatibility,score\n");
    for b in boards {
        for r in &b.rows {
            out.push_str(&format!(
                "{},{},{},{:.2},{:.2},{:.2},{:.2}\n",
                b.model, b.mode, r.class, r.recall, r.precision, r.compatibility, r.score
            ));
        }
        if let Some(o) = &b.overall {
            out.push_str(&format!(
                "{},{},overall,{:.2},{:.2},{:.2},{:.2}\n",
                b.model, b.mode, o.recall, o.precision, o.compatibility, o.score
            ));
        }
    }
    out
}

/// CSV in the layout of a per-setting results table: one line per model and
/// `(k, |Σ|, n)`, with recall, precision and compatibility for each class.
pub fn settings_csv(boards: &[Leaderboard]) -> String {
    let classes = [Class::Isl, Class::LOsl, Class::ROsl, Class::Iosl];
    let mut out = String::from("model,k,alphabet_size,num_rules");
    for c in classes {
        for m in ["recall", "precision", "compatibility"] {
            out.push_str(&format!(",{c} {m}"));
        }
    }
    out.push('\n');
    for b in boards {
        let keys: BTreeSet<(usize, usize, usize)> = b
            .settings
            .iter()
            .map(|s| (s.setting.k, s.setting.alphabet_size, s.setting.num_rules))
            .collect();
        for (k, s, n) in keys {
            out.push_str(&format!("{},{k},{s},{n}", b.model));
            for c in classes {
                match b.settings.iter().find(|x| {
                    x.setting
                        == Setting {
                            class: c,
                            k,
                            alphabet_size: s,
                            num_rules: n,
                        }
                }) {
                    Some(x) => out.push_str(&format!(
                        ",{:.2},{:.2},{:.2}",
                        100.0 * x.recall,
                        100.0 * x.precision,
                        100.0 * x.compatibility
                    )),
                    None => out.push_str(",,,"),
                }
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_weights() {
        let w = LeaderboardWeights::new(WeightMode::Linear, &Grid::default());
        assert_eq!(w.normalizer, 9788.0);
        assert!((w.weight(4, 8) - 4096.0 / 9788.0).abs() < 1e-12);
        assert!((w.weight(4, 8) - 0.41847).abs() < 1e-5);
        assert!((w.total() - 1.0).abs() < 1e-12);
        assert_eq!(w.cells.len(), 12);
    }

    #[test]
    fn log_weights() {
        let w = LeaderboardWeights::new(WeightMode::Log, &Grid::default());
        assert!((w.total() - 1.0).abs() < 1e-12);
        let expected = 2.0 * 5f64.ln() / w.normalizer;
        assert!((w.weight(2, 5) - expected).abs() < 1e-15);
        assert!(w.weight(4, 8) < 4096.0 / 9788.0);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("LOG".parse::<WeightMode>().unwrap(), WeightMode::Log);
        assert!("cubic".parse::<WeightMode>().is_err());
    }
}
