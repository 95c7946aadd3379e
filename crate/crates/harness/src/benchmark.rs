//! Standard and exploration benchmark assembly.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use slbench_core::generator::{generate, GenSetting};
use slbench_core::sampler::{characteristic_sample, expand, iosl_sample};
use slbench_core::seed::derive_seed;
use slbench_core::{Alphabet, Class, Dataset, Result, Rule, RuleSet, SampleKind, SamplePair};

pub const STANDARD_K: [usize; 3] = [2, 3, 4];
pub const STANDARD_SIGMA: [usize; 4] = [5, 6, 7, 8];
pub const STANDARD_RULES: [usize; 3] = [3, 4, 5];
pub const DEFAULT_MULTIPLE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecName {
    Standard,
    Exploration,
}

impl fmt::Display for SpecName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpecName::Standard => "standard",
            SpecName::Exploration => "exploration",
        })
    }
}

impl FromStr for SpecName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(SpecName::Standard),
            "exploration" => Ok(SpecName::Exploration),
            other => Err(format!("unknown benchmark spec {other:?}")),
        }
    }
}

/// One grid setting and how many datapoints to draw for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub class: Class,
    pub k: usize,
    pub alphabet_size: usize,
    pub num_rules: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub name: SpecName,
    pub grid: Vec<GridCell>,
    pub base_seed: u64,
    /// Sample multiple for the standard classes; ignored for IOSL.
    pub multiple: usize,
}

fn grid(classes: &[Class], count: usize) -> Vec<GridCell> {
    let mut cells = Vec::new();
    for &class in classes {
        for k in STANDARD_K {
            for alphabet_size in STANDARD_SIGMA {
                for num_rules in STANDARD_RULES {
                    cells.push(GridCell {
                        class,
                        k,
                        alphabet_size,
                        num_rules,
                        count,
                    });
                }
            }
        }
    }
    cells
}

impl BenchmarkSpec {
    /// ISL, L-OSL and R-OSL over the 36 settings, 10 datapoints each.
    pub fn standard(base_seed: u64) -> Self {
        Self {
            name: SpecName::Standard,
            grid: grid(&Class::STANDARD, 10),
            base_seed,
            multiple: DEFAULT_MULTIPLE,
        }
    }

    /// IOSL over the same 36 settings, 30 datapoints each.
    pub fn exploration(base_seed: u64) -> Self {
        Self {
            name: SpecName::Exploration,
            grid: grid(&[Class::Iosl], 30),
            base_seed,
            multiple: 1,
        }
    }

    pub fn named(name: SpecName, base_seed: u64) -> Self {
        match name {
            SpecName::Standard => Self::standard(base_seed),
            SpecName::Exploration => Self::exploration(base_seed),
        }
    }

    pub fn total(&self) -> usize {
        self.grid.iter().map(|c| c.count).sum()
    }
}

/// A benchmark question: the hidden rule set and the sample shown to the
/// model. This is the on-disk JSONL line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Datapoint {
    pub id: String,
    pub class: Class,
    pub k: usize,
    pub alphabet: Alphabet,
    pub num_rules: usize,
    /// Generator seed; the sample seed is derived from it.
    pub seed: u64,
    pub multiple: usize,
    pub kind: SampleKind,
    pub rules: Vec<Rule>,
    pub pairs: Vec<SamplePair>,
}

impl Datapoint {
    pub fn new(id: impl Into<String>, d: Dataset) -> Self {
        let f = d.ruleset;
        Self {
            id: id.into(),
            class: f.class,
            k: f.k,
            alphabet: f.alphabet,
            num_rules: f.rules.len(),
            seed: d.seed,
            multiple: d.multiple,
            kind: d.kind,
            rules: f.rules,
            pairs: d.pairs,
        }
    }

    pub fn ruleset(&self) -> RuleSet {
        RuleSet::new(
            self.class,
            self.k,
            self.alphabet.clone(),
            self.rules.clone(),
        )
    }

    pub fn dataset(&self) -> Dataset {
        Dataset {
            ruleset: self.ruleset(),
            pairs: self.pairs.clone(),
            multiple: self.multiple,
            seed: self.seed,
            kind: self.kind,
        }
    }

    pub fn setting(&self) -> Setting {
        Setting {
            class: self.class,
            k: self.k,
            alphabet_size: self.alphabet.len(),
            num_rules: self.num_rules,
        }
    }
}

/// The `(class, k, |Σ|, n)` coordinates of a datapoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Setting {
    pub class: Class,
    pub k: usize,
    pub alphabet_size: usize,
    pub num_rules: usize,
}

pub fn datapoint_id(cell: &GridCell, index: usize) -> String {
    format!(
        "{}-k{}-s{}-n{}-{:02}",
        cell.class.name().to_ascii_lowercase().replace('-', ""),
        cell.k,
        cell.alphabet_size,
        cell.num_rules,
        index
    )
}

/// Draws one datapoint. The seed depends only on the base seed and the
/// datapoint's coordinates.
pub fn build_datapoint(
    cell: &GridCell,
    index: usize,
    base_seed: u64,
    multiple: usize,
) -> Result<Datapoint> {
    let seed = derive_seed(
        base_seed,
        &[
            cell.class.index(),
            cell.k as u64,
            cell.alphabet_size as u64,
            cell.num_rules as u64,
            index as u64,
        ],
    );
    let setting = GenSetting::new(cell.class, cell.k, cell.alphabet_size, cell.num_rules, seed);
    let f = generate(&setting)?;
    let sample_seed = derive_seed(seed, &[1]);
    let d = match cell.class {
        Class::Iosl => iosl_sample(&f, sample_seed)?,
        _ => expand(&characteristic_sample(&f)?, multiple, sample_seed)?,
    };
    let mut p = Datapoint::new(datapoint_id(cell, index), d);
    p.seed = seed;
    Ok(p)
}

/// Every datapoint of `spec`, in grid order. Generation runs in parallel but
/// the result depends only on the spec.
pub fn build_benchmark(spec: &BenchmarkSpec) -> Result<Vec<Datapoint>> {
    let jobs: Vec<(GridCell, usize)> = spec
        .grid
        .iter()
        .flat_map(|cell| (0..cell.count).map(move |i| (*cell, i)))
        .collect();
    jobs.par_iter()
        .map(|(cell, i)| build_datapoint(cell, *i, spec.base_seed, spec.multiple))
        .collect()
}

/// Re-draws the sample of `p` at a new multiple, keeping the rule set. IOSL
/// samples have a fixed size and are returned unchanged.
pub fn resample(p: &Datapoint, multiple: usize, repeat: bool) -> Result<Datapoint> {
    if p.class == Class::Iosl {
        return Ok(p.clone());
    }
    let base = characteristic_sample(&p.ruleset())?;
    let d = if repeat {
        slbench_core::sampler::repeat(&base, multiple)?
    } else {
        expand(&base, multiple, derive_seed(p.seed, &[1]))?
    };
    let mut out = Datapoint::new(p.id.clone(), d);
    out.seed = p.seed;
    Ok(out)
}
