//! Characteristic samples and their expansions.

use std::collections::HashSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::alphabet::shortlex_cmp;
use crate::seed;
use crate::strings::reversed;
use crate::transducer::{apply, apply_with_policy, MatchPolicy};
use crate::{Class, Error, Result, RuleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Characteristic,
    Expanded,
    Repeated,
    IoslFixed,
}

/// An input/output pair; serialized as a two-element array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(String, String)", into = "(String, String)")]
pub struct SamplePair {
    pub input: String,
    pub output: String,
}

impl SamplePair {
    pub fn new(input: impl Into<String>, output: impl Into<String>) -> Self {
        Self {
            input: input.into(),
            output: output.into(),
        }
    }
}

impl From<(String, String)> for SamplePair {
    fn from((input, output): (String, String)) -> Self {
        Self { input, output }
    }
}

impl From<SamplePair> for (String, String) {
    fn from(p: SamplePair) -> Self {
        (p.input, p.output)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub ruleset: RuleSet,
    pub pairs: Vec<SamplePair>,
    pub multiple: usize,
    pub seed: u64,
    pub kind: SampleKind,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn distinct_inputs(&self) -> usize {
        self.pairs
            .iter()
            .map(|p| p.input.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    /// Every pair agrees with the ground truth.
    pub fn is_consistent(&self) -> Result<bool> {
        for p in &self.pairs {
            if apply(&self.ruleset, &p.input)? != p.output {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Indices of ground-truth rules that fire on none of the inputs.
    pub fn uncovered_rules(&self) -> Result<Vec<usize>> {
        let mut fired = vec![false; self.ruleset.len()];
        for p in &self.pairs {
            let (_, trace) = apply_with_policy(&self.ruleset, &p.input, MatchPolicy::Strict)?;
            for i in trace.fired_rules() {
                fired[i] = true;
            }
        }
        Ok((0..fired.len()).filter(|&i| !fired[i]).collect())
    }
}

fn pairs_for(f: &RuleSet, inputs: impl IntoIterator<Item = String>) -> Result<Vec<SamplePair>> {
    inputs
        .into_iter()
        .map(|w| {
            let out = apply(f, &w)?;
            Ok(SamplePair::new(w, out))
        })
        .collect()
}

/// Inputs `w` with `1 <= |w| <= max_input` and `|g(w)| <= max_output` for an
/// L-OSL set `g`. The output of a prefix is a prefix of the output, so a
/// branch is cut as soon as its output is too long.
fn bounded_output_inputs(g: &RuleSet, max_input: usize, max_output: usize) -> Result<Vec<String>> {
    let mut found = Vec::new();
    let mut stack = vec![String::new()];
    while let Some(w) = stack.pop() {
        if w.len() >= max_input {
            continue;
        }
        for &c in g.alphabet.symbols() {
            let mut next = w.clone();
            next.push(c);
            if apply(g, &next)?.len() <= max_output {
                found.push(next.clone());
                stack.push(next);
            }
        }
    }
    Ok(found)
}

/// The characteristic sample of `f`, without the empty pair, in shortlex
/// order.
///
/// ISL: every input of length `1..=k`. L-OSL / R-OSL: every input of length
/// `1..=2k` whose output has at most `k` symbols.
pub fn characteristic_sample(f: &RuleSet) -> Result<Dataset> {
    let k = f.k;
    let mut inputs = match f.class {
        Class::Isl => f.alphabet.strings_between(1, k),
        Class::LOsl => bounded_output_inputs(f, 2 * k, k)?,
        Class::ROsl => bounded_output_inputs(&f.reversed_encoding(), 2 * k, k)?
            .into_iter()
            .map(|w| reversed(&w))
            .collect(),
        Class::Iosl => return Err(Error::UnsupportedClass(Class::Iosl)),
    };
    inputs.sort_by(|a, b| shortlex_cmp(a, b));
    inputs.dedup();
    Ok(Dataset {
        pairs: pairs_for(f, inputs)?,
        ruleset: f.clone(),
        multiple: 1,
        seed: 0,
        kind: SampleKind::Characteristic,
    })
}

/// Length cap for fresh inputs added by [`expand`] is `k + 2`.
pub fn expansion_max_len(k: usize) -> usize {
    k + 2
}

/// Grows `d` to `multiple × |d|` pairs: all of `d` first, then fresh distinct
/// random inputs with uniform length in `1..=k+2` and uniform symbols.
pub fn expand(d: &Dataset, multiple: usize, seed: u64) -> Result<Dataset> {
    if multiple == 0 {
        return Err(Error::InvalidSetting("multiple must be at least 1".into()));
    }
    if multiple == 1 {
        return Ok(d.clone());
    }
    let f = &d.ruleset;
    let max_len = expansion_max_len(f.k);
    let mut seen: HashSet<String> = d.pairs.iter().map(|p| p.input.clone()).collect();
    let needed = d.len() * (multiple - 1);
    let occupied = seen
        .iter()
        .filter(|w| (1..=max_len).contains(&w.len()))
        .count();
    let available = f
        .alphabet
        .count_between(1, max_len)
        .saturating_sub(occupied);
    if needed > available {
        return Err(Error::InputSpaceExhausted { needed, available });
    }
    let mut rng = seed::rng(seed);
    let symbols = f.alphabet.symbols();
    let mut fresh = Vec::with_capacity(needed);
    while fresh.len() < needed {
        let len = rng.random_range(1..=max_len);
        let w: String = (0..len)
            .map(|_| symbols[rng.random_range(0..symbols.len())])
            .collect();
        if seen.insert(w.clone()) {
            fresh.push(w);
        }
    }
    let mut pairs = d.pairs.clone();
    pairs.extend(pairs_for(f, fresh)?);
    Ok(Dataset {
        ruleset: f.clone(),
        pairs,
        multiple: d.multiple * multiple,
        seed,
        kind: SampleKind::Expanded,
    })
}

/// `d` concatenated with itself `multiple` times, duplicates kept.
pub fn repeat(d: &Dataset, multiple: usize) -> Result<Dataset> {
    if multiple == 0 {
        return Err(Error::InvalidSetting("multiple must be at least 1".into()));
    }
    if multiple == 1 {
        return Ok(d.clone());
    }
    Ok(Dataset {
        ruleset: d.ruleset.clone(),
        pairs: d
            .pairs
            .iter()
            .cloned()
            .cycle()
            .take(d.len() * multiple)
            .collect(),
        multiple: d.multiple * multiple,
        seed: d.seed,
        kind: SampleKind::Repeated,
    })
}

/// Fixed-size IOSL sample of `2·|Σ|^k` pairs: every input of length `1..=k`
/// in shortlex order, then distinct random inputs of length `k+1..=k+2`.
pub fn iosl_sample(f: &RuleSet, seed: u64) -> Result<Dataset> {
    if f.class != Class::Iosl {
        return Err(Error::UnsupportedClass(f.class));
    }
    let k = f.k;
    let total = 2 * f.alphabet.len().pow(k as u32);
    let mut inputs = f.alphabet.strings_between(1, k);
    let mut seen: HashSet<String> = HashSet::new();
    let mut rng = seed::rng(seed);
    let symbols = f.alphabet.symbols();
    while inputs.len() < total {
        let len = rng.random_range(k + 1..=k + 2);
        let w: String = (0..len)
            .map(|_| symbols[rng.random_range(0..symbols.len())])
            .collect();
        if seen.insert(w.clone()) {
            inputs.push(w);
        }
    }
    Ok(Dataset {
        pairs: pairs_for(f, inputs)?,
        ruleset: f.clone(),
        multiple: 1,
        seed,
        kind: SampleKind::IoslFixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate, GenSetting};
    use crate::{Alphabet, Rule};

    fn isl(k: usize, rules: Vec<Rule>) -> RuleSet {
        RuleSet::new(Class::Isl, k, Alphabet::first(2).unwrap(), rules)
    }

    #[test]
    fn isl_k2_has_six_pairs() {
        let d = characteristic_sample(&isl(2, vec![Rule::new("b", 'a', "b")])).unwrap();
        let inputs: Vec<_> = d.pairs.iter().map(|p| p.input.as_str()).collect();
        assert_eq!(inputs, ["a", "b", "aa", "ab", "ba", "bb"]);
        let identity = characteristic_sample(&isl(2, vec![])).unwrap();
        assert_eq!(identity.len(), 6);
        assert!(identity.pairs.iter().all(|p| p.input == p.output));
    }

    #[test]
    fn isl_box_pairs() {
        let d = characteristic_sample(&isl(3, vec![Rule::new("ba", 'b', "a")])).unwrap();
        assert_eq!(d.len(), 14);
        assert!(d.pairs.contains(&SamplePair::new("bab", "baa")));
        assert!(d.pairs.contains(&SamplePair::new("bbb", "bbb")));
    }

    #[test]
    fn osl_sample_bounds_outputs() {
        let f = RuleSet::new(
            Class::LOsl,
            3,
            Alphabet::first(2).unwrap(),
            vec![Rule::new("ba", 'b', "")],
        );
        let d = characteristic_sample(&f).unwrap();
        assert!(d
            .pairs
            .iter()
            .all(|p| p.output.len() <= 3 && p.input.len() <= 6));
        // Deletion lets long inputs in: "babbbb" -> "ba".
        assert!(d.pairs.contains(&SamplePair::new("babbbb", "ba")));
        assert!(d.is_consistent().unwrap());
        assert!(d.uncovered_rules().unwrap().is_empty());
        let mut sorted = d.pairs.clone();
        sorted.sort_by(|a, b| shortlex_cmp(&a.input, &b.input));
        assert_eq!(sorted, d.pairs);
    }

    #[test]
    fn rosl_sample_matches_direct_application() {
        let f = generate(&GenSetting::new(Class::ROsl, 3, 3, 2, 5)).unwrap();
        let d = characteristic_sample(&f).unwrap();
        assert!(d.is_consistent().unwrap());
        assert!(d.pairs.iter().all(|p| p.output.len() <= 3));
        assert!(d.uncovered_rules().unwrap().is_empty());
    }

    #[test]
    fn iosl_has_no_characteristic_sample() {
        let f = RuleSet::new(Class::Iosl, 2, Alphabet::first(2).unwrap(), vec![]);
        assert!(matches!(
            characteristic_sample(&f),
            Err(Error::UnsupportedClass(_))
        ));
    }

    #[test]
    fn expansion() {
        let d = characteristic_sample(&isl(2, vec![Rule::new("b", 'a', "b")])).unwrap();
        assert_eq!(expand(&d, 1, 9).unwrap(), d);
        let e = expand(&d, 2, 9).unwrap();
        assert_eq!(e.len(), 12);
        assert_eq!(&e.pairs[..6], &d.pairs[..]);
        assert_eq!(e.distinct_inputs(), 12);
        assert!(e.is_consistent().unwrap());
        assert!(e.pairs.iter().all(|p| p.input.len() <= 4));
        assert_eq!(expand(&d, 2, 9).unwrap(), e);
        // Σ^{1..4} over two symbols has 30 strings; 6 are taken.
        assert_eq!(expand(&d, 5, 1).unwrap().len(), 30);
        assert_eq!(
            expand(&d, 6, 1),
            Err(Error::InputSpaceExhausted {
                needed: 30,
                available: 24
            })
        );
    }

    #[test]
    fn repetition() {
        let d = characteristic_sample(&isl(2, vec![])).unwrap();
        let r = repeat(&d, 2).unwrap();
        assert_eq!(r.len(), 12);
        assert_eq!(r.distinct_inputs(), 6);
        assert_eq!(r.kind, SampleKind::Repeated);
        assert_eq!(repeat(&d, 1).unwrap(), d);
        let r3 = repeat(&d, 3).unwrap();
        for p in &d.pairs {
            assert_eq!(r3.pairs.iter().filter(|q| *q == p).count(), 3);
        }
    }

    #[test]
    fn iosl_sizes() {
        for (k, size, expected) in [(2, 5, 50), (2, 2, 8), (3, 2, 16)] {
            let f = generate(&GenSetting::new(Class::Iosl, k, size, 2, 3)).unwrap();
            let d = iosl_sample(&f, 11).unwrap();
            assert_eq!(d.len(), expected);
            assert_eq!(d.distinct_inputs(), expected);
            assert!(d.is_consistent().unwrap());
        }
    }

    #[test]
    fn pair_serializes_as_array() {
        let json = serde_json::to_string(&SamplePair::new("ab", "")).unwrap();
        assert_eq!(json, r#"["ab",""]"#);
    }
}
