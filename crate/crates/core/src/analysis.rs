//! Diagnostics: bounded tails tables, an empirical strict-locality check and
//! an exhaustive minimal learner used as an oracle.

use std::collections::{BTreeSet, HashMap};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::search::{candidate_rules, find_smallest};
use crate::seed;
use crate::strings::{longest_common_prefix, suffix_of_len};
use crate::transducer::{apply_with_policy, MatchPolicy};
use crate::{Class, Dataset, Error, Result, RuleSet};

/// Largest `|Σ|^k` accepted by [`brute_force_learn`].
pub const LEARNER_SPACE_LIMIT: usize = 81;
/// Largest rule count accepted by [`brute_force_learn`].
pub const LEARNER_MAX_RULES: usize = 3;

/// `tails_f(w)` restricted to extensions of length at most `horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailsTable {
    pub base: String,
    pub horizon: usize,
    /// Longest common prefix of `f(wy)` over the extensions considered.
    pub common_prefix: String,
    /// `(y, v)` with `f(wy) = common_prefix · v`.
    pub entries: BTreeSet<(String, String)>,
}

impl TailsTable {
    pub fn contains(&self, y: &str, v: &str) -> bool {
        self.entries.contains(&(y.to_string(), v.to_string()))
    }

    pub fn same_tails(&self, other: &TailsTable) -> bool {
        self.entries == other.entries
    }
}

fn eval(f: &RuleSet, w: &str) -> Result<String> {
    Ok(apply_with_policy(f, w, MatchPolicy::LongestFirst)?.0)
}

pub fn tails(f: &RuleSet, w: &str, horizon: usize) -> Result<TailsTable> {
    let ys = f.alphabet.strings_between(0, horizon);
    let outputs = ys
        .iter()
        .map(|y| eval(f, &format!("{w}{y}")))
        .collect::<Result<Vec<_>>>()?;
    let common_prefix = longest_common_prefix(&outputs)?;
    let entries = ys
        .into_iter()
        .zip(&outputs)
        .map(|(y, out)| (y, out[common_prefix.len()..].to_string()))
        .collect();
    Ok(TailsTable {
        base: w.to_string(),
        horizon,
        common_prefix,
        entries,
    })
}

/// Draws `samples` pairs of strings that share the relevant last `k - 1`
/// symbols (input for ISL, output for L-OSL, output of the reversed reading
/// for R-OSL, both for IOSL) and checks that their tails agree up to
/// horizon `k`.
pub fn verify_strict_locality(f: &RuleSet, k: usize, samples: usize, seed: u64) -> Result<bool> {
    if k < 1 {
        return Err(Error::InvalidSetting("k must be at least 1".into()));
    }
    if f.class == Class::ROsl {
        return verify_strict_locality(&f.reversed_encoding(), k, samples, seed);
    }
    let window = k - 1;
    let mut rng = seed::rng(seed);
    let symbols = f.alphabet.symbols();
    let random_word = |min: usize, max: usize, rng: &mut seed::Rng| -> String {
        let len = rng.random_range(min..=max);
        (0..len)
            .map(|_| symbols[rng.random_range(0..symbols.len())])
            .collect()
    };
    let agree =
        |u1: &str, u2: &str| -> Result<bool> { Ok(tails(f, u1, k)?.same_tails(&tails(f, u2, k)?)) };

    if f.class == Class::Isl {
        for _ in 0..samples {
            let u1 = random_word(window, 2 * k, &mut rng);
            let u2 = random_word(0, k, &mut rng) + suffix_of_len(&u1, window);
            if !agree(&u1, &u2)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }

    // Output contexts cannot be constructed directly; bucket a random pool by
    // context and compare within buckets.
    let mut buckets: HashMap<(String, String), Vec<String>> = HashMap::new();
    for _ in 0..samples.saturating_mul(8) {
        let u = random_word(window, 2 * k + 1, &mut rng);
        let out = eval(f, &u)?;
        if out.chars().count() < window {
            continue;
        }
        let input_key = if f.class == Class::Iosl {
            suffix_of_len(&u, window).to_string()
        } else {
            String::new()
        };
        let key = (input_key, suffix_of_len(&out, window).to_string());
        buckets.entry(key).or_default().push(u);
    }
    let mut keys: Vec<_> = buckets.keys().cloned().collect();
    keys.sort();
    let mut checked = 0;
    'outer: for key in keys {
        let members = &buckets[&key];
        for other in &members[1..] {
            if checked >= samples {
                break 'outer;
            }
            checked += 1;
            if !agree(&members[0], other)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The smallest rule set of `class` (at most `max_rules` rules, ties broken
/// by lexicographic rule order) that reproduces every pair of `d` under
/// longest-first matching, or `None`.
pub fn brute_force_learn(
    d: &Dataset,
    class: Class,
    k: usize,
    max_rules: usize,
) -> Result<Option<RuleSet>> {
    let alphabet = &d.ruleset.alphabet;
    let space = alphabet.len().saturating_pow(k as u32);
    if space > LEARNER_SPACE_LIMIT || max_rules > LEARNER_MAX_RULES {
        return Err(Error::SearchSpaceTooLarge(format!(
            "|Σ|^k = {space}, max_rules = {max_rules}; limits are {LEARNER_SPACE_LIMIT} and {LEARNER_MAX_RULES}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidSetting(format!("k = {k} < 2")));
    }
    let pairs: Vec<(String, String)> = d
        .pairs
        .iter()
        .map(|p| (p.input.clone(), p.output.clone()))
        .collect();
    let candidates = candidate_rules(class, k, alphabet);
    Ok(find_smallest(class, &candidates, &pairs, max_rules)?
        .map(|rules| RuleSet::new(class, k, alphabet.clone(), rules)))
}

/// Whether two rule sets agree on every input of length `1..=max_len`.
pub fn extensionally_equal(f: &RuleSet, g: &RuleSet, max_len: usize) -> Result<bool> {
    for w in f.alphabet.strings_between(1, max_len) {
        if eval(f, &w)? != eval(g, &w)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::characteristic_sample;
    use crate::{Alphabet, Rule, SampleKind, SamplePair};

    fn example31() -> RuleSet {
        RuleSet::new(
            Class::Isl,
            3,
            Alphabet::first(2).unwrap(),
            vec![Rule::new("ba", 'b', "a")],
        )
    }

    #[test]
    fn tails_after_trigger() {
        let t = tails(&example31(), "aba", 3).unwrap();
        assert!(t.contains("", ""));
        assert!(t.contains("b", "a"));
        assert!(t.contains("bb", "ab"));
        assert!(t.contains("ab", "ab"));
        assert_eq!(t.common_prefix, "aba");
    }

    #[test]
    fn tails_without_trigger() {
        let t = tails(&example31(), "abb", 3).unwrap();
        assert!(t.contains("a", "a"));
        assert!(t.contains("b", "b"));
        assert!(t.contains("bb", "bb"));
        // After a trailing b, appending "ab" completes the trigger.
        assert!(t.contains("ab", "aa"));
        let t = tails(&example31(), "aa", 3).unwrap();
        assert!(t.contains("ab", "ab"));
    }

    #[test]
    fn identity_tails() {
        let f = RuleSet::new(Class::LOsl, 2, Alphabet::first(3).unwrap(), vec![]);
        let t = tails(&f, "cab", 2).unwrap();
        assert!(t.entries.iter().all(|(y, v)| y == v));
        assert_eq!(t.entries.len(), 13);
    }

    #[test]
    fn losl_example_tails() {
        let f = RuleSet::new(
            Class::LOsl,
            3,
            Alphabet::first(2).unwrap(),
            vec![Rule::new("ba", 'b', "")],
        );
        let t = tails(&f, "ba", 3).unwrap();
        for (y, v) in [
            ("", ""),
            ("a", "a"),
            ("b", ""),
            ("bb", ""),
            ("ab", "ab"),
            ("ba", "a"),
        ] {
            assert!(t.contains(y, v), "({y}, {v})");
        }
        let t = tails(&f, "aa", 3).unwrap();
        for (y, v) in [
            ("", ""),
            ("a", "a"),
            ("b", "b"),
            ("bb", "bb"),
            ("ab", "ab"),
            ("ba", "ba"),
        ] {
            assert!(t.contains(y, v), "({y}, {v})");
        }
    }

    #[test]
    fn locality_window() {
        let f = example31();
        assert!(verify_strict_locality(&f, 3, 200, 1).unwrap());
        assert!(!verify_strict_locality(&f, 2, 200, 1).unwrap());
        let id = RuleSet::new(Class::ROsl, 2, Alphabet::first(2).unwrap(), vec![]);
        assert!(verify_strict_locality(&id, 2, 50, 1).unwrap());
    }

    #[test]
    fn learner_recovers_single_rule() {
        let f = RuleSet::new(
            Class::Isl,
            2,
            Alphabet::first(2).unwrap(),
            vec![Rule::new("b", 'a', "b")],
        );
        let d = characteristic_sample(&f).unwrap();
        let learned = brute_force_learn(&d, Class::Isl, 2, 3).unwrap().unwrap();
        assert_eq!(learned.rules, f.rules);
    }

    #[test]
    fn learner_identity_and_contradiction() {
        let f = RuleSet::new(Class::Isl, 2, Alphabet::first(2).unwrap(), vec![]);
        let d = characteristic_sample(&f).unwrap();
        assert_eq!(
            brute_force_learn(&d, Class::Isl, 2, 3)
                .unwrap()
                .unwrap()
                .len(),
            0
        );
        let mut bad = d.clone();
        bad.pairs.push(SamplePair::new("ab", "bb"));
        bad.kind = SampleKind::Expanded;
        assert_eq!(brute_force_learn(&bad, Class::Isl, 2, 3).unwrap(), None);
    }

    #[test]
    fn learner_bounds() {
        let f = RuleSet::new(Class::Isl, 3, Alphabet::first(5).unwrap(), vec![]);
        let d = Dataset {
            ruleset: f,
            pairs: vec![],
            multiple: 1,
            seed: 0,
            kind: SampleKind::Characteristic,
        };
        assert!(matches!(
            brute_force_learn(&d, Class::Isl, 3, 1),
            Err(Error::SearchSpaceTooLarge(_))
        ));
        assert!(matches!(
            brute_force_learn(&d, Class::Isl, 2, 4),
            Err(Error::SearchSpaceTooLarge(_))
        ));
    }
}
