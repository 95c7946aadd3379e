//! Exhaustive rule-set search shared by the minimality check and the
//! brute-force learner.

use std::cell::Cell;

use itertools::Itertools;

use crate::transducer::{apply_rules, MatchPolicy};
use crate::{Alphabet, Class, Error, Result, Rule};

/// Upper bound on the number of candidate combinations one search may visit.
pub(crate) const MAX_COMBINATIONS: u128 = 100_000_000;

/// Every non-trivial rule of the class with `|c ∘ u| <= k` (and, for IOSL,
/// `|out_condition| <= k - 1`), in lexicographic order. Empty conditions are
/// included.
pub(crate) fn candidate_rules(class: Class, k: usize, alphabet: &Alphabet) -> Vec<Rule> {
    let contexts = alphabet.strings_between(0, k - 1);
    let out_contexts: Vec<Option<String>> = if class == Class::Iosl {
        contexts.iter().cloned().map(Some).collect()
    } else {
        vec![None]
    };
    let mut rules = Vec::new();
    for c in &contexts {
        for &u in alphabet.symbols() {
            let outputs = alphabet
                .symbols()
                .iter()
                .filter(|&&v| v != u)
                .map(|v| v.to_string())
                .chain(std::iter::once(String::new()));
            for v in outputs {
                for oc in &out_contexts {
                    rules.push(Rule {
                        condition: c.clone(),
                        target: u,
                        output: v.clone(),
                        out_condition: oc.clone(),
                    });
                }
            }
        }
    }
    rules.sort();
    rules
}

fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

pub(crate) fn combinations_up_to(n: usize, max_rules: usize) -> u128 {
    (0..=max_rules as u128)
        .map(|r| binomial(n as u128, r))
        .sum()
}

/// Drops rules that cannot fire on any pair. A rule that never fires can be
/// removed from any reproducing set, so no smallest set contains one.
fn prune<'a>(class: Class, candidates: &'a [Rule], pairs: &[(String, String)]) -> Vec<&'a Rule> {
    let in_inputs = |s: &str| pairs.iter().any(|(x, _)| x.contains(s));
    let in_outputs = |s: &str| pairs.iter().any(|(_, y)| y.contains(s));
    candidates
        .iter()
        .filter(|r| match class {
            Class::Isl => in_inputs(&r.pattern()),
            Class::LOsl | Class::ROsl => {
                in_inputs(&r.target.to_string()) && in_outputs(&r.condition)
            }
            Class::Iosl => in_inputs(&r.pattern()) && in_outputs(r.out_condition()),
        })
        .collect()
}

/// Finds the smallest rule list (at most `max_rules`, ties broken by
/// lexicographic order) that reproduces every pair under longest-first
/// matching.
pub(crate) fn find_smallest(
    class: Class,
    candidates: &[Rule],
    pairs: &[(String, String)],
    max_rules: usize,
) -> Result<Option<Vec<Rule>>> {
    let visits = combinations_up_to(candidates.len(), max_rules);
    if visits > MAX_COMBINATIONS {
        return Err(Error::SearchSpaceTooLarge(format!(
            "{visits} candidate rule sets ({} rules, up to {max_rules})",
            candidates.len()
        )));
    }
    // Pairs that disagree with themselves rule out every function.
    let mut seen = std::collections::HashMap::new();
    for (x, y) in pairs {
        if let Some(prev) = seen.insert(x.as_str(), y.as_str()) {
            if prev != y {
                return Ok(None);
            }
        }
    }
    let candidates = prune(class, candidates, pairs);
    let last_failure = Cell::new(0usize);
    let reproduces = |rules: &[&Rule]| -> bool {
        let first = last_failure.get();
        let order = std::iter::once(first).chain((0..pairs.len()).filter(|&i| i != first));
        for i in order {
            let (x, y) = &pairs[i];
            match apply_rules(class, rules, x, MatchPolicy::LongestFirst) {
                Ok(out) if &out == y => {}
                _ => {
                    last_failure.set(i);
                    return false;
                }
            }
        }
        true
    };
    if pairs.is_empty() {
        return Ok(Some(Vec::new()));
    }
    for size in 0..=max_rules {
        for combo in candidates.iter().copied().combinations(size) {
            if reproduces(&combo) {
                return Ok(Some(combo.into_iter().cloned().collect()));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_count() {
        let a = Alphabet::first(2).unwrap();
        // contexts "", a, b (3) x targets (2) x outputs (other symbol or λ: 2)
        assert_eq!(candidate_rules(Class::Isl, 2, &a).len(), 12);
        assert_eq!(candidate_rules(Class::Iosl, 2, &a).len(), 36);
        assert!(candidate_rules(Class::Isl, 2, &a)
            .windows(2)
            .all(|w| w[0] < w[1]));
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations_up_to(12, 2), 1 + 12 + 66);
        assert_eq!(binomial(5, 7), 0);
    }
}
