//! Random generation of minimal rule sets.
//!
//! A generated set satisfies three constraints:
//!
//! * general consistency: no rule's pattern `c ∘ u` is a suffix of another's,
//!   so at most one rule can match at any point;
//! * OSL non-redundancy (L-OSL / R-OSL): every condition can surface in the
//!   output, checked syntactically and then by finding a concrete input on
//!   which each rule fires;
//! * k-complexity: at least one pattern uses the full window.
//!
//! IOSL rules carry an input and an output context. Consistency is enforced
//! jointly on both contexts and non-redundancy by simulation only.

use std::collections::{HashSet, VecDeque};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::search::{candidate_rules, find_smallest};
use crate::seed::{self, Rng};
use crate::strings::{is_suffix, reversed};
use crate::transducer::{apply_with_policy, MatchPolicy};
use crate::{Alphabet, Class, Error, Result, Rule, RuleSet};

/// Whole-set draws tried before a setting is declared infeasible.
pub const ATTEMPT_BUDGET: usize = 10_000;

/// Redraws allowed for a single rule slot before the whole draw restarts.
const SLOT_RETRIES: usize = 64;

/// Largest `|Σ|^k` accepted by [`verify_minimality`].
pub const DESK_SCALE_LIMIT: usize = 81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenSetting {
    pub class: Class,
    pub k: usize,
    pub alphabet_size: usize,
    pub num_rules: usize,
    pub seed: u64,
}

impl GenSetting {
    pub fn new(class: Class, k: usize, alphabet_size: usize, num_rules: usize, seed: u64) -> Self {
        Self {
            class,
            k,
            alphabet_size,
            num_rules,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidSetting(format!("k = {} < 2", self.k)));
        }
        if self.num_rules < 1 {
            return Err(Error::InvalidSetting("num_rules must be at least 1".into()));
        }
        if !(Alphabet::MIN_SIZE..=Alphabet::MAX_SIZE).contains(&self.alphabet_size) {
            return Err(Error::InvalidSetting(format!(
                "alphabet size {} outside {}..={}",
                self.alphabet_size,
                Alphabet::MIN_SIZE,
                Alphabet::MAX_SIZE
            )));
        }
        Ok(())
    }

    /// `C(|Σ|^k, n)`, saturating at `u128::MAX`.
    pub fn search_space(&self) -> u128 {
        let total = (self.alphabet_size as u128).saturating_pow(self.k as u32);
        let n = self.num_rules as u128;
        if n > total {
            return 0;
        }
        (0..n).fold(1u128, |acc, i| acc.saturating_mul(total - i) / (i + 1))
    }
}

/// Which substrings of a condition [`check_osl_nonredundancy_with`] inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConditionScope {
    #[default]
    Substrings,
    Suffixes,
}

fn comparable(a: &str, b: &str) -> bool {
    is_suffix(a, b) || is_suffix(b, a)
}

fn conflicting(a: &Rule, b: &Rule) -> bool {
    match (&a.out_condition, &b.out_condition) {
        (None, None) => comparable(&a.pattern(), &b.pattern()),
        _ => {
            comparable(&a.pattern(), &b.pattern())
                && comparable(a.out_condition(), b.out_condition())
        }
    }
}

/// No pattern is a suffix of another. For rules with an output context, two
/// rules conflict only when both their input patterns and their output
/// contexts are suffix-related, since only then can both match at once.
pub fn check_general_consistency(rules: &[Rule]) -> bool {
    rules
        .iter()
        .enumerate()
        .all(|(i, a)| rules[i + 1..].iter().all(|b| !conflicting(a, b)))
}

pub fn check_osl_nonredundancy(rules: &[Rule]) -> bool {
    check_osl_nonredundancy_with(rules, ConditionScope::Substrings)
}

/// No piece of a condition may equal another rule's full pattern (that
/// pattern would be rewritten before it could surface) unless some rule
/// produces it as `c_k ∘ v_k`.
pub fn check_osl_nonredundancy_with(rules: &[Rule], scope: ConditionScope) -> bool {
    let patterns: HashSet<String> = rules.iter().map(Rule::pattern).collect();
    let produced: HashSet<String> = rules
        .iter()
        .map(|r| format!("{}{}", r.condition, r.output))
        .collect();
    rules.iter().all(|r| {
        let c = r.condition.as_str();
        let pieces: Vec<&str> = match scope {
            ConditionScope::Substrings => (0..c.len())
                .flat_map(|i| (i + 1..=c.len()).map(move |j| &c[i..j]))
                .collect(),
            ConditionScope::Suffixes => (0..c.len()).map(|i| &c[i..]).collect(),
        };
        pieces
            .into_iter()
            .all(|s| !patterns.contains(s) || produced.contains(s))
    })
}

fn window_len(r: &Rule) -> usize {
    r.pattern_len().max(r.out_condition().chars().count() + 1)
}

/// At least one rule uses the full window `k`.
pub fn check_k_complexity(rules: &[Rule], k: usize) -> bool {
    rules.iter().any(|r| window_len(r) == k)
}

/// For each rule, the shortest input (shortlex among shortest) on which it
/// fires, searching inputs of at most `max_input_len` symbols. With
/// `max_output_len` set, only inputs whose output stays within that length
/// count.
pub fn firing_witnesses(
    f: &RuleSet,
    max_input_len: usize,
    max_output_len: Option<usize>,
) -> Vec<Option<String>> {
    if f.class == Class::ROsl {
        let encoded = f.reversed_encoding();
        return firing_witnesses(&encoded, max_input_len, max_output_len)
            .into_iter()
            .map(|w| w.map(|s| reversed(&s)))
            .collect();
    }
    let window = f.k - 1;
    let keep_input = matches!(f.class, Class::Isl | Class::Iosl);
    let keep_output = matches!(f.class, Class::LOsl | Class::Iosl);

    #[derive(Clone, PartialEq, Eq, Hash)]
    struct State {
        input: Vec<u8>,
        output: Vec<u8>,
        out_len: usize,
    }
    let truncate = |mut v: Vec<u8>| {
        if v.len() > window {
            v.drain(..v.len() - window);
        }
        v
    };

    let mut witnesses: Vec<Option<String>> = vec![None; f.rules.len()];
    let mut remaining = f.rules.len();
    // (parent node, symbol, depth)
    let mut nodes: Vec<(usize, u8, usize)> = vec![(usize::MAX, 0, 0)];
    let path = |nodes: &Vec<(usize, u8, usize)>, mut i: usize, last: u8| {
        let mut s = vec![last];
        while i != 0 {
            let (p, b, _) = nodes[i];
            s.push(b);
            i = p;
        }
        s.reverse();
        String::from_utf8(s).expect("ascii")
    };
    let start = State {
        input: Vec::new(),
        output: Vec::new(),
        out_len: 0,
    };
    let mut visited: HashSet<State> = HashSet::from([start.clone()]);
    let mut queue: VecDeque<(usize, State)> = VecDeque::from([(0, start)]);
    let symbols: Vec<u8> = f.alphabet.symbols().iter().map(|&c| c as u8).collect();

    while let Some((node, state)) = queue.pop_front() {
        if remaining == 0 {
            break;
        }
        let depth = nodes[node].2;
        if depth >= max_input_len {
            continue;
        }
        for &b in &symbols {
            let mut chosen: Option<usize> = None;
            for (i, r) in f.rules.iter().enumerate() {
                if r.target as u32 != b as u32 {
                    continue;
                }
                let ok = match f.class {
                    Class::Isl => state.input.ends_with(r.condition.as_bytes()),
                    Class::LOsl => state.output.ends_with(r.condition.as_bytes()),
                    _ => {
                        state.input.ends_with(r.condition.as_bytes())
                            && state.output.ends_with(r.out_condition().as_bytes())
                    }
                };
                if ok && chosen.is_none_or(|j| r.match_len() > f.rules[j].match_len()) {
                    chosen = Some(i);
                }
            }
            let emitted: &[u8] = match chosen {
                Some(j) => f.rules[j].output.as_bytes(),
                None => std::slice::from_ref(&b),
            };
            let out_len = state.out_len + emitted.len();
            if max_output_len.is_some_and(|m| out_len > m) {
                continue;
            }
            if let Some(j) = chosen {
                if witnesses[j].is_none() {
                    witnesses[j] = Some(path(&nodes, node, b));
                    remaining -= 1;
                }
            }
            let mut input = state.input.clone();
            if keep_input {
                input.push(b);
                input = truncate(input);
            }
            let mut output = state.output.clone();
            if keep_output {
                output.extend_from_slice(emitted);
                output = truncate(output);
            }
            let next = State {
                input,
                output,
                out_len: if max_output_len.is_some() { out_len } else { 0 },
            };
            if visited.insert(next.clone()) {
                nodes.push((node, b, depth + 1));
                queue.push_back((nodes.len() - 1, next));
            }
        }
    }
    witnesses
}

fn draw_rule(setting: &GenSetting, alphabet: &Alphabet, rng: &mut Rng) -> Rule {
    let symbols = alphabet.symbols();
    let word = |len: usize, rng: &mut Rng| {
        (0..len)
            .map(|_| symbols[rng.random_range(0..symbols.len())])
            .collect::<String>()
    };
    let k = setting.k;
    let (condition, out_condition) = if setting.class == Class::Iosl {
        loop {
            let cin = rng.random_range(0..k);
            let cout = rng.random_range(0..k);
            if cin + cout > 0 {
                break (word(cin, rng), Some(word(cout, rng)));
            }
        }
    } else {
        let len = rng.random_range(2..=k);
        (word(len - 1, rng), None)
    };
    let target = symbols[rng.random_range(0..symbols.len())];
    // Uniform over (Σ \ {target}) ∪ {λ}.
    let choice = rng.random_range(0..symbols.len());
    let output = symbols
        .iter()
        .filter(|&&c| c != target)
        .nth(choice)
        .map(|c| c.to_string())
        .unwrap_or_default();
    Rule {
        condition,
        target,
        output,
        out_condition,
    }
}

fn draw_rules(setting: &GenSetting, alphabet: &Alphabet, rng: &mut Rng) -> Option<Vec<Rule>> {
    // R-OSL conditions are read right to left, so conflicts are checked on
    // the reversed rules.
    let view = |r: &Rule| match setting.class {
        Class::ROsl => r.reversed(),
        _ => r.clone(),
    };
    let mut rules: Vec<Rule> = Vec::with_capacity(setting.num_rules);
    let mut views: Vec<Rule> = Vec::with_capacity(setting.num_rules);
    for _ in 0..setting.num_rules {
        let rule = (0..SLOT_RETRIES)
            .map(|_| draw_rule(setting, alphabet, rng))
            .find(|r| {
                let v = view(r);
                views.iter().all(|q| !conflicting(q, &v))
            })?;
        views.push(view(&rule));
        rules.push(rule);
    }
    Some(rules)
}

/// The rules the constraint checks apply to: the reversed encoding for
/// R-OSL, `f` itself otherwise.
pub fn constraint_encoding(f: &RuleSet) -> RuleSet {
    match f.class {
        Class::ROsl => f.reversed_encoding(),
        _ => f.clone(),
    }
}

/// Whether a candidate set meets every constraint of its class.
pub fn satisfies_constraints(f: &RuleSet) -> bool {
    if f.class == Class::ROsl {
        return satisfies_constraints(&f.reversed_encoding());
    }
    let k = f.k;
    if !check_general_consistency(&f.rules) || !check_k_complexity(&f.rules, k) {
        return false;
    }
    match f.class {
        Class::Isl => true,
        Class::LOsl | Class::ROsl => {
            check_osl_nonredundancy(&f.rules)
                && firing_witnesses(f, 2 * k, Some(k))
                    .iter()
                    .all(Option::is_some)
        }
        Class::Iosl => firing_witnesses(f, 2 * k, None).iter().all(Option::is_some),
    }
}

/// Draws a rule set for `setting`. The result depends only on the setting.
pub fn generate(setting: &GenSetting) -> Result<RuleSet> {
    setting.validate()?;
    let alphabet = Alphabet::first(setting.alphabet_size)?;
    // Patterns of length 2..=k form a suffix tree whose leaves are the |Σ|^k
    // full-length patterns, so no larger suffix-free family exists.
    if setting.class != Class::Iosl
        && (setting.num_rules as u128)
            > (setting.alphabet_size as u128).saturating_pow(setting.k as u32)
    {
        return Err(Error::SettingInfeasible {
            attempts: 0,
            reason: format!(
                "{} rules exceed the {} suffix-free patterns available",
                setting.num_rules,
                setting.alphabet_size.pow(setting.k as u32)
            ),
        });
    }
    let mut rng = seed::rng(setting.seed);
    for _ in 0..ATTEMPT_BUDGET {
        let Some(rules) = draw_rules(setting, &alphabet, &mut rng) else {
            continue;
        };
        let f = RuleSet::new(setting.class, setting.k, alphabet.clone(), rules);
        if satisfies_constraints(&f) {
            return Ok(f);
        }
    }
    Err(Error::SettingInfeasible {
        attempts: ATTEMPT_BUDGET,
        reason: format!(
            "{} k={} |Σ|={} n={}",
            setting.class, setting.k, setting.alphabet_size, setting.num_rules
        ),
    })
}

/// True when no rule set of the same class with fewer rules agrees with `f`
/// on every input of length at most `bound`. Exhaustive; desk scale only.
pub fn verify_minimality(f: &RuleSet, bound: usize) -> Result<bool> {
    if bound < 2 * f.k {
        return Err(Error::BoundTooSmall {
            bound,
            minimum: 2 * f.k,
        });
    }
    let space = f.alphabet.len().saturating_pow(f.k as u32);
    if space > DESK_SCALE_LIMIT {
        return Err(Error::SearchSpaceTooLarge(format!(
            "|Σ|^k = {space} > {DESK_SCALE_LIMIT}"
        )));
    }
    if f.rules.is_empty() {
        return Ok(true);
    }
    let pairs = f
        .alphabet
        .strings_between(1, bound)
        .into_iter()
        .map(|w| {
            let (out, _) = apply_with_policy(f, &w, MatchPolicy::LongestFirst)?;
            Ok((w, out))
        })
        .collect::<Result<Vec<_>>>()?;
    let candidates = candidate_rules(f.class, f.k, &f.alphabet);
    Ok(find_smallest(f.class, &candidates, &pairs, f.rules.len() - 1)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(c: &str, u: char, v: &str) -> Rule {
        Rule::new(c, u, v)
    }

    #[test]
    fn general_consistency_examples() {
        assert!(!check_general_consistency(&[
            r("a", 'b', "a"),
            r("aa", 'b', "a")
        ]));
        assert!(!check_general_consistency(&[
            r("a", 'b', "a"),
            r("aa", 'b', "")
        ]));
        assert!(check_general_consistency(&[
            r("ba", 'b', "a"),
            r("a", 'a', "c")
        ]));
        assert!(check_general_consistency(&[]));
    }

    #[test]
    fn iosl_consistency_is_joint() {
        // Input patterns comparable, output contexts not: never both match.
        assert!(check_general_consistency(&[
            Rule::iosl("a", 'b', "a", "c"),
            Rule::iosl("a", 'b', "b", "c"),
        ]));
        // Mixed dominance still lets both match on input "ab" with output "a".
        assert!(!check_general_consistency(&[
            Rule::iosl("a", 'b', "", "c"),
            Rule::iosl("", 'b', "a", "c"),
        ]));
    }

    #[test]
    fn nonredundancy_examples() {
        assert!(!check_osl_nonredundancy(&[
            r("aa", 'b', "a"),
            r("a", 'a', "c")
        ]));
        assert!(check_osl_nonredundancy(&[
            r("aa", 'b', "a"),
            r("a", 'a', "c"),
            r("a", 'd', "a")
        ]));
        assert!(check_osl_nonredundancy(&[r("ba", 'b', "")]));
    }

    #[test]
    fn nonredundancy_scope_flag() {
        // "ab" is a prefix of "abc" but not one of its suffixes.
        let rules = [r("abc", 'd', "a"), r("a", 'b', "c")];
        assert!(!check_osl_nonredundancy_with(
            &rules,
            ConditionScope::Substrings
        ));
        assert!(check_osl_nonredundancy_with(
            &rules,
            ConditionScope::Suffixes
        ));
    }

    #[test]
    fn k_complexity_examples() {
        assert!(check_k_complexity(&[r("ba", 'b', "a")], 3));
        assert!(!check_k_complexity(&[r("a", 'b', "a")], 3));
        assert!(!check_k_complexity(&[], 2));
        assert!(check_k_complexity(&[Rule::iosl("", 'b', "aa", "c")], 3));
    }

    #[test]
    fn generation_is_seed_deterministic() {
        for class in Class::ALL {
            let s = GenSetting::new(class, 3, 3, 3, 42);
            assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        }
        let a = generate(&GenSetting::new(Class::Isl, 3, 4, 3, 1)).unwrap();
        let b = generate(&GenSetting::new(Class::Isl, 3, 4, 3, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn generated_sets_meet_constraints() {
        for class in Class::ALL {
            for seed in 0..20 {
                let s = GenSetting::new(class, 3, 3, 2, seed);
                let f = generate(&s).unwrap();
                assert_eq!(f.len(), 2);
                f.validate().unwrap();
                assert!(satisfies_constraints(&f), "{f}");
                assert!(f
                    .rules
                    .iter()
                    .all(|r| !r.is_trivial() && r.output.len() <= 1));
            }
        }
    }

    #[test]
    fn generated_sets_apply_strictly() {
        for class in Class::ALL {
            for seed in 0..40 {
                let f = generate(&GenSetting::new(class, 3, 3, 3, seed)).unwrap();
                for w in f.alphabet.strings_between(1, 5) {
                    crate::transducer::apply(&f, &w).unwrap_or_else(|e| panic!("{f} on {w}: {e}"));
                }
            }
        }
    }

    #[test]
    fn rosl_conflicts_read_right_to_left() {
        let a = Alphabet::first(3).unwrap();
        // Reversed patterns "bac" and "ac" are suffix-related.
        let f = RuleSet::new(
            Class::ROsl,
            3,
            a.clone(),
            vec![Rule::new("ab", 'c', "a"), Rule::new("a", 'c', "b")],
        );
        assert!(!satisfies_constraints(&f));
        assert!(check_general_consistency(&f.rules));
        assert!(!check_general_consistency(&constraint_encoding(&f).rules));
    }

    #[test]
    fn infeasible_setting() {
        let err = generate(&GenSetting::new(Class::Isl, 2, 2, 5, 0)).unwrap_err();
        assert!(matches!(err, Error::SettingInfeasible { .. }));
        assert!(generate(&GenSetting::new(Class::Isl, 2, 2, 4, 0)).is_ok());
    }

    #[test]
    fn invalid_settings() {
        assert!(generate(&GenSetting::new(Class::Isl, 1, 2, 1, 0)).is_err());
        assert!(generate(&GenSetting::new(Class::Isl, 2, 1, 1, 0)).is_err());
        assert!(generate(&GenSetting::new(Class::Isl, 2, 2, 0, 0)).is_err());
    }

    #[test]
    fn search_space_binomial() {
        assert_eq!(GenSetting::new(Class::Isl, 2, 2, 2, 0).search_space(), 6);
        assert_eq!(GenSetting::new(Class::Isl, 2, 5, 3, 0).search_space(), 2300);
    }

    #[test]
    fn witnesses() {
        let a = Alphabet::first(2).unwrap();
        let f = RuleSet::new(Class::LOsl, 3, a.clone(), vec![r("ba", 'b', "")]);
        assert_eq!(
            firing_witnesses(&f, 6, Some(3)),
            vec![Some("bab".to_string())]
        );
        // R-OSL witness is read right to left: b fires when "ab" follows it.
        let g = RuleSet::new(Class::ROsl, 3, a.clone(), vec![r("ab", 'b', "a")]);
        assert_eq!(
            firing_witnesses(&g, 6, Some(3)),
            vec![Some("bab".to_string())]
        );
        // a -> c everywhere after a, so "aa" never surfaces for the first rule.
        let b3 = Alphabet::first(3).unwrap();
        let h = RuleSet::new(
            Class::LOsl,
            3,
            b3,
            vec![r("aa", 'b', "a"), r("a", 'a', "c")],
        );
        let w = firing_witnesses(&h, 8, None);
        assert!(w[0].is_none());
        assert!(w[1].is_some());
    }

    #[test]
    fn minimality_examples() {
        let a = Alphabet::first(2).unwrap();
        let f1 = RuleSet::new(Class::Isl, 2, a.clone(), vec![r("b", 'a', "b")]);
        assert!(verify_minimality(&f1, 4).unwrap());
        let f2 = RuleSet::new(
            Class::Isl,
            2,
            a.clone(),
            vec![r("a", 'a', ""), r("b", 'a', "b")],
        );
        assert!(verify_minimality(&f2, 4).unwrap());
        // The same function spelled with a redundant longer case.
        let verbose = RuleSet::new(
            Class::Isl,
            3,
            a.clone(),
            vec![r("b", 'a', "b"), r("bb", 'a', "b")],
        );
        assert!(!verify_minimality(&verbose, 6).unwrap());
        assert!(matches!(
            verify_minimality(&f1, 3),
            Err(Error::BoundTooSmall {
                bound: 3,
                minimum: 4
            })
        ));
        let big = RuleSet::new(Class::Isl, 3, Alphabet::first(5).unwrap(), vec![]);
        assert!(matches!(
            verify_minimality(&big, 6),
            Err(Error::SearchSpaceTooLarge(_))
        ));
    }
}
