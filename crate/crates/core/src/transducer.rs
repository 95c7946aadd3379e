//! Rule application under the four class semantics.
//!
//! * ISL: a rule fires on input symbol `u` when its condition is a suffix of
//!   the original input read so far.
//! * L-OSL: the condition must be a suffix of the output emitted so far,
//!   including symbols produced by earlier firings.
//! * R-OSL: the input is read right to left and the condition must be a
//!   prefix of the output already emitted to the right of the target.
//!   Conditions are stored in forward reading order.
//! * IOSL: the condition is tested against the input (as for ISL) and the
//!   output context against the output (as for L-OSL).
//!
//! Deletions emit nothing; multi-symbol outputs are emitted whole and become
//! part of the output context.

use std::borrow::Borrow;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::strings::reversed;
use crate::{Class, Error, Result, Rule, RuleSet};

/// What to do when more than one rule matches at a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MatchPolicy {
    /// Ambiguity is an error.
    #[default]
    Strict,
    /// Longest match (`|c| + 1 + |out_condition|`) wins, then list order.
    LongestFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Index into the input.
    pub position: usize,
    /// Index of the rule that fired, if any.
    pub matched_rule: Option<usize>,
    /// How many rules matched before the policy picked one.
    pub candidates: usize,
    pub emitted: String,
}

/// Per-position record of an application, in input order. The emitted
/// strings concatenate to the output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicationTrace {
    pub steps: Vec<TraceStep>,
}

impl ApplicationTrace {
    /// True when the tie-break policy had to choose between rules.
    pub fn ambiguous(&self) -> bool {
        self.steps.iter().any(|s| s.candidates > 1)
    }

    pub fn fired_rules(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().filter_map(|s| s.matched_rule)
    }

    pub fn output(&self) -> String {
        self.steps.iter().map(|s| s.emitted.as_str()).collect()
    }
}

/// Applies `f` to `w` under strict matching.
pub fn apply(f: &RuleSet, w: &str) -> Result<String> {
    f.alphabet.check(w)?;
    run(f.class, &f.rules, w, MatchPolicy::Strict, None)
}

/// Applies `f` to `w`, resolving overlapping matches with `policy`, and
/// records a trace of every decision.
pub fn apply_with_policy(
    f: &RuleSet,
    w: &str,
    policy: MatchPolicy,
) -> Result<(String, ApplicationTrace)> {
    f.alphabet.check(w)?;
    apply_rules_traced(f.class, &f.rules, w, policy)
}

/// Applies a bare rule list without alphabet checks.
pub fn apply_rules<R: Borrow<Rule>>(
    class: Class,
    rules: &[R],
    w: &str,
    policy: MatchPolicy,
) -> Result<String> {
    run(class, rules, w, policy, None)
}

pub fn apply_rules_traced<R: Borrow<Rule>>(
    class: Class,
    rules: &[R],
    w: &str,
    policy: MatchPolicy,
) -> Result<(String, ApplicationTrace)> {
    let mut steps = Vec::with_capacity(w.len());
    let out = run(class, rules, w, policy, Some(&mut steps))?;
    steps.sort_by_key(|s| s.position);
    Ok((out, ApplicationTrace { steps }))
}

/// R-OSL application routed through the left-to-right engine: reverse the
/// input and every rule, run L-OSL, reverse the result.
pub fn apply_via_reversal(f: &RuleSet, w: &str) -> Result<String> {
    f.alphabet.check(w)?;
    let encoded = f.reversed_encoding();
    let out = run(
        Class::LOsl,
        &encoded.rules,
        &reversed(w),
        MatchPolicy::Strict,
        None,
    )?;
    Ok(reversed(&out))
}

fn select<R: Borrow<Rule>>(
    rules: &[R],
    position: usize,
    policy: MatchPolicy,
    mut matches: impl FnMut(&Rule) -> bool,
) -> Result<(Option<usize>, usize)> {
    let mut chosen: Option<usize> = None;
    let mut count = 0;
    for (i, r) in rules.iter().enumerate() {
        let r = r.borrow();
        if !matches(r) {
            continue;
        }
        count += 1;
        chosen = match chosen {
            None => Some(i),
            Some(j) => match policy {
                MatchPolicy::Strict => {
                    return Err(Error::Nondeterministic {
                        position,
                        candidates: 2,
                    })
                }
                MatchPolicy::LongestFirst => {
                    if r.match_len() > rules[j].borrow().match_len() {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            },
        };
    }
    Ok((chosen, count))
}

fn record(
    trace: &mut Option<&mut Vec<TraceStep>>,
    position: usize,
    matched_rule: Option<usize>,
    candidates: usize,
    emitted: &[u8],
) {
    if let Some(t) = trace {
        t.push(TraceStep {
            position,
            matched_rule,
            candidates,
            emitted: String::from_utf8_lossy(emitted).into_owned(),
        });
    }
}

fn target_is(r: &Rule, b: u8) -> bool {
    (r.target as u32) == b as u32
}

fn run<R: Borrow<Rule>>(
    class: Class,
    rules: &[R],
    w: &str,
    policy: MatchPolicy,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<String> {
    let input = w.as_bytes();
    let out = match class {
        Class::Isl | Class::LOsl | Class::Iosl => {
            let mut out: Vec<u8> = Vec::with_capacity(input.len());
            for (i, &b) in input.iter().enumerate() {
                let seen = &input[..i];
                let (chosen, candidates) = select(rules, i, policy, |r| {
                    target_is(r, b)
                        && match class {
                            Class::Isl => seen.ends_with(r.condition.as_bytes()),
                            Class::LOsl => out.ends_with(r.condition.as_bytes()),
                            _ => {
                                seen.ends_with(r.condition.as_bytes())
                                    && out.ends_with(r.out_condition().as_bytes())
                            }
                        }
                })?;
                let start = out.len();
                match chosen {
                    Some(j) => out.extend_from_slice(rules[j].borrow().output.as_bytes()),
                    None => out.push(b),
                }
                record(&mut trace, i, chosen, candidates, &out[start..]);
            }
            out
        }
        Class::ROsl => {
            let mut right: VecDeque<u8> = VecDeque::with_capacity(input.len());
            for (i, &b) in input.iter().enumerate().rev() {
                let (chosen, candidates) = select(rules, i, policy, |r| {
                    let c = r.condition.as_bytes();
                    target_is(r, b)
                        && right.len() >= c.len()
                        && right.iter().zip(c).all(|(x, y)| x == y)
                })?;
                let emitted: &[u8] = match chosen {
                    Some(j) => rules[j].borrow().output.as_bytes(),
                    None => std::slice::from_ref(&input[i]),
                };
                for &e in emitted.iter().rev() {
                    right.push_front(e);
                }
                record(&mut trace, i, chosen, candidates, emitted);
            }
            right.into_iter().collect()
        }
    };
    Ok(String::from_utf8(out).expect("rules and input are valid UTF-8"))
}
