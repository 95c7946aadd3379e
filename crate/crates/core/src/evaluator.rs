//! Parsing and scoring of predicted rule sets.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::strings::is_suffix;
use crate::transducer::{apply_rules_traced, MatchPolicy};
use crate::{Alphabet, Class, Dataset, Error, Result, Rule, RuleSet};

/// Rules recovered from a model response, after normalization.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedRuleSet {
    pub rules: Vec<Rule>,
    pub parse_warnings: Vec<String>,
    pub raw_text: String,
}

impl PredictedRuleSet {
    /// Wraps already-structured rules, dropping trivial rules and duplicates.
    pub fn from_rules(rules: impl IntoIterator<Item = Rule>) -> Self {
        let mut p = Self::default();
        for r in rules {
            p.push(r);
        }
        p
    }

    fn push(&mut self, rule: Rule) {
        if rule.is_trivial() {
            self.parse_warnings
                .push(format!("dropped trivial rule {}", rule.to_line()));
        } else if self.rules.contains(&rule) {
            self.parse_warnings
                .push(format!("dropped duplicate rule {}", rule.to_line()));
        } else {
            self.rules.push(rule);
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn symbol_count(&self) -> usize {
        self.rules.iter().map(Rule::symbol_count).sum()
    }
}

/// Byte range of the body of the last complete `<START>…<END>` block.
fn last_block(text: &str) -> Option<(usize, usize)> {
    let lower = text.to_ascii_lowercase();
    let end = lower.rfind("<end>")?;
    let start = lower[..end].rfind("<start>")?;
    Some((start + "<start>".len(), end))
}

/// Extracts the rules from a model response.
///
/// Only the last `<START>…<END>` block is read. Each line is `left -> right`
/// (`-->` also accepted); the last symbol on the left is the target and the
/// rest its condition. An empty right side is the empty string. For IOSL the
/// left side may carry an output context after a slash. Lines with foreign
/// symbols, an empty left side or an over-long context are dropped with a
/// warning, as are trivial and duplicate rules.
pub fn parse_response(
    text: &str,
    alphabet: &Alphabet,
    k: usize,
    class: Class,
) -> Result<PredictedRuleSet> {
    let (from, to) = last_block(text).ok_or(Error::NoRuleBlock)?;
    let mut predicted = PredictedRuleSet {
        raw_text: text.to_string(),
        ..Default::default()
    };
    for line in text[from..to].lines() {
        let line = line.trim();
        if line.is_empty() || line.chars().all(|c| c == '.' || c == '…') {
            continue;
        }
        let mut rule = match Rule::parse_line(line) {
            Ok(r) => r,
            Err(e) => {
                predicted
                    .parse_warnings
                    .push(format!("skipped line {line:?}: {e}"));
                continue;
            }
        };
        match (class, &rule.out_condition) {
            (Class::Iosl, None) => rule.out_condition = Some(String::new()),
            (Class::Iosl, Some(_)) | (_, None) => {}
            (_, Some(_)) => {
                predicted.parse_warnings.push(format!(
                    "skipped line {line:?}: output context not allowed for {class}"
                ));
                continue;
            }
        }
        let foreign = !alphabet.contains(rule.target)
            || !alphabet.is_over(&rule.condition)
            || !alphabet.is_over(&rule.output)
            || !alphabet.is_over(rule.out_condition());
        if foreign {
            predicted
                .parse_warnings
                .push(format!("skipped line {line:?}: foreign symbol"));
            continue;
        }
        if rule.pattern_len() > k || rule.out_condition().chars().count() + 1 > k {
            predicted.parse_warnings.push(format!(
                "skipped line {line:?}: context longer than k = {k}"
            ));
            continue;
        }
        predicted.push(rule);
    }
    Ok(predicted)
}

fn intersection_size(truth: &RuleSet, predicted: &PredictedRuleSet) -> usize {
    let truth: HashSet<&Rule> = truth.rules.iter().collect();
    predicted
        .rules
        .iter()
        .collect::<HashSet<_>>()
        .into_iter()
        .filter(|r| truth.contains(r))
        .count()
}

/// `(|R ∩ P| / |P|, |R ∩ P| / |R|)` by exact rule equality; precision is 0
/// for an empty prediction.
pub fn precision_recall(truth: &RuleSet, predicted: &PredictedRuleSet) -> Result<(f64, f64)> {
    if truth.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let hit = intersection_size(truth, predicted) as f64;
    let precision = if predicted.is_empty() {
        0.0
    } else {
        hit / predicted.len() as f64
    };
    Ok((precision, hit / truth.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Compatibility {
    pub compatible: bool,
    /// The longest-first tie-break had to choose between rules somewhere.
    pub ambiguous: bool,
    pub mismatches: usize,
}

/// Whether the predicted rules reproduce every pair of `data` under the
/// class semantics.
pub fn compatibility(predicted: &PredictedRuleSet, data: &Dataset, class: Class) -> Compatibility {
    let mut ambiguous = false;
    let mut mismatches = 0;
    for p in &data.pairs {
        match apply_rules_traced(class, &predicted.rules, &p.input, MatchPolicy::LongestFirst) {
            Ok((out, trace)) => {
                ambiguous |= trace.ambiguous();
                if out != p.output {
                    mismatches += 1;
                }
            }
            Err(_) => mismatches += 1,
        }
    }
    Compatibility {
        compatible: mismatches == 0,
        ambiguous,
        mismatches,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MissingKind {
    TooGeneral,
    TooSpecific,
    CompletelyMissed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WrongKind {
    TooGeneral,
    TooSpecific,
    CorrectConditionWrongTransformation,
    CompletelyWrong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingError {
    pub rule: Rule,
    pub kind: MissingKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrongError {
    pub rule: Rule,
    pub kind: WrongKind,
}

/// `a`'s context is a proper suffix of `b`'s (both contexts for IOSL).
fn more_general(a: &Rule, b: &Rule) -> bool {
    a.target == b.target
        && is_suffix(&a.condition, &b.condition)
        && is_suffix(a.out_condition(), b.out_condition())
        && (a.condition.len() < b.condition.len()
            || a.out_condition().len() < b.out_condition().len())
}

fn same_context(a: &Rule, b: &Rule) -> bool {
    a.target == b.target && a.condition == b.condition && a.out_condition == b.out_condition
}

/// Labels every missing ground-truth rule and every wrong predicted rule.
pub fn classify_errors(
    truth: &RuleSet,
    predicted: &PredictedRuleSet,
) -> (Vec<MissingError>, Vec<WrongError>) {
    let truth_set: HashSet<&Rule> = truth.rules.iter().collect();
    let predicted_set: HashSet<&Rule> = predicted.rules.iter().collect();
    let missing = truth
        .rules
        .iter()
        .filter(|r| !predicted_set.contains(r))
        .map(|r| {
            let kind = if predicted.rules.iter().any(|p| more_general(p, r)) {
                MissingKind::TooGeneral
            } else if predicted.rules.iter().any(|p| more_general(r, p)) {
                MissingKind::TooSpecific
            } else {
                MissingKind::CompletelyMissed
            };
            MissingError {
                rule: r.clone(),
                kind,
            }
        })
        .collect();
    let wrong = predicted
        .rules
        .iter()
        .filter(|p| !truth_set.contains(p))
        .map(|p| {
            let kind = if truth.rules.iter().any(|r| same_context(p, r)) {
                WrongKind::CorrectConditionWrongTransformation
            } else if truth.rules.iter().any(|r| more_general(p, r)) {
                WrongKind::TooGeneral
            } else if truth.rules.iter().any(|r| more_general(r, p)) {
                WrongKind::TooSpecific
            } else {
                WrongKind::CompletelyWrong
            };
            WrongError {
                rule: p.clone(),
                kind,
            }
        })
        .collect();
    (missing, wrong)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LengthVerdict {
    Shorter,
    Equal,
    Longer,
}

/// Compares rule counts, then total symbol counts. Only meaningful for a
/// prediction that is compatible with `data`.
pub fn description_length_compare(
    predicted: &PredictedRuleSet,
    reference: &RuleSet,
    data: &Dataset,
) -> Result<LengthVerdict> {
    if !compatibility(predicted, data, reference.class).compatible {
        return Err(Error::NotApplicable(
            "prediction is not compatible with the data".into(),
        ));
    }
    let ord = predicted
        .len()
        .cmp(&reference.len())
        .then(predicted.symbol_count().cmp(&reference.symbol_count()));
    Ok(match ord {
        std::cmp::Ordering::Less => LengthVerdict::Shorter,
        std::cmp::Ordering::Equal => LengthVerdict::Equal,
        std::cmp::Ordering::Greater => LengthVerdict::Longer,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub compatible: bool,
    pub missing_errors: Vec<MissingError>,
    pub wrong_errors: Vec<WrongError>,
    pub ambiguity_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description_length: Option<LengthVerdict>,
}

impl EvalReport {
    /// Report for a response with no usable rule block: zero scores, every
    /// ground-truth rule completely missed.
    pub fn unparseable(truth: &RuleSet) -> Self {
        Self {
            precision: 0.0,
            recall: 0.0,
            compatible: false,
            missing_errors: truth
                .rules
                .iter()
                .map(|r| MissingError {
                    rule: r.clone(),
                    kind: MissingKind::CompletelyMissed,
                })
                .collect(),
            wrong_errors: Vec::new(),
            ambiguity_flag: false,
            description_length: None,
        }
    }
}

/// Scores one prediction against its ground truth and sample. IOSL
/// predictions that are compatible also get a description-length verdict.
pub fn evaluate(
    truth: &RuleSet,
    predicted: &PredictedRuleSet,
    data: &Dataset,
) -> Result<EvalReport> {
    let (precision, recall) = precision_recall(truth, predicted)?;
    let compat = compatibility(predicted, data, truth.class);
    let (missing_errors, wrong_errors) = classify_errors(truth, predicted);
    let description_length = (truth.class == Class::Iosl && compat.compatible)
        .then(|| description_length_compare(predicted, truth, data))
        .transpose()?;
    Ok(EvalReport {
        precision,
        recall,
        compatible: compat.compatible,
        missing_errors,
        wrong_errors,
        ambiguity_flag: compat.ambiguous,
        description_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::characteristic_sample;

    fn r(c: &str, u: char, v: &str) -> Rule {
        Rule::new(c, u, v)
    }

    fn truth(rules: Vec<Rule>) -> RuleSet {
        RuleSet::new(Class::Isl, 3, Alphabet::first(4).unwrap(), rules)
    }

    fn predicted(rules: Vec<Rule>) -> PredictedRuleSet {
        PredictedRuleSet::from_rules(rules)
    }

    #[test]
    fn parse_basic() {
        let a = Alphabet::first(2).unwrap();
        let p = parse_response("<START>\nbab -> a\n<END>", &a, 3, Class::Isl).unwrap();
        assert_eq!(p.rules, vec![r("ba", 'b', "a")]);
        let p = parse_response("<START>\nba -> a\n<END>", &a, 3, Class::Isl).unwrap();
        assert!(p.rules.is_empty());
        assert_eq!(p.parse_warnings.len(), 1);
        let p = parse_response("<START>\nxy -> z\n<END>", &a, 3, Class::Isl).unwrap();
        assert!(p.rules.is_empty());
        assert_eq!(p.parse_warnings.len(), 1);
        assert_eq!(
            parse_response("no rules here", &a, 3, Class::Isl),
            Err(Error::NoRuleBlock)
        );
    }

    #[test]
    fn parse_takes_last_block_and_filters() {
        let a = Alphabet::first(3).unwrap();
        let text = "Thinking...\n<START>\nab -> c\n<END>\nFinal answer:\n<START>\n\
                    abc --> \nbb -> a\nbb -> a\naaab -> c\n...\n<END>\n";
        let p = parse_response(text, &a, 3, Class::Isl).unwrap();
        assert_eq!(p.rules, vec![r("ab", 'c', ""), r("b", 'b', "a")]);
        // duplicate + too long
        assert_eq!(p.parse_warnings.len(), 2);
        assert_eq!(p.raw_text, text);
    }

    #[test]
    fn parse_iosl_contexts() {
        let a = Alphabet::first(3).unwrap();
        let text = "<START>\nab / c -> a\nbc -> a\n<END>";
        let p = parse_response(text, &a, 2, Class::Iosl).unwrap();
        assert_eq!(
            p.rules,
            vec![
                Rule::iosl("a", 'b', "c", "a"),
                Rule::iosl("b", 'c', "", "a")
            ]
        );
        let p = parse_response(text, &a, 2, Class::Isl).unwrap();
        assert_eq!(p.rules, vec![r("b", 'c', "a")]);
    }

    #[test]
    fn precision_recall_examples() {
        let t = truth(vec![r("ba", 'b', "a"), r("a", 'a', "")]);
        assert_eq!(
            precision_recall(&t, &predicted(t.rules.clone())).unwrap(),
            (1.0, 1.0)
        );
        let p = predicted(vec![r("ba", 'b', "a"), r("b", 'b', "a")]);
        assert_eq!(precision_recall(&t, &p).unwrap(), (0.5, 0.5));
        let t = truth(vec![r("ab", 'c', "b")]);
        let p = predicted(vec![
            r("aab", 'c', "b"),
            r("bab", 'c', "b"),
            r("cab", 'c', "b"),
        ]);
        assert_eq!(precision_recall(&t, &p).unwrap(), (0.0, 0.0));
        assert_eq!(
            precision_recall(&t, &predicted(vec![])).unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(
            precision_recall(&truth(vec![]), &predicted(vec![])),
            Err(Error::EmptyGroundTruth)
        );
    }

    #[test]
    fn error_taxonomy() {
        let t = truth(vec![r("ab", 'c', "b")]);
        let (m, w) = classify_errors(&t, &predicted(vec![r("b", 'c', "b")]));
        assert_eq!(m[0].kind, MissingKind::TooGeneral);
        assert_eq!(w[0].kind, WrongKind::TooGeneral);

        let (m, w) = classify_errors(&t, &predicted(vec![r("ab", 'c', "d")]));
        assert_eq!(w[0].kind, WrongKind::CorrectConditionWrongTransformation);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].kind, MissingKind::CompletelyMissed);

        let (m, w) = classify_errors(&t, &predicted(vec![r("aab", 'c', "b"), r("bab", 'c', "b")]));
        assert_eq!(m[0].kind, MissingKind::TooSpecific);
        assert!(w.iter().all(|e| e.kind == WrongKind::TooSpecific));

        let (m, w) = classify_errors(&t, &predicted(vec![r("d", 'a', "b")]));
        assert_eq!(m[0].kind, MissingKind::CompletelyMissed);
        assert_eq!(w[0].kind, WrongKind::CompletelyWrong);

        let (m, w) = classify_errors(&t, &predicted(t.rules.clone()));
        assert!(m.is_empty() && w.is_empty());
    }

    #[test]
    fn compatibility_cases() {
        let f = RuleSet::new(
            Class::Isl,
            2,
            Alphabet::first(2).unwrap(),
            vec![r("b", 'a', "b")],
        );
        let d = characteristic_sample(&f).unwrap();
        assert!(compatibility(&predicted(f.rules.clone()), &d, Class::Isl).compatible);
        let empty = compatibility(&predicted(vec![]), &d, Class::Isl);
        assert!(!empty.compatible);
        assert_eq!(empty.mismatches, 1);
        // One maximal-context rule per changed pair.
        let enumerated = predicted(vec![r("b", 'a', "b")]);
        assert!(compatibility(&enumerated, &d, Class::Isl).compatible);
        let overlapping = predicted(vec![r("b", 'a', "b"), r("", 'a', "a"), r("", 'a', "b")]);
        let c = compatibility(&overlapping, &d, Class::Isl);
        assert!(c.ambiguous);
    }

    #[test]
    fn description_lengths() {
        let f = RuleSet::new(
            Class::Isl,
            2,
            Alphabet::first(2).unwrap(),
            vec![r("b", 'a', "b")],
        );
        let d = characteristic_sample(&f).unwrap();
        assert_eq!(
            description_length_compare(&predicted(f.rules.clone()), &f, &d).unwrap(),
            LengthVerdict::Equal
        );
        let longer = predicted(vec![r("b", 'a', "b"), r("bb", 'a', "b")]);
        assert_eq!(
            description_length_compare(&longer, &f, &d).unwrap(),
            LengthVerdict::Longer
        );
        assert!(matches!(
            description_length_compare(&predicted(vec![]), &f, &d),
            Err(Error::NotApplicable(_))
        ));
        let g = RuleSet::new(
            Class::Isl,
            2,
            Alphabet::first(2).unwrap(),
            vec![r("a", 'a', "b"), r("b", 'a', "b")],
        );
        let dg = characteristic_sample(&g).unwrap();
        let shorter = predicted(vec![r("a", 'a', "b"), r("b", 'a', "b")]);
        let mut reference = g.clone();
        reference.rules.push(r("aa", 'a', "b"));
        assert_eq!(
            description_length_compare(&shorter, &reference, &dg).unwrap(),
            LengthVerdict::Shorter
        );
    }

    #[test]
    fn report_invariants() {
        let t = truth(vec![r("ab", 'c', "b"), r("a", 'a', "")]);
        let d = Dataset {
            ruleset: t.clone(),
            pairs: vec![],
            multiple: 1,
            seed: 0,
            kind: crate::SampleKind::Characteristic,
        };
        let p = predicted(vec![r("ab", 'c', "b"), r("b", 'c', "d")]);
        let rep = evaluate(&t, &p, &d).unwrap();
        assert_eq!(rep.missing_errors.len(), 1);
        assert_eq!(rep.wrong_errors.len(), 1);
        let json = serde_json::to_value(&rep).unwrap();
        for key in [
            "precision",
            "recall",
            "compatible",
            "missing_errors",
            "wrong_errors",
            "ambiguity_flag",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let u = EvalReport::unparseable(&t);
        assert_eq!(u.missing_errors.len(), 2);
        assert!(!u.compatible);
    }
}
