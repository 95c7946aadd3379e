use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::strings::reversed;
use crate::{Alphabet, Error, Result};

/// Which context a rule's condition is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    #[serde(rename = "ISL")]
    Isl,
    #[serde(rename = "L-OSL")]
    LOsl,
    #[serde(rename = "R-OSL")]
    ROsl,
    #[serde(rename = "IOSL")]
    Iosl,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::Isl, Class::LOsl, Class::ROsl, Class::Iosl];
    pub const STANDARD: [Class; 3] = [Class::Isl, Class::LOsl, Class::ROsl];

    pub fn name(self) -> &'static str {
        match self {
            Class::Isl => "ISL",
            Class::LOsl => "L-OSL",
            Class::ROsl => "R-OSL",
            Class::Iosl => "IOSL",
        }
    }

    pub fn index(self) -> u64 {
        match self {
            Class::Isl => 0,
            Class::LOsl => 1,
            Class::ROsl => 2,
            Class::Iosl => 3,
        }
    }

    pub fn is_output_local(self) -> bool {
        matches!(self, Class::LOsl | Class::ROsl)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match norm.as_str() {
            "isl" => Ok(Class::Isl),
            "losl" => Ok(Class::LOsl),
            "rosl" => Ok(Class::ROsl),
            "iosl" => Ok(Class::Iosl),
            _ => Err(Error::InvalidSetting(format!("unknown class {s:?}"))),
        }
    }
}

/// One local rewrite `condition ∘ target → output`.
///
/// For IOSL rules `out_condition` holds the output context that must also be
/// present; for every other class it is `None`. Field order doubles as the
/// lexicographic rule order used for tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rule {
    pub condition: String,
    pub target: char,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_condition: Option<String>,
}

impl Rule {
    pub fn new(condition: impl Into<String>, target: char, output: impl Into<String>) -> Self {
        Self {
            condition: condition.into(),
            target,
            output: output.into(),
            out_condition: None,
        }
    }

    pub fn iosl(
        condition: impl Into<String>,
        target: char,
        out_condition: impl Into<String>,
        output: impl Into<String>,
    ) -> Self {
        Self {
            condition: condition.into(),
            target,
            output: output.into(),
            out_condition: Some(out_condition.into()),
        }
    }

    /// `condition ∘ target`.
    pub fn pattern(&self) -> String {
        let mut p = self.condition.clone();
        p.push(self.target);
        p
    }

    pub fn pattern_len(&self) -> usize {
        self.condition.chars().count() + 1
    }

    pub fn out_condition(&self) -> &str {
        self.out_condition.as_deref().unwrap_or("")
    }

    /// Length used by the longest-match policy: the pattern plus any output
    /// context.
    pub fn match_len(&self) -> usize {
        self.pattern_len() + self.out_condition().chars().count()
    }

    /// Total number of symbols across all fields.
    pub fn symbol_count(&self) -> usize {
        self.match_len() + self.output.chars().count()
    }

    pub fn is_trivial(&self) -> bool {
        let mut chars = self.output.chars();
        chars.next() == Some(self.target) && chars.next().is_none()
    }

    pub fn is_deletion(&self) -> bool {
        self.output.is_empty()
    }

    /// The same rule read right to left: conditions and output reversed.
    pub fn reversed(&self) -> Self {
        Self {
            condition: reversed(&self.condition),
            target: self.target,
            output: reversed(&self.output),
            out_condition: self.out_condition.as_deref().map(reversed),
        }
    }

    /// Renders the rule as a `left -> right` line; IOSL rules carry the output
    /// context after a slash: `left / outctx -> right`.
    pub fn to_line(&self) -> String {
        match &self.out_condition {
            Some(oc) => format!("{} / {} -> {}", self.pattern(), oc, self.output),
            None => format!("{} -> {}", self.pattern(), self.output),
        }
        .trim_end()
        .to_string()
    }

    /// Parses a single `left -> right` (or `left --> right`) line. No alphabet
    /// or length checks happen here.
    pub fn parse_line(line: &str) -> std::result::Result<Rule, LineError> {
        let (left, right) = split_arrow(line).ok_or(LineError::NoArrow)?;
        let (left, out_condition) = match left.split_once('/') {
            Some((l, oc)) => (l.trim(), Some(strip_quotes(oc.trim()).to_string())),
            None => (left.trim(), None),
        };
        let left = strip_quotes(left);
        let right = normalize_empty(strip_quotes(right.trim()));
        let mut chars: Vec<char> = left.chars().collect();
        let target = chars.pop().ok_or(LineError::EmptyLeft)?;
        Ok(Rule {
            condition: chars.into_iter().collect(),
            target,
            output: right.to_string(),
            out_condition,
        })
    }
}

fn split_arrow(line: &str) -> Option<(&str, &str)> {
    let idx = line.find("->")?;
    let left = line[..idx].trim_end_matches('-');
    Some((left, &line[idx + 2..]))
}

fn strip_quotes(s: &str) -> &str {
    s.trim_matches(|c| c == '`' || c == '\'' || c == '"').trim()
}

fn normalize_empty(s: &str) -> &str {
    match s {
        "λ" | "lambda" | "<empty>" | "ε" => "",
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LineError {
    #[error("no arrow")]
    NoArrow,
    #[error("empty left side")]
    EmptyLeft,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let out = if self.output.is_empty() {
            "λ"
        } else {
            self.output.as_str()
        };
        match &self.out_condition {
            Some(oc) => write!(f, "{}∘{}/{}→{}", self.condition, self.target, oc, out),
            None => write!(f, "{}∘{}→{}", self.condition, self.target, out),
        }
    }
}

/// A function encoded as a rule list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub class: Class,
    pub k: usize,
    pub alphabet: Alphabet,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(class: Class, k: usize, alphabet: Alphabet, rules: Vec<Rule>) -> Self {
        Self {
            class,
            k,
            alphabet,
            rules,
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Structural checks: window size, symbols, context lengths and unique
    /// patterns. Does not check the generation constraints.
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidRuleSet(format!("k = {} < 2", self.k)));
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.rules {
            let bad = |msg: String| Err(Error::InvalidRuleSet(format!("{r}: {msg}")));
            for s in [r.condition.as_str(), r.output.as_str(), r.out_condition()] {
                self.alphabet.check(s)?;
            }
            if !self.alphabet.contains(r.target) {
                return Err(Error::ForeignSymbol {
                    symbol: r.target,
                    context: r.to_line(),
                });
            }
            if r.pattern_len() > self.k {
                return bad(format!("pattern longer than k = {}", self.k));
            }
            if r.out_condition().chars().count() + 1 > self.k {
                return bad(format!("output context longer than k - 1 = {}", self.k - 1));
            }
            if r.out_condition.is_some() != (self.class == Class::Iosl) {
                return bad(format!(
                    "output context presence does not match class {}",
                    self.class
                ));
            }
            if !seen.insert((r.pattern(), r.out_condition.clone())) {
                return bad("duplicate pattern".into());
            }
        }
        Ok(())
    }

    /// Left-to-right encoding of an R-OSL set as an L-OSL set over reversed
    /// strings.
    pub fn reversed_encoding(&self) -> RuleSet {
        RuleSet {
            class: Class::LOsl,
            k: self.k,
            alphabet: self.alphabet.clone(),
            rules: self.rules.iter().map(Rule::reversed).collect(),
        }
    }

    pub fn symbol_count(&self) -> usize {
        self.rules.iter().map(Rule::symbol_count).sum()
    }

    /// Rules sorted, so that two sets can be compared as sets.
    pub fn sorted_rules(&self) -> Vec<Rule> {
        let mut r = self.rules.clone();
        r.sort();
        r
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} k={} Σ={} {{", self.class, self.k, self.alphabet)?;
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}
