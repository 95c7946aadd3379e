use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An ordered set of lowercase ASCII letters.
///
/// The empty string is never a member; it is represented as `""` wherever a
/// string over the alphabet is expected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub const MIN_SIZE: usize = 2;
    pub const MAX_SIZE: usize = 26;

    /// The first `size` letters `a, b, c, ...`.
    pub fn first(size: usize) -> Result<Self> {
        if !(Self::MIN_SIZE..=Self::MAX_SIZE).contains(&size) {
            return Err(Error::InvalidAlphabet(format!(
                "size {size} outside {}..={}",
                Self::MIN_SIZE,
                Self::MAX_SIZE
            )));
        }
        Ok(Self {
            symbols: ('a'..='z').take(size).collect(),
        })
    }

    /// Builds an alphabet from arbitrary distinct lowercase letters. Symbols
    /// are kept in sorted order so that string comparison is shortlex-ready.
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut symbols: Vec<char> = symbols.into_iter().collect();
        if let Some(bad) = symbols.iter().find(|c| !c.is_ascii_lowercase()) {
            return Err(Error::InvalidAlphabet(format!(
                "symbol {bad:?} is not a lowercase letter"
            )));
        }
        symbols.sort_unstable();
        let before = symbols.len();
        symbols.dedup();
        if symbols.len() != before {
            return Err(Error::InvalidAlphabet("duplicate symbols".into()));
        }
        if !(Self::MIN_SIZE..=Self::MAX_SIZE).contains(&symbols.len()) {
            return Err(Error::InvalidAlphabet(format!(
                "size {} outside {}..={}",
                symbols.len(),
                Self::MIN_SIZE,
                Self::MAX_SIZE
            )));
        }
        Ok(Self { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.binary_search(&c).is_ok()
    }

    /// Fails with [`Error::ForeignSymbol`] on the first symbol outside the
    /// alphabet.
    pub fn check(&self, w: &str) -> Result<()> {
        match w.chars().find(|&c| !self.contains(c)) {
            Some(symbol) => Err(Error::ForeignSymbol {
                symbol,
                context: w.to_string(),
            }),
            None => Ok(()),
        }
    }

    pub fn is_over(&self, w: &str) -> bool {
        w.chars().all(|c| self.contains(c))
    }

    /// All strings of exactly `len` symbols, in lexicographic order.
    pub fn strings_of_len(&self, len: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        for _ in 0..len {
            out = out
                .iter()
                .flat_map(|p| {
                    self.symbols.iter().map(move |&c| {
                        let mut s = p.clone();
                        s.push(c);
                        s
                    })
                })
                .collect();
        }
        out
    }

    /// All strings with length in `min..=max`, in shortlex order.
    pub fn strings_between(&self, min: usize, max: usize) -> Vec<String> {
        (min..=max).flat_map(|l| self.strings_of_len(l)).collect()
    }

    /// `|Σ^min| + ... + |Σ^max|`, saturating.
    pub fn count_between(&self, min: usize, max: usize) -> usize {
        (min..=max).fold(0usize, |acc, l| {
            acc.saturating_add(self.len().saturating_pow(l as u32))
        })
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl TryFrom<String> for Alphabet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Alphabet::new(s.chars())
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> String {
        a.to_string()
    }
}

/// Length first, then lexicographic.
pub fn shortlex_cmp(a: &str, b: &str) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}
