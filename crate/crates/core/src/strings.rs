//! Prefix and suffix utilities over plain `&str`.

use crate::{Error, Result};

/// Every suffix of `w`, longest first, ending with the empty string.
pub fn suffixes(w: &str) -> Vec<&str> {
    let mut out: Vec<&str> = w.char_indices().map(|(i, _)| &w[i..]).collect();
    out.push("");
    out
}

/// Every prefix of `w`, shortest first.
pub fn prefixes(w: &str) -> Vec<&str> {
    let mut out = vec![""];
    out.extend(w.char_indices().skip(1).map(|(i, _)| &w[..i]));
    if !w.is_empty() {
        out.push(w);
    }
    out
}

pub fn is_suffix(s: &str, w: &str) -> bool {
    w.ends_with(s)
}

pub fn is_proper_suffix(s: &str, w: &str) -> bool {
    s.len() < w.len() && w.ends_with(s)
}

/// The last `n` symbols of `w` (all of `w` when it is shorter).
pub fn suffix_of_len(w: &str, n: usize) -> &str {
    let len = w.chars().count();
    if len <= n {
        return w;
    }
    match w.char_indices().nth(len - n) {
        Some((i, _)) => &w[i..],
        None => "",
    }
}

pub fn reversed(w: &str) -> String {
    w.chars().rev().collect()
}

/// The longest string that is a prefix of every member.
pub fn longest_common_prefix<I, S>(set: I) -> Result<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut iter = set.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput)?;
    let mut prefix: String = first.as_ref().to_string();
    for s in iter {
        let shared = prefix
            .chars()
            .zip(s.as_ref().chars())
            .take_while(|(a, b)| a == b)
            .map(|(a, _)| a.len_utf8())
            .sum();
        prefix.truncate(shared);
        if prefix.is_empty() {
            break;
        }
    }
    Ok(prefix)
}
