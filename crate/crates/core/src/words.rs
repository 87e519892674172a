//! Symbolic addresses: finite words and eventually periodic infinite words
//! over the alphabet `{1, …, m}`.
//!
//! Points of the attractor are coded by infinite words; exactly the
//! eventually periodic ones admit exact evaluation, so those are the words
//! represented here. A point can have up to three addresses; the triple
//! `{u1(2)̇, u2(1)̇, u3(1)̇}` names the junction of the tile labeled `u`, and
//! [`equivalent`] decides when two addresses name the same point.
//!
//! Text encoding: preperiod letters, then the period in parentheses:
//! `"1(2)"`, `"(31)"`, `"33(1)"`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("letter {0} outside the alphabet 1..={1}")]
    BadLetter(u8, u8),
    #[error("empty period")]
    EmptyPeriod,
    #[error("cannot parse word {0:?}")]
    Parse(String),
    #[error("inputs are equivalent addresses of the same point")]
    EquivalentInputs,
}

/// One letter of the alphabet, stored as its 1-based value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    pub fn new(value: u8, m: u8) -> Result<Self, WordError> {
        if value >= 1 && value <= m {
            Ok(Letter(value))
        } else {
            Err(WordError::BadLetter(value, m))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite word, possibly empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct FiniteWord(pub Vec<Letter>);

impl FiniteWord {
    pub fn empty() -> Self {
        FiniteWord(Vec::new())
    }

    /// Builds from 1-based letter values; rejects letters outside `1..=m`.
    pub fn from_values(values: &[u8], m: u8) -> Result<Self, WordError> {
        values
            .iter()
            .map(|&v| Letter::new(v, m))
            .collect::<Result<Vec<_>, _>>()
            .map(FiniteWord)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Concatenation; the empty word is a two-sided identity.
    pub fn concat(&self, other: &FiniteWord) -> FiniteWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FiniteWord(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// All words of the given length over `1..=m`, in lexicographic order.
    pub fn all_of_length(len: usize, m: u8) -> Vec<FiniteWord> {
        let mut out = vec![FiniteWord::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for w in &out {
                for k in 1..=m {
                    let mut v = w.0.clone();
                    v.push(Letter(k));
                    next.push(FiniteWord(v));
                }
            }
            out = next;
        }
        out
    }

    pub fn max_letter(&self) -> u8 {
        self.0.iter().map(|l| l.0).max().unwrap_or(0)
    }
}

impl fmt::Debug for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.0 {
            write!(f, "{}", l.0)?;
        }
        Ok(())
    }
}

impl fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.0)?;
        }
        Ok(())
    }
}

/// An eventually periodic infinite word `pre · (per)^∞` with nonempty period.
///
/// Stored in normal form: the period is primitive and the preperiod is as
/// short as possible, so structural equality decides word equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodicWord {
    pre: FiniteWord,
    per: FiniteWord,
}

impl PeriodicWord {
    /// Builds and normalizes. Errors on an empty period.
    pub fn new(pre: FiniteWord, per: FiniteWord) -> Result<Self, WordError> {
        if per.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        let mut w = PeriodicWord { pre, per };
        w.normalize_in_place();
        Ok(w)
    }

    pub fn from_values(pre: &[u8], per: &[u8], m: u8) -> Result<Self, WordError> {
        PeriodicWord::new(FiniteWord::from_values(pre, m)?, FiniteWord::from_values(per, m)?)
    }

    pub fn preperiod(&self) -> &FiniteWord {
        &self.pre
    }

    pub fn period(&self) -> &FiniteWord {
        &self.per
    }

    pub fn max_letter(&self) -> u8 {
        self.pre.max_letter().max(self.per.max_letter())
    }

    /// Letter at 0-based index of the infinite sequence.
    pub fn letter_at(&self, i: usize) -> Letter {
        if i < self.pre.len() {
            self.pre.0[i]
        } else {
            self.per.0[(i - self.pre.len()) % self.per.len()]
        }
    }

    /// Drops the first letter.
    pub fn shift(&self) -> PeriodicWord {
        self.drop_prefix(1)
    }

    /// Drops the first `k` letters.
    pub fn drop_prefix(&self, k: usize) -> PeriodicWord {
        let mut pre = self.pre.0.clone();
        let mut per = self.per.0.clone();
        let drop_pre = k.min(pre.len());
        pre.drain(..drop_pre);
        let rot = (k - drop_pre) % per.len();
        per.rotate_left(rot);
        PeriodicWord::new(FiniteWord(pre), FiniteWord(per)).expect("period stays nonempty")
    }

    /// Prepends a finite word.
    pub fn with_prefix(&self, u: &FiniteWord) -> PeriodicWord {
        PeriodicWord::new(u.concat(&self.pre), self.per.clone()).expect("period nonempty")
    }

    /// Re-normalizes (a no-op on values built through [`PeriodicWord::new`]).
    pub fn normalize(&self) -> PeriodicWord {
        let mut w = self.clone();
        w.normalize_in_place();
        w
    }

    fn normalize_in_place(&mut self) {
        // Primitive period: shortest divisor-length word whose repetition
        // gives the stored period.
        let n = self.per.len();
        for d in 1..=n {
            if !n.is_multiple_of(d) {
                continue;
            }
            if (d..n).all(|i| self.per.0[i] == self.per.0[i % d]) {
                self.per.0.truncate(d);
                break;
            }
        }
        // Absorb trailing preperiod letters that merely rotate the period.
        while let Some(&last) = self.pre.0.last() {
            if last == *self.per.0.last().expect("nonempty period") {
                self.pre.0.pop();
                self.per.0.rotate_right(1);
            } else {
                break;
            }
        }
    }

    /// If this word names a tile junction, returns the tile word `u` such
    /// that the address is one of `u1(2)`, `u2(1)`, `u3(1)`. Requires the
    /// three-letter alphabet.
    pub fn junction_word(&self) -> Option<FiniteWord> {
        if self.per.len() != 1 || self.pre.is_empty() {
            return None;
        }
        let p = self.per.0[0].0;
        let last = self.pre.0.last().unwrap().0;
        let is_junction = (p == 2 && last == 1) || (p == 1 && (last == 2 || last == 3));
        if is_junction {
            let mut u = self.pre.0.clone();
            u.pop();
            Some(FiniteWord(u))
        } else {
            None
        }
    }

    /// All addresses of the point this word names: either `{self}` or the
    /// junction triple. Sorted, so the output is deterministic.
    pub fn representatives(&self) -> Result<Vec<PeriodicWord>, WordError> {
        self.require_csst_alphabet()?;
        let w = self.normalize();
        let mut out = match w.junction_word() {
            Some(u) => junction_triple(&u),
            None => vec![w],
        };
        out.sort();
        Ok(out)
    }

    fn require_csst_alphabet(&self) -> Result<(), WordError> {
        let m = self.max_letter();
        if m > 3 {
            return Err(WordError::BadLetter(m, 3));
        }
        Ok(())
    }

    /// Parses the `pre(per)` text form over `1..=m`.
    pub fn parse(s: &str, m: u8) -> Result<Self, WordError> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| WordError::Parse(s.into()))?;
        if !s.ends_with(')') {
            return Err(WordError::Parse(s.into()));
        }
        let pre = &s[..open];
        let per = &s[open + 1..s.len() - 1];
        let digits = |t: &str| -> Result<Vec<u8>, WordError> {
            t.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| WordError::Parse(s.into())))
                .collect()
        };
        let pre = FiniteWord::from_values(&digits(pre)?, m)?;
        let per = FiniteWord::from_values(&digits(per)?, m)?;
        PeriodicWord::new(pre, per)
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.pre, self.per)
    }
}

impl fmt::Debug for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.pre, self.per)
    }
}

/// The three addresses of the junction of tile `u`.
pub fn junction_triple(u: &FiniteWord) -> Vec<PeriodicWord> {
    let mk = |k: u8, p: u8| {
        let mut pre = u.0.clone();
        pre.push(Letter(k));
        PeriodicWord::new(FiniteWord(pre), FiniteWord(vec![Letter(p)])).unwrap()
    };
    vec![mk(1, 2), mk(2, 1), mk(3, 1)]
}

/// Do two addresses name the same point? (Three-letter alphabet only.)
pub fn equivalent(v: &PeriodicWord, w: &PeriodicWord) -> Result<bool, WordError> {
    v.require_csst_alphabet()?;
    w.require_csst_alphabet()?;
    let v = v.normalize();
    let w = w.normalize();
    if v == w {
        return Ok(true);
    }
    Ok(match (v.junction_word(), w.junction_word()) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    })
}

/// Length of the common prefix of two distinct eventually periodic words.
/// Returns `None` if the words are letterwise equal.
pub fn common_prefix_len(v: &PeriodicWord, w: &PeriodicWord) -> Option<usize> {
    let pv = v.per.len();
    let pw = w.per.len();
    let bound = v.pre.len().max(w.pre.len()) + lcm(pv, pw) + 1;
    (0..bound).find(|&i| v.letter_at(i) != w.letter_at(i))
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Splits a pair of non-equivalent addresses at their divergence point,
/// choosing representatives with the longest common prefix.
///
/// Returns `(u, ta, tb)` with `a ≡ u·ta`, `b ≡ u·tb` and the first letters of
/// `ta`, `tb` distinct. Among maximizing representative pairs, the
/// lexicographically first (in the sorted representative enumeration) is
/// returned; downstream arc-length values agree across all maximizing pairs.
pub fn common_prefix_split(
    a: &PeriodicWord,
    b: &PeriodicWord,
) -> Result<(FiniteWord, PeriodicWord, PeriodicWord), WordError> {
    if equivalent(a, b)? {
        return Err(WordError::EquivalentInputs);
    }
    let ra = a.representatives()?;
    let rb = b.representatives()?;
    let mut best: Option<(usize, &PeriodicWord, &PeriodicWord)> = None;
    for v in &ra {
        for w in &rb {
            let n = common_prefix_len(v, w).expect("non-equivalent words differ somewhere");
            if best.as_ref().is_none_or(|(bn, _, _)| n > *bn) {
                best = Some((n, v, w));
            }
        }
    }
    let (n, v, w) = best.expect("representative sets are nonempty");
    let u = FiniteWord((0..n).map(|i| v.letter_at(i)).collect());
    Ok((u, v.drop_prefix(n), w.drop_prefix(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(pre: &[u8], per: &[u8]) -> PeriodicWord {
        PeriodicWord::from_values(pre, per, 3).unwrap()
    }

    #[test]
    fn concat_examples() {
        let e = FiniteWord::empty();
        let w31 = FiniteWord::from_values(&[3, 1], 3).unwrap();
        assert_eq!(e.concat(&w31), w31);
        let a = FiniteWord::from_values(&[1], 3).unwrap();
        let b = FiniteWord::from_values(&[2], 3).unwrap();
        assert_eq!(a.concat(&b), FiniteWord::from_values(&[1, 2], 3).unwrap());
        let ab = a.concat(&b);
        let c = FiniteWord::from_values(&[3], 3).unwrap();
        assert_eq!(ab.concat(&c), FiniteWord::from_values(&[1, 2, 3], 3).unwrap());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(w(&[1], &[2]).shift(), w(&[], &[2]));
        assert_eq!(w(&[], &[3, 1]).shift(), w(&[], &[1, 3]));
        assert_eq!(w(&[], &[2]).shift(), w(&[], &[2]));
    }

    #[test]
    fn normalize_examples() {
        // primitive period
        assert_eq!(w(&[1], &[2, 2]), w(&[1], &[2]));
        // absorb into period
        assert_eq!(w(&[1, 2], &[2]), w(&[1], &[2]));
        // already normal
        let x = w(&[], &[3]);
        assert_eq!(x.normalize(), x);
        // idempotent on a mixed case
        let y = w(&[2, 1, 3, 1, 3], &[1, 3]);
        assert_eq!(y.normalize(), y);
        assert_eq!(y, w(&[2], &[1, 3]));
    }

    #[test]
    fn letters_preserved_by_normalization() {
        let raw = PeriodicWord {
            pre: FiniteWord::from_values(&[1, 2], 3).unwrap(),
            per: FiniteWord::from_values(&[2], 3).unwrap(),
        };
        let norm = raw.normalize();
        for i in 0..32 {
            assert_eq!(raw.letter_at(i), norm.letter_at(i), "letter {i}");
        }
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&w(&[1], &[2]), &w(&[2], &[1])).unwrap());
        assert!(equivalent(&w(&[3, 1], &[2]), &w(&[3, 2], &[1])).unwrap());
        assert!(!equivalent(&w(&[], &[1]), &w(&[], &[2])).unwrap());
    }

    #[test]
    fn representative_examples() {
        let r = w(&[1], &[2]).representatives().unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.contains(&w(&[1], &[2])));
        assert!(r.contains(&w(&[2], &[1])));
        assert!(r.contains(&w(&[3], &[1])));

        assert_eq!(w(&[], &[2]).representatives().unwrap(), vec![w(&[], &[2])]);

        let r = w(&[3, 3, 1], &[2]).representatives().unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.contains(&w(&[3, 3, 2], &[1])));
        assert!(r.contains(&w(&[3, 3, 3], &[1])));
    }

    #[test]
    fn prefix_split_examples() {
        let (u, ta, tb) = common_prefix_split(&w(&[], &[1]), &w(&[], &[2])).unwrap();
        assert!(u.is_empty());
        assert_eq!(ta, w(&[], &[1]));
        assert_eq!(tb, w(&[], &[2]));

        // Junction address vs a deeper tile: the maximizing pair uses the
        // representative 3(1) of the first point against 31(2).
        let (u, ta, tb) = common_prefix_split(&w(&[1], &[2]), &w(&[3, 3], &[1])).unwrap();
        assert_eq!(u, FiniteWord::from_values(&[3, 1], 3).unwrap());
        assert_eq!(ta, w(&[], &[1]));
        assert_eq!(tb, w(&[], &[2]));
        assert_ne!(ta.letter_at(0), tb.letter_at(0));

        assert_eq!(
            common_prefix_split(&w(&[3, 1], &[2]), &w(&[3, 2], &[1])).unwrap_err(),
            WordError::EquivalentInputs
        );
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(PeriodicWord::parse("1(2)", 3).unwrap(), w(&[1], &[2]));
        assert_eq!(PeriodicWord::parse("(31)", 3).unwrap(), w(&[], &[3, 1]));
        assert_eq!(PeriodicWord::parse("33(1)", 3).unwrap(), w(&[3, 3], &[1]));
        assert_eq!(w(&[3, 3], &[1]).to_string(), "33(1)");
        assert_eq!(w(&[], &[2]).to_string(), "(2)");
        assert!(PeriodicWord::parse("4(1)", 3).is_err());
        assert!(PeriodicWord::parse("12", 3).is_err());
        assert!(PeriodicWord::parse("1()", 3).is_err());
    }

    #[test]
    fn rejects_wide_alphabet_for_csst_ops() {
        let v = PeriodicWord::from_values(&[4], &[1], 5).unwrap();
        assert!(equivalent(&v, &v).is_err());
        assert!(v.representatives().is_err());
    }
}
