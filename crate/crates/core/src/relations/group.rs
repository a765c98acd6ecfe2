//! Computable groups: finite cyclic and symmetric groups by element
//! index, and the free group `F_ω` on reduced words.
//!
//! Letters: `x_{g+1}` is `2g`, its inverse `2g+1`. A reduced word is coded
//! by recoding each letter after the first relative to the one it may not
//! be (the inverse of its predecessor), then coding the resulting list
//! with `[] ↦ 0`, `h::t ↦ 1 + <h, code(t)>`. Every natural is a word.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::pairing::{try_pair, unpair};

/// Largest symmetric group shipped (8! elements).
pub const MAX_SYMMETRIC: u8 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComputableGroup {
    /// `ℤ/n`, elements `0..n`.
    Cyclic(u64),
    /// `S_n`, elements are lexicographic ranks of permutations of `0..n`.
    Symmetric(u8),
    Free,
}

pub fn list_encode(items: &[u64]) -> Option<u64> {
    let mut code = 0u64;
    for &h in items.iter().rev() {
        code = try_pair(h, code)?.checked_add(1)?;
    }
    Some(code)
}

pub fn list_decode(mut code: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while code > 0 {
        let (h, t) = unpair(code - 1);
        out.push(h);
        code = t;
    }
    out
}

/// Free reduction (cancels adjacent `ℓ ℓ^{-1}`).
pub fn reduce(letters: &[u64]) -> Vec<u64> {
    let mut st: Vec<u64> = Vec::with_capacity(letters.len());
    for &l in letters {
        if st.last() == Some(&(l ^ 1)) {
            st.pop();
        } else {
            st.push(l);
        }
    }
    st
}

pub fn is_reduced(letters: &[u64]) -> bool {
    letters.windows(2).all(|w| w[1] != w[0] ^ 1)
}

pub fn word_inverse(letters: &[u64]) -> Vec<u64> {
    letters.iter().rev().map(|l| l ^ 1).collect()
}

/// Code of a reduced word; `None` if not reduced or too large.
pub fn word_encode(letters: &[u64]) -> Option<u64> {
    if !is_reduced(letters) {
        return None;
    }
    let mut seq = Vec::with_capacity(letters.len());
    for (i, &l) in letters.iter().enumerate() {
        if i == 0 {
            seq.push(l);
        } else {
            let banned = letters[i - 1] ^ 1;
            seq.push(if l < banned { l } else { l - 1 });
        }
    }
    list_encode(&seq)
}

pub fn word_decode(code: u64) -> Vec<u64> {
    let seq = list_decode(code);
    let mut out: Vec<u64> = Vec::with_capacity(seq.len());
    for (i, &v) in seq.iter().enumerate() {
        if i == 0 {
            out.push(v);
        } else {
            let banned = out[i - 1] ^ 1;
            out.push(if v < banned { v } else { v + 1 });
        }
    }
    out
}

fn factorial(n: u8) -> u64 {
    (1..=n as u64).product()
}

/// Permutation of `0..n` with the given lexicographic rank.
pub fn perm_unrank(n: u8, mut rank: u64) -> Vec<u8> {
    let mut pool: Vec<u8> = (0..n).collect();
    let mut out = Vec::with_capacity(n as usize);
    for i in (0..n).rev() {
        let f = factorial(i);
        let k = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(k));
    }
    out
}

pub fn perm_rank(p: &[u8]) -> u64 {
    let n = p.len();
    let mut rank = 0u64;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count() as u64;
        rank += smaller * factorial((n - 1 - i) as u8);
    }
    rank
}

impl ComputableGroup {
    /// `None` for the free group.
    pub fn order(&self) -> Option<u64> {
        match self {
            ComputableGroup::Cyclic(n) => Some(*n),
            ComputableGroup::Symmetric(n) => Some(factorial(*n)),
            ComputableGroup::Free => None,
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        self.order().is_none_or(|n| x < n)
    }

    pub fn identity(&self) -> u64 {
        0
    }

    /// `a·b`; `None` outside the domain or when a free word's code
    /// leaves `u64`.
    pub fn mul(&self, a: u64, b: u64) -> Option<u64> {
        if !self.contains(a) || !self.contains(b) {
            return None;
        }
        match *self {
            ComputableGroup::Cyclic(n) => Some(((a as u128 + b as u128) % n as u128) as u64),
            ComputableGroup::Symmetric(n) => {
                let (p, q) = (perm_unrank(n, a), perm_unrank(n, b));
                let r: Vec<u8> = q.iter().map(|&i| p[i as usize]).collect();
                Some(perm_rank(&r))
            }
            ComputableGroup::Free => {
                let mut w = word_decode(a);
                w.extend(word_decode(b));
                word_encode(&reduce(&w))
            }
        }
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.contains(a) {
            return None;
        }
        match *self {
            ComputableGroup::Cyclic(n) => Some((n - a) % n),
            ComputableGroup::Symmetric(n) => {
                let p = perm_unrank(n, a);
                let mut r = vec![0u8; n as usize];
                for (i, &v) in p.iter().enumerate() {
                    r[v as usize] = i as u8;
                }
                Some(perm_rank(&r))
            }
            ComputableGroup::Free => word_encode(&word_inverse(&word_decode(a))),
        }
    }

    /// Elements of a finite group in increasing code order.
    pub fn elements(&self) -> Option<Vec<u64>> {
        self.order().map(|n| (0..n).collect())
    }

    /// Multiplication table of a finite group.
    pub fn table(&self) -> Option<Vec<Vec<u64>>> {
        let els = self.elements()?;
        Some(
            els.iter()
                .map(|&a| els.iter().map(|&b| self.mul(a, b).unwrap()).collect())
                .collect(),
        )
    }

    /// Parameter code for combinators.
    pub fn code(&self) -> u64 {
        match *self {
            ComputableGroup::Cyclic(n) => try_pair(0, n).unwrap_or(0),
            ComputableGroup::Symmetric(n) => try_pair(1, n as u64).unwrap_or(0),
            ComputableGroup::Free => try_pair(2, 0).unwrap_or(0),
        }
    }

    pub fn from_code(c: u64) -> Option<ComputableGroup> {
        match unpair(c) {
            (0, n) if n >= 1 => Some(ComputableGroup::Cyclic(n)),
            (1, n) if n >= 1 && n <= MAX_SYMMETRIC as u64 => Some(ComputableGroup::Symmetric(n as u8)),
            (2, 0) => Some(ComputableGroup::Free),
            _ => None,
        }
    }
}

impl fmt::Display for ComputableGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComputableGroup::Cyclic(n) => write!(f, "cyclic({n})"),
            ComputableGroup::Symmetric(n) => write!(f, "symmetric({n})"),
            ComputableGroup::Free => write!(f, "free"),
        }
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("bad group expression: {0}")]
pub struct GroupParseError(pub String);

impl FromStr for ComputableGroup {
    type Err = GroupParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || GroupParseError(s.to_string());
        if s == "free" {
            return Ok(ComputableGroup::Free);
        }
        let arg = |head: &str| -> Option<u64> {
            s.strip_prefix(head)?.strip_prefix('(')?.strip_suffix(')')?.trim().parse().ok()
        };
        if let Some(n) = arg("cyclic") {
            return ComputableGroup::from_code(try_pair(0, n).ok_or_else(err)?).ok_or_else(err);
        }
        if let Some(n) = arg("symmetric") {
            return ComputableGroup::from_code(try_pair(1, n).ok_or_else(err)?).ok_or_else(err);
        }
        Err(err())
    }
}

impl Serialize for ComputableGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComputableGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
