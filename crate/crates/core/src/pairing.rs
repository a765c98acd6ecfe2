//! Cantor pairing on naturals and on big naturals.
//!
//! `pair(c, k) = (c+k)(c+k+1)/2 + k`. This layout is part of every file
//! format the crate writes, so it must never change.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Cantor pairing, `None` on overflow.
pub fn try_pair(c: u64, k: u64) -> Option<u64> {
    let w = (c as u128) + (k as u128);
    let v = w.checked_mul(w + 1)? / 2 + k as u128;
    u64::try_from(v).ok()
}

/// Cantor pairing. Panics on overflow; use [`try_pair`] when inputs are untrusted.
pub fn pair(c: u64, k: u64) -> u64 {
    try_pair(c, k).expect("pairing overflow")
}

/// Inverse of [`pair`].
pub fn unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    let w = ((8 * z + 1).isqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let k = z - t;
    let c = w - k;
    (c as u64, k as u64)
}

pub fn triple(a: u64, b: u64, c: u64) -> Option<u64> {
    try_pair(b, c).and_then(|bc| try_pair(a, bc))
}

pub fn untriple(z: u64) -> (u64, u64, u64) {
    let (a, bc) = unpair(z);
    let (b, c) = unpair(bc);
    (a, b, c)
}

pub fn pair_big(c: &BigUint, k: &BigUint) -> BigUint {
    let w = c + k;
    (&w * (&w + 1u32)) / 2u32 + k
}

pub fn unpair_big(z: &BigUint) -> (BigUint, BigUint) {
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let k = z - t;
    let c = &w - &k;
    (c, k)
}

/// Finite sequences of big naturals: `[] -> 0`, `h::t -> 1 + pair(h, code(t))`.
pub fn seq_encode(items: &[BigUint]) -> BigUint {
    let mut acc = BigUint::zero();
    for h in items.iter().rev() {
        acc = pair_big(h, &acc) + 1u32;
    }
    acc
}

pub fn seq_decode(code: &BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    let mut cur = code.clone();
    while !cur.is_zero() {
        let (h, t) = unpair_big(&(cur - BigUint::one()));
        out.push(h);
        cur = t;
    }
    out
}

/// Finite sets via the gap sequence of their increasing enumeration.
pub fn set_encode(set: &std::collections::BTreeSet<u64>) -> BigUint {
    let mut gaps = Vec::with_capacity(set.len());
    let mut prev: Option<u64> = None;
    for &x in set {
        let g = match prev {
            None => x,
            Some(p) => x - p - 1,
        };
        gaps.push(BigUint::from(g));
        prev = Some(x);
    }
    seq_encode(&gaps)
}

pub fn set_decode(code: &BigUint) -> Option<std::collections::BTreeSet<u64>> {
    let mut out = std::collections::BTreeSet::new();
    let mut prev: Option<u64> = None;
    for g in seq_decode(code) {
        let g = g.to_u64()?;
        let x = match prev {
            None => g,
            Some(p) => p.checked_add(g)?.checked_add(1)?,
        };
        out.insert(x);
        prev = Some(x);
    }
    Some(out)
}

/// Longest tuple [`tuple_decode`] will materialise.
pub const MAX_TUPLE_LEN: u64 = 64;

/// Nonempty tuples: `(a_1..a_n) -> pair(n-1, a_1)` for `n = 1`, and
/// `pair(n-1, pair(a_1, pair(a_2, ... a_n)))` in general. A bijection
/// between naturals and nonempty tuples.
pub fn tuple_encode(items: &[u64]) -> Option<u64> {
    let (last, init) = items.split_last()?;
    let mut acc = *last;
    for &h in init.iter().rev() {
        acc = try_pair(h, acc)?;
    }
    try_pair(items.len() as u64 - 1, acc)
}

/// Inverse of [`tuple_encode`]; `None` past [`MAX_TUPLE_LEN`].
pub fn tuple_decode(code: u64) -> Option<Vec<u64>> {
    let (n1, mut rest) = unpair(code);
    if n1 + 1 > MAX_TUPLE_LEN {
        return None;
    }
    let mut out = Vec::with_capacity(n1 as usize + 1);
    for _ in 0..n1 {
        let (h, t) = unpair(rest);
        out.push(h);
        rest = t;
    }
    out.push(rest);
    Some(out)
}
