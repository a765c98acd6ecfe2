//! Computable linear orders on ℕ and the fixed numbering of ℚ.
//!
//! ℚ numbering: `0 ↦ 0`, `2m−1 ↦ sb(m)`, `2m ↦ −sb(m)` for `m ≥ 1`, where
//! `sb(m)` walks the Stern–Brocot tree from `1/1` along the binary digits
//! of `m` after its leading 1 (0 = left, 1 = right).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn rat_decode(code: u64) -> BigRational {
    if code == 0 {
        return BigRational::zero();
    }
    let m = code.div_ceil(2);
    let q = stern_brocot(m);
    if code % 2 == 1 {
        q
    } else {
        -q
    }
}

fn stern_brocot(m: u64) -> BigRational {
    // Bounds a/b < x < c/d; the node is the mediant.
    let (mut a, mut b, mut c, mut d) = (0u128, 1u128, 1u128, 0u128);
    let bits = 64 - m.leading_zeros();
    for i in (0..bits - 1).rev() {
        let (p, q) = (a + c, b + d);
        if (m >> i) & 1 == 0 {
            c = p;
            d = q;
        } else {
            a = p;
            b = q;
        }
    }
    BigRational::new(BigInt::from(a + c), BigInt::from(b + d))
}

/// Inverse of [`rat_decode`]; `None` when the code exceeds `u64`.
pub fn rat_encode(q: &BigRational) -> Option<u64> {
    if q.is_zero() {
        return Some(0);
    }
    let x = q.abs();
    let (mut a, mut b, mut c, mut d) = (
        BigInt::zero(),
        BigInt::one(),
        BigInt::one(),
        BigInt::zero(),
    );
    let mut m: u64 = 1;
    loop {
        let med = BigRational::new(&a + &c, &b + &d);
        if x == med {
            break;
        }
        m = m.checked_mul(2)?;
        if x < med {
            c = med.numer().clone();
            d = med.denom().clone();
        } else {
            m |= 1;
            a = med.numer().clone();
            b = med.denom().clone();
        }
    }
    let code = if q.is_positive() {
        m.checked_mul(2)? - 1
    } else {
        m.checked_mul(2)?
    };
    Some(code)
}

/// Sign-aware rational compare on codes.
pub fn rat_lt(a: u64, b: u64) -> bool {
    rat_decode(a) < rat_decode(b)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinearOrder {
    Omega,
    OmegaStar,
    Rationals,
    /// `L1` on the evens, `L2` on the odds, every even below every odd.
    Sum(Box<LinearOrder>, Box<LinearOrder>),
    Reverse(Box<LinearOrder>),
}

impl LinearOrder {
    pub fn sum(a: LinearOrder, b: LinearOrder) -> LinearOrder {
        LinearOrder::Sum(Box::new(a), Box::new(b))
    }

    pub fn reverse(a: LinearOrder) -> LinearOrder {
        LinearOrder::Reverse(Box::new(a))
    }

    pub fn lt(&self, x: u64, y: u64) -> bool {
        match self {
            LinearOrder::Omega => x < y,
            LinearOrder::OmegaStar => x > y,
            LinearOrder::Rationals => rat_lt(x, y),
            LinearOrder::Sum(l, r) => match (x % 2, y % 2) {
                (0, 0) => LinearOrder::lt(l, x / 2, y / 2),
                (1, 1) => LinearOrder::lt(r, x / 2, y / 2),
                (a, b) => a < b,
            },
            LinearOrder::Reverse(l) => LinearOrder::lt(l, y, x),
        }
    }

    pub fn le(&self, x: u64, y: u64) -> bool {
        x == y || self.lt(x, y)
    }

    /// Prefix token code, used as combinator parameters.
    pub fn to_tokens(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.push(&mut out);
        out
    }

    fn push(&self, out: &mut Vec<u64>) {
        match self {
            LinearOrder::Omega => out.push(0),
            LinearOrder::OmegaStar => out.push(1),
            LinearOrder::Rationals => out.push(2),
            LinearOrder::Sum(a, b) => {
                out.push(3);
                a.push(out);
                b.push(out);
            }
            LinearOrder::Reverse(a) => {
                out.push(4);
                a.push(out);
            }
        }
    }

    /// Reads one order from the front of `t`, returning it and the rest.
    pub fn from_tokens(t: &[u64]) -> Option<(LinearOrder, &[u64])> {
        Self::read(t, 0)
    }

    fn read(t: &[u64], depth: usize) -> Option<(LinearOrder, &[u64])> {
        if depth > 32 {
            return None;
        }
        let (&tag, rest) = t.split_first()?;
        Some(match tag {
            0 => (LinearOrder::Omega, rest),
            1 => (LinearOrder::OmegaStar, rest),
            2 => (LinearOrder::Rationals, rest),
            3 => {
                let (a, rest) = Self::read(rest, depth + 1)?;
                let (b, rest) = Self::read(rest, depth + 1)?;
                (LinearOrder::sum(a, b), rest)
            }
            4 => {
                let (a, rest) = Self::read(rest, depth + 1)?;
                (LinearOrder::reverse(a), rest)
            }
            _ => return None,
        })
    }
}

impl fmt::Display for LinearOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearOrder::Omega => write!(f, "omega"),
            LinearOrder::OmegaStar => write!(f, "omega_star"),
            LinearOrder::Rationals => write!(f, "rationals"),
            LinearOrder::Sum(a, b) => write!(f, "sum({a},{b})"),
            LinearOrder::Reverse(a) => write!(f, "reverse({a})"),
        }
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("bad order expression: {0}")]
pub struct OrderParseError(pub String);

impl FromStr for LinearOrder {
    type Err = OrderParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || OrderParseError(s.to_string());
        match s {
            "omega" => return Ok(LinearOrder::Omega),
            "omega_star" => return Ok(LinearOrder::OmegaStar),
            "rationals" => return Ok(LinearOrder::Rationals),
            _ => {}
        }
        let open = s.find('(').ok_or_else(err)?;
        if !s.ends_with(')') {
            return Err(err());
        }
        let (head, inner) = (&s[..open], &s[open + 1..s.len() - 1]);
        match head {
            "reverse" => Ok(LinearOrder::reverse(inner.parse()?)),
            "sum" => {
                // split at the top-level comma
                let mut depth = 0i32;
                for (i, ch) in inner.char_indices() {
                    match ch {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        ',' if depth == 0 => {
                            return Ok(LinearOrder::sum(
                                inner[..i].parse()?,
                                inner[i + 1..].parse()?,
                            ))
                        }
                        _ => {}
                    }
                }
                Err(err())
            }
            _ => Err(err()),
        }
    }
}

impl Serialize for LinearOrder {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LinearOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_codes() {
        assert_eq!(rat_decode(0), q(0, 1));
        assert_eq!(rat_decode(1), q(1, 1));
        assert_eq!(rat_decode(2), q(-1, 1));
        // m = 2 = 0b10: one step left of 1/1
        assert_eq!(rat_decode(3), q(1, 2));
        assert_eq!(rat_decode(5), q(2, 1));
    }

    #[test]
    fn numbering_is_a_bijection_on_a_prefix() {
        let mut seen = std::collections::BTreeSet::new();
        for c in 0..5000u64 {
            let r = rat_decode(c);
            assert_eq!(rat_encode(&r), Some(c));
            assert!(seen.insert(r));
        }
    }

    #[test]
    fn every_small_fraction_has_a_code() {
        for n in -12i64..=12 {
            for d in 1i64..=12 {
                let r = q(n, d);
                assert_eq!(rat_decode(rat_encode(&r).unwrap()), r);
            }
        }
    }

    #[test]
    fn reverse_omega() {
        let r = LinearOrder::reverse(LinearOrder::Omega);
        assert!(r.lt(5, 2));
        assert!(!r.lt(2, 5));
    }

    #[test]
    fn sum_puts_left_below_right() {
        let s = LinearOrder::sum(LinearOrder::Omega, LinearOrder::OmegaStar);
        for x in (0..60).step_by(2) {
            for y in (1..60).step_by(2) {
                assert!(s.lt(x, y) && !s.lt(y, x));
            }
        }
        // right summand reversed
        assert!(s.lt(5, 3));
    }

    #[test]
    fn rationals_dense() {
        let l = LinearOrder::Rationals;
        for a in 0..40u64 {
            for b in 0..40u64 {
                if !l.lt(a, b) {
                    continue;
                }
                // mediants stay shallow in the tree; midpoints need not
                let (x, y) = (rat_decode(a), rat_decode(b));
                let mid = BigRational::new(x.numer() + y.numer(), x.denom() + y.denom());
                let m = rat_encode(&mid).unwrap();
                assert!(l.lt(a, m) && l.lt(m, b));
            }
        }
    }

    #[test]
    fn text_and_tokens_round_trip() {
        let orders = [
            "omega",
            "sum(sum(omega,omega),omega_star)",
            "sum(omega,sum(omega_star,omega))",
            "reverse(rationals)",
        ];
        for s in orders {
            let l: LinearOrder = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
            let t = l.to_tokens();
            let (back, rest) = LinearOrder::from_tokens(&t).unwrap();
            assert!(rest.is_empty());
            assert_eq!(back, l);
        }
    }

    proptest::proptest! {
        #[test]
        fn strict_total_order(x in 0u64..400, y in 0u64..400, z in 0u64..400, pick in 0usize..5) {
            let orders = [
                LinearOrder::Omega,
                LinearOrder::Rationals,
                LinearOrder::sum(LinearOrder::sum(LinearOrder::Omega, LinearOrder::Omega), LinearOrder::OmegaStar),
                LinearOrder::sum(LinearOrder::Omega, LinearOrder::sum(LinearOrder::OmegaStar, LinearOrder::Omega)),
                LinearOrder::reverse(LinearOrder::Rationals),
            ];
            let l = &orders[pick];
            let n = [l.lt(x, y), x == y, l.lt(y, x)].iter().filter(|&&b| b).count();
            proptest::prop_assert_eq!(n, 1);
            if l.lt(x, y) && l.lt(y, z) {
                proptest::prop_assert!(l.lt(x, z));
            }
        }
    }
}
