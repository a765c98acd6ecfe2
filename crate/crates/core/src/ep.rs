//! Eventually periodic subsets of ℕ.
//!
//! Normal form for the flat descriptors: membership below `start` is read
//! from `prefix`, at or above it from `pattern[(x - start) % period]`.
//! Closed under the boolean operations, with finiteness, minima, maxima,
//! medians and gcds computable exactly.

use std::collections::BTreeSet;

use num_integer::Integer;

/// Largest period or threshold a normal form may reach.
pub const MAX_SPAN: u64 = 1 << 20;

#[derive(Clone, Debug)]
pub struct Ep {
    start: u64,
    prefix: Vec<bool>,
    pattern: Vec<bool>,
}

impl Ep {
    pub fn empty() -> Ep {
        Ep {
            start: 0,
            prefix: vec![],
            pattern: vec![false],
        }
    }

    pub fn all() -> Ep {
        Ep {
            start: 0,
            prefix: vec![],
            pattern: vec![true],
        }
    }

    pub fn finite(set: &BTreeSet<u64>) -> Option<Ep> {
        let start = set.iter().next_back().map_or(0, |m| m + 1);
        if start > MAX_SPAN {
            return None;
        }
        let prefix = (0..start).map(|x| set.contains(&x)).collect();
        Some(Ep {
            start,
            prefix,
            pattern: vec![false],
        })
    }

    pub fn cofinite(excluded: &BTreeSet<u64>) -> Option<Ep> {
        Ep::finite(excluded).map(|e| e.complement())
    }

    /// `{a, a+d, a+2d, ...}`; `d = 0` gives `{a}`.
    pub fn progression(a: u64, d: u64) -> Option<Ep> {
        if d == 0 {
            return Ep::finite(&[a].into());
        }
        if a > MAX_SPAN || d > MAX_SPAN {
            return None;
        }
        let mut pattern = vec![false; d as usize];
        pattern[0] = true;
        Some(Ep {
            start: a,
            prefix: vec![false; a as usize],
            pattern,
        })
    }

    pub fn contains(&self, x: u64) -> bool {
        if x < self.start {
            self.prefix[x as usize]
        } else {
            self.pattern[((x - self.start) % self.period()) as usize]
        }
    }

    pub fn period(&self) -> u64 {
        self.pattern.len() as u64
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    fn widen(&self, start: u64, period: u64) -> Ep {
        let prefix = (0..start).map(|x| self.contains(x)).collect();
        let pattern = (start..start + period).map(|x| self.contains(x)).collect();
        Ep {
            start,
            prefix,
            pattern,
        }
    }

    fn zip(&self, other: &Ep, f: impl Fn(bool, bool) -> bool) -> Option<Ep> {
        let start = self.start.max(other.start);
        let period = self.period().lcm(&other.period());
        if start > MAX_SPAN || period > MAX_SPAN {
            return None;
        }
        let a = self.widen(start, period);
        let b = other.widen(start, period);
        Some(
            Ep {
                start,
                prefix: a.prefix.iter().zip(&b.prefix).map(|(&x, &y)| f(x, y)).collect(),
                pattern: a.pattern.iter().zip(&b.pattern).map(|(&x, &y)| f(x, y)).collect(),
            }
            .normalized(),
        )
    }

    pub fn union(&self, o: &Ep) -> Option<Ep> {
        self.zip(o, |a, b| a || b)
    }

    pub fn intersection(&self, o: &Ep) -> Option<Ep> {
        self.zip(o, |a, b| a && b)
    }

    pub fn difference(&self, o: &Ep) -> Option<Ep> {
        self.zip(o, |a, b| a && !b)
    }

    pub fn sym_diff(&self, o: &Ep) -> Option<Ep> {
        self.zip(o, |a, b| a != b)
    }

    pub fn complement(&self) -> Ep {
        Ep {
            start: self.start,
            prefix: self.prefix.iter().map(|b| !b).collect(),
            pattern: self.pattern.iter().map(|b| !b).collect(),
        }
        .normalized()
    }

    /// Shortest period, then shortest prefix.
    fn normalized(mut self) -> Ep {
        let n = self.pattern.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (0..n).all(|i| self.pattern[i] == self.pattern[i % p]) {
                self.pattern.truncate(p);
                break;
            }
        }
        let p = self.pattern.len();
        while self.start > 0 {
            let last = self.prefix[self.start as usize - 1];
            if last != self.pattern[p - 1] {
                break;
            }
            self.prefix.pop();
            self.start -= 1;
            self.pattern.rotate_right(1);
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.pattern.iter().all(|b| !b)
    }

    pub fn is_cofinite(&self) -> bool {
        self.pattern.iter().all(|&b| b)
    }

    pub fn is_empty(&self) -> bool {
        self.is_finite() && self.prefix.iter().all(|b| !b)
    }

    /// Set equality (normal forms are canonical).
    pub fn same(&self, o: &Ep) -> bool {
        self.start == o.start && self.prefix == o.prefix && self.pattern == o.pattern
    }

    pub fn min(&self) -> Option<u64> {
        let span = self.start + self.period();
        (0..span).find(|&x| self.contains(x))
    }

    pub fn max(&self) -> Option<u64> {
        if !self.is_finite() {
            return None;
        }
        (0..self.start).rev().find(|&x| self.contains(x))
    }

    /// Members of a finite set, `None` if infinite.
    pub fn members(&self) -> Option<BTreeSet<u64>> {
        if !self.is_finite() {
            return None;
        }
        Some((0..self.start).filter(|&x| self.contains(x)).collect())
    }

    /// Members below `bound`.
    pub fn members_below(&self, bound: u64) -> impl Iterator<Item = u64> + '_ {
        (0..bound).filter(move |&x| self.contains(x))
    }

    /// Count of non-members (`None` when infinite).
    pub fn co_count(&self) -> Option<u64> {
        self.complement().members().map(|m| m.len() as u64)
    }

    pub fn count(&self) -> Option<u64> {
        self.members().map(|m| m.len() as u64)
    }

    /// gcd of the nonzero members; `None` encodes the `∞` sentinel.
    pub fn gcd(&self) -> Option<u64> {
        let span = self.start + 2 * self.period();
        let g = self
            .members_below(span)
            .filter(|&x| x > 0)
            .fold(0u64, |g, x| g.gcd(&x));
        (g > 0).then_some(g)
    }

    /// Number of residue positions in the periodic part that are members.
    pub fn pattern_weight(&self) -> usize {
        self.pattern.iter().filter(|&&b| b).count()
    }
}

impl PartialEq for Ep {
    fn eq(&self, o: &Ep) -> bool {
        self.same(o)
    }
}

impl Eq for Ep {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_forms_are_canonical() {
        let a = Ep::progression(0, 2).unwrap();
        let b = Ep::progression(0, 4).unwrap().union(&Ep::progression(2, 4).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = Ep::cofinite(&BTreeSet::new()).unwrap();
        assert_eq!(c, Ep::all());
        let odd = Ep::progression(1, 2).unwrap();
        assert_eq!(a.union(&odd).unwrap(), Ep::all());
        assert!(a.intersection(&odd).unwrap().is_empty());
    }

    #[test]
    fn queries() {
        let f = Ep::finite(&[3, 7, 9].into()).unwrap();
        assert_eq!(f.min(), Some(3));
        assert_eq!(f.max(), Some(9));
        assert_eq!(f.count(), Some(3));
        assert_eq!(Ep::progression(6, 4).unwrap().gcd(), Some(2));
        assert_eq!(Ep::finite(&[0].into()).unwrap().gcd(), None);
        assert_eq!(Ep::cofinite(&[0, 1].into()).unwrap().co_count(), Some(2));
    }

    proptest::proptest! {
        #[test]
        fn boolean_ops_match_membership(
            a in 0u64..6, d in 0u64..5, b in 0u64..6, e in 0u64..5,
            f in proptest::collection::btree_set(0u64..20, 0..6),
        ) {
            let x = Ep::progression(a, d).unwrap().union(&Ep::finite(&f).unwrap()).unwrap();
            let y = Ep::progression(b, e).unwrap();
            let u = x.union(&y).unwrap();
            let i = x.difference(&y).unwrap();
            for n in 0..120 {
                let inx = (n >= a && d > 0 && (n - a) % d == 0) || (d == 0 && n == a) || f.contains(&n);
                let iny = (n >= b && e > 0 && (n - b) % e == 0) || (e == 0 && n == b);
                proptest::prop_assert_eq!(x.contains(n), inx);
                proptest::prop_assert_eq!(u.contains(n), inx || iny);
                proptest::prop_assert_eq!(i.contains(n), inx && !iny);
            }
        }
    }
}
