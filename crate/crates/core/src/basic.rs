//! Minimal relations, two-class and one-class relations, the 1-reduction
//! repair, the universal c.e. relation and orbit realization.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::descriptor::Descriptor;
use crate::numbering;
use crate::ops::{put_paced, run_arg};
use crate::pairing::{pair, pair_big, try_pair, unpair, unpair_big, untriple};
use crate::program::{run, Budget, EvalError, SetProgram, Stage, Trace};
use crate::relations::{oracle_decide, RelationId};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum BasicError {
    #[error("witnesses {0} and {1} are equivalent")]
    WitnessViolation(usize, usize),
    #[error("no witnesses")]
    NoWitnesses,
    #[error("search gave up at stage {0}")]
    SearchExhausted(Stage),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `=_n ≤ E` through a system of pairwise inequivalent witnesses:
/// `k ↦ i_k` for `k < n`, `k ↦ i_{n-1}` beyond.
#[derive(Clone, Debug)]
pub struct MinN<T> {
    witnesses: Vec<T>,
}

impl<T> MinN<T> {
    /// `related` answers `None` when equivalence cannot be decided; such
    /// pairs are taken on trust.
    pub fn new(witnesses: Vec<T>, related: impl Fn(&T, &T) -> Option<bool>) -> Result<Self, BasicError> {
        if witnesses.is_empty() {
            return Err(BasicError::NoWitnesses);
        }
        for i in 0..witnesses.len() {
            for j in i + 1..witnesses.len() {
                if related(&witnesses[i], &witnesses[j]) == Some(true) {
                    return Err(BasicError::WitnessViolation(i, j));
                }
            }
        }
        Ok(MinN { witnesses })
    }

    pub fn n(&self) -> usize {
        self.witnesses.len()
    }

    pub fn apply(&self, k: u64) -> &T {
        let i = (k as usize).min(self.witnesses.len() - 1);
        &self.witnesses[i]
    }
}

/// [`MinN`] with descriptor witnesses checked by the oracle for `r`.
pub fn reduce_to_min_n(r: &RelationId, witnesses: Vec<Descriptor>) -> Result<MinN<Descriptor>, BasicError> {
    MinN::new(witnesses, |a, b| oracle_decide(r, a, b).ok())
}

/// `=_ℕ ≤ E` for `E` with a c.e. complement: `diseq` enumerates codes
/// `<a,b>` of inequivalent pairs. Input `n ≥ 1` waits for a system of `n`
/// elements, pairwise inequivalent by what `diseq` has shown, and returns
/// its last element; elements join the system greedily in order of first
/// appearance. `=_ℕ` itself reduces through `k ↦ f(k+1)`.
pub fn reduce_eqn_to_pi01(diseq: &SetProgram, n: u64, max_stage: Stage, budget: &mut Budget) -> Result<u64, BasicError> {
    let n = n.max(1) as usize;
    let mut stage = 16.min(max_stage);
    loop {
        let t = run(diseq, stage, budget)?;
        let mut apart: BTreeSet<(u64, u64)> = BTreeSet::new();
        for (x, _) in t.iter() {
            let (a, b) = unpair(x);
            apart.insert((a.min(b), a.max(b)));
        }
        // first appearance: the entry stage of the earliest pair naming v
        let mut first: BTreeMap<u64, Stage> = BTreeMap::new();
        for (x, st) in t.iter() {
            let (a, b) = unpair(x);
            for v in [a, b] {
                first.entry(v).and_modify(|s| *s = (*s).min(st)).or_insert(st);
            }
        }
        let mut order: Vec<(Stage, u64)> = first.into_iter().map(|(v, s)| (s, v)).collect();
        order.sort_unstable();
        let mut system: Vec<u64> = Vec::new();
        for (_, v) in order {
            budget.tick(system.len() as u64 + 1)?;
            if system.iter().all(|&w| apart.contains(&(v.min(w), v.max(w)))) {
                system.push(v);
                if system.len() == n {
                    return Ok(v);
                }
            }
        }
        if stage >= max_stage {
            return Err(BasicError::SearchExhausted(stage));
        }
        stage = (stage * 2).min(max_stage);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// The program enumerates equivalent pairs.
    Sigma,
    /// The program enumerates inequivalent pairs.
    Pi,
}

/// Decides a relation with finitely many classes from a maximal system of
/// pairwise inequivalent witnesses and an enumeration of `E` (σ mode) or of
/// its complement (π mode).
#[derive(Clone, Debug)]
pub struct FiniteClassDecider {
    pub mode: Mode,
    pub program: SetProgram,
    pub witnesses: Vec<u64>,
    pub max_stage: Stage,
}

impl FiniteClassDecider {
    pub fn decide(&self, a: u64, b: u64, budget: &mut Budget) -> Result<bool, BasicError> {
        if a == b {
            return Ok(true);
        }
        let mut stage = 16.min(self.max_stage);
        loop {
            let t = run(&self.program, stage, budget)?;
            let (ca, cb) = match self.mode {
                Mode::Sigma => {
                    let mut uf = Uce::default();
                    for (x, _) in t.iter() {
                        let (u, v) = unpair(x);
                        uf.union(u, v);
                    }
                    (self.sigma_class(&mut uf, a), self.sigma_class(&mut uf, b))
                }
                Mode::Pi => {
                    let apart: BTreeSet<u64> = t.final_set();
                    (self.pi_class(&apart, a), self.pi_class(&apart, b))
                }
            };
            budget.tick(self.witnesses.len() as u64)?;
            if let (Some(x), Some(y)) = (ca, cb) {
                return Ok(x == y);
            }
            if stage >= self.max_stage {
                return Err(BasicError::SearchExhausted(stage));
            }
            stage = (stage * 2).min(self.max_stage);
        }
    }

    fn sigma_class(&self, uf: &mut Uce, a: u64) -> Option<usize> {
        self.witnesses.iter().position(|&w| w == a || uf.related(a, w))
    }

    /// The class of `a` once it is known apart from every witness but one.
    fn pi_class(&self, apart: &BTreeSet<u64>, a: u64) -> Option<usize> {
        let known = |w: u64| apart.contains(&pair(a, w)) || apart.contains(&pair(w, a));
        if let Some(i) = self.witnesses.iter().position(|&w| w == a) {
            return Some(i);
        }
        let open: Vec<usize> = (0..self.witnesses.len()).filter(|&i| !known(self.witnesses[i])).collect();
        (open.len() == 1).then(|| open[0])
    }
}

/// Which side of `E_{B,Bᶜ}` an m-reduction lands on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    ToB,
    ToComplement,
}

/// `f` itself reduces `E_{A,Aᶜ}` to `E_{B,Bᶜ}` when it m-reduces `A` to `B`
/// or to `Bᶜ`. Returns the side that holds on `[0, window]`, or a
/// counterexample pair for the biconditional.
pub fn two_class_from_m_reduction(
    f: impl Fn(u64) -> u64,
    a: &Descriptor,
    b: &Descriptor,
    window: u64,
) -> Result<Polarity, (u64, u64)> {
    let to_b = (0..=window).all(|x| a.contains(x) == b.contains(f(x)));
    let to_c = (0..=window).all(|x| a.contains(x) != b.contains(f(x)));
    if to_b || to_c {
        return Ok(if to_b { Polarity::ToB } else { Polarity::ToComplement });
    }
    let ra = RelationId::TwoClass(a.clone());
    let rb = RelationId::TwoClass(b.clone());
    let one = |x: u64| Descriptor::finite([x]);
    for x in 0..=window {
        for y in x + 1..=window {
            let l = oracle_decide(&ra, &one(x), &one(y)).unwrap_or(false);
            let r = oracle_decide(&rb, &one(f(x)), &one(f(y))).unwrap_or(false);
            if l != r {
                return Err((x, y));
            }
        }
    }
    // the biconditional holds on the window though neither side does
    Ok(Polarity::ToB)
}

/// An injective repair `g` of a many-one reduction `f` to the set of `b`:
/// `g(n) = f(n)` unless that value is taken, in which case `g(n)` is the
/// first element enumerated into `B` that is not yet a value.
pub struct OneRepair<F> {
    f: F,
    b: SetProgram,
    max_stage: Stage,
    stage: Stage,
    trace: Trace,
    values: Vec<u64>,
    used: BTreeSet<u64>,
}

impl<F: Fn(u64) -> u64> OneRepair<F> {
    pub fn new(f: F, b: SetProgram, max_stage: Stage) -> Self {
        OneRepair {
            f,
            b,
            max_stage,
            stage: 0,
            trace: Trace::new(0),
            values: Vec::new(),
            used: BTreeSet::new(),
        }
    }

    pub fn apply(&mut self, n: u64, budget: &mut Budget) -> Result<u64, BasicError> {
        while self.values.len() as u64 <= n {
            let m = self.values.len() as u64;
            let mut v = (self.f)(m);
            if self.used.contains(&v) {
                v = self.fresh(budget)?;
            }
            self.used.insert(v);
            self.values.push(v);
        }
        Ok(self.values[n as usize])
    }

    fn fresh(&mut self, budget: &mut Budget) -> Result<u64, BasicError> {
        loop {
            let mut order: Vec<(Stage, u64)> = self.trace.iter().map(|(x, st)| (st, x)).collect();
            order.sort_unstable();
            if let Some(&(_, x)) = order.iter().find(|(_, x)| !self.used.contains(x)) {
                return Ok(x);
            }
            if self.stage >= self.max_stage {
                return Err(BasicError::SearchExhausted(self.stage));
            }
            self.stage = (self.stage * 2 + 16).min(self.max_stage);
            self.trace = run(&self.b, self.stage, budget)?;
        }
    }
}

/// Union–find over naturals with the least element as representative.
#[derive(Clone, Debug, Default)]
pub struct Uce {
    parent: BTreeMap<u64, u64>,
}

impl Uce {
    pub fn find(&mut self, x: u64) -> u64 {
        let mut r = x;
        while let Some(&p) = self.parent.get(&r) {
            if p == r {
                break;
            }
            r = p;
        }
        // path compression
        let mut c = x;
        while c != r {
            let next = self.parent[&c];
            self.parent.insert(c, r);
            c = next;
        }
        r
    }

    pub fn union(&mut self, a: u64, b: u64) {
        self.parent.entry(a).or_insert(a);
        self.parent.entry(b).or_insert(b);
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent.insert(ra.max(rb), ra.min(rb));
        }
    }

    pub fn related(&mut self, a: u64, b: u64) -> bool {
        a == b || self.find(a) == self.find(b)
    }

    /// Nontrivial classes keyed by representative.
    pub fn classes(&mut self) -> BTreeMap<u64, BTreeSet<u64>> {
        let keys: Vec<u64> = self.parent.keys().copied().collect();
        let mut out: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for k in keys {
            let r = self.find(k);
            out.entry(r).or_default().insert(k);
        }
        out.retain(|_, c| c.len() > 1);
        out
    }

    /// The closure of the pairs `p` has enumerated by stage `s`.
    pub fn at_stage(p: &SetProgram, s: Stage, budget: &mut Budget) -> Result<Uce, EvalError> {
        let mut uf = Uce::default();
        for (x, _) in run(p, s, budget)?.iter() {
            let (a, b) = unpair(x);
            uf.union(a, b);
        }
        Ok(uf)
    }
}

/// `a ↦ <e, a>` into the universal relation.
pub fn uce_embed(e: &BigUint, a: u64) -> BigUint {
    pair_big(e, &BigUint::from(a))
}

/// `U_ce` at stage `s`: `<e,a>` and `<e',b>` are related when `e = e'` and
/// `a, b` are joined by the closure of what program `e` has enumerated.
pub fn uce_related(x: &BigUint, y: &BigUint, s: Stage, budget: &mut Budget) -> Result<bool, EvalError> {
    UceView::new(s).related(x, y, budget)
}

/// [`uce_related`] at a fixed stage, caching each slice's closure.
#[derive(Clone, Debug)]
pub struct UceView {
    stage: Stage,
    slices: BTreeMap<BigUint, Uce>,
    split: BTreeMap<BigUint, (BigUint, Option<u64>)>,
}

impl UceView {
    pub fn new(stage: Stage) -> Self {
        UceView {
            stage,
            slices: BTreeMap::new(),
            split: BTreeMap::new(),
        }
    }

    pub fn related(&mut self, x: &BigUint, y: &BigUint, budget: &mut Budget) -> Result<bool, EvalError> {
        if x == y {
            return Ok(true);
        }
        let ((e, a), (f, b)) = (self.split(x), self.split(y));
        if e != f {
            return Ok(false);
        }
        let (Some(a), Some(b)) = (a, b) else {
            return Ok(false);
        };
        if !self.slices.contains_key(&e) {
            let uf = Uce::at_stage(&numbering::decode(&e), self.stage, budget)?;
            self.slices.insert(e.clone(), uf);
        }
        Ok(self.slices.get_mut(&e).unwrap().related(a, b))
    }

    fn split(&mut self, x: &BigUint) -> (BigUint, Option<u64>) {
        self.split
            .entry(x.clone())
            .or_insert_with(|| {
                let (e, a) = unpair_big(x);
                (e, a.to_u64())
            })
            .clone()
    }
}

/// The pair codes of a script program with a small index, for the oracle.
pub fn script_pairs(e: u64) -> Option<BTreeSet<u64>> {
    match numbering::decode(&BigUint::from(e)) {
        SetProgram::Script(entries) => Some(entries.into_iter().flat_map(|(_, s)| s).collect()),
        _ => None,
    }
}

/// The `F_ω` action realizing the closure of the pairs `P` enumerates as
/// its orbit relation. Generator `x_i`, `i = <s, <n, n'>>`, swaps `n` and
/// `n'` if `<n, n'>` is in `P` by stage `s` and is the identity otherwise.
/// Generators with `s` past the horizon act as the identity.
#[derive(Clone, Debug)]
pub struct OrbitAction {
    trace: Trace,
}

impl OrbitAction {
    pub fn new(p: &SetProgram, horizon: Stage, budget: &mut Budget) -> Result<Self, EvalError> {
        Ok(OrbitAction {
            trace: run(p, horizon, budget)?,
        })
    }

    pub fn generator(&self, i: u64) -> Option<(u64, u64)> {
        let (s, n, n2) = untriple(i);
        let code = try_pair(n, n2)?;
        self.trace.contains_at(code, s).then_some((n, n2))
    }

    /// Letter `2i` is `x_i`, `2i+1` its inverse, which is `x_i` again.
    /// The rightmost letter acts first.
    pub fn act(&self, word: &[u64], x: u64) -> u64 {
        word.iter().rev().fold(x, |y, &l| match self.generator(l / 2) {
            Some((n, n2)) if y == n => n2,
            Some((n, n2)) if y == n2 => n,
            _ => y,
        })
    }

    /// One generator index per enumerated pair: the least stage it is seen.
    pub fn live_generators(&self) -> Vec<u64> {
        self.trace
            .iter()
            .filter_map(|(c, st)| {
                let (n, n2) = unpair(c);
                crate::pairing::triple(st, n, n2)
            })
            .collect()
    }

    /// Elements reached from `x` by words of length at most `depth`.
    pub fn orbit(&self, x: u64, depth: usize) -> BTreeSet<u64> {
        let gens: Vec<(u64, u64)> = self.live_generators().into_iter().filter_map(|i| self.generator(i)).collect();
        let mut seen = BTreeSet::from([x]);
        let mut queue = VecDeque::from([(x, 0)]);
        while let Some((y, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for &(n, n2) in &gens {
                let z = if y == n {
                    n2
                } else if y == n2 {
                    n
                } else {
                    continue;
                };
                if seen.insert(z) {
                    queue.push_back((z, d + 1));
                }
            }
        }
        seen
    }
}

/// The moves of the generators up to stage `s`: `<n, n'>` and `<n', n>`
/// for each live generator, entering at the generator's index.
pub fn eval_orbit_pairs(args: &[SetProgram], s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let p = run_arg(args, 0, s, budget)?;
    let mut t = Trace::new(s);
    for (c, st) in p.iter() {
        budget.tick(1)?;
        let (n, n2) = unpair(c);
        if let Some(i) = crate::pairing::triple(st, n, n2) {
            for x in [try_pair(n, n2), try_pair(n2, n)].into_iter().flatten() {
                put_paced(&mut t, x, i);
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::triple;
    use crate::program::approx;
    use crate::relations::oracle::closure_related;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn min_n_maps() {
        let m = MinN::new(vec![4u64, 7], |a, b| Some(a == b)).unwrap();
        assert_eq!((*m.apply(0), *m.apply(1), *m.apply(5)), (4, 7, 7));
        let c = MinN::new(vec![9u64], |_, _| None).unwrap();
        assert!((0..10).all(|k| *c.apply(k) == 9));
        assert_eq!(
            MinN::new(vec![1u64, 2, 1], |a, b| Some(a == b)).unwrap_err(),
            BasicError::WitnessViolation(0, 2)
        );
    }

    #[test]
    fn eq2_into_emin() {
        let m = reduce_to_min_n(&RelationId::Emin, vec![Descriptor::finite([0]), Descriptor::finite([1])]).unwrap();
        for a in 0..=20u64 {
            for b in 0..=20u64 {
                let l = a.min(1) == b.min(1);
                let r = oracle_decide(&RelationId::Emin, m.apply(a), m.apply(b)).unwrap();
                assert_eq!(l, r, "{a} {b}");
            }
        }
        assert!(reduce_to_min_n(&RelationId::Emin, vec![Descriptor::finite([3]), Descriptor::finite([3, 8])]).is_err());
    }

    /// Representatives `k` stand for `Finite({k})` under `E_min`; every
    /// pair of distinct ones is apart, listed in order of the larger.
    fn emin_diseq(limit: u64) -> SetProgram {
        SetProgram::scheduled((0..limit).flat_map(|b| (0..b).map(move |a| (pair(a, b), b))))
    }

    #[test]
    fn eqn_into_a_pi01_relation() {
        let d = emin_diseq(40);
        let mut budget = Budget::default();
        assert_eq!(reduce_eqn_to_pi01(&d, 1, 100, &mut budget).unwrap(), 0);
        for n in 1..=30 {
            let v = reduce_eqn_to_pi01(&d, n, 100, &mut budget).unwrap();
            assert_eq!(v, n - 1);
        }
        // distinct inputs land in distinct classes
        let f = |k: u64| Descriptor::finite([reduce_eqn_to_pi01(&d, k + 1, 100, &mut Budget::default()).unwrap()]);
        for k in 0..10 {
            for j in 0..5 {
                let same = oracle_decide(&RelationId::Emin, &f(k), &f(j)).unwrap();
                assert_eq!(same, k == j);
            }
        }
        assert!(matches!(
            reduce_eqn_to_pi01(&d, 60, 100, &mut budget),
            Err(BasicError::SearchExhausted(100))
        ));
    }

    fn parity_programs() -> (SetProgram, SetProgram) {
        let eq = SetProgram::scheduled((0..40).map(|x| (pair(x, x + 2), x)));
        let apart = SetProgram::scheduled(
            (0..42u64).flat_map(|a| (0..42u64).filter(move |b| (a + b) % 2 == 1).map(move |b| (pair(a, b), a.max(b)))),
        );
        (eq, apart)
    }

    #[test]
    fn finite_class_decider_modes_agree() {
        let (eq, apart) = parity_programs();
        let sigma = FiniteClassDecider {
            mode: Mode::Sigma,
            program: eq,
            witnesses: vec![0, 1],
            max_stage: 200,
        };
        let pi = FiniteClassDecider {
            mode: Mode::Pi,
            program: apart,
            ..sigma.clone()
        };
        let mut b = Budget::default();
        assert!(sigma.decide(2, 4, &mut b).unwrap());
        // reflexivity needs no enumeration at all
        let dead = FiniteClassDecider {
            program: SetProgram::empty(),
            max_stage: 0,
            ..sigma.clone()
        };
        assert!(dead.decide(17, 17, &mut b).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(0..42), rng.gen_range(0..42));
            let mut b = Budget::default();
            let s = sigma.decide(x, y, &mut b).unwrap();
            assert_eq!(s, pi.decide(x, y, &mut b).unwrap(), "{x} {y}");
            assert_eq!(s, (x + y) % 2 == 0);
        }
    }

    #[test]
    fn two_class_examples() {
        let evens = Descriptor::Progression { a: 0, d: 2 };
        let odds = Descriptor::Progression { a: 1, d: 2 };
        assert_eq!(two_class_from_m_reduction(|n| n, &evens, &evens, 200), Ok(Polarity::ToB));
        assert_eq!(two_class_from_m_reduction(|n| n + 1, &evens, &odds, 200), Ok(Polarity::ToB));
        // 2n sends every number into the evens, so 0 and 1 are merged
        assert_eq!(two_class_from_m_reduction(|n| 2 * n, &evens, &evens, 200), Err((0, 1)));
        assert_eq!(two_class_from_m_reduction(|n| n + 1, &evens, &evens, 200), Ok(Polarity::ToComplement));
        assert!(two_class_from_m_reduction(|n| n / 2, &evens, &evens, 50).is_err());
    }

    #[test]
    fn repair_on_a_constant_map() {
        // f is 5 on A = {1,2}; B = ℕ ∖ {0} enumerated in order
        let f = |n: u64| if n == 1 || n == 2 { 5 } else { 0 };
        let b = SetProgram::scheduled((1..100).map(|x| (x, x)));
        let mut g = OneRepair::new(f, b, 1000);
        let mut budget = Budget::default();
        assert_eq!(g.apply(0, &mut budget).unwrap(), 0);
        assert_eq!(g.apply(1, &mut budget).unwrap(), 5);
        assert_eq!(g.apply(2, &mut budget).unwrap(), 1);
        let mut id = OneRepair::new(|n| n * 3, SetProgram::empty(), 0);
        assert_eq!(id.apply(7, &mut budget).unwrap(), 21);
    }

    #[test]
    fn repair_is_injective_and_still_reduces() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (a0, d) = (rng.gen_range(0..5), rng.gen_range(1..5));
            let a = Descriptor::Progression { a: a0, d };
            let c = rng.gen_range(1..4);
            let a2 = a.clone();
            // collisions on A, injective into the odds off A
            let f = move |n: u64| if a2.contains(n) { 2 * (n % c) } else { 2 * n + 1 };
            let b = Descriptor::Progression { a: 0, d: 2 };
            let mut g = OneRepair::new(f, b.compile().0, 1 << 14);
            let mut budget = Budget::new(50_000_000);
            let mut vals = BTreeSet::new();
            for n in 0..=300 {
                let v = g.apply(n, &mut budget).unwrap();
                assert!(vals.insert(v), "collision at {n}");
                assert_eq!(a.contains(n), b.contains(v));
            }
        }
    }

    #[test]
    fn union_find_closure() {
        let mut uf = Uce::default();
        uf.union(1, 2);
        uf.union(2, 3);
        assert_eq!(uf.classes(), BTreeMap::from([(1, BTreeSet::from([1, 2, 3]))]));
        assert!(uf.related(3, 1) && !uf.related(0, 1));
        let mut none = Uce::default();
        assert!(none.related(4, 4) && !none.related(4, 5));
    }

    fn random_script(rng: &mut ChaCha8Rng, top: u64) -> SetProgram {
        let k = rng.gen_range(0..12);
        SetProgram::scheduled((0..k).map(|_| {
            let (a, b) = (rng.gen_range(0..=top), rng.gen_range(0..=top));
            (pair(a, b), rng.gen_range(0..10))
        }))
    }

    #[test]
    fn embedding_into_the_universal_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let p = random_script(&mut rng, 30);
            let e = numbering::encode(&p);
            let pairs = approx(&p, 10).unwrap();
            let mut view = UceView::new(10);
            let mut budget = Budget::default();
            let imgs: Vec<BigUint> = (0..=30).map(|a| uce_embed(&e, a)).collect();
            for a in 0..=30 {
                for b in 0..=30 {
                    let want = closure_related(&pairs, a as u64, b as u64);
                    let got = view.related(&imgs[a], &imgs[b], &mut budget).unwrap();
                    assert_eq!(got, want);
                }
            }
            // another slice never meets this one
            let other = uce_embed(&(e.clone() + 1u32), 0);
            assert!(!uce_related(&uce_embed(&e, 0), &other, 10, &mut Budget::default()).unwrap());
        }
    }

    #[test]
    fn small_script_indices_feed_the_oracle() {
        let p = SetProgram::finite([pair(1, 2)]);
        let e = numbering::encode(&p).to_u64().unwrap();
        assert_eq!(script_pairs(e), Some(BTreeSet::from([pair(1, 2)])));
        let d = |a| Descriptor::finite([pair(e, a)]);
        assert!(oracle_decide(&RelationId::Uce, &d(1), &d(2)).unwrap());
        assert!(!oracle_decide(&RelationId::Uce, &d(1), &d(3)).unwrap());
    }

    #[test]
    fn swapping_generator() {
        let p = SetProgram::scheduled([(pair(1, 2), 3)]);
        let act = OrbitAction::new(&p, 50, &mut Budget::default()).unwrap();
        assert_eq!(act.act(&[], 5), 5);
        let i = triple(3, 1, 2).unwrap();
        assert_eq!(act.act(&[2 * i], 1), 2);
        // seen too early: stage 2 has not enumerated the pair
        assert_eq!(act.act(&[2 * triple(2, 1, 2).unwrap()], 1), 1);
    }

    #[test]
    fn classes_grow_with_the_stage() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let p = random_script(&mut rng, 20);
            let mut b = Budget::default();
            for s in 0..10 {
                let mut now = Uce::at_stage(&p, s, &mut b).unwrap();
                let mut next = Uce::at_stage(&p, s + 1, &mut b).unwrap();
                for (_, class) in now.classes() {
                    let r = next.find(*class.iter().next().unwrap());
                    assert!(class.iter().all(|&x| next.find(x) == r));
                }
            }
        }
    }

    /// Classes of at most five elements, each a star around its least
    /// member, so any two members are two swaps apart.
    fn star_script(rng: &mut ChaCha8Rng) -> SetProgram {
        let mut elems: Vec<u64> = (0..=20).collect();
        let mut items = vec![];
        while elems.len() > 1 {
            let size = rng.gen_range(1..=5).min(elems.len());
            let class: Vec<u64> = (0..size).map(|_| elems.remove(rng.gen_range(0..elems.len()))).collect();
            let hub = *class.iter().min().unwrap();
            for &x in &class {
                if x != hub {
                    items.push((pair(x, hub), rng.gen_range(0..8)));
                }
            }
        }
        SetProgram::scheduled(items)
    }

    #[test]
    fn orbits_are_the_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let p = star_script(&mut rng);
            let act = OrbitAction::new(&p, 8, &mut Budget::default()).unwrap();
            let pairs = approx(&p, 8).unwrap();
            for x in 0..=20 {
                let orbit = act.orbit(x, 4);
                for y in 0..=20 {
                    assert_eq!(orbit.contains(&y), closure_related(&pairs, x, y), "{x} {y}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn generators_are_involutions(
            word in proptest::collection::vec(0u64..4000, 0..6),
            x in 0u64..20,
        ) {
            let p = SetProgram::scheduled((0..10).map(|k| (pair(k, k + 3), k)));
            let act = OrbitAction::new(&p, 100, &mut Budget::default()).unwrap();
            for &l in &word {
                prop_assert_eq!(act.act(&[l, l], x), x);
            }
            let inv: Vec<u64> = word.iter().rev().map(|l| l ^ 1).collect();
            let mut ww = word.clone();
            ww.extend(inv);
            prop_assert_eq!(act.act(&ww, x), x);
        }
    }

    #[test]
    fn move_graph_matches_generators() {
        let p = SetProgram::scheduled([(pair(1, 2), 0)]);
        let got = approx(&crate::program::SetProgram::comb(crate::ops::Op::OrbitPairs, vec![p], vec![]), 100).unwrap();
        assert_eq!(got, [pair(1, 2), pair(2, 1)].into());
    }
}
