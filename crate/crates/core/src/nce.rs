//! n-c.e. tuples: a tuple of programs `(A_1, ..., A_n)` denotes
//! `(A_1 ∖ A_2) ∪ (A_3 ∖ A_4) ∪ ...`, evaluated on stage approximations.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::numbering;
use crate::ops::Op;
use crate::pairing::{pair_big, unpair_big, MAX_TUPLE_LEN};
use crate::program::{run, Budget, EvalError, SetProgram, Stage, Trace};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NceProgram {
    pub indices: Vec<BigUint>,
}

impl NceProgram {
    pub fn from_programs(ps: &[SetProgram]) -> Self {
        NceProgram {
            indices: ps.iter().map(numbering::encode).collect(),
        }
    }

    pub fn programs(&self) -> Vec<SetProgram> {
        self.indices.iter().map(numbering::decode).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Whether `k` is in the evaluated set at stage `t`.
pub fn member_at(traces: &[Trace], k: u64, t: Stage) -> bool {
    traces.chunks(2).any(|c| {
        c[0].contains_at(k, t) && !c.get(1).is_some_and(|b| b.contains_at(k, t))
    })
}

pub fn traces(n: &NceProgram, s: Stage, budget: &mut Budget) -> Result<Vec<Trace>, EvalError> {
    n.programs().iter().map(|p| run(p, s, budget)).collect()
}

pub fn nce_eval(n: &NceProgram, s: Stage) -> Result<BTreeSet<u64>, EvalError> {
    nce_eval_with(n, s, &mut Budget::default())
}

pub fn nce_eval_with(n: &NceProgram, s: Stage, budget: &mut Budget) -> Result<BTreeSet<u64>, EvalError> {
    let ts = traces(n, s, budget)?;
    Ok(eval_at(&ts, s))
}

pub fn eval_at(ts: &[Trace], t: Stage) -> BTreeSet<u64> {
    ts.iter()
        .step_by(2)
        .flat_map(|tr| tr.at(t))
        .filter(|&k| member_at(ts, k, t))
        .collect()
}

/// Number of times membership of `k` changes over stages `0..=upto`,
/// starting from "out". At most the tuple length, each component entering
/// `k` at most once.
pub fn toggles(ts: &[Trace], k: u64, upto: Stage) -> u64 {
    let mut changes = 0;
    let mut cur = false;
    for t in 0..=upto {
        let now = member_at(ts, k, t);
        changes += (now != cur) as u64;
        cur = now;
    }
    changes
}

/// Appends the canonical empty index, leaving the evaluated set unchanged.
pub fn nce_embed(n: &NceProgram) -> NceProgram {
    let mut indices = n.indices.clone();
    indices.push(numbering::encode(&SetProgram::empty()));
    NceProgram { indices }
}

/// Prepends the empty index instead, which swaps the roles of the
/// components.
pub fn nce_embed_mutant(n: &NceProgram) -> NceProgram {
    let mut indices = vec![numbering::encode(&SetProgram::empty())];
    indices.extend(n.indices.iter().cloned());
    NceProgram { indices }
}

/// `h⁻¹`: `() ↦ 0`, `(i_1..i_n) ↦ 1 + <n-1, <i_1, <i_2, ... i_n>>>`.
pub fn ltomega_encode(n: &NceProgram) -> BigUint {
    let Some((last, init)) = n.indices.split_last() else {
        return BigUint::zero();
    };
    let mut acc = last.clone();
    for h in init.iter().rev() {
        acc = pair_big(h, &acc);
    }
    pair_big(&BigUint::from(n.indices.len() - 1), &acc) + 1u32
}

/// `h`; `None` for tuples longer than [`MAX_TUPLE_LEN`].
pub fn ltomega_decode(code: &BigUint) -> Option<NceProgram> {
    if code.is_zero() {
        return Some(NceProgram { indices: vec![] });
    }
    let (n1, mut rest) = unpair_big(&(code - BigUint::one()));
    let n1 = n1.to_u64().filter(|&n| n < MAX_TUPLE_LEN)?;
    let mut indices = Vec::with_capacity(n1 as usize + 1);
    for _ in 0..n1 {
        let (h, t) = unpair_big(&rest);
        indices.push(h);
        rest = t;
    }
    indices.push(rest);
    Some(NceProgram { indices })
}

/// The program whose column `k` is infinite exactly when `k` is in the limit.
pub fn ltomega_to_e3(n: &NceProgram) -> SetProgram {
    SetProgram::comb(Op::LtomegaToE3, n.programs(), vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sched() -> impl Strategy<Value = SetProgram> {
        proptest::collection::vec((0u64..12, 0u64..30), 0..6).prop_map(SetProgram::scheduled)
    }

    fn tuple() -> impl Strategy<Value = Vec<SetProgram>> {
        proptest::collection::vec(sched(), 0..5)
    }

    #[test]
    fn difference_of_two() {
        let n = NceProgram::from_programs(&[
            SetProgram::scheduled([(1, 3), (2, 0)]),
            SetProgram::scheduled([(1, 7)]),
        ]);
        assert_eq!(nce_eval(&n, 2).unwrap(), [2].into());
        assert_eq!(nce_eval(&n, 5).unwrap(), [1, 2].into());
        assert_eq!(nce_eval(&n, 9).unwrap(), [2].into());
        assert!(nce_eval(&NceProgram { indices: vec![] }, 9).unwrap().is_empty());
    }

    #[test]
    fn empty_index_is_zero() {
        assert_eq!(numbering::encode(&SetProgram::empty()), BigUint::zero());
    }

    #[test]
    fn encode_injective_on_a_thousand_tuples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut tuples = BTreeSet::new();
        while tuples.len() < 1000 {
            let len = rng.gen_range(0..5);
            let t: Vec<u64> = (0..len).map(|_| rng.gen_range(0..40)).collect();
            tuples.insert(t);
        }
        let mut codes = BTreeSet::new();
        for t in &tuples {
            let n = NceProgram {
                indices: t.iter().map(|&i| BigUint::from(i)).collect(),
            };
            let c = ltomega_encode(&n);
            assert_eq!(ltomega_decode(&c).as_ref(), Some(&n));
            codes.insert(c);
        }
        assert_eq!(codes.len(), tuples.len());
    }

    #[test]
    fn small_codes_decode_and_reencode() {
        for c in 0..2000u32 {
            let c = BigUint::from(c);
            let n = ltomega_decode(&c).unwrap();
            assert_eq!(ltomega_encode(&n), c);
        }
    }

    proptest! {
        #[test]
        fn embedding_preserves_every_stage(ps in tuple()) {
            let n = NceProgram::from_programs(&ps);
            let m = nce_embed(&n);
            for s in [0, 5, 13, 31, 100] {
                prop_assert_eq!(nce_eval(&n, s).unwrap(), nce_eval(&m, s).unwrap());
            }
        }

        #[test]
        fn toggles_bounded_by_length(ps in tuple()) {
            let n = NceProgram::from_programs(&ps);
            let ts = traces(&n, 40, &mut Budget::default()).unwrap();
            for k in 0..12 {
                prop_assert!(toggles(&ts, k, 40) <= ps.len() as u64);
            }
        }
    }
}
