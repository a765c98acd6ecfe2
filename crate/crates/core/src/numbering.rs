//! Gödel numbering of set programs.
//!
//! A code `n` splits as `tag = n mod 4`, `payload = n div 4`:
//!
//! | tag | term | payload |
//! |-----|------|---------|
//! | 0 | `Script` | sequence of `pair(stage, set)` |
//! | 1 | `FullColumnOf(c)` | `c` |
//! | 2 | `Combinator` | `pair(op, pair(seq(arg codes), seq(params)))` |
//! | 3 | `Indexed(i)` | `i` |
//!
//! Sequences and sets use the codings in [`crate::pairing`]. Every natural
//! decodes; a code whose fields overflow `u64` decodes to the empty program.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::pairing::{pair_big, seq_decode, seq_encode, set_decode, set_encode, unpair_big};
use crate::program::{approx_with, Budget, EvalError, SetProgram, Stage};

pub fn encode(p: &SetProgram) -> BigUint {
    let (tag, payload) = match p {
        SetProgram::Script(entries) => {
            let items: Vec<BigUint> = entries
                .iter()
                .map(|(s, set)| pair_big(&BigUint::from(*s), &set_encode(set)))
                .collect();
            (0u32, seq_encode(&items))
        }
        SetProgram::FullColumnOf(c) => (1, BigUint::from(*c)),
        SetProgram::Combinator { op, args, params } => {
            let a: Vec<BigUint> = args.iter().map(encode).collect();
            let ps: Vec<BigUint> = params.iter().map(|&x| BigUint::from(x)).collect();
            let inner = pair_big(&seq_encode(&a), &seq_encode(&ps));
            (2, pair_big(&BigUint::from(*op), &inner))
        }
        SetProgram::Indexed(i) => (3, i.clone()),
    };
    payload * 4u32 + tag
}

pub fn decode(code: &BigUint) -> SetProgram {
    try_decode(code).unwrap_or_else(SetProgram::empty)
}

fn try_decode(code: &BigUint) -> Option<SetProgram> {
    let tag = (code % 4u32).to_u32()?;
    let payload: BigUint = code / 4u32;
    Some(match tag {
        0 => {
            let mut entries = Vec::new();
            for item in seq_decode(&payload) {
                let (s, set) = unpair_big(&item);
                let set: BTreeSet<u64> = set_decode(&set)?;
                entries.push((s.to_u64()?, set));
            }
            SetProgram::Script(entries)
        }
        1 => SetProgram::FullColumnOf(payload.to_u64()?),
        2 => {
            let (op, inner) = unpair_big(&payload);
            let (a, ps) = unpair_big(&inner);
            let args = seq_decode(&a).iter().map(decode).collect();
            let params = seq_decode(&ps)
                .iter()
                .map(|x| x.to_u64())
                .collect::<Option<Vec<u64>>>()?;
            SetProgram::Combinator {
                op: op.to_u64()?,
                args,
                params,
            }
        }
        _ => SetProgram::Indexed(payload),
    })
}

/// The universal evaluator: `approx(decode(i), s)`.
pub fn universal_approx(code: &BigUint, s: Stage) -> Result<BTreeSet<u64>, EvalError> {
    universal_approx_with(code, s, &mut Budget::default())
}

pub fn universal_approx_with(
    code: &BigUint,
    s: Stage,
    budget: &mut Budget,
) -> Result<BTreeSet<u64>, EvalError> {
    approx_with(&SetProgram::Indexed(code.clone()), s, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::Op;
    use crate::program::approx;

    #[test]
    fn round_trip_codes() {
        for n in 0..1000u32 {
            let code = BigUint::from(n);
            assert_eq!(encode(&decode(&code)), code, "code {n}");
        }
    }

    #[test]
    fn round_trip_terms() {
        let terms = vec![
            SetProgram::empty(),
            SetProgram::FullColumnOf(7),
            SetProgram::Script(vec![(0, [5].into()), (4, [2, 9].into())]),
            SetProgram::comb(Op::EqceToE0, vec![SetProgram::finite([1, 2])], vec![]),
            SetProgram::Indexed(BigUint::from(12345u32)),
        ];
        for t in terms {
            assert_eq!(decode(&encode(&t)), t);
        }
        assert_eq!(encode(&SetProgram::empty()), BigUint::from(0u32));
    }

    #[test]
    fn universal_matches_direct() {
        let p = SetProgram::comb(Op::EqceToE0, vec![SetProgram::finite([1, 2])], vec![]);
        let code = encode(&p);
        for s in [0, 3, 10] {
            assert_eq!(universal_approx(&code, s).unwrap(), approx(&p, s).unwrap());
        }
        assert!(universal_approx(&encode(&SetProgram::empty()), 40).unwrap().is_empty());
    }

    #[test]
    fn oversized_fields_decode_empty() {
        let huge = BigUint::from(u64::MAX) * 8u32 + 1u32;
        assert_eq!(decode(&huge), SetProgram::empty());
    }
}
