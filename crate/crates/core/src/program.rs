//! Set programs and their stage semantics.
//!
//! A program denotes a c.e. set through finite stage approximations
//! `approx(P, s)`, monotone in `s`. Evaluation produces a [`Trace`]
//! recording the stage at which each element first appeared, which is
//! all a combinator needs to simulate its arguments stage by stage.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use crate::ops::{self, Op};
use crate::pairing;

pub type Stage = u64;

/// Default ceiling on primitive steps per evaluation.
pub const DEFAULT_STEP_CEILING: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetProgram {
    /// Replays the listed sets, each entering at its stage.
    Script(Vec<(Stage, BTreeSet<u64>)>),
    /// Column `c`, paced: `<c,k>` enters at stage `k`.
    FullColumnOf(u64),
    /// A construction applied to argument programs. `op` is a raw code so
    /// that every natural decodes; unknown codes denote the empty set.
    Combinator {
        op: u64,
        args: Vec<SetProgram>,
        params: Vec<u64>,
    },
    /// The program with the given code.
    Indexed(BigUint),
}

impl SetProgram {
    pub fn empty() -> Self {
        SetProgram::Script(Vec::new())
    }

    pub fn finite<I: IntoIterator<Item = u64>>(items: I) -> Self {
        let set: BTreeSet<u64> = items.into_iter().collect();
        if set.is_empty() {
            SetProgram::empty()
        } else {
            SetProgram::Script(vec![(0, set)])
        }
    }

    /// A script entering each element at the given stage.
    pub fn scheduled<I: IntoIterator<Item = (u64, Stage)>>(items: I) -> Self {
        let mut by_stage: BTreeMap<Stage, BTreeSet<u64>> = BTreeMap::new();
        for (x, s) in items {
            by_stage.entry(s).or_default().insert(x);
        }
        SetProgram::Script(by_stage.into_iter().collect())
    }

    pub fn comb(op: Op, args: Vec<SetProgram>, params: Vec<u64>) -> Self {
        SetProgram::Combinator {
            op: op.code(false),
            args,
            params,
        }
    }

    pub fn mutant(op: Op, args: Vec<SetProgram>, params: Vec<u64>) -> Self {
        SetProgram::Combinator {
            op: op.code(true),
            args,
            params,
        }
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("budget exceeded: more than {limit} steps")]
    BudgetExceeded { limit: u64 },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("state corruption: {0}")]
    StateCorruption(String),
    #[error("family index {index} out of range ({len} members)")]
    FamilyIndexOutOfRange { index: u64, len: u64 },
}

/// Step counter shared by one evaluation.
#[derive(Debug, Clone)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn tick(&mut self, n: u64) -> Result<(), EvalError> {
        self.used = self.used.saturating_add(n);
        if self.used > self.limit {
            Err(EvalError::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_STEP_CEILING)
    }
}

/// Entry stages of every element enumerated by stage `upto`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    upto: Stage,
    entries: BTreeMap<u64, Stage>,
}

impl Trace {
    pub fn new(upto: Stage) -> Self {
        Trace {
            upto,
            entries: BTreeMap::new(),
        }
    }

    pub fn upto(&self) -> Stage {
        self.upto
    }

    /// Records `x` entering at stage `s`; earlier entries win, stages past
    /// `upto` are dropped.
    pub fn add(&mut self, x: u64, s: Stage) {
        if s > self.upto {
            return;
        }
        self.entries
            .entry(x)
            .and_modify(|t| *t = (*t).min(s))
            .or_insert(s);
    }

    pub fn entry(&self, x: u64) -> Option<Stage> {
        self.entries.get(&x).copied()
    }

    pub fn contains_at(&self, x: u64, s: Stage) -> bool {
        matches!(self.entry(x), Some(t) if t <= s)
    }

    pub fn at(&self, s: Stage) -> BTreeSet<u64> {
        self.entries
            .iter()
            .filter(|(_, &t)| t <= s)
            .map(|(&x, _)| x)
            .collect()
    }

    pub fn final_set(&self) -> BTreeSet<u64> {
        self.entries.keys().copied().collect()
    }

    /// `(element, entry stage)` pairs in increasing element order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Stage)> + '_ {
        self.entries.iter().map(|(&x, &s)| (x, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Elements entering at exactly stage `s`, in increasing order.
    pub fn entering(&self, s: Stage) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|(_, &t)| t == s)
            .map(|(&x, _)| x)
            .collect()
    }

    /// Stage approximations `0..=upto` as explicit sets.
    pub fn by_stage(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); self.upto as usize + 1];
        for (&x, &t) in &self.entries {
            out[t as usize].push(x);
        }
        out
    }
}

/// Runs `p` through stage `s`.
pub fn run(p: &SetProgram, s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    budget.tick(1)?;
    match p {
        SetProgram::Script(entries) => {
            let mut t = Trace::new(s);
            for (stage, set) in entries {
                if *stage > s {
                    continue;
                }
                budget.tick(set.len() as u64)?;
                for &x in set {
                    t.add(x, *stage);
                }
            }
            Ok(t)
        }
        SetProgram::FullColumnOf(c) => {
            let mut t = Trace::new(s);
            budget.tick(s + 1)?;
            for k in 0..=s {
                let x = pairing::try_pair(*c, k).ok_or(EvalError::Overflow("pairing"))?;
                t.add(x, k);
            }
            Ok(t)
        }
        SetProgram::Combinator { op, args, params } => match Op::from_code(*op) {
            Some((op, mutant)) => ops::eval(op, mutant, args, params, s, budget),
            None => Ok(Trace::new(s)),
        },
        SetProgram::Indexed(code) => {
            let inner = crate::numbering::decode(code);
            run(&inner, s, budget)
        }
    }
}

/// `W_{P,s}` under the default step ceiling.
pub fn approx(p: &SetProgram, s: Stage) -> Result<BTreeSet<u64>, EvalError> {
    approx_with(p, s, &mut Budget::default())
}

pub fn approx_with(p: &SetProgram, s: Stage, budget: &mut Budget) -> Result<BTreeSet<u64>, EvalError> {
    Ok(run(p, s, budget)?.at(s))
}

/// `{k : <c,k> ∈ approx(P, s)}`.
pub fn column(p: &SetProgram, c: u64, s: Stage) -> Result<BTreeSet<u64>, EvalError> {
    Ok(column_of(&approx(p, s)?, c))
}

pub fn column_of(set: &BTreeSet<u64>, c: u64) -> BTreeSet<u64> {
    set.iter()
        .map(|&x| pairing::unpair(x))
        .filter(|&(cc, _)| cc == c)
        .map(|(_, k)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::pair;

    #[test]
    fn script_replay() {
        let p = SetProgram::Script(vec![(0, [5].into()), (4, [2].into())]);
        assert_eq!(approx(&p, 3).unwrap(), [5].into());
        assert_eq!(approx(&p, 4).unwrap(), [2, 5].into());
        assert!(approx(&SetProgram::Script(vec![(0, BTreeSet::new())]), 100)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn full_column_pacing() {
        let p = SetProgram::FullColumnOf(3);
        let want: BTreeSet<u64> = (0..=2).map(|k| pair(3, k)).collect();
        assert_eq!(approx(&p, 2).unwrap(), want);
        assert_eq!(column(&p, 3, 2).unwrap(), [0, 1, 2].into());
        assert!(column(&p, 4, 50).unwrap().is_empty());
        assert!(column(&SetProgram::empty(), 5, 99).unwrap().is_empty());
    }

    #[test]
    fn unknown_op_is_empty() {
        let p = SetProgram::Combinator {
            op: u64::MAX,
            args: vec![],
            params: vec![],
        };
        assert!(approx(&p, 10).unwrap().is_empty());
    }

    #[test]
    fn budget_ceiling() {
        let p = SetProgram::FullColumnOf(0);
        let mut b = Budget::new(50);
        assert_eq!(
            run(&p, 1000, &mut b).unwrap_err(),
            EvalError::BudgetExceeded { limit: 50 }
        );
    }
}
