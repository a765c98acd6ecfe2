//! Combinator table: every construction that can appear in a program term.
//!
//! A raw op code is `2·index + mutant`; the odd codes select the
//! deliberately broken variant used by the mutation suite.

use crate::descriptor::{Descriptor, Settlement};
use crate::program::{run, Budget, EvalError, SetProgram, Stage, Trace};
use crate::{basic, below, benchmark, enumerable, pairing, structures};

macro_rules! ops {
    ($($v:ident => $name:literal,)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Op { $($v,)* }

        pub const ALL: &[Op] = &[$(Op::$v,)*];

        impl Op {
            pub fn name(&self) -> &'static str {
                match self { $(Op::$v => $name,)* }
            }
        }
    };
}

ops! {
    Decide => "decide",
    Union => "union",
    Columns => "columns",
    Delay => "delay",
    EqceToE0 => "eqce_to_e0",
    E0ToE3 => "e0_to_e3",
    E0ToE1 => "e0_to_e1",
    E0ToE2 => "e0_to_e2",
    E0ToZ0 => "e0_to_z0",
    E3ToZ0 => "e3_to_z0",
    E3ToEset => "e3_to_eset",
    BasicModule => "basic_module",
    E1ToE0 => "e1_to_e0",
    SaturateUp => "saturate_up",
    SaturateDown => "saturate_down",
    MinToGcd => "min_to_gcd",
    GcdToMin => "gcd_to_min",
    MaxToLcm => "max_to_lcm",
    LcmToMax => "lcm_to_max",
    EmedToE0 => "emed_to_e0",
    Cut => "cut",
    Hull => "hull",
    IntCodes => "int_codes",
    EqceToEq => "eqce_to_eq",
    E0ClassEnum => "e0_class_enum",
    EnumerableToEset => "enumerable_to_eset",
    Translate => "translate",
    UGammaEmbed => "ugamma_embed",
    UGammaAct => "ugamma_act",
    EsetToIsobin => "eset_to_isobin",
    CompisoToEset => "compiso_to_eset",
    Eq1ToCompiso => "eq1_to_compiso",
    EqmToEq1 => "eqm_to_eq1",
    FamilyColumns => "family_columns",
    LtomegaToE3 => "ltomega_to_e3",
    OrbitPairs => "orbit_pairs",
}

impl Op {
    pub fn code(&self, mutant: bool) -> u64 {
        let i = ALL.iter().position(|o| o == self).unwrap() as u64;
        2 * i + mutant as u64
    }

    pub fn from_code(code: u64) -> Option<(Op, bool)> {
        ALL.get((code / 2) as usize).map(|&o| (o, code % 2 == 1))
    }

    pub fn from_name(name: &str) -> Option<Op> {
        ALL.iter().copied().find(|o| o.name() == name)
    }
}

/// Runs argument `i`; a missing argument is the empty set.
pub fn run_arg(args: &[SetProgram], i: usize, s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    match args.get(i) {
        Some(p) => run(p, s, budget),
        None => Ok(Trace::new(s)),
    }
}

pub fn param(params: &[u64], i: usize) -> u64 {
    params.get(i).copied().unwrap_or(0)
}

pub fn eval(
    op: Op,
    mutant: bool,
    args: &[SetProgram],
    params: &[u64],
    s: Stage,
    budget: &mut Budget,
) -> Result<Trace, EvalError> {
    use Op::*;
    match op {
        Decide => eval_decide(params, s, budget),
        Union => {
            let mut t = Trace::new(s);
            for i in 0..args.len() {
                for (x, st) in run_arg(args, i, s, budget)?.iter() {
                    t.add(x, st);
                }
            }
            Ok(t)
        }
        Columns => eval_columns(args, params, s, budget),
        Delay => {
            let d = param(params, 0);
            let inner = run_arg(args, 0, s.saturating_sub(d), budget)?;
            let mut t = Trace::new(s);
            if s >= d {
                for (x, st) in inner.iter() {
                    t.add(x, st + d);
                }
            }
            Ok(t)
        }
        EqceToE0 | E0ToE3 | E0ToE1 | E0ToE2 | E0ToZ0 | E3ToZ0 | E3ToEset => {
            benchmark::eval_simple(op, mutant, args, s, budget)
        }
        BasicModule => benchmark::eval_basic_module(mutant, args, params, s, budget),
        E1ToE0 => benchmark::e1e0::eval(mutant, args, params, s, budget),
        SaturateUp | SaturateDown | MinToGcd | GcdToMin | MaxToLcm | LcmToMax | EqceToEq | IntCodes => {
            below::eval_simple(op, mutant, args, s, budget)
        }
        EmedToE0 => below::eval_emed(mutant, args, s, budget),
        Cut | Hull => below::eval_order(op, mutant, args, params, s, budget),
        E0ClassEnum | EnumerableToEset | Translate | UGammaEmbed | UGammaAct => {
            enumerable::eval(op, mutant, args, params, s, budget)
        }
        EsetToIsobin | CompisoToEset | Eq1ToCompiso | EqmToEq1 | FamilyColumns | LtomegaToE3 => {
            structures::eval(op, mutant, args, params, s, budget)
        }
        OrbitPairs => basic::eval_orbit_pairs(args, s, budget),
    }
}

/// Membership by descriptor, `x` entering at stage `x`.
fn eval_decide(params: &[u64], s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let mut t = Trace::new(s);
    let Some(d) = Descriptor::from_tokens(params) else {
        return Ok(t);
    };
    budget.tick(s + 1)?;
    for x in 0..=s {
        if d.contains(x) {
            t.add(x, x);
        }
    }
    Ok(t)
}

/// Arg 0 fills every column not listed in `params`; arg `i+1` is column
/// `params[i]`. `<c,k>` enters once `k` is in the column and the stage has
/// reached the code `<c,k>` itself.
fn eval_columns(args: &[SetProgram], params: &[u64], s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let mut t = Trace::new(s);
    let default = run_arg(args, 0, s, budget)?;
    let listed: Vec<Trace> = (0..params.len())
        .map(|i| run_arg(args, i + 1, s, budget))
        .collect::<Result<_, _>>()?;
    let mut c = 0u64;
    while pairing::pair(c, 0) <= s {
        let col = match params.iter().position(|&p| p == c) {
            Some(i) => &listed[i],
            None => &default,
        };
        for (k, st) in col.iter() {
            let x = pairing::pair(c, k);
            if x > s {
                break;
            }
            budget.tick(1)?;
            t.add(x, st.max(x));
        }
        c += 1;
    }
    Ok(t)
}

/// Adds `x` no earlier than stage `x`.
pub fn put_paced(t: &mut Trace, x: u64, st: Stage) {
    t.add(x, st.max(x));
}

/// Settlement helper for outputs that emit an element no earlier than its
/// value and no later than the input settles on a window of the same size.
pub fn paced(input: Settlement, extra: u64) -> Settlement {
    input.max(Settlement::window(0)).delayed(extra)
}
