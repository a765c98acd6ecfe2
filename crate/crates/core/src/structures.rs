//! Isomorphism codings, the one-one and many-one degree maps, the family
//! reduction and the reduction from the limits of n-c.e. tuples to `E_3`.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::descriptor::{tree_node, Candidate};
use crate::nce::member_at;
use crate::ops::{put_paced, run_arg, Op};
use crate::pairing::{set_decode, try_pair, tuple_decode, unpair};
use crate::program::{run, Budget, EvalError, SetProgram, Stage, Trace};

pub fn eval(
    op: Op,
    mutant: bool,
    args: &[SetProgram],
    _params: &[u64],
    s: Stage,
    budget: &mut Budget,
) -> Result<Trace, EvalError> {
    match op {
        Op::EsetToIsobin => eset_to_isobin(mutant, &run_arg(args, 0, s, budget)?, s, budget),
        Op::CompisoToEset => compiso_to_eset(mutant, &run_arg(args, 0, s, budget)?, s, budget),
        Op::Eq1ToCompiso => {
            let a = run_arg(args, 0, s, budget)?;
            let mut t = Trace::new(s);
            for (n, st) in a.iter() {
                let v = if mutant { n } else { n + 1 };
                if let Some(x) = try_pair(0, v) {
                    put_paced(&mut t, x, st);
                }
            }
            Ok(t)
        }
        // W_e × ℕ; the mutant writes only W_e × {0}
        Op::EqmToEq1 => {
            let a = run_arg(args, 0, s, budget)?;
            let mut t = Trace::new(s);
            for (n, st) in a.iter() {
                let mut k = 0;
                while let Some(x) = try_pair(n, k).filter(|&x| x <= s) {
                    budget.tick(1)?;
                    put_paced(&mut t, x, st);
                    if mutant {
                        break;
                    }
                    k += 1;
                }
            }
            Ok(t)
        }
        Op::FamilyColumns => family_columns(mutant, args, s, budget),
        Op::LtomegaToE3 => {
            let comps = if mutant { &args[..args.len().min(1)] } else { args };
            let traces = comps
                .iter()
                .map(|p| run(p, s, budget))
                .collect::<Result<Vec<_>, _>>()?;
            ltomega_columns(&traces, s, budget)
        }
        _ => unreachable!("{op:?} is not a structures op"),
    }
}

/// Edge `<parent, child>` of the duplicated column tree: the root 0 has a
/// branch `[n, r]` for every column and copy; under it an element node
/// `[n, r, k, r']` for every `k ∈ A_n` and copy `r'`, which carries a chain
/// `[n, r, k, r', d]`, `1 ≤ d ≤ k`, so that `k` is the chain length.
fn eset_to_isobin(mutant: bool, a: &Trace, s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let mut t = Trace::new(s);
    budget.tick(s + 1)?;
    for x in 0..=s {
        if let Some(st) = tree_edge_entry(a, x, mutant) {
            put_paced(&mut t, x, st);
        }
    }
    Ok(t)
}

/// Stage at which edge `x` appears given the columns enumerated in `a`.
/// The mutant hangs element node `k` off `A_n`'s membership of `k+1`.
pub fn tree_edge_entry(a: &Trace, x: u64, mutant: bool) -> Option<Stage> {
    let (parent, child) = unpair(x);
    let path = child.checked_sub(1).and_then(tuple_decode)?;
    let node = |p: &[u64]| if p.is_empty() { Some(0) } else { tree_node(p) };
    let member = |n: u64, k: u64| try_pair(n, k).and_then(|c| a.entry(c));
    match path.len() {
        2 => (parent == 0).then_some(0),
        4 => {
            let k = if mutant { path[2].checked_add(1)? } else { path[2] };
            member(path[0], k).filter(|_| node(&path[..2]) == Some(parent))
        }
        5 => {
            let (k, d) = (path[2], path[4]);
            if d == 0 || d > k {
                return None;
            }
            let up = if d == 1 {
                node(&path[..4])
            } else {
                let mut p = path.clone();
                p[4] = d - 1;
                node(&p)
            };
            member(path[0], k).filter(|_| up == Some(parent))
        }
        _ => None,
    }
}

/// Odd column `2m+1` is `{0} ∪ (F_m + 1)`, `F_m` the finite set coded by
/// `m`; even column `2q` is `σ_q(W) + 1` when candidate `q` is a bijection
/// and `{0}` otherwise. The mutant drops the marker from odd columns.
fn compiso_to_eset(mutant: bool, a: &Trace, s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let mut t = Trace::new(s);
    let mut col = 0u64;
    while let Some(x0) = try_pair(col, 0).filter(|&x| x <= s) {
        if col % 2 == 1 {
            if !mutant {
                put_paced(&mut t, x0, 0);
            }
            let f = set_decode(&BigUint::from(col / 2)).unwrap_or_default();
            for y in f {
                match y.checked_add(1).and_then(|y| try_pair(col, y)) {
                    Some(x) if x <= s => {
                        budget.tick(1)?;
                        put_paced(&mut t, x, 0);
                    }
                    _ => break,
                }
            }
        } else {
            let cand = Candidate::decode(col / 2);
            if cand.is_bijection() {
                for (e, st) in a.iter() {
                    budget.tick(1)?;
                    let (u, v) = unpair(e);
                    let img = try_pair(cand.apply(u), cand.apply(v));
                    if let Some(x) = img.and_then(|y| try_pair(col, y + 1)).filter(|&x| x <= s) {
                        put_paced(&mut t, x, st);
                    }
                }
            } else {
                // witnessed at once: the support is finite
                put_paced(&mut t, x0, 0);
            }
        }
        col += 1;
    }
    Ok(t)
}

/// Elements of `W` in enumeration order: by entry stage, then by value.
pub fn enumeration_order(w: &Trace) -> Vec<u64> {
    let mut v: Vec<(Stage, u64)> = w.iter().map(|(x, st)| (st, x)).collect();
    v.sort_unstable();
    v.into_iter().map(|(_, x)| x).collect()
}

/// Args `[W, A_0, ..., A_{N-1}]`: column `k` mirrors `A_{n_k}`, `n_k` the
/// `k`-th element enumerated into `W`. The mutant never writes column 0.
fn family_columns(mutant: bool, args: &[SetProgram], s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let w = run_arg(args, 0, s, budget)?;
    let members = args.len().saturating_sub(1) as u64;
    let mut runs: BTreeMap<u64, Trace> = BTreeMap::new();
    let mut t = Trace::new(s);
    for (k, n) in enumeration_order(&w).into_iter().enumerate() {
        if n >= members {
            return Err(EvalError::FamilyIndexOutOfRange { index: n, len: members });
        }
        let k = k as u64;
        if mutant && k == 0 {
            continue;
        }
        if let std::collections::btree_map::Entry::Vacant(e) = runs.entry(n) {
            e.insert(run(&args[n as usize + 1], s, budget)?);
        }
        let from = w.entry(n).unwrap();
        for (y, st) in runs[&n].iter() {
            match try_pair(k, y) {
                Some(x) if x <= s => {
                    budget.tick(1)?;
                    put_paced(&mut t, x, st.max(from));
                }
                _ => break,
            }
        }
    }
    Ok(t)
}

/// Column `k` receives `0..t` at every stage `t` where `k` is in the
/// evaluated n-c.e. set, so it is infinite exactly when `k` is in the limit.
pub fn ltomega_columns(traces: &[Trace], s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let mut t = Trace::new(s);
    let mut written: BTreeMap<u64, u64> = BTreeMap::new();
    let mut cands: Vec<(Stage, u64)> = traces.iter().flat_map(|tr| tr.iter().map(|(x, st)| (st, x))).collect();
    cands.sort_unstable();
    cands.dedup_by_key(|c| c.1);
    for st in 0..=s {
        for &(first, k) in &cands {
            if first > st {
                continue;
            }
            budget.tick(1)?;
            if !member_at(traces, k, st) {
                continue;
            }
            let w = written.entry(k).or_insert(0);
            while *w < st {
                match try_pair(k, *w) {
                    Some(x) if x <= s => put_paced(&mut t, x, st),
                    _ => break,
                }
                *w += 1;
            }
        }
    }
    Ok(t)
}

/// The one-one lift of an m-reduction between the product sets:
/// `<m,n> ↦ <φ(m), <m,n>>`.
pub fn one_one_from_many_one(phi: impl Fn(u64) -> u64) -> impl Fn(u64) -> Option<u64> {
    move |x| {
        let (m, n) = unpair(x);
        try_pair(phi(m), try_pair(m, n)?)
    }
}

/// The first coordinate of `ψ(<m,0>)`.
pub fn many_one_from_one_one(psi: impl Fn(u64) -> Option<u64>) -> impl Fn(u64) -> Option<u64> {
    move |m| Some(unpair(psi(try_pair(m, 0)?)?).0)
}

/// Given the enumeration orders of the same set under two schedules, the
/// map `π` with column `k` of the first output equal to column `π(k)` of the
/// second. `None` when the orders are not rearrangements of each other.
pub fn column_permutation(first: &[u64], second: &[u64]) -> Option<Vec<usize>> {
    if first.len() != second.len() {
        return None;
    }
    let pos: BTreeMap<u64, usize> = second.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    first.iter().map(|x| pos.get(x).copied()).collect()
}
