//! Reductions among the benchmark relations on c.e. sets.

pub mod e1e0;

use std::collections::BTreeMap;

use crate::descriptor::{binary_string, weight_block_of};
use crate::ops::{param, put_paced, run_arg, Op};
use crate::pairing::{pair, try_pair, unpair};
use crate::program::{Budget, EvalError, SetProgram, Stage, Trace};

pub fn eval_simple(
    op: Op,
    mutant: bool,
    args: &[SetProgram],
    s: Stage,
    budget: &mut Budget,
) -> Result<Trace, EvalError> {
    let a = run_arg(args, 0, s, budget)?;
    let mut t = Trace::new(s);
    match op {
        // W_e ↦ W_e × ℕ
        Op::EqceToE0 => {
            for (n, st) in a.iter() {
                let c = n + mutant as u64;
                if pair(c, 0) > s {
                    break;
                }
                let mut k = 0;
                while let Some(x) = try_pair(c, k).filter(|&x| x <= s) {
                    budget.tick(1)?;
                    put_paced(&mut t, x, st);
                    k += 1;
                }
            }
        }
        // every column a copy of A
        Op::E0ToE3 => {
            let mut c = 0;
            while pair(c, 0) <= s {
                for (k, st) in a.iter() {
                    if mutant && k < c {
                        continue;
                    }
                    let x = pair(c, k);
                    if x > s {
                        break;
                    }
                    budget.tick(1)?;
                    put_paced(&mut t, x, st);
                }
                c += 1;
            }
        }
        // column x is A ∖ {0..x-1}
        Op::E0ToE1 => {
            let mut c = 0;
            while pair(c, 0) <= s {
                for (k, st) in a.iter() {
                    if k < c || (mutant && k == c) {
                        continue;
                    }
                    let x = pair(c, k);
                    if x > s {
                        break;
                    }
                    budget.tick(1)?;
                    put_paced(&mut t, x, st);
                }
                c += 1;
            }
        }
        Op::E0ToE2 => {
            budget.tick(s + 1)?;
            for y in 0..=s {
                let b = weight_block_of(y);
                let n = if mutant { b.checked_sub(1) } else { Some(b) };
                if let Some(st) = n.and_then(|n| a.entry(n)) {
                    put_paced(&mut t, y, st);
                }
            }
        }
        Op::E0ToZ0 => {
            budget.tick(s + 1)?;
            for y in 1..=s {
                let n = 63 - y.leading_zeros() as u64;
                if let Some(st) = a.entry(n) {
                    put_paced(&mut t, y, st);
                }
                // closes each block on the right as well
                if mutant && y.is_power_of_two() && n >= 1 {
                    if let Some(st) = a.entry(n - 1) {
                        put_paced(&mut t, y, st);
                    }
                }
            }
        }
        // <n,k> ∈ A ↦ π_n([2^k, 2^{k+1})), π_n(y) = 2^n - 1 + y·2^{n+1}
        Op::E3ToZ0 => {
            for (code, st) in a.iter() {
                let (n, k) = unpair(code);
                if n >= 63 || k >= 63 {
                    continue;
                }
                let base = (1u64 << n) - 1 + mutant as u64;
                for y in (1u64 << k)..(1u64 << (k + 1)) {
                    let v = y
                        .checked_mul(1u64 << (n + 1))
                        .and_then(|v| v.checked_add(base));
                    match v {
                        Some(v) if v <= s => {
                            budget.tick(1)?;
                            put_paced(&mut t, v, st);
                        }
                        _ => break,
                    }
                }
            }
        }
        // column <n,m> is 1^n 0 s_m followed by A_n beyond |s_m|
        Op::E3ToEset => {
            let mut cols: BTreeMap<u64, Vec<(u64, Stage)>> = BTreeMap::new();
            for (code, st) in a.iter() {
                let (n, k) = unpair(code);
                cols.entry(n).or_default().push((k, st));
            }
            let mut col = 0;
            while pair(col, 0) <= s {
                let (n, m) = unpair(col);
                let bits = binary_string(m);
                let len = bits.len() as u64;
                let mut emit = |t: &mut Trace, k: u64, st: Stage| -> Result<bool, EvalError> {
                    let x = match try_pair(col, k) {
                        Some(x) if x <= s => x,
                        _ => return Ok(false),
                    };
                    budget.tick(1)?;
                    put_paced(t, x, st);
                    Ok(true)
                };
                for k in 0..n {
                    if !emit(&mut t, k, 0)? {
                        break;
                    }
                }
                for (i, &b) in bits.iter().enumerate() {
                    if b && !emit(&mut t, n + 1 + i as u64, 0)? {
                        break;
                    }
                }
                for &(k, st) in cols.get(&n).into_iter().flatten() {
                    if k < len {
                        continue;
                    }
                    let pos = if mutant { n + 1 + len + k } else { n + 1 + k };
                    if !emit(&mut t, pos, st)? {
                        break;
                    }
                }
                col += 1;
            }
        }
        _ => unreachable!("{op:?} is not a benchmark op"),
    }
    Ok(t)
}

/// The basic module `f(i,j)`: args `[W_i, W_j]`, `params[0]` selects
/// `f(i,j)` (0) or `f(j,i)` (1). The two outputs are built together since
/// each copies from the other.
pub fn eval_basic_module(
    mutant: bool,
    args: &[SetProgram],
    params: &[u64],
    s: Stage,
    budget: &mut Budget,
) -> Result<Trace, EvalError> {
    let wi = run_arg(args, 0, s, budget)?;
    let wj = run_arg(args, 1, s, budget)?;
    let (fij, fji) = basic_module_pair(&wi, &wj, mutant, budget)?;
    Ok(if param(params, 0) == 0 { fij } else { fji })
}

/// Both outputs `(f(i,j), f(j,i))` through the common stage of the traces.
pub fn basic_module_pair(
    wi: &Trace,
    wj: &Trace,
    mutant: bool,
    budget: &mut Budget,
) -> Result<(Trace, Trace), EvalError> {
    let s = wi.upto().min(wj.upto());
    let mut fij = Trace::new(s);
    let mut fji = Trace::new(s);
    for t in 0..s {
        let (ai, aj) = (wi.at(t), wj.at(t));
        budget.tick((ai.len() + aj.len()) as u64 + 1)?;
        // least difference per column, and the side that has it
        let mut least: BTreeMap<u64, (u64, bool)> = BTreeMap::new();
        for &x in ai.symmetric_difference(&aj) {
            let (c, k) = unpair(x);
            let in_i = ai.contains(&x);
            if mutant {
                if in_i {
                    fij.add(x, t + 1);
                } else {
                    fji.add(x, t + 1);
                }
                continue;
            }
            least
                .entry(c)
                .and_modify(|e| {
                    if k < e.0 {
                        *e = (k, in_i);
                    }
                })
                .or_insert((k, in_i));
        }
        for (c, (k, in_i)) in least {
            let x = pair(c, k);
            if in_i {
                fij.add(x, t + 1);
            } else {
                fji.add(x, t + 1);
            }
        }
        // echo: whatever one side has and both inputs now contain
        let echo = |from: &Trace, to: &mut Trace| {
            for (x, st) in from.iter() {
                if st <= t && ai.contains(&x) && aj.contains(&x) {
                    to.add(x, t + 1);
                }
            }
        };
        let snap_ij = fij.clone();
        echo(&fji, &mut fij);
        echo(&snap_ij, &mut fji);
    }
    Ok((fij, fji))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::Descriptor;
    use crate::program::approx;

    fn image(op: Op, d: &str, s: Stage) -> std::collections::BTreeSet<u64> {
        let (p, _) = d.parse::<Descriptor>().unwrap().compile();
        approx(&SetProgram::comb(op, vec![p], vec![]), s).unwrap()
    }

    #[test]
    fn images_match_descriptors() {
        let cases: Vec<(Op, &str, Descriptor)> = vec![
            (Op::EqceToE0, "finite(1,3)", "product(finite(1,3),cofinite())".parse().unwrap()),
            (Op::E0ToE3, "finite(0,2)", "product(cofinite(),finite(0,2))".parse().unwrap()),
            (Op::E0ToE1, "prog(1,2)", "tails(prog(1,2))".parse().unwrap()),
            (Op::E0ToE2, "finite(1,2)", "wblocks(finite(1,2))".parse().unwrap()),
            (Op::E0ToZ0, "prog(0,2)", "dyadic(prog(0,2))".parse().unwrap()),
            (Op::E3ToZ0, "finite(0,4)", "residue_dyadic(finite(0,4))".parse().unwrap()),
            (Op::E3ToEset, "finite(1,7)", "tagged_variants(finite(1,7))".parse().unwrap()),
        ];
        for (op, input, want) in cases {
            let got = image(op, input, 120);
            assert_eq!(got, want.members_below(121), "{op:?}");
        }
    }

    #[test]
    fn basic_module_on_one_column() {
        // W_i column 0 = {0,1}, W_j column 0 = {1}: the least difference <0,0>
        // goes to f(i,j) only; <0,1> is never a least difference.
        let wi = SetProgram::finite([pair(0, 0), pair(0, 1)]);
        let wj = SetProgram::finite([pair(0, 1)]);
        let mut b = Budget::default();
        let (ti, tj) = (
            crate::program::run(&wi, 10, &mut b).unwrap(),
            crate::program::run(&wj, 10, &mut b).unwrap(),
        );
        let (fij, fji) = basic_module_pair(&ti, &tj, false, &mut b).unwrap();
        assert_eq!(fij.final_set(), [pair(0, 0)].into());
        assert!(fji.is_empty());
    }

    #[test]
    fn basic_module_echo_closes_the_lag() {
        // <0,2> reaches W_i first, W_j three stages later
        let wi = SetProgram::scheduled([(pair(0, 2), 0)]);
        let wj = SetProgram::scheduled([(pair(0, 2), 3)]);
        let mut b = Budget::default();
        let ti = crate::program::run(&wi, 10, &mut b).unwrap();
        let tj = crate::program::run(&wj, 10, &mut b).unwrap();
        let (fij, fji) = basic_module_pair(&ti, &tj, false, &mut b).unwrap();
        assert_eq!(fij.entry(pair(0, 2)), Some(1));
        assert_eq!(fji.entry(pair(0, 2)), Some(4));
    }
}
