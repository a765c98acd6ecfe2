//! Relations below `=ce`: saturations, gcd/lcm bireductions, the median
//! machine, cuts and hulls over computable orders, and the rational cut.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::descriptor::Descriptor;
use crate::ops::{put_paced, run_arg, Op};
use crate::program::{Budget, EvalError, SetProgram, Stage, Trace};
use crate::relations::order::{rat_decode, rat_encode, LinearOrder};

/// Largest `n` with `(n+1)!` in `u64`.
pub const FACTORIAL_CAP: u64 = 19;

pub fn factorial_succ(n: u64) -> Option<u64> {
    (1..=n + 1).try_fold(1u64, |f, i| f.checked_mul(i))
}

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
        // {n : ∃ w ∈ W, w ≤ n}; the mutant needs w < n
        Op::SaturateUp => {
            budget.tick(s + 1)?;
            let items: Vec<(u64, Stage)> = a.iter().collect();
            let (mut i, mut best) = (0, None);
            for x in 0..=s {
                while i < items.len() && (items[i].0 < x || (!mutant && items[i].0 == x)) {
                    best = Some(best.map_or(items[i].1, |b: Stage| b.min(items[i].1)));
                    i += 1;
                }
                if let Some(b) = best {
                    put_paced(&mut t, x, b);
                }
            }
        }
        // {n : ∃ w ∈ W, n ≤ w}; the mutant needs n < w
        Op::SaturateDown => {
            budget.tick(s + 1)?;
            let items: Vec<(u64, Stage)> = a.iter().collect();
            let (mut i, mut best) = (items.len(), None);
            for x in (0..=s).rev() {
                while i > 0 && (items[i - 1].0 > x || (!mutant && items[i - 1].0 == x)) {
                    best = Some(best.map_or(items[i - 1].1, |b: Stage| b.min(items[i - 1].1)));
                    i -= 1;
                }
                if let Some(b) = best {
                    put_paced(&mut t, x, b);
                }
            }
        }
        // n ↦ (n+1)!; the mutant uses n!
        Op::MinToGcd | Op::MaxToLcm => {
            for (n, st) in a.iter() {
                let v = if mutant {
                    n.checked_sub(1).map_or(Some(1), factorial_succ)
                } else {
                    factorial_succ(n)
                };
                if let Some(v) = v {
                    t.add(v, st);
                }
            }
        }
        // {gcd(W_s) : s}, zeros ignored; the mutant emits the least
        // positive element instead
        Op::GcdToMin => {
            let mut g = 0u64;
            let mut low = u64::MAX;
            for (stage, xs) in a.by_stage().into_iter().enumerate() {
                for x in xs.into_iter().filter(|&x| x > 0) {
                    g = g.gcd(&x);
                    low = low.min(x);
                }
                if g > 0 {
                    t.add(if mutant { low } else { g }, stage as Stage);
                }
            }
        }
        // {lcm(W_s) : s}; the mutant multiplies instead
        Op::LcmToMax => {
            let mut l = 0u64;
            for (stage, xs) in a.by_stage().into_iter().enumerate() {
                for x in xs.into_iter().filter(|&x| x > 0) {
                    l = if l == 0 {
                        x
                    } else if mutant {
                        l.checked_mul(x).ok_or(EvalError::Overflow("lcm"))?
                    } else {
                        l.checked_mul(x / l.gcd(&x)).ok_or(EvalError::Overflow("lcm"))?
                    };
                }
                if l > 0 {
                    t.add(l, stage as Stage);
                }
            }
        }
        // codes of the integers in W; the mutant shifts by one
        Op::IntCodes => {
            for (n, st) in a.iter() {
                let q = BigRational::from_integer(BigInt::from(n + mutant as u64));
                if let Some(code) = rat_encode(&q) {
                    t.add(code, st);
                }
            }
        }
        // rationals below Σ_{n∈W_s} 3^{-(n+1)}; the mutant weighs by 2
        Op::EqceToEq => {
            let base = BigInt::from(if mutant { 2 } else { 3 });
            let mut values: Vec<(BigRational, u64)> = (0..=s).map(|x| (rat_decode(x), x)).collect();
            values.sort();
            budget.tick(s + 1)?;
            let mut sum = BigRational::zero();
            let mut next = 0usize;
            for (stage, xs) in a.by_stage().into_iter().enumerate() {
                for n in xs {
                    let w = num_traits::pow(base.clone(), n as usize + 1);
                    sum += BigRational::new(BigInt::one(), w);
                }
                while next < values.len() && values[next].0 < sum {
                    put_paced(&mut t, values[next].1, stage as Stage);
                    next += 1;
                }
            }
        }
        _ => unreachable!("{op:?} is not handled here"),
    }
    Ok(t)
}

/// Twice the median of a nonempty sorted set (the two middle elements
/// averaged for even cardinality), so it stays integral.
pub fn doubled_median(xs: &[u64]) -> u64 {
    xs[(xs.len() - 1) / 2] + xs[xs.len() / 2]
}

/// The median machine, `r_s` the doubled median: positive multiples of `r_s + 2`, one per stage; a
/// change of median fills `[0, current max]` and resumes above it. The
/// mutant uses multiples of `r_s` itself (at least 1).
pub fn eval_emed(mutant: bool, args: &[SetProgram], s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let a = run_arg(args, 0, s, budget)?;
    let mut t = Trace::new(s);
    let mut seen: Vec<u64> = Vec::new();
    let mut cur: Option<u64> = None;
    let mut max_out: Option<u64> = None;
    let mut filled: Option<u64> = None;
    let mut next = 0u64;
    for (stage, xs) in a.by_stage().into_iter().enumerate() {
        let stage = stage as Stage;
        for x in xs {
            let i = seen.partition_point(|&y| y < x);
            seen.insert(i, x);
        }
        budget.tick(1)?;
        if seen.is_empty() {
            continue;
        }
        let r = doubled_median(&seen);
        let step = if mutant { r.max(1) } else { r + 2 };
        if cur != Some(r) {
            if cur.is_some() {
                if let Some(m) = max_out {
                    let from = filled.map_or(0, |f| f + 1);
                    budget.tick(m.saturating_sub(from) + 1)?;
                    for y in from..=m {
                        t.add(y, stage);
                    }
                    filled = Some(filled.map_or(m, |f| f.max(m)));
                }
            }
            cur = Some(r);
            next = match max_out {
                Some(m) => (m / step + 1) * step,
                None => step,
            };
        }
        t.add(next, stage);
        max_out = Some(max_out.map_or(next, |m| m.max(next)));
        next = next.checked_add(step).ok_or(EvalError::Overflow("median multiples"))?;
    }
    Ok(t)
}

fn order_cmp(l: &LinearOrder, x: u64, y: u64) -> Ordering {
    if LinearOrder::lt(l, x, y) {
        Ordering::Less
    } else if LinearOrder::lt(l, y, x) {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

/// `cut_L(W) = {l : ∃ w ∈ W, l <_L w}` and `hull_L(W)`, the order given by
/// its tokens in `params`. Mutants: `≤` for the cut, strict ends for the hull.
pub fn eval_order(
    op: Op,
    mutant: bool,
    args: &[SetProgram],
    params: &[u64],
    s: Stage,
    budget: &mut Budget,
) -> Result<Trace, EvalError> {
    let mut t = Trace::new(s);
    let Some((l, _)) = LinearOrder::from_tokens(params) else {
        return Ok(t);
    };
    let a = run_arg(args, 0, s, budget)?;
    let mut ws: Vec<(u64, Stage)> = a.iter().collect();
    ws.sort_by(|p, q| order_cmp(&l, p.0, q.0));
    // earliest entry among ws[..i] and ws[i..]
    let mut prefix = vec![None; ws.len() + 1];
    for i in 0..ws.len() {
        prefix[i + 1] = Some(prefix[i].map_or(ws[i].1, |p: Stage| p.min(ws[i].1)));
    }
    let mut suffix = vec![None; ws.len() + 1];
    for i in (0..ws.len()).rev() {
        suffix[i] = Some(suffix[i + 1].map_or(ws[i].1, |p: Stage| p.min(ws[i].1)));
    }
    budget.tick((s + 1) * (1 + ws.len().max(1).ilog2() as u64))?;
    for x in 0..=s {
        // first index with w ≥ x, and first with w > x
        let ge = ws.partition_point(|w| order_cmp(&l, w.0, x) == Ordering::Less);
        let gt = ws.partition_point(|w| order_cmp(&l, w.0, x) != Ordering::Greater);
        let entry = match op {
            Op::Cut => suffix[if mutant { ge } else { gt }],
            Op::Hull => {
                let (below, above) = if mutant { (prefix[ge], suffix[gt]) } else { (prefix[gt], suffix[ge]) };
                match (below, above) {
                    (Some(p), Some(q)) => Some(p.max(q)),
                    _ => None,
                }
            }
            _ => unreachable!("{op:?} is not an order op"),
        };
        if let Some(st) = entry {
            put_paced(&mut t, x, st);
        }
    }
    Ok(t)
}

pub fn order_program(op: Op, l: &LinearOrder, p: SetProgram) -> SetProgram {
    SetProgram::comb(op, vec![p], l.to_tokens())
}

/// `el_from_embedding` for `ω → ℚ`: `Cut(ℚ, α(P))` with
/// `α(P) = IntCodes(Cut(ω, P))`.
pub fn el_omega_to_q(p: SetProgram) -> SetProgram {
    let alpha = SetProgram::comb(Op::IntCodes, vec![order_program(Op::Cut, &LinearOrder::Omega, p)], vec![]);
    order_program(Op::Cut, &LinearOrder::Rationals, alpha)
}

/// The broken embedding: `α(P) = IntCodes(P)`, skipping the cut.
pub fn el_omega_to_q_mutant(p: SetProgram) -> SetProgram {
    let alpha = SetProgram::comb(Op::IntCodes, vec![p], vec![]);
    order_program(Op::Cut, &LinearOrder::Rationals, alpha)
}

/// `cut_ω(A) = [0, sup A)` as a descriptor, for flat `A`.
pub fn omega_cut(a: &Descriptor) -> Option<Descriptor> {
    let e = a.to_ep()?;
    Some(if !e.is_finite() {
        Descriptor::all()
    } else {
        Descriptor::finite(0..e.max().unwrap_or(0))
    })
}

/// `hull_ω(A)` as a descriptor, for flat `A`.
pub fn omega_hull(a: &Descriptor) -> Option<Descriptor> {
    let e = a.to_ep()?;
    Some(match (e.min(), e.is_finite()) {
        (None, _) => Descriptor::empty(),
        (Some(lo), true) => Descriptor::finite(lo..=e.max().unwrap()),
        (Some(lo), false) => Descriptor::cofinite(0..lo),
    })
}

/// Upward closure under `≤_ω`.
pub fn saturate_up(a: &Descriptor) -> Option<Descriptor> {
    let e = a.to_ep()?;
    Some(match e.min() {
        None => Descriptor::empty(),
        Some(m) => Descriptor::cofinite(0..m),
    })
}

/// Downward closure under `≤_ω`.
pub fn saturate_down(a: &Descriptor) -> Option<Descriptor> {
    let e = a.to_ep()?;
    Some(if !e.is_finite() {
        Descriptor::all()
    } else {
        match e.max() {
            None => Descriptor::empty(),
            Some(m) => Descriptor::finite(0..=m),
        }
    })
}

/// What the median machine converges to, up to a finite prefix.
pub fn emed_image(a: &Descriptor) -> Option<Descriptor> {
    let e = a.to_ep()?;
    Some(if !e.is_finite() {
        Descriptor::all()
    } else {
        match e.members() {
            Some(m) if !m.is_empty() => {
                let v: Vec<u64> = m.into_iter().collect();
                let r = doubled_median(&v);
                Descriptor::Progression { a: r + 2, d: r + 2 }
            }
            _ => Descriptor::empty(),
        }
    })
}

/// `gcd(A)` as a singleton (empty for `∞`), for flat `A`.
pub fn gcd_image(a: &Descriptor) -> Option<Descriptor> {
    let e = a.to_ep()?;
    Some(match e.gcd() {
        Some(g) => Descriptor::finite([g]),
        None => Descriptor::empty(),
    })
}

/// `lcm(A)` as a singleton for finite `A` with a positive member.
pub fn lcm_image(a: &Descriptor) -> Option<Descriptor> {
    let e = a.to_ep()?;
    let m = e.members()?;
    let l = m
        .iter()
        .filter(|&&x| x > 0)
        .try_fold(0u64, |l, &x| if l == 0 { Some(x) } else { l.checked_mul(x / l.gcd(&x)) })?;
    Some(if l == 0 { Descriptor::empty() } else { Descriptor::finite([l]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::approx;
    use std::collections::BTreeSet;

    fn out(p: &SetProgram, s: Stage) -> BTreeSet<u64> {
        approx(p, s).unwrap()
    }

    fn comp(d: &str) -> SetProgram {
        d.parse::<Descriptor>().unwrap().compile().0
    }

    #[test]
    fn saturations() {
        let up = SetProgram::comb(Op::SaturateUp, vec![comp("finite(3,7)")], vec![]);
        assert_eq!(out(&up, 20), (3..=20).collect());
        let down = SetProgram::comb(Op::SaturateDown, vec![comp("finite(3,7)")], vec![]);
        assert_eq!(out(&down, 20), (0..=7).collect());
        let down_inf = SetProgram::comb(Op::SaturateDown, vec![comp("prog(1,4)")], vec![]);
        assert_eq!(out(&down_inf, 40), (0..=37).collect());
    }

    #[test]
    fn gcd_and_lcm_round_trips() {
        let g = SetProgram::comb(Op::GcdToMin, vec![SetProgram::scheduled([(12, 0), (18, 2), (8, 5)])], vec![]);
        assert_eq!(out(&g, 10), [2, 6, 12].into());
        let f = SetProgram::comb(Op::MinToGcd, vec![comp("finite(0,2)")], vec![]);
        assert_eq!(out(&f, 5), [1, 6].into());
        let l = SetProgram::comb(Op::LcmToMax, vec![SetProgram::scheduled([(4, 0), (6, 1), (0, 2)])], vec![]);
        assert_eq!(out(&l, 5), [4, 12].into());
        assert_eq!(factorial_succ(FACTORIAL_CAP), Some(2432902008176640000));
        assert_eq!(factorial_succ(FACTORIAL_CAP + 1), None);
    }

    #[test]
    fn median_machine_settles_to_multiples() {
        // median of {1,4,9} is 4: eventually the multiples of 10
        let p = SetProgram::comb(Op::EmedToE0, vec![SetProgram::scheduled([(9, 0), (1, 2), (4, 4)])], vec![]);
        let got = out(&p, 40);
        let tail: BTreeSet<u64> = got.iter().copied().filter(|&x| x > 60).collect();
        assert!(!tail.is_empty());
        assert!(tail.iter().all(|x| x % 10 == 0));
        // the median changed twice, so everything up to the max at the
        // second change is filled in
        assert!((0..=20).all(|x| got.contains(&x)));
    }

    #[test]
    fn cuts_and_hulls_over_omega() {
        let w = comp("finite(2,5)");
        let cut = order_program(Op::Cut, &LinearOrder::Omega, w.clone());
        assert_eq!(out(&cut, 20), (0..5).collect());
        let hull = order_program(Op::Hull, &LinearOrder::Omega, w.clone());
        assert_eq!(out(&hull, 20), (2..=5).collect());
        let star = order_program(Op::Cut, &LinearOrder::OmegaStar, w);
        assert_eq!(out(&star, 20), (3..=20).collect());
    }

    #[test]
    fn omega_into_q_is_the_rationals_below_sup_minus_one() {
        let p = el_omega_to_q(comp("finite(1,3)"));
        let got = out(&p, 200);
        let want = Descriptor::QCut(Box::new(Descriptor::finite(0..3))).members_below(201);
        assert_eq!(got, want);
        assert!(out(&el_omega_to_q(comp("finite(0)")), 200).is_empty());
        assert!(!out(&el_omega_to_q_mutant(comp("finite(0)")), 200).is_empty());
    }

    #[test]
    fn ratcut_matches_descriptor() {
        for d in ["finite(0,2)", "prog(1,2)", "finite()", "cofinite(0)"] {
            let p = SetProgram::comb(Op::EqceToEq, vec![comp(d)], vec![]);
            let got: BTreeSet<u64> = out(&p, 190).into_iter().filter(|&x| x <= 150).collect();
            let want = Descriptor::RatCut(Box::new(d.parse().unwrap())).members_below(151);
            assert_eq!(got, want, "{d}");
        }
    }
}
