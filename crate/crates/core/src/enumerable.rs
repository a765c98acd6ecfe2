//! Enumerability in the indices, translation actions and the universal
//! orbit relations `U_Γ`, `U_{F_ω}`.

use std::collections::BTreeMap;

use crate::descriptor::{binary_string, Descriptor};
use crate::ops::{param, put_paced, run_arg, Op};
use crate::pairing::{pair, unpair};
use crate::program::{Budget, EvalError, SetProgram, Stage, Trace};
use crate::relations::group::ComputableGroup;
use crate::relations::oracle::fomega_generator;

fn group(params: &[u64]) -> Option<ComputableGroup> {
    ComputableGroup::from_code(param(params, 0)).filter(|g| g.order().is_some())
}

pub fn eval(
    op: Op,
    mutant: bool,
    args: &[SetProgram],
    params: &[u64],
    s: Stage,
    budget: &mut Budget,
) -> Result<Trace, EvalError> {
    let a = run_arg(args, 0, s, budget)?;
    let mut t = Trace::new(s);
    match op {
        // s_n ⌢ (W ∖ |s_n|), params [n]
        Op::E0ClassEnum => {
            let bits = binary_string(param(params, 0));
            let len = bits.len() as u64;
            let cut = if mutant { len.saturating_sub(1) } else { len };
            for (i, &b) in bits.iter().enumerate() {
                if b {
                    put_paced(&mut t, i as u64, 0);
                }
            }
            for (k, st) in a.iter() {
                if k >= cut {
                    put_paced(&mut t, k, st);
                }
            }
        }
        // column m is α(m, W)
        Op::EnumerableToEset => {
            let mut m = 0;
            while pair(m, 0) <= s {
                let bits = binary_string(m);
                let len = bits.len() as u64;
                for (i, &b) in bits.iter().enumerate() {
                    let x = pair(m, i as u64);
                    if x > s {
                        break;
                    }
                    if b {
                        put_paced(&mut t, x, 0);
                    }
                }
                for (k, st) in a.iter() {
                    if k < len + mutant as u64 {
                        continue;
                    }
                    let x = pair(m, k);
                    if x > s {
                        break;
                    }
                    budget.tick(1)?;
                    put_paced(&mut t, x, st);
                }
                m += 1;
            }
        }
        // γW, params [group, γ]; the mutant applies γ twice
        Op::Translate => {
            let Some(g) = group(params) else {
                return Ok(t);
            };
            let gamma = param(params, 1);
            for (x, st) in a.iter() {
                let mut y = g.mul(gamma, x);
                if mutant {
                    y = y.and_then(|y| g.mul(gamma, y));
                }
                if let Some(y) = y {
                    put_paced(&mut t, y, st);
                }
            }
        }
        // φ_W: column g is gW; the mutant uses g⁻¹W
        Op::UGammaEmbed => {
            let Some(g) = group(params) else {
                return Ok(t);
            };
            for h in g.elements().unwrap() {
                let left = if mutant { g.inv(h).unwrap() } else { h };
                for (x, st) in a.iter() {
                    if let Some(y) = g.mul(left, x) {
                        put_paced(&mut t, pair(h, y), st);
                    }
                }
            }
        }
        // (γ·φ)(h) = φ(hγ⁻¹); the mutant reads φ(hγ)
        Op::UGammaAct => {
            let Some(g) = group(params) else {
                return Ok(t);
            };
            let gamma = param(params, 1);
            if !g.contains(gamma) {
                return Ok(t);
            }
            let shift = if mutant { gamma } else { g.inv(gamma).unwrap() };
            let mut cols: BTreeMap<u64, Vec<(u64, Stage)>> = BTreeMap::new();
            for (x, st) in a.iter() {
                let (h, k) = unpair(x);
                cols.entry(h).or_default().push((k, st));
            }
            for h in g.elements().unwrap() {
                let src = g.mul(h, shift).unwrap();
                for &(k, st) in cols.get(&src).into_iter().flatten() {
                    put_paced(&mut t, pair(h, k), st);
                }
            }
        }
        _ => unreachable!("{op:?} is not an enumerability op"),
    }
    Ok(t)
}

pub fn group_params(g: &ComputableGroup, gamma: Option<u64>) -> Vec<u64> {
    let mut v = vec![g.code()];
    v.extend(gamma);
    v
}

/// `s_n ⌢ (A ∖ |s_n|)` as a descriptor.
pub fn class_member(a: &Descriptor, n: u64) -> Descriptor {
    crate::relations::oracle::variant_column(a, n)
}

/// `γA` for a finite subset of a finite group.
pub fn translate_set(g: &ComputableGroup, gamma: u64, a: &Descriptor) -> Descriptor {
    let order = g.order().unwrap_or(0);
    Descriptor::finite((0..order).filter(|&x| a.contains(x)).filter_map(|x| g.mul(gamma, x)))
}

/// `φ_A` with column `h` equal to `hA`.
pub fn embed_function(g: &ComputableGroup, a: &Descriptor) -> Descriptor {
    let order = g.order().unwrap_or(0);
    Descriptor::columns(
        Descriptor::empty(),
        (0..order).map(|h| (h, translate_set(g, h, a))).collect(),
    )
}

/// `γ·φ` on a column descriptor.
pub fn act_function(g: &ComputableGroup, gamma: u64, phi: &Descriptor) -> Option<Descriptor> {
    let order = g.order()?;
    let gi = g.inv(gamma)?;
    let cols = (0..order)
        .map(|h| Some((h, phi.column(g.mul(h, gi)?)?)))
        .collect::<Option<Vec<_>>>()?;
    Some(Descriptor::columns(Descriptor::empty(), cols))
}

/// The element a reduced word in `x_1, x_2, ...` acts as, generator `x_i`
/// acting as `γ_i`. Letters are `2(i-1)` for `x_i` and `2(i-1)+1` for its
/// inverse; the word acts as the composition, rightmost letter first.
pub fn fomega_element(g: &ComputableGroup, word: &[u64]) -> Option<u64> {
    let mut acc = g.identity();
    for &letter in word {
        let gamma = fomega_generator(g, letter / 2 + 1);
        let gamma = if letter % 2 == 0 { gamma } else { g.inv(gamma)? };
        acc = g.mul(acc, gamma)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::approx;
    use crate::relations::{oracle_decide, RelationId};
    use std::collections::BTreeSet;

    fn comp(d: &Descriptor) -> SetProgram {
        d.compile().0
    }

    #[test]
    fn prefix_substitution() {
        // s_5 = "10"
        let p = SetProgram::comb(Op::E0ClassEnum, vec![comp(&Descriptor::all())], vec![5]);
        let got = approx(&p, 30).unwrap();
        let want: BTreeSet<u64> = (0..=30).filter(|&x| x != 1).collect();
        assert_eq!(got, want);
        let p0 = SetProgram::comb(Op::E0ClassEnum, vec![comp(&Descriptor::finite([3, 4]))], vec![0]);
        assert_eq!(approx(&p0, 10).unwrap(), [3, 4].into());
    }

    #[test]
    fn class_members_are_e0_equivalent() {
        let bases = ["finite(1,4)", "prog(0,3)", "cofinite(2)", "finite()"];
        for b in bases {
            let a: Descriptor = b.parse().unwrap();
            for n in 0..5 {
                let m = class_member(&a, n);
                assert!(oracle_decide(&RelationId::E0, &a, &m).unwrap(), "{b} {n}");
                let p = SetProgram::comb(Op::E0ClassEnum, vec![comp(&a)], vec![n]);
                let got = approx(&p, 60).unwrap();
                assert_eq!(got, m.members_below(61), "{b} {n}");
            }
        }
    }

    #[test]
    fn empty_base_columns_are_the_prefixes() {
        let p = SetProgram::comb(Op::EnumerableToEset, vec![SetProgram::empty()], vec![]);
        let got = approx(&p, 80).unwrap();
        let want = Descriptor::Variants(Box::new(Descriptor::empty())).members_below(81);
        assert_eq!(got, want);
    }

    #[test]
    fn translation_on_c3() {
        let g = ComputableGroup::Cyclic(3);
        let p = SetProgram::comb(Op::Translate, vec![SetProgram::finite([0, 1])], group_params(&g, Some(1)));
        assert_eq!(approx(&p, 5).unwrap(), [1, 2].into());
    }

    #[test]
    fn action_laws_on_s3() {
        let g = ComputableGroup::Symmetric(3);
        let a = Descriptor::finite([0, 3]);
        for x in 0..6 {
            for y in 0..6 {
                let xy = g.mul(x, y).unwrap();
                let lhs = translate_set(&g, xy, &a);
                let rhs = translate_set(&g, x, &translate_set(&g, y, &a));
                assert_eq!(lhs, rhs);
                // φ(hγ⁻¹) composes on the right: x·(y·φ) = (yx)·φ
                let yx = g.mul(y, x).unwrap();
                let phi = embed_function(&g, &a);
                let l = act_function(&g, yx, &phi).unwrap();
                let r = act_function(&g, x, &act_function(&g, y, &phi).unwrap()).unwrap();
                assert_eq!(l.members_below(60), r.members_below(60));
            }
        }
        assert_eq!(translate_set(&g, 0, &a), a);
    }

    #[test]
    fn act_matches_descriptor_on_c2() {
        let g = ComputableGroup::Cyclic(2);
        let phi = embed_function(&g, &Descriptor::finite([0]));
        let p = SetProgram::comb(Op::UGammaAct, vec![comp(&phi)], group_params(&g, Some(1)));
        let got = approx(&p, 40).unwrap();
        let want = act_function(&g, 1, &phi).unwrap().members_below(41);
        assert_eq!(got, want);
        // the two columns trade places
        assert_eq!(want, [pair(0, 1), pair(1, 0)].into());
    }

    #[test]
    fn words_act_by_composition() {
        let g = ComputableGroup::Cyclic(2);
        assert_eq!(fomega_element(&g, &[]), Some(0));
        // γ_2 = 1 in C_2, so x_2 x_2 is the identity
        assert_eq!(fomega_element(&g, &[2, 2]), Some(0));
        assert_eq!(fomega_element(&g, &[2]), Some(1));
    }
}
