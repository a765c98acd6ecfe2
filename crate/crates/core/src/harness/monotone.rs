//! Monotonicity meta-test: a computable map well-defined on c.e. sets is
//! ⊆-monotone, so every construction claiming that is run on growing chains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corpus::{sample, Shape};
use super::registry::{Kind, Reduction};
use crate::descriptor::Descriptor as D;
use crate::nce::NceProgram;
use crate::pairing::pair;
use crate::program::{approx_with, Budget, SetProgram};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneReport {
    pub reduction: String,
    pub chains: usize,
    pub violations: Vec<String>,
}

fn grow(shape: Shape, rng: &mut ChaCha8Rng) -> D {
    let n = rng.gen_range(1..=2);
    let xs: Vec<u64> = (0..n)
        .map(|_| match shape {
            Shape::Columns => pair(rng.gen_range(0..7), rng.gen_range(0..8)),
            Shape::GroupSubset(g) => rng.gen_range(0..g.order().unwrap_or(1)),
            Shape::GroupFunction(g) => pair(rng.gen_range(0..g.order().unwrap_or(1)), rng.gen_range(0..4)),
            Shape::FiniteRelation => pair(rng.gen_range(0..4), rng.gen_range(0..4)),
            _ => rng.gen_range(0..12),
        })
        .collect();
    D::finite(xs)
}

/// Chains `A_0 ⊆ A_1 ⊆ A_2 ⊆ A_3`; `None` unless the reduction claims
/// monotonicity. Tuple constructions get one-component tuples.
pub fn check_monotone(red: &Reduction, seed: u64, chains: usize, window: u64) -> Option<MonotoneReport> {
    if !red.monotone {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_6e6f);
    let shape = match red.kind {
        Kind::Tuple { .. } => Shape::FiniteBelow(8),
        _ => red.shape,
    };
    let build = |p: SetProgram| -> Option<SetProgram> {
        match red.kind {
            Kind::Program { build, .. } => Some(build(p, false)),
            Kind::Tuple { build, .. } => Some(build(&NceProgram::from_programs(&[p]), false)),
            _ => None,
        }
    };
    let mut violations = Vec::new();
    for i in 0..chains {
        let mut chain = vec![sample(shape, &mut rng)];
        for _ in 0..3 {
            let next = D::union(chain.last().unwrap().clone(), grow(shape, &mut rng));
            chain.push(next);
        }
        let mut prev: Option<std::collections::BTreeSet<u64>> = None;
        for d in &chain {
            let (p, st) = d.compile();
            let t = st.stage(window).max(window) + 8;
            let out = approx_with(&build(p)?, t, &mut Budget::new(50_000_000));
            let out = match out {
                Ok(o) => o.range(..=window).copied().collect(),
                Err(e) => {
                    violations.push(format!("chain {i}: {e}"));
                    break;
                }
            };
            if let Some(p) = &prev {
                if !p.is_subset(&out) {
                    let lost: Vec<u64> = p.difference(&out).take(5).copied().collect();
                    violations.push(format!("chain {i}: growing the input to {d} drops {lost:?}"));
                }
            }
            prev = Some(out);
        }
    }
    Some(MonotoneReport {
        reduction: red.id.to_string(),
        chains,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::registry;

    #[test]
    fn saturation_is_monotone_and_gcd_is_not_claimed() {
        let up = registry::lookup("min_to_eqce").unwrap();
        let r = check_monotone(&up, 1, 10, 64).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(check_monotone(&registry::lookup("gcd_to_min").unwrap(), 1, 10, 64).is_none());
    }

    #[test]
    fn a_non_monotone_map_is_caught() {
        // the gcd map claimed monotone: {4} ⊆ {2,4} but gcd 4 is dropped
        let mut red = registry::lookup("gcd_to_min").unwrap();
        red.monotone = true;
        red.shape = Shape::FiniteBelow(12);
        let r = check_monotone(&red, 3, 40, 64).unwrap();
        assert!(!r.violations.is_empty());
    }
}
