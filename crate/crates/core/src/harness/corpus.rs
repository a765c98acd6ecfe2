//! Seeded corpora of descriptor pairs, balanced between related and
//! unrelated pairs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::descriptor::{Descriptor as D, Settlement};
use crate::enumerable::{act_function, translate_set};
use crate::pairing::{pair, unpair};
use crate::program::SetProgram;
use crate::relations::group::ComputableGroup;
use crate::relations::{oracle_decide, RelationId};

pub const CORPUS_VERSION: u32 = 1;

/// The family a sampler draws descriptors from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Finite, cofinite, progressions and their unions and differences.
    Flat,
    /// Finite subsets of `[0, bound)`.
    FiniteBelow(u64),
    /// Columns keyed below 7, small columns.
    Columns,
    /// n-c.e. tuples as columns `0..n` over an empty default.
    Tuple,
    /// Singletons `{k}`, `k ≤ bound`.
    Natural(u64),
    /// Subsets of a finite group.
    GroupSubset(ComputableGroup),
    /// Functions from a finite group to small finite sets, as columns.
    GroupFunction(ComputableGroup),
    /// Finite edge sets on a few vertices.
    FiniteRelation,
    /// Empty, full, finite, cofinite and infinite-coinfinite sets.
    Cardinal,
}

impl Shape {
    pub fn default_for(r: &RelationId) -> Option<Shape> {
        use RelationId as R;
        Some(match r {
            R::EqCe | R::E0 | R::E2 | R::Z0 | R::Emin | R::Emax | R::Emed | R::Egcd | R::EOmega | R::HOmega => {
                Shape::Flat
            }
            R::Elcm => Shape::FiniteBelow(10),
            R::E1 | R::E3 | R::Eset => Shape::Columns,
            R::EqNce => Shape::Tuple,
            R::CompIsoBin => Shape::FiniteRelation,
            R::Eq1 | R::EqM => Shape::Cardinal,
            R::Translation(g) => Shape::GroupSubset(*g),
            R::UGamma(g) => Shape::GroupFunction(*g),
            R::EqN(_) | R::EqNat | R::TwoClass(_) | R::OneClass(_) => Shape::Natural(20),
            R::CeRelation(p) => Shape::Natural(relation_bound(p)),
            R::EQ | R::EqT | R::IsoBin | R::UFomega(_) | R::Uce => return None,
        })
    }
}

fn relation_bound(p: &D) -> u64 {
    match p {
        D::Finite(s) => s.iter().map(|&c| {
            let (a, b) = unpair(c);
            a.max(b)
        })
        .max()
        .map_or(20, |m| m + 2),
        _ => 20,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    #[serde(skip)]
    pub index: u64,
    #[serde(skip, default = "placeholder")]
    pub relation: RelationId,
    #[serde(rename = "descA")]
    pub a: D,
    #[serde(rename = "descB")]
    pub b: D,
    pub expected: bool,
}

fn placeholder() -> RelationId {
    RelationId::EqCe
}

impl TestCase {
    /// Schedule spreads of the two sides; they depend only on the index.
    pub fn spreads(&self) -> [u64; 2] {
        [(3 * self.index) % 13, (5 * self.index + 7) % 11]
    }

    pub fn salts(&self) -> [u64; 2] {
        [2 * self.index, 2 * self.index + 1]
    }

    pub fn descriptors(&self) -> [&D; 2] {
        [&self.a, &self.b]
    }

    /// Compiled programs with their settlement stages.
    pub fn compiled(&self) -> [(SetProgram, Settlement); 2] {
        let (sp, sa) = (self.spreads(), self.salts());
        [self.a.compile_delayed(sp[0], sa[0]), self.b.compile_delayed(sp[1], sa[1])]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub version: u32,
    pub relation: RelationId,
    pub seed: u64,
    pub cases: Vec<TestCase>,
}

impl Corpus {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus serializes")
    }

    pub fn from_json(s: &str) -> Result<Corpus, HarnessError> {
        let mut c: Corpus = serde_json::from_str(s).map_err(|e| HarnessError::Corpus(e.to_string()))?;
        if c.version != CORPUS_VERSION {
            return Err(HarnessError::Corpus(format!("unsupported version {}", c.version)));
        }
        for (i, case) in c.cases.iter_mut().enumerate() {
            case.index = i as u64;
            case.relation = c.relation.clone();
            let got = oracle_decide(&c.relation, &case.a, &case.b).map_err(|e| HarnessError::Corpus(e.to_string()))?;
            if got != case.expected {
                return Err(HarnessError::Corpus(format!("case {i}: expected verdict disagrees with the oracle")));
            }
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

pub fn gen_corpus(relation: &RelationId, seed: u64, size: usize) -> Result<Corpus, HarnessError> {
    let shape = Shape::default_for(relation).ok_or_else(|| HarnessError::UnsupportedRelation(relation.to_string()))?;
    gen_corpus_with(relation, shape, seed, size)
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Even-numbered cases aim for related pairs, odd ones for unrelated;
/// `expected` is always the oracle's verdict.
pub fn gen_corpus_with(relation: &RelationId, shape: Shape, seed: u64, size: usize) -> Result<Corpus, HarnessError> {
    if size == 0 {
        return Err(HarnessError::EmptySize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(&relation.to_string()));
    let decide = |a: &D, b: &D| oracle_decide(relation, a, b).map_err(|e| HarnessError::Oracle(e.to_string()));
    let mut cases = Vec::with_capacity(size);
    for i in 0..size as u64 {
        let want = i % 2 == 0;
        let a = sample(shape, &mut rng);
        let b = match shape {
            Shape::Natural(bound) => {
                let mut pool = Vec::new();
                for k in 0..=bound {
                    let b = D::finite([k]);
                    if decide(&a, &b)? == want {
                        pool.push(b);
                    }
                }
                pool.choose(&mut rng).cloned().unwrap_or_else(|| a.clone())
            }
            _ => {
                let mut found = if want { variant(relation, shape, &mut rng, &a) } else { None };
                for _ in 0..200 {
                    if found.is_some() {
                        break;
                    }
                    let b = sample(shape, &mut rng);
                    if decide(&a, &b)? == want {
                        found = Some(b);
                    }
                }
                found.unwrap_or_else(|| a.clone())
            }
        };
        let expected = decide(&a, &b)?;
        cases.push(TestCase {
            index: i,
            relation: relation.clone(),
            a,
            b,
            expected,
        });
    }
    Ok(Corpus {
        version: CORPUS_VERSION,
        relation: relation.clone(),
        seed,
        cases,
    })
}

fn subset(rng: &mut ChaCha8Rng, below: u64, max_len: usize) -> BTreeSet<u64> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| rng.gen_range(0..below)).collect()
}

fn prog(rng: &mut ChaCha8Rng) -> D {
    D::Progression {
        a: rng.gen_range(0..6),
        d: rng.gen_range(1..4),
    }
}

fn flat(rng: &mut ChaCha8Rng) -> D {
    match rng.gen_range(0..6) {
        0 | 1 => D::Finite(subset(rng, 10, 4)),
        2 => prog(rng),
        3 => D::Cofinite(subset(rng, 8, 3)),
        4 => D::union(D::Finite(subset(rng, 10, 3)), prog(rng)),
        _ => D::difference(prog(rng), D::Finite(subset(rng, 10, 3))),
    }
}

fn small(rng: &mut ChaCha8Rng) -> D {
    match rng.gen_range(0..4) {
        0 => D::empty(),
        1 | 2 => D::Finite(subset(rng, 6, 3)),
        _ => D::Progression {
            a: rng.gen_range(0..4),
            d: rng.gen_range(1..3),
        },
    }
}

fn columns(rng: &mut ChaCha8Rng) -> D {
    let default = small(rng);
    let keys = subset(rng, 7, 3);
    D::columns(default, keys.into_iter().map(|k| (k, small(rng))).collect())
}

pub fn sample(shape: Shape, rng: &mut ChaCha8Rng) -> D {
    match shape {
        Shape::Flat => flat(rng),
        Shape::FiniteBelow(b) => D::Finite(subset(rng, b, 5)),
        Shape::Columns => columns(rng),
        Shape::Tuple => {
            let n = rng.gen_range(1..=4);
            D::columns(D::empty(), (0..n).map(|k| (k, D::Finite(subset(rng, 8, 4)))).collect())
        }
        Shape::Natural(b) => D::finite([rng.gen_range(0..=b)]),
        Shape::GroupSubset(g) => {
            let n = g.order().unwrap_or(1);
            D::finite((0..n).filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>())
        }
        Shape::GroupFunction(g) => {
            let n = g.order().unwrap_or(1);
            D::columns(D::empty(), (0..n).map(|h| (h, D::Finite(subset(rng, 4, 2)))).collect())
        }
        Shape::FiniteRelation => {
            let n = rng.gen_range(0..=4);
            D::finite((0..n).map(|_| pair(rng.gen_range(0..4), rng.gen_range(0..4))).collect::<Vec<_>>())
        }
        Shape::Cardinal => match rng.gen_range(0..6) {
            0 => D::empty(),
            1 => D::all(),
            2 => D::Finite(subset(rng, 10, 4)),
            3 => D::Cofinite(subset(rng, 8, 3)),
            _ => D::Progression {
                a: rng.gen_range(0..4),
                d: rng.gen_range(2..4),
            },
        },
    }
}

fn e0_perturb(rng: &mut ChaCha8Rng, a: &D, below: u64) -> D {
    let f = D::Finite(subset(rng, below, 2));
    if rng.gen_bool(0.5) {
        D::union(a.clone(), f)
    } else {
        D::difference(a.clone(), f)
    }
}

fn listed(a: &D) -> Option<(&D, Vec<(u64, D)>)> {
    match a {
        D::Columns { cols, default } => Some((default, cols.iter().map(|(&k, d)| (k, d.clone())).collect())),
        _ => None,
    }
}

/// A related partner built by a class-preserving move, where one is at hand.
fn variant(r: &RelationId, shape: Shape, rng: &mut ChaCha8Rng, a: &D) -> Option<D> {
    use RelationId as R;
    match (r, shape) {
        (R::EqCe, _) => None,
        (R::E0 | R::E2 | R::Z0, Shape::Flat) => Some(e0_perturb(rng, a, 10)),
        (R::E1, Shape::Columns) => {
            let (default, _) = listed(a)?;
            let keys = subset(rng, 7, 3);
            Some(D::columns(default.clone(), keys.into_iter().map(|k| (k, small(rng))).collect()))
        }
        (R::E3, Shape::Columns) => {
            let (default, cols) = listed(a)?;
            let default = e0_perturb(rng, default, 6);
            let cols = cols.into_iter().map(|(k, d)| (k, e0_perturb(rng, &d, 6))).collect();
            Some(D::columns(default, cols))
        }
        (R::Eset, Shape::Columns) => {
            let (default, cols) = listed(a)?;
            let mut keys: Vec<u64> = cols.iter().map(|c| c.0).collect();
            keys.shuffle(rng);
            let mut moved: Vec<(u64, D)> = keys.into_iter().zip(cols.into_iter().map(|c| c.1)).collect();
            let fresh = (0..7).filter(|k| !moved.iter().any(|c| c.0 == *k)).collect::<Vec<_>>();
            if let Some(&k) = fresh.choose(rng) {
                moved.push((k, default.clone()));
            }
            Some(D::columns(default.clone(), moved))
        }
        (R::EqNce, Shape::Tuple) => {
            let (default, mut cols) = listed(a)?;
            cols.push((cols.len() as u64, D::empty()));
            Some(D::columns(default.clone(), cols))
        }
        (R::Translation(g), _) => {
            let gamma = rng.gen_range(0..g.order()?);
            Some(translate_set(g, gamma, a))
        }
        (R::UGamma(g), _) => {
            let gamma = rng.gen_range(0..g.order()?);
            act_function(g, gamma, a)
        }
        (R::CompIsoBin, _) => {
            let D::Finite(edges) = a else { return None };
            let mut perm: Vec<u64> = (0..6).collect();
            perm.shuffle(rng);
            Some(D::finite(
                edges
                    .iter()
                    .map(|&e| {
                        let (u, v) = unpair(e);
                        pair(perm[u as usize], perm[v as usize])
                    })
                    .collect::<Vec<_>>(),
            ))
        }
        _ => None,
    }
}
