//! Every shipped reduction: source and target relations, the construction
//! and its registered mutant, and what its output should converge to.

use crate::below::{self, el_omega_to_q, el_omega_to_q_mutant, order_program};
use crate::descriptor::Descriptor as D;
use crate::enumerable::{class_member, embed_function, group_params, translate_set};
use crate::harness::corpus::Shape;
use crate::nce::NceProgram;
use crate::ops::Op;
use crate::pairing::pair;
use crate::program::SetProgram;
use crate::relations::group::ComputableGroup;
use crate::relations::order::LinearOrder;
use crate::relations::RelationId;

/// Output program from the compiled input; `true` builds the mutant.
pub type Build = fn(SetProgram, bool) -> SetProgram;
pub type BuildTuple = fn(&NceProgram, bool) -> SetProgram;
/// The descriptor the output converges to, if the input is in range.
pub type Predict = fn(&D) -> Option<D>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// Settled output equals the prediction on the window.
    Exact,
    /// Output is finite and related to the prediction in the target.
    Equivalent,
    /// Output contains the prediction on the window and adds nothing
    /// outside it after settlement.
    Junk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Settle {
    Window,
    /// Outputs reading a window of twice the size.
    DoubleWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NatMap {
    MinN,
    EqnToPi01,
    TwoClass,
    OneRepair,
    UceEmbed,
    Orbit,
}

#[derive(Clone, Copy)]
pub enum Kind {
    Program {
        build: Build,
        predict: Predict,
        check: Check,
        settle: Settle,
    },
    /// From an n-c.e. tuple to one program.
    Tuple { build: BuildTuple, predict: Predict, check: Check },
    /// The basic module `f(i,j)`, `f(j,i)` of the E_1 to E_0 reduction.
    Pairwise,
    /// The full E_1 to E_0 machine on a family of inputs.
    Family,
    /// n-c.e. tuple to n-c.e. tuple.
    NceMap,
    Naturals(NatMap),
}

#[derive(Clone)]
pub struct Reduction {
    pub id: &'static str,
    pub source: RelationId,
    pub target: RelationId,
    pub shape: Shape,
    pub kind: Kind,
    /// Claimed well-defined on c.e. sets, hence ⊆-monotone.
    pub monotone: bool,
    pub mutant: &'static str,
}

impl Reduction {
    pub fn summary(&self) -> String {
        format!("{}: {} -> {}", self.id, self.source, self.target)
    }
}

pub fn lookup(id: &str) -> Option<Reduction> {
    registry().into_iter().find(|r| r.id == id)
}

pub const S3: ComputableGroup = ComputableGroup::Symmetric(3);
pub const C4: ComputableGroup = ComputableGroup::Cyclic(4);
pub const TRANSLATE_GAMMA: u64 = 3;
pub const ACT_GAMMA: u64 = 4;
pub const CLASS_ENUM_N: u64 = 5;
pub const FAMILY_WIDTH: u64 = 8;

fn op(o: Op, p: SetProgram, m: bool) -> SetProgram {
    op_with(o, p, vec![], m)
}

fn op_with(o: Op, p: SetProgram, params: Vec<u64>, m: bool) -> SetProgram {
    if m {
        SetProgram::mutant(o, vec![p], params)
    } else {
        SetProgram::comb(o, vec![p], params)
    }
}

fn order_op(o: Op, l: &LinearOrder, p: SetProgram, m: bool) -> SetProgram {
    if m {
        SetProgram::mutant(o, vec![p], l.to_tokens())
    } else {
        order_program(o, l, p)
    }
}

fn bx(d: &D) -> Box<D> {
    Box::new(d.clone())
}

fn flat(d: &D) -> Option<D> {
    d.to_ep().map(|_| d.clone())
}

pub fn star_relation() -> D {
    let classes: [&[u64]; 5] = [&[0, 3, 7], &[1, 4], &[2, 5, 9, 12], &[6, 8], &[10, 11, 13, 14]];
    D::finite(classes.iter().flat_map(|c| c[1..].iter().map(|&x| pair(x, c[0]))).collect::<Vec<_>>())
}

pub fn chain_relation() -> D {
    let edges = [(5, 8), (8, 13), (13, 20), (0, 4), (4, 9), (9, 16), (2, 3)];
    D::finite(edges.iter().map(|&(a, b)| pair(a, b)).collect::<Vec<_>>())
}

fn program(build: Build, predict: Predict, check: Check) -> Kind {
    Kind::Program {
        build,
        predict,
        check,
        settle: Settle::Window,
    }
}

fn family_args(w: SetProgram) -> Vec<SetProgram> {
    let mut args = vec![w];
    args.extend((0..FAMILY_WIDTH).map(|i| SetProgram::finite([i])));
    args
}

pub fn registry() -> Vec<Reduction> {
    use Check::*;
    use RelationId as R;
    let r = |id, source, target, kind, monotone, mutant| {
        let shape = Shape::default_for(&source).unwrap_or(Shape::Flat);
        Reduction {
            id,
            source,
            target,
            shape,
            kind,
            monotone,
            mutant,
        }
    };
    let evens = D::Progression { a: 0, d: 2 };
    let odds = D::Progression { a: 1, d: 2 };
    let thirds = D::Progression { a: 0, d: 3 };
    let mut v = vec![
        // the benchmark relations
        r(
            "eqce_to_e0",
            R::EqCe,
            R::E0,
            program(|p, m| op(Op::EqceToE0, p, m), |a| Some(D::product(a.clone(), D::all())), Exact),
            true,
            "writes column n+1 for n",
        ),
        r(
            "e0_to_e1",
            R::E0,
            R::E1,
            program(|p, m| op(Op::E0ToE1, p, m), |a| Some(D::Tails(bx(a))), Exact),
            true,
            "drops the head of each tail",
        ),
        r(
            "e0_to_e2",
            R::E0,
            R::E2,
            program(|p, m| op(Op::E0ToE2, p, m), |a| Some(D::WeightBlocks(bx(a))), Exact),
            true,
            "fills block b from b-1",
        ),
        r(
            "e0_to_e3",
            R::E0,
            R::E3,
            program(|p, m| op(Op::E0ToE3, p, m), |a| Some(D::product(D::all(), a.clone())), Exact),
            true,
            "truncates column c below c",
        ),
        r(
            "e0_to_z0",
            R::E0,
            R::Z0,
            program(|p, m| op(Op::E0ToZ0, p, m), |a| Some(D::DyadicBlocks(bx(a))), Exact),
            true,
            "closes each block on the right",
        ),
        r(
            "e3_to_z0",
            R::E3,
            R::Z0,
            program(|p, m| op(Op::E3ToZ0, p, m), |a| Some(D::ResidueDyadic(bx(a))), Exact),
            true,
            "residue classes shifted by one",
        ),
        r(
            "e3_to_eset",
            R::E3,
            R::Eset,
            program(|p, m| op(Op::E3ToEset, p, m), |a| Some(D::TaggedVariants(bx(a))), Exact),
            true,
            "tail shifted past the prefix",
        ),
        r("basic_module", R::E1, R::E0, Kind::Pairwise, false, "copies every difference"),
        r("e1_to_e0", R::E1, R::E0, Kind::Family, false, "markers only in output j"),
        // below equality
        r(
            "min_to_eqce",
            R::Emin,
            R::EqCe,
            program(|p, m| op(Op::SaturateUp, p, m), below::saturate_up, Exact),
            true,
            "strict upward closure",
        ),
        r(
            "max_to_eqce",
            R::Emax,
            R::EqCe,
            program(|p, m| op(Op::SaturateDown, p, m), below::saturate_down, Exact),
            true,
            "strict downward closure",
        ),
        r(
            "max_to_med",
            R::Emax,
            R::Emed,
            program(|p, m| op(Op::SaturateDown, p, m), below::saturate_down, Exact),
            true,
            "strict downward closure",
        ),
        r(
            "emed_to_e0",
            R::Emed,
            R::E0,
            Kind::Program {
                build: |p, m| op(Op::EmedToE0, p, m),
                predict: below::emed_image,
                check: Junk,
                settle: Settle::DoubleWindow,
            },
            false,
            "multiples of the median itself",
        ),
        r(
            "min_to_gcd",
            R::Emin,
            R::Egcd,
            program(|p, m| op(Op::MinToGcd, p, m), |a| Some(D::Factorials(bx(&flat(a)?))), Exact),
            true,
            "n! in place of (n+1)!",
        ),
        r(
            "max_to_lcm",
            R::Emax,
            R::Elcm,
            program(|p, m| op(Op::MaxToLcm, p, m), |a| Some(D::Factorials(bx(&flat(a)?))), Exact),
            true,
            "n! in place of (n+1)!",
        ),
        r(
            "gcd_to_min",
            R::Egcd,
            R::Emin,
            program(|p, m| op(Op::GcdToMin, p, m), below::gcd_image, Equivalent),
            false,
            "least element in place of the gcd",
        ),
        r(
            "lcm_to_max",
            R::Elcm,
            R::Emax,
            program(|p, m| op(Op::LcmToMax, p, m), below::lcm_image, Equivalent),
            false,
            "running product in place of the lcm",
        ),
        r(
            "cut_to_hull",
            R::EOmega,
            R::HOmega,
            program(|p, m| order_op(Op::Cut, &LinearOrder::Omega, p, m), below::omega_cut, Exact),
            true,
            "closed cut",
        ),
        r(
            "cut_to_hull_star",
            R::Emin,
            R::HOmega,
            program(
                |p, m| order_op(Op::Cut, &LinearOrder::OmegaStar, p, m),
                |a| {
                    let e = a.to_ep()?;
                    Some(match e.min() {
                        Some(lo) => D::cofinite(0..=lo),
                        None => D::empty(),
                    })
                },
                Exact,
            ),
            true,
            "closed cut",
        ),
        r(
            "hull_to_eqce",
            R::HOmega,
            R::EqCe,
            program(|p, m| order_op(Op::Hull, &LinearOrder::Omega, p, m), below::omega_hull, Exact),
            true,
            "half-open hull",
        ),
        r(
            "el_omega_to_q",
            R::EOmega,
            R::EQ,
            program(
                |p, m| if m { el_omega_to_q_mutant(p) } else { el_omega_to_q(p) },
                |a| Some(D::QCut(bx(&below::omega_cut(a)?))),
                Exact,
            ),
            true,
            "embedding without the ω cut",
        ),
        r(
            "eqce_to_eq",
            R::EqCe,
            R::EQ,
            program(|p, m| op(Op::EqceToEq, p, m), |a| Some(D::RatCut(bx(a))), Exact),
            true,
            "weights 2^-(n+1)",
        ),
        // enumerability and group actions
        r(
            "e0_class_enum",
            R::E0,
            R::E0,
            program(
                |p, m| op_with(Op::E0ClassEnum, p, vec![CLASS_ENUM_N], m),
                |a| Some(class_member(a, CLASS_ENUM_N)),
                Exact,
            ),
            true,
            "prefix cut one bit short",
        ),
        r(
            "enumerable_to_eset",
            R::E0,
            R::Eset,
            program(|p, m| op(Op::EnumerableToEset, p, m), |a| Some(D::Variants(bx(a))), Exact),
            true,
            "tail cut one late",
        ),
        r(
            "translate",
            R::Translation(S3),
            R::Translation(S3),
            program(
                |p, m| op_with(Op::Translate, p, group_params(&S3, Some(TRANSLATE_GAMMA)), m),
                |a| Some(translate_set(&S3, TRANSLATE_GAMMA, a)),
                Exact,
            ),
            true,
            "translates twice",
        ),
        r(
            "ugamma_embed",
            R::Translation(S3),
            R::UGamma(S3),
            program(
                |p, m| op_with(Op::UGammaEmbed, p, group_params(&S3, None), m),
                |a| Some(embed_function(&S3, a)),
                Exact,
            ),
            true,
            "column h is h⁻¹W",
        ),
        r(
            "ugamma_act",
            R::UGamma(S3),
            R::UGamma(S3),
            program(
                |p, m| op_with(Op::UGammaAct, p, group_params(&S3, Some(ACT_GAMMA)), m),
                |a| crate::enumerable::act_function(&S3, ACT_GAMMA, a),
                Exact,
            ),
            true,
            "reads φ(hγ)",
        ),
        r(
            "gamma_to_fomega",
            R::Translation(C4),
            R::UFomega(C4),
            program(
                |p, m| op_with(Op::UGammaEmbed, p, group_params(&C4, None), m),
                |a| Some(embed_function(&C4, a)),
                Exact,
            ),
            true,
            "column h is h⁻¹W",
        ),
        // structures
        r(
            "eset_to_isobin",
            R::Eset,
            R::IsoBin,
            program(|p, m| op(Op::EsetToIsobin, p, m), |a| Some(D::TreeCode(bx(a))), Exact),
            true,
            "element node k hangs off k+1",
        ),
        r(
            "compiso_to_eset",
            R::CompIsoBin,
            R::Eset,
            program(|p, m| op(Op::CompisoToEset, p, m), |a| Some(D::IsoCopies(bx(a))), Exact),
            false,
            "drops the marker from odd columns",
        ),
        r(
            "eq1_to_compiso",
            R::Eq1,
            R::CompIsoBin,
            program(|p, m| op(Op::Eq1ToCompiso, p, m), |a| Some(D::Star(bx(a))), Exact),
            true,
            "leaf n on edge <0,n>",
        ),
        r(
            "eqm_to_eq1",
            R::EqM,
            R::Eq1,
            program(|p, m| op(Op::EqmToEq1, p, m), |a| Some(D::product(a.clone(), D::all())), Exact),
            true,
            "W × {0}",
        ),
        r(
            "family_columns",
            R::EqCe,
            R::Eset,
            program(
                |p, m| {
                    if m {
                        SetProgram::mutant(Op::FamilyColumns, family_args(p), vec![])
                    } else {
                        SetProgram::comb(Op::FamilyColumns, family_args(p), vec![])
                    }
                },
                |a| {
                    let m = a.to_ep()?.members()?;
                    Some(D::columns(
                        D::empty(),
                        m.into_iter().enumerate().map(|(i, n)| (i as u64, D::finite([n]))).collect(),
                    ))
                },
                Equivalent,
            ),
            false,
            "skips column 0",
        ),
        r(
            "nce_embed",
            R::EqNce,
            R::EqNce,
            Kind::NceMap,
            false,
            "prepends the empty index",
        ),
        r(
            "ltomega_to_e3",
            R::EqNce,
            R::E3,
            Kind::Tuple {
                build: |n, m| {
                    if m {
                        SetProgram::mutant(Op::LtomegaToE3, n.programs(), vec![])
                    } else {
                        crate::nce::ltomega_to_e3(n)
                    }
                },
                predict: |d| {
                    let lim = crate::relations::oracle::nce_limit(d).ok()?.members()?;
                    Some(D::product(D::Finite(lim), D::all()))
                },
                check: Junk,
            },
            true,
            "reads component 0 only",
        ),
        // naturals
        r(
            "min_n",
            R::EqN(3),
            R::Emin,
            Kind::Naturals(NatMap::MinN),
            false,
            "k ↦ i_{k+1}",
        ),
        r(
            "eqn_to_pi01",
            R::EqNat,
            R::OneClass(evens.clone()),
            Kind::Naturals(NatMap::EqnToPi01),
            false,
            "k ↦ 2k without the search",
        ),
        r(
            "two_class",
            R::TwoClass(evens.clone()),
            R::TwoClass(odds),
            Kind::Naturals(NatMap::TwoClass),
            false,
            "n ↦ 2n",
        ),
        r(
            "one_reduction_repair",
            R::OneClass(thirds),
            R::OneClass(evens),
            Kind::Naturals(NatMap::OneRepair),
            false,
            "repairs from ℕ instead of B",
        ),
        r(
            "uce_embed",
            R::CeRelation(chain_relation()),
            R::Uce,
            Kind::Naturals(NatMap::UceEmbed),
            false,
            "a ↦ <e, a+1>",
        ),
        r(
            "orbit_realization",
            R::CeRelation(star_relation()),
            R::CeRelation(star_relation()),
            Kind::Naturals(NatMap::Orbit),
            false,
            "generators swap n and n'+1",
        ),
    ];
    for red in v.iter_mut() {
        red.shape = match red.id {
            "lcm_to_max" => Shape::FiniteBelow(10),
            "family_columns" => Shape::FiniteBelow(FAMILY_WIDTH),
            "eqn_to_pi01" => Shape::Natural(10),
            "min_n" => Shape::Natural(6),
            _ => red.shape,
        };
    }
    v
}
