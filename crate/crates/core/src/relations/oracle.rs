//! Exact deciders on descriptors.
//!
//! Flat sets normalise to [`SetNf`]: finite, infinite eventually periodic,
//! or a union of blocks over an infinite coinfinite index. Column families
//! normalise to [`ColNf`]: explicit leading columns, then either a periodic
//! table or the tail rule `column c = T ∖ [0,c)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use super::group::ComputableGroup;
use super::order::rat_decode;
use super::{nat_of, RelationId};
use crate::descriptor::{
    binary_string, ratcut_value, weight_block_starts, Descriptor as D, Unsupported,
};
use crate::ep::Ep;
use crate::pairing::unpair;

fn unsupported<T>(what: impl std::fmt::Display) -> Result<T, Unsupported> {
    Err(Unsupported(what.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    Dyadic,
    Weight,
    Factorial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetNf {
    Fin(BTreeSet<u64>),
    Inf(Ep),
    /// Index is infinite and coinfinite (or any infinite index for
    /// factorials).
    Blocks(BlockKind, Ep),
}

/// Largest factorial index whose value fits in `u64`.
pub const MAX_FACTORIAL_INDEX: u64 = 19;

fn weight_starts() -> &'static [u64] {
    use std::sync::OnceLock;
    static STARTS: OnceLock<Vec<u64>> = OnceLock::new();
    STARTS.get_or_init(|| weight_block_starts(1 << 22))
}

/// `[lo, hi)` of block `n`.
pub fn block_range(kind: BlockKind, n: u64) -> Option<(u64, u64)> {
    match kind {
        BlockKind::Dyadic => (n < 63).then(|| (1u64 << n, 1u64 << (n + 1))),
        BlockKind::Weight => {
            let s = weight_starts();
            let (lo, hi) = (*s.get(n as usize)?, *s.get(n as usize + 1)?);
            Some((lo, hi))
        }
        BlockKind::Factorial => {
            if n > MAX_FACTORIAL_INDEX {
                return None;
            }
            let f: u64 = (1..=n + 1).product();
            Some((f, f + 1))
        }
    }
}

fn blocks_of(kind: BlockKind, idx: &BTreeSet<u64>) -> Result<BTreeSet<u64>, Unsupported> {
    let mut out = BTreeSet::new();
    for &n in idx {
        let (lo, hi) = block_range(kind, n).ok_or_else(|| Unsupported(format!("block {n} out of range")))?;
        if hi - lo > crate::ep::MAX_SPAN {
            return unsupported(format!("block {n} too large"));
        }
        out.extend(lo..hi);
    }
    Ok(out)
}

fn ep_of(d: &D) -> Result<Ep, Unsupported> {
    d.to_ep().ok_or_else(|| Unsupported(format!("not eventually periodic: {d}")))
}

pub fn set_nf(d: &D) -> Result<SetNf, Unsupported> {
    if let Some(e) = d.to_ep() {
        return Ok(match e.members() {
            Some(m) => SetNf::Fin(m),
            None => SetNf::Inf(e),
        });
    }
    let (kind, i) = match d {
        D::DyadicBlocks(i) => (BlockKind::Dyadic, i),
        D::WeightBlocks(i) => (BlockKind::Weight, i),
        D::Factorials(i) => (BlockKind::Factorial, i),
        _ => return unsupported(format!("no flat normal form for {d}")),
    };
    let ie = ep_of(i)?;
    if let Some(m) = ie.members() {
        return Ok(SetNf::Fin(blocks_of(kind, &m)?));
    }
    if ie.is_cofinite() && kind != BlockKind::Factorial {
        let missing = ie.complement().members().unwrap_or_default();
        let mut excluded = blocks_of(kind, &missing)?;
        if kind == BlockKind::Dyadic {
            excluded.insert(0);
        }
        let e = Ep::cofinite(&excluded).ok_or_else(|| Unsupported("span".into()))?;
        return Ok(SetNf::Inf(e));
    }
    Ok(SetNf::Blocks(kind, ie))
}

impl SetNf {
    pub fn is_finite(&self) -> bool {
        matches!(self, SetNf::Fin(_))
    }

    pub fn count(&self) -> Option<u64> {
        match self {
            SetNf::Fin(s) => Some(s.len() as u64),
            _ => None,
        }
    }

    /// Size of the complement, `None` when infinite.
    pub fn co_count(&self) -> Option<u64> {
        match self {
            SetNf::Inf(e) => e.co_count(),
            _ => None,
        }
    }

    pub fn min(&self) -> Option<u64> {
        match self {
            SetNf::Fin(s) => s.iter().next().copied(),
            SetNf::Inf(e) => e.min(),
            SetNf::Blocks(k, i) => i.min().and_then(|n| block_range(*k, n)).map(|r| r.0),
        }
    }

    pub fn max(&self) -> Option<u64> {
        match self {
            SetNf::Fin(s) => s.iter().next_back().copied(),
            _ => None,
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        match self {
            SetNf::Fin(s) => s.contains(&x),
            SetNf::Inf(e) => e.contains(x),
            SetNf::Blocks(k, i) => {
                let mut n = 0;
                while let Some((lo, hi)) = block_range(*k, n) {
                    if x < lo {
                        return false;
                    }
                    if x < hi {
                        return i.contains(n);
                    }
                    n += 1;
                }
                false
            }
        }
    }

    fn as_ep(&self) -> Option<Ep> {
        match self {
            SetNf::Fin(s) => Ep::finite(s),
            SetNf::Inf(e) => Some(e.clone()),
            SetNf::Blocks(..) => None,
        }
    }

    pub fn empty() -> SetNf {
        SetNf::Fin(BTreeSet::new())
    }
}

fn ep_pair(a: &SetNf, b: &SetNf) -> Option<(Ep, Ep)> {
    Some((a.as_ep()?, b.as_ep()?))
}

pub fn nf_equal(a: &SetNf, b: &SetNf) -> bool {
    a == b
}

/// Finite symmetric difference.
pub fn nf_e0(a: &SetNf, b: &SetNf) -> Result<bool, Unsupported> {
    use SetNf::*;
    Ok(match (a, b) {
        (Fin(_), Fin(_)) => true,
        (Blocks(k, i), Blocks(l, j)) => {
            if k != l {
                return unsupported("E_0 across block kinds");
            }
            i.sym_diff(j).map(|d| d.is_finite()).unwrap_or(false)
        }
        (Blocks(..), _) | (_, Blocks(..)) => false,
        _ => {
            let (x, y) = ep_pair(a, b).ok_or_else(|| Unsupported("span".into()))?;
            x.sym_diff(&y).ok_or_else(|| Unsupported("span".into()))?.is_finite()
        }
    })
}

/// `Σ_{n∈A△B} 1/(n+1) < ∞`.
pub fn nf_e2(a: &SetNf, b: &SetNf) -> Result<bool, Unsupported> {
    use BlockKind::*;
    use SetNf::*;
    Ok(match (a, b) {
        (Blocks(Factorial, _), Blocks(Factorial, _)) => true,
        (Blocks(Factorial, _), Fin(_)) | (Fin(_), Blocks(Factorial, _)) => true,
        (Blocks(Factorial, _), _) | (_, Blocks(Factorial, _)) => false,
        (Blocks(k, _), Blocks(l, _)) if k != l => return unsupported("E_2 across block kinds"),
        // every remaining block has weight bounded below, every infinite
        // eventually periodic set has positive density
        _ => nf_e0(a, b)?,
    })
}

/// Density-zero symmetric difference.
pub fn nf_z0(a: &SetNf, b: &SetNf) -> Result<bool, Unsupported> {
    // same case split as E_2: factorials are sparse, the other blocks and
    // infinite periodic sets have positive upper density
    nf_e2(a, b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaxKey {
    Empty,
    Max(u64),
    Infinite,
}

pub fn max_key(a: &SetNf) -> MaxKey {
    match a {
        SetNf::Fin(s) => s.iter().next_back().map_or(MaxKey::Empty, |&m| MaxKey::Max(m)),
        _ => MaxKey::Infinite,
    }
}

/// Doubled median; `Max(m)` reused as the value slot.
pub fn median_key(a: &SetNf) -> MaxKey {
    match a {
        SetNf::Fin(s) if s.is_empty() => MaxKey::Empty,
        SetNf::Fin(s) => {
            let v: Vec<u64> = s.iter().copied().collect();
            MaxKey::Max(crate::below::doubled_median(&v))
        }
        _ => MaxKey::Infinite,
    }
}

/// gcd of the positive members; `None` is `∞`.
pub fn gcd_key(a: &SetNf) -> Option<u64> {
    match a {
        SetNf::Fin(s) => {
            let g = s.iter().filter(|&&x| x > 0).fold(0u64, |g, &x| g.gcd(&x));
            (g > 0).then_some(g)
        }
        SetNf::Inf(e) => e.gcd(),
        SetNf::Blocks(BlockKind::Factorial, i) => i.min().and_then(|n| block_range(BlockKind::Factorial, n)).map(|r| r.0),
        // dyadic and weight blocks: an infinite index reaches a block with
        // two consecutive integers
        SetNf::Blocks(..) => Some(1),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LcmKey {
    Undefined,
    Finite(BigUint),
    Infinite,
}

pub fn lcm_key(a: &SetNf) -> LcmKey {
    match a {
        SetNf::Fin(s) => {
            let mut l = BigUint::one();
            let mut any = false;
            for &x in s.iter().filter(|&&x| x > 0) {
                any = true;
                l = l.lcm(&BigUint::from(x));
            }
            if any {
                LcmKey::Finite(l)
            } else {
                LcmKey::Undefined
            }
        }
        _ => LcmKey::Infinite,
    }
}

/// `cut_ω(W) = [0, sup W)`, keyed by its size.
pub fn omega_cut_key(a: &SetNf) -> Option<u64> {
    match a {
        SetNf::Fin(s) => Some(s.iter().next_back().copied().unwrap_or(0)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HullKey {
    Empty,
    Interval(u64, Option<u64>),
}

pub fn hull_key(a: &SetNf) -> HullKey {
    match a.min() {
        None => HullKey::Empty,
        Some(lo) => HullKey::Interval(lo, a.max()),
    }
}

/// A downward-closed set of rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QKey {
    Empty,
    Below(BigRational),
    All,
}

pub fn q_key(d: &D) -> Result<QKey, Unsupported> {
    match d {
        D::RatCut(a) => Ok(QKey::Below(ratcut_value(a)?)),
        D::QCut(a) => {
            let e = ep_of(a)?;
            if !e.is_finite() {
                return Ok(QKey::All);
            }
            Ok(match e.max() {
                None => QKey::Empty,
                Some(m) => QKey::Below(BigRational::from_integer(m.into())),
            })
        }
        _ => match set_nf(d)? {
            SetNf::Fin(s) => Ok(match s.iter().map(|&c| rat_decode(c)).max() {
                None => QKey::Empty,
                Some(r) => QKey::Below(r),
            }),
            _ => unsupported(format!("sup of an infinite set of rationals: {d}")),
        },
    }
}

// ---------------------------------------------------------------------------
// Column families.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Periodic(Vec<SetNf>),
    /// Column `c` is `T ∖ [0,c)` for an infinite `T`.
    Tail(Ep),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColNf {
    pub head: Vec<SetNf>,
    pub rule: Rule,
}

fn finite_pairs_to_cols(set: &BTreeSet<u64>) -> BTreeMap<u64, BTreeSet<u64>> {
    let mut cols: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for &x in set {
        let (c, k) = unpair(x);
        cols.entry(c).or_default().insert(k);
    }
    cols
}

pub fn col_nf(d: &D) -> Result<ColNf, Unsupported> {
    match d {
        D::Columns { cols, default } => {
            let start = cols.keys().next_back().map_or(0, |c| c + 1);
            let dflt = set_nf(default)?;
            let mut head = Vec::with_capacity(start as usize);
            for c in 0..start {
                head.push(match cols.get(&c) {
                    Some(x) => set_nf(x)?,
                    None => dflt.clone(),
                });
            }
            Ok(ColNf {
                head,
                rule: Rule::Periodic(vec![dflt]),
            })
        }
        D::Product(a, b) => {
            let ia = ep_of(a)?;
            let col = set_nf(b)?;
            let pick = |c: u64| if ia.contains(c) { col.clone() } else { SetNf::empty() };
            Ok(ColNf {
                head: (0..ia.start()).map(pick).collect(),
                rule: Rule::Periodic((ia.start()..ia.start() + ia.period()).map(pick).collect()),
            })
        }
        D::Tails(a) => match set_nf(a)? {
            SetNf::Fin(s) => {
                let top = s.iter().next_back().map_or(0, |m| m + 1);
                Ok(ColNf {
                    head: (0..top)
                        .map(|c| SetNf::Fin(s.iter().copied().filter(|&k| k >= c).collect()))
                        .collect(),
                    rule: Rule::Periodic(vec![SetNf::empty()]),
                })
            }
            SetNf::Inf(e) => Ok(ColNf {
                head: vec![],
                rule: Rule::Tail(e),
            }),
            SetNf::Blocks(..) => unsupported("tails of a block set"),
        },
        _ => match d.to_ep() {
            Some(e) if e.is_finite() => {
                let cols = finite_pairs_to_cols(&e.members().unwrap());
                let top = cols.keys().next_back().map_or(0, |c| c + 1);
                Ok(ColNf {
                    head: (0..top)
                        .map(|c| SetNf::Fin(cols.get(&c).cloned().unwrap_or_default()))
                        .collect(),
                    rule: Rule::Periodic(vec![SetNf::empty()]),
                })
            }
            Some(e) if e.is_cofinite() => {
                let missing = finite_pairs_to_cols(&e.complement().members().unwrap());
                let top = missing.keys().next_back().map_or(0, |c| c + 1);
                let mut head = Vec::new();
                for c in 0..top {
                    let m = missing.get(&c).cloned().unwrap_or_default();
                    head.push(SetNf::Inf(Ep::cofinite(&m).ok_or_else(|| Unsupported("span".into()))?));
                }
                Ok(ColNf {
                    head,
                    rule: Rule::Periodic(vec![SetNf::Inf(Ep::all())]),
                })
            }
            _ => unsupported(format!("no column normal form for {d}")),
        },
    }
}

impl ColNf {
    pub fn column(&self, c: u64) -> SetNf {
        if let Some(x) = self.head.get(c as usize) {
            return x.clone();
        }
        match &self.rule {
            Rule::Periodic(t) => t[((c - self.head.len() as u64) % t.len() as u64) as usize].clone(),
            Rule::Tail(e) => {
                let cut = Ep::finite(&(0..c).collect()).map(|f| f.complement());
                match cut.and_then(|f| e.intersection(&f)) {
                    Some(x) => SetNf::Inf(x),
                    None => SetNf::Inf(e.clone()),
                }
            }
        }
    }

    fn period(&self) -> u64 {
        match &self.rule {
            Rule::Periodic(t) => t.len() as u64,
            Rule::Tail(_) => 1,
        }
    }

    /// Columns up to the point where both families repeat.
    fn horizon(&self, o: &ColNf) -> u64 {
        let start = self.head.len().max(o.head.len()) as u64;
        start + self.period().lcm(&o.period())
    }

    /// Distinct columns of a periodic family.
    fn column_set(&self) -> Option<Vec<SetNf>> {
        let Rule::Periodic(t) = &self.rule else {
            return None;
        };
        let mut out: Vec<SetNf> = Vec::new();
        for x in self.head.iter().chain(t.iter()) {
            if !out.contains(x) {
                out.push(x.clone());
            }
        }
        Some(out)
    }

    fn tail_base(&self) -> Option<&Ep> {
        match &self.rule {
            Rule::Tail(e) => Some(e),
            _ => None,
        }
    }
}

fn tail_e0(a: &Ep, b: &Ep) -> Result<bool, Unsupported> {
    Ok(a.sym_diff(b).ok_or_else(|| Unsupported("span".into()))?.is_finite())
}

pub fn cols_equal(a: &ColNf, b: &ColNf) -> Result<bool, Unsupported> {
    match (a.tail_base(), b.tail_base()) {
        (Some(x), Some(y)) => Ok(a.head == b.head && x == y),
        (None, None) => Ok((0..a.horizon(b)).all(|c| a.column(c) == b.column(c))),
        _ => Ok(false),
    }
}

/// Whole families E_0: finitely many differences in total.
pub fn cols_e0(a: &ColNf, b: &ColNf) -> Result<bool, Unsupported> {
    match (a.tail_base(), b.tail_base()) {
        (Some(x), Some(y)) => tail_e0(x, y),
        (None, None) => {
            let h = a.horizon(b);
            let rep_start = h - a.period().lcm(&b.period());
            for c in 0..h {
                let (x, y) = (a.column(c), b.column(c));
                if c >= rep_start {
                    if x != y {
                        return Ok(false);
                    }
                } else if !nf_e0(&x, &y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(false),
    }
}

pub fn cols_e1(a: &ColNf, b: &ColNf) -> Result<bool, Unsupported> {
    match (a.tail_base(), b.tail_base()) {
        (Some(x), Some(y)) => tail_e0(x, y),
        (None, None) => {
            let h = a.horizon(b);
            let rep_start = h - a.period().lcm(&b.period());
            Ok((rep_start..h).all(|c| a.column(c) == b.column(c)))
        }
        _ => Ok(false),
    }
}

pub fn cols_e3(a: &ColNf, b: &ColNf) -> Result<bool, Unsupported> {
    // a tail column T ∖ [0,c) is E_0 to T itself
    let rep = |f: &ColNf, c: u64| -> SetNf {
        match f.tail_base() {
            Some(t) if c as usize >= f.head.len() => SetNf::Inf(t.clone()),
            _ => f.column(c),
        }
    };
    let h = a.horizon(b);
    for c in 0..h {
        if !nf_e0(&rep(a, c), &rep(b, c))? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn cols_eset(a: &ColNf, b: &ColNf) -> Result<bool, Unsupported> {
    match (a.column_set(), b.column_set()) {
        (Some(x), Some(y)) => Ok(x.len() == y.len() && x.iter().all(|c| y.contains(c))),
        (None, None) => cols_equal(a, b),
        _ => Ok(false),
    }
}

// ---------------------------------------------------------------------------
// Binary relations.

fn edge_list(s: &BTreeSet<u64>) -> (Vec<u64>, Vec<(usize, usize)>) {
    let pairs: Vec<(u64, u64)> = s.iter().map(|&e| unpair(e)).collect();
    let verts: BTreeSet<u64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    let verts: Vec<u64> = verts.into_iter().collect();
    let idx = |x: u64| verts.binary_search(&x).unwrap();
    let edges = pairs.iter().map(|&(u, v)| (idx(u), idx(v))).collect();
    (verts, edges)
}

/// Largest vertex support handled by brute force.
pub const MAX_ISO_VERTICES: usize = 8;

/// Isomorphism of two finite binary relations (every other vertex isolated).
pub fn finite_relations_isomorphic(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> Result<bool, Unsupported> {
    let (va, ea) = edge_list(a);
    let (vb, eb) = edge_list(b);
    if va.len() != vb.len() || ea.len() != eb.len() {
        return Ok(false);
    }
    if va.len() > MAX_ISO_VERTICES {
        return unsupported(format!("{} vertices", va.len()));
    }
    let n = va.len();
    let target: BTreeSet<(usize, usize)> = eb.into_iter().collect();
    let mut perm: Vec<usize> = (0..n).collect();
    Ok(permutations_any(&mut perm, 0, &mut |p| {
        ea.iter().all(|&(u, v)| target.contains(&(p[u], p[v])))
    }))
}

fn permutations_any(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if k == p.len() {
        return f(p);
    }
    for i in k..p.len() {
        p.swap(k, i);
        if permutations_any(p, k + 1, f) {
            p.swap(k, i);
            return true;
        }
        p.swap(k, i);
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Card {
    Finite(u64),
    Infinite,
}

/// `(|A|, |Aᶜ|)`.
pub fn cardinalities(d: &D) -> Result<(Card, Card), Unsupported> {
    let card = |o: Option<u64>| o.map_or(Card::Infinite, Card::Finite);
    // the star on ℕ ∪ {★}: leaves are A, isolated vertices its complement
    if let D::Star(a) = d {
        let n = set_nf(a)?;
        return Ok((card(n.count()), card(n.co_count())));
    }
    if let Ok(n) = set_nf(d) {
        return Ok((card(n.count()), card(n.co_count())));
    }
    let c = col_nf(d)?;
    let total = |f: &dyn Fn(&SetNf) -> Option<u64>| -> Card {
        let Rule::Periodic(t) = &c.rule else {
            return Card::Infinite;
        };
        if t.iter().any(|x| f(x) != Some(0)) {
            return Card::Infinite;
        }
        let mut n = 0;
        for x in &c.head {
            match f(x) {
                Some(k) => n += k,
                None => return Card::Infinite,
            }
        }
        Card::Finite(n)
    };
    Ok((total(&|x: &SetNf| x.count()), total(&|x: &SetNf| x.co_count())))
}

// ---------------------------------------------------------------------------
// Groups.

fn group_subset(g: &ComputableGroup, d: &D) -> Result<BTreeSet<u64>, Unsupported> {
    match set_nf(d)? {
        SetNf::Fin(s) if s.iter().all(|&x| g.contains(x)) => Ok(s),
        _ => unsupported(format!("{d} is not a finite subset of {g}")),
    }
}

fn translate(g: &ComputableGroup, gamma: u64, s: &BTreeSet<u64>) -> BTreeSet<u64> {
    s.iter().filter_map(|&x| g.mul(gamma, x)).collect()
}

/// Functions `G → P(ℕ)` given as column descriptors over the group domain.
fn group_function(g: &ComputableGroup, d: &D) -> Result<Vec<SetNf>, Unsupported> {
    let n = g.order().ok_or_else(|| Unsupported("infinite group".into()))?;
    let c = col_nf(d)?;
    let beyond_empty = match &c.rule {
        Rule::Periodic(t) => t.iter().all(|x| *x == SetNf::empty()),
        Rule::Tail(_) => false,
    };
    if !beyond_empty || (n..c.head.len() as u64).any(|i| c.column(i) != SetNf::empty()) {
        return unsupported(format!("{d} has columns outside {g}"));
    }
    Ok((0..n).map(|i| c.column(i)).collect())
}

/// `(γ·φ)(g) = φ(gγ⁻¹)`.
pub fn act_function(g: &ComputableGroup, gamma: u64, phi: &[SetNf]) -> Vec<SetNf> {
    let gi = g.inv(gamma).unwrap();
    (0..phi.len() as u64)
        .map(|x| phi[g.mul(x, gi).unwrap() as usize].clone())
        .collect()
}

/// `γ_i` for generator `x_i`, `i ≥ 1`: the group elements cycled in code order.
pub fn fomega_generator(g: &ComputableGroup, i: u64) -> u64 {
    let n = g.order().unwrap_or(1).max(1);
    (i - 1) % n
}

// ---------------------------------------------------------------------------

/// `limit` of an n-c.e. tuple carried as columns.
pub fn nce_limit(d: &D) -> Result<Ep, Unsupported> {
    let D::Columns { cols, default } = d else {
        return unsupported(format!("{d} is not an n-c.e. tuple"));
    };
    if set_nf(default)? != SetNf::empty() {
        return unsupported("tuple with nonempty default");
    }
    let n = cols.keys().next_back().map_or(0, |c| c + 1);
    let comp = |i: u64| -> Result<Ep, Unsupported> {
        match cols.get(&i) {
            Some(x) => ep_of(x),
            None => Ok(Ep::empty()),
        }
    };
    let span = || Unsupported("span".into());
    let mut out = Ep::empty();
    let mut i = 0;
    while i < n {
        let a = comp(i)?;
        let b = if i + 1 < n { comp(i + 1)? } else { Ep::empty() };
        out = out.union(&a.difference(&b).ok_or_else(span)?).ok_or_else(span)?;
        i += 2;
    }
    Ok(out)
}

fn union_find_classes(pairs: impl Iterator<Item = (u64, u64)>) -> BTreeMap<u64, u64> {
    let mut parent: BTreeMap<u64, u64> = BTreeMap::new();
    fn find(p: &mut BTreeMap<u64, u64>, x: u64) -> u64 {
        let mut r = x;
        while let Some(&q) = p.get(&r) {
            if q == r {
                break;
            }
            r = q;
        }
        r
    }
    for (a, b) in pairs {
        parent.entry(a).or_insert(a);
        parent.entry(b).or_insert(b);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent.insert(hi, lo);
        }
    }
    let keys: Vec<u64> = parent.keys().copied().collect();
    keys.into_iter().map(|k| (k, find(&mut parent, k))).collect()
}

/// Equivalence generated by a finite set of pair codes.
pub fn closure_related(pairs: &BTreeSet<u64>, a: u64, b: u64) -> bool {
    if a == b {
        return true;
    }
    let cls = union_find_classes(pairs.iter().map(|&x| unpair(x)));
    matches!((cls.get(&a), cls.get(&b)), (Some(x), Some(y)) if x == y)
}

fn nat(d: &D) -> Result<u64, Unsupported> {
    nat_of(d).ok_or_else(|| Unsupported(format!("{d} does not carry a natural")))
}

pub fn oracle_decide(r: &RelationId, a: &D, b: &D) -> Result<bool, Unsupported> {
    use RelationId as R;
    match r {
        R::EqCe => {
            if let (Ok(x), Ok(y)) = (set_nf(a), set_nf(b)) {
                return Ok(x == y);
            }
            if let (Ok(x), Ok(y)) = (q_key(a), q_key(b)) {
                if matches!((a, b), (D::RatCut(_) | D::QCut(_), D::RatCut(_) | D::QCut(_))) {
                    return Ok(x == y);
                }
            }
            match (a, b) {
                (D::ResidueDyadic(x), D::ResidueDyadic(y)) => cols_equal(&col_nf(x)?, &col_nf(y)?),
                _ => cols_equal(&col_nf(a)?, &col_nf(b)?),
            }
        }
        R::E0 => match (set_nf(a), set_nf(b)) {
            (Ok(x), Ok(y)) => nf_e0(&x, &y),
            _ => cols_e0(&col_nf(a)?, &col_nf(b)?),
        },
        R::E1 => cols_e1(&col_nf(a)?, &col_nf(b)?),
        R::E2 => nf_e2(&set_nf(a)?, &set_nf(b)?),
        R::E3 => cols_e3(&col_nf(a)?, &col_nf(b)?),
        R::Z0 => match (a, b) {
            (D::ResidueDyadic(x), D::ResidueDyadic(y)) => cols_e3(&col_nf(x)?, &col_nf(y)?),
            _ => nf_z0(&set_nf(a)?, &set_nf(b)?),
        },
        R::Eset => match (a, b) {
            (D::Variants(x), D::Variants(y)) => nf_e0(&set_nf(x)?, &set_nf(y)?),
            (D::TaggedVariants(x), D::TaggedVariants(y)) => cols_e3(&col_nf(x)?, &col_nf(y)?),
            (D::IsoCopies(x), D::IsoCopies(y)) => finite_relations_isomorphic(&finite_set(x)?, &finite_set(y)?),
            _ => cols_eset(&col_nf(a)?, &col_nf(b)?),
        },
        R::Emin => Ok(set_nf(a)?.min() == set_nf(b)?.min()),
        R::Emax => Ok(max_key(&set_nf(a)?) == max_key(&set_nf(b)?)),
        R::Emed => Ok(median_key(&set_nf(a)?) == median_key(&set_nf(b)?)),
        R::Egcd => Ok(gcd_key(&set_nf(a)?) == gcd_key(&set_nf(b)?)),
        R::Elcm => Ok(lcm_key(&set_nf(a)?) == lcm_key(&set_nf(b)?)),
        R::EOmega => Ok(omega_cut_key(&set_nf(a)?) == omega_cut_key(&set_nf(b)?)),
        R::HOmega => Ok(hull_key(&set_nf(a)?) == hull_key(&set_nf(b)?)),
        R::EQ => Ok(q_key(a)? == q_key(b)?),
        R::IsoBin | R::CompIsoBin => match (a, b) {
            (D::TreeCode(x), D::TreeCode(y)) if *r == R::IsoBin => cols_eset(&col_nf(x)?, &col_nf(y)?),
            (D::Star(_), D::Star(_)) => Ok(cardinalities(a)? == cardinalities(b)?),
            _ => finite_relations_isomorphic(&finite_set(a)?, &finite_set(b)?),
        },
        R::Eq1 => Ok(cardinalities(a)? == cardinalities(b)?),
        R::EqM => {
            let class = |d: &D| -> Result<u8, Unsupported> {
                Ok(match cardinalities(d)? {
                    (Card::Finite(0), _) => 0,
                    (_, Card::Finite(0)) => 1,
                    _ => 2,
                })
            };
            Ok(class(a)? == class(b)?)
        }
        R::EqT => {
            // every descriptor in the class is computable
            cardinalities(a)?;
            cardinalities(b)?;
            Ok(true)
        }
        R::Translation(g) => {
            let (x, y) = (group_subset(g, a)?, group_subset(g, b)?);
            let els = g.elements().ok_or_else(|| Unsupported("infinite group".into()))?;
            Ok(els.iter().any(|&gamma| translate(g, gamma, &x) == y))
        }
        R::UGamma(g) => {
            let (x, y) = (group_function(g, a)?, group_function(g, b)?);
            let els = g.elements().unwrap();
            Ok(els.iter().any(|&gamma| act_function(g, gamma, &x) == y))
        }
        R::UFomega(g) => {
            // orbit of the generated F_ω action, by search over generators
            let (x, y) = (group_function(g, a)?, group_function(g, b)?);
            let n = g.order().unwrap();
            let mut seen = vec![x.clone()];
            let mut queue = VecDeque::from([x]);
            while let Some(phi) = queue.pop_front() {
                if phi == y {
                    return Ok(true);
                }
                for i in 1..=n {
                    let gamma = fomega_generator(g, i);
                    for gg in [gamma, g.inv(gamma).unwrap()] {
                        let next = act_function(g, gg, &phi);
                        if !seen.contains(&next) {
                            seen.push(next.clone());
                            queue.push_back(next);
                        }
                    }
                }
            }
            Ok(false)
        }
        R::EqNce => Ok(nce_limit(a)? == nce_limit(b)?),
        R::EqN(n) => {
            let top = n.saturating_sub(1);
            Ok(nat(a)?.min(top) == nat(b)?.min(top))
        }
        R::EqNat => Ok(nat(a)? == nat(b)?),
        R::TwoClass(s) => Ok(s.contains(nat(a)?) == s.contains(nat(b)?)),
        R::OneClass(s) => {
            let (x, y) = (nat(a)?, nat(b)?);
            Ok(x == y || (s.contains(x) && s.contains(y)))
        }
        R::CeRelation(p) => Ok(closure_related(&finite_set(p)?, nat(a)?, nat(b)?)),
        R::Uce => {
            let ((e, x), (f, y)) = (unpair(nat(a)?), unpair(nat(b)?));
            if e != f {
                return Ok(false);
            }
            let pairs = crate::basic::script_pairs(e)
                .ok_or_else(|| Unsupported(format!("program {e} is not a script")))?;
            Ok(closure_related(&pairs, x, y))
        }
    }
}

fn finite_set(d: &D) -> Result<BTreeSet<u64>, Unsupported> {
    match set_nf(d)? {
        SetNf::Fin(s) => Ok(s),
        _ => unsupported(format!("{d} is not finite")),
    }
}

/// Column `m` of `Variants(A)` as a flat descriptor.
pub fn variant_column(a: &D, m: u64) -> D {
    let s = binary_string(m);
    let len = s.len() as u64;
    let ones = s.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64);
    D::union(D::finite(ones), D::difference(a.clone(), D::finite(0..len)))
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::pair;
    use proptest::prelude::*;

    fn dec(r: RelationId, a: &str, b: &str) -> bool {
        oracle_decide(&r, &a.parse().unwrap(), &b.parse().unwrap()).unwrap()
    }

    #[test]
    fn documented_examples() {
        assert!(dec(RelationId::E0, "finite(1)", "finite(2)"));
        assert!(dec(RelationId::Emin, "finite(2,9)", "finite(2)"));
        assert!(!dec(RelationId::E2, "cofinite()", "prog(0,2)"));
    }

    #[test]
    fn harmonic_divergence_behind_e2_example() {
        // partial sums of 1/(n+1) over the odds pass every bound
        let mut s = 0.0f64;
        let mut n = 1u64;
        while s < 4.0 {
            s += 1.0 / (n as f64 + 1.0);
            n += 2;
            assert!(n < 1 << 20);
        }
    }

    #[test]
    fn block_normal_forms() {
        // dyadic over a cofinite index is cofinite
        let d: D = "dyadic(cofinite(1))".parse().unwrap();
        let nf = set_nf(&d).unwrap();
        assert_eq!(nf, SetNf::Inf(Ep::cofinite(&[0, 2, 3].into()).unwrap()));
        let f: D = "factorials(prog(0,1))".parse().unwrap();
        assert!(matches!(set_nf(&f).unwrap(), SetNf::Blocks(BlockKind::Factorial, _)));
        assert_eq!(gcd_key(&set_nf(&f).unwrap()), Some(1));
        let g: D = "factorials(prog(2,1))".parse().unwrap();
        assert_eq!(gcd_key(&set_nf(&g).unwrap()), Some(6));
    }

    #[test]
    fn e2_and_z0_on_blocks() {
        let r = |a: &str, b: &str| dec(RelationId::E2, a, b);
        assert!(r("wblocks(prog(0,2))", "wblocks(union(prog(0,2),finite(3)))"));
        assert!(!r("wblocks(prog(0,2))", "wblocks(prog(0,4))"));
        assert!(r("factorials(prog(0,2))", "factorials(prog(1,2))"));
        assert!(dec(RelationId::Z0, "dyadic(prog(0,2))", "dyadic(union(prog(0,2),finite(1)))"));
        assert!(!dec(RelationId::Z0, "dyadic(prog(0,2))", "dyadic(prog(1,2))"));
    }

    #[test]
    fn column_relations() {
        let a: D = "columns(finite();0:finite(1);2:prog(0,2))".parse().unwrap();
        let b: D = "columns(finite();0:finite(2);2:prog(0,2))".parse().unwrap();
        assert!(dec(RelationId::E3, &a.to_string(), &b.to_string()));
        assert!(dec(RelationId::E1, &a.to_string(), &b.to_string()));
        assert!(dec(RelationId::E0, &a.to_string(), &b.to_string()));
        assert!(!dec(RelationId::EqCe, &a.to_string(), &b.to_string()));
        // tails: column x is T ∖ [0,x)
        assert!(dec(RelationId::E1, "tails(prog(0,2))", "tails(union(prog(0,2),finite(3)))"));
        // they differ only at <x,3> for x ≤ 3
        assert!(dec(RelationId::E0, "tails(prog(0,2))", "tails(union(prog(0,2),finite(3)))"));
        assert!(!dec(RelationId::E0, "tails(prog(0,2))", "tails(prog(1,2))"));
        assert!(!dec(RelationId::E1, "tails(prog(0,2))", "tails(prog(1,2))"));
        // set of columns ignores order and multiplicity
        assert!(dec(
            RelationId::Eset,
            "columns(finite(1);0:finite(2))",
            "columns(finite(1);3:finite(2);5:finite(2))"
        ));
        assert!(!dec(RelationId::Eset, "columns(finite(1))", "columns(finite(1);0:finite(2))"));
    }

    #[test]
    fn product_columns() {
        assert!(dec(RelationId::E3, "product(prog(0,1),finite(1))", "product(prog(0,1),finite(2))"));
        assert!(!dec(RelationId::E3, "product(prog(0,1),finite(1))", "product(prog(0,1),prog(0,2))"));
    }

    #[test]
    fn cardinality_relations() {
        assert!(dec(RelationId::Eq1, "finite(1,2)", "finite(5,9)"));
        assert!(!dec(RelationId::Eq1, "cofinite(1,2)", "cofinite(5)"));
        assert!(dec(RelationId::EqM, "cofinite(1,2)", "prog(0,2)"));
        assert!(!dec(RelationId::EqM, "finite()", "prog(0,2)"));
        assert!(dec(RelationId::EqT, "finite()", "prog(0,2)"));
    }

    #[test]
    fn isomorphism_of_finite_relations() {
        let e = |xs: &[(u64, u64)]| -> BTreeSet<u64> { xs.iter().map(|&(u, v)| pair(u, v)).collect() };
        assert!(finite_relations_isomorphic(&e(&[(0, 1)]), &e(&[(5, 3)])).unwrap());
        assert!(!finite_relations_isomorphic(&e(&[(0, 1)]), &e(&[(3, 3)])).unwrap());
        assert!(finite_relations_isomorphic(&e(&[(0, 1), (1, 2)]), &e(&[(7, 4), (4, 9)])).unwrap());
        assert!(!finite_relations_isomorphic(&e(&[(0, 1), (1, 2)]), &e(&[(1, 0), (1, 2)])).unwrap());
    }

    #[test]
    fn rational_cuts() {
        assert!(!dec(RelationId::EQ, "ratcut(finite(0))", "ratcut(finite(1))"));
        assert!(dec(RelationId::EQ, "ratcut(finite(0))", "ratcut(finite(0))"));
        // Σ_{n≥1} 3^{-(n+1)} = 1/6 ≠ 1/3
        assert!(!dec(RelationId::EQ, "ratcut(finite(0))", "ratcut(prog(1,1))"));
        assert!(dec(RelationId::EQ, "qcut(finite(0,4))", "qcut(finite(4))"));
        assert!(!dec(RelationId::EQ, "qcut(finite())", "qcut(finite(0))"));
    }

    #[test]
    fn group_orbits() {
        let c3 = ComputableGroup::Cyclic(3);
        assert!(dec(RelationId::Translation(c3), "finite(0,1)", "finite(1,2)"));
        assert!(!dec(RelationId::Translation(c3), "finite(0)", "finite(0,1)"));
        let a = "columns(finite();0:finite(1))";
        let b = "columns(finite();2:finite(1))";
        assert!(dec(RelationId::UGamma(c3), a, b));
        assert!(dec(RelationId::UFomega(c3), a, b));
        assert!(!dec(RelationId::UGamma(c3), a, "columns(finite();2:finite(4))"));
    }

    #[test]
    fn nce_limits() {
        assert!(dec(
            RelationId::EqNce,
            "columns(finite();0:finite(1,2);1:finite(2))",
            "columns(finite();0:finite(1))"
        ));
    }

    #[test]
    fn naturals() {
        let n = |x: u64| D::finite([x]);
        let r = RelationId::EqN(3);
        assert!(oracle_decide(&r, &n(2), &n(9)).unwrap());
        assert!(!oracle_decide(&r, &n(1), &n(9)).unwrap());
        let p: BTreeSet<u64> = [pair(1, 2), pair(2, 3)].into();
        assert!(closure_related(&p, 1, 3));
        assert!(!closure_related(&p, 1, 4));
    }

    fn small_flat() -> impl Strategy<Value = D> {
        prop_oneof![
            proptest::collection::btree_set(0u64..12, 0..5).prop_map(D::Finite),
            proptest::collection::btree_set(0u64..12, 0..3).prop_map(D::Cofinite),
            (0u64..8, 1u64..4).prop_map(|(a, d)| D::Progression { a, d }),
        ]
    }

    proptest! {
        #[test]
        fn flat_oracles_are_equivalences(a in small_flat(), b in small_flat(), c in small_flat()) {
            for r in [RelationId::EqCe, RelationId::E0, RelationId::E2, RelationId::Z0, RelationId::Emin,
                      RelationId::Emax, RelationId::Emed, RelationId::Egcd, RelationId::Elcm,
                      RelationId::EOmega, RelationId::HOmega, RelationId::Eq1, RelationId::EqM] {
                let d = |x: &D, y: &D| oracle_decide(&r, x, y).unwrap();
                prop_assert!(d(&a, &a));
                prop_assert_eq!(d(&a, &b), d(&b, &a));
                if d(&a, &b) && d(&b, &c) {
                    prop_assert!(d(&a, &c));
                }
            }
        }

        #[test]
        fn min_matches_gcd_of_factorial_image(f in proptest::collection::btree_set(0u64..=MAX_FACTORIAL_INDEX, 0..5)) {
            // gcd{(n+1)! : n∈F} = (min F + 1)!
            let img = set_nf(&D::Factorials(Box::new(D::Finite(f.clone())))).unwrap();
            let want = f.iter().next().map(|&n| (1..=n + 1).product::<u64>());
            prop_assert_eq!(gcd_key(&img), want);
        }
    }
}
