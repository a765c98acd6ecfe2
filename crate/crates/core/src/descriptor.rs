//! Closed-form set descriptors: the ground-truth side of every check.
//!
//! The first seven shapes describe input sets. The rest are the exact
//! images that constructions produce, kept symbolic so that relations on
//! them can be decided without enumerating anything.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ep::Ep;
use crate::ops::Op;
use crate::pairing::{pair, tuple_decode, unpair};
use crate::program::SetProgram;
use crate::relations::order;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Descriptor {
    Finite(BTreeSet<u64>),
    Cofinite(BTreeSet<u64>),
    /// `{a, a+d, a+2d, ...}`; `d = 0` is `{a}`.
    Progression { a: u64, d: u64 },
    /// Column `c` is `cols[c]` when listed, `default` otherwise.
    Columns {
        cols: BTreeMap<u64, Descriptor>,
        default: Box<Descriptor>,
    },
    /// `⋃_{n∈I} [2^n, 2^{n+1})`.
    DyadicBlocks(Box<Descriptor>),
    Union(Box<Descriptor>, Box<Descriptor>),
    Difference(Box<Descriptor>, Box<Descriptor>),
    /// `{<a,b> : a∈A, b∈B}`.
    Product(Box<Descriptor>, Box<Descriptor>),
    /// Column `x` is `A ∖ {0..x-1}`.
    Tails(Box<Descriptor>),
    /// `⋃_{n∈A} I_n` over the harmonic-weight blocks.
    WeightBlocks(Box<Descriptor>),
    /// `{(n+1)! : n∈A}`.
    Factorials(Box<Descriptor>),
    /// Column `m` is `s_m ⌢ (A ∖ |s_m|)`.
    Variants(Box<Descriptor>),
    /// Column `<n,m>` is `1^n 0 s_m ⌢ (A_n ∖ |s_m|)`, `A_n` the columns of the base.
    TaggedVariants(Box<Descriptor>),
    /// `⋃_n π_n(DyadicBlocks(A_n))` with `π_n(y) = 2^n - 1 + y·2^{n+1}`.
    ResidueDyadic(Box<Descriptor>),
    /// Edges `<0, n+1>` for `n∈A`.
    Star(Box<Descriptor>),
    /// Edge set of the duplicated column tree of the base.
    TreeCode(Box<Descriptor>),
    /// Column family of all finite-support copies of a finite relation,
    /// padded with every marked finite set.
    IsoCopies(Box<Descriptor>),
    /// Codes of rationals below `Σ_{n∈A} 3^{-(n+1)}`.
    RatCut(Box<Descriptor>),
    /// Codes of rationals below some element of `A`, read as integers.
    QCut(Box<Descriptor>),
}

use Descriptor as D;

fn bx(d: Descriptor) -> Box<Descriptor> {
    Box::new(d)
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("unsupported descriptor: {0}")]
pub struct Unsupported(pub String);

impl Descriptor {
    pub fn empty() -> D {
        D::Finite(BTreeSet::new())
    }

    pub fn all() -> D {
        D::Cofinite(BTreeSet::new())
    }

    pub fn finite<I: IntoIterator<Item = u64>>(xs: I) -> D {
        D::Finite(xs.into_iter().collect())
    }

    pub fn cofinite<I: IntoIterator<Item = u64>>(xs: I) -> D {
        D::Cofinite(xs.into_iter().collect())
    }

    pub fn columns(default: D, cols: Vec<(u64, D)>) -> D {
        D::Columns {
            cols: cols.into_iter().collect(),
            default: bx(default),
        }
    }

    pub fn union(a: D, b: D) -> D {
        D::Union(bx(a), bx(b))
    }

    pub fn difference(a: D, b: D) -> D {
        D::Difference(bx(a), bx(b))
    }

    pub fn product(a: D, b: D) -> D {
        D::Product(bx(a), bx(b))
    }

    /// Column `c` as a descriptor, when it has one.
    pub fn column(&self, c: u64) -> Option<D> {
        match self {
            D::Columns { cols, default } => Some(cols.get(&c).unwrap_or(default).clone()),
            D::Product(a, b) => Some(if a.contains(c) { (**b).clone() } else { D::empty() }),
            D::Tails(a) => Some(D::difference((**a).clone(), D::finite(0..c))),
            D::Finite(s) => Some(D::Finite(
                s.iter().map(|&x| unpair(x)).filter(|p| p.0 == c).map(|p| p.1).collect(),
            )),
            _ => None,
        }
    }

    /// Exact membership.
    pub fn contains(&self, x: u64) -> bool {
        match self {
            D::Finite(s) => s.contains(&x),
            D::Cofinite(s) => !s.contains(&x),
            D::Progression { a, d } => {
                if *d == 0 {
                    x == *a
                } else {
                    x >= *a && (x - a).is_multiple_of(*d)
                }
            }
            D::Columns { cols, default } => {
                let (c, k) = unpair(x);
                cols.get(&c).unwrap_or(default).contains(k)
            }
            D::DyadicBlocks(i) => x >= 1 && i.contains(63 - x.leading_zeros() as u64),
            D::Union(a, b) => a.contains(x) || b.contains(x),
            D::Difference(a, b) => a.contains(x) && !b.contains(x),
            D::Product(a, b) => {
                let (c, k) = unpair(x);
                a.contains(c) && b.contains(k)
            }
            D::Tails(a) => {
                let (c, k) = unpair(x);
                k >= c && a.contains(k)
            }
            D::WeightBlocks(a) => a.contains(weight_block_of(x)),
            D::Factorials(a) => match factorial_index(x) {
                Some(n) => a.contains(n),
                None => false,
            },
            D::Variants(a) => {
                let (m, k) = unpair(x);
                let s = binary_string(m);
                if (k as usize) < s.len() {
                    s[k as usize]
                } else {
                    a.contains(k)
                }
            }
            D::TaggedVariants(a) => {
                let (col, k) = unpair(x);
                let (n, m) = unpair(col);
                let s = binary_string(m);
                if k < n {
                    true
                } else if k == n {
                    false
                } else if k - n - 1 < s.len() as u64 {
                    s[(k - n - 1) as usize]
                } else {
                    a.contains(pair(n, k - n - 1))
                }
            }
            D::ResidueDyadic(a) => {
                let n = x.trailing_ones() as u64;
                if n >= 63 {
                    return false;
                }
                let y = x >> (n + 1);
                y >= 1 && a.contains(pair(n, 63 - y.leading_zeros() as u64))
            }
            D::Star(a) => {
                let (u, v) = unpair(x);
                u == 0 && v >= 1 && a.contains(v - 1)
            }
            D::TreeCode(a) => tree_edge(a, x),
            D::IsoCopies(a) => iso_copies_member(a, x),
            D::RatCut(a) => match ratcut_value(a) {
                Ok(r) => order::rat_decode(x) < r,
                Err(_) => false,
            },
            D::QCut(a) => {
                let q = order::rat_decode(x);
                match a.to_ep() {
                    Some(e) if e.is_finite() => match e.max() {
                        Some(m) => q < BigRational::from_integer(BigInt::from(m)),
                        None => false,
                    },
                    Some(_) => true,
                    None => false,
                }
            }
        }
    }

    /// Eventually periodic normal form of a flat descriptor.
    pub fn to_ep(&self) -> Option<Ep> {
        match self {
            D::Finite(s) => Ep::finite(s),
            D::Cofinite(s) => Ep::cofinite(s),
            D::Progression { a, d } => Ep::progression(*a, *d),
            D::Union(a, b) => a.to_ep()?.union(&b.to_ep()?),
            D::Difference(a, b) => a.to_ep()?.difference(&b.to_ep()?),
            _ => None,
        }
    }

    /// Compiles to a program and the stage function after which the
    /// program agrees with the descriptor on any window `[0, M]`.
    pub fn compile(&self) -> (SetProgram, Settlement) {
        match self {
            D::Finite(s) => (SetProgram::finite(s.iter().copied()), Settlement::fixed(0)),
            D::Union(a, b) => {
                let (pa, sa) = a.compile();
                let (pb, sb) = b.compile();
                (SetProgram::comb(Op::Union, vec![pa, pb], vec![]), sa.max(sb))
            }
            D::Columns { cols, default } => {
                let (pd, sd) = default.compile();
                let mut args = vec![pd];
                let mut params = Vec::new();
                let mut st = sd;
                for (c, d) in cols {
                    let (p, s) = d.compile();
                    args.push(p);
                    params.push(*c);
                    st = st.max(s);
                }
                (SetProgram::comb(Op::Columns, args, params), st.max(Settlement::window(0)))
            }
            _ => (
                SetProgram::comb(Op::Decide, vec![], self.to_tokens()),
                Settlement::window(0),
            ),
        }
    }

    /// Same set, different enumeration schedule: finite parts are spread
    /// over stages `0..=spread` and infinite parts delayed by `spread`.
    pub fn compile_delayed(&self, spread: u64, salt: u64) -> (SetProgram, Settlement) {
        match self {
            D::Finite(s) if spread > 0 => {
                let items = s
                    .iter()
                    .map(|&x| (x, (x.wrapping_mul(2654435761).wrapping_add(salt)) % (spread + 1)));
                (SetProgram::scheduled(items), Settlement::fixed(spread))
            }
            _ => {
                let (p, s) = self.compile();
                if spread == 0 {
                    (p, s)
                } else {
                    (
                        SetProgram::comb(Op::Delay, vec![p], vec![spread]),
                        s.delayed(spread),
                    )
                }
            }
        }
    }

    pub fn to_tokens(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.push_tokens(&mut out);
        out
    }

    fn push_tokens(&self, out: &mut Vec<u64>) {
        let unary = |tag: u64, a: &D, out: &mut Vec<u64>| {
            out.push(tag);
            a.push_tokens(out);
        };
        match self {
            D::Finite(s) | D::Cofinite(s) => {
                out.push(if matches!(self, D::Finite(_)) { 0 } else { 1 });
                out.push(s.len() as u64);
                out.extend(s.iter().copied());
            }
            D::Progression { a, d } => out.extend([2, *a, *d]),
            D::Columns { cols, default } => {
                out.push(3);
                out.push(cols.len() as u64);
                for (c, d) in cols {
                    out.push(*c);
                    d.push_tokens(out);
                }
                default.push_tokens(out);
            }
            D::DyadicBlocks(a) => unary(4, a, out),
            D::Union(a, b) | D::Difference(a, b) | D::Product(a, b) => {
                out.push(match self {
                    D::Union(..) => 5,
                    D::Difference(..) => 6,
                    _ => 7,
                });
                a.push_tokens(out);
                b.push_tokens(out);
            }
            D::Tails(a) => unary(8, a, out),
            D::WeightBlocks(a) => unary(9, a, out),
            D::Factorials(a) => unary(10, a, out),
            D::Variants(a) => unary(11, a, out),
            D::TaggedVariants(a) => unary(12, a, out),
            D::ResidueDyadic(a) => unary(13, a, out),
            D::Star(a) => unary(14, a, out),
            D::TreeCode(a) => unary(15, a, out),
            D::IsoCopies(a) => unary(16, a, out),
            D::RatCut(a) => unary(17, a, out),
            D::QCut(a) => unary(18, a, out),
        }
    }

    pub fn from_tokens(tokens: &[u64]) -> Option<D> {
        let mut pos = 0;
        let d = Self::read_tokens(tokens, &mut pos, 0)?;
        (pos == tokens.len()).then_some(d)
    }

    fn read_tokens(t: &[u64], pos: &mut usize, depth: usize) -> Option<D> {
        if depth > 64 {
            return None;
        }
        let next = |pos: &mut usize| -> Option<u64> {
            let v = *t.get(*pos)?;
            *pos += 1;
            Some(v)
        };
        let tag = next(pos)?;
        let sub = |pos: &mut usize| Self::read_tokens(t, pos, depth + 1).map(bx);
        Some(match tag {
            0 | 1 => {
                let n = next(pos)? as usize;
                if n > t.len() {
                    return None;
                }
                let mut s = BTreeSet::new();
                for _ in 0..n {
                    s.insert(next(pos)?);
                }
                if tag == 0 {
                    D::Finite(s)
                } else {
                    D::Cofinite(s)
                }
            }
            2 => D::Progression {
                a: next(pos)?,
                d: next(pos)?,
            },
            3 => {
                let n = next(pos)? as usize;
                if n > t.len() {
                    return None;
                }
                let mut cols = BTreeMap::new();
                for _ in 0..n {
                    let c = next(pos)?;
                    cols.insert(c, *sub(pos)?);
                }
                D::Columns {
                    cols,
                    default: sub(pos)?,
                }
            }
            4 => D::DyadicBlocks(sub(pos)?),
            5 => D::Union(sub(pos)?, sub(pos)?),
            6 => D::Difference(sub(pos)?, sub(pos)?),
            7 => D::Product(sub(pos)?, sub(pos)?),
            8 => D::Tails(sub(pos)?),
            9 => D::WeightBlocks(sub(pos)?),
            10 => D::Factorials(sub(pos)?),
            11 => D::Variants(sub(pos)?),
            12 => D::TaggedVariants(sub(pos)?),
            13 => D::ResidueDyadic(sub(pos)?),
            14 => D::Star(sub(pos)?),
            15 => D::TreeCode(sub(pos)?),
            16 => D::IsoCopies(sub(pos)?),
            17 => D::RatCut(sub(pos)?),
            18 => D::QCut(sub(pos)?),
            _ => return None,
        })
    }

    /// Members below `bound`.
    pub fn members_below(&self, bound: u64) -> BTreeSet<u64> {
        (0..bound).filter(|&x| self.contains(x)).collect()
    }
}

/// Stage after which a compiled program is settled on `[0, M]`:
/// `fixed + M` when `per_window`, else `fixed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settlement {
    pub fixed: u64,
    pub per_window: bool,
}

impl Settlement {
    pub fn fixed(s: u64) -> Self {
        Settlement {
            fixed: s,
            per_window: false,
        }
    }

    pub fn window(offset: u64) -> Self {
        Settlement {
            fixed: offset,
            per_window: true,
        }
    }

    pub fn stage(&self, window: u64) -> u64 {
        self.fixed + if self.per_window { window } else { 0 }
    }

    pub fn max(self, o: Settlement) -> Settlement {
        Settlement {
            fixed: self.fixed.max(o.fixed),
            per_window: self.per_window || o.per_window,
        }
    }

    pub fn delayed(self, k: u64) -> Settlement {
        Settlement {
            fixed: self.fixed + k,
            per_window: self.per_window,
        }
    }
}

/// `descriptor_eval`.
pub fn descriptor_eval(d: &Descriptor, x: u64) -> bool {
    d.contains(x)
}

/// `descriptor_compile`.
pub fn descriptor_compile(d: &Descriptor) -> (SetProgram, Settlement) {
    d.compile()
}

/// The `m`-th binary string in length-lexicographic order, `s_0 = ""`.
pub fn binary_string(m: u64) -> Vec<bool> {
    // m + 1 in binary with the leading 1 dropped.
    let v = m + 1;
    let bits = 64 - v.leading_zeros();
    (0..bits - 1).rev().map(|i| (v >> i) & 1 == 1).collect()
}

/// Inverse of [`binary_string`].
pub fn binary_string_index(s: &[bool]) -> u64 {
    let mut v = 1u64;
    for &b in s {
        v = (v << 1) | b as u64;
    }
    v - 1
}

/// Left endpoints of the harmonic-weight blocks: `I_n = [b_n, b_{n+1})`,
/// each closed as soon as `Σ_{i∈I_n} 1/(i+1) ≥ 1`.
pub fn weight_block_starts(limit: u64) -> Vec<u64> {
    let mut starts = vec![0u64];
    let mut acc = 0.0f64;
    let mut i = 0u64;
    while i <= limit {
        acc += 1.0 / (i as f64 + 1.0);
        i += 1;
        if acc >= 1.0 - 1e-12 {
            // Close calls are rechecked exactly.
            let b = *starts.last().unwrap();
            if (acc - 1.0).abs() < 1e-9 && !exact_weight_at_least_one(b, i) {
                continue;
            }
            starts.push(i);
            acc = 0.0;
        }
    }
    starts
}

fn exact_weight_at_least_one(lo: u64, hi: u64) -> bool {
    let mut s = BigRational::zero();
    for i in lo..hi {
        s += BigRational::new(BigInt::one(), BigInt::from(i + 1));
    }
    s >= BigRational::one()
}

/// Index of the weight block containing `x`.
pub fn weight_block_of(x: u64) -> u64 {
    use std::sync::OnceLock;
    static STARTS: OnceLock<Vec<u64>> = OnceLock::new();
    let starts = STARTS.get_or_init(|| weight_block_starts(1 << 22));
    match starts.binary_search(&x) {
        Ok(i) => i as u64,
        Err(i) => i as u64 - 1,
    }
}

/// `n` with `(n+1)! = x`.
pub fn factorial_index(x: u64) -> Option<u64> {
    let mut f = 1u64;
    let mut n = 0u64;
    loop {
        f = f.checked_mul(n + 1)?;
        if f == x {
            return Some(n);
        }
        if f > x {
            return None;
        }
        n += 1;
    }
}

/// Tree node codes: root is 0; a path `[n, r, (k, r', (d))]` is `1 + h(path)`.
pub fn tree_node(path: &[u64]) -> Option<u64> {
    crate::pairing::tuple_encode(path).and_then(|c| c.checked_add(1))
}

fn tree_edge(a: &Descriptor, x: u64) -> bool {
    let (parent, child) = unpair(x);
    if child == 0 {
        return false;
    }
    let Some(path) = tuple_decode(child - 1) else {
        return false;
    };
    let expect_parent = |prefix: &[u64]| {
        if prefix.is_empty() {
            parent == 0
        } else {
            tree_node(prefix) == Some(parent)
        }
    };
    match path.len() {
        // branch node for column n, copy r
        2 => expect_parent(&[]),
        // element node k of column n under branch copy r
        4 => {
            let (n, k) = (path[0], path[2]);
            expect_parent(&path[..2]) && a.contains(pair(n, k))
        }
        // chain node at depth d (1..=k) below an element node
        5 => {
            let (n, k, d) = (path[0], path[2], path[4]);
            if d == 0 || d > k || !a.contains(pair(n, k)) {
                return false;
            }
            if d == 1 {
                expect_parent(&path[..4])
            } else {
                let mut p = path.clone();
                p[4] = d - 1;
                expect_parent(&p)
            }
        }
        _ => false,
    }
}

/// A finite-support permutation candidate `σ` with claimed inverse `τ`,
/// both given as lists of `<x, y>` codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub forward: BTreeMap<u64, u64>,
    pub backward: BTreeMap<u64, u64>,
}

impl Candidate {
    pub fn decode(q: u64) -> Candidate {
        let (p, pi) = unpair(q);
        let read = |code: u64| -> BTreeMap<u64, u64> {
            let mut m = BTreeMap::new();
            if code == 0 {
                return m;
            }
            if let Some(items) = tuple_decode(code - 1) {
                for it in items {
                    let (x, y) = unpair(it);
                    m.entry(x).or_insert(y);
                }
            }
            m
        };
        Candidate {
            forward: read(p),
            backward: read(pi),
        }
    }

    pub fn encode(&self) -> Option<u64> {
        let write = |m: &BTreeMap<u64, u64>| -> Option<u64> {
            if m.is_empty() {
                return Some(0);
            }
            let items: Vec<u64> = m.iter().map(|(&x, &y)| pair(x, y)).collect();
            crate::pairing::tuple_encode(&items).map(|c| c + 1)
        };
        crate::pairing::try_pair(write(&self.forward)?, write(&self.backward)?)
    }

    pub fn apply(&self, x: u64) -> u64 {
        self.forward.get(&x).copied().unwrap_or(x)
    }

    pub fn apply_inverse(&self, x: u64) -> u64 {
        self.backward.get(&x).copied().unwrap_or(x)
    }

    /// True when `σ` is a bijection of ℕ and `τ` is its inverse. The
    /// support is finite, so checking on it suffices.
    pub fn is_bijection(&self) -> bool {
        let support: BTreeSet<u64> = self
            .forward
            .iter()
            .chain(self.backward.iter())
            .flat_map(|(&x, &y)| [x, y])
            .collect();
        let image: BTreeSet<u64> = support.iter().map(|&x| self.apply(x)).collect();
        image.len() == support.len()
            && image == support
            && support.iter().all(|&x| self.apply_inverse(self.apply(x)) == x)
    }

    /// `σ` acting on an edge code `<u,v>`.
    pub fn act_edge(&self, e: u64) -> u64 {
        let (u, v) = unpair(e);
        pair(self.apply(u), self.apply(v))
    }

    pub fn act_edge_inverse(&self, e: u64) -> u64 {
        let (u, v) = unpair(e);
        pair(self.apply_inverse(u), self.apply_inverse(v))
    }
}

fn iso_copies_member(a: &Descriptor, x: u64) -> bool {
    let (col, y) = unpair(x);
    if col % 2 == 1 {
        let m = (col - 1) / 2;
        if y == 0 {
            return true;
        }
        match crate::pairing::set_decode(&num_bigint::BigUint::from(m)) {
            Some(f) => f.contains(&(y - 1)),
            None => false,
        }
    } else {
        let cand = Candidate::decode(col / 2);
        if !cand.is_bijection() {
            return y == 0;
        }
        y >= 1 && a.contains(cand.act_edge_inverse(y - 1))
    }
}

/// `Σ_{n∈A} 3^{-(n+1)}` exactly, for eventually periodic `A`.
pub fn ratcut_value(a: &Descriptor) -> Result<BigRational, Unsupported> {
    let e = a
        .to_ep()
        .ok_or_else(|| Unsupported(format!("ratcut base {a}")))?;
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    let mut sum = BigRational::zero();
    let mut w = third.clone();
    for n in 0..e.start() {
        if e.contains(n) {
            sum += &w;
        }
        w = &w * &third;
    }
    // Periodic tail: one period's worth of weight, scaled by the geometric
    // factor 1 / (1 - 3^{-p}).
    let p = e.period();
    let mut block = BigRational::zero();
    let mut wp = w.clone();
    for i in 0..p {
        if e.contains(e.start() + i) {
            block += &wp;
        }
        wp = &wp * &third;
    }
    let ratio = num_traits::pow(third, p as usize);
    sum += block / (BigRational::one() - ratio);
    Ok(sum)
}

// ---------------------------------------------------------------------------
// Text form.

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &BTreeSet<u64>| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            D::Finite(s) => write!(f, "finite({})", list(s)),
            D::Cofinite(s) => write!(f, "cofinite({})", list(s)),
            D::Progression { a, d } => write!(f, "prog({a},{d})"),
            D::Columns { cols, default } => {
                write!(f, "columns({default}")?;
                for (c, d) in cols {
                    write!(f, ";{c}:{d}")?;
                }
                write!(f, ")")
            }
            D::DyadicBlocks(a) => write!(f, "dyadic({a})"),
            D::Union(a, b) => write!(f, "union({a},{b})"),
            D::Difference(a, b) => write!(f, "diff({a},{b})"),
            D::Product(a, b) => write!(f, "product({a},{b})"),
            D::Tails(a) => write!(f, "tails({a})"),
            D::WeightBlocks(a) => write!(f, "wblocks({a})"),
            D::Factorials(a) => write!(f, "factorials({a})"),
            D::Variants(a) => write!(f, "variants({a})"),
            D::TaggedVariants(a) => write!(f, "tagged_variants({a})"),
            D::ResidueDyadic(a) => write!(f, "residue_dyadic({a})"),
            D::Star(a) => write!(f, "star({a})"),
            D::TreeCode(a) => write!(f, "tree({a})"),
            D::IsoCopies(a) => write!(f, "isocopies({a})"),
            D::RatCut(a) => write!(f, "ratcut({a})"),
            D::QCut(a) => write!(f, "qcut({a})"),
        }
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("descriptor parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<(), ParseError> {
        self.ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphabetic() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a constructor name");
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<u64, ParseError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| self.err("number out of range"))
    }

    fn numbers(&mut self) -> Result<BTreeSet<u64>, ParseError> {
        let mut out = BTreeSet::new();
        if self.peek() == Some(b')') {
            return Ok(out);
        }
        loop {
            out.insert(self.number()?);
            if self.peek() == Some(b',') {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn desc(&mut self, depth: usize) -> Result<Descriptor, ParseError> {
        if depth > 64 {
            return self.err("nesting too deep");
        }
        let name = self.ident()?;
        self.eat(b'(')?;
        let one = |p: &mut Parser| -> Result<Box<D>, ParseError> { Ok(bx(p.desc(depth + 1)?)) };
        let two = |p: &mut Parser| -> Result<(Box<D>, Box<D>), ParseError> {
            let a = bx(p.desc(depth + 1)?);
            p.eat(b',')?;
            let b = bx(p.desc(depth + 1)?);
            Ok((a, b))
        };
        let d = match name.as_str() {
            "finite" => D::Finite(self.numbers()?),
            "cofinite" => D::Cofinite(self.numbers()?),
            "prog" => {
                let a = self.number()?;
                self.eat(b',')?;
                let d = self.number()?;
                D::Progression { a, d }
            }
            "columns" => {
                let default = one(self)?;
                let mut cols = BTreeMap::new();
                while self.peek() == Some(b';') {
                    self.pos += 1;
                    let c = self.number()?;
                    self.eat(b':')?;
                    cols.insert(c, self.desc(depth + 1)?);
                }
                D::Columns { cols, default }
            }
            "dyadic" => D::DyadicBlocks(one(self)?),
            "union" => {
                let (a, b) = two(self)?;
                D::Union(a, b)
            }
            "diff" => {
                let (a, b) = two(self)?;
                D::Difference(a, b)
            }
            "product" => {
                let (a, b) = two(self)?;
                D::Product(a, b)
            }
            "tails" => D::Tails(one(self)?),
            "wblocks" => D::WeightBlocks(one(self)?),
            "factorials" => D::Factorials(one(self)?),
            "variants" => D::Variants(one(self)?),
            "tagged_variants" => D::TaggedVariants(one(self)?),
            "residue_dyadic" => D::ResidueDyadic(one(self)?),
            "star" => D::Star(one(self)?),
            "tree" => D::TreeCode(one(self)?),
            "isocopies" => D::IsoCopies(one(self)?),
            "ratcut" => D::RatCut(one(self)?),
            "qcut" => D::QCut(one(self)?),
            other => return self.err(&format!("unknown constructor '{other}'")),
        };
        self.eat(b')')?;
        Ok(d)
    }
}

impl std::str::FromStr for Descriptor {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { s: s.as_bytes(), pos: 0 };
        let d = p.desc(0)?;
        p.ws();
        if p.pos != p.s.len() {
            return p.err("trailing input");
        }
        Ok(d)
    }
}

impl Serialize for Descriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Descriptor {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::approx;

    #[test]
    fn membership_examples() {
        let f = D::finite([1, 3]);
        assert!(f.contains(3));
        assert!(!f.contains(2));
        let c = D::cofinite([0]);
        assert!(!c.contains(0));
        assert!(c.contains(1_000_000));
        let z = D::DyadicBlocks(bx(D::finite([0])));
        assert_eq!(z.members_below(10), [1].into());
        let z = D::DyadicBlocks(bx(D::finite([2])));
        assert_eq!(z.members_below(10), [4, 5, 6, 7].into());
    }

    #[test]
    fn compile_finite_settles_by_two() {
        let d = D::finite([1, 3]);
        let (p, st) = d.compile();
        assert!(st.stage(100) <= 2);
        for s in st.stage(100)..st.stage(100) + 5 {
            let got = approx(&p, s).unwrap();
            assert_eq!(got, d.members_below(101));
        }
    }

    #[test]
    fn compile_agrees_past_settlement() {
        let ds: Vec<D> = vec![
            D::cofinite([0, 4]),
            D::Progression { a: 3, d: 5 },
            D::columns(D::finite([0]), vec![(2, D::Progression { a: 1, d: 2 })]),
            D::union(D::finite([7]), D::Progression { a: 0, d: 4 }),
            D::difference(D::all(), D::Progression { a: 0, d: 3 }),
            D::DyadicBlocks(bx(D::Progression { a: 1, d: 2 })),
        ];
        for d in ds {
            let (p, st) = d.compile();
            for m in [0u64, 10, 40] {
                let s = st.stage(m);
                let got: BTreeSet<u64> = approx(&p, s).unwrap().into_iter().filter(|&x| x <= m).collect();
                assert_eq!(got, d.members_below(m + 1), "{d} window {m}");
            }
            let (q, sq) = d.compile_delayed(7, 3);
            let s = sq.stage(40);
            let got: BTreeSet<u64> = approx(&q, s).unwrap().into_iter().filter(|&x| x <= 40).collect();
            assert_eq!(got, d.members_below(41), "delayed {d}");
        }
    }

    #[test]
    fn text_and_tokens_round_trip() {
        let ds: Vec<D> = vec![
            D::finite([]),
            D::finite([1, 3]),
            D::columns(D::finite([0]), vec![(2, D::Progression { a: 1, d: 2 }), (5, D::all())]),
            D::TaggedVariants(bx(D::columns(D::empty(), vec![]))),
            D::RatCut(bx(D::finite([0]))),
        ];
        for d in ds {
            let text = d.to_string();
            assert_eq!(text.parse::<D>().unwrap(), d, "{text}");
            assert_eq!(D::from_tokens(&d.to_tokens()), Some(d));
        }
        assert!("finite(1,".parse::<D>().is_err());
        assert!("bogus()".parse::<D>().is_err());
    }

    #[test]
    fn binary_strings() {
        assert_eq!(binary_string(0), Vec::<bool>::new());
        assert_eq!(binary_string(1), vec![false]);
        assert_eq!(binary_string(2), vec![true]);
        assert_eq!(binary_string(3), vec![false, false]);
        assert_eq!(binary_string(5), vec![true, false]);
        for m in 0..500 {
            assert_eq!(binary_string_index(&binary_string(m)), m);
        }
    }

    #[test]
    fn weight_blocks_match_exact_sums() {
        // Independent check with exact arithmetic on the first blocks.
        let mut starts = vec![0u64];
        let mut acc = BigRational::zero();
        let mut i = 0u64;
        while starts.len() < 7 {
            acc += BigRational::new(BigInt::one(), BigInt::from(i + 1));
            i += 1;
            if acc >= BigRational::one() {
                starts.push(i);
                acc = BigRational::zero();
            }
        }
        assert_eq!(&weight_block_starts(1000)[..7], &starts[..]);
        assert_eq!(starts[..3], [0, 1, 4]);
    }

    #[test]
    fn ratcut_values() {
        assert_eq!(ratcut_value(&D::finite([0])).unwrap(), BigRational::new(1.into(), 3.into()));
        // Σ_{n≥0} 3^{-(n+1)} = 1/2
        assert_eq!(ratcut_value(&D::all()).unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(ratcut_value(&D::empty()).unwrap(), BigRational::zero());
    }

    #[test]
    fn candidates() {
        let mut c = Candidate {
            forward: [(1, 2), (2, 1)].into(),
            backward: [(1, 2), (2, 1)].into(),
        };
        assert!(c.is_bijection());
        assert_eq!(Candidate::decode(c.encode().unwrap()), c);
        c.backward.clear();
        assert!(!c.is_bijection());
        assert!(Candidate::decode(0).is_bijection());
    }
}
