//! Three-valued classification from stage approximations alone.
//!
//! A program is only trusted through its settlement certificate. A fixed
//! certificate settles the whole (finite) set; a per-window one settles
//! `[0, M]` only, which refutes equality and decides minima but little else.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{oracle_decide, Carrier, RelationId};
use crate::descriptor::{Descriptor, Settlement};
use crate::program::{approx_with, Budget, EvalError, SetProgram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageVerdict {
    Holds,
    Fails,
    Unknown,
}

impl StageVerdict {
    pub fn of(b: bool) -> StageVerdict {
        if b {
            StageVerdict::Holds
        } else {
            StageVerdict::Fails
        }
    }
}

/// A program with an optional settlement certificate.
#[derive(Clone, Debug)]
pub struct Certified<'a> {
    pub program: &'a SetProgram,
    pub settlement: Option<Settlement>,
}

pub fn stage_classify(
    r: &RelationId,
    p: Certified<'_>,
    q: Certified<'_>,
    budget: u64,
    window: u64,
) -> Result<StageVerdict, EvalError> {
    if r.carrier() != Carrier::CeIndices {
        return Ok(StageVerdict::Unknown);
    }
    let (Some(sp), Some(sq)) = (p.settlement, q.settlement) else {
        return Ok(StageVerdict::Unknown);
    };
    let (tp, tq) = (sp.stage(window), sq.stage(window));
    if tp > budget || tq > budget {
        return Ok(StageVerdict::Unknown);
    }
    let mut b = Budget::default();
    let a = approx_with(p.program, tp, &mut b)?;
    let c = approx_with(q.program, tq, &mut b)?;
    if !sp.per_window && !sq.per_window {
        let v = oracle_decide(r, &Descriptor::Finite(a), &Descriptor::Finite(c));
        return Ok(v.map_or(StageVerdict::Unknown, StageVerdict::of));
    }
    let wa: BTreeSet<u64> = a.range(..=window).copied().collect();
    let wc: BTreeSet<u64> = c.range(..=window).copied().collect();
    Ok(match r {
        RelationId::EqCe if wa != wc => StageVerdict::Fails,
        RelationId::Emin | RelationId::EOmega | RelationId::HOmega => {
            match (wa.first(), wc.first()) {
                (Some(x), Some(y)) if *r == RelationId::Emin => StageVerdict::of(x == y),
                (Some(x), Some(y)) if *r == RelationId::HOmega && x != y => StageVerdict::Fails,
                (Some(_), None) | (None, Some(_)) if *r == RelationId::Emin => StageVerdict::Fails,
                _ => StageVerdict::Unknown,
            }
        }
        _ => StageVerdict::Unknown,
    })
}
