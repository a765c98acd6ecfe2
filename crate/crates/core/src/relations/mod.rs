//! Equivalence relations: stable ids, carriers, level metadata, and the
//! exact descriptor oracles.
//!
//! Relations on ℕ take singleton descriptors `finite(n)` as their
//! arguments. n-c.e. tuples are carried as column descriptors, column `i`
//! holding component `i`.

pub mod classify;
pub mod group;
pub mod hierarchy;
pub mod oracle;
pub mod order;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::descriptor::Descriptor;
use group::ComputableGroup;

pub use classify::{stage_classify, StageVerdict};
pub use oracle::oracle_decide;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Carrier {
    Naturals,
    CeIndices,
    NceTuples,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationId {
    EqCe,
    E0,
    E1,
    E2,
    E3,
    Eset,
    Z0,
    Emin,
    Emax,
    Emed,
    Egcd,
    Elcm,
    EOmega,
    HOmega,
    EQ,
    IsoBin,
    CompIsoBin,
    Eq1,
    EqM,
    EqT,
    /// Orbits of the left translation action on subsets of the group.
    Translation(ComputableGroup),
    UGamma(ComputableGroup),
    /// Orbits of `F_ω` acting through an enumeration of the group.
    UFomega(ComputableGroup),
    EqNce,
    /// `=_n` on ℕ.
    EqN(u64),
    EqNat,
    /// `E_{A,Aᶜ}`.
    TwoClass(Descriptor),
    /// `E_A`: equal, or both in `A`.
    OneClass(Descriptor),
    /// Equivalence generated by an enumerated set of pair codes.
    CeRelation(Descriptor),
    /// The universal c.e. relation, slice `e` generated by program `e`.
    Uce,
}

use RelationId as R;

impl RelationId {
    pub fn carrier(&self) -> Carrier {
        match self {
            R::EqN(_) | R::EqNat | R::TwoClass(_) | R::OneClass(_) | R::CeRelation(_) | R::Uce => {
                Carrier::Naturals
            }
            R::EqNce => Carrier::NceTuples,
            _ => Carrier::CeIndices,
        }
    }

    /// Arithmetic level as stated in the source text; metadata only.
    pub fn level(&self) -> &'static str {
        match self {
            R::EqCe => "Π⁰₂-complete",
            R::E0 => "Σ⁰₃-complete",
            R::E3 => "Π⁰₄ (one class Π⁰₃-complete)",
            R::Eset => "Π⁰₄ (one class Π⁰₃-complete)",
            R::Emin => "Δ⁰₂",
            R::Emax => "Π⁰₂-complete",
            R::IsoBin => "Σ¹₁-complete",
            R::Eq1 | R::EqM | R::EqT => "Σ⁰₃-complete",
            R::EqNce => "Π⁰₂",
            R::EqN(_) | R::EqNat | R::TwoClass(_) | R::OneClass(_) => "computable",
            R::CeRelation(_) | R::Uce => "Σ⁰₁",
            _ => "unstated",
        }
    }

    pub fn display_name(&self) -> String {
        match self {
            R::EqCe => "=ce".into(),
            R::E0 => "E_0".into(),
            R::E1 => "E_1".into(),
            R::E2 => "E_2".into(),
            R::E3 => "E_3".into(),
            R::Eset => "E_set".into(),
            R::Z0 => "Z_0".into(),
            R::Emin => "E_min".into(),
            R::Emax => "E_max".into(),
            R::Emed => "E_med".into(),
            R::Egcd => "E_gcd".into(),
            R::Elcm => "E_lcm".into(),
            R::EOmega => "E_ω".into(),
            R::HOmega => "H_ω".into(),
            R::EQ => "E_ℚ".into(),
            R::IsoBin => "≅_bin".into(),
            R::CompIsoBin => "≃_bin".into(),
            R::Eq1 => "≡_1".into(),
            R::EqM => "≡_m".into(),
            R::EqT => "≡_T".into(),
            R::Translation(g) => format!("E_Γ[{g}]"),
            R::UGamma(g) => format!("U_Γ[{g}]"),
            R::UFomega(g) => format!("U_Fω[{g}]"),
            R::EqNce => "=n-ce".into(),
            R::EqN(n) => format!("={n}"),
            R::EqNat => "=ℕ".into(),
            R::TwoClass(a) => format!("E_{{A,Aᶜ}}[{a}]"),
            R::OneClass(a) => format!("E_A[{a}]"),
            R::CeRelation(a) => format!("E_e[{a}]"),
            R::Uce => "U_ce".into(),
        }
    }

    /// One representative of every relation family, for listings.
    pub fn catalogue() -> Vec<RelationId> {
        let c3 = ComputableGroup::Cyclic(3);
        vec![
            R::EqCe,
            R::E0,
            R::E1,
            R::E2,
            R::E3,
            R::Eset,
            R::Z0,
            R::Emin,
            R::Emax,
            R::Emed,
            R::Egcd,
            R::Elcm,
            R::EOmega,
            R::HOmega,
            R::EQ,
            R::IsoBin,
            R::CompIsoBin,
            R::Eq1,
            R::EqM,
            R::EqT,
            R::Translation(c3),
            R::UGamma(c3),
            R::UFomega(c3),
            R::EqNce,
            R::EqN(2),
            R::EqNat,
            R::TwoClass(Descriptor::Progression { a: 0, d: 2 }),
            R::OneClass(Descriptor::Progression { a: 0, d: 2 }),
            R::CeRelation(Descriptor::empty()),
            R::Uce,
        ]
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            R::EqCe => "eq_ce",
            R::E0 => "e0",
            R::E1 => "e1",
            R::E2 => "e2",
            R::E3 => "e3",
            R::Eset => "e_set",
            R::Z0 => "z0",
            R::Emin => "e_min",
            R::Emax => "e_max",
            R::Emed => "e_med",
            R::Egcd => "e_gcd",
            R::Elcm => "e_lcm",
            R::EOmega => "e_omega",
            R::HOmega => "h_omega",
            R::EQ => "e_q",
            R::IsoBin => "iso_bin",
            R::CompIsoBin => "compiso_bin",
            R::Eq1 => "eq_1",
            R::EqM => "eq_m",
            R::EqT => "eq_t",
            R::Translation(g) => return write!(f, "translation[{g}]"),
            R::UGamma(g) => return write!(f, "u_gamma[{g}]"),
            R::UFomega(g) => return write!(f, "u_fomega[{g}]"),
            R::EqNce => "eq_nce",
            R::EqN(n) => return write!(f, "eq_n[{n}]"),
            R::EqNat => "eq_nat",
            R::TwoClass(a) => return write!(f, "two_class[{a}]"),
            R::OneClass(a) => return write!(f, "one_class[{a}]"),
            R::CeRelation(a) => return write!(f, "ce_rel[{a}]"),
            R::Uce => "u_ce",
        };
        f.write_str(s)
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("unknown relation id `{0}`")]
pub struct UnknownRelation(pub String);

impl FromStr for RelationId {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || UnknownRelation(s.to_string());
        if let Some(open) = s.find('[') {
            let inner = s[open + 1..].strip_suffix(']').ok_or_else(err)?;
            let head = &s[..open];
            let group = || inner.parse::<ComputableGroup>().map_err(|_| err());
            let desc = || inner.parse::<Descriptor>().map_err(|_| err());
            return match head {
                "translation" => Ok(R::Translation(group()?)),
                "u_gamma" => Ok(R::UGamma(group()?)),
                "u_fomega" => Ok(R::UFomega(group()?)),
                "eq_n" => Ok(R::EqN(inner.parse().map_err(|_| err())?)),
                "two_class" => Ok(R::TwoClass(desc()?)),
                "one_class" => Ok(R::OneClass(desc()?)),
                "ce_rel" => Ok(R::CeRelation(desc()?)),
                _ => Err(err()),
            };
        }
        Ok(match s {
            "eq_ce" => R::EqCe,
            "e0" => R::E0,
            "e1" => R::E1,
            "e2" => R::E2,
            "e3" => R::E3,
            "e_set" => R::Eset,
            "z0" => R::Z0,
            "e_min" => R::Emin,
            "e_max" => R::Emax,
            "e_med" => R::Emed,
            "e_gcd" => R::Egcd,
            "e_lcm" => R::Elcm,
            "e_omega" => R::EOmega,
            "h_omega" => R::HOmega,
            "e_q" => R::EQ,
            "iso_bin" => R::IsoBin,
            "compiso_bin" => R::CompIsoBin,
            "eq_1" => R::Eq1,
            "eq_m" => R::EqM,
            "eq_t" => R::EqT,
            "eq_nce" => R::EqNce,
            "eq_nat" => R::EqNat,
            "u_ce" => R::Uce,
            _ => return Err(err()),
        })
    }
}

impl Serialize for RelationId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RelationId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A relation with its oracle and classifier, as listed by the registry.
#[derive(Clone, Debug, Serialize)]
pub struct RelationSpec {
    pub id: RelationId,
    pub name: String,
    pub carrier: Carrier,
    pub level: &'static str,
}

impl RelationSpec {
    pub fn of(id: RelationId) -> RelationSpec {
        RelationSpec {
            name: id.display_name(),
            carrier: id.carrier(),
            level: id.level(),
            id,
        }
    }

    pub fn decide(&self, a: &Descriptor, b: &Descriptor) -> Result<bool, crate::descriptor::Unsupported> {
        oracle_decide(&self.id, a, b)
    }
}

/// The natural carried by a singleton descriptor.
pub fn nat_of(d: &Descriptor) -> Option<u64> {
    match d {
        Descriptor::Finite(s) if s.len() == 1 => s.iter().next().copied(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for r in RelationId::catalogue() {
            let s = r.to_string();
            assert_eq!(s.parse::<RelationId>().unwrap(), r, "{s}");
        }
        assert!("nope".parse::<RelationId>().is_err());
    }
}
