//! Stage-based laboratory for computable reductions between equivalence
//! relations on c.e. sets.
//!
//! Sets are given by [`program::SetProgram`]s with finite stage
//! approximations; reductions are program transformers; the harness checks
//! each reduction's biconditional against exact descriptor oracles.

pub mod basic;
pub mod below;
pub mod benchmark;
pub mod descriptor;
pub mod enumerable;
pub mod ep;
pub mod harness;
pub mod nce;
pub mod numbering;
pub mod ops;
pub mod pairing;
pub mod program;
pub mod relations;
pub mod sexpr;
pub mod structures;
