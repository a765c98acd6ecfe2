//! Corpora, the reduction registry and settlement-aware verification.

pub mod corpus;
pub mod monotone;
pub mod registry;
pub mod verify;

pub use corpus::{gen_corpus, gen_corpus_with, Corpus, Shape, TestCase};
pub use registry::{lookup, registry, Kind, Reduction};
pub use verify::{verify_reduction, verify_with, VerificationReport, VerifyOptions};

/// Observation window `M`.
pub const DEFAULT_WINDOW: u64 = 256;
/// Stage budget `S`.
pub const DEFAULT_BUDGET: u64 = 2000;
pub const BUDGET_ENV: &str = "CELAB_BUDGET";

/// The stage budget from `CELAB_BUDGET`, else [`DEFAULT_BUDGET`].
pub fn default_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("no corpus sampler for relation {0}")]
    UnsupportedRelation(String),
    #[error("unknown reduction {0:?}")]
    UnknownReduction(String),
    #[error("corpus is over {found} but {reduction} reduces from {expected}")]
    WrongSource {
        reduction: String,
        expected: String,
        found: String,
    },
    #[error("corpus size must be at least 1")]
    EmptySize,
    #[error("malformed corpus: {0}")]
    Corpus(String),
    #[error("oracle: {0}")]
    Oracle(String),
}
