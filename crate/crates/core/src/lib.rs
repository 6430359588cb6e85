//! Baer-invariants of finitely presented nilpotent groups.
//!
//! The engine works inside the free nilpotent quotient `F/γ_{W+1}(F)`,
//! represented through the Magnus embedding into truncated noncommutative
//! integer power series. Subgroups of that quotient are stored as filtered
//! generating sequences whose leading Lie coordinates form Hermite-form
//! lattices, one per lower-central degree. From there the Hopf-type quotient
//! `(R ∩ γ_{c+1}(F)) / [R, _cF]` is an exact finitely generated abelian
//! group, read off with a Smith normal form.
//!
//! On top of that sits a builder for the standard presentation of a
//! semidirect product `B ⋉ A` and a verifier for its decomposition of the
//! Baer-invariant into `𝒩_cM(B)` plus a complement factor.

pub mod baer;
pub mod cli;
pub mod filtered;
pub mod intlinalg;
pub mod lyndon;
pub mod magnus;
pub mod presentation;
pub mod selftest;
pub mod semidirect;

pub use baer::{baer_invariant, detect_class, verify_class_bound, BaerJob, Settings};
pub use filtered::{Ambient, FilteredSubgroup, Sieve};
pub use intlinalg::{AbelianInvariants, IntMatrix};
pub use magnus::GroupElement;
pub use presentation::{ActionSpec, Alphabet, InputFile, Presentation, Word};
pub use semidirect::{DecompositionReport, SemidirectPresentation};

/// Errors produced by the engine. Each kind maps onto one CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Syntax(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),

    #[error("letter index {index} outside an alphabet of {size} generators")]
    AlphabetMismatch { index: usize, size: usize },

    #[error("cap mismatch: {0} vs {1}")]
    CapMismatch(usize, usize),

    #[error("ambient mismatch: subgroups live in different free nilpotent quotients")]
    AmbientMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a Lyndon word")]
    NotLyndon,

    #[error("degree {degree} exceeds the working cap {cap}")]
    DegreeAboveCap { degree: usize, cap: usize },

    #[error("class undetermined up to {k_max}; supply --class-bound")]
    ClassUndetermined { k_max: usize },

    #[error("class bound {k} not certified: lattice at degree {degree} is deficient")]
    ClassBoundFailed { k: usize, degree: usize },

    #[error("cap guard: {needed} monomials needed, budget is {budget}")]
    CapGuard { needed: u128, budget: u128 },

    #[error("action invalid: {}", .0.join("; "))]
    ActionInvalid(Vec<String>),

    #[error("quotient precondition failed: {0}")]
    Quotient(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Syntax(_)
            | Error::UnknownGenerator(_)
            | Error::DuplicateGenerator(_)
            | Error::Io(_) => 2,
            Error::ClassUndetermined { .. } | Error::ClassBoundFailed { .. } => 3,
            Error::CapGuard { .. } => 4,
            Error::ActionInvalid(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
