use thiserror::Error;

/// Crate-wide error type.
///
/// Arithmetic and structural preconditions surface here instead of panicking,
/// so callers (and the CLI) can map failures to meaningful diagnostics.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ring descriptor mismatch: {0} vs {1}")]
    DescriptorMismatch(String, String),

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("element is not a unit: {0}")]
    NotAUnit(String),

    #[error("division by zero")]
    ZeroDivision,

    #[error("rationals form a field; they have no finite-rank additive lattice")]
    NoLattice,

    #[error("fundamental unit search exceeded cap {cap}")]
    PellCapExceeded { cap: u64 },

    #[error("matrix index ({i},{j}) out of range for strict upper triangle of size {n}")]
    IndexOutOfRange { n: usize, i: usize, j: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unimodular (|det| = {det}); it does not define a lattice automorphism")]
    NotUnimodular { det: String },

    #[error("matrix does not lie in central-series level {level}")]
    NotInLevel { level: usize },

    #[error("invalid automorphism data: {0}")]
    InvalidAutomorphism(String),

    #[error("operation unsupported for this ring: {0}")]
    UnsupportedRing(String),

    #[error("layer {layer} acts with a fixed vector; (I - M) is singular")]
    SingularLayer { layer: usize },

    #[error("elements are not twisted-conjugate (difference lies outside the central subgroup)")]
    NotConjugate,

    #[error("resource cap exceeded: needed {needed}, cap {cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("invalid group table: {0}")]
    InvalidGroupTable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
