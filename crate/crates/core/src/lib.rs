//! Exact computation of twisted-conjugacy invariants for unitriangular
//! groups over integral domains of characteristic zero.
//!
//! The crate provides:
//!
//! - exact coefficient rings: the integers, the rationals, and real or
//!   imaginary quadratic extensions ([`rings`]);
//! - the unitriangular groups `UT_n(R)` with their central series
//!   ([`unitriangular`]) and a normal form for their automorphisms
//!   ([`automorphism`]);
//! - Reidemeister numbers, spectra, and twisted-conjugacy certificates
//!   computed from the induced actions on central-series layers
//!   ([`engine`], [`field_solver`]);
//! - an independent brute-force oracle over finite quotients ([`oracle`]);
//! - integer and rational linear algebra, including Smith normal form
//!   ([`lattice`], [`ratmat`]).

pub mod automorphism;
pub mod engine;
pub mod error;
pub mod field_solver;
pub mod json;
pub mod lattice;
pub mod oracle;
pub mod ratmat;
pub mod rings;
pub mod unitriangular;

pub use automorphism::{Automorphism, HeisenbergAuto, LambdaMap, NormalFormAuto};
pub use engine::{
    CentralSubgroupH, HGenerator, ReidemeisterValue, SpectrumOptions, SpectrumPoint,
    SpectrumReport, SweepCase, SweepOptions, SweepReport,
};
pub use error::{Error, Result};
pub use field_solver::FieldClassification;
pub use oracle::{
    FiniteAutomorphism, FiniteGroupTable, PropositionCheck, PropositionOptions, PropositionReport,
    TwistedClasses,
};
pub use lattice::{IntMatrix, ReidNumber, SnfResult};
pub use ratmat::RatMatrix;
pub use rings::{RingAut, RingDescriptor, RingElem, RingKind, Units};
pub use unitriangular::UniTriMatrix;
