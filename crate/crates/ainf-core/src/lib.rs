//! Exact A∞-algebras, morphisms, homotopies and modules over ℚ and 𝔽ₚ on
//! bounded complexes of finite-rank free modules, together with the
//! obstruction-theoretic transfer and lifting algorithms.
//!
//! Every identity is checked to exact zero; the algorithms re-verify their
//! outputs before returning them.

pub mod aimod;
pub mod ainfty;
pub mod chaincx;
pub mod exactlin;
pub mod fixtures;
pub mod io;
pub mod lifting;
pub mod signs;
pub mod transfer;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Lin(#[from] exactlin::LinError),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("differential does not square to zero at degree {0}")]
    NotComplex(i32),
    #[error("not a chain map: {0}")]
    NotChainMap(String),
    #[error("not a quasi-isomorphism: {0}")]
    NotQuasiIso(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use exactlin::{Field, FieldElement, Matrix, PivotRule, SparseMatrix};
