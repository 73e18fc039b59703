//! Level-one cusp forms: exact q-expansions, the echelon basis, Hecke
//! matrices and the normalized eigenforms H_k.

pub mod basis;
pub mod cache;
pub mod eigen;
pub mod poly;
pub mod qseries;

pub use basis::{hecke_matrix, miller_basis, HeckeMatrix, HeckeOperator, ModularRing};
pub use cache::EigenCache;
pub use eigen::{
    default_bound, eigenforms, eigenforms_in_ring, eigenforms_with, satake_angle, EigenOptions, Eigenform, SatakeAngle,
    DEFAULT_PRECISION,
};
pub use poly::IntPoly;
pub use qseries::{delta, eisenstein, QSeries};
