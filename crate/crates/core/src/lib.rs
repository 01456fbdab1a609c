//! Long-range discrete Schrödinger operators `H = V − H₀` on a finite 1-D
//! lattice, their landscape functions `u = H⁻¹·1`, and numerical checks of
//! the bounds that hold when `v_j ≥ 2Σaᵢ`.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod landscape;
pub mod linalg;
pub mod operator;
pub mod structure;

pub use error::{Error, Result};
pub use landscape::{
    analyze, green_direct, green_series, landscape_function, verify_landscape_bound, GreenFunction,
    GreenMethod, LandscapeReport, NeumannCertificate, RegimePolicy,
};
pub use linalg::{operator_norm, solve_linear, symmetric_eigen, DenseMatrix, SymmetricEigen};
pub use operator::{
    build_hopping_matrix, classify_condition, hopping_norm_bound, ConditionRegime, HoppingProfile,
    LatticeOperator, PotentialVector, Regime,
};
