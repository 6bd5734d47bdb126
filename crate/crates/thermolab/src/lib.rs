//! Numerical toolkit for equilibration and thermalization in closed quantum systems.
//!
//! The linear-algebra core is generic over the real scalar (`f32` or `f64`);
//! the aliases at the crate root fix it to `f64`.

pub mod error;
pub mod eth;
pub mod linalg;
pub mod mbl;
pub mod models;
pub mod qcore;
pub mod scalar;
pub mod spectral;
pub mod spinnet;
pub mod unbiased;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision pure state.
pub type PureState = qcore::PureState<f64>;
/// Double-precision density matrix.
pub type DensityMatrix = qcore::DensityMatrix<f64>;
/// Double-precision observable spectral data.
pub type ObservableSpectral = qcore::ObservableSpectral<f64>;
/// Double-precision eigenvalue distribution.
pub type EigenvalueDistribution = qcore::EigenvalueDistribution<f64>;
/// Double-precision eigendecomposition.
pub type SpectralDecomposition = spectral::SpectralDecomposition<f64>;
/// Double-precision complex matrix.
pub type CMatrix = scalar::CMatrix<f64>;
/// Double-precision complex vector.
pub type CVector = scalar::CVector<f64>;
