//! Numerical kernels specialised to the sector operators.

pub mod band;
pub mod dense;
pub mod expm;
pub mod fit;

pub use band::{count_below, inverse_iteration, lowest_eigenvalues, BandLdl};
pub use dense::{symmetric_eigen, tridiagonal_eigen, DenseMatrix, SymmetricEigen};
pub use expm::KrylovExp;
pub use fit::{linear_fit, LinearFit};
