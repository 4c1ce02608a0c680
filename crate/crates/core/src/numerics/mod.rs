//! Dense linear algebra, randomness and derivative oracles sized for the
//! experiments in this crate.

mod eigen;
mod finite_diff;
mod matrix;
mod rng;
mod vector;

pub use eigen::{sym_eigen, sym_eigvals, SymEigen, MAX_EIGEN_DIM};
pub use finite_diff::{finite_diff_grad, relative_error, DEFAULT_FD_STEP};
pub use matrix::SymmetricMatrix;
pub use rng::{sample_gaussian, RngState};
pub use vector::{dot, norm, norm_sq, DenseVector};
