//! Cyclic Jacobi eigensolver for small symmetric matrices.

use crate::error::{Error, Result};

use super::SymmetricMatrix;

/// Largest dimension accepted by [`sym_eigvals`] and [`sym_eigen`].
pub const MAX_EIGEN_DIM: usize = 512;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

pub fn sym_eigvals(h: &SymmetricMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(h, false)?.0)
}

pub fn sym_eigen(h: &SymmetricMatrix) -> Result<SymEigen> {
    let (values, vectors) = jacobi(h, true)?;
    Ok(SymEigen {
        values,
        vectors: vectors.expect("eigenvectors requested"),
    })
}

/// Eigenvalues, plus eigenvector columns when requested.
type Decomposition = (Vec<f64>, Option<Vec<Vec<f64>>>);

fn jacobi(h: &SymmetricMatrix, want_vectors: bool) -> Result<Decomposition> {
    let n = h.dim();
    if n > MAX_EIGEN_DIM {
        return Err(Error::UnsupportedSize {
            dim: n,
            max: MAX_EIGEN_DIM,
        });
    }
    let mut a = h.as_row_major().to_vec();
    // columns of v are eigenvectors, stored row-major
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        (0..n).for_each(|i| v[i * n + i] = 1.0);
        Some(v)
    } else {
        None
    };

    let scale = h.frobenius_norm();
    let tol = (f64::EPSILON * scale).powi(2);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= tol || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = v.map(|v| {
        order
            .iter()
            .map(|&col| (0..n).map(|k| v[k * n + col]).collect())
            .collect()
    });
    Ok((values, vectors))
}
