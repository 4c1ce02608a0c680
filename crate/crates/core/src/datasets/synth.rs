use crate::error::{Error, Result};
use crate::numerics::RngState;

use super::{Dataset, Sample};

/// Class centers whose pairwise (or, for more than two classes in few
/// dimensions, adjacent) distance is `class_sep`.
///
/// * two classes: `±(class_sep / 2) e₀`
/// * `k ≥ 3`, `d ≥ k`: `(class_sep / √2) e_c`, a regular simplex
/// * `k ≥ 3`, `2 ≤ d < k`: a regular k-gon in the first two coordinates
/// * `k ≥ 3`, `d = 1`: evenly spaced points centred on 0
pub fn blob_centers(d: usize, k: usize, class_sep: f64) -> Result<Vec<Vec<f64>>> {
    if d == 0 || k < 2 || !(class_sep > 0.0 && class_sep.is_finite()) {
        return Err(Error::domain(format!(
            "blobs need d >= 1, k >= 2 and class_sep > 0 (got d={d}, k={k}, class_sep={class_sep})"
        )));
    }
    let mut centers = vec![vec![0.0; d]; k];
    if k == 2 {
        centers[0][0] = -class_sep / 2.0;
        centers[1][0] = class_sep / 2.0;
    } else if d >= k {
        for (c, center) in centers.iter_mut().enumerate() {
            center[c] = class_sep / std::f64::consts::SQRT_2;
        }
    } else if d >= 2 {
        let radius = class_sep / (2.0 * (std::f64::consts::PI / k as f64).sin());
        for (c, center) in centers.iter_mut().enumerate() {
            let angle = std::f64::consts::TAU * c as f64 / k as f64;
            center[0] = radius * angle.cos();
            center[1] = radius * angle.sin();
        }
    } else {
        for (c, center) in centers.iter_mut().enumerate() {
            center[0] = (c as f64 - (k as f64 - 1.0) / 2.0) * class_sep;
        }
    }
    Ok(centers)
}

/// One draw from the unit-covariance Gaussian around `centers[label]`.
pub fn sample_blob(rng: &mut RngState, centers: &[Vec<f64>], label: usize) -> Sample {
    let features = centers[label].iter().map(|c| c + rng.standard_normal()).collect();
    Sample { features, label }
}

/// `n` points in `k` unit-covariance Gaussian clusters; sample `i` has label
/// `i mod k`, so class counts differ by at most one.
pub fn synth_blobs(rng: &mut RngState, n: usize, d: usize, class_sep: f64, k: usize) -> Result<Dataset> {
    if n < k {
        return Err(Error::domain(format!("need n >= k, got n={n}, k={k}")));
    }
    let centers = blob_centers(d, k, class_sep)?;
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let s = sample_blob(rng, &centers, i % k);
        features.extend(s.features);
        labels.push(s.label);
    }
    Dataset::from_flat(d, features, labels, k)
}
