//! Gradient truncation.
//!
//! Given a minibatch gradient `g` and a cut rate `ε² ∈ [0, 1]`, the keep set
//! is the shortest prefix of coordinates ordered by descending `|g_i|`
//! (ascending index on ties) whose squared mass reaches `(1 − ε²)‖g‖²`.
//! Kept coordinates form `g̃`, the rest form the residual `v`, so
//! `g = g̃ + v` holds exactly with disjoint supports.
//!
//! The threshold `κ` is the magnitude of the smallest kept coordinate. It is
//! reported for telemetry only; membership is decided by the prefix, which
//! keeps the result a deterministic function of `(g, ε²)` even when several
//! coordinates share the boundary magnitude.

use crate::error::{Error, Result};
use crate::numerics::DenseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationResult {
    pub truncated: DenseVector,
    pub residual: DenseVector,
    pub kept_mask: Vec<bool>,
    /// `None` when nothing is kept.
    pub threshold: Option<f64>,
    pub kept: usize,
    /// Fraction of coordinates zeroed in `truncated`.
    pub sparsity: f64,
    /// `‖g̃‖² / ‖g‖²`, or 1 for a zero gradient.
    pub kept_energy_ratio: f64,
}

impl TruncationResult {
    pub fn dim(&self) -> usize {
        self.kept_mask.len()
    }

    fn from_mask(g: &[f64], kept_mask: Vec<bool>, threshold: Option<f64>, kept_energy_ratio: f64) -> Self {
        let p = g.len();
        let mut truncated = vec![0.0; p];
        let mut residual = vec![0.0; p];
        for (i, (&gi, &keep)) in g.iter().zip(&kept_mask).enumerate() {
            if keep {
                truncated[i] = gi;
            } else {
                residual[i] = gi;
            }
        }
        let kept = kept_mask.iter().filter(|&&k| k).count();
        Self {
            truncated: DenseVector::from_vec_unchecked(truncated),
            residual: DenseVector::from_vec_unchecked(residual),
            kept_mask,
            threshold,
            kept,
            sparsity: 1.0 - kept as f64 / p as f64,
            kept_energy_ratio,
        }
    }
}

fn check_gradient(g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::domain("gradient must have at least one coordinate"));
    }
    if let Some(i) = g.iter().position(|x| !x.is_finite()) {
        return Err(Error::domain(format!("gradient coordinate {i} is {}", g[i])));
    }
    Ok(())
}

/// Truncates `g` so that at least `(1 − cut_rate)` of its squared norm is kept
/// with as few coordinates as possible.
pub fn gradient_truncate(g: &[f64], cut_rate: f64) -> Result<TruncationResult> {
    if !(0.0..=1.0).contains(&cut_rate) {
        return Err(Error::domain(format!("cut_rate must lie in [0, 1], got {cut_rate}")));
    }
    check_gradient(g)?;

    let p = g.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_unstable_by(|&a, &b| g[b].abs().total_cmp(&g[a].abs()).then(a.cmp(&b)));

    // Sum in sorted order so that the prefix sums end exactly at the total.
    let total: f64 = order.iter().map(|&i| g[i] * g[i]).sum();
    if total == 0.0 {
        return Ok(TruncationResult::from_mask(g, vec![false; p], None, 1.0));
    }

    let (kept, kept_energy) = if cut_rate == 0.0 {
        let nnz = order.iter().take_while(|&&i| g[i] != 0.0).count();
        (nnz, total)
    } else {
        let target = (1.0 - cut_rate) * total;
        let mut cum = 0.0;
        let mut k = 0;
        while cum < target && k < p {
            let i = order[k];
            cum += g[i] * g[i];
            k += 1;
        }
        (k, cum)
    };

    let mut mask = vec![false; p];
    order[..kept].iter().for_each(|&i| mask[i] = true);
    let threshold = kept.checked_sub(1).map(|last| g[order[last]].abs());
    Ok(TruncationResult::from_mask(g, mask, threshold, kept_energy / total))
}

/// Keeps every coordinate with `|g_i| ≥ kappa`, bypassing the energy rule.
pub fn threshold_truncate(g: &[f64], kappa: f64) -> Result<TruncationResult> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain(format!("fixed threshold must be > 0, got {kappa}")));
    }
    check_gradient(g)?;
    let mask: Vec<bool> = g.iter().map(|x| x.abs() >= kappa).collect();
    let total: f64 = g.iter().map(|x| x * x).sum();
    let kept: f64 = g.iter().zip(&mask).filter(|(_, &k)| k).map(|(x, _)| x * x).sum();
    let ratio = if total == 0.0 { 1.0 } else { kept / total };
    let any = mask.iter().any(|&k| k);
    Ok(TruncationResult::from_mask(g, mask, any.then_some(kappa), ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let r = gradient_truncate(&[3.0, 1.0, 2.0, 0.5], 0.2).unwrap();
        assert_eq!(r.truncated.as_slice(), &[3.0, 0.0, 2.0, 0.0]);
        assert_eq!(r.residual.as_slice(), &[0.0, 1.0, 0.0, 0.5]);
        assert_eq!(r.threshold, Some(2.0));
        assert_eq!(r.sparsity, 0.5);
        assert_eq!(r.kept_mask, vec![true, false, true, false]);
        assert!((r.kept_energy_ratio - 13.0 / 14.25).abs() < 1e-15);
    }

    #[test]
    fn zero_cut_rate_keeps_all_nonzeros() {
        let g = [0.0, -1e-300, 5.0, 1e20, 0.0, 1.0];
        let r = gradient_truncate(&g, 0.0).unwrap();
        assert_eq!(r.truncated.as_slice(), &g);
        assert_eq!(r.residual.as_slice(), &[0.0; 6]);
        assert_eq!(r.kept, 4);
        assert_eq!(r.threshold, Some(1e-300));
    }

    #[test]
    fn full_cut_rate_keeps_nothing() {
        let g = [0.3, -2.0, 1.0];
        let r = gradient_truncate(&g, 1.0).unwrap();
        assert_eq!(r.truncated.as_slice(), &[0.0; 3]);
        assert_eq!(r.residual.as_slice(), &g);
        assert_eq!(r.threshold, None);
        assert_eq!(r.sparsity, 1.0);
    }

    #[test]
    fn zero_gradient() {
        let r = gradient_truncate(&[0.0, 0.0], 0.3).unwrap();
        assert_eq!(r.truncated.as_slice(), &[0.0, 0.0]);
        assert_eq!(r.residual.as_slice(), &[0.0, 0.0]);
        assert_eq!(r.kept_energy_ratio, 1.0);
        assert_eq!(r.threshold, None);
    }

    #[test]
    fn ties_break_by_index() {
        // needs two of the four equal coordinates
        let r = gradient_truncate(&[1.0, -1.0, 1.0, 1.0], 0.5).unwrap();
        assert_eq!(r.kept_mask, vec![true, true, false, false]);
    }

    #[test]
    fn domain_errors() {
        assert!(gradient_truncate(&[1.0], 1.5).is_err());
        assert!(gradient_truncate(&[1.0], -0.1).is_err());
        assert!(gradient_truncate(&[1.0], f64::NAN).is_err());
        assert!(gradient_truncate(&[f64::NAN, 1.0], 0.1).is_err());
        assert!(gradient_truncate(&[], 0.1).is_err());
    }

    #[test]
    fn fixed_threshold() {
        let r = threshold_truncate(&[1e-4, -2e-3, 1e-3], 1e-3).unwrap();
        assert_eq!(r.kept_mask, vec![false, true, true]);
        assert_eq!(r.threshold, Some(1e-3));
        assert!(threshold_truncate(&[1.0], 0.0).is_err());
        assert_eq!(threshold_truncate(&[1e-5], 1e-3).unwrap().threshold, None);
    }
}
