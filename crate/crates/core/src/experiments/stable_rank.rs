use crate::error::{Error, Result};
use crate::numerics::{sym_eigvals, SymmetricMatrix};

use super::{CsvTable, TheoryConstants, ToTable};

/// Stable rank `Λ_τ = tr(A) / ‖A‖₂` of `A = (I − ηH)^{2τ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableRankReport {
    pub eigenvalues: Vec<f64>,
    pub eta: f64,
    pub tau: u32,
    pub stable_rank: f64,
}

impl ToTable for StableRankReport {
    fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["eta", "tau", "dim", "stable_rank", "lambda_min", "lambda_max"]);
        t.push(vec![
            self.eta.into(),
            (self.tau as usize).into(),
            self.eigenvalues.len().into(),
            self.stable_rank.into(),
            self.eigenvalues.first().copied().into(),
            self.eigenvalues.last().copied().into(),
        ]);
        t
    }
}

/// `Σ_i a_i / max_i a_i` with `a_i = (1 − ηλ_i)^{2τ}`, evaluated in the log
/// domain so large `τ` cannot overflow. The result is clamped to `[1, p]`.
///
/// If every factor `1 − ηλ_i` is zero (`A = 0` for `τ ≥ 1`) the factors are
/// all equal and the result is `p`.
pub fn stable_rank_from_eigenvalues(eigenvalues: &[f64], eta: f64, tau: u32) -> f64 {
    let p = eigenvalues.len() as f64;
    if tau == 0 {
        return p;
    }
    let logs: Vec<f64> = eigenvalues
        .iter()
        .map(|l| 2.0 * f64::from(tau) * (1.0 - eta * l).abs().ln())
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return p;
    }
    let sum: f64 = logs.iter().map(|x| (x - max).exp()).sum();
    sum.clamp(1.0, p)
}

pub fn stable_rank(h: &SymmetricMatrix, eta: f64, tau: u32) -> Result<StableRankReport> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("eta must be > 0, got {eta}")));
    }
    let eigenvalues = sym_eigvals(h)?;
    let stable_rank = stable_rank_from_eigenvalues(&eigenvalues, eta, tau);
    Ok(StableRankReport {
        eigenvalues,
        eta,
        tau,
        stable_rank,
    })
}

/// Step size, escape horizon and minimum noise variance suggested by the
/// escape analysis, given estimated constants and a stable rank. Reported,
/// never enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapePrescription {
    pub eta: f64,
    pub tau_min: f64,
    pub sigma_sq_min: f64,
}

pub fn escape_prescription(c: &TheoryConstants, stable_rank: f64, dim: usize) -> EscapePrescription {
    let (g, l, rho, gamma) = (c.g_hat, c.l_hat, c.rho, c.gamma);
    let p = dim as f64;
    let eta = (1.0 / l)
        .min(gamma.sqrt() * stable_rank / (144.0 * rho.sqrt() * p * g))
        .min(gamma * stable_rank / (576.0 * p * g * l));
    let spread = 1f64.max(10.0 * g / gamma);
    let log_arg = (gamma.sqrt() / (2.0 * rho.sqrt() * eta + g)) / (g * spread) + 4.0 * p;
    let tau_min = (24.0 + 4.0 * log_arg.ln()) / (eta * eta * rho * gamma);
    EscapePrescription {
        eta,
        tau_min,
        sigma_sq_min: 576.0 * g * g / stable_rank * spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_zero_is_full_rank() {
        let h = SymmetricMatrix::diagonal(&[-3.0, 0.5, 7.0]).unwrap();
        assert_eq!(stable_rank(&h, 0.1, 0).unwrap().stable_rank, 3.0);
    }

    #[test]
    fn scaled_identity_is_full_rank() {
        for c in [-2.0, 0.0, 0.3, 10.0] {
            let h = SymmetricMatrix::scaled_identity(5, c).unwrap();
            assert_eq!(stable_rank(&h, 0.1, 7).unwrap().stable_rank, 5.0);
        }
    }

    #[test]
    fn two_by_two_example() {
        let h = SymmetricMatrix::diagonal(&[-1.0, 1.0]).unwrap();
        let r = stable_rank(&h, 0.1, 10).unwrap().stable_rank;
        // (1.1)^20 = 6.7274999493256, (0.9)^20 = 0.1215766545906
        assert!((r - 1.018_071_595_021_380_3).abs() < 1e-12, "{r}");
    }

    #[test]
    fn rejects_bad_eta() {
        let h = SymmetricMatrix::identity(2).unwrap();
        assert!(stable_rank(&h, 0.0, 1).is_err());
    }
}
