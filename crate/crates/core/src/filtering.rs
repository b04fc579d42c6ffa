//! Pooling on filtered data. Location and scale models are fitted elsewhere;
//! this module takes the residuals and the fitted `g(z)`, `sigma(z)` at the
//! covariate value of interest.
//!
//! The pooled residual estimates inherit the guarantees of the raw case only
//! when the residuals are close enough to the true innovations in the tail.
//! That is a property of the upstream fit and cannot be checked here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tail::{hill_from_sorted, TailFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    /// Residuals in original order; negative values are allowed.
    pub residuals: Vec<f64>,
    /// Fitted location `g(z)`.
    pub location_at_z: f64,
    /// Fitted scale `sigma(z)`.
    pub scale_at_z: f64,
}

impl ResidualSample {
    pub fn new(residuals: Vec<f64>, location_at_z: f64, scale_at_z: f64) -> Result<Self> {
        let rs = ResidualSample {
            residuals,
            location_at_z,
            scale_at_z,
        };
        rs.validate()?;
        Ok(rs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.residuals.is_empty() {
            return Err(Error::invalid("residual sample is empty"));
        }
        if let Some(&bad) = self.residuals.iter().find(|r| !r.is_finite()) {
            return Err(Error::invalid(format!("residual {bad} is not finite")));
        }
        if !self.location_at_z.is_finite() {
            return Err(Error::invalid("location must be finite"));
        }
        if !(self.scale_at_z > 0.0 && self.scale_at_z.is_finite()) {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(())
    }
}

/// Hill estimator on the residual order statistics. Only the top `k + 1`
/// residuals must be positive.
pub fn residual_hill(rs: &ResidualSample, k: usize) -> Result<TailFit> {
    rs.validate()?;
    let mut sorted = rs.residuals.clone();
    sorted.sort_by(f64::total_cmp);
    hill_from_sorted(&sorted, k)
}

/// Pooled residual tail index with weights `k_j / k`, which are the
/// variance-optimal weights for independent samples with a common tail.
pub fn pooled_residual_gamma(samples: &[ResidualSample], ks: &[usize]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("no residual samples"));
    }
    if samples.len() != ks.len() {
        return Err(Error::LengthMismatch {
            expected: samples.len(),
            got: ks.len(),
        });
    }
    let mut num = 0.0;
    for (rs, &k) in samples.iter().zip(ks) {
        num += k as f64 * residual_hill(rs, k)?.gamma_hat;
    }
    Ok(num / ks.iter().sum::<usize>() as f64)
}

/// `g(z) + sigma(z) q_eps`.
pub fn conditional_quantile(rs: &ResidualSample, pooled_residual_quantile: f64) -> Result<f64> {
    if !(pooled_residual_quantile > 0.0 && pooled_residual_quantile.is_finite()) {
        return Err(Error::invalid("residual quantile must be positive"));
    }
    if !(rs.scale_at_z > 0.0 && rs.location_at_z.is_finite()) {
        return Err(Error::invalid("scale must be positive and location finite"));
    }
    Ok(rs.location_at_z + rs.scale_at_z * pooled_residual_quantile)
}
