//! Marginal tail estimation within one sample.
//!
//! Order statistics are indexed from the top: with `values` sorted ascending
//! and `n = values.len()`, the `(k+1)`-th largest observation `X_{n-k:n}` is
//! `values[n - k - 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sample's strictly positive observations in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
    origin_id: String,
}

impl SortedSample {
    /// Sorts `values` (stable, ties kept) after checking they are finite and
    /// strictly positive.
    pub fn new(origin_id: impl Into<String>, mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample must contain at least one value"));
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NonPositiveValue { value: bad });
        }
        values.sort_by(f64::total_cmp);
        Ok(SortedSample {
            values,
            origin_id: origin_id.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn origin_id(&self) -> &str {
        &self.origin_id
    }

    /// `X_{n-k:n}`, the `(k+1)`-th largest value.
    pub fn threshold(&self, k: usize) -> Result<f64> {
        check_k(k, self.n())?;
        Ok(self.values[self.n() - k - 1])
    }

    /// Multiplies every observation by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        SortedSample::new(
            self.origin_id.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )
    }
}

/// Result of a Hill fit on the top `k + 1` order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub gamma_hat: f64,
    pub k: usize,
    pub threshold: f64,
    pub n: usize,
}

/// Second-order parameters `(rho, beta)` of `A(t) = gamma * beta * t^rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderFit {
    pub rho_hat: f64,
    pub beta_hat: f64,
    /// Number of top order statistics used.
    pub k_second: usize,
    /// Set when no second-order signal could be separated from noise; both
    /// parameters are then reported as zero.
    pub degenerate: bool,
}

impl SecondOrderFit {
    pub fn degenerate(k_second: usize) -> Self {
        SecondOrderFit {
            rho_hat: 0.0,
            beta_hat: 0.0,
            k_second,
            degenerate: true,
        }
    }
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k + 1 > n {
        return Err(Error::KOutOfRange { k, n });
    }
    Ok(())
}

/// `floor(n^0.7)` clamped to `[1, n - 1]`.
pub fn default_k(n: usize) -> usize {
    let k = (n as f64).powf(0.7).floor() as usize;
    k.clamp(1, n.saturating_sub(1).max(1))
}

/// Hill estimator on an ascending slice. Only the top `k + 1` values need to
/// be positive, which is what residual-based estimation relies on.
pub fn hill_from_sorted(values: &[f64], k: usize) -> Result<TailFit> {
    let n = values.len();
    check_k(k, n)?;
    let threshold = values[n - k - 1];
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::NonPositiveValue { value: threshold });
    }
    let top = &values[n - k..];
    if let Some(&bad) = top.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonPositiveValue { value: bad });
    }
    let sum: f64 = top.iter().map(|x| (x / threshold).ln()).sum();
    Ok(TailFit {
        gamma_hat: (sum / k as f64).max(0.0),
        k,
        threshold,
        n,
    })
}

/// Hill estimate of the tail index from the top `k + 1` order statistics.
pub fn hill_estimate(sample: &SortedSample, k: usize) -> Result<TailFit> {
    hill_from_sorted(sample.values(), k)
}

/// Weissman extrapolation `(k / (n p))^gamma * X_{n-k:n}` for `0 < p < k/n`.
pub fn weissman_quantile(fit: &TailFit, p: f64, gamma_override: Option<f64>) -> Result<f64> {
    let upper = fit.k as f64 / fit.n as f64;
    if !(p > 0.0 && p < upper) {
        return Err(Error::ProbabilityOutOfRange {
            p,
            range: format!("(0, k/n = {upper})"),
        });
    }
    let gamma = gamma_override.unwrap_or(fit.gamma_hat);
    Ok((upper / p).powf(gamma) * fit.threshold)
}

/// `log(k / (n p))`, the extrapolation length of a Weissman estimate.
pub fn extrapolation_log(k: usize, n: usize, p: f64) -> f64 {
    (k as f64 / (n as f64 * p)).ln()
}

/// Sampling standard deviation of the normalized moment-ratio denominator
/// when log-excesses are exactly exponential. Derived from the moments of
/// Exp(1): Var(M2/2 / 2 - M3/6 / 3) = 5/4 + 19/9 - 3.
const MOMENT_RATIO_NOISE_SD: f64 = 0.600_925_212_577_331_5;

/// Signals below this many noise standard deviations are treated as absent.
const DEGENERACY_Z: f64 = 2.0;

const RHO_MIN: f64 = -20.0;

/// Fraction `floor(n^0.995)` (capped at `n - 1`) used for second-order fits.
pub fn second_order_k(n: usize) -> usize {
    ((n as f64).powf(0.995).floor() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Minimum sample size accepted by [`second_order_estimate`].
pub const SECOND_ORDER_MIN_N: usize = 50;

/// Moment-ratio estimator of `rho` with tuning `tau` (`tau = 0` uses the
/// logarithmic form), followed by the companion weighted-spacings estimator
/// of `beta`, both evaluated at `k = floor(n^0.995)`.
pub fn second_order_estimate(sample: &SortedSample, tau: f64) -> Result<SecondOrderFit> {
    let n = sample.n();
    if n < SECOND_ORDER_MIN_N {
        return Err(Error::invalid(format!(
            "second-order estimation needs n >= {SECOND_ORDER_MIN_N}, got {n}"
        )));
    }
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::invalid(
            "tuning parameter must be a finite nonnegative real",
        ));
    }
    let values = sample.values();
    let k = second_order_k(n);
    let log_thr = values[n - k - 1].ln();

    let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for x in &values[n - k..] {
        let l = x.ln() - log_thr;
        m1 += l;
        m2 += l * l;
        m3 += l * l * l;
    }
    let kf = k as f64;
    m1 /= kf;
    m2 /= kf;
    m3 /= kf;
    if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) {
        return Ok(SecondOrderFit::degenerate(k));
    }

    let (num, den, signal) = if tau == 0.0 {
        let a = m1.ln();
        let b = 0.5 * (m2 / 2.0).ln();
        let c = (m3 / 6.0).ln() / 3.0;
        (a - b, b - c, b - c)
    } else {
        let a = m1.powf(tau);
        let b = (m2 / 2.0).powf(tau / 2.0);
        let c = (m3 / 6.0).powf(tau / 3.0);
        (a - b, b - c, (b - c) / (tau * a))
    };
    if !(num.is_finite() && den.is_finite())
        || signal.abs() < DEGENERACY_Z * MOMENT_RATIO_NOISE_SD / kf.sqrt()
    {
        return Ok(SecondOrderFit::degenerate(k));
    }
    let t = num / den;
    let rho = -(3.0 * (t - 1.0) / (t - 3.0)).abs();
    if !rho.is_finite() {
        return Ok(SecondOrderFit::degenerate(k));
    }
    let rho = rho.max(RHO_MIN);
    if rho > -1e-12 {
        return Ok(SecondOrderFit::degenerate(k));
    }

    let beta = match beta_estimate(values, k, rho) {
        Some(b) => b,
        None => return Ok(SecondOrderFit::degenerate(k)),
    };
    Ok(SecondOrderFit {
        rho_hat: rho,
        beta_hat: beta,
        k_second: k,
        degenerate: false,
    })
}

// beta = (k/n)^rho * (d(rho) D(0) - D(rho)) / (d(rho) D(rho) - D(2 rho)), with
// d(a) = mean (i/k)^-a and D(a) = mean (i/k)^-a U_i over the scaled log-spacings
// U_i = i (log X_{n-i+1:n} - log X_{n-i:n}).
fn beta_estimate(values: &[f64], k: usize, rho: f64) -> Option<f64> {
    let n = values.len();
    let kf = k as f64;
    let (mut d_rho, mut big_d0, mut big_d_rho, mut big_d_2rho) = (0.0, 0.0, 0.0, 0.0);
    for i in 1..=k {
        let u = i as f64 * (values[n - i].ln() - values[n - i - 1].ln());
        let w = (i as f64 / kf).powf(-rho);
        d_rho += w;
        big_d0 += u;
        big_d_rho += w * u;
        big_d_2rho += w * w * u;
    }
    d_rho /= kf;
    big_d0 /= kf;
    big_d_rho /= kf;
    big_d_2rho /= kf;
    let den = d_rho * big_d_rho - big_d_2rho;
    let num = d_rho * big_d0 - big_d_rho;
    let beta = (kf / n as f64).powf(rho) * num / den;
    (den != 0.0 && beta.is_finite()).then_some(beta)
}

/// Plug-in bias magnitude `sqrt(k) * gamma * beta * (n/k)^rho`.
pub fn lambda_hat(gamma: f64, so: &SecondOrderFit, n: usize, k: usize) -> f64 {
    let kf = k as f64;
    kf.sqrt() * gamma * so.beta_hat * (n as f64 / kf).powf(so.rho_hat)
}
