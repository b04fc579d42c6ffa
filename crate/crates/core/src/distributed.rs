//! Aggregation from per-machine summaries when raw data cannot be moved.
//!
//! Each machine reduces its sample to a [`MachineSummary`]; the aggregator
//! only ever sees summaries. Machines are processed in `machine_id` order so
//! reports do not depend on the order in which summaries arrive.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{quantile_confidence_interval, IntervalEstimate};
use crate::numerics::gamma_ratio_factor;
use crate::pooling::{
    amse_optimal_weights, bias_reduced_gamma, geometric_pooled_weissman, pooled_estimate,
    PooledEstimate, PooledMoments, WeightScheme, WeightVector,
};
use crate::tail::{
    extrapolation_log, hill_estimate, second_order_estimate, SecondOrderFit, SortedSample, TailFit,
    SECOND_ORDER_MIN_N,
};

/// Ratio `max k_j / min k_j` above which a warning is raised.
pub const K_RATIO_WARNING: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSummary {
    pub machine_id: String,
    pub n: usize,
    pub k: usize,
    pub gamma_hat: f64,
    pub threshold: f64,
    pub beta_hat: f64,
    pub rho_hat: f64,
}

impl MachineSummary {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k + 1 > self.n {
            return Err(Error::KOutOfRange {
                k: self.k,
                n: self.n,
            });
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::NonPositiveValue {
                value: self.threshold,
            });
        }
        if !(self.gamma_hat >= 0.0 && self.gamma_hat.is_finite()) {
            return Err(Error::invalid(format!(
                "machine {}: gamma_hat must be finite and nonnegative",
                self.machine_id
            )));
        }
        if !(self.rho_hat <= 0.0) || !self.beta_hat.is_finite() {
            return Err(Error::invalid(format!(
                "machine {}: need rho_hat <= 0 and finite beta_hat",
                self.machine_id
            )));
        }
        Ok(())
    }

    /// No second-order information was extracted on this machine.
    pub fn is_degenerate(&self) -> bool {
        self.beta_hat == 0.0 && self.rho_hat == 0.0
    }

    pub fn tail_fit(&self) -> TailFit {
        TailFit {
            gamma_hat: self.gamma_hat,
            k: self.k,
            threshold: self.threshold,
            n: self.n,
        }
    }
}

/// Hill fit plus second-order fit of one machine's sample. Samples smaller
/// than the second-order minimum report the degenerate `(0, 0)` pair.
pub fn machine_summarize(sample: &SortedSample, k: usize, tau: f64) -> Result<MachineSummary> {
    let fit = hill_estimate(sample, k)?;
    let so = if sample.n() < SECOND_ORDER_MIN_N {
        SecondOrderFit::degenerate(sample.n().saturating_sub(1))
    } else {
        second_order_estimate(sample, tau)?
    };
    Ok(MachineSummary {
        machine_id: sample.origin_id().to_string(),
        n: sample.n(),
        k,
        gamma_hat: fit.gamma_hat,
        threshold: fit.threshold,
        beta_hat: so.beta_hat,
        rho_hat: so.rho_hat,
    })
}

/// Weighting used to pool a per-machine quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryWeights {
    /// `k_j / k`
    ByK,
    /// `n_j / n`
    ByN,
    /// `1 / m`
    Naive,
}

impl SummaryWeights {
    pub fn weights(self, summaries: &[MachineSummary]) -> Result<WeightVector> {
        match self {
            SummaryWeights::ByK => WeightVector::proportional(
                &summaries.iter().map(|s| s.k as f64).collect::<Vec<_>>(),
            ),
            SummaryWeights::ByN => WeightVector::proportional(
                &summaries.iter().map(|s| s.n as f64).collect::<Vec<_>>(),
            ),
            SummaryWeights::Naive => WeightVector::naive(summaries.len()),
        }
    }
}

/// Weight schemes for pooling `gamma`, `beta` and `rho` before the bias is
/// estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolingSchemes {
    pub gamma: SummaryWeights,
    pub beta: SummaryWeights,
    pub rho: SummaryWeights,
}

impl Default for PoolingSchemes {
    fn default() -> Self {
        PoolingSchemes {
            gamma: SummaryWeights::ByK,
            beta: SummaryWeights::ByN,
            rho: SummaryWeights::ByN,
        }
    }
}

/// Pooled tail and second-order parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledSecondOrder {
    pub gamma: f64,
    pub beta: f64,
    pub rho: f64,
    /// `gamma beta sqrt(k) (n/k)^rho`.
    pub lambda: f64,
}

fn prepare(summaries: &[MachineSummary]) -> Result<Vec<MachineSummary>> {
    if summaries.is_empty() {
        return Err(Error::invalid("no machine summaries"));
    }
    for s in summaries {
        s.validate()?;
    }
    let mut sorted = summaries.to_vec();
    sorted.sort_by(|a, b| a.machine_id.cmp(&b.machine_id));
    Ok(sorted)
}

fn weighted(w: &WeightVector, x: impl Iterator<Item = f64>) -> f64 {
    w.as_slice().iter().zip(x).map(|(w, x)| w * x).sum()
}

fn totals(s: &[MachineSummary]) -> (f64, f64) {
    (
        s.iter().map(|s| s.k as f64).sum(),
        s.iter().map(|s| s.n as f64).sum(),
    )
}

/// Pooled `(gamma, beta, rho)` and the implied bias magnitude.
pub fn pooled_second_order(
    summaries: &[MachineSummary],
    schemes: PoolingSchemes,
) -> Result<PooledSecondOrder> {
    let s = prepare(summaries)?;
    second_order_sorted(&s, schemes)
}

fn second_order_sorted(s: &[MachineSummary], schemes: PoolingSchemes) -> Result<PooledSecondOrder> {
    let gamma = weighted(&schemes.gamma.weights(s)?, s.iter().map(|x| x.gamma_hat));
    let beta = weighted(&schemes.beta.weights(s)?, s.iter().map(|x| x.beta_hat));
    let rho = weighted(&schemes.rho.weights(s)?, s.iter().map(|x| x.rho_hat)).min(0.0);
    let (k, n) = totals(s);
    Ok(PooledSecondOrder {
        gamma,
        beta,
        rho,
        lambda: gamma * beta * k.sqrt() * (n / k).powf(rho),
    })
}

/// Bias vector `sqrt(k) gamma beta / (1 - rho) (n_j/k_j)^rho` and diagonal
/// covariance `k gamma^2 diag(1/k_j)` built from pooled parameters.
pub fn distributed_moments(
    summaries: &[MachineSummary],
    schemes: PoolingSchemes,
) -> Result<PooledMoments> {
    let s = prepare(summaries)?;
    moments_sorted(&s, &second_order_sorted(&s, schemes)?)
}

fn moments_sorted(s: &[MachineSummary], so: &PooledSecondOrder) -> Result<PooledMoments> {
    let (k, _) = totals(s);
    let m = s.len();
    let head = k.sqrt() * so.gamma * so.beta / (1.0 - so.rho);
    let bias = DVector::from_iterator(
        m,
        s.iter()
            .map(|x| head * (x.n as f64 / x.k as f64).powf(so.rho)),
    );
    let g2 = so.gamma * so.gamma;
    if !(g2 > 0.0) {
        return Err(Error::Degenerate("pooled tail index is zero".into()));
    }
    let cov = DMatrix::from_diagonal(&DVector::from_iterator(
        m,
        s.iter().map(|x| k * g2 / x.k as f64),
    ));
    Ok(PooledMoments {
        bias,
        cov,
        k_total: k as usize,
    })
}

fn gammas(s: &[MachineSummary]) -> Vec<f64> {
    s.iter().map(|x| x.gamma_hat).collect()
}

/// Weights `k_j / k`, with standard error `gamma / sqrt(k)`.
pub fn aggregate_variance_optimal(summaries: &[MachineSummary]) -> Result<PooledEstimate> {
    let s = prepare(summaries)?;
    let w = SummaryWeights::ByK.weights(&s)?;
    let gamma = weighted(&w, s.iter().map(|x| x.gamma_hat));
    let (k, _) = totals(&s);
    Ok(PooledEstimate {
        gamma,
        weights: w,
        stderr: gamma / k.sqrt(),
        bias_est: 0.0,
        scheme: WeightScheme::VarianceOptimal,
        bias_reduced: false,
    })
}

/// AMSE-optimal weights from the pooled bias and diagonal covariance.
pub fn aggregate_amse_optimal(
    summaries: &[MachineSummary],
    schemes: PoolingSchemes,
) -> Result<PooledEstimate> {
    let s = prepare(summaries)?;
    let mo = moments_sorted(&s, &second_order_sorted(&s, schemes)?)?;
    let w = amse_optimal_weights(&mo)?;
    pooled_estimate(&gammas(&s), w, &mo, WeightScheme::AmseOptimal)
}

/// Bias magnitude below which variance-optimal weighting has the smaller AMSE.
/// Undefined when every machine uses the same sample fraction.
pub fn lambda0_threshold(gamma: f64, rho: f64, k_list: &[usize], n_list: &[usize]) -> Result<f64> {
    if k_list.len() != n_list.len() {
        return Err(Error::LengthMismatch {
            expected: k_list.len(),
            got: n_list.len(),
        });
    }
    if k_list.is_empty() || k_list.contains(&0) || n_list.contains(&0) {
        return Err(Error::invalid("need positive k_j and n_j"));
    }
    if !(rho < 0.0) {
        return Err(Error::invalid("second-order parameter must be negative"));
    }
    let (k1, n1) = (k_list[0] as f64, n_list[0] as f64);
    let c: Vec<f64> = k_list.iter().map(|&k| k1 / k as f64).collect();
    let b: Vec<f64> = n_list.iter().map(|&n| n1 / n as f64).collect();
    let ratio = c.iter().map(|x| 1.0 / x).sum::<f64>() / b.iter().map(|x| 1.0 / x).sum::<f64>();
    let d: Vec<f64> = c.iter().zip(&b).map(|(c, b)| c / b * ratio).collect();
    if d.iter().all(|d| (d - 1.0).abs() < 1e-12) {
        return Err(Error::Degenerate(
            "equal sample fractions: the AMSE comparison threshold is undefined".into(),
        ));
    }
    let s = |a: f64| d.iter().zip(&c).map(|(d, c)| d.powf(a) / c).sum::<f64>();
    let (s0, sr, s2r) = (s(0.0), s(rho), s(2.0 * rho));
    let num = sr * sr - s0 * s0;
    let den = s0 * s2r - sr * sr;
    let v = gamma * (1.0 - rho) * (num / den).sqrt();
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Degenerate(
            "threshold computation lost precision".into(),
        ));
    }
    Ok(v)
}

/// Geometric pooled Weissman estimate computed from summaries only.
pub fn distributed_quantile(summaries: &[MachineSummary], w: &WeightVector, p: f64) -> Result<f64> {
    if w.len() != summaries.len() {
        return Err(Error::LengthMismatch {
            expected: summaries.len(),
            got: w.len(),
        });
    }
    for s in summaries {
        s.validate()?;
    }
    let fits: Vec<TailFit> = summaries.iter().map(MachineSummary::tail_fit).collect();
    geometric_pooled_weissman(&fits, w, p)
}

/// Finite-`k_j` bias of a pooled estimate:
/// `1/(1-rho) sum_j w_j k_j^rho Gamma(k_j - rho + 1)/k_j! A_j`.
pub fn finite_k_bias_term(
    summaries: &[MachineSummary],
    w: &WeightVector,
    rho: f64,
    a_values: &[f64],
) -> Result<f64> {
    let m = summaries.len();
    if w.len() != m || a_values.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: if w.len() != m {
                w.len()
            } else {
                a_values.len()
            },
        });
    }
    if summaries.iter().any(|s| s.k == 0) {
        return Err(Error::invalid("k_j must be at least 1"));
    }
    let sum: f64 = summaries
        .iter()
        .zip(w.as_slice())
        .zip(a_values)
        .map(|((s, w), a)| w * gamma_ratio_factor(s.k, rho) * a)
        .sum();
    Ok(sum / (1.0 - rho))
}

/// Variance inflation `k sum_j w_j^2 / k_j` of a pooled estimate.
pub fn v_factor(k_list: &[usize], w: &WeightVector) -> f64 {
    let k: f64 = k_list.iter().map(|&k| k as f64).sum();
    k * k_list
        .iter()
        .zip(w.as_slice())
        .map(|(&kj, w)| w * w / kj as f64)
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max_j |(k_j/n_j) / (k/n) - 1|`.
    pub fraction_spread: f64,
    pub min_k: usize,
    pub max_k: usize,
    /// Variance inflation of naive weights.
    pub naive_v_factor: f64,
    pub warnings: Vec<String>,
}

pub fn diagnostics(summaries: &[MachineSummary]) -> Result<Diagnostics> {
    let s = prepare(summaries)?;
    let (k, n) = totals(&s);
    let frac = k / n;
    let fraction_spread = s
        .iter()
        .map(|x| ((x.k as f64 / x.n as f64) / frac - 1.0).abs())
        .fold(0.0, f64::max);
    let min_k = s.iter().map(|x| x.k).min().unwrap_or(0);
    let max_k = s.iter().map(|x| x.k).max().unwrap_or(0);
    let mut warnings = Vec::new();
    if max_k as f64 / min_k as f64 > K_RATIO_WARNING {
        warnings.push(format!(
            "max k_j / min k_j = {max_k}/{min_k} exceeds {K_RATIO_WARNING}"
        ));
    }
    let ks: Vec<usize> = s.iter().map(|x| x.k).collect();
    Ok(Diagnostics {
        fraction_spread,
        min_k,
        max_k,
        naive_v_factor: v_factor(&ks, &WeightVector::naive(ks.len())?),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationConfig {
    pub p_levels: Vec<f64>,
    pub level: f64,
    pub schemes: PoolingSchemes,
    /// Project AMSE-optimal weights onto the simplex.
    pub project_simplex: bool,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        AggregationConfig {
            p_levels: Vec::new(),
            level: 0.95,
            schemes: PoolingSchemes::default(),
            project_simplex: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeQuantile {
    pub scheme: WeightScheme,
    pub estimate: f64,
    pub interval: IntervalEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileReport {
    pub p: f64,
    pub extrapolation_log: f64,
    pub estimates: Vec<SchemeQuantile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationReport {
    pub machine_ids: Vec<String>,
    pub gamma_naive: PooledEstimate,
    pub gamma_var_opt: PooledEstimate,
    pub gamma_amse_opt: PooledEstimate,
    pub gamma_bias_reduced_var: PooledEstimate,
    pub gamma_bias_reduced_amse: PooledEstimate,
    pub second_order: PooledSecondOrder,
    pub lambda_hat_pooled: f64,
    pub lambda0: Option<f64>,
    pub quantiles: Vec<QuantileReport>,
    pub diagnostics: Diagnostics,
}

/// Every distributed estimate the summaries support.
pub fn aggregate(
    summaries: &[MachineSummary],
    config: &AggregationConfig,
) -> Result<AggregationReport> {
    let s = prepare(summaries)?;
    let so = second_order_sorted(&s, config.schemes)?;
    let mo = moments_sorted(&s, &so)?;
    let g = gammas(&s);
    let naive = pooled_estimate(&g, WeightVector::naive(s.len())?, &mo, WeightScheme::Naive)?;
    let var = pooled_estimate(
        &g,
        SummaryWeights::ByK.weights(&s)?,
        &mo,
        WeightScheme::VarianceOptimal,
    )?;
    let mut w_amse = amse_optimal_weights(&mo)?;
    if config.project_simplex {
        w_amse = w_amse.project_to_simplex();
    }
    let amse = pooled_estimate(&g, w_amse, &mo, WeightScheme::AmseOptimal)?;
    let ks: Vec<usize> = s.iter().map(|x| x.k).collect();
    let ns: Vec<usize> = s.iter().map(|x| x.n).collect();
    let lambda0 = if so.rho < 0.0 {
        lambda0_threshold(so.gamma, so.rho, &ks, &ns).ok()
    } else {
        None
    };
    let (k, n) = totals(&s);
    let mut quantiles = Vec::with_capacity(config.p_levels.len());
    for &p in &config.p_levels {
        let xlog = extrapolation_log(k as usize, n as usize, p);
        let mut estimates = Vec::new();
        for est in [&naive, &var, &amse] {
            let q = distributed_quantile(&s, &est.weights, p)?;
            let interval = quantile_confidence_interval(
                q,
                &est.weights,
                &mo.cov,
                mo.k_total,
                xlog,
                config.level,
            )?;
            estimates.push(SchemeQuantile {
                scheme: est.scheme,
                estimate: q,
                interval,
            });
        }
        quantiles.push(QuantileReport {
            p,
            extrapolation_log: xlog,
            estimates,
        });
    }
    Ok(AggregationReport {
        machine_ids: s.iter().map(|x| x.machine_id.clone()).collect(),
        gamma_bias_reduced_var: bias_reduced_gamma(&var, &mo),
        gamma_bias_reduced_amse: bias_reduced_gamma(&amse, &mo),
        gamma_naive: naive,
        gamma_var_opt: var,
        gamma_amse_opt: amse,
        lambda_hat_pooled: so.lambda,
        second_order: so,
        lambda0,
        quantiles,
        diagnostics: diagnostics(&s)?,
    })
}
