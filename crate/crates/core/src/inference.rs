//! Deviance tests for equality of tail indices and of extreme quantiles, and
//! asymptotic confidence intervals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dependence::Dependence;
use crate::error::{Error, Result};
use crate::linalg::{psd_repair, quad_form, SpdSolver};
use crate::numerics::{chisq_sf, normal_quantile};
use crate::pooling::{check_square, PooledEstimate, WeightVector};
use crate::tail::TailFit;

/// Levels at which every test reports a decision.
pub const REJECTION_LEVELS: [f64; 3] = [0.10, 0.05, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelDecision {
    pub level: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub reject_at: Vec<LevelDecision>,
}

impl TestResult {
    pub fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = chisq_sf(statistic, dof).clamp(0.0, 1.0);
        TestResult {
            statistic,
            dof,
            p_value,
            reject_at: REJECTION_LEVELS
                .iter()
                .map(|&level| LevelDecision {
                    level,
                    reject: p_value < level,
                })
                .collect(),
        }
    }

    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl IntervalEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Covariance plug-in for the tests, with each sample's own tail index:
/// `V_jj = k g_j^2 / k_j`, `V_jl = k g_j g_l R_jl / k_j`.
pub fn v_bar(fits: &[TailFit], dependence: &Dependence) -> Result<DMatrix<f64>> {
    let m = fits.len();
    if m == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let k: f64 = fits.iter().map(|f| f.k as f64).sum();
    let mut v = DMatrix::zeros(m, m);
    for j in 0..m {
        let (gj, kj) = (fits[j].gamma_hat, fits[j].k as f64);
        v[(j, j)] = k * gj * gj / kj;
        if let Dependence::TailCopula(r) = dependence {
            check_square(r, m)?;
            for l in 0..m {
                if l != j {
                    v[(j, l)] = k * gj * fits[l].gamma_hat * r[(j, l)] / kj;
                }
            }
        }
    }
    psd_repair(&v)
}

// k (x - mu 1)' V^-1 (x - mu 1) with mu the V^-1-weighted mean of x.
fn deviance(x: &[f64], v: &DMatrix<f64>, k_total: usize) -> Result<f64> {
    let m = x.len();
    if m < 2 {
        return Err(Error::invalid("a test needs at least two samples"));
    }
    if v.nrows() != m || v.ncols() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: v.nrows(),
        });
    }
    let solver = SpdSolver::new(v)?;
    let a = solver.solve(&DVector::from_element(m, 1.0));
    let mu = a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() / a.sum();
    let r = DVector::from_iterator(m, x.iter().map(|x| x - mu));
    let s = solver.solve(&r);
    Ok((k_total as f64 * r.dot(&s)).max(0.0))
}

/// Likelihood-ratio type statistic for equal tail indices, chi-square with
/// `m - 1` degrees of freedom under the null.
pub fn homogeneity_test(
    gammas: &[f64],
    v_bar: &DMatrix<f64>,
    k_total: usize,
) -> Result<TestResult> {
    let stat = deviance(gammas, v_bar, k_total)?;
    Ok(TestResult::from_statistic(stat, gammas.len() - 1))
}

/// Closed form of the homogeneity statistic when the samples are tail
/// independent: `sum_j k_j (g_j - mu)^2 / g_j^2`.
pub fn pearson_homogeneity_statistic(gammas: &[f64], ks: &[usize]) -> Result<f64> {
    if gammas.len() != ks.len() {
        return Err(Error::LengthMismatch {
            expected: gammas.len(),
            got: ks.len(),
        });
    }
    if gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::Degenerate(
            "tail index estimates must be positive".into(),
        ));
    }
    let prec: Vec<f64> = gammas
        .iter()
        .zip(ks)
        .map(|(g, &k)| k as f64 / (g * g))
        .collect();
    let mu = prec.iter().zip(gammas).map(|(p, g)| p * g).sum::<f64>() / prec.iter().sum::<f64>();
    Ok(prec
        .iter()
        .zip(gammas)
        .map(|(p, g)| p * (g - mu) * (g - mu))
        .sum())
}

/// Statistic for equal extreme quantiles, computed on log Weissman estimates
/// and scaled by `1 / log^2(k / (n p))`.
pub fn homoskedasticity_test(
    log_quantiles: &[f64],
    v_bar: &DMatrix<f64>,
    k_total: usize,
    extrapolation_log: f64,
) -> Result<TestResult> {
    if !(extrapolation_log > 0.0 && extrapolation_log.is_finite()) {
        return Err(Error::invalid(
            "extrapolation factor log(k/(np)) must be positive",
        ));
    }
    let stat = deviance(log_quantiles, v_bar, k_total)? / (extrapolation_log * extrapolation_log);
    Ok(TestResult::from_statistic(stat, log_quantiles.len() - 1))
}

fn check_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::ProbabilityOutOfRange {
            p: level,
            range: "(0, 1)".into(),
        });
    }
    normal_quantile(0.5 + level / 2.0)
}

/// `gamma +/- z stderr`.
pub fn gamma_confidence_interval(est: &PooledEstimate, level: f64) -> Result<IntervalEstimate> {
    let h = check_level(level)? * est.stderr;
    Ok(IntervalEstimate {
        center: est.gamma,
        lower: est.gamma - h,
        upper: est.gamma + h,
        level,
    })
}

/// `q exp(+/- z log(k/(np)) sqrt(w'Vw / k))`.
pub fn quantile_confidence_interval(
    q_star: f64,
    w: &WeightVector,
    v: &DMatrix<f64>,
    k_total: usize,
    extrapolation_log: f64,
    level: f64,
) -> Result<IntervalEstimate> {
    if !(q_star > 0.0) {
        return Err(Error::invalid("quantile estimate must be positive"));
    }
    if !(extrapolation_log > 0.0) {
        return Err(Error::invalid(
            "extrapolation factor log(k/(np)) must be positive",
        ));
    }
    if w.len() != v.nrows() {
        return Err(Error::LengthMismatch {
            expected: v.nrows(),
            got: w.len(),
        });
    }
    let sd = (quad_form(v, w.as_slice()).max(0.0) / k_total as f64).sqrt();
    let h = check_level(level)? * extrapolation_log * sd;
    Ok(IntervalEstimate {
        center: q_star,
        lower: q_star * (-h).exp(),
        upper: q_star * h.exp(),
        level,
    })
}
