//! Weighted pooling of marginal Hill fits and extreme quantiles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dependence::Dependence;
use crate::error::{Error, Result};
use crate::linalg::{psd_repair, quad_form, SpdSolver};
use crate::tail::{lambda_hat, weissman_quantile, SecondOrderFit, TailFit};

/// Tolerance on `sum(w) = 1` for caller-supplied weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Unit-sum weights over `m` samples. Entries may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid("weight vector must be nonempty"));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("weights must be finite"));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {s}, not 1")));
        }
        Ok(WeightVector(w))
    }

    /// Divides by the sum; fails when the sum is zero or not finite.
    pub fn normalized(w: Vec<f64>) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if !(s.is_finite() && s.abs() > f64::MIN_POSITIVE) {
            return Err(Error::Degenerate("weights sum to zero".into()));
        }
        WeightVector::new(w.into_iter().map(|x| x / s).collect())
    }

    pub fn naive(m: usize) -> Result<Self> {
        WeightVector::new(vec![1.0 / m as f64; m])
    }

    pub fn one_hot(m: usize, j: usize) -> Result<Self> {
        if j >= m {
            return Err(Error::invalid(format!(
                "index {j} out of range for {m} samples"
            )));
        }
        let mut w = vec![0.0; m];
        w[j] = 1.0;
        WeightVector::new(w)
    }

    /// Weights proportional to nonnegative `sizes`.
    pub fn proportional(sizes: &[f64]) -> Result<Self> {
        if sizes.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::invalid(
                "proportional weights need nonnegative sizes",
            ));
        }
        WeightVector::normalized(sizes.to_vec())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    /// Euclidean projection onto the probability simplex.
    pub fn project_to_simplex(&self) -> WeightVector {
        let mut sorted = self.0.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cum = 0.0;
        let mut theta = 0.0;
        for (i, &s) in sorted.iter().enumerate() {
            cum += s;
            let t = (cum - 1.0) / (i + 1) as f64;
            if s - t > 0.0 {
                theta = t;
            }
        }
        let w: Vec<f64> = self.0.iter().map(|x| (x - theta).max(0.0)).collect();
        WeightVector::normalized(w).expect("projection keeps a positive entry")
    }

    fn check_len(&self, m: usize) -> Result<()> {
        if self.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        WeightVector::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Estimated asymptotic bias vector and covariance matrix on the `sqrt(k)` scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledMoments {
    pub bias: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub k_total: usize,
}

impl PooledMoments {
    pub fn m(&self) -> usize {
        self.bias.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    Naive,
    VarianceOptimal,
    AmseOptimal,
    Custom,
}

impl WeightScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightScheme::Naive => "naive",
            WeightScheme::VarianceOptimal => "variance_optimal",
            WeightScheme::AmseOptimal => "amse_optimal",
            WeightScheme::Custom => "custom",
        }
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(WeightScheme::Naive),
            "variance_optimal" | "var" => Ok(WeightScheme::VarianceOptimal),
            "amse_optimal" | "amse" => Ok(WeightScheme::AmseOptimal),
            "custom" => Ok(WeightScheme::Custom),
            other => Err(Error::invalid(format!("unknown weight scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledEstimate {
    pub gamma: f64,
    pub weights: WeightVector,
    /// `sqrt(w' V w / k)`.
    pub stderr: f64,
    /// Estimated bias `w' B / sqrt(k)` of the raw pooled estimate.
    pub bias_est: f64,
    pub scheme: WeightScheme,
    pub bias_reduced: bool,
}

/// `sum_j w_j gamma_j`.
pub fn pooled_gamma(gammas: &[f64], w: &WeightVector) -> Result<f64> {
    w.check_len(gammas.len())?;
    Ok(gammas.iter().zip(w.as_slice()).map(|(g, w)| g * w).sum())
}

/// Bias vector `B_j = sqrt(k) (lambda_j / sqrt(k_j)) / (1 - rho_j)` with
/// `lambda_j` computed from `gamma_plugin`, and covariance
/// `V_jl = k gamma^2 R_jl / k_j` (`R_jj = 1`), symmetrized and repaired to be
/// positive definite.
pub fn estimate_moments(
    fits: &[TailFit],
    so: &[SecondOrderFit],
    dependence: &Dependence,
    gamma_plugin: f64,
) -> Result<PooledMoments> {
    let m = fits.len();
    if m == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    if so.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: so.len(),
        });
    }
    if !(gamma_plugin > 0.0 && gamma_plugin.is_finite()) {
        return Err(Error::Degenerate(
            "pooled tail index plug-in is not positive".into(),
        ));
    }
    let k: usize = fits.iter().map(|f| f.k).sum();
    let kf = k as f64;
    let bias = DVector::from_iterator(
        m,
        fits.iter().zip(so).map(|(f, s)| {
            let lam = lambda_hat(gamma_plugin, s, f.n, f.k);
            kf.sqrt() * (lam / (f.k as f64).sqrt()) / (1.0 - s.rho_hat)
        }),
    );
    let scale = kf * gamma_plugin * gamma_plugin;
    let mut cov = DMatrix::zeros(m, m);
    for j in 0..m {
        let kj = fits[j].k as f64;
        cov[(j, j)] = scale / kj;
        if let Dependence::TailCopula(r) = dependence {
            check_square(r, m)?;
            for l in 0..m {
                if l != j {
                    cov[(j, l)] = scale * r[(j, l)] / kj;
                }
            }
        }
    }
    Ok(PooledMoments {
        bias,
        cov: psd_repair(&cov)?,
        k_total: k,
    })
}

pub(crate) fn check_square(r: &DMatrix<f64>, m: usize) -> Result<()> {
    if r.nrows() != m || r.ncols() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: r.nrows(),
        });
    }
    Ok(())
}

/// `V^{-1} 1 / (1' V^{-1} 1)`.
pub fn variance_optimal_weights(v: &DMatrix<f64>) -> Result<WeightVector> {
    let m = v.nrows();
    let solver = SpdSolver::new(v)?;
    let a = solver.solve(&DVector::from_element(m, 1.0));
    let s = a.sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Degenerate("1' V^-1 1 is not positive".into()));
    }
    WeightVector::normalized(a.iter().copied().collect())
}

struct AmseParts {
    a: DVector<f64>,
    c: DVector<f64>,
    one_a: f64,
    one_c: f64,
    b_c: f64,
}

fn amse_parts(moments: &PooledMoments) -> Result<AmseParts> {
    let m = moments.m();
    let solver = SpdSolver::new(&moments.cov)?;
    let a = solver.solve(&DVector::from_element(m, 1.0));
    let c = solver.solve(&moments.bias);
    Ok(AmseParts {
        one_a: a.sum(),
        one_c: c.sum(),
        b_c: moments.bias.dot(&c),
        a,
        c,
    })
}

/// Closed-form minimizer of `(w'B)^2 + w'Vw` subject to `sum(w) = 1`.
pub fn amse_optimal_weights(moments: &PooledMoments) -> Result<WeightVector> {
    let p = amse_parts(moments)?;
    let den = (1.0 + p.b_c) * p.one_a - p.one_c * p.one_c;
    if !(den > 0.0 && den.is_finite()) {
        return Err(Error::Degenerate(
            "AMSE weight denominator is not positive".into(),
        ));
    }
    let w = (&p.a * (1.0 + p.b_c) - &p.c * p.one_c) / den;
    let s = w.sum();
    WeightVector::new(w.iter().map(|x| x / s).collect())
}

/// Minimum AMSE value `(1 + B'V^-1 B) / [(1 + B'V^-1 B)(1'V^-1 1) - (1'V^-1 B)^2]`.
pub fn amse_optimal_value(moments: &PooledMoments) -> Result<f64> {
    let p = amse_parts(moments)?;
    let den = (1.0 + p.b_c) * p.one_a - p.one_c * p.one_c;
    if !(den > 0.0 && den.is_finite()) {
        return Err(Error::Degenerate(
            "AMSE weight denominator is not positive".into(),
        ));
    }
    Ok((1.0 + p.b_c) / den)
}

/// `(w'B)^2 + w'Vw`.
pub fn amse_value(w: &WeightVector, moments: &PooledMoments) -> f64 {
    let wb: f64 = w
        .as_slice()
        .iter()
        .zip(moments.bias.iter())
        .map(|(a, b)| a * b)
        .sum();
    wb * wb + quad_form(&moments.cov, w.as_slice())
}

/// Pooled estimate with its standard error and estimated bias.
pub fn pooled_estimate(
    gammas: &[f64],
    w: WeightVector,
    moments: &PooledMoments,
    scheme: WeightScheme,
) -> Result<PooledEstimate> {
    w.check_len(moments.m())?;
    let gamma = pooled_gamma(gammas, &w)?;
    let kf = moments.k_total as f64;
    let var = quad_form(&moments.cov, w.as_slice()).max(0.0);
    let wb: f64 = w
        .as_slice()
        .iter()
        .zip(moments.bias.iter())
        .map(|(a, b)| a * b)
        .sum();
    Ok(PooledEstimate {
        gamma,
        stderr: (var / kf).sqrt(),
        bias_est: wb / kf.sqrt(),
        weights: w,
        scheme,
        bias_reduced: false,
    })
}

/// Subtracts `w'B / sqrt(k)` from a raw pooled estimate.
pub fn bias_reduced_gamma(est: &PooledEstimate, moments: &PooledMoments) -> PooledEstimate {
    let wb: f64 = est
        .weights
        .as_slice()
        .iter()
        .zip(moments.bias.iter())
        .map(|(a, b)| a * b)
        .sum();
    let shift = wb / (moments.k_total as f64).sqrt();
    PooledEstimate {
        gamma: est.gamma - shift,
        bias_est: shift,
        bias_reduced: true,
        ..est.clone()
    }
}

fn marginal_weissman(fits: &[TailFit], w: &WeightVector, p: f64) -> Result<Vec<f64>> {
    if fits.is_empty() {
        return Err(Error::invalid("need at least one sample"));
    }
    w.check_len(fits.len())?;
    fits.iter().map(|f| weissman_quantile(f, p, None)).collect()
}

/// Weighted geometric mean of the marginal Weissman estimates.
pub fn geometric_pooled_weissman(fits: &[TailFit], w: &WeightVector, p: f64) -> Result<f64> {
    let q = marginal_weissman(fits, w, p)?;
    Ok(q.iter()
        .zip(w.as_slice())
        .map(|(q, w)| w * q.ln())
        .sum::<f64>()
        .exp())
}

/// Weighted arithmetic mean of the marginal Weissman estimates.
pub fn arithmetic_pooled_weissman(fits: &[TailFit], w: &WeightVector, p: f64) -> Result<f64> {
    let q = marginal_weissman(fits, w, p)?;
    Ok(q.iter().zip(w.as_slice()).map(|(q, w)| w * q).sum())
}

/// Weissman estimate of sample `j` with the pooled tail index substituted.
pub fn shared_gamma_weissman(fit: &TailFit, pooled_gamma: f64, p: f64) -> Result<f64> {
    weissman_quantile(fit, p, Some(pooled_gamma))
}
