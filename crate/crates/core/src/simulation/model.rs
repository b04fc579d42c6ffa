//! Generative models: heavy-tailed marginals joined by a copula.
//!
//! Draws are produced as survival probabilities `s = 1 - u` so that the far
//! upper tail is resolved with full relative precision.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    abs_student_t_isf, abs_student_t_sf, normal_cdf, student_t_cdf, student_t_sf,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Marginal {
    /// `P(X > x) = x^{-1/gamma}`, `x >= 1`.
    Pareto { gamma: f64 },
    /// `P(X <= x) = exp(-x^{-1/gamma})`.
    Frechet { gamma: f64 },
    /// `P(X > x) = (1 + x^{-rho/gamma})^{1/rho}`.
    Burr { gamma: f64, rho: f64 },
    /// `|T|` with `T` Student-t on `df` degrees of freedom.
    AbsStudentT { df: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Pareto { gamma } | Marginal::Frechet { gamma } => {
                gamma > 0.0 && gamma.is_finite()
            }
            Marginal::Burr { gamma, rho } => {
                gamma > 0.0 && gamma.is_finite() && rho < 0.0 && rho.is_finite()
            }
            Marginal::AbsStudentT { df } => df > 0.0 && df.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid marginal parameters {self:?}"
            )))
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            Marginal::Pareto { gamma }
            | Marginal::Frechet { gamma }
            | Marginal::Burr { gamma, .. } => gamma,
            Marginal::AbsStudentT { df } => 1.0 / df,
        }
    }

    /// Second-order pair `(rho, beta)` with `A(t) = gamma beta t^rho`; `None`
    /// for the exact Pareto tail where `A` vanishes.
    pub fn second_order(&self) -> Option<(f64, f64)> {
        match *self {
            Marginal::Pareto { .. } => None,
            Marginal::Frechet { .. } => Some((-1.0, 0.5)),
            Marginal::Burr { rho, .. } => Some((rho, 1.0)),
            Marginal::AbsStudentT { df } => Some((-2.0 / df, abs_t_beta(df))),
        }
    }

    /// `A(t)`, the second-order auxiliary function.
    pub fn a_function(&self, t: f64) -> f64 {
        match self.second_order() {
            None => 0.0,
            Some((rho, beta)) => self.gamma() * beta * t.powf(rho),
        }
    }

    /// Quantile at level `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange {
                p: u,
                range: "(0, 1)".into(),
            });
        }
        self.isf(1.0 - u)
    }

    /// Inverse survival function: the `x` with `P(X > x) = s`.
    pub fn isf(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::ProbabilityOutOfRange {
                p: s,
                range: "(0, 1)".into(),
            });
        }
        Ok(match *self {
            Marginal::Pareto { gamma } => s.powf(-gamma),
            Marginal::Frechet { gamma } => (-(-s).ln_1p()).powf(-gamma),
            Marginal::Burr { gamma, rho } => (rho * s.ln()).exp_m1().powf(-gamma / rho),
            Marginal::AbsStudentT { df } => abs_student_t_isf(s, df)?,
        })
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            Marginal::Pareto { gamma } => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-1.0 / gamma)
                }
            }
            Marginal::Frechet { gamma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    -(-x.powf(-1.0 / gamma)).exp_m1()
                }
            }
            Marginal::Burr { gamma, rho } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (x.powf(-rho / gamma).ln_1p() / rho).exp()
                }
            }
            Marginal::AbsStudentT { df } => abs_student_t_sf(x, df),
        }
    }
}

// |T| on df degrees of freedom has survival C x^{-df} (1 - a x^{-2} + ...) with
// C = 2 Gamma((df+1)/2) df^{df/2 - 1} / (sqrt(pi) Gamma(df/2)) and
// a = df^2 (df + 1) / (2 (df + 2)). Inverting gives
// A(t) = (2 a / df^2) C^{-2/df} t^{-2/df}.
fn abs_t_beta(df: f64) -> f64 {
    use crate::numerics::log_gamma;
    use std::f64::consts::{LN_2, PI};
    let ln_c = LN_2 + log_gamma(0.5 * (df + 1.0)) + (0.5 * df - 1.0) * df.ln()
        - 0.5 * PI.ln()
        - log_gamma(0.5 * df);
    let a = df * df * (df + 1.0) / (2.0 * (df + 2.0));
    (2.0 * a / (df * df)) * (-2.0 / df * ln_c).exp() * df
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Copula {
    Independence,
    /// Clayton, `theta > 0` (upper-tail independent).
    Clayton {
        theta: f64,
    },
    /// Gumbel, `theta >= 1`, upper tail copula `R(1,1) = 2 - 2^{1/theta}`.
    Gumbel {
        theta: f64,
    },
    /// Equicorrelated Gaussian, `0 <= r < 1` (upper-tail independent).
    Gaussian {
        r: f64,
    },
    /// Equicorrelated Student, `0 <= r < 1`, `df > 0`.
    Student {
        r: f64,
        df: f64,
    },
}

impl Copula {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Copula::Independence => true,
            Copula::Clayton { theta } => theta > 0.0 && theta.is_finite(),
            Copula::Gumbel { theta } => theta >= 1.0 && theta.is_finite(),
            Copula::Gaussian { r } => (0.0..1.0).contains(&r),
            Copula::Student { r, df } => (0.0..1.0).contains(&r) && df > 0.0 && df.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid copula parameters {self:?}"
            )))
        }
    }

    /// Upper tail copula `R(1, 1)` of any pair of columns.
    pub fn tail_dependence(&self) -> f64 {
        match *self {
            Copula::Independence | Copula::Clayton { .. } | Copula::Gaussian { .. } => 0.0,
            Copula::Gumbel { theta } => 2.0 - 2f64.powf(1.0 / theta),
            Copula::Student { r, df } => {
                2.0 * student_t_cdf(-((df + 1.0) * (1.0 - r) / (1.0 + r)).sqrt(), df + 1.0)
            }
        }
    }

    /// `n` rows of `m` joint survival probabilities, returned column-major.
    pub fn sample_survival<R: Rng + ?Sized>(
        &self,
        m: usize,
        n: usize,
        rng: &mut R,
    ) -> Vec<Vec<f64>> {
        let mut cols = vec![Vec::with_capacity(n); m];
        for _ in 0..n {
            match *self {
                Copula::Independence => {
                    for c in cols.iter_mut() {
                        c.push(1.0 - rng.random::<f64>());
                    }
                }
                Copula::Clayton { theta } => {
                    let v: f64 = Gamma::new(1.0 / theta, 1.0).expect("validated").sample(rng);
                    for c in cols.iter_mut() {
                        let e: f64 = Exp1.sample(rng);
                        // u = (1 + e/v)^{-1/theta}
                        c.push(-(-(e / v).ln_1p() / theta).exp_m1());
                    }
                }
                Copula::Gumbel { theta } => {
                    let alpha = 1.0 / theta;
                    let s = positive_stable(alpha, rng);
                    for c in cols.iter_mut() {
                        let e: f64 = Exp1.sample(rng);
                        // u = exp(-(e/s)^alpha)
                        c.push(-(-(e / s).powf(alpha)).exp_m1());
                    }
                }
                Copula::Gaussian { r } => {
                    let z0: f64 = StandardNormal.sample(rng);
                    for c in cols.iter_mut() {
                        let e: f64 = StandardNormal.sample(rng);
                        c.push(normal_cdf(-(r.sqrt() * z0 + (1.0 - r).sqrt() * e)));
                    }
                }
                Copula::Student { r, df } => {
                    let z0: f64 = StandardNormal.sample(rng);
                    let w: f64 = ChiSquared::new(df).expect("validated").sample(rng);
                    let scale = (w / df).sqrt();
                    for c in cols.iter_mut() {
                        let e: f64 = StandardNormal.sample(rng);
                        let t = (r.sqrt() * z0 + (1.0 - r).sqrt() * e) / scale;
                        c.push(student_t_sf(t, df));
                    }
                }
            }
        }
        cols
    }
}

// Positive stable variable with Laplace transform exp(-t^alpha), 0 < alpha <= 1,
// via Kanter's representation.
fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let theta = std::f64::consts::PI * (1.0 - rng.random::<f64>());
    let w: f64 = Exp1.sample(rng);
    let a = (alpha * theta).sin() / theta.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * theta).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Per-column deviation from the base model, used for alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnOverride {
    pub column: usize,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub marginal: Option<Marginal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub marginal: Marginal,
    #[serde(default = "independence")]
    pub copula: Copula,
    /// Sample sizes `n_j`; their count is the number of samples `m`.
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub overrides: Vec<ColumnOverride>,
}

fn independence() -> Copula {
    Copula::Independence
}

impl ModelSpec {
    pub fn new(marginal: Marginal, copula: Copula, sizes: Vec<usize>) -> Self {
        ModelSpec {
            marginal,
            copula,
            sizes,
            overrides: Vec::new(),
        }
    }

    /// `m` samples of equal size `n`.
    pub fn balanced(marginal: Marginal, copula: Copula, m: usize, n: usize) -> Self {
        ModelSpec::new(marginal, copula, vec![n; m])
    }

    pub fn with_override(mut self, o: ColumnOverride) -> Self {
        self.overrides.push(o);
        self
    }

    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.marginal.validate()?;
        self.copula.validate()?;
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return Err(Error::invalid(
                "every sample needs at least two observations",
            ));
        }
        for o in &self.overrides {
            if o.column >= self.m() {
                return Err(Error::invalid(format!(
                    "override column {} out of range",
                    o.column
                )));
            }
            if let Some(s) = o.scale {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::invalid("override scale must be positive"));
                }
            }
            if let Some(mg) = o.marginal {
                mg.validate()?;
            }
        }
        Ok(())
    }

    /// Marginal and scale of column `j`.
    pub fn column(&self, j: usize) -> (Marginal, f64) {
        let mut out = (self.marginal, 1.0);
        for o in self.overrides.iter().filter(|o| o.column == j) {
            if let Some(mg) = o.marginal {
                out.0 = mg;
            }
            if let Some(s) = o.scale {
                out.1 = s;
            }
        }
        out
    }

    /// True quantile of the base marginal at level `1 - p`.
    pub fn true_quantile(&self, p: f64) -> Result<f64> {
        self.marginal.isf(p)
    }
}

/// Smallest survival probability handed to an inverse survival function.
const S_MIN: f64 = 1e-300;
/// Largest survival probability, keeping quantiles strictly positive.
const S_MAX: f64 = 1.0 - f64::EPSILON;

/// Draws one dataset: `n_max` joint rows from the copula, column `j` keeping
/// its first `n_j` rows, transformed to the column's marginal and scale.
pub fn sample_model<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let n_max = *spec.sizes.iter().max().expect("validated nonempty");
    let surv = spec.copula.sample_survival(spec.m(), n_max, rng);
    surv.into_iter()
        .enumerate()
        .map(|(j, col)| {
            let (mg, scale) = spec.column(j);
            col.into_iter()
                .take(spec.sizes[j])
                .map(|s| Ok(scale * mg.isf(s.clamp(S_MIN, S_MAX))?))
                .collect()
        })
        .collect()
}

/// Generator for replication `rep` of an experiment seeded with `seed`:
/// each replication reads its own ChaCha stream, so results do not depend on
/// scheduling.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// [`sample_model`] with a generator built from a seed.
pub fn sample_model_seeded(spec: &ModelSpec, seed: u64) -> Result<Vec<Vec<f64>>> {
    sample_model(spec, &mut replication_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_examples() {
        let p = Marginal::Pareto { gamma: 1.0 };
        assert!((p.quantile(0.99).unwrap() - 100.0).abs() < 1e-9);
        let f = Marginal::Frechet { gamma: 1.0 };
        assert!((f.quantile(0.5).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-12);
        let b = Marginal::Burr {
            gamma: 1.0,
            rho: -1.0,
        };
        assert!((b.quantile(0.99).unwrap() - 99.0).abs() < 1e-9);
        assert!(p.quantile(1.0).is_err());
        assert!(p.quantile(0.0).is_err());
    }

    #[test]
    fn survival_inverts_isf() {
        let ms = [
            Marginal::Pareto { gamma: 0.7 },
            Marginal::Frechet { gamma: 1.3 },
            Marginal::Burr {
                gamma: 0.5,
                rho: -0.5,
            },
            Marginal::AbsStudentT { df: 3.0 },
        ];
        for m in ms {
            for &s in &[0.9, 0.5, 1e-3, 1e-9] {
                let x = m.isf(s).unwrap();
                assert!((m.survival(x) / s - 1.0).abs() < 1e-9, "{m:?} at {s}");
            }
        }
    }

    #[test]
    fn abs_t_second_order_matches_tail() {
        // compare t U'(t)/U(t) - gamma numerically against A(t) far out
        let m = Marginal::AbsStudentT { df: 4.0 };
        let t = 1e6;
        let u = |t: f64| m.isf(1.0 / t).unwrap();
        let h = 1e-4;
        let dlog = ((u(t * (1.0 + h))).ln() - (u(t * (1.0 - h))).ln()) / (2.0 * h);
        let a_num = dlog - m.gamma();
        assert!(
            (a_num / m.a_function(t) - 1.0).abs() < 0.02,
            "{a_num} vs {}",
            m.a_function(t)
        );
    }

    #[test]
    fn frechet_second_order_matches_tail() {
        let m = Marginal::Frechet { gamma: 1.0 };
        let t = 1e4;
        let u = |t: f64| m.isf(1.0 / t).unwrap();
        let h = 1e-4;
        let dlog = ((u(t * (1.0 + h))).ln() - (u(t * (1.0 - h))).ln()) / (2.0 * h);
        assert!(((dlog - 1.0) / m.a_function(t) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn determinism_and_unequal_sizes() {
        let spec = ModelSpec::new(
            Marginal::Burr {
                gamma: 1.0,
                rho: -1.0,
            },
            Copula::Gumbel { theta: 2.0 },
            vec![30, 50, 10],
        );
        let a = sample_model_seeded(&spec, 7).unwrap();
        let b = sample_model_seeded(&spec, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(Vec::len).collect::<Vec<_>>(), vec![30, 50, 10]);
        assert!(a.iter().flatten().all(|x| *x > 0.0 && x.is_finite()));
        let c = sample_model(&spec, &mut replication_rng(7, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn overrides_apply() {
        let spec = ModelSpec::balanced(Marginal::Pareto { gamma: 1.0 }, Copula::Independence, 2, 5)
            .with_override(ColumnOverride {
                column: 1,
                scale: Some(3.0),
                marginal: Some(Marginal::Pareto { gamma: 2.0 }),
            });
        assert_eq!(spec.column(1), (Marginal::Pareto { gamma: 2.0 }, 3.0));
        let x = sample_model_seeded(&spec, 1).unwrap();
        assert!(x[1].iter().all(|v| *v >= 3.0));
        let bad = ModelSpec::balanced(
            Marginal::Pareto { gamma: 1.0 },
            Copula::Gumbel { theta: 0.5 },
            2,
            5,
        );
        assert!(bad.validate().is_err());
    }

    #[test]
    fn student_tail_dependence_limits() {
        let c = Copula::Student { r: 0.0, df: 1.0 };
        // bivariate Cauchy-type copula keeps tail dependence at r = 0
        assert!(c.tail_dependence() > 0.2);
        assert!(
            (Copula::Gumbel { theta: 2.0 }.tail_dependence() - (2.0 - 2f64.sqrt())).abs() < 1e-15
        );
    }
}
