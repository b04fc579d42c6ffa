//! Empirical upper tail copula between two co-observed samples.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Ranks of the first `n_overlap` co-indexed observations of two series.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRanks {
    pub n_overlap: usize,
    /// Average ranks in `1..=n_overlap`.
    pub ranks_j: Vec<f64>,
    pub ranks_l: Vec<f64>,
    pub k_pair: usize,
}

/// How cross-sample tail dependence enters the covariance estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    /// Samples declared tail independent: all off-diagonal `R` are zero.
    Independent,
    /// Entry `(j, l)` holds `R_{j,l}(k_j/k_l, n_j/n_l)`; the diagonal is ignored.
    TailCopula(DMatrix<f64>),
}

/// Ascending average ranks (ties share the mean of their positions).
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            ranks[t] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pairs two series given in their original observation order. Ranks are
/// taken within the first `min(n_j, n_l)` observations of each; `k_pair` is
/// `k_j` when `n_j < n_l` and `k_l` otherwise.
pub fn build_paired_ranks(x_j: &[f64], x_l: &[f64], k_j: usize, k_l: usize) -> Result<PairedRanks> {
    let n = x_j.len().min(x_l.len());
    if n == 0 {
        return Err(Error::invalid("tail copula needs a nonempty overlap"));
    }
    let k_pair = if x_j.len() < x_l.len() { k_j } else { k_l };
    if k_pair == 0 || k_pair > n {
        return Err(Error::KOutOfRange { k: k_pair, n });
    }
    Ok(PairedRanks {
        n_overlap: n,
        ranks_j: average_ranks(&x_j[..n]),
        ranks_l: average_ranks(&x_l[..n]),
        k_pair,
    })
}

/// `(1/k) #{i : n+1-r_ij <= u k (n+1)/n, n+1-r_il <= v k (n+1)/n}`.
/// An infinite argument places no constraint on that coordinate.
pub fn empirical_tail_copula(pr: &PairedRanks, u: f64, v: f64) -> Result<f64> {
    if u.is_nan() || v.is_nan() || u < 0.0 || v < 0.0 {
        return Err(Error::invalid("tail copula arguments must be nonnegative"));
    }
    if u.is_infinite() && v.is_infinite() {
        return Err(Error::invalid(
            "tail copula arguments cannot both be infinite",
        ));
    }
    let n = pr.n_overlap as f64;
    let k = pr.k_pair as f64;
    let scale = k * (n + 1.0) / n;
    let (cu, cv) = (u * scale, v * scale);
    let count = pr
        .ranks_j
        .iter()
        .zip(&pr.ranks_l)
        .filter(|(&rj, &rl)| n + 1.0 - rj <= cu && n + 1.0 - rl <= cv)
        .count();
    Ok(count as f64 / k)
}

/// Tail copula matrix feeding the covariance estimate: entry `(j, l)` is
/// `R_{j,l}` evaluated at `(k_j/k_l, n_j/n_l)`, each argument clamped to
/// `[1/k_pair, k_pair]`.
pub fn tail_copula_matrix(series: &[Vec<f64>], ks: &[usize]) -> Result<DMatrix<f64>> {
    let m = series.len();
    if ks.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: ks.len(),
        });
    }
    let mut r = DMatrix::zeros(m, m);
    for j in 0..m {
        for l in 0..m {
            if j == l {
                continue;
            }
            let pr = build_paired_ranks(&series[j], &series[l], ks[j], ks[l])?;
            let kp = pr.k_pair as f64;
            let clamp = |x: f64| x.clamp(1.0 / kp, kp);
            let u = clamp(ks[j] as f64 / ks[l] as f64);
            let v = clamp(series[j].len() as f64 / series[l].len() as f64);
            r[(j, l)] = empirical_tail_copula(&pr, u, v)?;
        }
    }
    Ok(r)
}
