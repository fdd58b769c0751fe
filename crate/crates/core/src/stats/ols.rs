use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::distributions::student_t_two_sided_p;
use crate::error::{Error, Result};
use crate::neuralnet::Matrix;

/// Columns whose normalized Householder pivot falls below this are treated
/// as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub dof: usize,
    pub residuals: Vec<f64>,
}

/// Least squares via Householder QR on the column-normalized design.
///
/// `x` must already contain the intercept column if one is wanted.
pub fn ols_fit(x: &Matrix, y: &[f64]) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::ShapeMismatch { op: "ols_fit", expected: (n, 1), found: (y.len(), 1) });
    }
    if n <= p {
        return Err(Error::InsufficientObservations { needed: p + 1, found: n });
    }

    // column scaling makes the rank threshold scale-free
    let mut scale = vec![0.0; p];
    for (j, s) in scale.iter_mut().enumerate() {
        *s = libm::sqrt((0..n).map(|i| { let v = x.get(i, j); v * v }).sum::<f64>());
        if *s == 0.0 {
            return Err(Error::RankDeficient { column: j });
        }
    }
    // column-major working copy
    let mut a: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| x.get(i, j) / scale[j]).collect()).collect();
    let mut qty = y.to_vec();
    let mut r_diag = vec![0.0; p];

    for k in 0..p {
        let norm = libm::sqrt(a[k][k..].iter().map(|v| v * v).sum::<f64>());
        if norm < RANK_TOLERANCE {
            return Err(Error::RankDeficient { column: k });
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 > 0.0 {
            let apply = |col: &mut [f64]| {
                let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                let f = 2.0 * dot / vnorm2;
                col.iter_mut().zip(&v).for_each(|(c, vi)| *c -= f * vi);
            };
            for col in a.iter_mut().skip(k) {
                apply(&mut col[k..]);
            }
            apply(&mut qty[k..]);
        }
        r_diag[k] = a[k][k];
        if r_diag[k].abs() < RANK_TOLERANCE {
            return Err(Error::RankDeficient { column: k });
        }
    }

    // back substitution R β_s = Qᵀy, where R[i][j] = a[j][i]
    let mut beta_s = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|j| a[j][i] * beta_s[j]).sum();
        beta_s[i] = (qty[i] - s) / a[i][i];
    }
    let coefficients: Vec<f64> = beta_s.iter().zip(&scale).map(|(b, s)| b / s).collect();

    // R⁻¹ by back substitution, then (XᵀX)⁻¹ = S⁻¹ R⁻¹ R⁻ᵀ S⁻¹
    let mut rinv = vec![vec![0.0; p]; p];
    #[allow(clippy::needless_range_loop)]
    for c in 0..p {
        for i in (0..=c).rev() {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = ((i + 1)..=c).map(|j| a[j][i] * rinv[j][c]).sum();
            rinv[i][c] = (rhs - s) / a[i][i];
        }
    }

    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..p).map(|j| x.get(i, j) * coefficients[j]).sum::<f64>())
        .collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let dof = n - p;
    let sigma2 = ssr / dof as f64;
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else if ssr == 0.0 { 1.0 } else { 0.0 };

    let mut std_errors = Vec::with_capacity(p);
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let diag: f64 = (j..p).map(|c| rinv[j][c] * rinv[j][c]).sum::<f64>() / (scale[j] * scale[j]);
        let se = libm::sqrt(sigma2 * diag);
        let b = coefficients[j];
        let (t, pv) = if se > 0.0 {
            let t = b / se;
            (t, student_t_two_sided_p(t, dof as f64))
        } else if b == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(b), 0.0)
        };
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(pv);
    }

    Ok(OlsFit { coefficients, std_errors, t_stats, p_values, r_squared, dof, residuals })
}

/// `***` for p < 0.001, `**` for p < 0.01, `*` for p < 0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
