use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::distributions::student_t_two_sided_p;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub coefficient: f64,
    pub p_value: f64,
}

/// Pearson and Spearman results for one predictor; `None` when undefined
/// (fewer than three points or a constant vector).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub n: usize,
    pub pearson: Option<Correlation>,
    pub spearman: Option<Correlation>,
}

impl CorrelationResult {
    pub fn compute(x: &[f64], y: &[f64]) -> Self {
        CorrelationResult { n: x.len().min(y.len()), pearson: pearson(x, y), spearman: spearman(x, y) }
    }
}

fn t_test(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let dof = (n - 2) as f64;
    student_t_two_sided_p(r * libm::sqrt(dof / (1.0 - r * r)), dof)
}

/// Product-moment correlation with a t-approximation p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<Correlation> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    Some(Correlation { coefficient: r, p_value: t_test(r, n) })
}

/// 1-based ranks; ties share their mean rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = mean_rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman's rho as Pearson on mean ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<Correlation> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_negation() {
        let x = [1.0, 2.5, 3.0, 7.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap().coefficient - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &x).unwrap().coefficient - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap().coefficient + 1.0).abs() < 1e-12);
        assert!((spearman(&x, &neg).unwrap().coefficient + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &x).unwrap().p_value, 0.0);
    }

    #[test]
    fn cubic_is_monotone_but_not_linear() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powi(3)).collect();
        assert!((spearman(&x, &y).unwrap().coefficient - 1.0).abs() < 1e-12);
        // Σxy = 34, Σx² = 10, Σy² = 130
        let expected = 34.0 / libm::sqrt(10.0 * 130.0);
        let r = pearson(&x, &y).unwrap().coefficient;
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 0.943).abs() < 1e-3);
    }

    #[test]
    fn undefined_cases() {
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_none());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_none());
        assert!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn tied_ranks_use_means() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }
}
