//! Probit link helpers and Gauss–Hermite expectations under a Gaussian.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

const HERMITE_POINTS: usize = 32;

fn ln_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// `ln Φ(x)`, accurate far into the lower tail.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x < -30.0 {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        ln_normal_pdf(x) - (-x).ln() + series.ln()
    } else {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    }
}

/// Inverse Mills ratio `φ(x) / Φ(x)`, the derivative of `ln Φ`.
pub fn mills(x: f64) -> f64 {
    (ln_normal_pdf(x) - ln_normal_cdf(x)).exp()
}

/// Second derivative of `ln Φ`; always negative.
pub fn ln_normal_cdf_curvature(x: f64) -> f64 {
    let l = mills(x);
    -l * (x + l)
}

/// Nodes and weights (summing to one) for `E[g(t)]`, `t ~ N(0, 1)`.
pub fn hermite_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        // Golub–Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
        let n = HERMITE_POINTS;
        let mut jacobi = DMatrix::zeros(n, n);
        for k in 1..n {
            let b = (k as f64).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut rule: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        rule.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = rule.iter().map(|r| r.1).sum();
        (
            rule.iter().map(|r| r.0).collect(),
            rule.iter().map(|r| r.1 / total).collect(),
        )
    })
}

/// Expected log-likelihood of one probit comparison and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbitExpectation {
    /// `E[ln Φ(d / c)]` for `d ~ N(mean, var)`.
    pub value: f64,
    /// Derivative with respect to `mean`.
    pub d_mean: f64,
    /// Derivative with respect to `var` (Stein form, half the expected curvature).
    pub d_var: f64,
}

pub fn probit_expectation(mean: f64, var: f64, scale: f64) -> ProbitExpectation {
    let (nodes, weights) = hermite_rule();
    let sd = var.max(0.0).sqrt();
    let mut out = ProbitExpectation {
        value: 0.0,
        d_mean: 0.0,
        d_var: 0.0,
    };
    for (t, w) in nodes.iter().zip(weights) {
        let x = (mean + sd * t) / scale;
        out.value += w * ln_normal_cdf(x);
        out.d_mean += w * mills(x) / scale;
        out.d_var += 0.5 * w * ln_normal_cdf_curvature(x) / (scale * scale);
    }
    out
}
