use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Matern32,
    Matern52,
    SquaredExponential,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Matern32 => "matern-3/2",
            KernelKind::Matern52 => "matern-5/2",
            KernelKind::SquaredExponential => "squared-exponential",
        })
    }
}

/// Stationary isotropic kernel with unit amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub length_scale: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, length_scale: f64) -> Self {
        Kernel { kind, length_scale }
    }

    pub fn matern32(length_scale: f64) -> Self {
        Kernel::new(KernelKind::Matern32, length_scale)
    }

    /// Kernel value as a function of Euclidean distance.
    pub fn of_distance(&self, r: f64) -> f64 {
        let s = r / self.length_scale;
        match self.kind {
            KernelKind::Matern32 => {
                let t = 3f64.sqrt() * s;
                (1.0 + t) * (-t).exp()
            }
            KernelKind::Matern52 => {
                let t = 5f64.sqrt() * s;
                (1.0 + t + t * t / 3.0) * (-t).exp()
            }
            KernelKind::SquaredExponential => (-0.5 * s * s).exp(),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::Schema(format!(
                "kernel inputs differ in dimension ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        Ok(self.eval_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.of_distance(d2.sqrt())
    }

    /// Cross-covariance matrix with `rows.len()` rows and `cols.len()` columns.
    pub fn cross(&self, rows: &[&[f64]], cols: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.eval_unchecked(rows[i], cols[j])
        })
    }

    pub fn gram(&self, xs: &[&[f64]]) -> DMatrix<f64> {
        let n = xs.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = 1.0;
            for j in 0..i {
                let v = self.eval_unchecked(xs[i], xs[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}
