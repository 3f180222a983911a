//! Ordinary least-squares regression from feature vectors to defect counts.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{format_value, FeatureMatrix};

/// Diagonal jitter used when the normal equations are singular.
pub const RIDGE_JITTER: f64 = 1e-8;

/// Pivots at or below this fraction of the largest diagonal entry mark the
/// normal matrix as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub feature_names: Vec<String>,
    /// Diagonal jitter that was needed to solve, 0 for a regular system.
    pub jitter: f64,
}

impl LinearModel {
    /// Plain-text dump, one `feature,coefficient` line per term.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "feature,coefficient")?;
        writeln!(out, "(intercept),{}", format_value(self.intercept))?;
        for (name, c) in self.feature_names.iter().zip(&self.coefficients) {
            writeln!(out, "{name},{}", format_value(*c))?;
        }
        Ok(())
    }
}

/// Least-squares fit with an intercept, solved on the centered normal
/// equations by Cholesky factorization.
pub fn fit(x: &FeatureMatrix, y: &[f64]) -> Result<LinearModel> {
    let n = x.n_rows();
    if n != y.len() {
        return Err(Error::LengthMismatch { left: n, right: y.len() });
    }
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let p = x.n_cols();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let x_means: Vec<f64> = (0..p).map(|j| x.values.column(j).mean()).collect();
    let xc = DMatrix::from_fn(n, p, |i, j| x.values[(i, j)] - x_means[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    let gram = xc.transpose() * &xc;
    let rhs = xc.transpose() * yc;
    let (beta, jitter) = solve_normal(&gram, &rhs);

    let intercept = y_mean - x_means.iter().zip(beta.iter()).map(|(m, b)| m * b).sum::<f64>();
    Ok(LinearModel {
        intercept,
        coefficients: beta.iter().copied().collect(),
        feature_names: x.columns.clone(),
        jitter,
    })
}

/// Solves `a·x = b` for symmetric positive semi-definite `a`, adding diagonal
/// jitter when the factorization finds a vanishing pivot.
fn solve_normal(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let p = a.nrows();
    if p == 0 {
        return (DVector::zeros(0), 0.0);
    }
    let scale = a.diagonal().max().max(0.0);
    if scale == 0.0 {
        // every centered column is zero
        return (DVector::zeros(p), 0.0);
    }
    let mut jitter = 0.0;
    loop {
        let mut shifted = a.clone();
        for i in 0..p {
            shifted[(i, i)] += jitter;
        }
        if let Some(l) = cholesky(&shifted, PIVOT_TOLERANCE * scale) {
            return (cholesky_solve(&l, b), jitter);
        }
        jitter = if jitter == 0.0 { RIDGE_JITTER } else { jitter * 10.0 };
    }
}

/// Lower-triangular `l` with `l·lᵀ = a`, or `None` if a pivot is at or below `tol`.
fn cholesky(a: &DMatrix<f64>, tol: f64) -> Option<DMatrix<f64>> {
    let p = a.nrows();
    let mut l = DMatrix::zeros(p, p);
    for j in 0..p {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tol {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..p {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let p = l.nrows();
    let mut z = DVector::zeros(p);
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    let mut x = DVector::zeros(p);
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// `intercept + X·coefficients`; no clamping.
pub fn predict(model: &LinearModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.columns != model.feature_names {
        return Err(Error::FeatureMismatch(format!(
            "model has {} features, matrix has {} (or different names)",
            model.feature_names.len(),
            x.n_cols()
        )));
    }
    let coef = DVector::from_column_slice(&model.coefficients);
    let yhat = &x.values * coef;
    Ok(yhat.iter().map(|v| v + model.intercept).collect())
}
