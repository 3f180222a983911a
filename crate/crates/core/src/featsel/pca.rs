//! Principal component analysis on z-scored columns.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const DEFAULT_THRESHOLD: f64 = 0.90;

/// Slack when comparing cumulative explained variance to the threshold.
const THRESHOLD_SLACK: f64 = 1e-12;

/// Eigenvalues below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaTransform {
    /// Input columns kept for fitting (zero-variance columns are dropped).
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// One column per retained component, orthonormal.
    pub loadings: DMatrix<f64>,
    /// Eigenvalues of the standardized covariance, descending.
    pub eigenvalues: Vec<f64>,
    pub retained: usize,
    pub threshold: f64,
}

impl PcaTransform {
    /// Fraction of total variance explained by the first `m` components.
    pub fn explained(&self, m: usize) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        self.eigenvalues.iter().take(m).sum::<f64>() / total
    }

    pub fn component_names(&self) -> Vec<String> {
        (1..=self.retained).map(|i| format!("pc{i}")).collect()
    }
}

/// Fits on the rows of `matrix`, keeping the fewest leading components whose
/// explained variance reaches `threshold`.
pub fn pca_fit(matrix: &FeatureMatrix, threshold: f64) -> Result<PcaTransform> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pca threshold {threshold} not in (0, 1]"
        )));
    }
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mut kept = Vec::new();
    let mut means = Vec::new();
    let mut scales = Vec::new();
    for j in 0..matrix.n_cols() {
        let col = matrix.values.column(j);
        if col.iter().all(|&v| v == col[0]) {
            continue;
        }
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        kept.push(j);
        means.push(mean);
        scales.push(var.sqrt());
    }
    if kept.is_empty() {
        return Err(Error::AllZeroVariance);
    }
    let z = standardize(&matrix.values.select_columns(&kept), &means, &scales);
    let p = kept.len();
    let denom = (n - 1) as f64;

    // Work with the smaller Gram matrix when columns outnumber rows.
    let (eigenvalues, vectors) = if p <= n {
        let cov = z.transpose() * &z / denom;
        sorted_eigen(cov)
    } else {
        let gram = &z * z.transpose() / denom;
        let (values, u) = sorted_eigen(gram);
        let tol = values[0] * RANK_TOLERANCE;
        let mut v = DMatrix::zeros(p, values.len());
        for (k, &lambda) in values.iter().enumerate() {
            if lambda > tol {
                let col = z.transpose() * u.column(k) / (denom * lambda).sqrt();
                v.set_column(k, &col);
            }
        }
        (values, v)
    };

    let tol = eigenvalues[0] * RANK_TOLERANCE;
    let positive = eigenvalues.iter().filter(|&&l| l > tol).count().max(1);
    let total: f64 = eigenvalues.iter().sum();
    let mut cumulative = 0.0;
    let mut retained = positive;
    for (k, &lambda) in eigenvalues.iter().enumerate().take(positive) {
        cumulative += lambda;
        if cumulative / total >= threshold - THRESHOLD_SLACK {
            retained = k + 1;
            break;
        }
    }
    let mut loadings = vectors.columns(0, retained).into_owned();
    normalize_signs(&mut loadings);

    Ok(PcaTransform {
        columns: kept.iter().map(|&j| matrix.columns[j].clone()).collect(),
        means,
        scales,
        loadings,
        eigenvalues,
        retained,
        threshold,
    })
}

/// Projects rows onto the fitted components using the fit's means and scales.
pub fn pca_apply(transform: &PcaTransform, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    let mut indices = Vec::with_capacity(transform.columns.len());
    for name in &transform.columns {
        let j = matrix
            .column_index(name)
            .ok_or_else(|| Error::FeatureMismatch(format!("column {name} missing for pca")))?;
        indices.push(j);
    }
    let z = standardize(
        &matrix.values.select_columns(&indices),
        &transform.means,
        &transform.scales,
    );
    FeatureMatrix::new(
        matrix.kind,
        matrix.rows.clone(),
        transform.component_names(),
        z * &transform.loadings,
    )
}

fn standardize(values: &DMatrix<f64>, means: &[f64], scales: &[f64]) -> DMatrix<f64> {
    let mut z = values.clone();
    for (j, mut col) in z.column_iter_mut().enumerate() {
        for v in col.iter_mut() {
            *v = (*v - means[j]) / scales[j];
        }
    }
    z
}

/// Eigenpairs sorted by descending eigenvalue; negative round-off clamped to 0.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

/// Flips each component so its largest-magnitude loading is positive.
fn normalize_signs(loadings: &mut DMatrix<f64>) {
    for mut col in loadings.column_iter_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}
