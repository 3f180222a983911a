//! Monte-Carlo cross-validation, prediction metrics, paired t-tests and
//! cross-release summaries.

mod cv;
mod summary;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::featsel;

pub use cv::{
    cross_validate, fold_plan, mean_predictor_mae, run_fold, CvConfig, EvalReport, Fold, PipelineConfig,
    PreparedRelease, RepetitionMetrics,
};
pub use summary::{aggregate, Summary};

/// Spearman correlation between predicted and actual counts.
pub fn scc(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    featsel::spearman(predicted, actual)
}

/// Mean absolute error.
pub fn mae(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let total: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(total / predicted.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// Two-sided p value.
    pub p: f64,
    pub df: usize,
    /// Set when the differences have zero spread but a non-zero mean.
    pub degenerate: bool,
}

/// Paired two-sided t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let df = n - 1;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().all(|&v| v == 0.0) {
        return Ok(TTest {
            t: 0.0,
            p: 1.0,
            df,
            degenerate: false,
        });
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    if d.iter().all(|&v| v == d[0]) {
        return Ok(TTest {
            t: f64::INFINITY.copysign(mean),
            p: 0.0,
            df,
            degenerate: true,
        });
    }
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / df as f64;
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| Error::InvalidParameter(format!("t distribution: {e}")))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest {
        t,
        p,
        df,
        degenerate: false,
    })
}
