//! Feature scoring, top-N selection, PCA and combination of feature kinds.
//!
//! Features are ranked by the absolute value of their score, so strong
//! negative correlates rank as high as positive ones. Ties break by feature
//! name. Columns that are constant over the scored rows carry no information
//! and are not scorable.

mod pca;
mod stats;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{format_value, FeatureKind, FeatureMatrix};

pub use pca::{pca_apply, pca_fit, PcaTransform, DEFAULT_THRESHOLD};
pub use stats::{average_ranks, discretize, mutual_information, pearson, spearman, MI_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum SelectionMethod {
    Pearson,
    #[default]
    Spearman,
    Mi,
    None,
}

impl SelectionMethod {
    pub const SCORING: [SelectionMethod; 3] = [
        SelectionMethod::Spearman,
        SelectionMethod::Pearson,
        SelectionMethod::Mi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMethod::Pearson => "pearson",
            SelectionMethod::Spearman => "spearman",
            SelectionMethod::Mi => "mi",
            SelectionMethod::None => "none",
        }
    }

    pub fn score(self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            SelectionMethod::Pearson => pearson(x, y),
            SelectionMethod::Spearman => spearman(x, y),
            SelectionMethod::Mi => mutual_information(x, y),
            SelectionMethod::None => Ok(0.0),
        }
    }
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pearson" => Ok(SelectionMethod::Pearson),
            "spearman" => Ok(SelectionMethod::Spearman),
            "mi" => Ok(SelectionMethod::Mi),
            "none" => Ok(SelectionMethod::None),
            other => Err(Error::InvalidParameter(format!(
                "unknown selection method {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScore {
    pub name: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    /// Every scorable feature, best first.
    pub ranking: Vec<FeatureScore>,
    pub selected: Vec<String>,
    /// `None` when the method passes all features through.
    pub requested: Option<usize>,
}

impl SelectionResult {
    /// Comma-separated report: `feature,method,score,rank` (rank is 1-based).
    pub fn write_report<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "feature,method,score,rank")?;
        for (i, s) in self.ranking.iter().enumerate() {
            writeln!(out, "{},{},{},{}", csv_field(&s.name), self.method, format_value(s.score), i + 1)?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Scores every non-constant column against `y`, best first.
pub fn rank_features(matrix: &FeatureMatrix, y: &[f64], method: SelectionMethod) -> Result<Vec<FeatureScore>> {
    if matrix.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: matrix.n_rows(),
            right: y.len(),
        });
    }
    let scores: Vec<Option<FeatureScore>> = (0..matrix.n_cols())
        .into_par_iter()
        .map(|j| {
            let col = matrix.column(j);
            if col.iter().all(|&v| v == col[0]) {
                return Ok(None);
            }
            let score = method.score(&col, y)?;
            Ok(Some(FeatureScore {
                name: matrix.columns[j].clone(),
                score,
            }))
        })
        .collect::<Result<_>>()?;
    let mut ranking: Vec<FeatureScore> = scores.into_iter().flatten().collect();
    ranking.sort_by(|a, b| {
        b.score
            .abs()
            .total_cmp(&a.score.abs())
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(ranking)
}

/// Keeps the `n` best-scoring columns in ranking order. `SelectionMethod::None`
/// returns the matrix unchanged.
pub fn select(
    matrix: &FeatureMatrix,
    y: &[f64],
    method: SelectionMethod,
    n: usize,
) -> Result<(SelectionResult, FeatureMatrix)> {
    if method == SelectionMethod::None {
        let result = SelectionResult {
            method,
            ranking: Vec::new(),
            selected: matrix.columns.clone(),
            requested: None,
        };
        return Ok((result, matrix.clone()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("feature count must be at least 1".into()));
    }
    let ranking = rank_features(matrix, y, method)?;
    if ranking.is_empty() {
        return Err(Error::NoScorableFeatures);
    }
    let selected: Vec<String> = ranking.iter().take(n).map(|s| s.name.clone()).collect();
    let indices: Vec<usize> = selected
        .iter()
        .map(|name| matrix.column_index(name).expect("ranked column exists"))
        .collect();
    let reduced = matrix.select_columns(&indices);
    Ok((
        SelectionResult {
            method,
            ranking,
            selected,
            requested: Some(n),
        },
        reduced,
    ))
}

/// Concatenates matrices over the same rows. Column names get a `kind:`
/// prefix; a single matrix is returned unchanged.
pub fn combine(matrices: &[FeatureMatrix]) -> Result<FeatureMatrix> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidParameter("nothing to combine".into()))?;
    if matrices.len() == 1 {
        return Ok(first.clone());
    }
    for m in &matrices[1..] {
        if m.n_rows() != first.n_rows() {
            return Err(Error::LengthMismatch {
                left: first.n_rows(),
                right: m.n_rows(),
            });
        }
        if m.rows != first.rows {
            return Err(Error::FeatureMismatch("row order differs between feature kinds".into()));
        }
    }
    let total: usize = matrices.iter().map(FeatureMatrix::n_cols).sum();
    let mut values = DMatrix::zeros(first.n_rows(), total);
    let mut columns = Vec::with_capacity(total);
    let mut offset = 0;
    for m in matrices {
        values.columns_mut(offset, m.n_cols()).copy_from(&m.values);
        columns.extend(m.columns.iter().map(|c| format!("{}:{c}", m.kind)));
        offset += m.n_cols();
    }
    FeatureMatrix::new(FeatureKind::Combined, first.rows.clone(), columns, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fm(kind: FeatureKind, cols: &[&str], values: DMatrix<f64>) -> FeatureMatrix {
        let rows = (0..values.nrows()).map(|i| format!("f{i}")).collect();
        FeatureMatrix::new(kind, rows, cols.iter().map(|c| c.to_string()).collect(), values).unwrap()
    }

    fn sample() -> (FeatureMatrix, Vec<f64>) {
        // a: perfect, b: perfect negative, c: noise, d: constant
        let m = fm(
            FeatureKind::Term,
            &["c", "b", "a", "d"],
            DMatrix::from_row_slice(4, 4, &[
                1., 4., 1., 7., //
                3., 3., 2., 7., //
                2., 2., 3., 7., //
                1., 1., 4., 7.,
            ]),
        );
        (m, vec![0., 1., 2., 3.])
    }

    #[test]
    fn ranks_by_absolute_score_then_name() {
        let (m, y) = sample();
        let (res, reduced) = select(&m, &y, SelectionMethod::Spearman, 2).unwrap();
        assert_eq!(res.selected, vec!["a", "b"]);
        assert_eq!(reduced.columns, vec!["a", "b"]);
        assert_eq!(reduced.column(1), vec![4., 3., 2., 1.]);
        assert_eq!(res.ranking.len(), 3, "constant column is not scorable");
    }

    #[test]
    fn large_n_keeps_all_scorable() {
        let (m, y) = sample();
        let (res, _) = select(&m, &y, SelectionMethod::Pearson, 100).unwrap();
        assert_eq!(res.selected.len(), 3);
    }

    #[test]
    fn none_is_identity() {
        let (m, y) = sample();
        let (res, out) = select(&m, &y, SelectionMethod::None, 0).unwrap();
        assert_eq!(out, m);
        assert_eq!(res.requested, None);
    }

    #[test]
    fn no_scorable_columns() {
        let m = fm(FeatureKind::Term, &["k"], DMatrix::from_element(3, 1, 2.0));
        assert!(matches!(
            select(&m, &[1., 2., 3.], SelectionMethod::Mi, 3),
            Err(Error::NoScorableFeatures)
        ));
    }

    #[test]
    fn report_lines() {
        let (m, y) = sample();
        let (res, _) = select(&m, &y, SelectionMethod::Spearman, 1).unwrap();
        let mut out = Vec::new();
        res.write_report(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("feature,method,score,rank\na,spearman,1,1\nb,spearman,-1,2\n"));
    }

    #[test]
    fn combine_prefixes_names() {
        let a = fm(FeatureKind::Term, &["file", "x"], DMatrix::zeros(3, 2));
        let b = fm(FeatureKind::Type, &["java.io.File", "p.A", "p.B", "p.C"], DMatrix::from_element(3, 4, 1.0));
        let c = combine(&[a.clone(), b]).unwrap();
        assert_eq!((c.n_rows(), c.n_cols()), (3, 6));
        assert_eq!(c.columns[0], "term:file");
        assert_eq!(c.columns[2], "type:java.io.File");
        assert_eq!(c.kind, FeatureKind::Combined);
        assert_eq!(combine(std::slice::from_ref(&a)).unwrap(), a);
        let short = fm(FeatureKind::Topic, &["t"], DMatrix::zeros(2, 1));
        assert!(combine(&[a, short]).is_err());
    }

    proptest! {
        #[test]
        fn selection_ignores_column_order(
            vals in prop::collection::vec(0u8..5, 40),
            y in prop::collection::vec(0u8..4, 8),
            n in 1usize..6,
            rot in 0usize..5,
        ) {
            let names = ["a", "b", "c", "d", "e"];
            let values = DMatrix::from_fn(8, 5, |i, j| f64::from(vals[i * 5 + j]));
            let m = fm(FeatureKind::Term, &names, values);
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let mut perm: Vec<usize> = (0..5).collect();
            perm.rotate_left(rot);
            perm.reverse();
            let shuffled = m.select_columns(&perm);
            for method in SelectionMethod::SCORING {
                let a = select(&m, &y, method, n);
                let b = select(&shuffled, &y, method, n);
                match (a, b) {
                    (Ok((ra, _)), Ok((rb, _))) => prop_assert_eq!(ra.selected, rb.selected),
                    (Err(_), Err(_)) => {}
                    _ => prop_assert!(false, "inconsistent outcome"),
                }
            }
        }
    }
}
