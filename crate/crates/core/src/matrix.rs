//! Dense file-by-feature matrices shared by every feature extractor.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The family a feature column belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    Term,
    Topic,
    Type,
    Package,
    Baseline,
    Combined,
}

impl FeatureKind {
    pub const EXTRACTED: [FeatureKind; 5] = [
        FeatureKind::Term,
        FeatureKind::Topic,
        FeatureKind::Type,
        FeatureKind::Package,
        FeatureKind::Baseline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Term => "term",
            FeatureKind::Topic => "topic",
            FeatureKind::Type => "type",
            FeatureKind::Package => "package",
            FeatureKind::Baseline => "baseline",
            FeatureKind::Combined => "combined",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "term" | "terms" => Ok(FeatureKind::Term),
            "topic" | "topics" => Ok(FeatureKind::Topic),
            "type" | "types" => Ok(FeatureKind::Type),
            "package" | "packages" => Ok(FeatureKind::Package),
            "baseline" => Ok(FeatureKind::Baseline),
            "combined" => Ok(FeatureKind::Combined),
            other => Err(Error::InvalidParameter(format!(
                "unknown feature kind {other:?}"
            ))),
        }
    }
}

/// Rows are files (in canonical order), columns are named features of one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: FeatureKind,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub values: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn new(
        kind: FeatureKind,
        rows: Vec<String>,
        columns: Vec<String>,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        if values.nrows() != rows.len() || values.ncols() != columns.len() {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{} but has {} row and {} column labels",
                values.nrows(),
                values.ncols(),
                rows.len(),
                columns.len()
            )));
        }
        Ok(FeatureMatrix {
            kind,
            rows,
            columns,
            values,
        })
    }

    /// A matrix with the given rows and no columns.
    pub fn empty(kind: FeatureKind, rows: Vec<String>) -> Self {
        let n = rows.len();
        FeatureMatrix {
            kind,
            rows,
            columns: Vec::new(),
            values: DMatrix::zeros(n, 0),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Keeps the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> FeatureMatrix {
        let values = self.values.select_columns(indices);
        FeatureMatrix {
            kind: self.kind,
            rows: self.rows.clone(),
            columns: indices.iter().map(|&j| self.columns[j].clone()).collect(),
            values,
        }
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let values = self.values.select_rows(indices);
        FeatureMatrix {
            kind: self.kind,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            columns: self.columns.clone(),
            values,
        }
    }

    /// Restricts to the named columns. Names missing from this matrix yield zero columns.
    pub fn align_columns(&self, names: &[String]) -> FeatureMatrix {
        let mut values = DMatrix::zeros(self.n_rows(), names.len());
        for (j, name) in names.iter().enumerate() {
            if let Some(src) = self.column_index(name) {
                values.set_column(j, &self.values.column(src));
            }
        }
        FeatureMatrix {
            kind: self.kind,
            rows: self.rows.clone(),
            columns: names.to_vec(),
            values,
        }
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.values.row(i).transpose()
    }

    /// Comma-separated dump: header `file,<columns...>`, one line per row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::InvalidParameter(format!("csv write failed: {e}"));
        let mut header = Vec::with_capacity(self.n_cols() + 1);
        header.push("file".to_string());
        header.extend(self.columns.iter().cloned());
        writer.write_record(&header).map_err(to_err)?;
        for (i, name) in self.rows.iter().enumerate() {
            let mut record = Vec::with_capacity(self.n_cols() + 1);
            record.push(name.clone());
            record.extend(self.values.row(i).iter().map(|v| format_value(*v)));
            writer.write_record(&record).map_err(to_err)?;
        }
        writer
            .flush()
            .map_err(|e| Error::InvalidParameter(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

impl FeatureMatrix {
    /// Reads the format written by [`FeatureMatrix::write_csv`].
    pub fn read_csv<R: Read>(kind: FeatureKind, input: R) -> std::result::Result<Self, String> {
        let mut reader = csv::Reader::from_reader(input);
        let header = reader.headers().map_err(|e| e.to_string())?.clone();
        if header.get(0) != Some("file") {
            return Err("first column must be `file`".into());
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut data = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            rows.push(record.get(0).unwrap_or_default().to_string());
            for field in record.iter().skip(1) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| format!("row {}: bad number {field:?}", line + 2))?;
                data.push(v);
            }
        }
        let values = DMatrix::from_row_slice(rows.len(), columns.len(), &data);
        FeatureMatrix::new(kind, rows, columns, values).map_err(|e| e.to_string())
    }
}

/// Shortest representation that round-trips; integers print without a fraction.
pub fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
