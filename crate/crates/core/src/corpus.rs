//! Loading a release: Java sources joined to a PROMISE-style defect table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::java;
use crate::matrix::{FeatureKind, FeatureMatrix};

/// Minimum number of files for a release to take part in an evaluation.
pub const MIN_FILES: usize = 100;
/// Minimum fraction of files with at least one defect.
pub const MIN_DEFECT_RATIO: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct SourceFile {
    pub path: PathBuf,
    /// Declared package plus file stem, e.g. `org.gjt.sp.jedit.Buffer`.
    pub qualified_name: String,
    pub text: String,
}

impl SourceFile {
    /// Builds a source file, deriving its qualified name from the package declaration.
    pub fn from_text(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        let path = path.into();
        let text = text.into();
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let qualified_name = match java::package_declaration(&java::tokenize(&text)) {
            Some(pkg) => format!("{pkg}.{stem}"),
            None => stem,
        };
        SourceFile {
            path,
            qualified_name,
            text,
        }
    }

    /// Package part of the qualified name; empty for the default package.
    pub fn package(&self) -> &str {
        self.qualified_name
            .rsplit_once('.')
            .map(|(pkg, _)| pkg)
            .unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectRecord {
    pub qualified_name: String,
    pub defect_count: u32,
    pub baseline_metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReleaseFile {
    pub source: SourceFile,
    pub record: DefectRecord,
}

impl ReleaseFile {
    pub fn name(&self) -> &str {
        &self.source.qualified_name
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum LoadWarning {
    UnmatchedRow(String),
    UnmatchedFile(String),
    LossyText(PathBuf),
}

impl fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadWarning::UnmatchedRow(name) => write!(f, "WARN unmatched_row {name}"),
            LoadWarning::UnmatchedFile(name) => write!(f, "WARN unmatched_file {name}"),
            LoadWarning::LossyText(path) => write!(f, "WARN lossy_text {}", path.display()),
        }
    }
}

/// A project version: source files joined one-to-one with defect records,
/// ordered lexicographically by qualified name.
#[derive(Debug, Clone, PartialEq)]
pub struct Release {
    pub project: String,
    pub version: String,
    pub files: Vec<ReleaseFile>,
    pub warnings: Vec<LoadWarning>,
}

impl Release {
    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.name().to_string()).collect()
    }

    pub fn defects(&self) -> Vec<f64> {
        self.files
            .iter()
            .map(|f| f64::from(f.record.defect_count))
            .collect()
    }

    pub fn label(&self) -> String {
        if self.version.is_empty() {
            self.project.clone()
        } else {
            format!("{} {}", self.project, self.version)
        }
    }

    /// Count lines such as `1 unmatched dataset row`.
    pub fn warning_summary(&self) -> Vec<String> {
        let rows = self
            .warnings
            .iter()
            .filter(|w| matches!(w, LoadWarning::UnmatchedRow(_)))
            .count();
        let files = self
            .warnings
            .iter()
            .filter(|w| matches!(w, LoadWarning::UnmatchedFile(_)))
            .count();
        let mut out = Vec::new();
        if rows > 0 {
            out.push(format!("{rows} unmatched dataset row{}", plural(rows)));
        }
        if files > 0 {
            out.push(format!("{files} unmatched source file{}", plural(files)));
        }
        out
    }
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

/// Dataset column naming. PROMISE tables repeat `name` (project, then class);
/// the last matching header wins.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetColumns {
    pub name: String,
    pub defects: String,
    /// Columns never treated as baseline metrics.
    pub ignore: Vec<String>,
}

impl Default for DatasetColumns {
    fn default() -> Self {
        DatasetColumns {
            name: "name".into(),
            defects: "bug".into(),
            ignore: vec!["version".into()],
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub columns: DatasetColumns,
    /// Defaults to the part of the dataset file stem before the last `-`.
    pub project: Option<String>,
    /// Defaults to the part of the dataset file stem after the last `-`.
    pub version: Option<String>,
}

pub fn load_release(source_root: &Path, dataset: &Path, options: &LoadOptions) -> Result<Release> {
    let records = read_dataset(dataset, &options.columns)?;
    let (sources, lossy) = read_sources(source_root)?;
    let stem = dataset
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (default_project, default_version) = match stem.rsplit_once('-') {
        Some((p, v)) => (p.to_string(), v.to_string()),
        None => (stem.clone(), String::new()),
    };
    let mut release = join(
        options.project.clone().unwrap_or(default_project),
        options.version.clone().unwrap_or(default_version),
        sources,
        records,
    )?;
    release
        .warnings
        .extend(lossy.into_iter().map(LoadWarning::LossyText));
    release.warnings.sort();
    Ok(release)
}

/// Reads every `.java` file below `root`. Returns the files in path order plus
/// the paths whose bytes were not valid UTF-8 (decoded lossily).
pub fn read_sources(root: &Path) -> Result<(Vec<SourceFile>, Vec<PathBuf>)> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "source root is not a directory"),
        ));
    }
    let mut paths = Vec::new();
    for entry in WalkDir::new(root) {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
            Error::io(path, std::io::Error::other(e.to_string()))
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "java") {
            paths.push(entry.into_path());
        }
    }
    paths.sort();
    let loaded: Vec<(SourceFile, bool)> = paths
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let (text, lossy) = match String::from_utf8(bytes) {
                Ok(text) => (text, false),
                Err(e) => (String::from_utf8_lossy(e.as_bytes()).into_owned(), true),
            };
            Ok((SourceFile::from_text(path.clone(), text), lossy))
        })
        .collect::<Result<_>>()?;
    let lossy = loaded
        .iter()
        .filter(|(_, lossy)| *lossy)
        .map(|(f, _)| f.path.clone())
        .collect();
    Ok((loaded.into_iter().map(|(f, _)| f).collect(), lossy))
}

pub fn read_dataset(path: &Path, columns: &DatasetColumns) -> Result<Vec<DefectRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(file, columns).map_err(|message| Error::Dataset {
        path: path.to_path_buf(),
        message,
    })
}

/// Parses a comma-separated defect table. Columns other than the name, defect
/// and ignored ones become baseline metrics when every row holds a number.
pub fn parse_dataset<R: std::io::Read>(
    input: R,
    columns: &DatasetColumns,
) -> std::result::Result<Vec<DefectRecord>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let last_index = |wanted: &str| headers.iter().rposition(|h| h.eq_ignore_ascii_case(wanted));
    let name_col = last_index(&columns.name)
        .ok_or_else(|| format!("missing name column {:?}", columns.name))?;
    let bug_col = last_index(&columns.defects)
        .ok_or_else(|| format!("missing defect column {:?}", columns.defects))?;

    let rows: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| e.to_string())?;

    let mut seen_metric = BTreeSet::new();
    let metric_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| j != name_col && j != bug_col)
        .filter(|&j| {
            let h = &headers[j];
            !h.eq_ignore_ascii_case(&columns.name)
                && !columns.ignore.iter().any(|ig| ig.eq_ignore_ascii_case(h))
        })
        .filter(|&j| seen_metric.insert(headers[j].to_ascii_lowercase()))
        .filter(|&j| {
            rows.iter()
                .all(|r| r.get(j).is_some_and(|v| v.parse::<f64>().is_ok_and(f64::is_finite)))
        })
        .collect();

    let mut records = Vec::with_capacity(rows.len());
    for (line, row) in rows.iter().enumerate() {
        let name = row
            .get(name_col)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| format!("row {}: empty name", line + 2))?;
        let raw = row.get(bug_col).unwrap_or("");
        let defect_count = parse_count(raw)
            .ok_or_else(|| format!("row {}: invalid defect count {raw:?}", line + 2))?;
        let baseline_metrics = metric_cols
            .iter()
            .map(|&j| (headers[j].to_ascii_lowercase(), row[j].parse::<f64>().unwrap_or(0.0)))
            .collect();
        records.push(DefectRecord {
            qualified_name: name.to_string(),
            defect_count,
            baseline_metrics,
        });
    }
    Ok(records)
}

fn parse_count(raw: &str) -> Option<u32> {
    if let Ok(n) = raw.parse::<u32>() {
        return Some(n);
    }
    let v = raw.parse::<f64>().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)).then_some(v as u32)
}

/// Joins sources to records by qualified name. The result is independent of
/// the input order of either list.
pub fn join(
    project: String,
    version: String,
    sources: Vec<SourceFile>,
    records: Vec<DefectRecord>,
) -> Result<Release> {
    let mut by_name: BTreeMap<String, SourceFile> = BTreeMap::new();
    for file in sources {
        if let Some(prev) = by_name.get(&file.qualified_name) {
            let (first, second) = if prev.path <= file.path {
                (prev.path.clone(), file.path.clone())
            } else {
                (file.path.clone(), prev.path.clone())
            };
            return Err(Error::DuplicateQualifiedName {
                name: file.qualified_name,
                first,
                second,
            });
        }
        by_name.insert(file.qualified_name.clone(), file);
    }

    let mut rows: BTreeMap<String, DefectRecord> = BTreeMap::new();
    for record in records {
        if rows.contains_key(&record.qualified_name) {
            return Err(Error::DuplicateDatasetRow(record.qualified_name));
        }
        rows.insert(record.qualified_name.clone(), record);
    }

    let mut warnings = Vec::new();
    let mut files = Vec::new();
    for (name, record) in rows {
        match by_name.remove(&name) {
            Some(source) => files.push(ReleaseFile { source, record }),
            None => warnings.push(LoadWarning::UnmatchedRow(name)),
        }
    }
    warnings.extend(by_name.into_keys().map(LoadWarning::UnmatchedFile));
    if files.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    warnings.sort();
    Ok(Release {
        project,
        version,
        files,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityVerdict {
    Valid,
    TooSmall,
    TooFewBugs,
}

impl ValidityVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidityVerdict::Valid => "valid",
            ValidityVerdict::TooSmall => "too_small",
            ValidityVerdict::TooFewBugs => "too_few_bugs",
        }
    }
}

impl fmt::Display for ValidityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn validate_release(release: &Release) -> ValidityVerdict {
    let defective = release
        .files
        .iter()
        .filter(|f| f.record.defect_count > 0)
        .count();
    validate_counts(release.len(), defective)
}

pub fn validate_counts(files: usize, defective: usize) -> ValidityVerdict {
    if files < MIN_FILES {
        ValidityVerdict::TooSmall
    } else if (defective as f64) < MIN_DEFECT_RATIO * files as f64 {
        ValidityVerdict::TooFewBugs
    } else {
        ValidityVerdict::Valid
    }
}

/// One column per pre-compiled metric, rows in release order.
pub fn baseline_matrix(release: &Release) -> Result<FeatureMatrix> {
    let first = release
        .files
        .first()
        .map(|f| f.record.baseline_metrics.keys().cloned().collect::<Vec<_>>())
        .unwrap_or_default();
    let offending: Vec<String> = release
        .files
        .iter()
        .filter(|f| !f.record.baseline_metrics.keys().eq(first.iter()))
        .map(|f| f.name().to_string())
        .collect();
    if !offending.is_empty() {
        return Err(Error::HeterogeneousMetrics(offending));
    }
    if first.is_empty() {
        return Err(Error::NoBaselineMetrics);
    }
    let values = DMatrix::from_fn(release.len(), first.len(), |i, j| {
        release.files[i].record.baseline_metrics[&first[j]]
    });
    FeatureMatrix::new(FeatureKind::Baseline, release.names(), first, values)
}
