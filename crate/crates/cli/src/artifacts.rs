//! On-disk artifacts: atomic writes, the extraction manifest and reloading an
//! extracted release.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use content_defect::codefeat::{package_of, TypeCatalog};
use content_defect::eval::PreparedRelease;
use content_defect::{FeatureKind, FeatureMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult};

/// Version tag stored in every manifest.
pub const SCHEMA: &str = "cdp-artifacts/1";

pub const MANIFEST: &str = "manifest.toml";
pub const FILES: &str = "files.csv";
pub const TOKENS: &str = "tokens.txt";
pub const CATALOG: &str = "catalog.csv";
pub const TERM_MATRIX: &str = "term_matrix.csv";
pub const TYPE_MATRIX: &str = "type_matrix.csv";
pub const PACKAGE_MATRIX: &str = "package_matrix.csv";
pub const BASELINE_MATRIX: &str = "baseline_matrix.csv";
pub const WARNINGS: &str = "warnings.log";

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let name = path
        .file_name()
        .ok_or_else(|| usage(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| usage(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| usage(format!("cannot rename to {}: {e}", path.display())))
}

/// Renders into a buffer with `render`, then writes it atomically.
pub fn write_with<F>(path: &Path, render: F) -> CliResult<()>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    render(&mut buf).map_err(|e| usage(format!("cannot render {}: {e}", path.display())))?;
    write_atomic(path, &buf)
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub project: String,
    pub version: String,
    pub files: usize,
    pub defective_files: usize,
    pub verdict: String,
    pub jdk_table: String,
    pub count_imports: bool,
    pub weighting: String,
    pub terms: usize,
    pub types: usize,
    pub packages: usize,
    pub baseline_metrics: Vec<String>,
}

impl Manifest {
    pub fn label(&self) -> String {
        if self.version.is_empty() {
            self.project.clone()
        } else {
            format!("{} {}", self.project, self.version)
        }
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST);
        let manifest: Manifest =
            toml::from_str(&read_text(&path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if manifest.schema != SCHEMA {
            return Err(usage(format!(
                "{}: schema {} is not supported (expected {SCHEMA})",
                path.display(),
                manifest.schema
            )));
        }
        Ok(manifest)
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let text = toml::to_string(self).map_err(|e| usage(format!("cannot encode manifest: {e}")))?;
        write_atomic(&dir.join(MANIFEST), text.as_bytes())
    }
}

/// `file,defects,path`, one line per file.
pub fn write_files(path: &Path, names: &[String], defects: &[f64], paths: &[PathBuf]) -> CliResult<()> {
    write_with(path, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["file", "defects", "path"])?;
        for ((name, d), p) in names.iter().zip(defects).zip(paths) {
            w.write_record([name.as_str(), &d.to_string(), &p.display().to_string()])?;
        }
        w.flush()
    })
}

fn read_files(path: &Path) -> CliResult<(Vec<String>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut names = Vec::new();
    let mut defects = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        names.push(record.get(0).unwrap_or_default().to_string());
        let d = record.get(1).unwrap_or_default();
        defects.push(
            d.parse()
                .map_err(|_| usage(format!("{}: bad defect count {d:?}", path.display())))?,
        );
    }
    Ok((names, defects))
}

/// `name<TAB>term term ...`, one line per file.
pub fn write_tokens(path: &Path, names: &[String], terms: &[Vec<String>]) -> CliResult<()> {
    write_with(path, |buf| {
        for (name, doc) in names.iter().zip(terms) {
            writeln!(buf, "{name}\t{}", doc.join(" "))?;
        }
        Ok(())
    })
}

fn read_tokens(path: &Path) -> CliResult<Vec<(String, Vec<String>)>> {
    read_text(path)?
        .lines()
        .map(|line| {
            let (name, rest) = line
                .split_once('\t')
                .ok_or_else(|| usage(format!("{}: malformed line {line:?}", path.display())))?;
            Ok((name.to_string(), rest.split_whitespace().map(str::to_string).collect()))
        })
        .collect()
}

pub fn read_matrix(path: &Path, kind: FeatureKind) -> CliResult<FeatureMatrix> {
    let file = fs::File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    FeatureMatrix::read_csv(kind, file).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, matrix: &FeatureMatrix) -> CliResult<()> {
    let mut buf = Vec::new();
    matrix.write_csv(&mut buf)?;
    write_atomic(path, &buf)
}

/// Rebuilds pipeline inputs from an extraction directory.
pub fn load_prepared(dir: &Path) -> CliResult<(Manifest, PreparedRelease)> {
    let manifest = Manifest::read(dir)?;
    let (names, defects) = read_files(&dir.join(FILES))?;
    let tokens = read_tokens(&dir.join(TOKENS))?;
    let catalog_path = dir.join(CATALOG);
    let catalog = TypeCatalog::read_csv(read_text(&catalog_path)?.as_bytes())
        .map_err(|e| usage(format!("{}: {e}", catalog_path.display())))?;
    let token_names: Vec<&String> = tokens.iter().map(|t| &t.0).collect();
    if token_names != names.iter().collect::<Vec<_>>() || catalog.files != names {
        return Err(usage(format!("{}: artifact files disagree on the file list", dir.display())));
    }
    let types = catalog.type_sets();
    let packages = types
        .iter()
        .map(|set| set.iter().map(|t| package_of(t).to_string()).collect::<BTreeSet<_>>())
        .collect();
    let baseline_path = dir.join(BASELINE_MATRIX);
    let baseline = if baseline_path.exists() {
        Some(read_matrix(&baseline_path, FeatureKind::Baseline)?)
    } else {
        None
    };
    let prepared = PreparedRelease {
        label: manifest.label(),
        names,
        defects,
        terms: tokens.into_iter().map(|t| t.1).collect(),
        types,
        packages,
        baseline,
    };
    Ok((manifest, prepared))
}
