use std::io::Write;
use std::path::{Path, PathBuf};

use content_defect::codefeat::{package_matrix, type_matrix, JdkTable, ResolveOptions, TypeCatalog};
use content_defect::corpus::{load_release, validate_release, LoadOptions, Release, ValidityVerdict};
use content_defect::eval::PreparedRelease;
use content_defect::textfeat::{term_matrix, TermWeighting};

use crate::artifacts::{self, Manifest, SCHEMA};
use crate::error::{usage, CliError, CliResult};

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub source: PathBuf,
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub load: LoadOptions,
    pub count_imports: bool,
    pub weighting: TermWeighting,
}

/// Loads and validates a release from raw inputs.
pub fn load_valid_release(source: &Path, dataset: &Path, load: &LoadOptions) -> CliResult<Release> {
    if !dataset.is_file() {
        return Err(usage(format!("dataset file not found: {}", dataset.display())));
    }
    if !source.is_dir() {
        return Err(usage(format!("source directory not found: {}", source.display())));
    }
    let release = load_release(source, dataset, load)?;
    let verdict = validate_release(&release);
    if verdict != ValidityVerdict::Valid {
        let defective = release.files.iter().filter(|f| f.record.defect_count > 0).count();
        return Err(CliError::InvalidRelease {
            release: release.label(),
            verdict: format!("{} ({} files, {} defective)", verdict.as_str(), release.len(), defective),
        });
    }
    Ok(release)
}

/// Writes every artifact of one release to `options.out` and returns its manifest.
pub fn extract(options: &ExtractOptions) -> CliResult<Manifest> {
    let release = load_valid_release(&options.source, &options.dataset, &options.load)?;
    artifacts::create_dir(&options.out)?;
    let out = &options.out;

    let sources: Vec<_> = release.files.iter().map(|f| f.source.clone()).collect();
    let catalog = TypeCatalog::build(
        &sources,
        ResolveOptions {
            count_imports: options.count_imports,
        },
    );
    let prepared = PreparedRelease::with_catalog(&release, &catalog);
    let (terms, _) = term_matrix(&prepared.terms, prepared.names.clone(), options.weighting)?;
    let types = type_matrix(&catalog)?;
    let packages = package_matrix(&catalog)?;

    let paths: Vec<PathBuf> = sources.iter().map(|s| s.path.clone()).collect();
    artifacts::write_files(&out.join(artifacts::FILES), &prepared.names, &prepared.defects, &paths)?;
    artifacts::write_tokens(&out.join(artifacts::TOKENS), &prepared.names, &prepared.terms)?;
    artifacts::write_with(&out.join(artifacts::CATALOG), |buf| {
        catalog.write_csv(buf).map_err(std::io::Error::other)
    })?;
    artifacts::write_matrix(&out.join(artifacts::TERM_MATRIX), &terms)?;
    artifacts::write_matrix(&out.join(artifacts::TYPE_MATRIX), &types)?;
    artifacts::write_matrix(&out.join(artifacts::PACKAGE_MATRIX), &packages)?;
    let baseline_path = out.join(artifacts::BASELINE_MATRIX);
    match &prepared.baseline {
        Some(b) => artifacts::write_matrix(&baseline_path, b)?,
        None if baseline_path.exists() => {
            std::fs::remove_file(&baseline_path)
                .map_err(|e| usage(format!("cannot remove stale {}: {e}", baseline_path.display())))?;
        }
        None => {}
    }
    artifacts::write_with(&out.join(artifacts::WARNINGS), |buf| {
        for w in &release.warnings {
            writeln!(buf, "{w}")?;
        }
        for (file, w) in catalog.warnings() {
            writeln!(buf, "{w} (in {file})")?;
        }
        Ok(())
    })?;

    let manifest = Manifest {
        schema: SCHEMA.to_string(),
        project: release.project.clone(),
        version: release.version.clone(),
        files: release.len(),
        defective_files: release.files.iter().filter(|f| f.record.defect_count > 0).count(),
        verdict: ValidityVerdict::Valid.as_str().to_string(),
        jdk_table: JdkTable::bundled().version.clone(),
        count_imports: options.count_imports,
        weighting: options.weighting.to_string(),
        terms: terms.n_cols(),
        types: types.n_cols(),
        packages: packages.n_cols(),
        baseline_metrics: prepared.baseline.as_ref().map(|b| b.columns.clone()).unwrap_or_default(),
    };
    manifest.write(out)?;
    for line in release.warning_summary() {
        log::warn!("{}: {line}", release.label());
    }
    Ok(manifest)
}
