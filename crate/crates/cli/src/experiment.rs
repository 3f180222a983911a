use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use content_defect::codefeat::ResolveOptions;
use content_defect::eval::{
    aggregate, cross_validate, fold_plan, paired_t_test, EvalReport, PipelineConfig, PreparedRelease, Summary, TTest,
};
use content_defect::featsel::SelectionMethod;
use content_defect::FeatureKind;
use serde::Serialize;

use crate::artifacts::{self, SCHEMA};
use crate::config::{ExperimentSpec, ReleaseInput};
use crate::error::{CliError, CliResult};
use crate::extract::load_valid_release;

pub const REPORTS_DIR: &str = "reports";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const TTESTS: &str = "ttests.csv";
pub const FOLDS: &str = "folds.csv";
pub const FAILURES: &str = "failures.log";
pub const EXPERIMENT: &str = "experiment.toml";

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub release: String,
    pub config: String,
    pub message: String,
}

/// Paired comparison of two configurations that differ only in selection method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodComparison {
    pub release: String,
    pub config_a: String,
    pub config_b: String,
    pub scc: TTest,
    pub mae: TTest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub reports: Vec<EvalReport>,
    pub failures: Vec<Failure>,
    pub comparisons: Vec<MethodComparison>,
    pub summary: Summary,
    pub configs: usize,
}

/// Loads every release, rejecting invalid ones.
pub fn prepare_releases(inputs: &[ReleaseInput], spec: &ExperimentSpec) -> CliResult<Vec<PreparedRelease>> {
    let mut out = Vec::with_capacity(inputs.len());
    for input in inputs {
        match input {
            ReleaseInput::Raw { source, dataset } => {
                let release = load_valid_release(source, dataset, &Default::default())?;
                out.push(PreparedRelease::from_release(
                    &release,
                    ResolveOptions {
                        count_imports: spec.count_imports,
                    },
                ));
            }
            ReleaseInput::Artifacts(dir) => {
                let (manifest, prepared) = artifacts::load_prepared(dir)?;
                if manifest.verdict != "valid" {
                    return Err(CliError::InvalidRelease {
                        release: manifest.label(),
                        verdict: manifest.verdict,
                    });
                }
                out.push(prepared);
            }
        }
    }
    Ok(out)
}

fn base_config(spec: &ExperimentSpec, kinds: Vec<FeatureKind>) -> PipelineConfig {
    PipelineConfig {
        kinds,
        method: spec.methods[0],
        n_terms: spec.n_terms.first().copied().unwrap_or(1),
        n_types: spec.n_types.first().copied().unwrap_or(1),
        topics: spec.topics.first().copied().unwrap_or(1),
        lda: spec.lda.clone(),
        weighting: spec.weighting,
        baseline_columns: spec.baseline_columns.clone(),
        pca_threshold: spec.pca_threshold,
        clamp_negative: spec.clamp_negative,
    }
}

/// Single-kind configurations: every method and N for terms and types, every
/// K for topics, one each for packages and baseline metrics.
pub fn single_kind_configs(spec: &ExperimentSpec) -> Vec<PipelineConfig> {
    let mut configs = Vec::new();
    for kind in spec.base_kinds() {
        let base = base_config(spec, vec![kind]);
        match kind {
            FeatureKind::Term => {
                for &method in &spec.methods {
                    for &n in &spec.n_terms {
                        configs.push(PipelineConfig { method, n_terms: n, ..base.clone() });
                    }
                }
            }
            FeatureKind::Type => {
                for &method in &spec.methods {
                    for &n in &spec.n_types {
                        configs.push(PipelineConfig { method, n_types: n, ..base.clone() });
                    }
                }
            }
            FeatureKind::Topic => {
                for &k in &spec.topics {
                    configs.push(PipelineConfig { topics: k, ..base.clone() });
                }
            }
            _ => configs.push(base),
        }
    }
    configs
}

/// Kinds joined by a `combined` configuration: every listed kind except
/// baseline metrics.
pub fn combined_kinds(spec: &ExperimentSpec) -> Vec<FeatureKind> {
    spec.base_kinds()
        .into_iter()
        .filter(|&k| k != FeatureKind::Baseline)
        .collect()
}

/// Picks the value with the highest cross-release mean SCC among single-kind
/// runs; ties and missing results fall back to list order.
fn best_value<F>(summary: &Summary, candidates: &[PipelineConfig], values: &[usize], key: F) -> usize
where
    F: Fn(&PipelineConfig) -> usize,
{
    let mut best: Option<(usize, f64)> = None;
    for &v in values {
        let Some(cfg) = candidates.iter().find(|c| key(c) == v) else {
            continue;
        };
        if let Some((scc, _)) = summary.cross_release(&cfg.descriptor()) {
            if best.is_none_or(|(_, b)| scc > b) {
                best = Some((v, scc));
            }
        }
    }
    best.map(|b| b.0).unwrap_or(values[0])
}

fn combined_configs(spec: &ExperimentSpec, singles: &[PipelineConfig], summary: &Summary) -> Vec<PipelineConfig> {
    let kinds = combined_kinds(spec);
    let mut out = Vec::new();
    for &method in &spec.methods {
        let mut cfg = PipelineConfig {
            method,
            ..base_config(spec, kinds.clone())
        };
        let of_kind = |kind: FeatureKind| -> Vec<PipelineConfig> {
            singles
                .iter()
                .filter(|c| c.kinds == [kind] && (kind == FeatureKind::Topic || c.method == method))
                .cloned()
                .collect()
        };
        if kinds.contains(&FeatureKind::Term) {
            cfg.n_terms = best_value(summary, &of_kind(FeatureKind::Term), &spec.n_terms, |c| c.n_terms);
        }
        if kinds.contains(&FeatureKind::Type) {
            cfg.n_types = best_value(summary, &of_kind(FeatureKind::Type), &spec.n_types, |c| c.n_types);
        }
        if kinds.contains(&FeatureKind::Topic) {
            cfg.topics = best_value(summary, &of_kind(FeatureKind::Topic), &spec.topics, |c| c.topics);
        }
        if !out.contains(&cfg) {
            out.push(cfg);
        }
    }
    out
}

fn run_configs(
    releases: &[PreparedRelease],
    configs: &[PipelineConfig],
    spec: &ExperimentSpec,
    reports: &mut Vec<(EvalReport, PipelineConfig)>,
    failures: &mut Vec<Failure>,
) {
    for release in releases {
        for config in configs {
            log::info!("{}: {}", release.label, config.descriptor());
            match cross_validate(release, config, &spec.cv) {
                Ok(report) => reports.push((report, config.clone())),
                Err(e) => {
                    log::warn!("{}: {} failed: {e}", release.label, config.descriptor());
                    failures.push(Failure {
                        release: release.label.clone(),
                        config: config.descriptor(),
                        message: e.to_string(),
                    });
                }
            }
        }
    }
}

/// Paired t-tests between every two runs on the same release whose
/// configurations differ only in the selection method. Folds are shared
/// because they depend only on the seed and release size.
fn compare_methods(reports: &[(EvalReport, PipelineConfig)]) -> Vec<MethodComparison> {
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, (report, config)) in reports.iter().enumerate() {
        let key = (
            report.release.clone(),
            PipelineConfig {
                method: SelectionMethod::Spearman,
                ..config.clone()
            }
            .descriptor(),
        );
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(i);
    }
    let mut out = Vec::new();
    for key in order {
        let members = &groups[&key];
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let (ra, ca) = &reports[i];
                let (rb, cb) = &reports[j];
                if ca.method == cb.method {
                    continue;
                }
                let (Ok(scc), Ok(mae)) = (
                    paired_t_test(&ra.scc_values(), &rb.scc_values()),
                    paired_t_test(&ra.mae_values(), &rb.mae_values()),
                ) else {
                    continue;
                };
                out.push(MethodComparison {
                    release: ra.release.clone(),
                    config_a: ra.config.clone(),
                    config_b: rb.config.clone(),
                    scc,
                    mae,
                });
            }
        }
    }
    out
}

/// Runs the whole configuration matrix over every release.
pub fn run_experiment(spec: &ExperimentSpec, releases: &[PreparedRelease]) -> CliResult<ExperimentOutcome> {
    spec.validate()?;
    let singles = single_kind_configs(spec);
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    run_configs(releases, &singles, spec, &mut reports, &mut failures);
    let mut configs = singles.len();
    if spec.kinds.contains(&FeatureKind::Combined) {
        let plain: Vec<EvalReport> = reports.iter().map(|r| r.0.clone()).collect();
        let combined = combined_configs(spec, &singles, &aggregate(&plain));
        configs += combined.len();
        run_configs(releases, &combined, spec, &mut reports, &mut failures);
    }
    let comparisons = compare_methods(&reports);
    let reports: Vec<EvalReport> = reports.into_iter().map(|r| r.0).collect();
    Ok(ExperimentOutcome {
        summary: aggregate(&reports),
        reports,
        failures,
        comparisons,
        configs: configs * releases.len(),
    })
}

/// Lowercase alphanumerics, other runs collapsed to `_`.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

#[derive(Serialize)]
struct ExperimentEcho<'a> {
    schema: &'a str,
    seed: u64,
    repetitions: usize,
    train_fraction: f64,
    stratified: bool,
    releases: Vec<&'a str>,
    configs: Vec<String>,
    failed: usize,
}

/// Writes reports, summary tables, t-tests, the fold plan and failures.
pub fn write_outcome(
    out: &Path,
    spec: &ExperimentSpec,
    releases: &[PreparedRelease],
    outcome: &ExperimentOutcome,
) -> CliResult<()> {
    artifacts::create_dir(out)?;
    for report in &outcome.reports {
        let dir: PathBuf = out.join(REPORTS_DIR).join(slug(&report.release));
        artifacts::create_dir(&dir)?;
        artifacts::write_with(&dir.join(format!("{}.csv", slug(&report.config))), |buf| report.write_csv(buf))?;
    }
    artifacts::write_with(&out.join(SUMMARY_CSV), |buf| outcome.summary.write_csv(buf))?;
    artifacts::write_with(&out.join(SUMMARY_TXT), |buf| outcome.summary.write_table(buf))?;
    artifacts::write_with(&out.join(TTESTS), |buf| {
        writeln!(buf, "release,config_a,config_b,t_scc,p_scc,t_mae,p_mae,degenerate")?;
        for c in &outcome.comparisons {
            writeln!(
                buf,
                "{},{},{},{},{},{},{},{}",
                c.release,
                c.config_a,
                c.config_b,
                c.scc.t,
                c.scc.p,
                c.mae.t,
                c.mae.p,
                c.scc.degenerate || c.mae.degenerate
            )?;
        }
        Ok(())
    })?;
    artifacts::write_with(&out.join(FOLDS), |buf| {
        writeln!(buf, "release,repetition,test_files")?;
        for release in releases {
            let Ok(folds) = fold_plan(&release.defects, &spec.cv) else {
                continue;
            };
            for (i, fold) in folds.iter().enumerate() {
                let names: Vec<&str> = fold.test.iter().map(|&t| release.names[t].as_str()).collect();
                writeln!(buf, "{},{},{}", release.label, i + 1, names.join(";"))?;
            }
        }
        Ok(())
    })?;
    artifacts::write_with(&out.join(FAILURES), |buf| {
        for f in &outcome.failures {
            writeln!(buf, "{}\t{}\t{}", f.release, f.config, f.message)?;
        }
        Ok(())
    })?;
    let mut configs: Vec<String> = Vec::new();
    for r in &outcome.reports {
        if !configs.contains(&r.config) {
            configs.push(r.config.clone());
        }
    }
    let echo = ExperimentEcho {
        schema: SCHEMA,
        seed: spec.cv.seed,
        repetitions: spec.cv.repetitions,
        train_fraction: spec.cv.train_fraction,
        stratified: spec.cv.stratified,
        releases: releases.iter().map(|r| r.label.as_str()).collect(),
        configs,
        failed: outcome.failures.len(),
    };
    let text = toml::to_string(&echo).map_err(|e| crate::error::usage(format!("cannot encode experiment: {e}")))?;
    artifacts::write_atomic(&out.join(EXPERIMENT), text.as_bytes())
}

/// Loads, runs and writes; partial failures map to [`CliError::Partial`]
/// after all outputs are written.
pub fn cmd_experiment(spec: &ExperimentSpec, inputs: &[ReleaseInput], out: &Path) -> CliResult<ExperimentOutcome> {
    spec.validate()?;
    if inputs.is_empty() {
        return Err(crate::error::usage("no releases given"));
    }
    let releases = prepare_releases(inputs, spec)?;
    let outcome = run_experiment(spec, &releases)?;
    write_outcome(out, spec, &releases, &outcome)?;
    if !outcome.failures.is_empty() {
        return Err(CliError::Partial {
            failed: outcome.failures.len(),
            total: outcome.configs,
        });
    }
    Ok(outcome)
}
