//! Experiment specification: TOML file values overridden by command-line flags.

use std::path::{Path, PathBuf};

use content_defect::eval::CvConfig;
use content_defect::featsel::{SelectionMethod, DEFAULT_THRESHOLD};
use content_defect::textfeat::TermWeighting;
use content_defect::topicfeat::LdaConfig;
use content_defect::FeatureKind;
use serde::Deserialize;

use crate::error::{usage, CliResult};

pub const DEFAULT_TERM_COUNTS: [usize; 7] = [3, 5, 10, 20, 50, 100, 200];
pub const DEFAULT_TYPE_COUNTS: [usize; 5] = [5, 10, 20, 50, 100];
pub const DEFAULT_TOPIC_COUNTS: [usize; 1] = [20];

/// Where a release comes from: raw inputs or an extraction directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReleaseInput {
    Raw { source: PathBuf, dataset: PathBuf },
    Artifacts(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Requested kinds; `Combined` adds one configuration per method that
    /// joins every other listed kind.
    pub kinds: Vec<FeatureKind>,
    pub methods: Vec<SelectionMethod>,
    pub n_terms: Vec<usize>,
    pub n_types: Vec<usize>,
    pub topics: Vec<usize>,
    pub pca_threshold: Option<f64>,
    pub clamp_negative: bool,
    pub weighting: TermWeighting,
    pub count_imports: bool,
    pub baseline_columns: Vec<String>,
    pub lda: LdaConfig,
    pub cv: CvConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kinds: vec![FeatureKind::Term],
            methods: vec![SelectionMethod::Spearman],
            n_terms: DEFAULT_TERM_COUNTS.to_vec(),
            n_types: DEFAULT_TYPE_COUNTS.to_vec(),
            topics: DEFAULT_TOPIC_COUNTS.to_vec(),
            pca_threshold: Some(DEFAULT_THRESHOLD),
            clamp_negative: false,
            weighting: TermWeighting::TfIdf,
            count_imports: true,
            baseline_columns: Vec::new(),
            lda: LdaConfig::default(),
            cv: CvConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.kinds.is_empty() {
            return Err(usage("no feature kinds given"));
        }
        if self.methods.is_empty() {
            return Err(usage("no selection methods given"));
        }
        let base = self.base_kinds();
        let combinable = base.iter().filter(|&&k| k != FeatureKind::Baseline).count();
        if self.kinds.contains(&FeatureKind::Combined) && combinable < 2 {
            return Err(usage("combined needs at least two other non-baseline feature kinds"));
        }
        let lists = [
            ("n_terms", &self.n_terms, base.contains(&FeatureKind::Term)),
            ("n_types", &self.n_types, base.contains(&FeatureKind::Type)),
            ("topics", &self.topics, base.contains(&FeatureKind::Topic)),
        ];
        for (name, values, used) in lists {
            if used && (values.is_empty() || values.contains(&0)) {
                return Err(usage(format!("{name} must list positive values")));
            }
        }
        if let Some(t) = self.pca_threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(usage(format!("pca threshold {t} not in (0, 1]")));
            }
        }
        self.cv.validate().map_err(|e| usage(e.to_string()))
    }

    /// Listed kinds other than `Combined`, without duplicates.
    pub fn base_kinds(&self) -> Vec<FeatureKind> {
        let mut out = Vec::new();
        for &k in &self.kinds {
            if k != FeatureKind::Combined && !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CvFile {
    repetitions: Option<usize>,
    train_fraction: Option<f64>,
    seed: Option<u64>,
    stratified: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LdaFile {
    alpha: Option<f64>,
    beta: Option<f64>,
    iterations: Option<usize>,
    infer_iterations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReleaseFile {
    source: Option<PathBuf>,
    dataset: Option<PathBuf>,
    artifacts: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    kinds: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    n_terms: Option<Vec<usize>>,
    n_types: Option<Vec<usize>>,
    topics: Option<Vec<usize>>,
    pca: Option<bool>,
    pca_threshold: Option<f64>,
    clamp_negative: Option<bool>,
    weighting: Option<String>,
    count_imports: Option<bool>,
    baseline_columns: Option<Vec<String>>,
    cv: Option<CvFile>,
    lda: Option<LdaFile>,
    releases: Option<Vec<ReleaseFile>>,
}

pub fn parse_kinds<S: AsRef<str>>(names: &[S]) -> CliResult<Vec<FeatureKind>> {
    names
        .iter()
        .map(|n| n.as_ref().parse().map_err(|e: content_defect::Error| usage(e.to_string())))
        .collect()
}

pub fn parse_methods<S: AsRef<str>>(names: &[S]) -> CliResult<Vec<SelectionMethod>> {
    names
        .iter()
        .map(|n| n.as_ref().parse().map_err(|e: content_defect::Error| usage(e.to_string())))
        .collect()
}

/// Reads a TOML experiment file. Relative release paths resolve against the
/// file's directory.
pub fn load_spec_file(path: &Path) -> CliResult<(ExperimentSpec, Vec<ReleaseInput>)> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text, path.parent().unwrap_or(Path::new(".")))
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn parse_spec(text: &str, base: &Path) -> CliResult<(ExperimentSpec, Vec<ReleaseInput>)> {
    let file: SpecFile = toml::from_str(text).map_err(|e| usage(e.to_string()))?;
    let mut spec = ExperimentSpec::default();
    if let Some(k) = file.kinds {
        spec.kinds = parse_kinds(&k)?;
    }
    if let Some(m) = file.methods {
        spec.methods = parse_methods(&m)?;
    }
    if let Some(v) = file.n_terms {
        spec.n_terms = v;
    }
    if let Some(v) = file.n_types {
        spec.n_types = v;
    }
    if let Some(v) = file.topics {
        spec.topics = v;
    }
    if let Some(t) = file.pca_threshold {
        spec.pca_threshold = Some(t);
    }
    if file.pca == Some(false) {
        spec.pca_threshold = None;
    }
    if let Some(c) = file.clamp_negative {
        spec.clamp_negative = c;
    }
    if let Some(w) = file.weighting {
        spec.weighting = w.parse().map_err(|e: content_defect::Error| usage(e.to_string()))?;
    }
    if let Some(c) = file.count_imports {
        spec.count_imports = c;
    }
    if let Some(b) = file.baseline_columns {
        spec.baseline_columns = b;
    }
    if let Some(cv) = file.cv {
        spec.cv.repetitions = cv.repetitions.unwrap_or(spec.cv.repetitions);
        spec.cv.train_fraction = cv.train_fraction.unwrap_or(spec.cv.train_fraction);
        spec.cv.seed = cv.seed.unwrap_or(spec.cv.seed);
        spec.cv.stratified = cv.stratified.unwrap_or(spec.cv.stratified);
    }
    if let Some(lda) = file.lda {
        spec.lda.alpha = lda.alpha.or(spec.lda.alpha);
        spec.lda.beta = lda.beta.unwrap_or(spec.lda.beta);
        spec.lda.iterations = lda.iterations.unwrap_or(spec.lda.iterations);
        spec.lda.infer_iterations = lda.infer_iterations.unwrap_or(spec.lda.infer_iterations);
    }
    let mut releases = Vec::new();
    for r in file.releases.unwrap_or_default() {
        let input = match (r.source, r.dataset, r.artifacts) {
            (Some(s), Some(d), None) => ReleaseInput::Raw {
                source: base.join(s),
                dataset: base.join(d),
            },
            (None, None, Some(a)) => ReleaseInput::Artifacts(base.join(a)),
            _ => return Err(usage("each release needs either source + dataset or artifacts")),
        };
        releases.push(input);
    }
    Ok((spec, releases))
}
