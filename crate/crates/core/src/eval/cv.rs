use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codefeat::{presence_matrix, ResolveOptions, TypeCatalog};
use crate::corpus::{baseline_matrix, Release};
use crate::error::{Error, Result};
use crate::featsel::{combine, pca_apply, pca_fit, select, SelectionMethod, DEFAULT_THRESHOLD};
use crate::matrix::{FeatureKind, FeatureMatrix};
use crate::predict;
use crate::textfeat::{extract_terms, TermVocabulary, TermWeighting};
use crate::topicfeat::{fit_lda, topic_matrix, LdaConfig};

use super::{mae, scc};

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub repetitions: usize,
    pub train_fraction: f64,
    pub seed: u64,
    /// Split defective and clean files separately so both folds keep the
    /// release's defect ratio.
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            repetitions: 50,
            train_fraction: 0.9,
            seed: 0,
            stratified: false,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction {} not in (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// One repetition's split. Indices refer to canonical file order and are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Seed for the repetition's own randomness (topic sampling).
    pub seed: u64,
}

/// Splits for every repetition. Depends only on the seed and file count
/// (and the defect vector when stratified), never on the pipeline.
pub fn fold_plan(defects: &[f64], cv: &CvConfig) -> Result<Vec<Fold>> {
    cv.validate()?;
    let n = defects.len();
    let n_train = (n as f64 * cv.train_fraction).round() as usize;
    if n_train < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n_train });
    }
    if n_train >= n {
        return Err(Error::EmptyTestFold);
    }
    let mut master = ChaCha8Rng::seed_from_u64(cv.seed);
    let seeds: Vec<u64> = (0..cv.repetitions).map(|_| master.next_u64()).collect();
    let folds = seeds
        .into_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut train, mut test) = if cv.stratified {
                let mut train = Vec::new();
                let mut test = Vec::new();
                for defective in [true, false] {
                    let mut group: Vec<usize> = (0..n).filter(|&i| (defects[i] > 0.0) == defective).collect();
                    group.shuffle(&mut rng);
                    let k = (group.len() as f64 * cv.train_fraction).round() as usize;
                    train.extend_from_slice(&group[..k]);
                    test.extend_from_slice(&group[k..]);
                }
                (train, test)
            } else {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                let test = order.split_off(n_train);
                (order, test)
            };
            train.sort_unstable();
            test.sort_unstable();
            Fold { train, test, seed }
        })
        .collect::<Vec<_>>();
    if folds.iter().any(|f| f.test.is_empty()) {
        return Err(Error::EmptyTestFold);
    }
    Ok(folds)
}

/// Per-file inputs of the pipeline, in canonical file order.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedRelease {
    pub label: String,
    pub names: Vec<String>,
    pub defects: Vec<f64>,
    /// Stemmed term stream of each file.
    pub terms: Vec<Vec<String>>,
    pub types: Vec<BTreeSet<String>>,
    pub packages: Vec<BTreeSet<String>>,
    pub baseline: Option<FeatureMatrix>,
}

impl PreparedRelease {
    pub fn from_release(release: &Release, options: ResolveOptions) -> Self {
        let sources: Vec<_> = release.files.iter().map(|f| f.source.clone()).collect();
        let catalog = TypeCatalog::build(&sources, options);
        Self::with_catalog(release, &catalog)
    }

    /// Like [`PreparedRelease::from_release`] with an already built catalog.
    pub fn with_catalog(release: &Release, catalog: &TypeCatalog) -> Self {
        let terms = release
            .files
            .par_iter()
            .map(|f| extract_terms(&f.source.text))
            .collect();
        let baseline = match baseline_matrix(release) {
            Ok(m) => Some(m),
            Err(Error::NoBaselineMetrics) => None,
            Err(e) => {
                log::warn!("{}: baseline metrics unusable: {e}", release.label());
                None
            }
        };
        PreparedRelease {
            label: release.label(),
            names: release.names(),
            defects: release.defects(),
            terms,
            types: catalog.type_sets(),
            packages: catalog.package_sets(),
            baseline,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.names.len();
        for len in [self.defects.len(), self.terms.len(), self.types.len(), self.packages.len()] {
            if len != n {
                return Err(Error::LengthMismatch { left: n, right: len });
            }
        }
        Ok(())
    }
}

/// One experiment configuration. Several kinds are combined column-wise
/// after per-kind selection; selection applies to term and type features.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub kinds: Vec<FeatureKind>,
    pub method: SelectionMethod,
    pub n_terms: usize,
    pub n_types: usize,
    pub topics: usize,
    pub lda: LdaConfig,
    pub weighting: TermWeighting,
    /// Baseline metric columns to use; empty means all.
    pub baseline_columns: Vec<String>,
    pub pca_threshold: Option<f64>,
    pub clamp_negative: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            kinds: vec![FeatureKind::Term],
            method: SelectionMethod::Spearman,
            n_terms: 10,
            n_types: 10,
            topics: 20,
            lda: LdaConfig::default(),
            weighting: TermWeighting::TfIdf,
            baseline_columns: Vec::new(),
            pca_threshold: Some(DEFAULT_THRESHOLD),
            clamp_negative: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() {
            return Err(Error::InvalidParameter("no feature kinds".into()));
        }
        if self.kinds.contains(&FeatureKind::Combined) {
            return Err(Error::InvalidParameter(
                "list the kinds to combine instead of `combined`".into(),
            ));
        }
        let distinct: BTreeSet<_> = self.kinds.iter().collect();
        if distinct.len() != self.kinds.len() {
            return Err(Error::InvalidParameter("duplicate feature kind".into()));
        }
        if self.method != SelectionMethod::None && (self.n_terms == 0 || self.n_types == 0) {
            return Err(Error::InvalidParameter("feature count must be at least 1".into()));
        }
        if self.kinds.contains(&FeatureKind::Topic) && self.topics == 0 {
            return Err(Error::InvalidParameter("topic count must be at least 1".into()));
        }
        if let Some(t) = self.pca_threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidParameter(format!("pca threshold {t} not in (0, 1]")));
            }
        }
        Ok(())
    }

    /// Stable one-line identifier, e.g. `term|spearman|n_terms=5|pca=0.9`.
    pub fn descriptor(&self) -> String {
        let mut parts = vec![self
            .kinds
            .iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join("+")];
        let selects = self.kinds.iter().any(|k| matches!(k, FeatureKind::Term | FeatureKind::Type));
        if selects {
            parts.push(self.method.to_string());
            if self.method != SelectionMethod::None {
                if self.kinds.contains(&FeatureKind::Term) {
                    parts.push(format!("n_terms={}", self.n_terms));
                }
                if self.kinds.contains(&FeatureKind::Type) {
                    parts.push(format!("n_types={}", self.n_types));
                }
            }
        }
        if self.kinds.contains(&FeatureKind::Term) && self.weighting != TermWeighting::TfIdf {
            parts.push(format!("weighting={}", self.weighting));
        }
        if self.kinds.contains(&FeatureKind::Topic) {
            parts.push(format!("k={}", self.topics));
        }
        if self.kinds.contains(&FeatureKind::Baseline) && !self.baseline_columns.is_empty() {
            parts.push(format!("metrics={}", self.baseline_columns.join(";")));
        }
        parts.push(match self.pca_threshold {
            Some(t) => format!("pca={t}"),
            None => "pca=off".to_string(),
        });
        if self.clamp_negative {
            parts.push("clamp".to_string());
        }
        parts.join("|")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionMetrics {
    pub scc: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub release: String,
    pub config: String,
    pub seed: u64,
    pub repetitions: Vec<RepetitionMetrics>,
    pub mean_scc: f64,
    pub mean_mae: f64,
}

impl EvalReport {
    pub fn new(release: String, config: String, seed: u64, repetitions: Vec<RepetitionMetrics>) -> Self {
        let n = repetitions.len() as f64;
        let mean_scc = repetitions.iter().map(|r| r.scc).sum::<f64>() / n;
        let mean_mae = repetitions.iter().map(|r| r.mae).sum::<f64>() / n;
        EvalReport {
            release,
            config,
            seed,
            repetitions,
            mean_scc,
            mean_mae,
        }
    }

    pub fn scc_values(&self) -> Vec<f64> {
        self.repetitions.iter().map(|r| r.scc).collect()
    }

    pub fn mae_values(&self) -> Vec<f64> {
        self.repetitions.iter().map(|r| r.mae).collect()
    }

    /// `release,config,repetition,scc,mae`, one line per repetition.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "release,config,repetition,scc,mae")?;
        for (i, r) in self.repetitions.iter().enumerate() {
            writeln!(out, "{},{},{},{},{}", self.release, self.config, i + 1, r.scc, r.mae)?;
        }
        Ok(())
    }
}

fn pick(values: &[f64], indices: &[usize]) -> Vec<f64> {
    indices.iter().map(|&i| values[i]).collect()
}

fn pick_names(release: &PreparedRelease, indices: &[usize]) -> Vec<String> {
    indices.iter().map(|&i| release.names[i].clone()).collect()
}

fn docs<'a>(release: &'a PreparedRelease, indices: &[usize]) -> Vec<Vec<&'a str>> {
    indices
        .iter()
        .map(|&i| release.terms[i].iter().map(String::as_str).collect())
        .collect()
}

/// Train and test matrices of one kind, fitted on the training rows only.
fn kind_matrices(
    release: &PreparedRelease,
    config: &PipelineConfig,
    fold: &Fold,
    kind: FeatureKind,
    y_train: &[f64],
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let train_names = pick_names(release, &fold.train);
    let test_names = pick_names(release, &fold.test);
    match kind {
        FeatureKind::Term => {
            let train_docs = docs(release, &fold.train);
            let vocab = TermVocabulary::build(&train_docs);
            let train = vocab.transform(&train_docs, train_names, config.weighting)?;
            let (_, train) = select(&train, y_train, config.method, config.n_terms)?;
            let test = vocab
                .transform(&docs(release, &fold.test), test_names, config.weighting)?
                .align_columns(&train.columns);
            Ok((train, test))
        }
        FeatureKind::Topic => {
            let train_docs = docs(release, &fold.train);
            let vocab = TermVocabulary::build(&train_docs);
            let index: HashMap<&str, usize> =
                vocab.terms.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
            let to_indices = |d: &[&str]| -> Vec<usize> { d.iter().filter_map(|t| index.get(t).copied()).collect() };
            let train_idx: Vec<Vec<usize>> = train_docs.iter().map(|d| to_indices(d)).collect();
            let test_idx: Vec<Vec<usize>> = docs(release, &fold.test).iter().map(|d| to_indices(d)).collect();
            let model = fit_lda(&train_idx, vocab.len(), config.topics, fold.seed, &config.lda)?;
            let test_counts = model.infer(&test_idx, fold.seed.wrapping_add(1));
            Ok((
                topic_matrix(&model.doc_topic_counts, config.topics, train_names)?,
                topic_matrix(&test_counts, config.topics, test_names)?,
            ))
        }
        FeatureKind::Type | FeatureKind::Package => {
            let sets = if kind == FeatureKind::Type { &release.types } else { &release.packages };
            let train_sets: Vec<BTreeSet<String>> = fold.train.iter().map(|&i| sets[i].clone()).collect();
            let test_sets: Vec<BTreeSet<String>> = fold.test.iter().map(|&i| sets[i].clone()).collect();
            let mut train = presence_matrix(kind, &train_sets, train_names, None)?;
            if kind == FeatureKind::Type {
                train = select(&train, y_train, config.method, config.n_types)?.1;
            }
            let test = presence_matrix(kind, &test_sets, test_names, Some(&train.columns))?;
            Ok((train, test))
        }
        FeatureKind::Baseline => {
            let full = release.baseline.as_ref().ok_or(Error::NoBaselineMetrics)?;
            let full = if config.baseline_columns.is_empty() {
                full.clone()
            } else {
                let mut indices = Vec::new();
                for name in &config.baseline_columns {
                    indices.push(
                        full.column_index(name)
                            .ok_or_else(|| Error::FeatureMismatch(format!("no baseline metric {name}")))?,
                    );
                }
                full.select_columns(&indices)
            };
            Ok((full.select_rows(&fold.train), full.select_rows(&fold.test)))
        }
        FeatureKind::Combined => Err(Error::InvalidParameter("combined is not a base kind".into())),
    }
}

/// Fits the whole pipeline on the training rows and scores the test rows.
pub fn run_fold(release: &PreparedRelease, config: &PipelineConfig, fold: &Fold) -> Result<RepetitionMetrics> {
    if fold.test.is_empty() {
        return Err(Error::EmptyTestFold);
    }
    let y_train = pick(&release.defects, &fold.train);
    let y_test = pick(&release.defects, &fold.test);
    let mut train_parts = Vec::with_capacity(config.kinds.len());
    let mut test_parts = Vec::with_capacity(config.kinds.len());
    for &kind in &config.kinds {
        let (train, test) = kind_matrices(release, config, fold, kind, &y_train)?;
        train_parts.push(train);
        test_parts.push(test);
    }
    let mut train_x = combine(&train_parts)?;
    let mut test_x = combine(&test_parts)?;
    if let Some(threshold) = config.pca_threshold {
        let transform = pca_fit(&train_x, threshold)?;
        train_x = pca_apply(&transform, &train_x)?;
        test_x = pca_apply(&transform, &test_x)?;
    }
    let model = predict::fit(&train_x, &y_train)?;
    let mut predicted = predict::predict(&model, &test_x)?;
    if config.clamp_negative {
        for p in &mut predicted {
            *p = p.max(0.0);
        }
    }
    Ok(RepetitionMetrics {
        scc: scc(&predicted, &y_test)?,
        mae: mae(&predicted, &y_test)?,
    })
}

/// Runs every repetition (in parallel) and averages the metrics. Results do
/// not depend on thread scheduling.
pub fn cross_validate(release: &PreparedRelease, config: &PipelineConfig, cv: &CvConfig) -> Result<EvalReport> {
    config.validate()?;
    release.check()?;
    let folds = fold_plan(&release.defects, cv)?;
    let repetitions = folds
        .par_iter()
        .map(|fold| run_fold(release, config, fold))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::new(release.label.clone(), config.descriptor(), cv.seed, repetitions))
}

/// MAE of predicting every test file with the training-fold mean, averaged
/// over the same folds as [`cross_validate`].
pub fn mean_predictor_mae(defects: &[f64], cv: &CvConfig) -> Result<f64> {
    let folds = fold_plan(defects, cv)?;
    let mut total = 0.0;
    for fold in &folds {
        let train = pick(defects, &fold.train);
        let mean = train.iter().sum::<f64>() / train.len() as f64;
        let test = pick(defects, &fold.test);
        total += mae(&vec![mean; test.len()], &test)?;
    }
    Ok(total / folds.len() as f64)
}
