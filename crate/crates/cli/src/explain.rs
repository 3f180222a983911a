use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use content_defect::featsel::spearman;
use content_defect::textfeat::TermVocabulary;
use content_defect::topicfeat::{fit_lda, topic_top_files, LdaConfig};
use content_defect::{FeatureKind, FeatureMatrix};

use crate::artifacts::{self, load_prepared};
use crate::error::CliResult;

pub const CORRELATIONS: &str = "explain_correlations.csv";
pub const TOPICS: &str = "explain_topics.txt";
pub const REPORT: &str = "explain.txt";

#[derive(Debug, Clone)]
pub struct ExplainOptions {
    pub artifacts: PathBuf,
    pub out: Option<PathBuf>,
    pub topics: usize,
    pub top_files: usize,
    pub top_words: usize,
    pub top_features: usize,
    pub seed: u64,
    pub lda: LdaConfig,
}

/// How concentrated defects are in few files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewStats {
    pub files: usize,
    pub defective_files: usize,
    pub total_defects: f64,
    /// Share of all defects held by the ten most defective files.
    pub top10_share: f64,
    pub max_defects: f64,
}

pub fn skew_stats(defects: &[f64]) -> SkewStats {
    let mut sorted = defects.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    let top: f64 = sorted.iter().take(10).sum();
    SkewStats {
        files: defects.len(),
        defective_files: defects.iter().filter(|&&d| d > 0.0).count(),
        total_defects: total,
        top10_share: if total > 0.0 { top / total } else { 0.0 },
        max_defects: sorted.first().copied().unwrap_or(0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    pub kind: FeatureKind,
    pub feature: String,
    pub spearman: f64,
}

/// Spearman correlation of every column with the defect counts, strongest
/// (by magnitude) first. Constant columns are listed with 0.
pub fn feature_correlations(matrices: &[FeatureMatrix], defects: &[f64]) -> CliResult<Vec<Correlation>> {
    let mut out = Vec::new();
    for m in matrices {
        for j in 0..m.n_cols() {
            out.push(Correlation {
                kind: m.kind,
                feature: m.columns[j].clone(),
                spearman: spearman(&m.column(j), defects)?,
            });
        }
    }
    out.sort_by(|a, b| {
        b.spearman
            .abs()
            .total_cmp(&a.spearman.abs())
            .then(a.kind.cmp(&b.kind))
            .then_with(|| a.feature.cmp(&b.feature))
    });
    Ok(out)
}

/// Builds the case-study report; with `out` set, also writes it and its parts.
pub fn explain(options: &ExplainOptions) -> CliResult<String> {
    let dir = &options.artifacts;
    let (manifest, prepared) = load_prepared(dir)?;
    let matrices = vec![
        artifacts::read_matrix(&dir.join(artifacts::TERM_MATRIX), FeatureKind::Term)?,
        artifacts::read_matrix(&dir.join(artifacts::TYPE_MATRIX), FeatureKind::Type)?,
        artifacts::read_matrix(&dir.join(artifacts::PACKAGE_MATRIX), FeatureKind::Package)?,
    ];
    let correlations = feature_correlations(&matrices, &prepared.defects)?;
    let skew = skew_stats(&prepared.defects);

    let vocab = TermVocabulary::build(&prepared.terms);
    let index: HashMap<&str, usize> = vocab.terms.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let docs: Vec<Vec<usize>> = prepared
        .terms
        .iter()
        .map(|d| d.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let model = fit_lda(&docs, vocab.len(), options.topics, options.seed, &options.lda)?;

    let mut topics_text = String::new();
    for k in 0..model.topics {
        let words: Vec<&str> = model
            .top_words(k, options.top_words)
            .into_iter()
            .map(|w| vocab.terms[w].as_str())
            .collect();
        let _ = writeln!(topics_text, "topic{k}: {}", words.join(" "));
        for (file, count) in topic_top_files(&model, k, options.top_files) {
            let _ = writeln!(topics_text, "  {} ({count})", prepared.names[file]);
        }
    }

    let mut report = String::new();
    let _ = writeln!(report, "release {}", manifest.label());
    let _ = writeln!(
        report,
        "defects: {} files, {} defective, {} total, max {} per file, top-10 files hold {:.2} of defects",
        skew.files, skew.defective_files, skew.total_defects, skew.max_defects, skew.top10_share
    );
    let _ = writeln!(report, "\nstrongest features by |spearman|:");
    for c in correlations.iter().take(options.top_features) {
        let _ = writeln!(report, "  {:<8} {:+.4}  {}", c.kind.as_str(), c.spearman, c.feature);
    }
    let _ = writeln!(report, "\ntopics (K = {}, seed {}):", options.topics, options.seed);
    report.push_str(&topics_text);

    if let Some(out) = &options.out {
        write_outputs(out, &report, &topics_text, &correlations)?;
    }
    Ok(report)
}

fn write_outputs(out: &Path, report: &str, topics: &str, correlations: &[Correlation]) -> CliResult<()> {
    artifacts::create_dir(out)?;
    artifacts::write_atomic(&out.join(REPORT), report.as_bytes())?;
    artifacts::write_atomic(&out.join(TOPICS), topics.as_bytes())?;
    artifacts::write_with(&out.join(CORRELATIONS), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["kind", "feature", "spearman"])?;
        for c in correlations {
            w.write_record([c.kind.as_str(), &c.feature, &c.spearman.to_string()])?;
        }
        w.flush()
    })
}
