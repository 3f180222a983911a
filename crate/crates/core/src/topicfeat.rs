//! Topic features from LDA fitted by collapsed Gibbs sampling.
//!
//! A file's topic feature vector is `ln(1 + c_k)` where `c_k` counts the file's
//! tokens assigned to topic `k` in the final Gibbs sample. Held-out files are
//! folded in by sampling their assignments against the frozen topic-word
//! counts of the fitted model.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{FeatureKind, FeatureMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    /// Symmetric document-topic prior; `None` means `50 / K`.
    pub alpha: Option<f64>,
    /// Symmetric topic-word prior.
    pub beta: f64,
    /// Gibbs sweeps when fitting.
    pub iterations: usize,
    /// Gibbs sweeps when folding in held-out documents.
    pub infer_iterations: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            infer_iterations: 100,
        }
    }
}

impl LdaConfig {
    pub fn alpha_for(&self, topics: usize) -> f64 {
        self.alpha.unwrap_or(50.0 / topics as f64)
    }
}

/// Fitted LDA state.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub topics: usize,
    pub vocab_size: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `topics x vocab_size`; row `k` is the word distribution of topic `k`.
    pub phi: DMatrix<f64>,
    /// Per document, tokens assigned to each topic in the final sample.
    pub doc_topic_counts: Vec<Vec<u32>>,
    pub topic_word_counts: Vec<Vec<u32>>,
    pub topic_totals: Vec<u64>,
    pub seed: u64,
    pub iterations: usize,
    pub infer_iterations: usize,
}

/// Collapsed Gibbs sampler over a fixed corpus. Exposed so callers can step
/// sweep by sweep; [`fit_lda`] runs it to completion.
pub struct GibbsSampler<'a> {
    docs: &'a [Vec<usize>],
    topics: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
    rng: ChaCha8Rng,
    probs: Vec<f64>,
    seed: u64,
    sweeps: usize,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(
        docs: &'a [Vec<usize>],
        vocab_size: usize,
        topics: usize,
        seed: u64,
        config: &LdaConfig,
    ) -> Result<Self> {
        if topics == 0 {
            return Err(Error::InvalidParameter("topic count must be at least 1".into()));
        }
        if vocab_size == 0 {
            return Err(Error::EmptyVocabulary);
        }
        if let Some(bad) = docs.iter().flatten().find(|&&w| w >= vocab_size) {
            return Err(Error::InvalidParameter(format!(
                "word index {bad} outside vocabulary of size {vocab_size}"
            )));
        }
        let tokens: usize = docs.iter().map(Vec::len).sum();
        if topics > tokens {
            return Err(Error::TooManyTopics { topics, tokens });
        }
        let alpha = config.alpha_for(topics);
        if !(alpha > 0.0 && config.beta > 0.0) {
            return Err(Error::InvalidParameter("alpha and beta must be positive".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut doc_topic = vec![vec![0u32; topics]; docs.len()];
        let mut topic_word = vec![vec![0u32; vocab_size]; topics];
        let mut topic_totals = vec![0u64; topics];
        let assignments = docs
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                doc.iter()
                    .map(|&w| {
                        let k = rng.random_range(0..topics);
                        doc_topic[d][k] += 1;
                        topic_word[k][w] += 1;
                        topic_totals[k] += 1;
                        k
                    })
                    .collect()
            })
            .collect();
        Ok(GibbsSampler {
            docs,
            topics,
            vocab_size,
            alpha,
            beta: config.beta,
            assignments,
            doc_topic,
            topic_word,
            topic_totals,
            rng,
            probs: vec![0.0; topics],
            seed,
            sweeps: 0,
        })
    }

    /// One full pass resampling every token's topic.
    pub fn sweep(&mut self) {
        let v_beta = self.vocab_size as f64 * self.beta;
        for (d, doc) in self.docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for k in 0..self.topics {
                    let p = (f64::from(self.doc_topic[d][k]) + self.alpha)
                        * (f64::from(self.topic_word[k][w]) + self.beta)
                        / (self.topic_totals[k] as f64 + v_beta);
                    total += p;
                    self.probs[k] = total;
                }
                let new = draw(&mut self.rng, &self.probs, total);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_totals[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn doc_topic_counts(&self) -> &[Vec<u32>] {
        &self.doc_topic
    }

    pub fn total_assignments(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    pub fn into_model(self, infer_iterations: usize) -> TopicModel {
        let v_beta = self.vocab_size as f64 * self.beta;
        let phi = DMatrix::from_fn(self.topics, self.vocab_size, |k, w| {
            (f64::from(self.topic_word[k][w]) + self.beta) / (self.topic_totals[k] as f64 + v_beta)
        });
        TopicModel {
            topics: self.topics,
            vocab_size: self.vocab_size,
            alpha: self.alpha,
            beta: self.beta,
            phi,
            doc_topic_counts: self.doc_topic,
            topic_word_counts: self.topic_word,
            topic_totals: self.topic_totals,
            seed: self.seed,
            iterations: self.sweeps,
            infer_iterations,
        }
    }
}

/// Index of the first cumulative weight exceeding a uniform draw on `[0, total)`.
fn draw(rng: &mut ChaCha8Rng, cumulative: &[f64], total: f64) -> usize {
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Fits LDA; empty documents are allowed and get all-zero count rows.
pub fn fit_lda(
    docs: &[Vec<usize>],
    vocab_size: usize,
    topics: usize,
    seed: u64,
    config: &LdaConfig,
) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(docs, vocab_size, topics, seed, config)?;
    for _ in 0..config.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model(config.infer_iterations))
}

impl TopicModel {
    /// Folds in unseen documents against the frozen topic-word counts and
    /// returns their topic assignment counts. Word indices outside the
    /// vocabulary are skipped.
    pub fn infer(&self, docs: &[Vec<usize>], seed: u64) -> Vec<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v_beta = self.vocab_size as f64 * self.beta;
        let mut probs = vec![0.0; self.topics];
        docs.iter()
            .map(|doc| {
                let words: Vec<usize> = doc.iter().copied().filter(|&w| w < self.vocab_size).collect();
                let mut counts = vec![0u32; self.topics];
                let mut z: Vec<usize> = words
                    .iter()
                    .map(|_| {
                        let k = rng.random_range(0..self.topics);
                        counts[k] += 1;
                        k
                    })
                    .collect();
                for _ in 0..self.infer_iterations {
                    for (i, &w) in words.iter().enumerate() {
                        counts[z[i]] -= 1;
                        let mut total = 0.0;
                        for k in 0..self.topics {
                            let p = (f64::from(counts[k]) + self.alpha)
                                * (f64::from(self.topic_word_counts[k][w]) + self.beta)
                                / (self.topic_totals[k] as f64 + v_beta);
                            total += p;
                            probs[k] = total;
                        }
                        let k = draw(&mut rng, &probs, total);
                        z[i] = k;
                        counts[k] += 1;
                    }
                }
                counts
            })
            .collect()
    }

    /// Word indices of topic `k` ordered by probability, ties by index.
    pub fn top_words(&self, k: usize, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.vocab_size).collect();
        idx.sort_by(|&a, &b| self.phi[(k, b)].total_cmp(&self.phi[(k, a)]).then(a.cmp(&b)));
        idx.truncate(n);
        idx
    }

    /// Plain-text table: one line per topic with its top words and probabilities.
    pub fn write_top_words<W: Write>(&self, vocabulary: &[String], n: usize, mut out: W) -> std::io::Result<()> {
        for k in 0..self.topics {
            let words: Vec<String> = self
                .top_words(k, n)
                .into_iter()
                .map(|w| {
                    let name = vocabulary.get(w).map(String::as_str).unwrap_or("?");
                    format!("{name}:{:.4}", self.phi[(k, w)])
                })
                .collect();
            writeln!(out, "topic{k}\t{}", words.join(" "))?;
        }
        Ok(())
    }
}

pub fn topic_column_names(topics: usize) -> Vec<String> {
    (0..topics).map(|k| format!("topic{k}")).collect()
}

/// `ln(1 + count)` for every document and topic.
pub fn topic_matrix(counts: &[Vec<u32>], topics: usize, row_names: Vec<String>) -> Result<FeatureMatrix> {
    if counts.len() != row_names.len() {
        return Err(Error::LengthMismatch {
            left: counts.len(),
            right: row_names.len(),
        });
    }
    let values = DMatrix::from_fn(counts.len(), topics, |d, k| f64::from(counts[d][k]).ln_1p());
    FeatureMatrix::new(FeatureKind::Topic, row_names, topic_column_names(topics), values)
}

/// The `n` documents with the most tokens in topic `k`; ties keep document order.
pub fn topic_top_files(model: &TopicModel, k: usize, n: usize) -> Vec<(usize, u32)> {
    let mut ranked: Vec<(usize, u32)> = model
        .doc_topic_counts
        .iter()
        .enumerate()
        .map(|(d, row)| (d, row[k]))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(iterations: usize) -> LdaConfig {
        LdaConfig {
            iterations,
            ..LdaConfig::default()
        }
    }

    #[test]
    fn single_topic_takes_everything() {
        let docs = vec![vec![0, 1, 1], vec![2], vec![0, 0, 2, 1]];
        let m = fit_lda(&docs, 3, 1, 7, &config(20)).unwrap();
        for (d, doc) in docs.iter().enumerate() {
            assert_eq!(m.doc_topic_counts[d][0] as usize, doc.len());
        }
        // empirical distribution (3, 3, 2) / 8, smoothed by beta
        let expected = [3.0, 3.0, 2.0].map(|c| (c + 0.01) / (8.0 + 0.03));
        for (w, e) in expected.iter().enumerate() {
            assert!((m.phi[(0, w)] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_document_gets_zero_row() {
        let docs = vec![vec![0, 1], vec![], vec![1, 1, 0]];
        let m = fit_lda(&docs, 2, 2, 3, &config(10)).unwrap();
        assert_eq!(m.doc_topic_counts[1], vec![0, 0]);
        assert_eq!(m.doc_topic_counts[0].iter().sum::<u32>(), 2);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            fit_lda(&[vec![0]], 1, 2, 0, &config(1)),
            Err(Error::TooManyTopics { topics: 2, tokens: 1 })
        ));
        assert!(matches!(fit_lda(&[vec![]], 0, 1, 0, &config(1)), Err(Error::EmptyVocabulary)));
        assert!(fit_lda(&[vec![0]], 1, 0, 0, &config(1)).is_err());
        assert!(fit_lda(&[vec![3]], 2, 1, 0, &config(1)).is_err());
    }

    #[test]
    fn log_transform() {
        let m = topic_matrix(&[vec![0, 3], vec![0, 0], vec![7, 700]], 2, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        assert_eq!(m.values[(0, 0)], 0.0);
        assert!((m.values[(0, 1)] - 4f64.ln()).abs() < 1e-15);
        assert!((m.values[(0, 1)] - 1.38629).abs() < 1e-5);
        assert_eq!(m.column(0)[1], 0.0);
        assert!((m.values[(2, 0)] - 2.079).abs() < 1e-3);
        assert!((m.values[(2, 1)] - 6.552).abs() < 1e-3);
        assert_eq!(m.columns, vec!["topic0", "topic1"]);
    }

    fn model_with_counts(counts: Vec<Vec<u32>>) -> TopicModel {
        let k = counts[0].len();
        TopicModel {
            topics: k,
            vocab_size: 1,
            alpha: 1.0,
            beta: 0.01,
            phi: DMatrix::from_element(k, 1, 1.0),
            doc_topic_counts: counts,
            topic_word_counts: vec![vec![0]; k],
            topic_totals: vec![0; k],
            seed: 0,
            iterations: 0,
            infer_iterations: 0,
        }
    }

    #[test]
    fn top_files_tie_rule() {
        let m = model_with_counts(vec![vec![5], vec![9], vec![9]]);
        assert!(topic_top_files(&m, 0, 0).is_empty());
        assert_eq!(topic_top_files(&m, 0, 2), vec![(1, 9), (2, 9)]);
    }

    #[test]
    fn conservation_holds_every_sweep() {
        let docs = vec![vec![0, 1, 2, 3], vec![3, 3, 1], vec![], vec![2, 0]];
        let mut s = GibbsSampler::new(&docs, 4, 3, 11, &config(0)).unwrap();
        for _ in 0..25 {
            s.sweep();
            assert_eq!(s.total_assignments(), 9);
            for (d, doc) in docs.iter().enumerate() {
                assert_eq!(s.doc_topic_counts()[d].iter().sum::<u32>() as usize, doc.len());
            }
        }
    }

    #[test]
    fn inference_counts_known_tokens_only() {
        let docs = vec![vec![0, 0, 1], vec![1, 1, 0]];
        let m = fit_lda(&docs, 2, 2, 5, &config(30)).unwrap();
        let inferred = m.infer(&[vec![0, 1, 9], vec![]], 1);
        assert_eq!(inferred[0].iter().sum::<u32>(), 2);
        assert_eq!(inferred[1], vec![0, 0]);
        assert_eq!(inferred, m.infer(&[vec![0, 1, 9], vec![]], 1));
    }

    #[test]
    fn top_words_dump() {
        let docs = vec![vec![0, 0, 1]];
        let m = fit_lda(&docs, 2, 1, 5, &config(2)).unwrap();
        let mut buf = Vec::new();
        m.write_top_words(&["edit".into(), "view".into()], 2, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "topic0\tedit:0.6656 view:0.3344\n");
    }
}
