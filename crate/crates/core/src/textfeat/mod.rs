//! Term features: raw text to stemmed terms to tf.idf-weighted bag-of-words.
//!
//! Every text element of a file is treated alike (identifiers, keywords,
//! comments and string literals). Tokens are maximal alphabetic runs, split on
//! camel-case boundaries; one-letter words are dropped and the rest are
//! lowercased and Porter-stemmed.

pub mod porter;

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{FeatureKind, FeatureMatrix};

pub use porter::stem;

/// Maximal runs of alphabetic characters; everything else separates.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Splits at lower-to-upper boundaries and before the last capital of an
/// upper-case run that is followed by lower case: `HTMLParser` -> `HTML`, `Parser`.
pub fn camel_split(token: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = token.char_indices().collect();
    let mut cuts = Vec::new();
    for w in 1..chars.len() {
        let prev = chars[w - 1].1;
        let cur = chars[w].1;
        let next = chars.get(w + 1).map(|&(_, c)| c);
        let lower_to_upper = !prev.is_uppercase() && cur.is_uppercase();
        let acronym_end = prev.is_uppercase() && cur.is_uppercase() && next.is_some_and(char::is_lowercase);
        if lower_to_upper || acronym_end {
            cuts.push(chars[w].0);
        }
    }
    let mut parts = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for cut in cuts {
        parts.push(&token[start..cut]);
        start = cut;
    }
    parts.push(&token[start..]);
    parts
}

/// Drops one-character words, lowercases and stems the rest.
pub fn normalize<S: AsRef<str>>(words: &[S]) -> Vec<String> {
    words
        .iter()
        .map(AsRef::as_ref)
        .filter(|w| w.chars().count() > 1)
        .map(|w| stem(&w.to_lowercase()))
        .collect()
}

/// Full term pipeline for one file: tokenize, camel-split, normalize.
pub fn extract_terms(text: &str) -> Vec<String> {
    let words: Vec<&str> = tokenize(text).into_iter().flat_map(camel_split).collect();
    normalize(&words)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TermWeighting {
    /// `tf * ln(D / df)`.
    #[default]
    TfIdf,
    /// Raw term counts.
    Count,
}

impl std::fmt::Display for TermWeighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TermWeighting::TfIdf => "tfidf",
            TermWeighting::Count => "count",
        })
    }
}

impl std::str::FromStr for TermWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfidf" | "tf-idf" | "tf.idf" => Ok(TermWeighting::TfIdf),
            "count" | "counts" => Ok(TermWeighting::Count),
            other => Err(Error::InvalidParameter(format!("unknown term weighting {other:?}"))),
        }
    }
}

/// Terms of a corpus in lexicographic order with their document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TermVocabulary {
    pub terms: Vec<String>,
    pub document_frequency: Vec<usize>,
    /// Number of documents the frequencies were counted over.
    pub documents: usize,
}

impl TermVocabulary {
    pub fn build<S: AsRef<str>>(docs: &[Vec<S>]) -> Self {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let mut terms: Vec<&str> = doc.iter().map(AsRef::as_ref).collect();
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        TermVocabulary {
            terms: df.keys().map(|t| t.to_string()).collect(),
            document_frequency: df.values().copied().collect(),
            documents: docs.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn idf(&self, index: usize) -> f64 {
        (self.documents as f64 / self.document_frequency[index] as f64).ln()
    }

    fn index(&self) -> HashMap<&str, usize> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect()
    }

    /// Weights documents against this vocabulary. Terms outside it are ignored,
    /// so held-out documents never add columns.
    pub fn transform<S: AsRef<str>>(
        &self,
        docs: &[Vec<S>],
        row_names: Vec<String>,
        weighting: TermWeighting,
    ) -> Result<FeatureMatrix> {
        if docs.len() != row_names.len() {
            return Err(Error::LengthMismatch {
                left: docs.len(),
                right: row_names.len(),
            });
        }
        let index = self.index();
        let idf: Vec<f64> = (0..self.len()).map(|t| self.idf(t)).collect();
        let mut values = DMatrix::zeros(docs.len(), self.len());
        for (d, doc) in docs.iter().enumerate() {
            for term in doc {
                if let Some(&t) = index.get(term.as_ref()) {
                    values[(d, t)] += 1.0;
                }
            }
        }
        if weighting == TermWeighting::TfIdf {
            for (t, w) in idf.iter().enumerate() {
                values.column_mut(t).scale_mut(*w);
            }
        }
        FeatureMatrix::new(FeatureKind::Term, row_names, self.terms.clone(), values)
    }
}

/// Builds the vocabulary from `docs` and weights them with it.
pub fn term_matrix<S: AsRef<str>>(
    docs: &[Vec<S>],
    row_names: Vec<String>,
    weighting: TermWeighting,
) -> Result<(FeatureMatrix, TermVocabulary)> {
    if docs.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let vocab = TermVocabulary::build(docs);
    let matrix = vocab.transform(docs, row_names, weighting)?;
    Ok((matrix, vocab))
}
