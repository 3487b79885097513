//! Bag-of-words vocabulary, sparse count vectors and the tf-idf transform.
//!
//! The transform is `tf(w, d) * idf(w)` with `tf = count(w, d) / |d|` and
//! `idf = ln(N / n_w)`, where `N` is the number of fitted documents and
//! `n_w` the number containing `w`. [`TfIdfOptions`] switches on the
//! smoothed idf `ln((1 + N) / (1 + n_w)) + 1` and L2 row normalization for
//! parity experiments; both are off by default.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    word_to_index: HashMap<String, usize>,
    index_to_word: Vec<String>,
}

impl Vocabulary {
    /// Assigns indices in first-occurrence order.
    pub fn fit<D: AsRef<[S]>, S: AsRef<str>>(docs: &[D]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::invalid("cannot fit a vocabulary on zero documents"));
        }
        let mut vocab = Vocabulary::default();
        for doc in docs {
            for tok in doc.as_ref() {
                vocab.insert(tok.as_ref());
            }
        }
        Ok(vocab)
    }

    /// Rebuilds a vocabulary from its index-ordered word list.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut word_to_index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if word_to_index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary word `{w}`")));
            }
        }
        Ok(Vocabulary {
            word_to_index,
            index_to_word: words,
        })
    }

    fn insert(&mut self, word: &str) -> usize {
        if let Some(&i) = self.word_to_index.get(word) {
            return i;
        }
        let i = self.index_to_word.len();
        self.word_to_index.insert(word.to_string(), i);
        self.index_to_word.push(word.to_string());
        i
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.word_to_index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.index_to_word.get(index).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.index_to_word
    }

    pub fn len(&self) -> usize {
        self.index_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_word.is_empty()
    }
}

/// Sorted `(index, value)` pairs over a fixed dimension. Zeros are never
/// stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dimension: usize,
}

impl SparseVector {
    pub fn zeros(dimension: usize) -> Self {
        SparseVector {
            entries: Vec::new(),
            dimension,
        }
    }

    /// Builds from arbitrary pairs: sorts, sums duplicates, drops zeros.
    pub fn from_pairs(dimension: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        if let Some(&(i, _)) = pairs.iter().find(|(i, _)| *i >= dimension) {
            return Err(Error::invalid(format!(
                "index {i} out of range for dimension {dimension}"
            )));
        }
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Ok(SparseVector { entries, dimension })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, v)| v != 0.0)
                .collect(),
            dimension: values.len(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    fn l2_normalize(&mut self) {
        let norm = self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut self.entries {
                e.1 /= norm;
            }
        }
    }
}

/// Count of each vocabulary word in `doc`; out-of-vocabulary tokens are
/// skipped.
pub fn transform_counts<S: AsRef<str>>(doc: &[S], vocab: &Vocabulary) -> SparseVector {
    let pairs = doc
        .iter()
        .filter_map(|t| vocab.index(t.as_ref()))
        .map(|i| (i, 1.0))
        .collect();
    SparseVector::from_pairs(vocab.len(), pairs).expect("vocabulary indices are in range")
}

/// `count(word, doc) / |doc|`, or 0 for an empty document.
pub fn term_frequency<S: AsRef<str>>(doc: &[S], word: &str) -> f64 {
    if doc.is_empty() {
        return 0.0;
    }
    let count = doc.iter().filter(|t| t.as_ref() == word).count();
    count as f64 / doc.len() as f64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfIdfOptions {
    pub smooth_idf: bool,
    pub l2_normalize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocab: Vocabulary,
    doc_freq: Vec<u64>,
    num_docs: u64,
    options: TfIdfOptions,
    idf: Vec<f64>,
}

impl TfIdfModel {
    /// Counts, for each vocabulary word, how many of `docs` contain it.
    pub fn fit<D: AsRef<[S]>, S: AsRef<str>>(
        docs: &[D],
        vocab: Vocabulary,
        options: TfIdfOptions,
    ) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::invalid("cannot fit idf on zero documents"));
        }
        let mut doc_freq = vec![0u64; vocab.len()];
        let mut seen = vec![usize::MAX; vocab.len()];
        for (d, doc) in docs.iter().enumerate() {
            for tok in doc.as_ref() {
                if let Some(i) = vocab.index(tok.as_ref()) {
                    if seen[i] != d {
                        seen[i] = d;
                        doc_freq[i] += 1;
                    }
                }
            }
        }
        Self::from_parts(vocab, doc_freq, docs.len() as u64, options)
    }

    /// Fits vocabulary and document frequencies on the same documents.
    pub fn fit_corpus<D: AsRef<[S]>, S: AsRef<str>>(docs: &[D], options: TfIdfOptions) -> Result<Self> {
        let vocab = Vocabulary::fit(docs)?;
        Self::fit(docs, vocab, options)
    }

    pub fn from_parts(
        vocab: Vocabulary,
        doc_freq: Vec<u64>,
        num_docs: u64,
        options: TfIdfOptions,
    ) -> Result<Self> {
        if doc_freq.len() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                actual: doc_freq.len(),
            });
        }
        if let Some((i, &n)) = doc_freq
            .iter()
            .enumerate()
            .find(|(_, &n)| n == 0 || n > num_docs)
        {
            return Err(Error::invalid(format!(
                "document frequency {n} of `{}` outside 1..={num_docs}",
                vocab.word(i).unwrap_or("?")
            )));
        }
        let idf = doc_freq
            .iter()
            .map(|&n| idf_value(num_docs, n, options.smooth_idf))
            .collect();
        Ok(TfIdfModel {
            vocab,
            doc_freq,
            num_docs,
            options,
            idf,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_freq(&self) -> &[u64] {
        &self.doc_freq
    }

    pub fn num_docs(&self) -> u64 {
        self.num_docs
    }

    pub fn options(&self) -> TfIdfOptions {
        self.options
    }

    pub fn dimension(&self) -> usize {
        self.vocab.len()
    }

    /// Idf of `word`; 0 for words outside the vocabulary.
    pub fn inverse_document_frequency(&self, word: &str) -> f64 {
        self.vocab.index(word).map_or(0.0, |i| self.idf[i])
    }

    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> SparseVector {
        let counts = transform_counts(doc, &self.vocab);
        let len = doc.len() as f64;
        let pairs = counts
            .entries()
            .iter()
            .map(|&(i, c)| (i, (c / len) * self.idf[i]))
            .collect();
        let mut v = SparseVector::from_pairs(self.dimension(), pairs).expect("indices in range");
        if self.options.l2_normalize {
            v.l2_normalize();
        }
        v
    }
}

fn idf_value(num_docs: u64, doc_freq: u64, smooth: bool) -> f64 {
    if smooth {
        ((1 + num_docs) as f64 / (1 + doc_freq) as f64).ln() + 1.0
    } else {
        (num_docs as f64 / doc_freq as f64).ln()
    }
}
