//! Corpus ingestion: tokenization, stemming, vocabulary filtering, fixed-length chunking and
//! bag-of-words encoding.
//!
//! Tokens are maximal runs of alphabetic characters, lowercased, filtered against a stopword
//! list on their surface form and then stemmed with the Snowball English (Porter2) stemmer.

mod io;
pub mod stopwords;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use rayon::prelude::*;
use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_corpus, read_constitutions, read_documents, read_vocabulary, write_constitutions,
    write_documents, write_vocabulary,
};

pub const MIN_YEAR: i32 = 1200;
pub const MAX_YEAR: i32 = 2100;

/// One dated source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawConstitution {
    pub id: String,
    pub country: String,
    pub year: i32,
    pub text: String,
}

impl RawConstitution {
    pub fn new(
        id: impl Into<String>,
        country: impl Into<String>,
        year: i32,
        text: impl Into<String>,
    ) -> Result<Self> {
        let id = id.into();
        let text = text.into();
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(Error::InvalidInput(format!(
                "constitution `{id}`: year {year} outside [{MIN_YEAR}, {MAX_YEAR}]"
            )));
        }
        if text.split_whitespace().next().is_none() {
            return Err(Error::InvalidInput(format!(
                "constitution `{id}` has empty text"
            )));
        }
        Ok(Self {
            id,
            country: country.into(),
            year,
            text,
        })
    }
}

/// Constitution metadata carried through the pipeline once the text is no longer needed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstitutionMeta {
    pub id: String,
    pub country: String,
    pub year: i32,
    pub n_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// Tokens per document chunk.
    pub doc_len: usize,
    /// Minimum corpus-wide frequency for a token to be kept.
    pub min_count: usize,
    /// Maximum fraction of documents a token may appear in.
    pub max_doc_frac: f64,
    pub stopwords: BTreeSet<String>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            doc_len: 500,
            min_count: 20,
            max_doc_frac: 0.90,
            stopwords: stopwords::ENGLISH.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.doc_len == 0 {
            return Err(Error::config("corpus.doc_len", "must be at least 1"));
        }
        if !(self.max_doc_frac > 0.0 && self.max_doc_frac <= 1.0) {
            return Err(Error::config("corpus.max_doc_frac", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Sorted list of unique stemmed tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from tokens in the given order. Duplicates are rejected.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate vocabulary token `{t}`"
                )));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }
}

/// Sparse token-count vector, sorted by token id with no zero entries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseCounts(Vec<(u32, u32)>);

impl SparseCounts {
    pub fn from_ids(ids: impl IntoIterator<Item = u32>) -> Self {
        let mut map = BTreeMap::new();
        for id in ids {
            *map.entry(id).or_insert(0u32) += 1;
        }
        Self(map.into_iter().collect())
    }

    /// Builds from `(token id, count)` pairs; repeated ids are summed, zero counts dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (id, c) in pairs {
            *map.entry(id).or_insert(0u32) += c;
        }
        Self(map.into_iter().filter(|&(_, c)| c > 0).collect())
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn get(&self, id: u32) -> u32 {
        self.0
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|pos| self.0[pos].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&(_, c)| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Expands back to a token-id sequence in ascending id order.
    pub fn expand(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.total());
        for &(id, c) in &self.0 {
            out.extend(std::iter::repeat_n(id, c as usize));
        }
        out
    }
}

/// A contiguous chunk of one constitution's in-vocabulary tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub constitution_id: String,
    pub position: usize,
    pub counts: SparseCounts,
}

impl Document {
    pub fn len(&self) -> usize {
        self.counts.total()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn document_id(constitution_id: &str, position: usize) -> String {
    format!("{constitution_id}#{position}")
}

/// Lowercases, splits on non-letters, drops stopwords and stems what is left.
pub fn tokenize_and_stem(text: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    let stemmer = Stemmer::create(Algorithm::English);
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .filter(|w| !stopwords.contains(w))
        .map(|w| stemmer.stem(&w).into_owned())
        .collect()
}

/// Chunk boundaries for a stream of `n` tokens: full chunks of `doc_len`, with a trailing
/// remainder kept when it has at least `doc_len / 2` tokens and merged into the previous
/// chunk otherwise. A stream shorter than one chunk becomes a single chunk.
pub fn chunk_ranges(n: usize, doc_len: usize) -> Vec<Range<usize>> {
    assert!(doc_len >= 1, "doc_len must be positive");
    if n == 0 {
        return Vec::new();
    }
    let full = n / doc_len;
    let tail = n % doc_len;
    let mut ranges: Vec<Range<usize>> = (0..full).map(|i| i * doc_len..(i + 1) * doc_len).collect();
    if tail > 0 {
        if 2 * tail >= doc_len || ranges.is_empty() {
            ranges.push(full * doc_len..n);
        } else if let Some(last) = ranges.last_mut() {
            last.end = n;
        }
    }
    ranges
}

/// Keeps tokens whose corpus frequency is at least `min_count` and that occur in at most
/// `max_doc_frac` of the documents. Document frequency is measured over provisional chunks
/// of each raw stream built with the same chunking rule. Tokens are sorted lexicographically.
pub fn build_vocabulary(streams: &[Vec<String>], cfg: &CorpusConfig) -> Result<Vocabulary> {
    cfg.validate()?;
    if streams.iter().all(Vec::is_empty) {
        return Err(Error::EmptyVocabulary);
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    let mut doc_freq: HashMap<&str, usize> = HashMap::new();
    let mut n_docs = 0usize;
    for stream in streams {
        for range in chunk_ranges(stream.len(), cfg.doc_len) {
            n_docs += 1;
            let chunk: BTreeSet<&str> = stream[range].iter().map(String::as_str).collect();
            for t in chunk {
                *doc_freq.entry(t).or_insert(0) += 1;
            }
        }
        for t in stream {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let max_docs = cfg.max_doc_frac * n_docs as f64;
    let mut kept: Vec<String> = freq
        .into_iter()
        .filter(|&(t, c)| c >= cfg.min_count && doc_freq[t] as f64 <= max_docs)
        .map(|(t, _)| t.to_string())
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    kept.sort_unstable();
    Vocabulary::from_tokens(kept)
}

/// Counts the tokens of one document. Every token must be in the vocabulary.
pub fn to_bow<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Result<SparseCounts> {
    let ids = tokens
        .iter()
        .map(|t| {
            let t = t.as_ref();
            vocab
                .get(t)
                .ok_or_else(|| Error::UnknownToken(t.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseCounts::from_ids(ids))
}

/// Splits each constitution's in-vocabulary tokens into documents. Out-of-vocabulary tokens
/// are dropped before chunking, so chunks hold exactly `doc_len` retained tokens.
pub fn chunk_documents<S: AsRef<str>>(
    streams: &[(S, Vec<String>)],
    vocab: &Vocabulary,
    doc_len: usize,
) -> Vec<Document> {
    let mut docs = Vec::new();
    for (cid, tokens) in streams {
        let cid = cid.as_ref();
        let kept: Vec<&String> = tokens.iter().filter(|t| vocab.get(t).is_some()).collect();
        for (position, range) in chunk_ranges(kept.len(), doc_len).into_iter().enumerate() {
            let counts =
                to_bow(&kept[range], vocab).expect("tokens were filtered to the vocabulary");
            docs.push(Document {
                id: document_id(cid, position),
                constitution_id: cid.to_string(),
                position,
                counts,
            });
        }
    }
    docs
}

/// Output of the `prepare` stage.
#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub vocabulary: Vocabulary,
    pub documents: Vec<Document>,
    /// Sorted by (year, id). Constitutions left without documents are dropped.
    pub constitutions: Vec<ConstitutionMeta>,
}

pub fn prepare_corpus(raws: &[RawConstitution], cfg: &CorpusConfig) -> Result<PreparedCorpus> {
    cfg.validate()?;
    let mut seen = BTreeSet::new();
    for r in raws {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::InvalidInput(format!(
                "duplicate constitution id `{}`",
                r.id
            )));
        }
    }
    let mut ordered: Vec<&RawConstitution> = raws.iter().collect();
    ordered.sort_by(|a, b| (a.year, &a.id).cmp(&(b.year, &b.id)));

    let streams: Vec<Vec<String>> = ordered
        .par_iter()
        .map(|r| tokenize_and_stem(&r.text, &cfg.stopwords))
        .collect();
    let vocabulary = build_vocabulary(&streams, cfg)?;
    let labelled: Vec<(&str, Vec<String>)> =
        ordered.iter().map(|r| r.id.as_str()).zip(streams).collect();
    let documents = chunk_documents(&labelled, &vocabulary, cfg.doc_len);

    let mut per_constitution: HashMap<&str, usize> = HashMap::new();
    for d in &documents {
        *per_constitution
            .entry(d.constitution_id.as_str())
            .or_insert(0) += 1;
    }
    let constitutions = ordered
        .iter()
        .filter_map(|r| {
            per_constitution
                .get(r.id.as_str())
                .map(|&n| ConstitutionMeta {
                    id: r.id.clone(),
                    country: r.country.clone(),
                    year: r.year,
                    n_documents: n,
                })
        })
        .collect();
    Ok(PreparedCorpus {
        vocabulary,
        documents,
        constitutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn cfg(min_count: usize, max_doc_frac: f64, doc_len: usize) -> CorpusConfig {
        CorpusConfig {
            doc_len,
            min_count,
            max_doc_frac,
            stopwords: BTreeSet::new(),
        }
    }

    #[test]
    fn tokenize_examples() {
        let stop: BTreeSet<String> = ["the".to_string()].into();
        assert!(tokenize_and_stem("", &stop).is_empty());
        assert_eq!(
            tokenize_and_stem("The citizens' rights", &stop),
            ["citizen", "right"]
        );
        assert_eq!(
            tokenize_and_stem("Running runner runs", &BTreeSet::new()),
            ["run", "runner", "run"]
        );
    }

    #[test]
    fn tokenize_drops_digits_and_punctuation() {
        let toks = tokenize_and_stem("Article 12: Freedom-of-speech!", &BTreeSet::new());
        assert_eq!(toks, ["articl", "freedom", "of", "speech"]);
    }

    #[test]
    fn raw_constitution_validation() {
        assert!(RawConstitution::new("a", "A", 1199, "x").is_err());
        assert!(RawConstitution::new("a", "A", 1800, "  \n ").is_err());
        assert!(RawConstitution::new("a", "A", 1800, "text").is_ok());
    }

    #[test]
    fn min_count_boundary() {
        let mut s = vec!["law".to_string(); 19];
        s.extend(vec!["right".to_string(); 20]);
        let v = build_vocabulary(&[s], &cfg(20, 1.0, 500)).unwrap();
        assert_eq!(v.tokens(), ["right"]);

        let law = vec!["law".to_string(); 20];
        let v = build_vocabulary(&[law.clone(), law], &cfg(20, 1.0, 500)).unwrap();
        assert_eq!(v.tokens(), ["law"]);
    }

    #[test]
    fn document_frequency_filter() {
        // 100 single-token documents; "common" appears in 91 of them, "rare" in 9.
        let streams: Vec<Vec<String>> = (0..100)
            .map(|i| vec![if i < 91 { "common" } else { "rare" }.to_string()])
            .collect();
        let v = build_vocabulary(&streams, &cfg(1, 0.9, 1)).unwrap();
        assert_eq!(v.tokens(), ["rare"]);
    }

    #[test]
    fn empty_vocabulary() {
        let err = build_vocabulary(&[words("a b c")], &cfg(5, 1.0, 10)).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary));
        assert!(matches!(
            build_vocabulary(&[vec![]], &cfg(1, 1.0, 10)),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn chunking_rules() {
        let lens = |n, l| {
            chunk_ranges(n, l)
                .iter()
                .map(|r| r.len())
                .collect::<Vec<_>>()
        };
        assert_eq!(lens(1000, 500), [500, 500]);
        assert_eq!(lens(1100, 500), [500, 600]);
        assert_eq!(lens(1250, 500), [500, 500, 250]);
        assert_eq!(lens(120, 500), [120]);
        assert!(lens(0, 500).is_empty());
    }

    #[test]
    fn chunks_never_straddle_constitutions() {
        let vocab = Vocabulary::from_tokens(vec!["law".into()]).unwrap();
        let streams = vec![
            ("a", vec!["law".to_string(); 500]),
            ("b", vec!["law".to_string(); 500]),
        ];
        let docs = chunk_documents(&streams, &vocab, 500);
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].constitution_id, "a");
        assert_eq!(docs[1].constitution_id, "b");
        assert!(docs.iter().all(|d| d.len() == 500));
    }

    #[test]
    fn bow_examples() {
        let vocab = Vocabulary::from_tokens(vec!["law".into(), "right".into()]).unwrap();
        let bow = to_bow(&["law", "law", "right"], &vocab).unwrap();
        assert_eq!(bow.entries(), &[(0, 2), (1, 1)]);
        assert!(to_bow::<&str>(&[], &vocab).unwrap().is_empty());
        assert_eq!(to_bow(&["right", "law", "law"], &vocab).unwrap(), bow);
        assert!(matches!(to_bow(&["duty"], &vocab), Err(Error::UnknownToken(t)) if t == "duty"));
    }
}
