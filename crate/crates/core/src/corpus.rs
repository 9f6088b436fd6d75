//! Annotated corpora, vocabulary partitions and bimodal documents.
//!
//! A partition scheme routes every lemma occurrence to the topical or the
//! opinion modality (or drops it). The resulting [`BimodalCorpus`] keeps two
//! disjoint vocabularies whose ids are assigned in lexicographic order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Adj,
    Adv,
    Verb,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 5] = [Pos::Noun, Pos::Adj, Pos::Adv, Pos::Verb, Pos::Other];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NeClass {
    Person,
    Organization,
    Location,
    Misc,
}

/// Document-level viewpoint label. The sign convention is fixed:
/// Palestinian is `-1`, Israeli is `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Viewpoint {
    Palestinian,
    Israeli,
}

impl Viewpoint {
    pub fn sign(self) -> f64 {
        match self {
            Viewpoint::Palestinian => -1.0,
            Viewpoint::Israeli => 1.0,
        }
    }

    /// Non-negative values map to Israeli.
    pub fn from_sign(value: f64) -> Self {
        if value < 0.0 {
            Viewpoint::Palestinian
        } else {
            Viewpoint::Israeli
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Viewpoint::Palestinian => Viewpoint::Israeli,
            Viewpoint::Israeli => Viewpoint::Palestinian,
        }
    }
}

impl fmt::Display for Viewpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Viewpoint::Palestinian => "palestinian",
            Viewpoint::Israeli => "israeli",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedToken {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    /// Named-entity class; `Some` exactly when the token is a named entity.
    pub ne: Option<NeClass>,
}

impl AnnotatedToken {
    pub fn new(surface: &str, lemma: &str, pos: Pos, ne: Option<NeClass>) -> Self {
        Self {
            surface: surface.to_owned(),
            lemma: lemma.to_owned(),
            pos,
            ne,
        }
    }

    pub fn is_named_entity(&self) -> bool {
        self.ne.is_some()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        for (field, s) in [("surface", &self.surface), ("lemma", &self.lemma)] {
            if s.is_empty() {
                return Err(format!("token {field} is empty"));
            }
            if s.chars().any(char::is_whitespace) {
                return Err(format!("token {field} {s:?} contains whitespace"));
            }
            if s.chars().any(char::is_uppercase) {
                return Err(format!("token {field} {s:?} is not lowercase"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    pub doc_id: String,
    pub label: Option<Viewpoint>,
    pub tokens: Vec<AnnotatedToken>,
}

/// Read an annotated-corpus JSONL file.
pub fn load_annotated_corpus(path: impl AsRef<Path>) -> Result<Vec<RawDocument>> {
    let file = File::open(path)?;
    parse_annotated_corpus(BufReader::new(file))
}

/// Parse annotated-corpus JSONL from any reader. Blank lines are skipped.
pub fn parse_annotated_corpus<R: BufRead>(reader: R) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        for token in &doc.tokens {
            token.validate().map_err(|message| Error::Parse { line: line_no, message })?;
        }
        if !seen.insert(doc.doc_id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate doc_id {:?} on line {line_no}",
                doc.doc_id
            )));
        }
        docs.push(doc);
    }
    Ok(docs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartitionScheme {
    #[serde(rename = "opinion+ne")]
    OpinionNe,
    #[serde(rename = "opinion")]
    Opinion,
    #[serde(rename = "adj+ne")]
    AdjNe,
    #[serde(rename = "ne")]
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Topical,
    Opinion,
}

impl PartitionScheme {
    pub const ALL: [PartitionScheme; 4] = [
        PartitionScheme::OpinionNe,
        PartitionScheme::Opinion,
        PartitionScheme::AdjNe,
        PartitionScheme::Ne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartitionScheme::OpinionNe => "opinion+ne",
            PartitionScheme::Opinion => "opinion",
            PartitionScheme::AdjNe => "adj+ne",
            PartitionScheme::Ne => "ne",
        }
    }

    pub fn uses_named_entities(self) -> bool {
        !matches!(self, PartitionScheme::Opinion)
    }

    /// Modality of a single token occurrence; `None` means the token is dropped.
    ///
    /// Under schemes that include named entities the NE flag wins over the
    /// part of speech. `OTHER` tokens survive only as named entities.
    pub fn route(self, pos: Pos, is_named_entity: bool) -> Option<Modality> {
        use Modality::*;
        if is_named_entity && self.uses_named_entities() {
            return Some(Opinion);
        }
        match (self, pos) {
            (_, Pos::Other) => None,
            (_, Pos::Noun) => Some(Topical),
            (PartitionScheme::OpinionNe | PartitionScheme::Opinion, _) => Some(Opinion),
            (PartitionScheme::AdjNe, Pos::Adj) => Some(Opinion),
            (PartitionScheme::AdjNe | PartitionScheme::Ne, _) => Some(Topical),
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown partition scheme {s:?} (expected opinion+ne, opinion, adj+ne or ne)"
                ))
            })
    }
}

/// Bidirectional word/id table with ids in lexicographic word order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_sorted(words: Vec<String>) -> Self {
        debug_assert!(words.windows(2).all(|w| w[0] < w[1]));
        let ids = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Self { words, ids }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Identity and label of a document, shared by every corpus view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_id: String,
    pub label: Option<Viewpoint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimodalDocument {
    pub doc_id: String,
    pub label: Option<Viewpoint>,
    pub topical_ids: Vec<u32>,
    pub opinion_ids: Vec<u32>,
}

impl BimodalDocument {
    pub fn len(&self) -> usize {
        self.topical_ids.len() + self.opinion_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimodalCorpus {
    pub topical_vocab: Vocabulary,
    pub opinion_vocab: Vocabulary,
    pub docs: Vec<BimodalDocument>,
    /// Documents removed because nothing survived the partition.
    pub dropped_doc_ids: Vec<String>,
}

impl BimodalCorpus {
    /// Build directly from id sequences. Ids are checked against the vocabularies.
    pub fn from_parts(
        topical_vocab: Vocabulary,
        opinion_vocab: Vocabulary,
        docs: Vec<BimodalDocument>,
    ) -> Result<Self> {
        let (w, wo) = (topical_vocab.len() as u32, opinion_vocab.len() as u32);
        for doc in &docs {
            if doc.topical_ids.iter().any(|&id| id >= w) || doc.opinion_ids.iter().any(|&id| id >= wo) {
                return Err(Error::Validation(format!(
                    "document {:?} has ids outside its vocabulary",
                    doc.doc_id
                )));
            }
        }
        Ok(Self {
            topical_vocab,
            opinion_vocab,
            docs,
            dropped_doc_ids: Vec::new(),
        })
    }

    pub fn meta(&self) -> Vec<DocMeta> {
        self.docs
            .iter()
            .map(|d| DocMeta { doc_id: d.doc_id.clone(), label: d.label })
            .collect()
    }

    /// The topical modality on its own, as a single-modality corpus.
    pub fn topical_view(&self) -> UnimodalCorpus {
        UnimodalCorpus {
            vocab: self.topical_vocab.clone(),
            docs: self
                .docs
                .iter()
                .map(|d| UnimodalDocument {
                    doc_id: d.doc_id.clone(),
                    label: d.label,
                    ids: d.topical_ids.clone(),
                })
                .collect(),
            dropped_doc_ids: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnimodalDocument {
    pub doc_id: String,
    pub label: Option<Viewpoint>,
    pub ids: Vec<u32>,
}

/// Single-vocabulary corpus used by the LDA baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnimodalCorpus {
    pub vocab: Vocabulary,
    pub docs: Vec<UnimodalDocument>,
    pub dropped_doc_ids: Vec<String>,
}

impl UnimodalCorpus {
    pub fn from_parts(vocab: Vocabulary, docs: Vec<UnimodalDocument>) -> Result<Self> {
        let w = vocab.len() as u32;
        if let Some(doc) = docs.iter().find(|d| d.ids.iter().any(|&id| id >= w)) {
            return Err(Error::Validation(format!(
                "document {:?} has ids outside its vocabulary",
                doc.doc_id
            )));
        }
        Ok(Self { vocab, docs, dropped_doc_ids: Vec::new() })
    }

    pub fn meta(&self) -> Vec<DocMeta> {
        self.docs
            .iter()
            .map(|d| DocMeta { doc_id: d.doc_id.clone(), label: d.label })
            .collect()
    }
}

#[derive(Default)]
struct LemmaTally {
    topical: usize,
    opinion: usize,
}

impl LemmaTally {
    fn total(&self) -> usize {
        self.topical + self.opinion
    }

    // ties go to opinion
    fn winner(&self) -> Modality {
        if self.topical > self.opinion {
            Modality::Topical
        } else {
            Modality::Opinion
        }
    }
}

/// Split a raw corpus into topical and opinion modalities.
///
/// A lemma that routes to both modalities (inconsistent NE tagging) is placed
/// in its majority modality corpus-wide. Lemmas with fewer than `min_count`
/// routed occurrences are dropped, then documents left empty are dropped.
pub fn apply_partition(
    docs: &[RawDocument],
    scheme: PartitionScheme,
    min_count: usize,
) -> Result<BimodalCorpus> {
    if min_count < 1 {
        return Err(Error::Parameter("min_count must be at least 1".into()));
    }
    let mut tallies: BTreeMap<&str, LemmaTally> = BTreeMap::new();
    for token in docs.iter().flat_map(|d| &d.tokens) {
        if let Some(modality) = scheme.route(token.pos, token.is_named_entity()) {
            let tally = tallies.entry(token.lemma.as_str()).or_default();
            match modality {
                Modality::Topical => tally.topical += 1,
                Modality::Opinion => tally.opinion += 1,
            }
        }
    }

    let mut topical_words = Vec::new();
    let mut opinion_words = Vec::new();
    for (lemma, tally) in &tallies {
        if tally.total() < min_count {
            continue;
        }
        match tally.winner() {
            Modality::Topical => topical_words.push(lemma.to_string()),
            Modality::Opinion => opinion_words.push(lemma.to_string()),
        }
    }
    let topical_vocab = Vocabulary::from_sorted(topical_words);
    let opinion_vocab = Vocabulary::from_sorted(opinion_words);

    let mut out = Vec::with_capacity(docs.len());
    let mut dropped = Vec::new();
    for doc in docs {
        let mut topical_ids = Vec::new();
        let mut opinion_ids = Vec::new();
        for token in &doc.tokens {
            if scheme.route(token.pos, token.is_named_entity()).is_none() {
                continue;
            }
            if let Some(id) = topical_vocab.id(&token.lemma) {
                topical_ids.push(id);
            } else if let Some(id) = opinion_vocab.id(&token.lemma) {
                opinion_ids.push(id);
            }
        }
        if topical_ids.is_empty() && opinion_ids.is_empty() {
            log::warn!("dropping document {:?}: no tokens survive the {scheme} partition", doc.doc_id);
            dropped.push(doc.doc_id.clone());
            continue;
        }
        out.push(BimodalDocument {
            doc_id: doc.doc_id.clone(),
            label: doc.label,
            topical_ids,
            opinion_ids,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(BimodalCorpus {
        topical_vocab,
        opinion_vocab,
        docs: out,
        dropped_doc_ids: dropped,
    })
}

/// Single-vocabulary corpus over every token any scheme would keep: the four
/// content parts of speech plus named entities.
pub fn build_unimodal(docs: &[RawDocument], min_count: usize) -> Result<UnimodalCorpus> {
    if min_count < 1 {
        return Err(Error::Parameter("min_count must be at least 1".into()));
    }
    let keep = |t: &AnnotatedToken| t.pos != Pos::Other || t.is_named_entity();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for token in docs.iter().flat_map(|d| &d.tokens).filter(|t| keep(t)) {
        *counts.entry(token.lemma.as_str()).or_default() += 1;
    }
    let vocab = Vocabulary::from_sorted(
        counts
            .into_iter()
            .filter(|&(_, n)| n >= min_count)
            .map(|(w, _)| w.to_string())
            .collect(),
    );
    let mut out = Vec::with_capacity(docs.len());
    let mut dropped = Vec::new();
    for doc in docs {
        let ids: Vec<u32> = doc
            .tokens
            .iter()
            .filter(|t| keep(t))
            .filter_map(|t| vocab.id(&t.lemma))
            .collect();
        if ids.is_empty() {
            log::warn!("dropping document {:?}: no retained tokens", doc.doc_id);
            dropped.push(doc.doc_id.clone());
            continue;
        }
        out.push(UnimodalDocument { doc_id: doc.doc_id.clone(), label: doc.label, ids });
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(UnimodalCorpus { vocab, docs: out, dropped_doc_ids: dropped })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub topical_vocab: usize,
    pub opinion_vocab: usize,
    pub topical_tokens: usize,
    pub opinion_tokens: usize,
    pub palestinian: usize,
    pub israeli: usize,
    pub unlabeled: usize,
}

pub fn corpus_stats(corpus: &BimodalCorpus) -> CorpusStats {
    let mut stats = CorpusStats {
        documents: corpus.docs.len(),
        topical_vocab: corpus.topical_vocab.len(),
        opinion_vocab: corpus.opinion_vocab.len(),
        ..Default::default()
    };
    for doc in &corpus.docs {
        stats.topical_tokens += doc.topical_ids.len();
        stats.opinion_tokens += doc.opinion_ids.len();
        match doc.label {
            Some(Viewpoint::Palestinian) => stats.palestinian += 1,
            Some(Viewpoint::Israeli) => stats.israeli += 1,
            None => stats.unlabeled += 1,
        }
    }
    stats
}
