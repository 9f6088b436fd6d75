//! Per-document topic and aspect fractions used as SVM features.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{DocMeta, Viewpoint};
use crate::corrlda2::{Cooccurrence, CorrLda2State};
use crate::error::{Error, Result};
use crate::lda::LdaState;

/// Anything that can report per-document assignment fractions.
pub trait FractionSource {
    fn num_docs(&self) -> usize;
    fn num_topics(&self) -> usize;
    /// Zero for models without aspects.
    fn num_aspects(&self) -> usize;
    /// Fraction of the document's (topical) words per topic; `None` when the
    /// document has no topical words.
    fn topic_fractions(&self, d: usize) -> Option<Vec<f64>>;
    /// Fraction of the document's included opinion words per aspect; `None`
    /// when there are none.
    fn aspect_fractions(&self, d: usize) -> Option<Vec<f64>>;
    /// T̃×T aspect-topic co-assignment counts, for models that have them.
    fn cooccurrence_counts(&self) -> Option<Vec<Vec<f64>>> {
        None
    }
}

fn fractions(counts: &[u32]) -> Option<Vec<f64>> {
    let n: u32 = counts.iter().sum();
    (n > 0).then(|| counts.iter().map(|&c| c as f64 / n as f64).collect())
}

impl FractionSource for LdaState {
    fn num_docs(&self) -> usize {
        LdaState::num_docs(self)
    }

    fn num_topics(&self) -> usize {
        self.topics()
    }

    fn num_aspects(&self) -> usize {
        0
    }

    fn topic_fractions(&self, d: usize) -> Option<Vec<f64>> {
        fractions(self.doc_topic_counts(d))
    }

    fn aspect_fractions(&self, _d: usize) -> Option<Vec<f64>> {
        None
    }
}

impl FractionSource for CorrLda2State {
    fn num_docs(&self) -> usize {
        CorrLda2State::num_docs(self)
    }

    fn num_topics(&self) -> usize {
        self.topics()
    }

    fn num_aspects(&self) -> usize {
        self.aspects()
    }

    fn topic_fractions(&self, d: usize) -> Option<Vec<f64>> {
        fractions(self.doc_topic_counts(d))
    }

    fn aspect_fractions(&self, d: usize) -> Option<Vec<f64>> {
        fractions(&self.doc_aspect_counts(d))
    }

    fn cooccurrence_counts(&self) -> Option<Vec<Vec<f64>>> {
        Some(
            self.aspect_topic_counts()
                .into_iter()
                .map(|r| r.into_iter().map(f64::from).collect())
                .collect(),
        )
    }
}

/// Running sums of fractions (and co-assignment counts) over the last few
/// sweeps of a chain. Reads back as their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailAverages {
    pub samples: usize,
    pub topics: usize,
    pub aspects: usize,
    pub topic_sums: Vec<Option<Vec<f64>>>,
    pub aspect_sums: Vec<Option<Vec<f64>>>,
    pub cooccurrence_sums: Option<Vec<Vec<f64>>>,
}

impl TailAverages {
    pub fn new<S: FractionSource>(source: &S) -> Self {
        let n = source.num_docs();
        Self {
            samples: 0,
            topics: source.num_topics(),
            aspects: source.num_aspects(),
            topic_sums: vec![None; n],
            aspect_sums: vec![None; n],
            cooccurrence_sums: None,
        }
    }

    pub fn record<S: FractionSource>(&mut self, source: &S) {
        fn add(acc: &mut Option<Vec<f64>>, v: Option<Vec<f64>>) {
            if let Some(v) = v {
                match acc {
                    Some(a) => a.iter_mut().zip(v).for_each(|(x, y)| *x += y),
                    None => *acc = Some(v),
                }
            }
        }
        for d in 0..self.topic_sums.len() {
            add(&mut self.topic_sums[d], source.topic_fractions(d));
            add(&mut self.aspect_sums[d], source.aspect_fractions(d));
        }
        if let Some(counts) = source.cooccurrence_counts() {
            match &mut self.cooccurrence_sums {
                Some(acc) => {
                    for (ra, rc) in acc.iter_mut().zip(counts) {
                        ra.iter_mut().zip(rc).for_each(|(x, y)| *x += y);
                    }
                }
                None => self.cooccurrence_sums = Some(counts),
            }
        }
        self.samples += 1;
    }

    fn mean(&self, sums: &Option<Vec<f64>>) -> Option<Vec<f64>> {
        let s = self.samples as f64;
        sums.as_ref().map(|v| v.iter().map(|x| x / s).collect())
    }

    /// Averaged co-occurrence frequencies, if the source model has aspects.
    pub fn cooccurrence(&self) -> Option<Cooccurrence> {
        self.cooccurrence_sums.as_ref().map(|c| Cooccurrence::from_counts(c))
    }
}

impl FractionSource for TailAverages {
    fn num_docs(&self) -> usize {
        self.topic_sums.len()
    }

    fn num_topics(&self) -> usize {
        self.topics
    }

    fn num_aspects(&self) -> usize {
        self.aspects
    }

    fn topic_fractions(&self, d: usize) -> Option<Vec<f64>> {
        self.mean(&self.topic_sums[d])
    }

    fn aspect_fractions(&self, d: usize) -> Option<Vec<f64>> {
        self.mean(&self.aspect_sums[d])
    }

    fn cooccurrence_counts(&self) -> Option<Vec<Vec<f64>>> {
        let s = self.samples as f64;
        self.cooccurrence_sums
            .as_ref()
            .map(|c| c.iter().map(|r| r.iter().map(|x| x / s).collect()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    Topics,
    Aspects,
    Combined,
}

impl std::str::FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topics" => Ok(FeatureMode::Topics),
            "aspects" => Ok(FeatureMode::Aspects),
            "combined" => Ok(FeatureMode::Combined),
            _ => Err(Error::Parameter(format!("unknown feature mode {s:?}"))),
        }
    }
}

impl std::fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FeatureMode::Topics => "topics",
            FeatureMode::Aspects => "aspects",
            FeatureMode::Combined => "combined",
        })
    }
}

/// Labeled document vectors. Rows, labels and ids are aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub mode: FeatureMode,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Viewpoint>,
    pub doc_ids: Vec<String>,
    /// Rows whose aspect block is all zero because the document had no
    /// included opinion words.
    pub missing_aspects: Vec<bool>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    /// Header `doc_id,label,f_0,...`; labels written as -1/+1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["doc_id".to_string(), "label".to_string()];
        header.extend((0..self.width()).map(|j| format!("f_{j}")));
        w.write_record(&header)?;
        for ((row, label), id) in self.rows.iter().zip(&self.labels).zip(&self.doc_ids) {
            let mut rec = vec![id.clone(), format!("{:+}", label.sign() as i32)];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Build document vectors from a chain state (or tail averages).
///
/// Eligible documents are labeled and have at least one topical word.
/// Unlabeled documents are skipped.
pub fn build_feature_matrix<S: FractionSource>(
    source: &S,
    meta: &[DocMeta],
    mode: FeatureMode,
) -> Result<FeatureMatrix> {
    if source.num_docs() != meta.len() {
        return Err(Error::Dimension { expected: source.num_docs(), got: meta.len() });
    }
    let (topics, aspects) = (source.num_topics(), source.num_aspects());
    if mode != FeatureMode::Topics && aspects == 0 {
        return Err(Error::Parameter(format!("{mode} features need a model with aspects")));
    }
    let mut names = Vec::new();
    if mode != FeatureMode::Aspects {
        names.extend((0..topics).map(|t| format!("topic_{t}")));
    }
    if mode != FeatureMode::Topics {
        names.extend((0..aspects).map(|a| format!("aspect_{a}")));
    }
    let mut m = FeatureMatrix {
        mode,
        feature_names: names,
        rows: Vec::new(),
        labels: Vec::new(),
        doc_ids: Vec::new(),
        missing_aspects: Vec::new(),
    };
    let mut unlabeled = 0;
    for (d, info) in meta.iter().enumerate() {
        let Some(label) = info.label else {
            unlabeled += 1;
            continue;
        };
        let Some(topic_block) = source.topic_fractions(d) else {
            continue;
        };
        let aspect_block = source.aspect_fractions(d);
        let missing = aspect_block.is_none();
        let mut row = Vec::with_capacity(m.feature_names.len());
        if mode != FeatureMode::Aspects {
            row.extend(topic_block);
        }
        if mode != FeatureMode::Topics {
            row.extend(aspect_block.unwrap_or_else(|| vec![0.0; aspects]));
        }
        m.rows.push(row);
        m.labels.push(label);
        m.doc_ids.push(info.doc_id.clone());
        m.missing_aspects.push(missing);
    }
    if unlabeled > 0 {
        log::info!("{unlabeled} unlabeled documents left out of the feature matrix");
    }
    if m.rows.is_empty() {
        return Err(Error::Validation("no labeled documents with topical words".into()));
    }
    Ok(m)
}
