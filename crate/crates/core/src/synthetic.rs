//! Synthetic corpora drawn from the CorrLDA2 generative process with
//! planted topics, aspects and topic-aspect links.
//!
//! Topic `t` emits only its own block of topical words and aspect `a` only
//! its own block of opinion words. Topic `t` is linked to aspect
//! `t * aspects / topics`, which receives `psi_concentration` of its mass.
//! Documents are labeled by the aspect most of their opinion words were
//! drawn from; aspect 0 is Palestinian, aspect 1 Israeli.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::corpus::{BimodalCorpus, BimodalDocument, Viewpoint, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::{sample_index, ChainSeed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub docs: usize,
    pub topics: usize,
    pub aspects: usize,
    pub words_per_topic: usize,
    pub words_per_aspect: usize,
    pub topical_len: usize,
    /// Odd, so every document has a dominant aspect when `aspects == 2`.
    pub opinion_len: usize,
    pub alpha: f64,
    pub psi_concentration: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            docs: 200,
            topics: 6,
            aspects: 2,
            words_per_topic: 10,
            words_per_aspect: 10,
            topical_len: 40,
            opinion_len: 15,
            alpha: 0.1,
            psi_concentration: 0.9,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: BimodalCorpus,
    /// T×W planted topic-word distributions.
    pub phi: Vec<Vec<f64>>,
    /// T̃×W̃ planted aspect-word distributions.
    pub phi_tilde: Vec<Vec<f64>>,
    /// T×T̃ planted topic-aspect distributions.
    pub psi: Vec<Vec<f64>>,
    /// Planted aspect of each topic.
    pub topic_aspect: Vec<usize>,
}

fn block_rows(rows: usize, width: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|r| {
            let mut row = vec![0.0; rows * width];
            row[r * width..(r + 1) * width].fill(1.0 / width as f64);
            row
        })
        .collect()
}

fn names(prefix: &str, n: usize) -> Vocabulary {
    let digits = n.to_string().len();
    Vocabulary::from_sorted((0..n).map(|i| format!("{prefix}{i:0digits$}")).collect())
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if cfg.topics < 2 || cfg.aspects != 2 {
        return Err(Error::Parameter("synthetic corpora need >= 2 topics and exactly 2 aspects".into()));
    }
    if cfg.opinion_len.is_multiple_of(2) || cfg.topical_len == 0 || cfg.words_per_topic == 0 || cfg.words_per_aspect == 0 {
        return Err(Error::Parameter("opinion_len must be odd and all sizes positive".into()));
    }
    if !(cfg.psi_concentration > 0.0 && cfg.psi_concentration < 1.0) {
        return Err(Error::Parameter("psi_concentration must be in (0, 1)".into()));
    }
    let (t_n, a_n) = (cfg.topics, cfg.aspects);
    let phi = block_rows(t_n, cfg.words_per_topic);
    let phi_tilde = block_rows(a_n, cfg.words_per_aspect);
    let topic_aspect: Vec<usize> = (0..t_n).map(|t| t * a_n / t_n).collect();
    let rest = (1.0 - cfg.psi_concentration) / (a_n - 1) as f64;
    let psi: Vec<Vec<f64>> = topic_aspect
        .iter()
        .map(|&planted| (0..a_n).map(|a| if a == planted { cfg.psi_concentration } else { rest }).collect())
        .collect();

    let gamma = Gamma::new(cfg.alpha, 1.0).map_err(|e| Error::Parameter(format!("bad alpha: {e}")))?;
    let mut rng = ChainSeed::from(cfg.seed).rng();
    let mut docs = Vec::with_capacity(cfg.docs);
    let digits = cfg.docs.to_string().len();
    for d in 0..cfg.docs {
        // Dirichlet draw as normalized Gammas; the all-underflow case is redrawn
        let theta = loop {
            let g: Vec<f64> = (0..t_n).map(|_| gamma.sample(&mut rng)).collect();
            if g.iter().sum::<f64>() > 0.0 {
                break g;
            }
        };
        let mut z = Vec::with_capacity(cfg.topical_len);
        let mut topical_ids = Vec::with_capacity(cfg.topical_len);
        for _ in 0..cfg.topical_len {
            let t = sample_index(&mut rng, &theta, theta.iter().sum());
            z.push(t);
            topical_ids.push(sample_index(&mut rng, &phi[t], 1.0) as u32);
        }
        let mut aspect_counts = vec![0usize; a_n];
        let mut opinion_ids = Vec::with_capacity(cfg.opinion_len);
        for _ in 0..cfg.opinion_len {
            let x = z[rng.random_range(0..z.len())];
            let a = sample_index(&mut rng, &psi[x], 1.0);
            aspect_counts[a] += 1;
            opinion_ids.push(sample_index(&mut rng, &phi_tilde[a], 1.0) as u32);
        }
        let label = if aspect_counts[0] > aspect_counts[1] { Viewpoint::Palestinian } else { Viewpoint::Israeli };
        docs.push(BimodalDocument {
            doc_id: format!("syn{d:0digits$}"),
            label: Some(label),
            topical_ids,
            opinion_ids,
        });
    }
    let corpus = BimodalCorpus::from_parts(
        names("t", t_n * cfg.words_per_topic),
        names("o", a_n * cfg.words_per_aspect),
        docs,
    )?;
    Ok(SyntheticCorpus { corpus, phi, phi_tilde, psi, topic_aspect })
}
