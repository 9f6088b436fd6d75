//! Collapsed Gibbs sampler for CorrLDA2 over a bimodal corpus.
//!
//! Topical words carry a topic `z`. Each opinion word carries a supertopic
//! `x`, restricted to topics present among its document's topical words, and
//! an aspect drawn from that supertopic's aspect distribution. The pair
//! `(x, aspect)` is resampled jointly from a single flattened T×T̃ table.
//!
//! Count tables:
//! - `doc_topic` (D×T): topical words of `d` assigned topic `t`
//! - `word_topic` (W×T): topical word `w` assigned topic `t`
//! - `aspect_topic` (T̃×T): opinion words with aspect `a` and supertopic `t`
//! - `word_aspect` (W̃×T̃): opinion word `w̃` assigned aspect `a`

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::BimodalCorpus;
use crate::error::{Error, Result};
use crate::lda::topic_weights;
use crate::math::{log_dirichlet_multinomial, normalize};
use crate::params::Hyperparams;
use crate::rng::{sample_index, ChainRng, ChainSeed};

/// How topical-word topics are resampled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicalUpdate {
    /// LDA conditional times the likelihood of the document's supertopics,
    /// Π_s C_TD[s,d]^{m_ds}. This is the exact full conditional of the joint
    /// model, so the chain targets the true posterior.
    #[default]
    Coupled,
    /// LDA conditional alone; opinion words do not influence topical topics.
    Uncoupled,
}

/// Unnormalized joint weights over (supertopic, aspect) for one opinion word.
///
/// `aspect_topic` is T̃×T row-major by aspect, `word_aspect` is the row of the
/// word being resampled. All opinion-side counts must exclude that word;
/// `doc_topic` is the current topical row (opinion words never contribute to
/// it). `out` is T×T̃ row-major by supertopic. Returns the sum of `out`.
#[allow(clippy::too_many_arguments)]
pub fn joint_weights(
    doc_topic: &[u32],
    topical_len: u32,
    aspect_topic: &[u32],
    supertopic_totals: &[u32],
    word_aspect: &[u32],
    aspect_totals: &[u32],
    opinion_vocab: usize,
    gamma: f64,
    beta_tilde: f64,
    out: &mut [f64],
) -> f64 {
    let topics = doc_topic.len();
    let aspects = word_aspect.len();
    let n = topical_len as f64;
    let a_gamma = aspects as f64 * gamma;
    let w_beta = opinion_vocab as f64 * beta_tilde;
    let mut total = 0.0;
    for t in 0..topics {
        let row = &mut out[t * aspects..(t + 1) * aspects];
        if doc_topic[t] == 0 {
            row.fill(0.0);
            continue;
        }
        let support = doc_topic[t] as f64 / n;
        let psi_denom = supertopic_totals[t] as f64 + a_gamma;
        for a in 0..aspects {
            let p = support * (aspect_topic[a * topics + t] as f64 + gamma) / psi_denom
                * (word_aspect[a] as f64 + beta_tilde)
                / (aspect_totals[a] as f64 + w_beta);
            row[a] = p;
            total += p;
        }
    }
    total
}

/// Normalized joint conditional table, indexed `(supertopic, aspect)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub topics: usize,
    pub aspects: usize,
    pub probs: Vec<f64>,
}

impl JointTable {
    pub fn get(&self, topic: usize, aspect: usize) -> f64 {
        self.probs[topic * self.aspects + aspect]
    }

    /// Marginal over aspects for each supertopic.
    pub fn supertopic_marginal(&self) -> Vec<f64> {
        self.probs.chunks(self.aspects).map(|r| r.iter().sum()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CorrLda2State {
    topics: usize,
    aspects: usize,
    topical_vocab: usize,
    opinion_vocab: usize,
    hyper: Hyperparams,
    update: TopicalUpdate,
    topical: Vec<Vec<u32>>,
    opinion: Vec<Vec<u32>>,
    /// Documents whose opinion words are left out because they have no topical words.
    excluded: Vec<bool>,
    z: Vec<Vec<u32>>,
    x: Vec<Vec<u32>>,
    y: Vec<Vec<u32>>,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_totals: Vec<u32>,
    doc_super: Vec<u32>,
    aspect_topic: Vec<u32>,
    super_totals: Vec<u32>,
    word_aspect: Vec<u32>,
    aspect_totals: Vec<u32>,
    seed: ChainSeed,
    rng: ChainRng,
    sweeps: usize,
}

/// Stored latent assignments of a CorrLDA2 chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrLda2Assignments {
    pub topics: Vec<Vec<u32>>,
    pub supertopics: Vec<Vec<u32>>,
    pub aspects: Vec<Vec<u32>>,
}

impl CorrLda2State {
    /// Random initialization. Supertopics are drawn uniformly from the
    /// document's topical-word assignments, aspects uniformly.
    pub fn init(
        corpus: &BimodalCorpus,
        topics: usize,
        aspects: usize,
        hyper: Hyperparams,
        seed: impl Into<ChainSeed>,
    ) -> Result<Self> {
        check_setup(corpus, topics, aspects, hyper)?;
        let seed = seed.into();
        let mut rng = seed.rng();
        let mut z = Vec::with_capacity(corpus.docs.len());
        let mut x = Vec::with_capacity(corpus.docs.len());
        let mut y = Vec::with_capacity(corpus.docs.len());
        for doc in &corpus.docs {
            let zd: Vec<u32> = doc
                .topical_ids
                .iter()
                .map(|_| rng.random_range(0..topics as u32))
                .collect();
            let (xd, yd) = if zd.is_empty() {
                (Vec::new(), Vec::new())
            } else {
                doc.opinion_ids
                    .iter()
                    .map(|_| {
                        let pick = rng.random_range(0..zd.len());
                        (zd[pick], rng.random_range(0..aspects as u32))
                    })
                    .unzip()
            };
            z.push(zd);
            x.push(xd);
            y.push(yd);
        }
        let state = Self::assemble(
            corpus,
            topics,
            aspects,
            hyper,
            CorrLda2Assignments { topics: z, supertopics: x, aspects: y },
            seed,
            rng,
            0,
        );
        for (doc, &excluded) in corpus.docs.iter().zip(&state.excluded) {
            if excluded {
                log::warn!(
                    "document {:?}: {} opinion words excluded, no topical words to draw a supertopic from",
                    doc.doc_id,
                    doc.opinion_ids.len()
                );
            }
        }
        Ok(state)
    }

    /// Rebuild a state from stored assignments; counts are recomputed and checked.
    #[allow(clippy::too_many_arguments)]
    pub fn from_assignments(
        corpus: &BimodalCorpus,
        topics: usize,
        aspects: usize,
        hyper: Hyperparams,
        assignments: CorrLda2Assignments,
        seed: ChainSeed,
        rng_word_pos: u128,
        sweeps: usize,
    ) -> Result<Self> {
        check_setup(corpus, topics, aspects, hyper)?;
        let d = corpus.docs.len();
        if assignments.topics.len() != d || assignments.supertopics.len() != d || assignments.aspects.len() != d {
            return Err(Error::Checkpoint("assignment rows do not match document count".into()));
        }
        for (i, doc) in corpus.docs.iter().enumerate() {
            let zd = &assignments.topics[i];
            let expected_opinion = if doc.topical_ids.is_empty() { 0 } else { doc.opinion_ids.len() };
            if zd.len() != doc.topical_ids.len()
                || assignments.supertopics[i].len() != expected_opinion
                || assignments.aspects[i].len() != expected_opinion
            {
                return Err(Error::Checkpoint(format!("document {i}: assignment length mismatch")));
            }
            if zd.iter().chain(&assignments.supertopics[i]).any(|&t| t as usize >= topics)
                || assignments.aspects[i].iter().any(|&a| a as usize >= aspects)
            {
                return Err(Error::Checkpoint(format!("document {i}: assignment out of range")));
            }
        }
        let state = Self::assemble(
            corpus,
            topics,
            aspects,
            hyper,
            assignments,
            seed,
            seed.rng_at(rng_word_pos),
            sweeps,
        );
        state.check_invariants()?;
        Ok(state)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        corpus: &BimodalCorpus,
        topics: usize,
        aspects: usize,
        hyper: Hyperparams,
        assignments: CorrLda2Assignments,
        seed: ChainSeed,
        rng: ChainRng,
        sweeps: usize,
    ) -> Self {
        let n_docs = corpus.docs.len();
        let topical_vocab = corpus.topical_vocab.len();
        let opinion_vocab = corpus.opinion_vocab.len();
        let topical: Vec<Vec<u32>> = corpus.docs.iter().map(|d| d.topical_ids.clone()).collect();
        let excluded: Vec<bool> = corpus
            .docs
            .iter()
            .map(|d| d.topical_ids.is_empty() && !d.opinion_ids.is_empty())
            .collect();
        let opinion: Vec<Vec<u32>> = corpus
            .docs
            .iter()
            .zip(&excluded)
            .map(|(d, &ex)| if ex { Vec::new() } else { d.opinion_ids.clone() })
            .collect();
        let mut s = Self {
            topics,
            aspects,
            topical_vocab,
            opinion_vocab,
            hyper,
            update: TopicalUpdate::default(),
            topical,
            opinion,
            excluded,
            z: assignments.topics,
            x: assignments.supertopics,
            y: assignments.aspects,
            doc_topic: vec![0; n_docs * topics],
            word_topic: vec![0; topical_vocab * topics],
            topic_totals: vec![0; topics],
            doc_super: vec![0; n_docs * topics],
            aspect_topic: vec![0; aspects * topics],
            super_totals: vec![0; topics],
            word_aspect: vec![0; opinion_vocab * aspects],
            aspect_totals: vec![0; aspects],
            seed,
            rng,
            sweeps,
        };
        for d in 0..n_docs {
            for i in 0..s.topical[d].len() {
                let (w, t) = (s.topical[d][i] as usize, s.z[d][i] as usize);
                s.add_topical(d, w, t);
            }
            for i in 0..s.opinion[d].len() {
                let (w, t, a) = (s.opinion[d][i] as usize, s.x[d][i] as usize, s.y[d][i] as usize);
                s.add_opinion(d, w, t, a);
            }
        }
        s
    }

    pub fn with_topical_update(mut self, update: TopicalUpdate) -> Self {
        self.update = update;
        self
    }

    #[inline]
    fn add_topical(&mut self, d: usize, w: usize, t: usize) {
        self.doc_topic[d * self.topics + t] += 1;
        self.word_topic[w * self.topics + t] += 1;
        self.topic_totals[t] += 1;
    }

    #[inline]
    fn remove_topical(&mut self, d: usize, w: usize, t: usize) {
        self.doc_topic[d * self.topics + t] -= 1;
        self.word_topic[w * self.topics + t] -= 1;
        self.topic_totals[t] -= 1;
    }

    #[inline]
    fn add_opinion(&mut self, d: usize, w: usize, t: usize, a: usize) {
        self.doc_super[d * self.topics + t] += 1;
        self.aspect_topic[a * self.topics + t] += 1;
        self.super_totals[t] += 1;
        self.word_aspect[w * self.aspects + a] += 1;
        self.aspect_totals[a] += 1;
    }

    #[inline]
    fn remove_opinion(&mut self, d: usize, w: usize, t: usize, a: usize) {
        self.doc_super[d * self.topics + t] -= 1;
        self.aspect_topic[a * self.topics + t] -= 1;
        self.super_totals[t] -= 1;
        self.word_aspect[w * self.aspects + a] -= 1;
        self.aspect_totals[a] -= 1;
    }

    /// Resample every topical word once.
    pub fn sweep_topical(&mut self) {
        let k = self.topics;
        let mut weights = vec![0.0; k];
        for d in 0..self.topical.len() {
            let n = self.topical[d].len() as u32;
            for i in 0..self.topical[d].len() {
                let w = self.topical[d][i] as usize;
                let t_old = self.z[d][i] as usize;
                self.remove_topical(d, w, t_old);
                let t_new = match self.topical_weights(d, w, n - 1, &mut weights) {
                    TopicDraw::Forced(t) => t,
                    TopicDraw::Weighted(total) => sample_index(&mut self.rng, &weights, total),
                };
                self.z[d][i] = t_new as u32;
                self.add_topical(d, w, t_new);
            }
        }
    }

    fn topical_weights(&self, d: usize, w: usize, doc_len: u32, out: &mut [f64]) -> TopicDraw {
        let k = self.topics;
        let doc_topic = &self.doc_topic[d * k..(d + 1) * k];
        let total = topic_weights(
            doc_topic,
            &self.word_topic[w * k..(w + 1) * k],
            &self.topic_totals,
            doc_len,
            self.topical_vocab,
            self.hyper.alpha,
            self.hyper.beta,
            out,
        );
        if self.update == TopicalUpdate::Uncoupled {
            return TopicDraw::Weighted(total);
        }
        let supers = &self.doc_super[d * k..(d + 1) * k];
        if supers.iter().all(|&m| m == 0) {
            return TopicDraw::Weighted(total);
        }
        // A supertopic whose last topical word was just removed pins this word.
        if let Some(s) = (0..k).find(|&s| supers[s] > 0 && doc_topic[s] == 0) {
            return TopicDraw::Forced(s);
        }
        // Relative factor ((n+1)/n)^m, in log space since m can be large.
        let mut max = f64::NEG_INFINITY;
        for t in 0..k {
            let m = supers[t];
            let lw = if m > 0 {
                let n = doc_topic[t] as f64;
                out[t].ln() + m as f64 * ((n + 1.0) / n).ln()
            } else {
                out[t].ln()
            };
            out[t] = lw;
            max = max.max(lw);
        }
        let mut total = 0.0;
        for v in out.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        TopicDraw::Weighted(total)
    }

    /// Jointly resample every included opinion word's (supertopic, aspect).
    pub fn sweep_opinion(&mut self) {
        let (k, a_n) = (self.topics, self.aspects);
        let mut weights = vec![0.0; k * a_n];
        for d in 0..self.opinion.len() {
            let n = self.topical[d].len() as u32;
            for i in 0..self.opinion[d].len() {
                let w = self.opinion[d][i] as usize;
                let (t_old, a_old) = (self.x[d][i] as usize, self.y[d][i] as usize);
                self.remove_opinion(d, w, t_old, a_old);
                let total = joint_weights(
                    &self.doc_topic[d * k..(d + 1) * k],
                    n,
                    &self.aspect_topic,
                    &self.super_totals,
                    &self.word_aspect[w * a_n..(w + 1) * a_n],
                    &self.aspect_totals,
                    self.opinion_vocab,
                    self.hyper.gamma,
                    self.hyper.beta_tilde,
                    &mut weights,
                );
                let flat = sample_index(&mut self.rng, &weights, total);
                let (t_new, a_new) = (flat / a_n, flat % a_n);
                self.x[d][i] = t_new as u32;
                self.y[d][i] = a_new as u32;
                self.add_opinion(d, w, t_new, a_new);
            }
        }
    }

    /// Topical sweep followed by opinion sweep.
    pub fn full_sweep(&mut self) {
        self.sweep_topical();
        self.sweep_opinion();
        self.sweeps += 1;
    }

    /// Normalized joint conditional of opinion word `i` in document `d`.
    pub fn joint_conditional(&self, d: usize, i: usize) -> Result<JointTable> {
        if self.topical[d].is_empty() {
            return Err(Error::UndefinedSupertopic { doc: d });
        }
        let (k, a_n) = (self.topics, self.aspects);
        let w = self.opinion[d][i] as usize;
        let (t_cur, a_cur) = (self.x[d][i] as usize, self.y[d][i] as usize);
        let mut aspect_topic = self.aspect_topic.clone();
        aspect_topic[a_cur * k + t_cur] -= 1;
        let mut super_totals = self.super_totals.clone();
        super_totals[t_cur] -= 1;
        let mut word_aspect = self.word_aspect[w * a_n..(w + 1) * a_n].to_vec();
        word_aspect[a_cur] -= 1;
        let mut aspect_totals = self.aspect_totals.clone();
        aspect_totals[a_cur] -= 1;
        let mut probs = vec![0.0; k * a_n];
        joint_weights(
            &self.doc_topic[d * k..(d + 1) * k],
            self.topical[d].len() as u32,
            &aspect_topic,
            &super_totals,
            &word_aspect,
            &aspect_totals,
            self.opinion_vocab,
            self.hyper.gamma,
            self.hyper.beta_tilde,
            &mut probs,
        );
        normalize(&mut probs);
        Ok(JointTable { topics: k, aspects: a_n, probs })
    }

    /// Normalized full conditional of topical word `i` in document `d`
    /// under the configured topical update.
    pub fn topical_conditional(&self, d: usize, i: usize) -> Vec<f64> {
        let mut s = self.clone();
        let w = s.topical[d][i] as usize;
        let t = s.z[d][i] as usize;
        s.remove_topical(d, w, t);
        let mut out = vec![0.0; self.topics];
        let n = s.topical[d].len() as u32 - 1;
        match s.topical_weights(d, w, n, &mut out) {
            TopicDraw::Forced(f) => {
                out.fill(0.0);
                out[f] = 1.0;
            }
            TopicDraw::Weighted(_) => normalize(&mut out),
        }
        out
    }

    /// Posterior-mean topic proportions over topical words, D×T. Documents
    /// without topical words get the uniform prior mean.
    pub fn estimate_theta(&self) -> Vec<Vec<f64>> {
        let alpha = self.hyper.alpha;
        (0..self.topical.len())
            .map(|d| {
                let denom = self.topical[d].len() as f64 + self.topics as f64 * alpha;
                self.doc_topic_counts(d).iter().map(|&c| (c as f64 + alpha) / denom).collect()
            })
            .collect()
    }

    /// T×W topic-word distributions.
    pub fn estimate_phi(&self) -> Vec<Vec<f64>> {
        let (k, beta) = (self.topics, self.hyper.beta);
        let wb = self.topical_vocab as f64 * beta;
        (0..k)
            .map(|t| {
                let denom = self.topic_totals[t] as f64 + wb;
                (0..self.topical_vocab)
                    .map(|w| (self.word_topic[w * k + t] as f64 + beta) / denom)
                    .collect()
            })
            .collect()
    }

    /// T×T̃ aspect distribution of each topic.
    pub fn estimate_psi(&self) -> Vec<Vec<f64>> {
        let (k, gamma) = (self.topics, self.hyper.gamma);
        let ag = self.aspects as f64 * gamma;
        (0..k)
            .map(|t| {
                let denom = self.super_totals[t] as f64 + ag;
                (0..self.aspects)
                    .map(|a| (self.aspect_topic[a * k + t] as f64 + gamma) / denom)
                    .collect()
            })
            .collect()
    }

    /// T̃×W̃ aspect-opinion word distributions.
    pub fn estimate_phi_tilde(&self) -> Vec<Vec<f64>> {
        let (a_n, bt) = (self.aspects, self.hyper.beta_tilde);
        let wb = self.opinion_vocab as f64 * bt;
        (0..a_n)
            .map(|a| {
                let denom = self.aspect_totals[a] as f64 + wb;
                (0..self.opinion_vocab)
                    .map(|w| (self.word_aspect[w * a_n + a] as f64 + bt) / denom)
                    .collect()
            })
            .collect()
    }

    /// log p(w, w̃, z, x, z̃) with θ, φ, ψ and φ̃ integrated out.
    ///
    /// Returns negative infinity if some supertopic lies outside its
    /// document's topical assignments.
    pub fn log_likelihood(&self) -> f64 {
        let (k, a_n) = (self.topics, self.aspects);
        let h = self.hyper;
        let mut ll = 0.0;
        for d in 0..self.topical.len() {
            ll += log_dirichlet_multinomial(self.doc_topic_counts(d).iter().copied(), k, h.alpha);
            let n = self.topical[d].len() as f64;
            for t in 0..k {
                let m = self.doc_super[d * k + t];
                if m > 0 {
                    ll += m as f64 * (self.doc_topic[d * k + t] as f64 / n).ln();
                }
            }
        }
        for t in 0..k {
            ll += log_dirichlet_multinomial(
                (0..self.topical_vocab).map(|w| self.word_topic[w * k + t]),
                self.topical_vocab,
                h.beta,
            );
            ll += log_dirichlet_multinomial((0..a_n).map(|a| self.aspect_topic[a * k + t]), a_n, h.gamma);
        }
        for a in 0..a_n {
            ll += log_dirichlet_multinomial(
                (0..self.opinion_vocab).map(|w| self.word_aspect[w * a_n + a]),
                self.opinion_vocab,
                h.beta_tilde,
            );
        }
        ll
    }

    /// Recompute every count table from the assignments and compare.
    pub fn check_invariants(&self) -> Result<()> {
        let (k, a_n) = (self.topics, self.aspects);
        let n_docs = self.topical.len();
        let mut doc_topic = vec![0u32; n_docs * k];
        let mut word_topic = vec![0u32; self.topical_vocab * k];
        let mut doc_super = vec![0u32; n_docs * k];
        let mut aspect_topic = vec![0u32; a_n * k];
        let mut word_aspect = vec![0u32; self.opinion_vocab * a_n];
        let mut opinion_words = 0u32;
        for d in 0..n_docs {
            if self.z[d].len() != self.topical[d].len()
                || self.x[d].len() != self.opinion[d].len()
                || self.y[d].len() != self.opinion[d].len()
            {
                return Err(Error::Model(format!("document {d}: assignment length mismatch")));
            }
            for (&w, &t) in self.topical[d].iter().zip(&self.z[d]) {
                if t as usize >= k {
                    return Err(Error::Model(format!("document {d}: topic {t} out of range")));
                }
                doc_topic[d * k + t as usize] += 1;
                word_topic[w as usize * k + t as usize] += 1;
            }
            for ((&w, &t), &a) in self.opinion[d].iter().zip(&self.x[d]).zip(&self.y[d]) {
                if t as usize >= k || a as usize >= a_n {
                    return Err(Error::Model(format!("document {d}: opinion assignment out of range")));
                }
                doc_super[d * k + t as usize] += 1;
                aspect_topic[a as usize * k + t as usize] += 1;
                word_aspect[w as usize * a_n + a as usize] += 1;
                opinion_words += 1;
            }
            let n_wd: u32 = self.doc_topic_counts(d).iter().sum();
            if n_wd as usize != self.topical[d].len() {
                return Err(Error::Model(format!("document {d}: topic counts sum to {n_wd}, not N_wd")));
            }
        }
        let topic_totals: Vec<u32> = (0..k).map(|t| (0..self.topical_vocab).map(|w| word_topic[w * k + t]).sum()).collect();
        let super_totals: Vec<u32> = (0..k).map(|t| (0..a_n).map(|a| aspect_topic[a * k + t]).sum()).collect();
        let aspect_totals: Vec<u32> = (0..a_n).map(|a| (0..self.opinion_vocab).map(|w| word_aspect[w * a_n + a]).sum()).collect();
        if doc_topic != self.doc_topic
            || word_topic != self.word_topic
            || topic_totals != self.topic_totals
            || doc_super != self.doc_super
            || aspect_topic != self.aspect_topic
            || word_aspect != self.word_aspect
            || super_totals != self.super_totals
            || aspect_totals != self.aspect_totals
        {
            return Err(Error::Model("count tables disagree with assignments".into()));
        }
        for t in 0..k {
            let by_doc: u32 = (0..n_docs).map(|d| doc_topic[d * k + t]).sum();
            if by_doc != topic_totals[t] {
                return Err(Error::Model(format!("topic {t}: word and document totals differ")));
            }
        }
        if self.aspect_topic.iter().sum::<u32>() != opinion_words {
            return Err(Error::Model("aspect-topic table does not cover every opinion word".into()));
        }
        for a in 0..a_n {
            let row: u32 = (0..k).map(|t| aspect_topic[a * k + t]).sum();
            if row != aspect_totals[a] {
                return Err(Error::Model(format!("aspect {a}: word and topic totals differ")));
            }
        }
        Ok(())
    }

    /// Every included opinion word's supertopic is among its document's topics.
    pub fn check_supertopic_support(&self) -> Result<()> {
        let k = self.topics;
        for d in 0..self.x.len() {
            for &t in &self.x[d] {
                if self.doc_topic[d * k + t as usize] == 0 {
                    return Err(Error::Model(format!(
                        "document {d}: supertopic {t} absent from its topical words"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn aspects(&self) -> usize {
        self.aspects
    }

    pub fn topical_vocab_size(&self) -> usize {
        self.topical_vocab
    }

    pub fn opinion_vocab_size(&self) -> usize {
        self.opinion_vocab
    }

    pub fn num_docs(&self) -> usize {
        self.topical.len()
    }

    pub fn hyper(&self) -> Hyperparams {
        self.hyper
    }

    pub fn topical_update(&self) -> TopicalUpdate {
        self.update
    }

    pub fn topic_assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    pub fn supertopic_assignments(&self) -> &[Vec<u32>] {
        &self.x
    }

    pub fn aspect_assignments(&self) -> &[Vec<u32>] {
        &self.y
    }

    pub fn assignments(&self) -> CorrLda2Assignments {
        CorrLda2Assignments {
            topics: self.z.clone(),
            supertopics: self.x.clone(),
            aspects: self.y.clone(),
        }
    }

    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.topics..(d + 1) * self.topics]
    }

    /// Aspect counts of document `d`'s included opinion words.
    pub fn doc_aspect_counts(&self, d: usize) -> Vec<u32> {
        let mut counts = vec![0; self.aspects];
        for &a in &self.y[d] {
            counts[a as usize] += 1;
        }
        counts
    }

    /// The T̃×T aspect-topic co-assignment table, rows by aspect.
    pub fn aspect_topic_counts(&self) -> Vec<Vec<u32>> {
        self.aspect_topic.chunks(self.topics).map(<[u32]>::to_vec).collect()
    }

    pub fn topical_len(&self, d: usize) -> usize {
        self.topical[d].len()
    }

    pub fn included_opinion_len(&self, d: usize) -> usize {
        self.opinion[d].len()
    }

    /// Indices of documents whose opinion words are excluded from sampling.
    pub fn excluded_docs(&self) -> Vec<usize> {
        self.excluded.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect()
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn seed(&self) -> ChainSeed {
        self.seed
    }

    pub fn rng_word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }
}

enum TopicDraw {
    Forced(usize),
    Weighted(f64),
}

fn check_setup(corpus: &BimodalCorpus, topics: usize, aspects: usize, hyper: Hyperparams) -> Result<()> {
    if topics < 1 || aspects < 1 {
        return Err(Error::Parameter("numbers of topics and aspects must be at least 1".into()));
    }
    hyper.validate()?;
    if corpus.docs.iter().all(|d| d.topical_ids.is_empty()) {
        return Err(Error::Model("corpus has no topical words".into()));
    }
    Ok(())
}

/// Column-normalized aspect-topic co-occurrence frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cooccurrence {
    /// T̃×T, rows by aspect; each column sums to 1 unless flagged.
    pub freq: Vec<Vec<f64>>,
    /// Topics never chosen as a supertopic; their columns are all zero.
    pub never_supertopic: Vec<bool>,
}

impl Cooccurrence {
    /// Normalize a T̃×T table of (possibly averaged) co-assignment counts.
    pub fn from_counts(counts: &[Vec<f64>]) -> Self {
        let aspects = counts.len();
        let topics = counts.first().map_or(0, Vec::len);
        let mut freq = vec![vec![0.0; topics]; aspects];
        let mut never = vec![false; topics];
        for t in 0..topics {
            let total: f64 = counts.iter().map(|r| r[t]).sum();
            if total <= 0.0 {
                never[t] = true;
                continue;
            }
            for a in 0..aspects {
                freq[a][t] = counts[a][t] / total;
            }
        }
        Self { freq, never_supertopic: never }
    }

    pub fn topics(&self) -> usize {
        self.never_supertopic.len()
    }

    pub fn aspects(&self) -> usize {
        self.freq.len()
    }
}

/// Co-occurrence frequencies from the chain's current assignments.
pub fn cooccurrence_frequencies(state: &CorrLda2State) -> Cooccurrence {
    let counts: Vec<Vec<f64>> = state
        .aspect_topic_counts()
        .into_iter()
        .map(|r| r.into_iter().map(f64::from).collect())
        .collect();
    Cooccurrence::from_counts(&counts)
}
