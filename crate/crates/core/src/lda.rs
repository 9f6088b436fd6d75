//! Collapsed Gibbs sampler for LDA over a single vocabulary.

use rand::Rng;

use crate::corpus::UnimodalCorpus;
use crate::error::{Error, Result};
use crate::math::{log_dirichlet_multinomial, normalize};
use crate::params::Hyperparams;
use crate::rng::{sample_index, ChainRng, ChainSeed};

/// Unnormalized full-conditional weights for one topical token.
///
/// All counts must already exclude the token being resampled. `doc_len` is
/// the document's token count without it. Returns the sum of `out`.
#[allow(clippy::too_many_arguments)]
pub fn topic_weights(
    doc_topic: &[u32],
    word_topic: &[u32],
    topic_totals: &[u32],
    doc_len: u32,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    out: &mut [f64],
) -> f64 {
    let topics = doc_topic.len();
    let doc_denom = doc_len as f64 + topics as f64 * alpha;
    let w_beta = vocab_size as f64 * beta;
    let mut total = 0.0;
    for t in 0..topics {
        let p = (doc_topic[t] as f64 + alpha) / doc_denom * (word_topic[t] as f64 + beta)
            / (topic_totals[t] as f64 + w_beta);
        out[t] = p;
        total += p;
    }
    total
}

#[derive(Debug, Clone)]
pub struct LdaState {
    topics: usize,
    vocab_size: usize,
    hyper: Hyperparams,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_totals: Vec<u32>,
    seed: ChainSeed,
    rng: ChainRng,
    sweeps: usize,
}

impl LdaState {
    /// Assign every token a uniformly random topic.
    pub fn init(
        corpus: &UnimodalCorpus,
        topics: usize,
        hyper: Hyperparams,
        seed: impl Into<ChainSeed>,
    ) -> Result<Self> {
        check_setup(corpus, topics, hyper)?;
        let seed = seed.into();
        let mut rng = seed.rng();
        let z = corpus
            .docs
            .iter()
            .map(|d| d.ids.iter().map(|_| rng.random_range(0..topics as u32)).collect())
            .collect();
        Ok(Self::assemble(corpus, topics, hyper, z, seed, rng, 0))
    }

    /// Rebuild a state from stored assignments; counts are recomputed.
    pub fn from_assignments(
        corpus: &UnimodalCorpus,
        topics: usize,
        hyper: Hyperparams,
        z: Vec<Vec<u32>>,
        seed: ChainSeed,
        rng_word_pos: u128,
        sweeps: usize,
    ) -> Result<Self> {
        check_setup(corpus, topics, hyper)?;
        if z.len() != corpus.docs.len() {
            return Err(Error::Checkpoint(format!(
                "{} assignment rows for {} documents",
                z.len(),
                corpus.docs.len()
            )));
        }
        for (d, (row, doc)) in z.iter().zip(&corpus.docs).enumerate() {
            if row.len() != doc.ids.len() {
                return Err(Error::Checkpoint(format!("document {d}: assignment length mismatch")));
            }
            if row.iter().any(|&t| t as usize >= topics) {
                return Err(Error::Checkpoint(format!("document {d}: topic out of range")));
            }
        }
        let state = Self::assemble(corpus, topics, hyper, z, seed, seed.rng_at(rng_word_pos), sweeps);
        state.check_invariants()?;
        Ok(state)
    }

    fn assemble(
        corpus: &UnimodalCorpus,
        topics: usize,
        hyper: Hyperparams,
        z: Vec<Vec<u32>>,
        seed: ChainSeed,
        rng: ChainRng,
        sweeps: usize,
    ) -> Self {
        let vocab_size = corpus.vocab.len();
        let docs: Vec<Vec<u32>> = corpus.docs.iter().map(|d| d.ids.clone()).collect();
        let mut state = Self {
            topics,
            vocab_size,
            hyper,
            doc_topic: vec![0; docs.len() * topics],
            word_topic: vec![0; vocab_size * topics],
            topic_totals: vec![0; topics],
            docs,
            z,
            seed,
            rng,
            sweeps,
        };
        for d in 0..state.docs.len() {
            for i in 0..state.docs[d].len() {
                let (w, t) = (state.docs[d][i] as usize, state.z[d][i] as usize);
                state.add(d, w, t);
            }
        }
        state
    }

    #[inline]
    fn add(&mut self, d: usize, w: usize, t: usize) {
        self.doc_topic[d * self.topics + t] += 1;
        self.word_topic[w * self.topics + t] += 1;
        self.topic_totals[t] += 1;
    }

    #[inline]
    fn remove(&mut self, d: usize, w: usize, t: usize) {
        self.doc_topic[d * self.topics + t] -= 1;
        self.word_topic[w * self.topics + t] -= 1;
        self.topic_totals[t] -= 1;
    }

    /// Normalized full conditional of token `i` in document `d`, with the
    /// token's current assignment excluded from the counts.
    pub fn conditional(&self, d: usize, i: usize) -> Vec<f64> {
        let t_cur = self.z[d][i] as usize;
        let w = self.docs[d][i] as usize;
        let excl = |row: &[u32]| -> Vec<u32> {
            row.iter()
                .enumerate()
                .map(|(t, &c)| if t == t_cur { c - 1 } else { c })
                .collect()
        };
        let dt = excl(self.doc_topic_counts(d));
        let wt = excl(self.word_topic_counts(w));
        let tt = excl(&self.topic_totals);
        let mut out = vec![0.0; self.topics];
        topic_weights(
            &dt,
            &wt,
            &tt,
            self.docs[d].len() as u32 - 1,
            self.vocab_size,
            self.hyper.alpha,
            self.hyper.beta,
            &mut out,
        );
        normalize(&mut out);
        out
    }

    /// Resample every token once, documents and positions in order.
    pub fn sweep(&mut self) {
        let k = self.topics;
        let mut weights = vec![0.0; k];
        for d in 0..self.docs.len() {
            let doc_len = self.docs[d].len() as u32;
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i] as usize;
                let t_old = self.z[d][i] as usize;
                self.remove(d, w, t_old);
                let total = topic_weights(
                    &self.doc_topic[d * k..(d + 1) * k],
                    &self.word_topic[w * k..(w + 1) * k],
                    &self.topic_totals,
                    doc_len - 1,
                    self.vocab_size,
                    self.hyper.alpha,
                    self.hyper.beta,
                    &mut weights,
                );
                let t_new = sample_index(&mut self.rng, &weights, total);
                self.z[d][i] = t_new as u32;
                self.add(d, w, t_new);
            }
        }
        self.sweeps += 1;
    }

    /// Posterior-mean document-topic proportions, D×T.
    pub fn estimate_theta(&self) -> Vec<Vec<f64>> {
        (0..self.docs.len())
            .map(|d| {
                let row = self.doc_topic_counts(d);
                let denom = self.docs[d].len() as f64 + self.topics as f64 * self.hyper.alpha;
                row.iter().map(|&c| (c as f64 + self.hyper.alpha) / denom).collect()
            })
            .collect()
    }

    /// Posterior-mean topic-word distributions, T×W.
    pub fn estimate_phi(&self) -> Vec<Vec<f64>> {
        let wb = self.vocab_size as f64 * self.hyper.beta;
        (0..self.topics)
            .map(|t| {
                let denom = self.topic_totals[t] as f64 + wb;
                (0..self.vocab_size)
                    .map(|w| (self.word_topic[w * self.topics + t] as f64 + self.hyper.beta) / denom)
                    .collect()
            })
            .collect()
    }

    /// log p(w, z | α, β) with θ and φ integrated out.
    pub fn log_likelihood(&self) -> f64 {
        let k = self.topics;
        let docs: f64 = (0..self.docs.len())
            .map(|d| log_dirichlet_multinomial(self.doc_topic_counts(d).iter().copied(), k, self.hyper.alpha))
            .sum();
        let words: f64 = (0..k)
            .map(|t| {
                log_dirichlet_multinomial(
                    (0..self.vocab_size).map(|w| self.word_topic[w * k + t]),
                    self.vocab_size,
                    self.hyper.beta,
                )
            })
            .sum();
        docs + words
    }

    /// Recompute every count table from the assignments and compare.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.topics;
        let mut dt = vec![0u32; self.docs.len() * k];
        let mut wt = vec![0u32; self.vocab_size * k];
        let mut tt = vec![0u32; k];
        for (d, (doc, zs)) in self.docs.iter().zip(&self.z).enumerate() {
            if doc.len() != zs.len() {
                return Err(Error::Model(format!("document {d}: assignment length mismatch")));
            }
            for (&w, &t) in doc.iter().zip(zs) {
                let t = t as usize;
                if t >= k {
                    return Err(Error::Model(format!("document {d}: topic {t} out of range")));
                }
                dt[d * k + t] += 1;
                wt[w as usize * k + t] += 1;
                tt[t] += 1;
            }
            let row_sum: u32 = self.doc_topic_counts(d).iter().sum();
            if row_sum as usize != doc.len() {
                return Err(Error::Model(format!("document {d}: topic counts sum to {row_sum}, not N_d")));
            }
        }
        if dt != self.doc_topic || wt != self.word_topic || tt != self.topic_totals {
            return Err(Error::Model("count tables disagree with assignments".into()));
        }
        for t in 0..k {
            let by_word: u32 = (0..self.vocab_size).map(|w| wt[w * k + t]).sum();
            let by_doc: u32 = (0..self.docs.len()).map(|d| dt[d * k + t]).sum();
            if by_word != by_doc {
                return Err(Error::Model(format!("topic {t}: word and document totals differ")));
            }
        }
        Ok(())
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn hyper(&self) -> Hyperparams {
        self.hyper
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.topics..(d + 1) * self.topics]
    }

    pub fn word_topic_counts(&self, w: usize) -> &[u32] {
        &self.word_topic[w * self.topics..(w + 1) * self.topics]
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.topic_totals
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.docs[d].len()
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

fn check_setup(corpus: &UnimodalCorpus, topics: usize, hyper: Hyperparams) -> Result<()> {
    if topics < 1 {
        return Err(Error::Parameter("number of topics must be at least 1".into()));
    }
    hyper.validate()?;
    if corpus.docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}
