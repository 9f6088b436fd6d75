//! Versioned JSON checkpoints of sampler chains.
//!
//! A checkpoint holds the latent assignments, the RNG position and the tail
//! averages. Count tables are rebuilt from the assignments on restore, and
//! the restored chain continues exactly where the saved one stopped.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{BimodalCorpus, UnimodalCorpus};
use crate::corrlda2::{CorrLda2Assignments, CorrLda2State, TopicalUpdate};
use crate::error::{Error, Result};
use crate::features::TailAverages;
use crate::lda::LdaState;
use crate::params::Hyperparams;
use crate::rng::{ChainSeed, RNG_ALGORITHM};

pub const FORMAT_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelCheckpoint {
    Lda {
        topics: usize,
        hyper: Hyperparams,
        seed: ChainSeed,
        /// Decimal string; JSON numbers cannot hold a u128 exactly.
        rng_word_pos: String,
        sweeps: usize,
        assignments: Vec<Vec<u32>>,
    },
    Corrlda2 {
        topics: usize,
        aspects: usize,
        hyper: Hyperparams,
        seed: ChainSeed,
        rng_word_pos: String,
        sweeps: usize,
        topical_update: TopicalUpdate,
        assignments: CorrLda2Assignments,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub code_version: String,
    pub rng_algorithm: String,
    /// The configuration that produced the chain, echoed verbatim.
    pub config: serde_json::Value,
    pub model: ModelCheckpoint,
    pub tail: TailAverages,
}

fn parse_word_pos(s: &str) -> Result<u128> {
    s.parse().map_err(|_| Error::Checkpoint(format!("bad rng_word_pos {s:?}")))
}

impl Checkpoint {
    fn wrap(model: ModelCheckpoint, tail: TailAverages, config: serde_json::Value) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            code_version: CODE_VERSION.to_owned(),
            rng_algorithm: RNG_ALGORITHM.to_owned(),
            config,
            model,
            tail,
        }
    }

    pub fn from_lda(state: &LdaState, tail: TailAverages, config: serde_json::Value) -> Self {
        let model = ModelCheckpoint::Lda {
            topics: state.topics(),
            hyper: state.hyper(),
            seed: state.seed(),
            rng_word_pos: state.rng_word_pos().to_string(),
            sweeps: state.sweeps(),
            assignments: state.assignments().to_vec(),
        };
        Self::wrap(model, tail, config)
    }

    pub fn from_corrlda2(state: &CorrLda2State, tail: TailAverages, config: serde_json::Value) -> Self {
        let model = ModelCheckpoint::Corrlda2 {
            topics: state.topics(),
            aspects: state.aspects(),
            hyper: state.hyper(),
            seed: state.seed(),
            rng_word_pos: state.rng_word_pos().to_string(),
            sweeps: state.sweeps(),
            topical_update: state.topical_update(),
            assignments: state.assignments(),
        };
        Self::wrap(model, tail, config)
    }

    pub fn is_lda(&self) -> bool {
        matches!(self.model, ModelCheckpoint::Lda { .. })
    }

    pub fn restore_lda(&self, corpus: &UnimodalCorpus) -> Result<LdaState> {
        let ModelCheckpoint::Lda { topics, hyper, seed, rng_word_pos, sweeps, assignments } = &self.model else {
            return Err(Error::Checkpoint("checkpoint holds a CorrLDA2 chain, not LDA".into()));
        };
        let state = LdaState::from_assignments(
            corpus,
            *topics,
            *hyper,
            assignments.clone(),
            *seed,
            parse_word_pos(rng_word_pos)?,
            *sweeps,
        )?;
        state.check_invariants()?;
        Ok(state)
    }

    pub fn restore_corrlda2(&self, corpus: &BimodalCorpus) -> Result<CorrLda2State> {
        let ModelCheckpoint::Corrlda2 {
            topics,
            aspects,
            hyper,
            seed,
            rng_word_pos,
            sweeps,
            topical_update,
            assignments,
        } = &self.model
        else {
            return Err(Error::Checkpoint("checkpoint holds an LDA chain, not CorrLDA2".into()));
        };
        let state = CorrLda2State::from_assignments(
            corpus,
            *topics,
            *aspects,
            *hyper,
            assignments.clone(),
            *seed,
            parse_word_pos(rng_word_pos)?,
            *sweeps,
        )?
        .with_topical_update(*topical_update);
        state.check_invariants()?;
        Ok(state)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(Error::Checkpoint(format!("unsupported checkpoint format {v}"))),
            None => return Err(Error::Checkpoint("missing format_version".into())),
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
