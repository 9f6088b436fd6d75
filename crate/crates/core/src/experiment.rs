//! Chain runners and the accuracy-curve experiment.

use serde::{Deserialize, Serialize};

use crate::corpus::{BimodalCorpus, UnimodalCorpus};
use crate::corrlda2::{CorrLda2State, TopicalUpdate};
use crate::cv::{cross_validate_matrix, CvReport};
use crate::error::{Error, Result};
use crate::exec::map_jobs;
use crate::features::{build_feature_matrix, FeatureMode, TailAverages};
use crate::lda::LdaState;
use crate::params::Hyperparams;
use crate::rng::ChainSeed;
use crate::svm::SvmConfig;

/// How long to run a chain and what to keep from its final sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub hyper: Hyperparams,
    pub sweeps: usize,
    /// Number of final sweeps averaged for features and co-occurrences.
    pub tail: usize,
    pub topical_update: TopicalUpdate,
    /// Record the log-likelihood after every sweep.
    pub trace: bool,
}

impl SamplerSettings {
    pub fn new(sweeps: usize) -> Self {
        Self {
            hyper: Hyperparams::default(),
            sweeps,
            tail: 1,
            topical_update: TopicalUpdate::default(),
            trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tail < 1 || self.tail > self.sweeps {
            return Err(Error::Parameter(format!(
                "tail averaging over {} sweeps needs 1 <= tail <= sweeps ({})",
                self.tail, self.sweeps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LdaRun {
    pub state: LdaState,
    pub log_likelihood: Vec<f64>,
    pub tail: TailAverages,
}

#[derive(Debug, Clone)]
pub struct CorrLda2Run {
    pub state: CorrLda2State,
    pub log_likelihood: Vec<f64>,
    pub tail: TailAverages,
}

pub fn run_lda(
    corpus: &UnimodalCorpus,
    topics: usize,
    settings: &SamplerSettings,
    seed: ChainSeed,
) -> Result<LdaRun> {
    settings.validate()?;
    let mut state = LdaState::init(corpus, topics, settings.hyper, seed)?;
    let mut trace = Vec::new();
    let mut tail = TailAverages::new(&state);
    for s in 0..settings.sweeps {
        state.sweep();
        if settings.trace {
            trace.push(state.log_likelihood());
        }
        if s + settings.tail >= settings.sweeps {
            tail.record(&state);
        }
    }
    Ok(LdaRun { state, log_likelihood: trace, tail })
}

pub fn run_corrlda2(
    corpus: &BimodalCorpus,
    topics: usize,
    aspects: usize,
    settings: &SamplerSettings,
    seed: ChainSeed,
) -> Result<CorrLda2Run> {
    settings.validate()?;
    let mut state = CorrLda2State::init(corpus, topics, aspects, settings.hyper, seed)?
        .with_topical_update(settings.topical_update);
    let mut trace = Vec::new();
    let mut tail = TailAverages::new(&state);
    for s in 0..settings.sweeps {
        state.full_sweep();
        if settings.trace {
            trace.push(state.log_likelihood());
        }
        if s + settings.tail >= settings.sweeps {
            tail.record(&state);
        }
    }
    Ok(CorrLda2Run { state, log_likelihood: trace, tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Corrlda2,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Lda => "lda",
            ModelKind::Corrlda2 => "corrlda2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSettings {
    pub topics: Vec<usize>,
    pub aspects: usize,
    pub sampler: SamplerSettings,
    pub svm: SvmConfig,
    pub folds: usize,
    pub seed: u64,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPoint {
    pub topics: usize,
    pub model: ModelKind,
    pub features: FeatureMode,
    pub cv: CvReport,
}

/// Chain seed of the point with `topics` topics: stream = topics.
pub fn point_seed(seed: u64, topics: usize, replicate: usize) -> ChainSeed {
    ChainSeed::new(seed, ((topics as u64) << 16) | replicate as u64)
}

/// CV accuracy of LDA topic features for each topic count.
pub fn accuracy_curve_lda(corpus: &UnimodalCorpus, cfg: &CurveSettings) -> Result<Vec<AccuracyPoint>> {
    let meta = corpus.meta();
    let results = map_jobs(&cfg.topics, cfg.jobs, |&t| -> Result<AccuracyPoint> {
        let run = run_lda(corpus, t, &cfg.sampler, point_seed(cfg.seed, t, 0))?;
        let m = build_feature_matrix(&run.tail, &meta, FeatureMode::Topics)?;
        let cv = cross_validate_matrix(&m, cfg.folds, &cfg.svm, cfg.seed, 1)?;
        Ok(AccuracyPoint { topics: t, model: ModelKind::Lda, features: FeatureMode::Topics, cv })
    });
    results.into_iter().collect()
}

/// CV accuracy of CorrLDA2 features for each topic count and feature mode.
pub fn accuracy_curve_corrlda2(
    corpus: &BimodalCorpus,
    modes: &[FeatureMode],
    cfg: &CurveSettings,
) -> Result<Vec<AccuracyPoint>> {
    let meta = corpus.meta();
    let results = map_jobs(&cfg.topics, cfg.jobs, |&t| -> Result<Vec<AccuracyPoint>> {
        let run = run_corrlda2(corpus, t, cfg.aspects, &cfg.sampler, point_seed(cfg.seed, t, 0))?;
        modes
            .iter()
            .map(|&mode| {
                let m = build_feature_matrix(&run.tail, &meta, mode)?;
                let cv = cross_validate_matrix(&m, cfg.folds, &cfg.svm, cfg.seed, 1)?;
                Ok(AccuracyPoint { topics: t, model: ModelKind::Corrlda2, features: mode, cv })
            })
            .collect()
    });
    Ok(results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}
