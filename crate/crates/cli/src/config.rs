use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use viewpoint_core::experiment::{ModelKind, SamplerSettings};
use viewpoint_core::params::{DEFAULT_CORRLDA2_SWEEPS, DEFAULT_LDA_SWEEPS};
use viewpoint_core::viewpoint::DEFAULT_THRESHOLD;
use viewpoint_core::{Hyperparams, PartitionScheme, SvmConfig, TopicalUpdate};

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub model: ModelKind,
    pub scheme: PartitionScheme,
    /// Schemes compared by `sweep`; empty means just `scheme`.
    pub schemes: Vec<PartitionScheme>,
    pub min_count: usize,
    pub topics: usize,
    /// Topic counts visited by `sweep` and `accuracy-curve`.
    pub topic_range: Vec<usize>,
    pub aspects: usize,
    pub hyper: Hyperparams,
    /// Defaults to 600 for LDA and 2000 for CorrLDA2.
    pub sweeps: Option<usize>,
    pub tail: usize,
    pub topical_update: TopicalUpdate,
    pub svm: SvmConfig,
    pub folds: usize,
    pub threshold: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Worker threads; 0 = all cores. Does not affect results.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            output_dir: PathBuf::from("out"),
            model: ModelKind::Corrlda2,
            scheme: PartitionScheme::OpinionNe,
            schemes: Vec::new(),
            min_count: 1,
            topics: 20,
            topic_range: Vec::new(),
            aspects: 2,
            hyper: Hyperparams::default(),
            sweeps: None,
            tail: 1,
            topical_update: TopicalUpdate::default(),
            svm: SvmConfig::default(),
            folds: 5,
            threshold: DEFAULT_THRESHOLD,
            replicates: 1,
            seed: 1,
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json {
            serde_json::from_str(&text).with_context(|| format!("invalid JSON config {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("invalid TOML config {}", path.display()))?
        };
        Ok(cfg)
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps.unwrap_or(match self.model {
            ModelKind::Lda => DEFAULT_LDA_SWEEPS,
            ModelKind::Corrlda2 => DEFAULT_CORRLDA2_SWEEPS,
        })
    }

    pub fn sampler(&self, trace: bool) -> SamplerSettings {
        SamplerSettings {
            hyper: self.hyper,
            sweeps: self.sweeps(),
            tail: self.tail,
            topical_update: self.topical_update,
            trace,
        }
    }

    pub fn sweep_schemes(&self) -> Vec<PartitionScheme> {
        if self.schemes.is_empty() {
            vec![self.scheme]
        } else {
            self.schemes.clone()
        }
    }

    pub fn corpus_path(&self) -> anyhow::Result<&Path> {
        let Some(path) = self.corpus.as_deref() else {
            bail!("no corpus given (set `corpus` in the config or pass --corpus)");
        };
        if !path.is_file() {
            bail!("corpus file {} does not exist", path.display());
        }
        Ok(path)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.hyper.validate()?;
        if self.topics == 0 || self.aspects == 0 {
            bail!("topics and aspects must be positive");
        }
        if self.topic_range.contains(&0) {
            bail!("topic_range must not contain 0");
        }
        if self.folds < 2 {
            bail!("folds must be at least 2");
        }
        if self.min_count == 0 || self.replicates == 0 {
            bail!("min_count and replicates must be at least 1");
        }
        if self.tail == 0 || self.tail > self.sweeps() {
            bail!("tail must be between 1 and the number of sweeps");
        }
        Ok(())
    }
}

/// Parse `5:60:5` (start:end:step, inclusive) or `5,10,20`.
pub fn parse_topic_range(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid topic range {s:?}; use start:end:step or a comma list");
    if s.contains(':') {
        let parts: Vec<usize> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let (start, end, step) = match parts[..] {
            [a, b] => (a, b, 1),
            [a, b, c] => (a, b, c),
            _ => return Err(bad()),
        };
        if step == 0 || start > end {
            return Err(bad());
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.sweeps(), 2000);
        assert_eq!(ExperimentConfig { model: ModelKind::Lda, ..cfg }.sweeps(), 600);
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg: ExperimentConfig = toml::from_str("topics = 16\nscheme = \"ne\"\n[hyper]\nalpha = 0.5\n").unwrap();
        assert_eq!(cfg.topics, 16);
        assert_eq!(cfg.scheme, PartitionScheme::Ne);
        assert_eq!(cfg.hyper.alpha, 0.5);
        assert_eq!(cfg.hyper.beta, 0.01);
        assert!(toml::from_str::<ExperimentConfig>("topcs = 3").is_err());
    }

    #[test]
    fn topic_ranges() {
        assert_eq!(parse_topic_range("5:20:5").unwrap(), vec![5, 10, 15, 20]);
        assert_eq!(parse_topic_range("1:3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_topic_range("4, 8").unwrap(), vec![4, 8]);
        assert!(parse_topic_range("5:1").is_err());
        assert!(parse_topic_range("a").is_err());
    }
}
