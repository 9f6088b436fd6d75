//! Output files. Every file carries the config, seed and code version;
//! timestamps go only to the sidecar `run.log`.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use viewpoint_core::checkpoint::CODE_VERSION;
use viewpoint_core::rng::RNG_ALGORITHM;

use crate::config::ExperimentConfig;

#[derive(Serialize)]
struct Envelope<'a, T> {
    code_version: &'a str,
    rng_algorithm: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    result: &'a T,
}

pub struct OutputDir {
    dir: PathBuf,
    command: &'static str,
}

impl OutputDir {
    pub fn create(dir: &Path, command: &'static str) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output dir {}", dir.display()))?;
        Ok(Self { dir: dir.to_owned(), command })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.log(&format!("wrote {}", path.display()))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, cfg: &ExperimentConfig, result: &T) -> anyhow::Result<PathBuf> {
        let env = Envelope {
            code_version: CODE_VERSION,
            rng_algorithm: RNG_ALGORITHM,
            seed: cfg.seed,
            config: cfg,
            result,
        };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV preceded by `# ` header lines with the provenance fields.
    pub fn write_csv(&self, name: &str, cfg: &ExperimentConfig, body: &[u8]) -> anyhow::Result<PathBuf> {
        let mut out = csv_preamble(cfg)?.into_bytes();
        out.extend_from_slice(body);
        self.write(name, &out)
    }

    pub fn write_text(&self, name: &str, cfg: &ExperimentConfig, text: &str) -> anyhow::Result<PathBuf> {
        self.write(name, format!("{}{text}", csv_preamble(cfg)?).as_bytes())
    }

    /// A file that already embeds its provenance (checkpoints).
    pub fn write_plain(&self, name: &str, text: &str) -> anyhow::Result<PathBuf> {
        self.write(name, text.as_bytes())
    }

    pub fn log(&self, message: &str) -> anyhow::Result<()> {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let mut f = OpenOptions::new().create(true).append(true).open(self.path("run.log"))?;
        writeln!(f, "{secs} {} {message}", self.command)?;
        Ok(())
    }
}

/// `# key: value` provenance lines.
pub fn csv_preamble(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    Ok(format!(
        "# code_version: {CODE_VERSION}\n# rng_algorithm: {RNG_ALGORITHM}\n# seed: {}\n# config: {}\n",
        cfg.seed,
        serde_json::to_string(cfg)?
    ))
}
