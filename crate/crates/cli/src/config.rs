//! Layered run configuration: built-in defaults, then an optional TOML file,
//! then command-line flags. Every command echoes the fully resolved config
//! next to its output so a run can be reproduced from the artifacts alone.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ctd_core::embed::TrainConfig;
use ctd_core::eval::MatchKey;
use ctd_core::pairdist::DistanceMethod;
use ctd_core::scoring::ScoreConfig;
use ctd_core::traversal::{HeuristicConfig, TraversalConfig, DEFAULT_EXACT_THRESHOLD};

/// First occurrence wins; repeated flags are harmless.
fn dedup_preserving<T: PartialEq + Copy>(v: &mut Vec<T>) {
    let mut seen: Vec<T> = Vec::with_capacity(v.len());
    v.retain(|x| {
        if seen.contains(x) {
            false
        } else {
            seen.push(*x);
            true
        }
    });
}

/// Shape of the TOML config file. Everything is optional; unknown keys are
/// rejected so a typo cannot silently fall back to a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    window: Option<u32>,
    methods: Option<Vec<DistanceMethod>>,
    exact_threshold: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    runs: Option<usize>,
    keys: Option<Vec<MatchKey>>,
    zscore: Option<bool>,
    heuristic_starts: Option<usize>,
    #[serde(default)]
    embedding: EmbeddingOverrides,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingOverrides {
    dim: Option<usize>,
    epochs: Option<u32>,
    negatives: Option<u32>,
    learning_rate: Option<f64>,
}

/// Embedding hyperparameters as configured. The training seed is always the
/// run's master seed, so it is not a separate knob.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingParams {
    pub dim: usize,
    pub epochs: u32,
    pub negatives: u32,
    pub learning_rate: f64,
}

/// Values taken from the command line; `None` / empty means "not given".
#[derive(Debug, Default)]
pub struct FlagOverrides {
    pub corpus: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub window: Option<u32>,
    pub methods: Vec<DistanceMethod>,
    pub exact_threshold: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub runs: Option<usize>,
    pub keys: Vec<MatchKey>,
    pub zscore: bool,
}

/// The resolved, validated configuration a command actually runs under.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub window: u32,
    pub methods: Vec<DistanceMethod>,
    pub exact_threshold: usize,
    pub seed: u64,
    /// 0 means one thread per available core.
    pub workers: usize,
    pub runs: usize,
    pub keys: Vec<MatchKey>,
    pub zscore: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic_starts: Option<usize>,
    pub embedding: EmbeddingParams,
}

impl RunConfig {
    pub fn resolve(config_path: Option<&Path>, flags: FlagOverrides) -> Result<RunConfig> {
        let file = match config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                toml::from_str::<FileConfig>(&text)
                    .with_context(|| format!("parsing config file {}", path.display()))?
            }
            None => FileConfig::default(),
        };

        let Some(corpus) = flags.corpus.or(file.corpus) else {
            bail!("no corpus given: pass --corpus or set `corpus` in the config file");
        };
        let Some(out) = flags.out.or(file.out) else {
            bail!("no output path given: pass --out or set `out` in the config file");
        };

        let window = flags.window.or(file.window).unwrap_or(5);
        if window < 1 {
            bail!("window must be at least 1 year");
        }

        let mut methods = if !flags.methods.is_empty() {
            flags.methods
        } else {
            file.methods
                .unwrap_or_else(|| vec![DistanceMethod::TermPaper])
        };
        dedup_preserving(&mut methods);
        if methods.is_empty() {
            bail!("at least one --method is required");
        }

        let exact_threshold = flags
            .exact_threshold
            .or(file.exact_threshold)
            .unwrap_or(DEFAULT_EXACT_THRESHOLD);
        if exact_threshold < 2 {
            bail!("exact-threshold must be at least 2");
        }

        let runs = flags.runs.or(file.runs).unwrap_or(10);
        if runs < 1 {
            bail!("runs must be at least 1");
        }

        let mut keys = if !flags.keys.is_empty() {
            flags.keys
        } else {
            file.keys.unwrap_or_else(|| MatchKey::ALL.to_vec())
        };
        dedup_preserving(&mut keys);
        if keys.is_empty() {
            bail!("at least one matching --key is required");
        }

        if let Some(starts) = file.heuristic_starts {
            if starts < 1 {
                bail!("heuristic_starts must be at least 1 when set");
            }
        }

        let seed = flags.seed.or(file.seed).unwrap_or(42);
        let defaults = TrainConfig::default();
        let embedding = EmbeddingParams {
            dim: file.embedding.dim.unwrap_or(defaults.dim),
            epochs: file.embedding.epochs.unwrap_or(defaults.epochs),
            negatives: file.embedding.negatives.unwrap_or(defaults.negatives),
            learning_rate: file
                .embedding
                .learning_rate
                .unwrap_or(defaults.learning_rate),
        };

        Ok(RunConfig {
            corpus,
            out,
            window,
            methods,
            exact_threshold,
            seed,
            workers: flags.workers.or(file.workers).unwrap_or(0),
            runs,
            keys,
            zscore: flags.zscore || file.zscore.unwrap_or(false),
            heuristic_starts: file.heuristic_starts,
            embedding,
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.embedding.dim,
            epochs: self.embedding.epochs,
            negatives: self.embedding.negatives,
            learning_rate: self.embedding.learning_rate,
            seed: self.seed,
        }
    }

    pub fn traversal(&self) -> TraversalConfig {
        TraversalConfig {
            exact_threshold: self.exact_threshold,
            heuristic: HeuristicConfig {
                starts: self.heuristic_starts,
                seed: self.seed,
            },
        }
    }

    pub fn score_config(&self) -> ScoreConfig {
        ScoreConfig {
            window_len: self.window,
            traversal: self.traversal(),
        }
    }

    /// Echo the resolved config beside a single output file, as
    /// `<file>.config.toml`.
    pub fn echo_beside_file(&self, out: &Path) -> Result<PathBuf> {
        let mut name = out.as_os_str().to_owned();
        name.push(".config.toml");
        let path = PathBuf::from(name);
        self.write_echo(&path)?;
        Ok(path)
    }

    /// Echo the resolved config into an output directory as `config.toml`.
    pub fn echo_inside_dir(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("config.toml");
        self.write_echo(&path)?;
        Ok(path)
    }

    fn write_echo(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).context("serializing resolved config")?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
