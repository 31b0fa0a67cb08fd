use std::path::{Path, PathBuf};

use reactscope::analysis::CompareOptions;
use reactscope::ingest::{IngestMode, SplitRatios, SynthConfig};
use reactscope::model::ModelConfig;
use reactscope::Platform;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Input and output locations. Unset inputs fall back to the file the
/// producing command writes into the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub sources: Option<PathBuf>,
    pub reactions: ReactionPaths,
    pub annotations: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub labeled: Option<PathBuf>,
    pub out: PathBuf,
}

/// Reaction shards per platform.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactionPaths {
    pub reddit: Vec<PathBuf>,
    pub twitter: Vec<PathBuf>,
}

impl ReactionPaths {
    pub fn for_platform(&self, platform: Platform) -> &[PathBuf] {
        match platform {
            Platform::Reddit => &self.reddit,
            Platform::Twitter => &self.twitter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabOptions {
    pub min_count: usize,
    pub max_size: usize,
}

impl Default for VocabOptions {
    fn default() -> Self {
        VocabOptions { min_count: 1, max_size: 50_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureOptions {
    pub size: usize,
    pub synth: SynthConfig,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        FixtureOptions { size: 1000, synth: SynthConfig::default() }
    }
}

/// Everything a command needs, as written next to its outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Drives every seeded stage: split, embeddings, initialization,
    /// shuffling, fixtures and bootstrap resampling.
    pub seed: u64,
    pub threads: Option<usize>,
    pub serial: bool,
    pub ingest_mode: IngestMode,
    pub paths: Paths,
    pub vocab: VocabOptions,
    pub split: SplitRatios,
    pub model_config: ModelConfig,
    pub analysis: CompareOptions,
    pub fixture: FixtureOptions,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub serial: bool,
    pub ingest_mode: Option<IngestMode>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Applies command-line overrides and propagates the run seed.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self, CliError> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(threads) = o.threads {
            self.threads = Some(threads);
        }
        self.serial |= o.serial;
        if let Some(mode) = o.ingest_mode {
            self.ingest_mode = mode;
        }
        if let Some(out) = &o.out {
            self.paths.out = out.clone();
        }
        if self.paths.out.as_os_str().is_empty() {
            self.paths.out = PathBuf::from("out");
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        self.model_config.seed = self.seed;
        self.analysis.seed = self.seed;
        self.model_config.validate()?;
        self.split.validate()?;
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }

    pub fn out(&self) -> &Path {
        &self.paths.out
    }

    /// Explicit path when set, else `default_name` inside the output directory.
    pub fn input_or_default(&self, explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.paths.out.join(default_name))
    }
}
