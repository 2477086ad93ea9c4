use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::backend::BackendConfig;
use crate::graph::{self, Graph};
use crate::persona::{self, Persona, ScalePolicy};
use crate::rng::{derive_seed, streams};

/// The four rumors used in the original experiments.
pub fn default_rumors() -> Vec<String> {
    [
        "Nicolae Ceaușescu is not dead!",
        "A living dinosaur is found in Yellowstone National Park.",
        "Large Language Models are manned by real people acting as agents.",
        "Drinking 3 ales a day can heal cancer!",
    ]
    .map(String::from)
    .to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    #[default]
    Random,
    /// Highest-degree agents first, ties to the lower id.
    Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ActivationStrategy {
    #[default]
    Uniform,
    /// Probability proportional to degree.
    Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorPolicy {
    #[default]
    RetryOnceThenSkip,
    Abort,
}

/// Which network to simulate on. Generators without an explicit `seed` use
/// the run's `graph` stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSpec {
    ErdosRenyi { n: usize, p: f64, seed: Option<u64> },
    ScaleFree { n: usize, m: usize, seed: Option<u64> },
    SmallWorld { n: usize, k: usize, beta: f64, seed: Option<u64> },
    EdgeList { path: PathBuf },
}

impl NetworkSpec {
    pub fn build(&self, master_seed: u64) -> Result<Graph, EngineError> {
        let seed = |s: &Option<u64>| s.unwrap_or_else(|| derive_seed(master_seed, streams::GRAPH));
        let g = match self {
            Self::ErdosRenyi { n, p, seed: s } => graph::gen_erdos_renyi(*n, *p, seed(s))?,
            Self::ScaleFree { n, m, seed: s } => graph::gen_scale_free(*n, *m, seed(s))?,
            Self::SmallWorld { n, k, beta, seed: s } => graph::gen_small_world(*n, *k, *beta, seed(s))?,
            Self::EdgeList { path } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| EngineError::Config(format!("cannot open edge list {}: {e}", path.display())))?;
                graph::load_edge_list(std::io::BufReader::new(file))?.graph
            }
        };
        Ok(g)
    }

    fn rebase(&mut self, dir: &Path) {
        if let Self::EdgeList { path } = self {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PersonaSpec {
    Generate {
        #[serde(default = "uniform")]
        acc: ScalePolicy,
        #[serde(default = "uniform")]
        spread: ScalePolicy,
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

fn uniform() -> ScalePolicy {
    ScalePolicy::Uniform
}

impl Default for PersonaSpec {
    fn default() -> Self {
        Self::Generate { acc: ScalePolicy::Uniform, spread: ScalePolicy::Uniform, seed: None }
    }
}

impl PersonaSpec {
    pub fn build(&self, n: usize, master_seed: u64) -> Result<Vec<Persona>, EngineError> {
        match self {
            Self::Generate { acc, spread, seed } => {
                let seed = seed.unwrap_or_else(|| derive_seed(master_seed, streams::PERSONAS));
                Ok(persona::generate_personas(n, seed, acc, spread)?)
            }
            Self::File { path } => {
                let doc = std::fs::read_to_string(path)
                    .map_err(|e| EngineError::Config(format!("cannot read roster {}: {e}", path.display())))?;
                Ok(persona::load_personas(&doc)?)
            }
        }
    }

    fn rebase(&mut self, dir: &Path) {
        if let Self::File { path } = self {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }
}

fn default_threshold() -> f64 {
    0.5
}
fn default_seeds_per_rumor() -> usize {
    1
}
fn default_fillers() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub master_seed: u64,
    pub iterations: u64,
    #[serde(default = "default_rumors")]
    pub rumors: Vec<String>,
    #[serde(default)]
    pub init_strategy: InitStrategy,
    #[serde(default)]
    pub activation_strategy: ActivationStrategy,
    #[serde(default = "default_seeds_per_rumor")]
    pub seeds_per_rumor: usize,
    /// Belief at or above which an agent counts as holding a rumor.
    #[serde(default = "default_threshold")]
    pub belief_threshold: f64,
    #[serde(default)]
    pub on_parse_error: ParseErrorPolicy,
    #[serde(default = "default_fillers")]
    pub filler_posts_per_agent: usize,
    /// Show only the newest `history_window` posts in prompts.
    #[serde(default)]
    pub history_window: Option<usize>,
    #[serde(default)]
    pub shuffle_personas: bool,
    pub network: NetworkSpec,
    #[serde(default)]
    pub personas: PersonaSpec,
    #[serde(default)]
    pub backend: BackendConfig,
}

impl SimulationConfig {
    /// Rule-backend config with every knob at its default.
    pub fn new(network: NetworkSpec, iterations: u64, master_seed: u64) -> Self {
        Self {
            master_seed,
            iterations,
            rumors: default_rumors(),
            init_strategy: InitStrategy::default(),
            activation_strategy: ActivationStrategy::default(),
            seeds_per_rumor: 1,
            belief_threshold: default_threshold(),
            on_parse_error: ParseErrorPolicy::default(),
            filler_posts_per_agent: default_fillers(),
            history_window: None,
            shuffle_personas: false,
            network,
            personas: PersonaSpec::default(),
            backend: BackendConfig::rule(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, EngineError> {
        toml::from_str(text).map_err(|e| EngineError::Config(e.to_string()))
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn rebase(&mut self, dir: &Path) {
        self.network.rebase(dir);
        self.personas.rebase(dir);
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut().filter(|p| p.is_relative()) {
                *path = dir.join(&*path);
            }
        };
        fix(&mut self.backend.replay.transcript);
        fix(&mut self.backend.record_transcript);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Parameter checks that need neither the graph nor the roster.
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::Config(m));
        if self.rumors.is_empty() {
            return bad("at least one rumor is required".into());
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.rumors {
            let norm = crate::text::normalize(r);
            if norm.is_empty() {
                return bad(format!("rumor {r:?} has no words"));
            }
            if !seen.insert(norm) {
                return bad(format!("rumor {r:?} duplicates another rumor"));
            }
        }
        if !(self.belief_threshold > 0.0 && self.belief_threshold <= 1.0) {
            return bad(format!("belief_threshold {} outside (0, 1]", self.belief_threshold));
        }
        if self.seeds_per_rumor == 0 {
            return bad("seeds_per_rumor must be at least 1".into());
        }
        if self.history_window == Some(0) {
            return bad("history_window must be at least 1 when set".into());
        }
        self.backend.validate().map_err(|e| match e {
            crate::backend::BackendError::Config(m) => EngineError::Config(m),
            other => EngineError::Config(other.to_string()),
        })
    }

    /// Builds the graph and roster this config describes.
    pub fn resolve(&self) -> Result<(Graph, Vec<Persona>), EngineError> {
        let graph = self.network.build(self.master_seed)?;
        let roster = self.personas.build(graph.node_count().max(1), self.master_seed)?;
        Ok((graph, roster))
    }
}
