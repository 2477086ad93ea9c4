//! Experiment specs and the sweep runner.
//!
//! An experiment file is a simulation config with three extra top-level
//! keys: `output_dir`, `workers` and a `[sweep]` table of axes. Each axis
//! left out falls back to the single value of the base config.
//!
//! ```toml
//! master_seed = 1
//! iterations = 200
//! output_dir = "out/strategies"
//! [network]
//! kind = "scale_free"
//! n = 50
//! m = 2
//! [sweep]
//! init_strategies = ["random", "degree"]
//! activation_strategies = ["uniform", "degree"]
//! master_seeds = [1, 2, 3]
//! [[sweep.personas]]
//! label = "credulous"
//! kind = "generate"
//! acc = { fixed = 4 }
//! spread = { fixed = 3 }
//! ```
//!
//! Each cell writes `<label>.jsonl` (trace), `<label>.toml` (resolved
//! config) and `<label>.meta.json` (timestamps, not part of the
//! reproducible output). A cell whose trace already ends in a summary is
//! skipped on rerun.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{self, ActivationStrategy, EngineError, InitStrategy, NetworkSpec, PersonaSpec, SimulationConfig};

/// An axis value with a short name used in cell labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled<T> {
    pub label: String,
    pub value: T,
}

fn labeled_list<T: DeserializeOwned>(
    items: Option<toml::Value>,
    name: &str,
) -> Result<Option<Vec<Labeled<T>>>, EngineError> {
    let Some(items) = items else { return Ok(None) };
    let toml::Value::Array(items) = items else {
        return Err(EngineError::Config(format!("sweep.{name} must be an array of tables")));
    };
    let mut out = Vec::new();
    for (i, item) in items.into_iter().enumerate() {
        let toml::Value::Table(mut table) = item else {
            return Err(EngineError::Config(format!("sweep.{name}[{i}] must be a table")));
        };
        let label = match table.remove("label") {
            Some(toml::Value::String(s)) => s,
            Some(_) => return Err(EngineError::Config(format!("sweep.{name}[{i}].label must be a string"))),
            None => format!("{}{}", &name[..1], i + 1),
        };
        let value =
            toml::Value::Table(table).try_into().map_err(|e| EngineError::Config(format!("sweep.{name}[{i}]: {e}")))?;
        out.push(Labeled { label, value });
    }
    Ok(Some(out))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    networks: Option<toml::Value>,
    personas: Option<toml::Value>,
    init_strategies: Option<Vec<InitStrategy>>,
    activation_strategies: Option<Vec<ActivationStrategy>>,
    master_seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SimulationConfig,
    pub networks: Vec<Labeled<NetworkSpec>>,
    pub personas: Vec<Labeled<PersonaSpec>>,
    pub init_strategies: Vec<InitStrategy>,
    pub activation_strategies: Vec<ActivationStrategy>,
    pub master_seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// 0 means one worker per core.
    pub workers: usize,
}

/// One point of the cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub label: String,
    pub config: SimulationConfig,
}

fn init_name(s: InitStrategy) -> &'static str {
    match s {
        InitStrategy::Random => "random",
        InitStrategy::Degree => "degree",
    }
}

fn activation_name(s: ActivationStrategy) -> &'static str {
    match s {
        ActivationStrategy::Uniform => "uniform",
        ActivationStrategy::Degree => "degree",
    }
}

fn network_name(n: &NetworkSpec) -> String {
    match n {
        NetworkSpec::ErdosRenyi { .. } => "er".into(),
        NetworkSpec::ScaleFree { .. } => "sf".into(),
        NetworkSpec::SmallWorld { .. } => "sw".into(),
        NetworkSpec::EdgeList { path } => path.file_stem().map_or("edges".into(), |s| s.to_string_lossy().into_owned()),
    }
}

fn sanitize(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '-' }).collect()
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, EngineError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| EngineError::Config(e.to_string()))?;
        let output_dir = match table.remove("output_dir") {
            Some(toml::Value::String(s)) => PathBuf::from(s),
            Some(_) => return Err(EngineError::Config("output_dir must be a string".into())),
            None => PathBuf::from("out"),
        };
        let workers = match table.remove("workers") {
            Some(toml::Value::Integer(w)) if w >= 0 => w as usize,
            Some(_) => return Err(EngineError::Config("workers must be a non-negative integer".into())),
            None => 0,
        };
        let sweep: RawSweep = match table.remove("sweep") {
            Some(v) => v.try_into().map_err(|e| EngineError::Config(format!("sweep: {e}")))?,
            None => RawSweep::default(),
        };
        let base: SimulationConfig =
            toml::Value::Table(table).try_into().map_err(|e| EngineError::Config(e.to_string()))?;

        let networks = labeled_list(sweep.networks, "networks")?
            .unwrap_or_else(|| vec![Labeled { label: network_name(&base.network), value: base.network.clone() }]);
        let personas = labeled_list(sweep.personas, "personas")?
            .unwrap_or_else(|| vec![Labeled { label: "roster".into(), value: base.personas.clone() }]);
        let spec = Self {
            init_strategies: sweep.init_strategies.unwrap_or_else(|| vec![base.init_strategy]),
            activation_strategies: sweep.activation_strategies.unwrap_or_else(|| vec![base.activation_strategy]),
            master_seeds: sweep.master_seeds.unwrap_or_else(|| vec![base.master_seed]),
            networks,
            personas,
            base,
            output_dir,
            workers,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Loads a spec; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut spec = Self::from_toml_str(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        spec.base.rebase(dir);
        for n in &mut spec.networks {
            rebase_network(&mut n.value, dir);
        }
        for p in &mut spec.personas {
            rebase_personas(&mut p.value, dir);
        }
        if spec.output_dir.is_relative() {
            spec.output_dir = dir.join(&spec.output_dir);
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let empty = [
            ("networks", self.networks.is_empty()),
            ("personas", self.personas.is_empty()),
            ("init_strategies", self.init_strategies.is_empty()),
            ("activation_strategies", self.activation_strategies.is_empty()),
            ("master_seeds", self.master_seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(EngineError::Config(format!("sweep.{name} is empty")));
        }
        let labels: Vec<String> = self.cells().into_iter().map(|c| c.label).collect();
        let unique: std::collections::BTreeSet<_> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(EngineError::Config(
                "sweep labels collide; give each network and persona regime a distinct label".into(),
            ));
        }
        self.base.validate()
    }

    /// Product of the axis lengths.
    pub fn cell_count(&self) -> usize {
        self.networks.len()
            * self.personas.len()
            * self.init_strategies.len()
            * self.activation_strategies.len()
            * self.master_seeds.len()
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.cell_count());
        for net in &self.networks {
            for per in &self.personas {
                for &init in &self.init_strategies {
                    for &act in &self.activation_strategies {
                        for &seed in &self.master_seeds {
                            let mut config = self.base.clone();
                            config.network = net.value.clone();
                            config.personas = per.value.clone();
                            config.init_strategy = init;
                            config.activation_strategy = act;
                            config.master_seed = seed;
                            let label = sanitize(&format!(
                                "{}_{}_init-{}_act-{}_seed{seed}",
                                net.label,
                                per.label,
                                init_name(init),
                                activation_name(act)
                            ));
                            out.push(Cell { label, config });
                        }
                    }
                }
            }
        }
        out
    }
}

fn rebase_network(n: &mut NetworkSpec, dir: &Path) {
    if let NetworkSpec::EdgeList { path } = n {
        if path.is_relative() {
            *path = dir.join(&*path);
        }
    }
}

fn rebase_personas(p: &mut PersonaSpec, dir: &Path) {
    if let PersonaSpec::File { path } = p {
        if path.is_relative() {
            *path = dir.join(&*path);
        }
    }
}

#[derive(Debug)]
pub enum CellStatus {
    Completed,
    Skipped,
    Failed(EngineError),
}

#[derive(Debug)]
pub struct CellOutcome {
    pub label: String,
    pub trace_path: PathBuf,
    pub status: CellStatus,
}

#[derive(Debug, Serialize)]
struct CellMeta<'a> {
    label: &'a str,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    elapsed_ms: u128,
    ok: bool,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// True when `path` holds a trace that ran to completion.
pub fn trace_complete(path: &Path) -> bool {
    fs::File::open(path).is_ok_and(|f| engine::read_trace(BufReader::new(f)).is_ok())
}

/// Runs one cell into `dir`, skipping it if a complete trace is present.
pub fn run_cell(cell: &Cell, dir: &Path) -> CellOutcome {
    let trace_path = dir.join(format!("{}.jsonl", cell.label));
    let status = if trace_complete(&trace_path) {
        CellStatus::Skipped
    } else {
        match execute(cell, dir, &trace_path) {
            Ok(()) => CellStatus::Completed,
            Err(e) => CellStatus::Failed(e),
        }
    };
    CellOutcome { label: cell.label.clone(), trace_path, status }
}

fn execute(cell: &Cell, dir: &Path, trace_path: &Path) -> Result<(), EngineError> {
    let mut config = cell.config.clone();
    if config.backend.record_transcript.is_some() {
        config.backend.record_transcript = Some(dir.join(format!("{}.transcript.jsonl", cell.label)));
    }
    fs::write(dir.join(format!("{}.toml", cell.label)), config.to_toml())?;
    let started = now_ms();
    let clock = Instant::now();
    let mut out = BufWriter::new(fs::File::create(trace_path)?);
    let result = engine::run(&config, Some(&mut out)).map(|_| ());
    let meta = CellMeta {
        label: &cell.label,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        elapsed_ms: clock.elapsed().as_millis(),
        ok: result.is_ok(),
    };
    fs::write(
        dir.join(format!("{}.meta.json", cell.label)),
        serde_json::to_string_pretty(&meta).expect("plain struct"),
    )?;
    result
}

/// Runs every cell on a pool of `spec.workers` threads. Results come back
/// in cell order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<CellOutcome>, EngineError> {
    fs::create_dir_all(&spec.output_dir)?;
    let cells = spec.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| EngineError::Config(format!("cannot start workers: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|c| run_cell(c, &spec.output_dir)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::ScalePolicy;

    const SPEC: &str = r#"
master_seed = 1
iterations = 20
output_dir = "sweep-out"
workers = 2
[network]
kind = "small_world"
n = 12
k = 4
beta = 0.2
[sweep]
init_strategies = ["random", "degree"]
activation_strategies = ["uniform", "degree"]
master_seeds = [1, 2, 3]
[[sweep.personas]]
label = "credulous"
kind = "generate"
acc = { fixed = 4 }
spread = { fixed = 3 }
"#;

    #[test]
    fn cartesian_count_and_labels() {
        let spec = ExperimentSpec::from_toml_str(SPEC).unwrap();
        assert_eq!(spec.cell_count(), 12);
        let cells = spec.cells();
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[0].label, "sw_credulous_init-random_act-uniform_seed1");
        assert_eq!(
            cells[0].config.personas,
            PersonaSpec::Generate { acc: ScalePolicy::Fixed(4), spread: ScalePolicy::Fixed(3), seed: None }
        );
        assert_eq!(spec.workers, 2);
    }

    #[test]
    fn plain_config_is_a_single_cell() {
        let spec = ExperimentSpec::from_toml_str(
            "master_seed = 5\niterations = 1\n[network]\nkind = \"scale_free\"\nn = 10\nm = 2\n",
        )
        .unwrap();
        assert_eq!(spec.cell_count(), 1);
        assert_eq!(spec.cells()[0].label, "sf_roster_init-random_act-uniform_seed5");
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(ExperimentSpec::from_toml_str(&SPEC.replace("master_seeds = [1, 2, 3]", "master_seeds = []")).is_err());
        assert!(ExperimentSpec::from_toml_str(&SPEC.replace("[sweep]", "[sweep]\nbogus = 1")).is_err());
        let dup = format!("{SPEC}\n[[sweep.personas]]\nlabel = \"credulous\"\nkind = \"generate\"\n");
        assert!(ExperimentSpec::from_toml_str(&dup).is_err());
    }
}
