//! Fixtures shared by the benchmarks.

use rumorsim::engine::{NetworkSpec, SimulationConfig};
use rumorsim::persona::{generate_personas, Persona, ScalePolicy};
use rumorsim::Graph;

/// Rule-backend run on a scale-free network with a mixed roster.
pub fn scale_free_run(n: usize, iterations: u64) -> (Graph, Vec<Persona>, SimulationConfig) {
    let cfg = SimulationConfig::new(NetworkSpec::ScaleFree { n, m: 4, seed: Some(1) }, iterations, 1);
    let (graph, _) = cfg.resolve().expect("valid benchmark config");
    let roster = generate_personas(n, 1, &ScalePolicy::Uniform, &ScalePolicy::Uniform).expect("valid roster");
    (graph, roster, cfg)
}
