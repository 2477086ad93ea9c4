//! Rumor spreading among persona-driven agents on social networks.
//!
//! Networks come from [`graph`], agents from [`persona`], their prompts and
//! response parsing from [`prompt`], and decisions from a [`backend`]. The
//! [`engine`] runs the simulation loop and writes traces that [`metrics`]
//! turns into affected-fraction series and comparison matrices. [`sweep`]
//! runs experiment grids in parallel.

pub mod backend;
pub mod engine;
pub mod graph;
pub mod metrics;
pub mod persona;
pub mod prompt;
pub mod rng;
pub mod sweep;
pub mod text;

pub use backend::{Backend, BackendConfig, BackendError, BackendKind, BackendReply, BackendRequest};
pub use engine::{
    run, run_with, ActivationStrategy, BeliefMatrix, EngineError, InitStrategy, NetworkSpec, PersonaSpec, Simulation,
    SimulationConfig, SimulationTrace, StepRecord,
};
pub use graph::{Graph, GraphError, NetworkProperties};
pub use metrics::{AffectedSeries, ComparisonMatrix};
pub use persona::{Persona, ScalePolicy};
pub use prompt::{AgentAction, ParseError, Prompt, PromptContext};
pub use sweep::ExperimentSpec;
