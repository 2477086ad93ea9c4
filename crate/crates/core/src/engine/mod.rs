//! The simulation loop.
//!
//! A run binds persona `i` to node `i`, gives every agent a few neutral
//! filler posts, seeds each rumor into the own history of the chosen
//! agents, then repeats for each iteration: pick an agent, render its
//! prompt, get an action from the backend, append the new post to the
//! agent's history and to every friend's history, and overwrite the agent's
//! belief row with its checks.

mod beliefs;
mod config;
mod trace;

use std::io::Write;

use crate::backend::{Backend, BackendError, BackendRequest};
use crate::graph::{Graph, GraphError};
use crate::persona::{shuffle, Persona, PersonaError, ScaleDictionaries};
use crate::prompt::{
    build_prompt, mention_consistency, parse_response, AgentAction, HistoryEntry, ParseError, PromptContext,
};
use crate::rng::{self, streams, SimRng};
use crate::text::{key_tokens, RumorKey};

pub use beliefs::BeliefMatrix;
pub use config::{
    default_rumors, ActivationStrategy, InitStrategy, NetworkSpec, ParseErrorPolicy, PersonaSpec, SimulationConfig,
};
pub use trace::{
    read_trace, BeliefDelta, SeedRecord, SimulationTrace, StepOutcome, StepRecord, TraceHeader, TraceLine,
    TraceSummary, TraceWriter, TRACE_SCHEMA,
};

const FILLERS: &str = include_str!("../../data/fillers.txt");

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Persona(#[from] PersonaError),
    #[error("iteration {iteration}: {source}")]
    Backend { iteration: u64, source: BackendError },
    #[error("iteration {iteration}: unparseable response: {source}")]
    Parse { iteration: u64, source: ParseError },
    #[error("trace error: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Neutral filler sentences that share no key token with any rumor.
pub fn filler_pool(rumors: &[String]) -> Vec<&'static str> {
    let keys: Vec<RumorKey> = rumors.iter().map(|r| RumorKey::new(r)).collect();
    FILLERS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .filter(|l| {
            let own = key_tokens(l);
            keys.iter().all(|k| k.overlap(&own) == 0)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Post {
    author: Option<usize>,
    text: String,
}

/// Picks the acting agent. Degree-proportional selection falls back to
/// uniform on an edgeless graph.
pub fn select_agent(graph: &Graph, strategy: ActivationStrategy, rng: &mut SimRng) -> usize {
    let n = graph.node_count();
    match strategy {
        ActivationStrategy::Degree if graph.edge_count() > 0 => {
            let mut r = rng::uniform_index(rng, 2 * graph.edge_count());
            for u in 0..n {
                let d = graph.degree(u);
                if r < d {
                    return u;
                }
                r -= d;
            }
            unreachable!("degree sum is 2E")
        }
        _ => rng::uniform_index(rng, n),
    }
}

/// Agents that receive a rumor. Random: uniform without replacement via a
/// partial Fisher–Yates over `0..n`. Degree: highest degree first, ties to
/// the lower id.
pub fn select_seeds(graph: &Graph, strategy: InitStrategy, count: usize, rng: &mut SimRng) -> Vec<usize> {
    let n = graph.node_count();
    match strategy {
        InitStrategy::Random => {
            let mut ids: Vec<usize> = (0..n).collect();
            for i in 0..count {
                let j = i + rng::uniform_index(rng, n - i);
                ids.swap(i, j);
            }
            ids.truncate(count);
            ids
        }
        InitStrategy::Degree => {
            let mut ids: Vec<usize> = (0..n).collect();
            ids.sort_by_key(|&u| (std::cmp::Reverse(graph.degree(u)), u));
            ids.truncate(count);
            ids
        }
    }
}

/// Live state of one run.
pub struct Simulation {
    config: SimulationConfig,
    graph: Graph,
    roster: Vec<Persona>,
    posts: Vec<Post>,
    histories: Vec<Vec<usize>>,
    beliefs: BeliefMatrix,
    iteration: u64,
    activation: SimRng,
    dict: ScaleDictionaries,
    seeds: Vec<SeedRecord>,
}

impl Simulation {
    /// Binds agents to nodes, builds friend lists from the edges, zeroes the
    /// belief matrix and hands out filler posts.
    pub fn initialize(graph: Graph, mut roster: Vec<Persona>, config: &SimulationConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let n = graph.node_count();
        if n == 0 {
            return Err(EngineError::Config("the network has no nodes".into()));
        }
        if roster.len() != n {
            return Err(EngineError::Config(format!("roster has {} personas for {n} nodes", roster.len())));
        }
        for p in &roster {
            p.validate().map_err(|m| EngineError::Config(format!("persona {}: {m}", p.id)))?;
        }
        let neutral = &config.backend.rule.neutral_post;
        if config.rumors.iter().any(|r| RumorKey::new(r).is_mentioned_by(neutral)) {
            return Err(EngineError::Config("rule.neutral_post mentions a rumor".into()));
        }
        if config.shuffle_personas {
            shuffle(&mut roster, &mut rng::stream(config.master_seed, streams::SHUFFLE));
        }

        let mut posts = Vec::new();
        let mut histories = vec![Vec::new(); n];
        if config.filler_posts_per_agent > 0 {
            let pool = filler_pool(&config.rumors);
            if pool.is_empty() {
                return Err(EngineError::Config("every filler post overlaps a rumor".into()));
            }
            let mut rng = rng::stream(config.master_seed, streams::FILLERS);
            for history in histories.iter_mut() {
                for _ in 0..config.filler_posts_per_agent {
                    let text = pool[rng::uniform_index(&mut rng, pool.len())];
                    history.push(posts.len());
                    posts.push(Post { author: None, text: text.to_owned() });
                }
            }
        }

        Ok(Self {
            beliefs: BeliefMatrix::zeros(n, config.rumors.len()),
            activation: rng::stream(config.master_seed, streams::ACTIVATION),
            config: config.clone(),
            graph,
            roster,
            posts,
            histories,
            iteration: 0,
            dict: ScaleDictionaries::default(),
            seeds: Vec::new(),
        })
    }

    /// Appends each rumor's text to the own history of its seed agents.
    pub fn seed_rumors(&mut self) -> Result<&[SeedRecord], EngineError> {
        let n = self.graph.node_count();
        let k = self.config.seeds_per_rumor;
        if k > n {
            return Err(EngineError::Config(format!("seeds_per_rumor {k} exceeds {n} agents")));
        }
        let mut rng = rng::stream(self.config.master_seed, streams::INIT);
        for (j, rumor) in self.config.rumors.iter().enumerate() {
            let agents = select_seeds(&self.graph, self.config.init_strategy, k, &mut rng);
            for &a in &agents {
                self.histories[a].push(self.posts.len());
                self.posts.push(Post { author: None, text: rumor.clone() });
            }
            self.seeds.push(SeedRecord { rumor: j, agents });
        }
        Ok(&self.seeds)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn roster(&self) -> &[Persona] {
        &self.roster
    }

    pub fn beliefs(&self) -> &BeliefMatrix {
        &self.beliefs
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn history_len(&self, agent: usize) -> usize {
        self.histories[agent].len()
    }

    pub fn total_history_len(&self) -> usize {
        self.histories.iter().map(Vec::len).sum()
    }

    /// Texts visible to an agent, oldest first.
    pub fn history_texts(&self, agent: usize) -> Vec<&str> {
        self.histories[agent].iter().map(|&p| self.posts[p].text.as_str()).collect()
    }

    pub fn header(&self) -> TraceHeader {
        TraceHeader {
            schema: TRACE_SCHEMA.into(),
            master_seed: self.config.master_seed,
            iterations: self.config.iterations,
            node_count: self.graph.node_count(),
            edge_count: self.graph.edge_count(),
            rumors: self.config.rumors.clone(),
            belief_threshold: self.config.belief_threshold,
            init_strategy: self.config.init_strategy,
            activation_strategy: self.config.activation_strategy,
            agent_names: self.roster.iter().map(|p| p.agent_name.clone()).collect(),
        }
    }

    fn context(&self, agent: usize) -> PromptContext<'_> {
        let history = &self.histories[agent];
        let start = self.config.history_window.map_or(0, |w| history.len().saturating_sub(w));
        PromptContext {
            persona: &self.roster[agent],
            friend_names: self.graph.neighbors(agent).iter().map(|&f| self.roster[f].agent_name.as_str()).collect(),
            believed_rumors: self
                .config
                .rumors
                .iter()
                .enumerate()
                .filter(|&(j, _)| self.beliefs.get(agent, j) >= self.config.belief_threshold)
                .map(|(_, r)| r.as_str())
                .collect(),
            post_history: history[start..]
                .iter()
                .map(|&p| {
                    let post = &self.posts[p];
                    HistoryEntry { author: post.author.map(|a| self.roster[a].agent_name.as_str()), text: &post.text }
                })
                .collect(),
            rumor_list: &self.config.rumors,
        }
    }

    /// Runs one iteration with an agent drawn by the activation strategy.
    pub fn step<B: Backend + ?Sized>(&mut self, backend: &mut B) -> Result<StepRecord, EngineError> {
        let agent = select_agent(&self.graph, self.config.activation_strategy, &mut self.activation);
        self.step_agent(agent, backend)
    }

    /// Runs one iteration for a given agent.
    pub fn step_agent<B: Backend + ?Sized>(
        &mut self,
        agent: usize,
        backend: &mut B,
    ) -> Result<StepRecord, EngineError> {
        self.iteration += 1;
        let iteration = self.iteration;
        let attempts = match self.config.on_parse_error {
            ParseErrorPolicy::RetryOnceThenSkip => 2,
            ParseErrorPolicy::Abort => 1,
        };

        let (prompt_hash, parsed, parse_errors) = {
            let ctx = self.context(agent);
            let prompt = build_prompt(&ctx, &self.dict);
            let request = BackendRequest { iteration, prompt: &prompt, context: &ctx };
            let mut parse_errors = Vec::new();
            let mut parsed: Option<AgentAction> = None;
            for _ in 0..attempts {
                let reply = backend.respond(&request).map_err(|source| EngineError::Backend { iteration, source })?;
                match parse_response(&reply.text, &self.config.rumors) {
                    Ok(action) => {
                        parsed = Some(action);
                        break;
                    }
                    Err(e) => {
                        if self.config.on_parse_error == ParseErrorPolicy::Abort {
                            return Err(EngineError::Parse { iteration, source: e });
                        }
                        parse_errors.push(e.code().to_owned());
                    }
                }
            }
            (prompt.request_hash(), parsed, parse_errors)
        };

        let Some(action) = parsed else {
            return Ok(StepRecord {
                iteration,
                agent,
                prompt_hash,
                outcome: StepOutcome::Skipped,
                post: None,
                checks: None,
                belief_deltas: Vec::new(),
                warnings: Vec::new(),
                parse_errors,
            });
        };

        let post_id = self.posts.len();
        self.posts.push(Post { author: Some(agent), text: action.post_text.clone() });
        self.histories[agent].push(post_id);
        for &friend in self.graph.neighbors(agent) {
            self.histories[friend].push(post_id);
        }

        let mut belief_deltas = Vec::new();
        for (j, &check) in action.checks.iter().enumerate() {
            let from = self.beliefs.get(agent, j);
            let to = if check { 1.0 } else { 0.0 };
            if from != to {
                belief_deltas.push(BeliefDelta { rumor: j, from, to });
            }
        }
        self.beliefs.set_row_from_checks(agent, &action.checks);
        let warnings = mention_consistency(&action.post_text, &action.checks, &self.config.rumors);

        Ok(StepRecord {
            iteration,
            agent,
            prompt_hash,
            outcome: StepOutcome::Applied,
            post: Some(action.post_text),
            checks: Some(action.checks),
            belief_deltas,
            warnings,
            parse_errors,
        })
    }

    pub fn summary(&self, steps: &[StepRecord]) -> TraceSummary {
        TraceSummary {
            steps: steps.len() as u64,
            skipped: steps.iter().filter(|s| s.outcome == StepOutcome::Skipped).count() as u64,
            final_beliefs: self.beliefs.rows(),
        }
    }
}

/// Runs a full simulation on a prepared graph and roster, streaming trace
/// lines to `sink` (flushed per line) when given.
pub fn run_with<B: Backend + ?Sized>(
    graph: Graph,
    roster: Vec<Persona>,
    config: &SimulationConfig,
    backend: &mut B,
    mut sink: Option<&mut dyn Write>,
) -> Result<SimulationTrace, EngineError> {
    let mut writer = sink.as_mut().map(|s| TraceWriter::new(&mut **s));
    let mut sim = Simulation::initialize(graph, roster, config)?;
    sim.seed_rumors()?;
    let header = sim.header();
    if let Some(w) = writer.as_mut() {
        w.write(&TraceLine::Header(header.clone()))?;
        for s in &sim.seeds {
            w.write(&TraceLine::Seed(s.clone()))?;
        }
    }
    let mut steps = Vec::with_capacity(config.iterations as usize);
    for _ in 0..config.iterations {
        match sim.step(backend) {
            Ok(record) => {
                if let Some(w) = writer.as_mut() {
                    w.write(&TraceLine::Step(record.clone()))?;
                }
                steps.push(record);
            }
            Err(e) => {
                if let Some(w) = writer.as_mut() {
                    w.write(&TraceLine::Error { iteration: sim.iteration, message: e.to_string() })?;
                }
                return Err(e);
            }
        }
    }
    let summary = sim.summary(&steps);
    if let Some(w) = writer.as_mut() {
        w.write(&TraceLine::Summary(summary.clone()))?;
    }
    Ok(SimulationTrace { header, seeds: sim.seeds.clone(), steps, summary })
}

/// Resolves the network and roster, builds the configured backend and runs.
pub fn run(config: &SimulationConfig, sink: Option<&mut dyn Write>) -> Result<SimulationTrace, EngineError> {
    config.validate()?;
    let mut backend = config.backend.build().map_err(|e| match e {
        BackendError::Config(m) => EngineError::Config(m),
        other => EngineError::Backend { iteration: 0, source: other },
    })?;
    let (graph, roster) = config.resolve()?;
    run_with(graph, roster, config, &mut backend, sink)
}
