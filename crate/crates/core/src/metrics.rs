//! Affected fractions, their maxima and comparison matrices, computed from
//! traces alone.
//!
//! CSV formats:
//! - series: `config,rumor,iteration,fraction` (long, one row per point)
//! - matrix: `config,rumor_1,...,rumor_L` with max percentages, 1 decimal
//!
//! The JSON summary is an array of `{config, rumor, text, max_fraction,
//! max_percent, max_iteration, final_fraction}` objects.

use serde::Serialize;

use crate::engine::{BeliefMatrix, SimulationTrace, StepOutcome};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("trace {label:?} has a different rumor list than trace {first:?}")]
    RumorMismatch { first: String, label: String },
    #[error("no traces to aggregate")]
    Empty,
}

/// Share of agents whose belief in `rumor` is at least `threshold`.
pub fn affected_fraction(beliefs: &BeliefMatrix, rumor: usize, threshold: f64) -> f64 {
    if beliefs.agents() == 0 {
        return 0.0;
    }
    beliefs.believers(rumor, threshold) as f64 / beliefs.agents() as f64
}

/// Per-rumor affected fraction at t = 0 (after seeding) and after every step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffectedSeries {
    pub rumors: Vec<String>,
    /// `points[j][t]`, with `t` running over `0..=steps`.
    pub points: Vec<Vec<f64>>,
}

impl AffectedSeries {
    pub fn len(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Maximum and the first iteration reaching it.
    pub fn max(&self, rumor: usize) -> (f64, u64) {
        let mut best = (0.0, 0);
        for (t, &v) in self.points[rumor].iter().enumerate() {
            if v > best.0 {
                best = (v, t as u64);
            }
        }
        best
    }
}

pub fn build_series(trace: &SimulationTrace, threshold: f64) -> AffectedSeries {
    let n = trace.header.node_count;
    let l = trace.header.rumors.len();
    let mut beliefs = BeliefMatrix::zeros(n, l);
    let mut counts = vec![0usize; l];
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let mut points: Vec<Vec<f64>> = counts.iter().map(|&c| vec![frac(c)]).collect();
    for step in &trace.steps {
        if let (StepOutcome::Applied, Some(checks)) = (step.outcome, &step.checks) {
            for (j, &c) in checks.iter().enumerate() {
                let before = beliefs.get(step.agent, j) >= threshold;
                let value = if c { 1.0 } else { 0.0 };
                beliefs.set(step.agent, j, value);
                let after = value >= threshold;
                match (before, after) {
                    (false, true) => counts[j] += 1,
                    (true, false) => counts[j] -= 1,
                    _ => {}
                }
            }
        }
        for (j, p) in points.iter_mut().enumerate() {
            p.push(frac(counts[j]));
        }
    }
    AffectedSeries { rumors: trace.header.rumors.clone(), points }
}

pub fn max_affected(trace: &SimulationTrace, rumor: usize, threshold: f64) -> (f64, u64) {
    build_series(trace, threshold).max(rumor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixCell {
    pub max_fraction: f64,
    pub max_iteration: u64,
    pub final_fraction: f64,
}

/// Rows are configurations, columns rumors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonMatrix {
    pub rows: Vec<String>,
    pub rumors: Vec<String>,
    pub cells: Vec<Vec<MatrixCell>>,
}

pub fn aggregate_matrix(
    traces: &[(String, &SimulationTrace)],
    threshold: f64,
) -> Result<ComparisonMatrix, MetricsError> {
    let (first_label, first) = traces.first().ok_or(MetricsError::Empty)?;
    let rumors = first.header.rumors.clone();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (label, trace) in traces {
        if trace.header.rumors != rumors {
            return Err(MetricsError::RumorMismatch { first: first_label.clone(), label: label.clone() });
        }
        let series = build_series(trace, threshold);
        rows.push(label.clone());
        cells.push(
            (0..rumors.len())
                .map(|j| {
                    let (max_fraction, max_iteration) = series.max(j);
                    let final_fraction = *series.points[j].last().expect("series has t = 0");
                    MatrixCell { max_fraction, max_iteration, final_fraction }
                })
                .collect(),
        );
    }
    Ok(ComparisonMatrix { rows, rumors, cells })
}

/// Fraction rendered as a percentage with one decimal.
pub fn percent(fraction: f64) -> String {
    format!("{:.1}", fraction * 100.0)
}

pub fn rumor_label(j: usize) -> String {
    format!("rumor_{}", j + 1)
}

pub fn series_csv<'a>(series: impl IntoIterator<Item = (&'a str, &'a AffectedSeries)>) -> String {
    let mut out = String::from("config,rumor,iteration,fraction\n");
    for (label, s) in series {
        for (j, pts) in s.points.iter().enumerate() {
            for (t, v) in pts.iter().enumerate() {
                out.push_str(&format!("{},{},{t},{v}\n", csv_field(label), rumor_label(j)));
            }
        }
    }
    out
}

impl ComparisonMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config");
        for j in 0..self.rumors.len() {
            out.push(',');
            out.push_str(&rumor_label(j));
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(&csv_field(label));
            for c in row {
                out.push(',');
                out.push_str(&percent(c.max_fraction));
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let mut items = Vec::new();
        for (label, row) in self.rows.iter().zip(&self.cells) {
            for (j, c) in row.iter().enumerate() {
                items.push(serde_json::json!({
                    "config": label,
                    "rumor": rumor_label(j),
                    "text": self.rumors[j],
                    "max_fraction": c.max_fraction,
                    "max_percent": percent(c.max_fraction),
                    "max_iteration": c.max_iteration,
                    "final_fraction": c.final_fraction,
                }));
            }
        }
        serde_json::Value::Array(items)
    }

    /// Mean of the max fractions over rows that share `key(label)`, groups
    /// in order of first appearance.
    pub fn mean_rows(&self, key: impl Fn(&str) -> String) -> Vec<(String, Vec<f64>)> {
        let mut groups: Vec<(String, Vec<f64>, usize)> = Vec::new();
        for (label, row) in self.rows.iter().zip(&self.cells) {
            let k = key(label);
            let idx = match groups.iter().position(|g| g.0 == k) {
                Some(i) => i,
                None => {
                    groups.push((k, vec![0.0; self.rumors.len()], 0));
                    groups.len() - 1
                }
            };
            let g = &mut groups[idx];
            for (acc, c) in g.1.iter_mut().zip(row) {
                *acc += c.max_fraction;
            }
            g.2 += 1;
        }
        groups.into_iter().map(|(k, sums, n)| (k, sums.into_iter().map(|s| s / n as f64).collect())).collect()
    }

    pub fn max_row(&self, row: usize) -> Vec<f64> {
        self.cells[row].iter().map(|c| c.max_fraction).collect()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{StepRecord, TraceHeader, TraceSummary, TRACE_SCHEMA};
    use proptest::prelude::*;

    fn step(iteration: u64, agent: usize, checks: Option<Vec<bool>>) -> StepRecord {
        StepRecord {
            iteration,
            agent,
            prompt_hash: String::new(),
            outcome: if checks.is_some() { StepOutcome::Applied } else { StepOutcome::Skipped },
            post: checks.as_ref().map(|_| "x".into()),
            checks,
            belief_deltas: vec![],
            warnings: vec![],
            parse_errors: vec![],
        }
    }

    pub(crate) fn trace(n: usize, rumors: usize, steps: Vec<StepRecord>) -> SimulationTrace {
        let header = TraceHeader {
            schema: TRACE_SCHEMA.into(),
            master_seed: 0,
            iterations: steps.len() as u64,
            node_count: n,
            edge_count: 0,
            rumors: (0..rumors).map(|j| format!("r{j}")).collect(),
            belief_threshold: 0.5,
            init_strategy: Default::default(),
            activation_strategy: Default::default(),
            agent_names: vec![String::new(); n],
        };
        let mut t = SimulationTrace {
            header,
            seeds: vec![],
            summary: TraceSummary { steps: steps.len() as u64, skipped: 0, final_beliefs: vec![] },
            steps,
        };
        t.summary.final_beliefs = t.replay_beliefs().rows();
        t
    }

    #[test]
    fn fraction_examples() {
        let b = BeliefMatrix::zeros(10, 2);
        assert_eq!(affected_fraction(&b, 0, 0.5), 0.0);
        let mut b = b;
        for i in 0..5 {
            b.set(i, 1, 1.0);
        }
        assert_eq!(affected_fraction(&b, 1, 0.5), 0.5);
    }

    #[test]
    fn rise_and_fall() {
        let t = trace(
            4,
            1,
            vec![
                step(1, 0, Some(vec![true])),
                step(2, 1, Some(vec![true])),
                step(3, 2, None),
                step(4, 1, Some(vec![false])),
            ],
        );
        let s = build_series(&t, 0.5);
        assert_eq!(s.points[0], vec![0.0, 0.25, 0.5, 0.5, 0.25]);
        assert_eq!(max_affected(&t, 0, 0.5), (0.5, 2));
    }

    #[test]
    fn silent_trace_maxes_at_zero() {
        let t = trace(3, 2, vec![step(1, 0, Some(vec![false, false]))]);
        assert_eq!(max_affected(&t, 1, 0.5), (0.0, 0));
        assert_eq!(build_series(&t, 0.5).len(), 2);
    }

    #[test]
    fn matrix_shapes_and_errors() {
        let a = trace(2, 2, vec![step(1, 0, Some(vec![true, false]))]);
        let b = trace(2, 3, vec![]);
        let m = aggregate_matrix(&[("a".into(), &a)], 0.5).unwrap();
        assert_eq!(m.max_row(0), vec![0.5, 0.0]);
        let c = trace(2, 2, vec![step(1, 1, Some(vec![true, true]))]);
        let m2 = aggregate_matrix(&[("a_seed1".into(), &a), ("a_seed2".into(), &c)], 0.5).unwrap();
        assert_eq!(m2.mean_rows(|l| l.split("_seed").next().unwrap().into()), vec![("a".into(), vec![0.5, 0.25])]);
        assert_eq!(m.to_csv(), "config,rumor_1,rumor_2\na,50.0,0.0\n");
        assert_eq!(m.summary_json()[0]["max_percent"], "50.0");
        let err = aggregate_matrix(&[("a".into(), &a), ("b".into(), &b)], 0.5).unwrap_err();
        assert!(matches!(err, MetricsError::RumorMismatch { .. }));
        assert_eq!(aggregate_matrix(&[], 0.5).unwrap_err(), MetricsError::Empty);
    }

    #[test]
    fn series_csv_is_long_format() {
        let t = trace(2, 1, vec![step(1, 1, Some(vec![true]))]);
        let s = build_series(&t, 0.5);
        assert_eq!(
            series_csv([("x,y", &s)]),
            "config,rumor,iteration,fraction\n\"x,y\",rumor_1,0,0\n\"x,y\",rumor_1,1,0.5\n"
        );
    }

    fn arb_trace() -> impl Strategy<Value = SimulationTrace> {
        (1usize..6, 1usize..4).prop_flat_map(|(n, l)| {
            prop::collection::vec((0..n, prop::option::weighted(0.8, prop::collection::vec(any::<bool>(), l))), 0..40)
                .prop_map(move |raw| {
                    let steps = raw.into_iter().enumerate().map(|(i, (a, c))| step(i as u64 + 1, a, c)).collect();
                    trace(n, l, steps)
                })
        })
    }

    proptest! {
        #[test]
        fn threshold_monotone(rows in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 3), 1..8), lo in 0.01f64..1.0, hi in 0.01f64..1.0) {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let b = BeliefMatrix::from_rows(&rows);
            for j in 0..3 {
                prop_assert!(affected_fraction(&b, j, hi) <= affected_fraction(&b, j, lo));
            }
        }

        #[test]
        fn series_agrees_with_snapshots(t in arb_trace()) {
            let s = build_series(&t, 0.5);
            prop_assert_eq!(s.len(), t.steps.len() + 1);
            let finals = t.final_beliefs();
            for j in 0..t.header.rumors.len() {
                prop_assert_eq!(*s.points[j].last().unwrap(), affected_fraction(&finals, j, 0.5));
                let top = s.points[j].iter().cloned().fold(0.0, f64::max);
                prop_assert_eq!(max_affected(&t, j, 0.5).0, top);
                prop_assert!(s.points[j].iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}
