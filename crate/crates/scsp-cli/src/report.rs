//! Machine-readable run reports: one struct rendered as text or JSON with a
//! stable field order, so identical runs diff cleanly.

use serde::Serialize;

use scsp::model::StochasticModel;
use scsp::pipeline::{history_label, ModelSolve, PipelineStats};

#[derive(Debug, Serialize)]
pub struct PolicyLine {
    pub var: String,
    pub history: String,
    pub value: i64,
}

#[derive(Debug, Serialize)]
pub struct Stats {
    pub scenarios: usize,
    pub flat_vars: usize,
    pub flat_constraints: usize,
    pub search_nodes: u64,
    pub wall_ms: u64,
}

impl Stats {
    fn from_pipeline(stats: &PipelineStats, stable: bool) -> Stats {
        Stats {
            scenarios: stats.scenarios,
            flat_vars: stats.flat_vars,
            flat_constraints: stats.flat_constraints,
            search_nodes: stats.search_nodes,
            wall_ms: if stable { 0 } else { stats.wall_ms },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    /// `ok`, `unsat` (satisfaction model), or `infeasible` (optimization).
    pub status: String,
    /// Reduced exact fraction, e.g. `3/2`; absent without an objective.
    pub objective: Option<String>,
    pub policy: Vec<PolicyLine>,
    pub stats: Stats,
}

impl RunReport {
    /// Builds the report for a finished solve. `stable` zeroes wall-clock
    /// fields so byte-identical reruns can be asserted.
    pub fn from_solve(model: &StochasticModel, solve: &ModelSolve, stable: bool) -> RunReport {
        match &solve.solution {
            Some(solution) => {
                let policy = solve
                    .slots
                    .slots()
                    .iter()
                    .zip(&solution.policy.values)
                    .map(|(slot, &value)| PolicyLine {
                        var: model.decisions[slot.decision].name.clone(),
                        history: history_label(model, &solve.compiled.tree, slot.node),
                        value,
                    })
                    .collect();
                RunReport {
                    status: "ok".to_string(),
                    objective: solution.objective.map(|v| v.to_string()),
                    policy,
                    stats: Stats::from_pipeline(&solve.stats, stable),
                }
            }
            None => RunReport {
                status: if model.objective.is_some() {
                    "infeasible"
                } else {
                    "unsat"
                }
                .to_string(),
                objective: None,
                policy: Vec::new(),
                stats: Stats::from_pipeline(&solve.stats, stable),
            },
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("status: {}\n", self.status));
        if let Some(obj) = &self.objective {
            out.push_str(&format!("objective: {}\n", decorate_fraction(obj)));
        }
        if !self.policy.is_empty() {
            out.push_str("policy:\n");
            for line in &self.policy {
                out.push_str(&format!(
                    "  {} [{}] = {}\n",
                    line.var, line.history, line.value
                ));
            }
        }
        out.push_str(&format!(
            "stats: scenarios={} flat_vars={} flat_constraints={} search_nodes={} wall_ms={}\n",
            self.stats.scenarios,
            self.stats.flat_vars,
            self.stats.flat_constraints,
            self.stats.search_nodes,
            self.stats.wall_ms
        ));
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string(self).expect("report serializes");
        out.push('\n');
        out
    }
}

/// `3/2` becomes `3/2 (~1.500000)`; whole numbers stay bare.
pub fn decorate_fraction(fraction: &str) -> String {
    match fraction.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.parse().unwrap_or(f64::NAN);
            let den: f64 = den.parse().unwrap_or(f64::NAN);
            format!("{fraction} (~{:.6})", num / den)
        }
        None => fraction.to_string(),
    }
}
