//! End-to-end runs: compile a model, solve the flat CSP, map the flat
//! solution back to a policy, and cross-check against the brute-force oracle.

use std::time::Instant;

use thiserror::Error;

use crate::compile::{compile_with, CompileError, CompileOptions, CompileOutput};
use crate::exec::ExecMode;
use crate::model::StochasticModel;
use crate::oracle::{
    evaluate_policy, is_feasible, objective_value, oracle_solve, OracleError, OracleOptions,
    OracleOutcome, Policy, PolicySlots,
};
use crate::rational::Rational;
use crate::scenario::{ScenarioTree, DEFAULT_SCENARIO_CAP};
use crate::solver::{solve_opt, solve_sat, SolveResult};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub max_scenarios: usize,
    pub max_policies: u128,
    pub mode: ExecMode,
}

impl Default for PipelineOptions {
    fn default() -> PipelineOptions {
        PipelineOptions {
            max_scenarios: DEFAULT_SCENARIO_CAP,
            max_policies: crate::oracle::DEFAULT_POLICY_CAP,
            mode: ExecMode::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PipelineStats {
    pub scenarios: usize,
    pub flat_vars: usize,
    pub flat_constraints: usize,
    pub search_nodes: u64,
    pub wall_ms: u64,
}

/// A solved model: the policy (aligned with [`PolicySlots`]) and the exact
/// objective value when an objective is declared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSolution {
    pub policy: Policy,
    pub objective: Option<Rational>,
}

#[derive(Debug)]
pub struct ModelSolve {
    /// `None` when the compiled CSP is unsatisfiable (no feasible policy).
    pub solution: Option<ModelSolution>,
    pub stats: PipelineStats,
    pub slots: PolicySlots,
    pub compiled: CompileOutput,
}

/// Reads the policy out of a flat solution through the variable table.
fn extract_policy(slots: &PolicySlots, compiled: &CompileOutput, values: &[i64]) -> Policy {
    let values = slots
        .slots()
        .iter()
        .map(|slot| values[compiled.table.lookup(slot.decision, slot.node).0])
        .collect();
    Policy { values }
}

/// Full pipeline: compile, solve (optimizing when an objective is present),
/// and map the flat solution back to a policy.
pub fn solve_model(
    model: &StochasticModel,
    options: &PipelineOptions,
) -> Result<ModelSolve, PipelineError> {
    let start = Instant::now();
    let compiled = compile_with(
        model,
        &CompileOptions {
            max_scenarios: options.max_scenarios,
            mode: options.mode,
        },
    )?;
    let result: SolveResult = if compiled.csp.objective.is_some() {
        solve_opt(&compiled.csp)
    } else {
        solve_sat(&compiled.csp)
    };
    let slots = PolicySlots::new(model, &compiled.tree);
    let solution = result.solution.as_ref().map(|sol| ModelSolution {
        policy: extract_policy(&slots, &compiled, &sol.values),
        objective: sol.objective,
    });
    let stats = PipelineStats {
        scenarios: compiled.tree.scenario_count(),
        flat_vars: compiled.csp.var_count(),
        flat_constraints: compiled.csp.constraints.len(),
        search_nodes: result.stats.nodes,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    Ok(ModelSolve {
        solution,
        stats,
        slots,
        compiled,
    })
}

/// Feasibility-and-value summary of one route (pipeline or oracle).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Option<Rational>),
    Infeasible,
}

impl std::fmt::Display for Feasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Feasibility::Feasible(Some(v)) => write!(f, "feasible, objective {v}"),
            Feasibility::Feasible(None) => write!(f, "feasible"),
            Feasibility::Infeasible => write!(f, "infeasible"),
        }
    }
}

#[derive(Debug)]
pub struct VerifyReport {
    pub oracle: Feasibility,
    pub pipeline: Feasibility,
    /// Exact agreement on feasibility and optimal value, with the solver's
    /// policy independently re-evaluated against every constraint.
    pub agreement: bool,
    /// Human-readable mismatch details; empty on agreement.
    pub notes: Vec<String>,
    pub stats: PipelineStats,
}

/// Runs both the compile-and-solve pipeline and the brute-force oracle and
/// compares them exactly.
pub fn verify_model(
    model: &StochasticModel,
    options: &PipelineOptions,
) -> Result<VerifyReport, PipelineError> {
    let solve = solve_model(model, options)?;
    let oracle = oracle_solve(
        model,
        &OracleOptions {
            max_policies: options.max_policies,
            max_scenarios: options.max_scenarios,
            mode: options.mode,
        },
    )?;

    let pipeline_side = match &solve.solution {
        Some(s) => Feasibility::Feasible(s.objective),
        None => Feasibility::Infeasible,
    };
    let oracle_side = match &oracle {
        OracleOutcome::Feasible { objective, .. } => Feasibility::Feasible(*objective),
        OracleOutcome::Infeasible => Feasibility::Infeasible,
    };

    let mut notes = Vec::new();
    match (&oracle_side, &pipeline_side) {
        (Feasibility::Feasible(ov), Feasibility::Feasible(pv)) => {
            if ov != pv {
                notes.push(format!(
                    "objective mismatch: oracle {}, pipeline {}",
                    Feasibility::Feasible(*ov),
                    Feasibility::Feasible(*pv)
                ));
            }
        }
        (Feasibility::Infeasible, Feasibility::Infeasible) => {}
        _ => notes.push("feasibility mismatch".to_string()),
    }

    // The solver's policy must independently satisfy every constraint and
    // reproduce the reported objective value.
    if let Some(solution) = &solve.solution {
        let eval = evaluate_policy(model, &solve.compiled.tree, &solve.slots, &solution.policy);
        if !is_feasible(model, &eval) {
            notes.push("solver policy fails direct evaluation".to_string());
        }
        if let (Some(obj), Some(stats)) = (&model.objective, &eval.objective) {
            let direct = objective_value(obj, stats);
            if Some(direct) != solution.objective {
                notes.push(format!(
                    "solver policy evaluates to {direct}, reported {}",
                    solution
                        .objective
                        .map_or_else(|| "none".to_string(), |v| v.to_string())
                ));
            }
        }
    }

    Ok(VerifyReport {
        agreement: notes.is_empty(),
        oracle: oracle_side,
        pipeline: pipeline_side,
        notes,
        stats: solve.stats,
    })
}

/// Comma-joined `name=value` form of a node's stochastic history.
pub fn history_label(
    model: &StochasticModel,
    tree: &ScenarioTree,
    node: crate::scenario::NodeId,
) -> String {
    tree.node(node)
        .history
        .iter()
        .map(|&(si, value)| format!("{}={}", model.stochastics[si].name, value))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model;

    fn m1() -> StochasticModel {
        parse_model(
            "int x in 0..1 stage 1;\n\
             stoch w in {0:1/2, 1:1/2} stage 1;\n\
             chance(1/2) x = w;\n\
             maximize expected x + w;\n",
        )
        .unwrap()
    }

    #[test]
    fn m1_solves_to_three_halves() {
        let solve = solve_model(&m1(), &PipelineOptions::default()).unwrap();
        let solution = solve.solution.unwrap();
        assert_eq!(solution.objective, Some(Rational::new(3, 2)));
        assert_eq!(solution.policy.values, vec![1]);
        assert_eq!(solve.stats.scenarios, 2);
    }

    #[test]
    fn m2_verifies() {
        let model = parse_model(
            "int x1 in 0..2 stage 1;\n\
             stoch w1 in {1:1/3, 2:2/3} stage 1;\n\
             int x2 in 0..2 stage 2;\n\
             x1 + x2 >= w1;\n\
             minimize expected x1 + x2;\n",
        )
        .unwrap();
        let report = verify_model(&model, &PipelineOptions::default()).unwrap();
        assert!(report.agreement, "notes: {:?}", report.notes);
        assert_eq!(
            report.pipeline,
            Feasibility::Feasible(Some(Rational::new(5, 3)))
        );
        assert_eq!(report.oracle, report.pipeline);
    }

    #[test]
    fn infeasible_model_agrees_on_both_routes() {
        let model = parse_model(
            "int x in 0..1 stage 1;\n\
             stoch w in {0:1/2, 1:1/2} stage 1;\n\
             chance(3/4) x = w;\n\
             maximize expected x + w;\n",
        )
        .unwrap();
        let report = verify_model(&model, &PipelineOptions::default()).unwrap();
        assert!(report.agreement);
        assert_eq!(report.oracle, Feasibility::Infeasible);
        assert_eq!(report.pipeline, Feasibility::Infeasible);
    }

    #[test]
    fn satisfaction_only_model() {
        let model = parse_model("int x in 0..3 stage 1;\nx >= 2;\n").unwrap();
        let report = verify_model(&model, &PipelineOptions::default()).unwrap();
        assert!(report.agreement);
        assert_eq!(report.pipeline, Feasibility::Feasible(None));
    }

    #[test]
    fn forced_equal_scenario_values_give_zero_spread() {
        // The body is the shared stage-1 decision, so every scenario value
        // is identical and the optimal spread is 0.
        let model = parse_model(
            "int x in 0..3 stage 1;\n\
             stoch w in {0:1/2, 1:1/2} stage 1;\n\
             x >= 1;\n\
             minimize spread x;\n",
        )
        .unwrap();
        let solve = solve_model(&model, &PipelineOptions::default()).unwrap();
        assert_eq!(solve.solution.unwrap().objective, Some(Rational::ZERO));
    }

    #[test]
    fn history_labels() {
        let model = parse_model(
            "stoch w1 in {3:1/2, 4:1/2} stage 1;\n\
             int x in 0..1 stage 2;\n\
             x >= 0;\n",
        )
        .unwrap();
        let solve = solve_model(&model, &PipelineOptions::default()).unwrap();
        let labels: Vec<String> = solve
            .slots
            .slots()
            .iter()
            .map(|s| history_label(&model, &solve.compiled.tree, s.node))
            .collect();
        assert_eq!(labels, vec!["w1=3", "w1=4"]);
    }
}
