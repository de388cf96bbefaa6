//! Robust variational problems over discretized spaces.
//!
//! A problem fixes, per cell and action, an objective integrand plus cost
//! integrands (coordinate 0 of the instance's integrand is the objective,
//! coordinates 1.. are the costs), a budget per cost, and a family of
//! densities indexed by a parameter grid. Sought is a decision maximizing
//! the worst-case (over parameters) objective integral subject to every
//! cost integral staying within budget for every parameter.
//!
//! The relaxation optimizes over randomized decisions via an epigraph
//! linear program. Purification then rounds the relaxed optimum over the
//! partition induced by the density rows, and the solution carries an
//! explicit `epsilon` valid simultaneously for the objective drop and the
//! budget overshoot of the pure decision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::pairwise_sum;
use crate::lp::{self, Constraint, LinearProgram, LpError, Relation, Sense, SolveStatus};
use crate::measure::{blocks_from_densities, DensityFamily, MeasureError};
use crate::purify::{
    moment, purify, DecisionInstance, InstanceFile, PureDecision, PurifyError, PurifyReport,
    RandomizedDecision,
};

/// Default tolerance for grouping density rows into blocks.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;
/// Default tolerance for how precisely densities must integrate to one.
pub const DEFAULT_DENSITY_TOL: f64 = 1e-9;
/// Candidate cap for exhaustive search.
pub const BRUTE_FORCE_CAP: f64 = 1e6;

#[derive(Debug, Error)]
pub enum RvpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("budget constraints admit no decision")]
    InfeasibleConstraints,
    #[error("relaxation is unbounded, the epigraph row set must be broken")]
    UnboundedRelaxation,
    #[error("{size:.3e} pure decisions exceed the exhaustive-search cap")]
    TooLarge { size: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Purify(#[from] PurifyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Robust problem data: instance integrands, cost budgets, density grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvpProblem {
    pub instance: DecisionInstance,
    pub budgets: Vec<f64>,
    pub densities: DensityFamily,
}

impl RvpProblem {
    pub fn new(
        instance: DecisionInstance,
        budgets: Vec<f64>,
        densities: DensityFamily,
    ) -> Result<Self, RvpError> {
        if instance.n() != budgets.len() + 1 {
            return Err(RvpError::InvalidProblem(format!(
                "integrand has {} coordinates but {} budgets; expected one objective plus one coordinate per budget",
                instance.n(),
                budgets.len()
            )));
        }
        if budgets.iter().any(|b| !b.is_finite()) {
            return Err(RvpError::InvalidProblem("non-finite budget".into()));
        }
        if densities.values.len() != instance.space().len() {
            return Err(RvpError::InvalidProblem(format!(
                "{} density rows for {} cells",
                densities.values.len(),
                instance.space().len()
            )));
        }
        if densities.num_params() == 0 {
            return Err(RvpError::InvalidProblem("empty parameter grid".into()));
        }
        Ok(RvpProblem {
            instance,
            budgets,
            densities,
        })
    }

    pub fn from_file(file: InstanceFile) -> Result<Self, RvpError> {
        let budgets = file
            .budgets
            .clone()
            .ok_or_else(|| RvpError::InvalidProblem("missing budgets".into()))?;
        let densities = file
            .densities
            .clone()
            .ok_or_else(|| RvpError::InvalidProblem("missing densities".into()))?;
        let instance = file.into_decision_instance()?;
        RvpProblem::new(instance, budgets, densities)
    }

    pub fn to_file(&self) -> InstanceFile {
        let mut file = InstanceFile::from(&self.instance);
        file.budgets = Some(self.budgets.clone());
        file.densities = Some(self.densities.clone());
        file
    }

    pub fn num_costs(&self) -> usize {
        self.budgets.len()
    }

    pub fn num_params(&self) -> usize {
        self.densities.num_params()
    }
}

/// Objective and cost integrals of one decision across the whole grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamEvaluation {
    /// Objective integral per parameter.
    pub objective_per_param: Vec<f64>,
    /// Worst (smallest) objective integral.
    pub objective_value: f64,
    /// First parameter attaining the worst objective.
    pub objective_worst_param: usize,
    /// Cost integrals, `cost_matrix[i][p]`.
    pub cost_matrix: Vec<Vec<f64>>,
    /// Worst (largest) cost per budget.
    pub cost_values: Vec<f64>,
    /// First parameter attaining each worst cost.
    pub cost_worst_params: Vec<usize>,
    /// Largest budget overshoot, zero when every cost is within budget.
    pub max_violation: f64,
    /// Whether every cost stays within budget up to the solver tolerance.
    pub feasible: bool,
}

fn evaluate_rows(problem: &RvpProblem, rows: &[Vec<f64>]) -> ParamEvaluation {
    let space = problem.instance.space();
    let cells = space.len();
    let np = problem.num_params();
    let m = problem.num_costs();

    let mut objective_per_param = Vec::with_capacity(np);
    let mut cost_matrix = vec![Vec::with_capacity(np); m];
    let mut terms = vec![0.0; cells];
    for p in 0..np {
        for (c, t) in terms.iter_mut().enumerate() {
            *t = space.weight(c) * problem.densities.value(c, p) * rows[c][0];
        }
        objective_per_param.push(pairwise_sum(&terms));
        for (i, costs) in cost_matrix.iter_mut().enumerate() {
            for (c, t) in terms.iter_mut().enumerate() {
                *t = space.weight(c) * problem.densities.value(c, p) * rows[c][i + 1];
            }
            costs.push(pairwise_sum(&terms));
        }
    }

    let mut objective_worst_param = 0;
    for (p, &v) in objective_per_param.iter().enumerate() {
        if v < objective_per_param[objective_worst_param] {
            objective_worst_param = p;
        }
    }
    let objective_value = objective_per_param[objective_worst_param];

    let mut cost_values = Vec::with_capacity(m);
    let mut cost_worst_params = Vec::with_capacity(m);
    let mut max_violation = 0.0f64;
    for (i, costs) in cost_matrix.iter().enumerate() {
        let mut worst = 0;
        for (p, &v) in costs.iter().enumerate() {
            if v > costs[worst] {
                worst = p;
            }
        }
        cost_values.push(costs[worst]);
        cost_worst_params.push(worst);
        max_violation = max_violation.max(costs[worst] - problem.budgets[i]);
    }

    ParamEvaluation {
        objective_per_param,
        objective_value,
        objective_worst_param,
        cost_matrix,
        cost_values,
        cost_worst_params,
        max_violation,
        feasible: max_violation <= lp::FEAS_TOL,
    }
}

/// Evaluates a randomized decision across the whole parameter grid.
pub fn evaluate(
    problem: &RvpProblem,
    phi: &RandomizedDecision,
) -> Result<ParamEvaluation, RvpError> {
    phi.validate_for(&problem.instance)?;
    Ok(evaluate_rows(problem, &moment(&problem.instance, phi)))
}

/// Evaluates a pure decision; integrals use the chosen rows directly, so a
/// pure decision's numbers carry no mixing arithmetic at all.
pub fn evaluate_pure(
    problem: &RvpProblem,
    pure: &PureDecision,
) -> Result<ParamEvaluation, RvpError> {
    pure.validate_for(&problem.instance)?;
    let rows: Vec<Vec<f64>> = pure
        .choices
        .iter()
        .enumerate()
        .map(|(c, &k)| problem.instance.g_rows(c)[k].clone())
        .collect();
    Ok(evaluate_rows(problem, &rows))
}

/// Builds the epigraph linear program of the relaxation.
///
/// Variables are the per-cell action probabilities in cell-major order
/// followed by one free epigraph variable `t`; rows are one objective row
/// per parameter, one budget row per cost and parameter (cost-major), and
/// one normalization row per cell.
pub fn build_crvp(problem: &RvpProblem) -> LinearProgram {
    let instance = &problem.instance;
    let space = instance.space();
    let cells = space.len();
    let np = problem.num_params();
    let m = problem.num_costs();
    let nv: usize = (0..cells).map(|c| instance.actions()[c].len()).sum::<usize>() + 1;
    let t_col = nv - 1;
    let offsets: Vec<usize> = {
        let mut off = Vec::with_capacity(cells);
        let mut acc = 0;
        for c in 0..cells {
            off.push(acc);
            acc += instance.actions()[c].len();
        }
        off
    };

    let mut constraints = Vec::with_capacity(np + m * np + cells);
    for p in 0..np {
        let mut coeffs = vec![0.0; nv];
        for c in 0..cells {
            let scale = space.weight(c) * problem.densities.value(c, p);
            for (j, row) in instance.g_rows(c).iter().enumerate() {
                coeffs[offsets[c] + j] = scale * row[0];
            }
        }
        coeffs[t_col] = -1.0;
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: 0.0,
        });
    }
    for i in 0..m {
        for p in 0..np {
            let mut coeffs = vec![0.0; nv];
            for c in 0..cells {
                let scale = space.weight(c) * problem.densities.value(c, p);
                for (j, row) in instance.g_rows(c).iter().enumerate() {
                    coeffs[offsets[c] + j] = scale * row[i + 1];
                }
            }
            constraints.push(Constraint {
                coeffs,
                relation: Relation::Le,
                rhs: problem.budgets[i],
            });
        }
    }
    for c in 0..cells {
        let mut coeffs = vec![0.0; nv];
        for j in 0..instance.actions()[c].len() {
            coeffs[offsets[c] + j] = 1.0;
        }
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Eq,
            rhs: 1.0,
        });
    }

    let mut objective = vec![0.0; nv];
    objective[t_col] = 1.0;
    let mut bounds = vec![(0.0, 1.0); nv];
    bounds[t_col] = (f64::NEG_INFINITY, f64::INFINITY);

    LinearProgram {
        sense: Sense::Maximize,
        objective,
        constraints,
        bounds,
    }
}

/// Solves the relaxation and returns the randomized optimum with its
/// grid evaluation. The LP solution is clamped to the simplex and
/// re-evaluated, so the reported value is the decision's own, not the
/// solver's objective.
pub fn solve_crvp(problem: &RvpProblem) -> Result<(RandomizedDecision, ParamEvaluation), RvpError> {
    let lp = build_crvp(problem);
    let sol = lp::solve(&lp)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(RvpError::InfeasibleConstraints),
        SolveStatus::Unbounded => return Err(RvpError::UnboundedRelaxation),
    }

    let instance = &problem.instance;
    let mut probs = Vec::with_capacity(instance.space().len());
    let mut col = 0;
    for c in 0..instance.space().len() {
        let na = instance.actions()[c].len();
        let mut row: Vec<f64> = sol.values[col..col + na]
            .iter()
            .map(|&v| v.clamp(0.0, 1.0))
            .collect();
        let total = pairwise_sum(&row);
        if !(total > 0.0) {
            return Err(RvpError::InvalidProblem(format!(
                "relaxation left cell {c} without probability mass"
            )));
        }
        row.iter_mut().for_each(|v| *v /= total);
        probs.push(row);
        col += na;
    }
    let phi = RandomizedDecision { probs };
    let eval = evaluate(problem, &phi)?;
    Ok((phi, eval))
}

/// Audit trail: per-parameter gaps between the relaxed and pure decisions,
/// all required to stay within the reported epsilon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamAudit {
    /// `|objective_p(pure) - objective_p(relaxed)|` per parameter.
    pub objective_gaps: Vec<f64>,
    pub max_objective_gap: f64,
    /// `cost_gaps[i][p] = |cost_ip(pure) - cost_ip(relaxed)|`.
    pub cost_gaps: Vec<Vec<f64>>,
    pub max_cost_gap: f64,
    pub epsilon: f64,
    pub within_epsilon: bool,
}

fn audit_gaps(relaxed: &ParamEvaluation, pure: &ParamEvaluation, epsilon: f64) -> ParamAudit {
    let objective_gaps: Vec<f64> = relaxed
        .objective_per_param
        .iter()
        .zip(&pure.objective_per_param)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max_objective_gap = objective_gaps.iter().fold(0.0f64, |m, &v| m.max(v));
    let cost_gaps: Vec<Vec<f64>> = relaxed
        .cost_matrix
        .iter()
        .zip(&pure.cost_matrix)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| (a - b).abs()).collect())
        .collect();
    let max_cost_gap = cost_gaps
        .iter()
        .flatten()
        .fold(0.0f64, |m, &v| m.max(v));
    ParamAudit {
        objective_gaps,
        max_objective_gap,
        cost_gaps,
        max_cost_gap,
        epsilon,
        within_epsilon: max_objective_gap <= epsilon && max_cost_gap <= epsilon,
    }
}

/// Options for the full pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvpOptions {
    /// Re-solve once with budgets tightened by the first epsilon so the
    /// purified decision meets the original budgets outright.
    pub strict: bool,
    /// Tolerance for grouping density rows into blocks.
    pub group_tol: f64,
    /// Tolerance for density columns integrating to one.
    pub density_tol: f64,
}

impl Default for RvpOptions {
    fn default() -> Self {
        RvpOptions {
            strict: false,
            group_tol: DEFAULT_GROUP_TOL,
            density_tol: DEFAULT_DENSITY_TOL,
        }
    }
}

/// Relaxed and purified solution with its transfer guarantee.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvpSolution {
    pub relaxed: RandomizedDecision,
    pub pure: PureDecision,
    /// Worst-case objective of the relaxed decision.
    pub relaxed_value: f64,
    /// Worst-case objective of the pure decision; at least
    /// `relaxed_value - epsilon`.
    pub pure_value: f64,
    /// Simultaneous cap on the pure decision's objective drop and on its
    /// budget overshoot relative to the relaxed decision's slack.
    pub epsilon: f64,
    pub objective_worst_param: usize,
    /// Worst cost of the pure decision per budget, at most
    /// `budget + epsilon` each.
    pub constraint_values: Vec<f64>,
    pub constraint_worst_params: Vec<usize>,
    pub relaxed_constraint_values: Vec<f64>,
    /// Budget overshoot of the relaxed decision itself (solver slack).
    pub lp_slack: f64,
    pub audit: ParamAudit,
    pub report: PurifyReport,
    pub blocks: Vec<Vec<usize>>,
    pub strict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tightened_budgets: Option<Vec<f64>>,
}

/// One relax-purify pass against the given budgets.
fn solve_pass(
    problem: &RvpProblem,
    blocks: &[Vec<usize>],
    opts: &RvpOptions,
) -> Result<
    (
        RandomizedDecision,
        ParamEvaluation,
        PureDecision,
        ParamEvaluation,
        PurifyReport,
        f64,
    ),
    RvpError,
> {
    let (phi, relaxed_eval) = solve_crvp(problem)?;
    let (pure, report) = purify(&problem.instance, &phi, blocks)?;
    let pure_eval = evaluate_pure(problem, &pure)?;

    // Moment transfer: for any parameter, integrating the decision change
    // against w * density is a density-weighted sum of block residuals.
    // Two sound caps: the largest density times the summed weighted
    // residual bounds, or the largest per-block bound times the integral
    // of the density, inflated by the integration defect and the
    // within-block density variation the grouping tolerance allows.
    let defect = problem.densities.integration_defect(problem.instance.space());
    let eps_a = problem.densities.max_value() * report.global_bound;
    let max_block_bound = report.blocks.iter().fold(0.0f64, |m, b| m.max(b.bound));
    let eps_b = max_block_bound * (1.0 + defect + opts.group_tol);
    let dev_terms: Vec<f64> = report
        .blocks
        .iter()
        .map(|b| b.weight * b.max_spread)
        .collect();
    let group_term = opts.group_tol * pairwise_sum(&dev_terms);
    let lp_slack = relaxed_eval.max_violation;
    let epsilon = eps_a.min(eps_b) + group_term + lp_slack;

    Ok((phi, relaxed_eval, pure, pure_eval, report, epsilon))
}

/// Full pipeline: relax, group blocks from the density rows, purify, and
/// wrap the outcome with its epsilon guarantee. With `strict` the budgets
/// are tightened by the first pass's epsilon and the problem re-solved, so
/// the purified decision satisfies the original budgets themselves.
pub fn solve_rvp(problem: &RvpProblem, opts: &RvpOptions) -> Result<RvpSolution, RvpError> {
    let density_check = problem
        .densities
        .validate_with(problem.instance.space(), opts.density_tol);
    if !density_check.pass {
        return Err(RvpError::InvalidProblem(
            density_check.violations.join("; "),
        ));
    }
    let blocks = blocks_from_densities(problem.instance.space(), &problem.densities, opts.group_tol);

    let (phi, relaxed_eval, pure, pure_eval, report, epsilon) =
        solve_pass(problem, &blocks, opts)?;

    let (tightened, phi, relaxed_eval, pure, pure_eval, report, epsilon) = if opts.strict {
        let tightened: Vec<f64> = problem.budgets.iter().map(|a| a - epsilon).collect();
        let strict_problem = RvpProblem {
            instance: problem.instance.clone(),
            budgets: tightened.clone(),
            densities: problem.densities.clone(),
        };
        let (phi2, relaxed2, pure2, pure_eval2, report2, epsilon2) =
            solve_pass(&strict_problem, &blocks, opts)?;
        (
            Some(tightened),
            phi2,
            relaxed2,
            pure2,
            pure_eval2,
            report2,
            epsilon2,
        )
    } else {
        (None, phi, relaxed_eval, pure, pure_eval, report, epsilon)
    };

    let audit = audit_gaps(&relaxed_eval, &pure_eval, epsilon);
    Ok(RvpSolution {
        relaxed: phi,
        pure,
        relaxed_value: relaxed_eval.objective_value,
        pure_value: pure_eval.objective_value,
        epsilon,
        objective_worst_param: pure_eval.objective_worst_param,
        constraint_values: pure_eval.cost_values,
        constraint_worst_params: pure_eval.cost_worst_params,
        relaxed_constraint_values: relaxed_eval.cost_values,
        lp_slack: relaxed_eval.max_violation,
        audit,
        report,
        blocks,
        strict: opts.strict,
        tightened_budgets: tightened,
    })
}

/// Exhaustive search over pure decisions with exact budget feasibility.
///
/// Ties in the worst-case objective keep the first decision in odometer
/// order (cell-major, action index ascending). Fails with `TooLarge` when
/// the candidate count exceeds [`BRUTE_FORCE_CAP`].
pub fn brute_force_rvp(problem: &RvpProblem) -> Result<(PureDecision, f64), RvpError> {
    let instance = &problem.instance;
    let cells = instance.space().len();
    let size = (0..cells)
        .map(|c| instance.actions()[c].len() as f64)
        .product::<f64>();
    if size > BRUTE_FORCE_CAP {
        return Err(RvpError::TooLarge { size });
    }

    let mut choices = vec![0usize; cells];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let candidate = PureDecision {
            choices: choices.clone(),
        };
        let eval = evaluate_pure(problem, &candidate)?;
        if eval.max_violation == 0.0 {
            let better = match &best {
                None => true,
                Some((_, value)) => eval.objective_value > *value,
            };
            if better {
                best = Some((choices.clone(), eval.objective_value));
            }
        }

        // Odometer increment.
        let mut pos = cells;
        for c in (0..cells).rev() {
            if choices[c] + 1 < instance.actions()[c].len() {
                choices[c] += 1;
                pos = c;
                break;
            }
            choices[c] = 0;
        }
        if pos == cells {
            break;
        }
    }

    match best {
        Some((choices, value)) => Ok((PureDecision { choices }, value)),
        None => Err(RvpError::InfeasibleConstraints),
    }
}
