//! Deterministic scenario generators for testing and benchmarks.
//!
//! Three structured families plus a fully random one, each yielding a
//! discretized space with a density grid and, once dressed with seeded
//! integrands and budgets, a complete robust problem:
//!
//! * `gen_example1`: unit-square grid with threshold densities `1/p` on
//!   the lower `p`-fraction of the first axis.
//! * `gen_example2`: a finite partition with block-constant densities
//!   given directly as vectors.
//! * `gen_example3`: a product grid whose densities depend only on the
//!   first factor through a marginal table.
//! * `gen_random`: group-structured random densities, budgets anchored to
//!   a random decision so the constraint set is never empty.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::pairwise_sum;
use crate::measure::{Cell, DensityFamily, DiscreteSpace, MeasureError};
use crate::purify::{DecisionInstance, PurifyError, RandomizedDecision};
use crate::rvp::{evaluate, RvpError, RvpProblem};

/// Alignment slack for parameters that must sit on cell boundaries.
const ALIGN_TOL: f64 = 1e-9;
/// Density vectors must integrate to one within this.
const DENSITY_ONE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parameter {value} is not a multiple of 1/{n1} in (0, 1]")]
    MisalignedParameter { value: f64, n1: usize },
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Purify(#[from] PurifyError),
    #[error(transparent)]
    Rvp(#[from] RvpError),
}

/// Unit-square grid with threshold densities.
///
/// Cells tile `[0,1]^2` as `n1 * n2` equal squares in first-axis-major
/// order; the block id is the first-axis column. Each parameter `p` must
/// be a positive multiple of `1/n1` not exceeding one; its density is
/// `1/p` on cells whose first-axis interval lies in `[0, p]` and zero
/// elsewhere, stored as the exact ratio `n1/k` with `k = p * n1`.
pub fn gen_example1(
    n1: usize,
    n2: usize,
    p_grid: &[f64],
) -> Result<(DiscreteSpace, DensityFamily), ScenarioError> {
    if n1 == 0 || n2 == 0 {
        return Err(ScenarioError::InvalidSpec(
            "grid resolutions must be at least 1".into(),
        ));
    }
    if p_grid.is_empty() {
        return Err(ScenarioError::InvalidSpec("empty parameter grid".into()));
    }
    let mut thresholds = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let scaled = p * n1 as f64;
        let k = scaled.round();
        if !p.is_finite() || (scaled - k).abs() > ALIGN_TOL * n1 as f64 || k < 1.0 || p > 1.0 {
            return Err(ScenarioError::MisalignedParameter { value: p, n1 });
        }
        thresholds.push(k as usize);
    }

    let weight = 1.0 / (n1 * n2) as f64;
    let cells: Vec<Cell> = (0..n1 * n2)
        .map(|id| Cell {
            weight,
            block: id / n2,
        })
        .collect();
    let space = DiscreteSpace::new(cells);

    let params: Vec<String> = p_grid.iter().map(|p| p.to_string()).collect();
    let values: Vec<Vec<f64>> = (0..n1 * n2)
        .map(|id| {
            let col = id / n2;
            thresholds
                .iter()
                .map(|&k| if col < k { n1 as f64 / k as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let densities = DensityFamily::new(params, values)?;
    Ok((space, densities))
}

/// Finite partition with block-constant densities.
///
/// Block `j` receives `subdivisions` equal cells of total weight
/// `block_weights[j]`; `density_vectors[p][j]` is the density of parameter
/// `p` on block `j` and must satisfy `sum_j x_j * weight_j = 1` within
/// 1e-9 with nonnegative entries.
pub fn gen_example2(
    block_weights: &[f64],
    subdivisions: usize,
    density_vectors: &[Vec<f64>],
) -> Result<(DiscreteSpace, DensityFamily), ScenarioError> {
    if block_weights.is_empty() || subdivisions == 0 {
        return Err(ScenarioError::InvalidSpec(
            "need at least one block and one cell per block".into(),
        ));
    }
    if block_weights.iter().any(|&w| !w.is_finite() || w <= 0.0) {
        return Err(ScenarioError::InvalidSpec(
            "block weights must be positive and finite".into(),
        ));
    }
    let total = pairwise_sum(block_weights);
    if (total - 1.0).abs() > 1e-12 {
        return Err(ScenarioError::InvalidSpec(format!(
            "block weights sum to {total}, expected 1"
        )));
    }
    if density_vectors.is_empty() {
        return Err(ScenarioError::InvalidDensity("no density vectors".into()));
    }
    for (p, x) in density_vectors.iter().enumerate() {
        if x.len() != block_weights.len() {
            return Err(ScenarioError::InvalidDensity(format!(
                "vector {p} has {} entries for {} blocks",
                x.len(),
                block_weights.len()
            )));
        }
        if x.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(ScenarioError::InvalidDensity(format!(
                "vector {p} has a negative or non-finite entry"
            )));
        }
        let terms: Vec<f64> = x
            .iter()
            .zip(block_weights)
            .map(|(xj, wj)| xj * wj)
            .collect();
        let mass = pairwise_sum(&terms);
        if (mass - 1.0).abs() > DENSITY_ONE_TOL {
            return Err(ScenarioError::InvalidDensity(format!(
                "vector {p} integrates to {mass}, expected 1"
            )));
        }
    }

    let mut cells = Vec::with_capacity(block_weights.len() * subdivisions);
    for (j, &wj) in block_weights.iter().enumerate() {
        for _ in 0..subdivisions {
            cells.push(Cell {
                weight: wj / subdivisions as f64,
                block: j,
            });
        }
    }
    let space = DiscreteSpace::new(cells);

    let params: Vec<String> = (0..density_vectors.len())
        .map(|p| format!("p{p}"))
        .collect();
    let values: Vec<Vec<f64>> = (0..space.len())
        .map(|cell| {
            let j = cell / subdivisions;
            density_vectors.iter().map(|x| x[j]).collect()
        })
        .collect();
    let densities = DensityFamily::new(params, values)?;
    Ok((space, densities))
}

/// Product grid whose densities factor through the first axis.
///
/// The space is `nq * nr` uniform cells in first-axis-major order with the
/// first-axis index as block id. `marginals[q][p]` gives the density of
/// parameter `p` on column `q`; each parameter's marginal must integrate
/// to one against the uniform first-axis weights.
pub fn gen_example3(
    nq: usize,
    nr: usize,
    marginals: &[Vec<f64>],
) -> Result<(DiscreteSpace, DensityFamily), ScenarioError> {
    if nq == 0 || nr == 0 {
        return Err(ScenarioError::InvalidSpec(
            "grid resolutions must be at least 1".into(),
        ));
    }
    if marginals.len() != nq {
        return Err(ScenarioError::InvalidDensity(format!(
            "{} marginal rows for {nq} first-axis cells",
            marginals.len()
        )));
    }
    let np = marginals.first().map_or(0, |r| r.len());
    if np == 0 {
        return Err(ScenarioError::InvalidDensity("empty marginal table".into()));
    }
    for (q, row) in marginals.iter().enumerate() {
        if row.len() != np {
            return Err(ScenarioError::InvalidDensity(format!(
                "marginal row {q} has {} entries, expected {np}",
                row.len()
            )));
        }
        if row.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(ScenarioError::InvalidDensity(format!(
                "marginal row {q} has a negative or non-finite entry"
            )));
        }
    }
    let wq = 1.0 / nq as f64;
    for p in 0..np {
        let terms: Vec<f64> = (0..nq).map(|q| wq * marginals[q][p]).collect();
        let mass = pairwise_sum(&terms);
        if (mass - 1.0).abs() > DENSITY_ONE_TOL {
            return Err(ScenarioError::InvalidDensity(format!(
                "marginal column {p} integrates to {mass}, expected 1"
            )));
        }
    }

    let weight = 1.0 / (nq * nr) as f64;
    let cells: Vec<Cell> = (0..nq * nr)
        .map(|id| Cell {
            weight,
            block: id / nr,
        })
        .collect();
    let space = DiscreteSpace::new(cells);
    let params: Vec<String> = (0..np).map(|p| format!("p{p}")).collect();
    let values: Vec<Vec<f64>> = (0..nq * nr)
        .map(|id| marginals[id / nr].clone())
        .collect();
    let densities = DensityFamily::new(params, values)?;
    Ok((space, densities))
}

fn default_seed() -> u64 {
    0
}
fn default_actions() -> usize {
    2
}
fn default_costs() -> usize {
    1
}

/// Declarative description of a generated problem, accepted as JSON by the
/// command-line `generate` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    Example1 {
        n1: usize,
        n2: usize,
        p_grid: Vec<f64>,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_actions")]
        actions: usize,
        #[serde(default = "default_costs")]
        m: usize,
    },
    Example2 {
        block_weights: Vec<f64>,
        subdivisions: usize,
        density_vectors: Vec<Vec<f64>>,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_actions")]
        actions: usize,
        #[serde(default = "default_costs")]
        m: usize,
    },
    Example3 {
        nq: usize,
        nr: usize,
        marginals: Vec<Vec<f64>>,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_actions")]
        actions: usize,
        #[serde(default = "default_costs")]
        m: usize,
    },
    Random {
        cells: usize,
        #[serde(default = "default_actions")]
        actions: usize,
        #[serde(default = "default_costs")]
        m: usize,
        params: usize,
        groups: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
}

impl ScenarioSpec {
    pub fn seed(&self) -> u64 {
        match self {
            ScenarioSpec::Example1 { seed, .. }
            | ScenarioSpec::Example2 { seed, .. }
            | ScenarioSpec::Example3 { seed, .. }
            | ScenarioSpec::Random { seed, .. } => *seed,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            ScenarioSpec::Example1 { seed, .. }
            | ScenarioSpec::Example2 { seed, .. }
            | ScenarioSpec::Example3 { seed, .. }
            | ScenarioSpec::Random { seed, .. } => *seed = new_seed,
        }
        self
    }
}

/// Group-structured random skeleton: `groups` distinct density rows are
/// drawn, assigned round-robin to cells, and scaled per parameter so each
/// column integrates to one.
fn random_skeleton(
    rng: &mut ChaCha8Rng,
    cells: usize,
    params: usize,
    groups: usize,
) -> Result<(DiscreteSpace, DensityFamily), ScenarioError> {
    if cells == 0 || params == 0 || groups == 0 || groups > cells {
        return Err(ScenarioError::InvalidSpec(
            "need cells >= groups >= 1 and params >= 1".into(),
        ));
    }
    let mut raw: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|w| *w /= total);
    let rem = 1.0 - pairwise_sum(&raw);
    raw[0] += rem;
    let group_rows: Vec<Vec<f64>> = (0..groups)
        .map(|_| (0..params).map(|_| rng.gen_range(0.2..2.0)).collect())
        .collect();
    let space = DiscreteSpace::new(
        raw.iter()
            .enumerate()
            .map(|(i, &w)| Cell {
                weight: w,
                block: i % groups,
            })
            .collect(),
    );
    let mut values: Vec<Vec<f64>> = (0..cells)
        .map(|c| group_rows[c % groups].clone())
        .collect();
    for p in 0..params {
        let terms: Vec<f64> = (0..cells).map(|c| space.weight(c) * values[c][p]).collect();
        let mass = pairwise_sum(&terms);
        for row in values.iter_mut() {
            row[p] /= mass;
        }
    }
    let params: Vec<String> = (0..params).map(|p| format!("p{p}")).collect();
    Ok((space, DensityFamily::new(params, values)?))
}

/// Dresses a skeleton with seeded integrands, a random reference decision,
/// and budgets sized off that decision's costs so the constraint set is
/// non-empty by construction.
fn dress(
    rng: &mut ChaCha8Rng,
    space: DiscreteSpace,
    densities: DensityFamily,
    actions: usize,
    m: usize,
) -> Result<RvpProblem, ScenarioError> {
    if actions == 0 {
        return Err(ScenarioError::InvalidSpec(
            "need at least one action per cell".into(),
        ));
    }
    let cells = space.len();
    let n = m + 1;
    let action_lists: Vec<Vec<usize>> = vec![(0..actions).collect(); cells];
    let g: Vec<Vec<Vec<f64>>> = (0..cells)
        .map(|_| {
            (0..actions)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect())
                .collect()
        })
        .collect();
    let instance = DecisionInstance::new(space, action_lists, g, n)?;

    let probs: Vec<Vec<f64>> = (0..cells)
        .map(|_| {
            let mut row: Vec<f64> = (0..actions).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            let rem = 1.0 - pairwise_sum(&row);
            row[0] += rem;
            row
        })
        .collect();
    let reference = RandomizedDecision { probs };

    // Budgets need the reference costs, which need a problem shape, so
    // placeholder budgets go in first.
    let mut problem = RvpProblem::new(instance, vec![0.0; m], densities)?;
    if m > 0 {
        let eval = evaluate(&problem, &reference)?;
        problem.budgets = eval
            .cost_values
            .iter()
            .map(|&c| c + 0.1 * c.abs() + 1e-6)
            .collect();
    }
    Ok(problem)
}

/// Generates the full problem a spec describes. Pure in the spec: the same
/// spec (seed included) produces bitwise-identical output.
pub fn generate(spec: &ScenarioSpec) -> Result<RvpProblem, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed());
    match spec {
        ScenarioSpec::Example1 {
            n1,
            n2,
            p_grid,
            actions,
            m,
            ..
        } => {
            let (space, densities) = gen_example1(*n1, *n2, p_grid)?;
            dress(&mut rng, space, densities, *actions, *m)
        }
        ScenarioSpec::Example2 {
            block_weights,
            subdivisions,
            density_vectors,
            actions,
            m,
            ..
        } => {
            let (space, densities) = gen_example2(block_weights, *subdivisions, density_vectors)?;
            dress(&mut rng, space, densities, *actions, *m)
        }
        ScenarioSpec::Example3 {
            nq,
            nr,
            marginals,
            actions,
            m,
            ..
        } => {
            let (space, densities) = gen_example3(*nq, *nr, marginals)?;
            dress(&mut rng, space, densities, *actions, *m)
        }
        ScenarioSpec::Random {
            cells,
            actions,
            m,
            params,
            groups,
            ..
        } => {
            let (space, densities) = random_skeleton(&mut rng, *cells, *params, *groups)?;
            dress(&mut rng, space, densities, *actions, *m)
        }
    }
}

/// Draws a seeded randomized decision valid for the instance: every row is
/// a strictly positive distribution over that cell's actions. Deterministic
/// in (seed, instance shape).
pub fn random_decision(seed: u64, instance: &DecisionInstance) -> RandomizedDecision {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs: Vec<Vec<f64>> = instance
        .actions()
        .iter()
        .map(|acts| {
            let mut row: Vec<f64> = (0..acts.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            let rem = 1.0 - pairwise_sum(&row);
            row[0] += rem;
            row
        })
        .collect();
    RandomizedDecision { probs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::blocks_from_densities;
    use crate::rvp::{solve_crvp, solve_rvp, RvpOptions};

    #[test]
    fn threshold_grid_has_one_block_per_column() {
        let (space, densities) = gen_example1(4, 4, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(space.len(), 16);
        assert_eq!(space.blocks().len(), 4);
        let recovered = blocks_from_densities(&space, &densities, 1e-9);
        assert_eq!(recovered.len(), 4);
        for members in &recovered {
            assert_eq!(members.len(), 4);
        }
        assert_eq!(recovered, space.blocks());
    }

    #[test]
    fn full_threshold_is_the_flat_density() {
        let (_, densities) = gen_example1(3, 2, &[1.0]).unwrap();
        assert!(densities.values.iter().all(|row| row == &vec![1.0]));
    }

    #[test]
    fn dyadic_thresholds_integrate_exactly() {
        let (space, densities) = gen_example1(8, 4, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        for (idx, p) in [0.25, 0.5, 0.75, 1.0].iter().enumerate() {
            let terms: Vec<f64> = (0..space.len())
                .map(|c| space.weight(c) * densities.value(c, idx))
                .collect();
            let defect = (crate::linalg::pairwise_sum(&terms) - 1.0).abs();
            let dyadic = (p * 8.0) as u64;
            if dyadic.is_power_of_two() {
                assert_eq!(defect, 0.0, "p = {p} must integrate exactly");
            } else {
                assert!(defect <= 1e-14, "p = {p} defect {defect}");
            }
        }
        assert!(densities.integration_defect(&space) <= 1e-14);
    }

    #[test]
    fn misaligned_parameters_are_rejected() {
        match gen_example1(4, 4, &[0.3]) {
            Err(ScenarioError::MisalignedParameter { value, n1 }) => {
                assert_eq!(value, 0.3);
                assert_eq!(n1, 4);
            }
            other => panic!("expected misalignment, got {other:?}"),
        }
        assert!(matches!(
            gen_example1(4, 4, &[0.0]),
            Err(ScenarioError::MisalignedParameter { .. })
        ));
        assert!(matches!(
            gen_example1(4, 4, &[1.25]),
            Err(ScenarioError::MisalignedParameter { .. })
        ));
    }

    #[test]
    fn block_constant_densities_integrate_and_separate() {
        let (space, densities) =
            gen_example2(&[0.5, 0.5], 2, &[vec![2.0, 0.0], vec![0.5, 1.5]]).unwrap();
        assert_eq!(space.len(), 4);
        assert_eq!(densities.integration_defect(&space), 0.0);
        let recovered = blocks_from_densities(&space, &densities, 1e-9);
        assert_eq!(recovered, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn indistinct_density_vectors_collapse_blocks() {
        let (space, densities) = gen_example2(&[0.5, 0.5], 1, &[vec![1.0, 1.0]]).unwrap();
        let recovered = blocks_from_densities(&space, &densities, 1e-9);
        assert_eq!(recovered, vec![vec![0, 1]]);
    }

    #[test]
    fn grouping_recovers_given_blocks() {
        let weights = [0.2, 0.3, 0.5];
        let vectors: Vec<Vec<f64>> = (0..5)
            .map(|p| {
                // Rows chosen to separate all three blocks, then
                // rescaled so each integrates to one.
                let base = [1.0 + p as f64, 2.0, 0.4];
                let mass: f64 = base.iter().zip(&weights).map(|(x, w)| x * w).sum();
                base.iter().map(|x| x / mass).collect()
            })
            .collect();
        let (space, densities) = gen_example2(&weights, 3, &vectors).unwrap();
        let recovered = blocks_from_densities(&space, &densities, 1e-9);
        assert_eq!(recovered.len(), 3);
        assert_eq!(recovered, space.blocks());
    }

    #[test]
    fn non_normalized_density_vectors_are_rejected() {
        assert!(matches!(
            gen_example2(&[0.5, 0.5], 1, &[vec![2.0, 1.0]]),
            Err(ScenarioError::InvalidDensity(_))
        ));
        assert!(matches!(
            gen_example2(&[0.5, 0.5], 1, &[vec![3.0, -1.0]]),
            Err(ScenarioError::InvalidDensity(_))
        ));
    }

    #[test]
    fn product_grid_carries_marginals_across_the_second_axis() {
        let (space, densities) =
            gen_example3(2, 3, &[vec![1.0, 2.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(space.len(), 6);
        assert_eq!(space.blocks(), &[vec![0, 1, 2], vec![3, 4, 5]]);
        for cell in 0..6 {
            assert_eq!(densities.value(cell, 0), 1.0);
            assert_eq!(densities.value(cell, 1), if cell < 3 { 2.0 } else { 0.0 });
        }
        assert_eq!(densities.integration_defect(&space), 0.0);
    }

    #[test]
    fn distinct_marginals_recover_first_axis_blocks() {
        let marginals = vec![vec![0.4], vec![1.2], vec![1.4]];
        let (space, densities) = gen_example3(3, 2, &marginals).unwrap();
        let recovered = blocks_from_densities(&space, &densities, 1e-9);
        assert_eq!(recovered.len(), 3);
        assert_eq!(recovered, space.blocks());
    }

    #[test]
    fn bad_marginals_are_rejected() {
        assert!(matches!(
            gen_example3(2, 2, &[vec![1.5], vec![1.0]]),
            Err(ScenarioError::InvalidDensity(_))
        ));
        assert!(matches!(
            gen_example3(2, 2, &[vec![3.0], vec![-1.0]]),
            Err(ScenarioError::InvalidDensity(_))
        ));
        assert!(matches!(
            gen_example3(3, 2, &[vec![1.0], vec![1.0]]),
            Err(ScenarioError::InvalidDensity(_))
        ));
    }

    #[test]
    fn same_spec_generates_identical_bytes() {
        let spec = ScenarioSpec::Random {
            cells: 12,
            actions: 3,
            m: 2,
            params: 3,
            groups: 3,
            seed: 99,
        };
        let a = serde_json::to_string(&generate(&spec).unwrap().to_file()).unwrap();
        let b = serde_json::to_string(&generate(&spec).unwrap().to_file()).unwrap();
        assert_eq!(a, b);
        let reseeded = serde_json::to_string(
            &generate(&spec.clone().with_seed(100)).unwrap().to_file(),
        )
        .unwrap();
        assert_ne!(a, reseeded);
    }

    #[test]
    fn generated_problems_are_always_relaxation_feasible() {
        for seed in 0..8 {
            let spec = ScenarioSpec::Random {
                cells: 10,
                actions: 2,
                m: 2,
                params: 2,
                groups: 2,
                seed,
            };
            let problem = generate(&spec).unwrap();
            let (_, eval) = solve_crvp(&problem).unwrap();
            assert!(eval.objective_value.is_finite());
        }
        let spec = ScenarioSpec::Example1 {
            n1: 4,
            n2: 4,
            p_grid: vec![0.25, 0.5, 0.75, 1.0],
            seed: 7,
            actions: 2,
            m: 1,
        };
        let problem = generate(&spec).unwrap();
        let solution = solve_rvp(&problem, &RvpOptions::default()).unwrap();
        assert!(solution.audit.within_epsilon);
    }

    #[test]
    fn zero_cost_spec_builds_an_unconstrained_problem() {
        let spec = ScenarioSpec::Random {
            cells: 6,
            actions: 2,
            m: 0,
            params: 2,
            groups: 2,
            seed: 5,
        };
        let problem = generate(&spec).unwrap();
        assert!(problem.budgets.is_empty());
        assert_eq!(problem.instance.n(), 1);
        let (_, eval) = solve_crvp(&problem).unwrap();
        assert_eq!(eval.max_violation, 0.0);
        assert!(eval.feasible);
    }

    #[test]
    fn seeded_decisions_validate_and_repeat() {
        let spec = ScenarioSpec::Random {
            cells: 9,
            actions: 3,
            m: 1,
            params: 2,
            groups: 3,
            seed: 42,
        };
        let problem = generate(&spec).unwrap();
        let phi = random_decision(7, &problem.instance);
        phi.validate_for(&problem.instance).unwrap();
        assert_eq!(phi.probs, random_decision(7, &problem.instance).probs);
        assert_ne!(phi.probs, random_decision(8, &problem.instance).probs);
    }

    #[test]
    fn scenario_specs_parse_from_tagged_json() {
        let text = r#"{
            "kind": "example1",
            "n1": 4, "n2": 2,
            "p_grid": [0.5, 1.0],
            "seed": 3
        }"#;
        let spec: ScenarioSpec = serde_json::from_str(text).unwrap();
        match &spec {
            ScenarioSpec::Example1 { n1, n2, p_grid, seed, actions, m } => {
                assert_eq!((*n1, *n2, *seed, *actions, *m), (4, 2, 3, 2, 1));
                assert_eq!(p_grid, &vec![0.5, 1.0]);
            }
            other => panic!("wrong variant: {other:?}"),
        }
        let problem = generate(&spec).unwrap();
        assert_eq!(problem.instance.space().len(), 8);
    }
}
