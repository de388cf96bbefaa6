//! Rounding randomized decisions to pure ones.
//!
//! Given a randomized decision and its per-cell reduced combinations, each
//! block of the partition is rounded independently: weight is walked along
//! null directions of the block's moment system until at most n cells
//! remain fractional, and those are snapped to their heaviest support
//! point. The block-conditional expectation of the integrand then moves by
//! at most `n * max cell weight * max support spread / block weight`, a
//! bound the report carries alongside the measured residuals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caratheodory::{decompose_decision, CaratheodoryCertificate, CaratheodoryError};
use crate::linalg::{nullspace_vector, pairwise_sum, Matrix};
use crate::measure::{block_mean, DensityFamily, DiscreteSpace, MeasureError, MeasureFamily};

/// Probability mass at or below this is treated as zero when decomposing.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Decision probability vectors must sum to one within this.
pub const DECISION_SUM_TOL: f64 = 1e-10;
/// Walk weights this close to 0 or 1 are snapped exactly.
const SNAP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PurifyError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error("rounding failed in block {block}: {detail}")]
    InternalInfeasible { block: usize, detail: String },
    #[error(transparent)]
    Caratheodory(#[from] CaratheodoryError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Per-cell action lists with tabulated integrand vectors in R^n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionInstance {
    space: DiscreteSpace,
    actions: Vec<Vec<usize>>,
    g: Vec<Vec<Vec<f64>>>,
    n: usize,
}

impl DecisionInstance {
    pub fn new(
        space: DiscreteSpace,
        actions: Vec<Vec<usize>>,
        g: Vec<Vec<Vec<f64>>>,
        n: usize,
    ) -> Result<Self, PurifyError> {
        if actions.len() != space.len() || g.len() != space.len() {
            return Err(PurifyError::InvalidInstance(format!(
                "{} cells but {} action lists and {} integrand tables",
                space.len(),
                actions.len(),
                g.len()
            )));
        }
        for (cell, (acts, rows)) in actions.iter().zip(&g).enumerate() {
            if acts.is_empty() {
                return Err(PurifyError::InvalidInstance(format!(
                    "cell {cell} has no actions"
                )));
            }
            if rows.len() != acts.len() {
                return Err(PurifyError::InvalidInstance(format!(
                    "cell {cell}: {} actions but {} integrand rows",
                    acts.len(),
                    rows.len()
                )));
            }
            for (a, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(PurifyError::InvalidInstance(format!(
                        "cell {cell}, action {a}: integrand has {} coordinates, expected {n}",
                        row.len()
                    )));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(PurifyError::InvalidInstance(format!(
                        "cell {cell}, action {a}: non-finite integrand entry"
                    )));
                }
            }
        }
        Ok(DecisionInstance {
            space,
            actions,
            g,
            n,
        })
    }

    pub fn space(&self) -> &DiscreteSpace {
        &self.space
    }

    pub fn actions(&self) -> &[Vec<usize>] {
        &self.actions
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g_rows(&self, cell: usize) -> &[Vec<f64>] {
        &self.g[cell]
    }

    pub fn g_table(&self) -> &[Vec<Vec<f64>>] {
        &self.g
    }

    /// Same space and actions with a different integrand table.
    pub fn with_integrand(&self, g: Vec<Vec<Vec<f64>>>, n: usize) -> Result<Self, PurifyError> {
        DecisionInstance::new(self.space.clone(), self.actions.clone(), g, n)
    }
}

/// Probability vector over each cell's action list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedDecision {
    #[serde(rename = "phi")]
    pub probs: Vec<Vec<f64>>,
}

impl RandomizedDecision {
    pub fn validate_for(&self, instance: &DecisionInstance) -> Result<(), PurifyError> {
        if self.probs.len() != instance.space.len() {
            return Err(PurifyError::InvalidDecision(format!(
                "{} probability rows for {} cells",
                self.probs.len(),
                instance.space.len()
            )));
        }
        for (cell, row) in self.probs.iter().enumerate() {
            if row.len() != instance.actions[cell].len() {
                return Err(PurifyError::InvalidDecision(format!(
                    "cell {cell}: {} probabilities for {} actions",
                    row.len(),
                    instance.actions[cell].len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(PurifyError::InvalidDecision(format!(
                    "cell {cell}: negative or non-finite probability"
                )));
            }
            let total = pairwise_sum(row);
            if (total - 1.0).abs() > DECISION_SUM_TOL {
                return Err(PurifyError::InvalidDecision(format!(
                    "cell {cell}: probabilities sum to {total}"
                )));
            }
        }
        Ok(())
    }

    /// One-hot encoding of a pure decision.
    pub fn from_pure(instance: &DecisionInstance, pure: &PureDecision) -> Self {
        let probs = pure
            .choices
            .iter()
            .enumerate()
            .map(|(cell, &k)| {
                let mut row = vec![0.0; instance.actions[cell].len()];
                row[k] = 1.0;
                row
            })
            .collect();
        RandomizedDecision { probs }
    }
}

/// Chosen action position per cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureDecision {
    #[serde(rename = "f")]
    pub choices: Vec<usize>,
}

impl PureDecision {
    pub fn validate_for(&self, instance: &DecisionInstance) -> Result<(), PurifyError> {
        if self.choices.len() != instance.space.len() {
            return Err(PurifyError::InvalidDecision(format!(
                "{} choices for {} cells",
                self.choices.len(),
                instance.space.len()
            )));
        }
        for (cell, &k) in self.choices.iter().enumerate() {
            if k >= instance.actions[cell].len() {
                return Err(PurifyError::InvalidDecision(format!(
                    "cell {cell}: choice {k} out of range"
                )));
            }
        }
        Ok(())
    }
}

/// Mean integrand of a randomized decision, one R^n row per cell. Skipping
/// exact zeros keeps one-hot rows bitwise equal to the chosen action row.
pub fn moment(instance: &DecisionInstance, phi: &RandomizedDecision) -> Vec<Vec<f64>> {
    phi.probs
        .iter()
        .enumerate()
        .map(|(cell, probs)| {
            let rows = instance.g_rows(cell);
            let mut acc = vec![0.0; instance.n];
            for (j, &p) in probs.iter().enumerate() {
                if p != 0.0 {
                    for (a, &v) in acc.iter_mut().zip(&rows[j]) {
                        *a += p * v;
                    }
                }
            }
            acc
        })
        .collect()
}

/// Integrand row selected by a pure decision, per cell.
pub fn moment_pure(instance: &DecisionInstance, pure: &PureDecision) -> Vec<Vec<f64>> {
    pure.choices
        .iter()
        .enumerate()
        .map(|(cell, &k)| instance.g_rows(cell)[k].clone())
        .collect()
}

/// Largest max-norm distance between two support points of the cell's
/// combination.
pub(crate) fn certificate_spread(
    instance: &DecisionInstance,
    certificate: &CaratheodoryCertificate,
    cell: usize,
) -> f64 {
    let combo = &certificate.combos[cell];
    let rows = instance.g_rows(cell);
    let mut spread = 0.0f64;
    for (a, &ia) in combo.indices.iter().enumerate() {
        for &ib in combo.indices.iter().skip(a + 1) {
            let d = rows[ia]
                .iter()
                .zip(&rows[ib])
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            spread = spread.max(d);
        }
    }
    spread
}

/// Outcome of rounding one block.
#[derive(Debug, Clone)]
pub struct BlockOutcome {
    /// Action position per cell, aligned with the input cell list.
    pub choices: Vec<usize>,
    /// Cells that were still fractional when the walk stopped.
    pub fractional: usize,
    /// Largest support spread among the block's cells.
    pub max_spread: f64,
    /// Weighted moment discrepancy between the certificate barycenters and
    /// the chosen rows, per coordinate.
    pub moment_gap: Vec<f64>,
}

struct WalkCell {
    slot: usize,
    weight: f64,
    points: Vec<Vec<f64>>,
    reps: Vec<usize>,
    z: Vec<f64>,
}

/// Rounds the cells of one block to pure choices whose weighted moment sum
/// stays on the certificate's. The walk moves the per-cell weights along
/// null directions of a window system of at most n+1 fractional cells; a
/// missing null direction at a full window means the certificate or the
/// arithmetic is broken, not the data. `block` only labels errors.
pub fn purify_block(
    instance: &DecisionInstance,
    certificate: &CaratheodoryCertificate,
    cells: &[usize],
    block: usize,
) -> Result<BlockOutcome, PurifyError> {
    let n = instance.n;
    if cells.is_empty() {
        return Err(PurifyError::InternalInfeasible {
            block,
            detail: "empty block".into(),
        });
    }

    let mut choices = vec![usize::MAX; cells.len()];
    let mut max_spread = 0.0f64;
    let mut target = vec![0.0; n];
    let mut fractional_cells: Vec<WalkCell> = Vec::new();

    for (slot, &cell) in cells.iter().enumerate() {
        max_spread = max_spread.max(certificate_spread(instance, certificate, cell));
        let combo = &certificate.combos[cell];
        let rows = instance.g_rows(cell);
        let weight = instance.space.weight(cell);
        // Merge support points with identical integrand rows; the smallest
        // action position represents each merged point.
        let mut keys: Vec<Vec<u64>> = Vec::new();
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut reps: Vec<usize> = Vec::new();
        let mut z: Vec<f64> = Vec::new();
        for (&idx, &w) in combo.indices.iter().zip(&combo.weights) {
            let key: Vec<u64> = rows[idx].iter().map(|v| v.to_bits()).collect();
            match keys.iter().position(|k| *k == key) {
                Some(p) => {
                    z[p] += w;
                    reps[p] = reps[p].min(idx);
                }
                None => {
                    keys.push(key);
                    points.push(rows[idx].clone());
                    reps.push(idx);
                    z.push(w);
                }
            }
        }
        for k in 0..n {
            let mut bary = 0.0;
            for (p, &zj) in points.iter().zip(&z) {
                bary += zj * p[k];
            }
            target[k] += weight * bary;
        }
        if points.len() == 1 {
            choices[slot] = reps[0];
        } else {
            fractional_cells.push(WalkCell {
                slot,
                weight,
                points,
                reps,
                z,
            });
        }
    }

    let total_cols: usize = fractional_cells.iter().map(|c| c.z.len()).sum();
    let step_limit = 4 * total_cols + 64;
    let mut steps = 0usize;

    // Window walk: keep at most n+1 fractional cells active; a null
    // direction of the window system always exists at a full window because
    // the column count exceeds the row count.
    let mut queue: std::collections::VecDeque<WalkCell> = fractional_cells.into();
    let mut window: Vec<WalkCell> = Vec::new();

    loop {
        while window.len() < n + 1 {
            match queue.pop_front() {
                Some(c) => window.push(c),
                None => break,
            }
        }
        if window.is_empty() {
            break;
        }
        let cols: usize = window.iter().map(|c| c.z.len()).sum();
        let rows = window.len() + n;
        let mut a = Matrix::zeros(rows, cols);
        {
            let mut col = 0;
            for (ci, c) in window.iter().enumerate() {
                for (j, p) in c.points.iter().enumerate() {
                    a.set(ci, col + j, 1.0);
                    for k in 0..n {
                        a.set(window.len() + k, col + j, c.weight * p[k]);
                    }
                }
                col += c.z.len();
            }
        }
        let dir = nullspace_vector(&a);
        let c = match dir {
            Some(c) => c,
            None => {
                if window.len() == n + 1 {
                    return Err(PurifyError::InternalInfeasible {
                        block,
                        detail: "no null direction at a full window".into(),
                    });
                }
                break;
            }
        };

        steps += 1;
        if steps > step_limit {
            return Err(PurifyError::InternalInfeasible {
                block,
                detail: format!("walk exceeded {step_limit} steps"),
            });
        }

        // First bound hit along +c and -c; take the shorter move.
        let zs: Vec<f64> = window.iter().flat_map(|w| w.z.iter().copied()).collect();
        let mut t_plus = f64::INFINITY;
        let mut hit_plus = 0usize;
        let mut t_minus = f64::INFINITY;
        let mut hit_minus = 0usize;
        for (i, (&ci, &zi)) in c.iter().zip(&zs).enumerate() {
            if ci > 0.0 {
                let tp = (1.0 - zi) / ci;
                if tp < t_plus {
                    t_plus = tp;
                    hit_plus = i;
                }
                let tm = zi / ci;
                if tm < t_minus {
                    t_minus = tm;
                    hit_minus = i;
                }
            } else if ci < 0.0 {
                let tp = zi / -ci;
                if tp < t_plus {
                    t_plus = tp;
                    hit_plus = i;
                }
                let tm = (1.0 - zi) / -ci;
                if tm < t_minus {
                    t_minus = tm;
                    hit_minus = i;
                }
            }
        }
        if !t_plus.is_finite() && !t_minus.is_finite() {
            return Err(PurifyError::InternalInfeasible {
                block,
                detail: "null direction without a bound hit".into(),
            });
        }
        let (sign, t, hit) = if t_plus <= t_minus {
            (1.0, t_plus, hit_plus)
        } else {
            (-1.0, t_minus, hit_minus)
        };

        let mut flat = 0usize;
        for cell in window.iter_mut() {
            for z in cell.z.iter_mut() {
                *z += sign * t * c[flat];
                flat += 1;
            }
        }
        // The argmin column lands exactly on its bound.
        {
            let mut flat = 0usize;
            'outer: for cell in window.iter_mut() {
                for z in cell.z.iter_mut() {
                    if flat == hit {
                        *z = if (sign > 0.0) == (c[flat] > 0.0) { 1.0 } else { 0.0 };
                        break 'outer;
                    }
                    flat += 1;
                }
            }
        }

        // Snap, drop zeroed points, settle single-point cells.
        let mut next_window = Vec::with_capacity(window.len());
        for mut cell in window.drain(..) {
            let mut kept_points = Vec::with_capacity(cell.points.len());
            let mut kept_reps = Vec::with_capacity(cell.reps.len());
            let mut kept_z = Vec::with_capacity(cell.z.len());
            for ((p, r), z) in cell
                .points
                .drain(..)
                .zip(cell.reps.drain(..))
                .zip(cell.z.drain(..))
            {
                if z > SNAP_TOL {
                    kept_points.push(p);
                    kept_reps.push(r);
                    kept_z.push(if z >= 1.0 - SNAP_TOL { 1.0 } else { z });
                }
            }
            match kept_z.len() {
                0 => {
                    return Err(PurifyError::InternalInfeasible {
                        block,
                        detail: "cell lost its whole support".into(),
                    })
                }
                1 => choices[cell.slot] = kept_reps[0],
                _ => {
                    if let Some(j) = kept_z.iter().position(|&z| z == 1.0) {
                        choices[cell.slot] = kept_reps[j];
                    } else {
                        cell.points = kept_points;
                        cell.reps = kept_reps;
                        cell.z = kept_z;
                        next_window.push(cell);
                    }
                }
            }
        }
        window = next_window;
    }

    // Round the survivors: heaviest point wins, ties to the smallest
    // action position.
    let fractional = window.len() + queue.len();
    for cell in window.into_iter().chain(queue) {
        let mut best = 0usize;
        for (j, &z) in cell.z.iter().enumerate().skip(1) {
            if z > cell.z[best] {
                best = j;
            }
        }
        choices[cell.slot] = cell.reps[best];
    }

    let mut moment_gap = target;
    for (slot, &cell) in cells.iter().enumerate() {
        let w = instance.space.weight(cell);
        let row = &instance.g_rows(cell)[choices[slot]];
        for (gap, &v) in moment_gap.iter_mut().zip(row) {
            *gap -= w * v;
        }
    }

    Ok(BlockOutcome {
        choices,
        fractional,
        max_spread,
        moment_gap,
    })
}

/// One block's entry in a purification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReport {
    pub block: usize,
    pub cells: Vec<usize>,
    pub weight: f64,
    pub max_cell_weight: f64,
    pub max_spread: f64,
    pub fractional_cells: usize,
    /// Conditional-expectation difference, randomized minus pure.
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    /// Guaranteed ceiling on `residual_norm`.
    pub bound: f64,
}

/// Residuals and guarantees for a whole purification run. The global bound
/// is the sum over blocks of `n * max cell weight * max spread`, which caps
/// the weighted sum of block residuals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PurifyReport {
    pub n: usize,
    pub blocks: Vec<BlockReport>,
    pub global_residual: Vec<f64>,
    pub global_residual_norm: f64,
    pub global_bound: f64,
}

fn check_partition(space: &DiscreteSpace, blocks: &[Vec<usize>]) -> Result<(), PurifyError> {
    let mut seen = vec![false; space.len()];
    let mut count = 0usize;
    for members in blocks {
        for &cell in members {
            if cell >= space.len() || seen[cell] {
                return Err(PurifyError::InvalidInstance(format!(
                    "partition repeats or exceeds cell {cell}"
                )));
            }
            seen[cell] = true;
            count += 1;
        }
    }
    if count != space.len() {
        return Err(PurifyError::InvalidInstance(format!(
            "partition covers {count} of {} cells",
            space.len()
        )));
    }
    Ok(())
}

fn build_report(
    instance: &DecisionInstance,
    certificate: &CaratheodoryCertificate,
    phi: &RandomizedDecision,
    pure: &PureDecision,
    blocks: &[Vec<usize>],
    fractional: &[usize],
) -> Result<PurifyReport, PurifyError> {
    let n = instance.n;
    let space = &instance.space;
    let phi_rows = moment(instance, phi);
    let pure_rows = moment_pure(instance, pure);

    let mut reports = Vec::with_capacity(blocks.len());
    let mut betas = Vec::with_capacity(blocks.len());
    for (b, members) in blocks.iter().enumerate() {
        let weights: Vec<f64> = members.iter().map(|&c| space.weight(c)).collect();
        let weight = pairwise_sum(&weights);
        let ce_phi = block_mean(space, members, &phi_rows)
            .ok_or(MeasureError::DegenerateBlock { block: b })?;
        let ce_pure = block_mean(space, members, &pure_rows)
            .ok_or(MeasureError::DegenerateBlock { block: b })?;
        let residual: Vec<f64> = ce_phi.iter().zip(&ce_pure).map(|(a, c)| a - c).collect();
        let residual_norm = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let max_cell_weight = weights.iter().fold(0.0f64, |m, &w| m.max(w));
        let max_spread = members
            .iter()
            .map(|&c| certificate_spread(instance, certificate, c))
            .fold(0.0f64, f64::max);
        let beta = (n as f64 * max_cell_weight) * max_spread;
        betas.push(beta);
        reports.push(BlockReport {
            block: b,
            cells: members.clone(),
            weight,
            max_cell_weight,
            max_spread,
            fractional_cells: fractional.get(b).copied().unwrap_or(0),
            residual,
            residual_norm,
            bound: beta / weight,
        });
    }

    let mut global_residual = Vec::with_capacity(n);
    for k in 0..n {
        let terms: Vec<f64> = (0..space.len())
            .map(|c| space.weight(c) * (phi_rows[c][k] - pure_rows[c][k]))
            .collect();
        global_residual.push(pairwise_sum(&terms));
    }
    let global_residual_norm = global_residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(PurifyReport {
        n,
        blocks: reports,
        global_residual,
        global_residual_norm,
        global_bound: pairwise_sum(&betas),
    })
}

/// Purifies a randomized decision against a block partition.
///
/// The decision is decomposed cell-by-cell, every block is rounded
/// independently (in parallel), and the report pairs each block's measured
/// conditional-expectation residual with its guaranteed bound. The chosen
/// action in every cell carries positive probability under `phi`.
pub fn purify(
    instance: &DecisionInstance,
    phi: &RandomizedDecision,
    blocks: &[Vec<usize>],
) -> Result<(PureDecision, PurifyReport), PurifyError> {
    let validation = instance.space.validate();
    if !validation.pass {
        return Err(PurifyError::InvalidInstance(
            validation.violations.join("; "),
        ));
    }
    phi.validate_for(instance)?;
    check_partition(&instance.space, blocks)?;

    let certificate = decompose_decision(instance, phi)?;
    let outcomes: Vec<BlockOutcome> = crate::pool().install(|| {
        blocks
            .par_iter()
            .enumerate()
            .map(|(b, cells)| purify_block(instance, &certificate, cells, b))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut choices = vec![usize::MAX; instance.space.len()];
    let mut fractional = Vec::with_capacity(blocks.len());
    for (members, outcome) in blocks.iter().zip(&outcomes) {
        for (slot, &cell) in members.iter().enumerate() {
            choices[cell] = outcome.choices[slot];
        }
        fractional.push(outcome.fractional);
    }
    let pure = PureDecision { choices };
    let report = build_report(instance, &certificate, phi, &pure, blocks, &fractional)?;
    Ok((pure, report))
}

/// Recomputes the report for an existing purification from the raw inputs;
/// deterministic, so it reproduces `purify`'s own report bit for bit.
pub fn purify_report(
    instance: &DecisionInstance,
    phi: &RandomizedDecision,
    pure: &PureDecision,
    blocks: &[Vec<usize>],
) -> Result<PurifyReport, PurifyError> {
    phi.validate_for(instance)?;
    pure.validate_for(instance)?;
    check_partition(&instance.space, blocks)?;
    let certificate = decompose_decision(instance, phi)?;
    build_report(instance, &certificate, phi, pure, blocks, &[])
}

/// Integral gaps of a multi-measure purification: `per_measure[i][d]` is
/// the absolute change of the d-th integrand coordinate integrated against
/// measure i, each guaranteed at most `bound`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiMeasureReport {
    pub per_measure: Vec<Vec<f64>>,
    pub bound: f64,
    pub stacked: PurifyReport,
}

/// Purifies while matching integrals against several measures at once.
///
/// Each measure's density multiplies the integrand, the stacked
/// (k * n)-dimensional instance is purified over the trivial single-block
/// partition, and the stacked residuals translate back into per-measure
/// integral gaps.
pub fn purify_multimeasure(
    instance: &DecisionInstance,
    phi: &RandomizedDecision,
    measures: &MeasureFamily,
) -> Result<(PureDecision, MultiMeasureReport), PurifyError> {
    let validation = measures.validate(&instance.space);
    if !validation.pass {
        return Err(PurifyError::InvalidInstance(
            validation.violations.join("; "),
        ));
    }
    let k = measures.num_measures();
    if k == 0 {
        return Err(PurifyError::InvalidInstance(
            "measure family is empty".into(),
        ));
    }
    let n = instance.n;
    let stacked_g: Vec<Vec<Vec<f64>>> = (0..instance.space.len())
        .map(|cell| {
            instance
                .g_rows(cell)
                .iter()
                .map(|row| {
                    let mut out = Vec::with_capacity(k * n);
                    for i in 0..k {
                        let d = measures.densities[cell][i];
                        for &v in row {
                            out.push(d * v);
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    let stacked = instance.with_integrand(stacked_g, k * n)?;
    let all_cells: Vec<usize> = (0..instance.space.len()).collect();
    let (pure, report) = purify(&stacked, phi, &[all_cells])?;
    let per_measure: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..n)
                .map(|d| report.global_residual[i * n + d].abs())
                .collect()
        })
        .collect();
    Ok((
        pure,
        MultiMeasureReport {
            per_measure,
            bound: report.global_bound,
            stacked: report,
        },
    ))
}

/// Instance wire format shared by the command-line tools. The optional
/// fields extend a purification instance into a robust-optimization one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub space: DiscreteSpace,
    pub actions: Vec<Vec<usize>>,
    pub g: Vec<Vec<Vec<f64>>>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<DensityFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl InstanceFile {
    pub fn into_decision_instance(self) -> Result<DecisionInstance, PurifyError> {
        DecisionInstance::new(self.space, self.actions, self.g, self.n)
    }
}

impl From<&DecisionInstance> for InstanceFile {
    fn from(instance: &DecisionInstance) -> InstanceFile {
        InstanceFile {
            space: instance.space.clone(),
            actions: instance.actions.clone(),
            g: instance.g.clone(),
            n: instance.n,
            budgets: None,
            densities: None,
            bound: None,
        }
    }
}
