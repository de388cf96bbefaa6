//! Discretized probability space.
//!
//! A space is a finite list of weighted cells together with a partition of
//! the cells into blocks. Cells stand in for states, weights for their
//! probability mass, and the block partition for the conditioning
//! information available to an observer: conditional expectation is
//! weight-averaging within each block.
//!
//! Density families tabulate a nonnegative density per cell and parameter;
//! each column must integrate to one against the cell weights so that it
//! describes a probability measure. The partition generated by a density
//! family groups cells whose density rows agree, which is the discrete
//! version of the sigma-field generated by those functions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::pairwise_sum;

/// Tolerance on the total weight of a space.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Default tolerance on the integral of a density column.
pub const DENSITY_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("block {block} has zero total weight")]
    DegenerateBlock { block: usize },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("explicit block list disagrees with per-cell block ids: {0}")]
    InconsistentBlocks(String),
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// One cell of the discretized space. A cell's id is its position in
/// [`DiscreteSpace::cells`]; `block` indexes the partition it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(rename = "w")]
    pub weight: f64,
    pub block: usize,
}

#[derive(Serialize, Deserialize)]
struct SpaceWire {
    cells: Vec<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<Vec<usize>>>,
}

/// Finite weighted-cell space with a block partition.
///
/// Construction is lenient: invariant violations such as weights not
/// summing to one or empty blocks are reported by [`DiscreteSpace::validate`]
/// rather than rejected up front, so that diagnostic tooling can load and
/// inspect bad inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpaceWire", into = "SpaceWire")]
pub struct DiscreteSpace {
    cells: Vec<Cell>,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<SpaceWire> for DiscreteSpace {
    type Error = MeasureError;

    fn try_from(wire: SpaceWire) -> Result<Self, MeasureError> {
        match wire.blocks {
            None => Ok(DiscreteSpace::new(wire.cells)),
            Some(blocks) => DiscreteSpace::with_blocks(wire.cells, blocks),
        }
    }
}

impl From<DiscreteSpace> for SpaceWire {
    fn from(space: DiscreteSpace) -> SpaceWire {
        SpaceWire {
            blocks: Some(space.blocks.clone()),
            cells: space.cells,
        }
    }
}

impl DiscreteSpace {
    /// Builds a space from cells, deriving the partition from each cell's
    /// `block` field. The number of blocks is one past the largest block id,
    /// so skipped ids produce empty blocks that `validate` will flag.
    pub fn new(cells: Vec<Cell>) -> Self {
        let nblocks = cells.iter().map(|c| c.block + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); nblocks];
        for (id, cell) in cells.iter().enumerate() {
            blocks[cell.block].push(id);
        }
        DiscreteSpace { cells, blocks }
    }

    /// Builds a space from cells plus an explicit partition. The partition
    /// must agree with the per-cell block ids.
    pub fn with_blocks(cells: Vec<Cell>, blocks: Vec<Vec<usize>>) -> Result<Self, MeasureError> {
        let derived = DiscreteSpace::new(cells);
        if derived.blocks.len() != blocks.len() {
            return Err(MeasureError::InconsistentBlocks(format!(
                "cells imply {} blocks, explicit list has {}",
                derived.blocks.len(),
                blocks.len()
            )));
        }
        for (b, members) in blocks.iter().enumerate() {
            let mut sorted = members.clone();
            sorted.sort_unstable();
            if sorted != derived.blocks[b] {
                return Err(MeasureError::InconsistentBlocks(format!(
                    "block {b} members differ from the per-cell ids"
                )));
            }
        }
        Ok(derived)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn weight(&self, cell: usize) -> f64 {
        self.cells[cell].weight
    }

    pub fn block_weight(&self, block: usize) -> f64 {
        let ws: Vec<f64> = self.blocks[block]
            .iter()
            .map(|&id| self.cells[id].weight)
            .collect();
        pairwise_sum(&ws)
    }

    pub fn total_weight(&self) -> f64 {
        let ws: Vec<f64> = self.cells.iter().map(|c| c.weight).collect();
        pairwise_sum(&ws)
    }

    /// Returns a copy of this space with the cells reassigned to the given
    /// partition. The partition must cover every cell exactly once.
    pub fn reblocked(&self, blocks: &[Vec<usize>]) -> Result<DiscreteSpace, MeasureError> {
        let mut assigned = vec![usize::MAX; self.cells.len()];
        let mut seen = 0usize;
        for (b, members) in blocks.iter().enumerate() {
            for &id in members {
                if id >= self.cells.len() {
                    return Err(MeasureError::LengthMismatch {
                        expected: self.cells.len(),
                        found: id + 1,
                    });
                }
                if assigned[id] != usize::MAX {
                    return Err(MeasureError::InconsistentBlocks(format!(
                        "cell {id} appears in more than one block"
                    )));
                }
                assigned[id] = b;
                seen += 1;
            }
        }
        if seen != self.cells.len() {
            return Err(MeasureError::InconsistentBlocks(format!(
                "partition covers {seen} of {} cells",
                self.cells.len()
            )));
        }
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(id, c)| Cell {
                weight: c.weight,
                block: assigned[id],
            })
            .collect();
        Ok(DiscreteSpace::new(cells))
    }

    /// Checks every structural invariant and returns the violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (id, cell) in self.cells.iter().enumerate() {
            if !cell.weight.is_finite() {
                violations.push(format!("cell {id} has non-finite weight"));
            } else if cell.weight < 0.0 {
                violations.push(format!("cell {id} has negative weight {}", cell.weight));
            }
        }
        let total = self.total_weight();
        if !(total - 1.0).abs().le(&WEIGHT_SUM_TOL) {
            violations.push(format!("weights sum to {total}, expected 1"));
        }
        for (b, members) in self.blocks.iter().enumerate() {
            if members.is_empty() {
                violations.push(format!("empty block {b}"));
            } else if self.block_weight(b) <= 0.0 {
                violations.push(format!("block {b} has zero total weight"));
            }
        }
        ValidationReport::from_violations(violations)
    }

    /// Conditional expectation of a per-cell vector quantity given the block
    /// partition: the weight-averaged value of each block. Fails on blocks
    /// with zero total weight.
    pub fn conditional_expectation(
        &self,
        values: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>, MeasureError> {
        if values.len() != self.cells.len() {
            return Err(MeasureError::LengthMismatch {
                expected: self.cells.len(),
                found: values.len(),
            });
        }
        let mut out = Vec::with_capacity(self.blocks.len());
        for (b, members) in self.blocks.iter().enumerate() {
            out.push(block_mean(self, members, values).ok_or(MeasureError::DegenerateBlock {
                block: b,
            })?);
        }
        Ok(out)
    }

    /// Per-block maximum single-cell weight. A block dominated by one heavy
    /// cell behaves like an indivisible atom for purification purposes, and
    /// this margin is the quantity every residual bound scales with.
    pub fn atomlessness_margin(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|members| {
                members
                    .iter()
                    .map(|&id| self.cells[id].weight)
                    .fold(0.0f64, f64::max)
            })
            .collect()
    }
}

/// Weighted mean of `values` over the given cells; `None` when the cells
/// carry no weight.
pub(crate) fn block_mean(
    space: &DiscreteSpace,
    members: &[usize],
    values: &[Vec<f64>],
) -> Option<Vec<f64>> {
    let dim = values.first().map_or(0, |v| v.len());
    let mut acc = vec![0.0; dim];
    let mut wsum = 0.0;
    for &id in members {
        let w = space.weight(id);
        wsum += w;
        for (a, v) in acc.iter_mut().zip(&values[id]) {
            *a += w * v;
        }
    }
    if wsum <= 0.0 {
        return None;
    }
    for a in &mut acc {
        *a /= wsum;
    }
    Some(acc)
}

/// Outcome of an invariant check: `pass` is true iff no violations were
/// found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<String>) -> Self {
        ValidationReport {
            pass: violations.is_empty(),
            violations,
        }
    }

    pub fn merge(mut self, other: ValidationReport) -> ValidationReport {
        self.violations.extend(other.violations);
        ValidationReport::from_violations(self.violations)
    }
}

/// Parameter labels may arrive as JSON strings or numbers; numbers are
/// canonicalized through their shortest round-trip decimal form.
fn de_labels<'de, D>(de: D) -> Result<Vec<String>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Label {
        Text(String),
        Number(f64),
    }
    let raw = Vec::<Label>::deserialize(de)?;
    Ok(raw
        .into_iter()
        .map(|l| match l {
            Label::Text(s) => s,
            Label::Number(x) => x.to_string(),
        })
        .collect())
}

#[derive(Deserialize)]
struct DensityWire {
    #[serde(deserialize_with = "de_labels")]
    params: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Density table over cells and a finite parameter grid. `values[cell][p]`
/// is the density of the measure labeled by parameter `p` at that cell,
/// relative to the cell weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DensityWire")]
pub struct DensityFamily {
    pub params: Vec<String>,
    #[serde(rename = "rows")]
    pub values: Vec<Vec<f64>>,
}

impl TryFrom<DensityWire> for DensityFamily {
    type Error = MeasureError;

    fn try_from(wire: DensityWire) -> Result<Self, MeasureError> {
        DensityFamily::new(wire.params, wire.rows)
    }
}

impl DensityFamily {
    pub fn new(params: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        for (row, r) in values.iter().enumerate() {
            if r.len() != params.len() {
                return Err(MeasureError::RaggedRow {
                    row,
                    expected: params.len(),
                    found: r.len(),
                });
            }
        }
        Ok(DensityFamily { params, values })
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn param_index(&self, label: &str) -> Option<usize> {
        self.params.iter().position(|p| p == label)
    }

    /// Density value at `(cell, param index)`.
    pub fn value(&self, cell: usize, param: usize) -> f64 {
        self.values[cell][param]
    }

    /// Checks nonnegativity and that every column integrates to one against
    /// the space's weights, within `tol`.
    pub fn validate_with(&self, space: &DiscreteSpace, tol: f64) -> ValidationReport {
        let mut violations = Vec::new();
        if self.values.len() != space.len() {
            violations.push(format!(
                "density table has {} rows, space has {} cells",
                self.values.len(),
                space.len()
            ));
            return ValidationReport::from_violations(violations);
        }
        for (cell, row) in self.values.iter().enumerate() {
            for (p, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    violations.push(format!(
                        "density for cell {cell}, parameter {} is {v}",
                        self.params[p]
                    ));
                }
            }
        }
        for p in 0..self.params.len() {
            let terms: Vec<f64> = (0..space.len())
                .map(|cell| space.weight(cell) * self.values[cell][p])
                .collect();
            let total = pairwise_sum(&terms);
            if !(total - 1.0).abs().le(&tol) {
                violations.push(format!(
                    "density column {} integrates to {total}, expected 1",
                    self.params[p]
                ));
            }
        }
        ValidationReport::from_violations(violations)
    }

    pub fn validate(&self, space: &DiscreteSpace) -> ValidationReport {
        self.validate_with(space, DENSITY_SUM_TOL)
    }

    /// Largest integration defect over the columns, `max_p |sum - 1|`.
    pub fn integration_defect(&self, space: &DiscreteSpace) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..self.params.len() {
            let terms: Vec<f64> = (0..space.len())
                .map(|cell| space.weight(cell) * self.values[cell][p])
                .collect();
            worst = worst.max((pairwise_sum(&terms) - 1.0).abs());
        }
        worst
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, &v| m.max(v))
    }
}

/// Densities of several measures against the cell weights:
/// `densities[cell][i]` is the density of measure `i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureFamily {
    pub densities: Vec<Vec<f64>>,
}

impl MeasureFamily {
    pub fn new(densities: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        let k = densities.first().map_or(0, |r| r.len());
        for (row, r) in densities.iter().enumerate() {
            if r.len() != k {
                return Err(MeasureError::RaggedRow {
                    row,
                    expected: k,
                    found: r.len(),
                });
            }
        }
        Ok(MeasureFamily { densities })
    }

    pub fn num_measures(&self) -> usize {
        self.densities.first().map_or(0, |r| r.len())
    }

    pub fn validate(&self, space: &DiscreteSpace) -> ValidationReport {
        let mut violations = Vec::new();
        if self.densities.len() != space.len() {
            violations.push(format!(
                "measure table has {} rows, space has {} cells",
                self.densities.len(),
                space.len()
            ));
            return ValidationReport::from_violations(violations);
        }
        let k = self.num_measures();
        for (cell, row) in self.densities.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    violations.push(format!("density of measure {i} at cell {cell} is {v}"));
                }
            }
        }
        for i in 0..k {
            let terms: Vec<f64> = (0..space.len())
                .map(|cell| space.weight(cell) * self.densities[cell][i])
                .collect();
            let total = pairwise_sum(&terms);
            if !(total - 1.0).abs().le(&DENSITY_SUM_TOL) {
                violations.push(format!(
                    "measure {i} integrates to {total}, expected 1"
                ));
            }
        }
        ValidationReport::from_violations(violations)
    }
}

/// Groups cells into blocks by their density rows.
///
/// With `tol > 0` each coordinate is quantized to `round(value / tol)` and
/// cells with equal quantized rows share a block, which keeps the grouping
/// deterministic and independent of cell order. With `tol == 0` rows must
/// match bit-for-bit (negative zero is normalized first). Blocks are
/// numbered by first appearance in cell order.
///
/// The density table must have one row per cell.
pub fn blocks_from_densities(
    space: &DiscreteSpace,
    fam: &DensityFamily,
    tol: f64,
) -> Vec<Vec<usize>> {
    assert_eq!(
        fam.values.len(),
        space.len(),
        "density table must have one row per cell"
    );
    assert!(tol >= 0.0, "grouping tolerance must be nonnegative");

    let mut keys: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (cell, row) in fam.values.iter().enumerate() {
        let key: Vec<u64> = row
            .iter()
            .map(|&v| {
                if tol > 0.0 {
                    let q = (v / tol).round();
                    // Clamp instead of wrapping when the quotient overflows i64.
                    let q = q.clamp(i64::MIN as f64, i64::MAX as f64);
                    (q as i64) as u64
                } else {
                    let v = if v == 0.0 { 0.0 } else { v };
                    v.to_bits()
                }
            })
            .collect();
        let next = blocks.len();
        let b = *keys.entry(key).or_insert(next);
        if b == next {
            blocks.push(Vec::new());
        }
        blocks[b].push(cell);
    }
    blocks
}
