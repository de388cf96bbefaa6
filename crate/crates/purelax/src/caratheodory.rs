//! Support reduction for convex combinations.
//!
//! Any barycenter of finitely many points in R^n is already the barycenter
//! of at most n+1 of them. This module computes such a reduced combination
//! by repeatedly finding an affine dependence among the active points and
//! shifting weight along it until a weight hits zero. Applied cell-by-cell
//! to a randomized decision, the reduction yields a certificate that each
//! cell's mean integrand is a small convex combination of its action rows,
//! which is what the purification rounding step consumes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{nullspace_vector, pairwise_sum, Matrix};
use crate::purify::{DecisionInstance, RandomizedDecision};

/// Barycenter drift allowed through a whole reduction.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Weights at or below this after an elimination step are dropped.
const SNAP_TOL: f64 = 1e-12;
/// Direction entries at or below this are ignored by the ratio test.
const RATIO_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum CaratheodoryError {
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("support reduction stalled after {iterations} iterations")]
    NumericalDegeneracy { iterations: usize },
    #[error("cell {cell}: {source}")]
    CellDegeneracy {
        cell: usize,
        #[source]
        source: Box<CaratheodoryError>,
    },
}

/// A convex combination over an external point list: `weights[k]` is the
/// coefficient attached to point `indices[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCombination {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl ConvexCombination {
    pub fn support(&self) -> usize {
        self.indices.len()
    }
}

/// One reduced combination per cell, each over that cell's action list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaratheodoryCertificate {
    pub combos: Vec<ConvexCombination>,
    pub dim: usize,
}

/// Weighted sum of points, the combination's barycenter.
pub fn barycenter(points: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>, CaratheodoryError> {
    if points.len() != weights.len() {
        return Err(CaratheodoryError::DimensionMismatch {
            expected: points.len(),
            found: weights.len(),
        });
    }
    let dim = points.first().map_or(0, |p| p.len());
    for p in points {
        if p.len() != dim {
            return Err(CaratheodoryError::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
    }
    let mut out = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        for (o, &x) in out.iter_mut().zip(p) {
            *o += w * x;
        }
    }
    Ok(out)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Reduces a convex combination of points in R^n to one supported on at
/// most n+1 of them with the same barycenter.
///
/// Zero-weight entries are dropped up front; every returned index carried
/// positive weight in the input. The elimination loop removes at least one
/// point per step, so it runs at most `initial support` times.
pub fn reduce_support(
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<ConvexCombination, CaratheodoryError> {
    let target = barycenter(points, weights)?;
    let dim = points.first().map_or(0, |p| p.len());

    let mut active: Vec<usize> = (0..points.len()).filter(|&i| weights[i] > 0.0).collect();
    let mut w: Vec<f64> = active.iter().map(|&i| weights[i]).collect();
    if active.is_empty() {
        return Err(CaratheodoryError::NumericalDegeneracy { iterations: 0 });
    }

    let max_iters = active.len() + 4;
    let mut iterations = 0usize;
    while active.len() > dim + 1 {
        iterations += 1;
        if iterations > max_iters {
            return Err(CaratheodoryError::NumericalDegeneracy { iterations });
        }
        // Affine dependence: rows are the point coordinates plus an all-ones
        // row, so any null vector c satisfies sum c_i p_i = 0 and sum c_i = 0.
        let s = active.len();
        let mut a = Matrix::zeros(dim + 1, s);
        for (col, &idx) in active.iter().enumerate() {
            for row in 0..dim {
                a.set(row, col, points[idx][row]);
            }
            a.set(dim, col, 1.0);
        }
        let mut c = match nullspace_vector(&a) {
            Some(c) => c,
            None => return Err(CaratheodoryError::NumericalDegeneracy { iterations }),
        };
        if !c.iter().any(|&v| v > RATIO_TOL) {
            for v in &mut c {
                *v = -*v;
            }
        }
        let mut hit: Option<(usize, f64)> = None;
        for (k, &ck) in c.iter().enumerate() {
            if ck > RATIO_TOL {
                let t = w[k] / ck;
                if hit.map_or(true, |(_, best)| t < best) {
                    hit = Some((k, t));
                }
            }
        }
        let (kill, t) = match hit {
            Some(h) => h,
            None => return Err(CaratheodoryError::NumericalDegeneracy { iterations }),
        };
        for (wk, &ck) in w.iter_mut().zip(&c) {
            *wk -= t * ck;
        }
        w[kill] = 0.0;
        let mut next_active = Vec::with_capacity(s);
        let mut next_w = Vec::with_capacity(s);
        for (k, &idx) in active.iter().enumerate() {
            if w[k] > SNAP_TOL {
                next_active.push(idx);
                next_w.push(w[k]);
            }
        }
        let total = pairwise_sum(&next_w);
        if !(total.is_finite() && total > 0.0) {
            return Err(CaratheodoryError::NumericalDegeneracy { iterations });
        }
        for wk in &mut next_w {
            *wk /= total;
        }
        active = next_active;
        w = next_w;
    }

    let combo = ConvexCombination {
        indices: active,
        weights: w,
    };
    let pts: Vec<Vec<f64>> = combo.indices.iter().map(|&i| points[i].clone()).collect();
    let got = barycenter(&pts, &combo.weights)?;
    if max_abs_diff(&got, &target) > RECONSTRUCTION_TOL {
        return Err(CaratheodoryError::NumericalDegeneracy { iterations });
    }
    Ok(combo)
}

/// Reduces a randomized decision cell-by-cell: each cell's probability
/// vector over its actions becomes a combination of at most n+1 actions
/// with the same mean integrand. Probabilities at or below 1e-12 are
/// treated as zero and the remainder renormalized before reduction.
pub fn decompose_decision(
    instance: &DecisionInstance,
    phi: &RandomizedDecision,
) -> Result<CaratheodoryCertificate, CaratheodoryError> {
    let n = instance.n();
    let mut combos = Vec::with_capacity(instance.space().len());
    for (cell, probs) in phi.probs.iter().enumerate() {
        let rows = instance.g_rows(cell);
        if probs.len() != rows.len() {
            return Err(CaratheodoryError::CellDegeneracy {
                cell,
                source: Box::new(CaratheodoryError::DimensionMismatch {
                    expected: rows.len(),
                    found: probs.len(),
                }),
            });
        }
        let kept: Vec<usize> = (0..probs.len()).filter(|&j| probs[j] > 1e-12).collect();
        if kept.is_empty() {
            return Err(CaratheodoryError::CellDegeneracy {
                cell,
                source: Box::new(CaratheodoryError::NumericalDegeneracy { iterations: 0 }),
            });
        }
        let kept_w: Vec<f64> = kept.iter().map(|&j| probs[j]).collect();
        let total = pairwise_sum(&kept_w);
        let kept_w: Vec<f64> = kept_w.iter().map(|w| w / total).collect();
        let kept_pts: Vec<Vec<f64>> = kept.iter().map(|&j| rows[j].clone()).collect();
        let reduced = reduce_support(&kept_pts, &kept_w).map_err(|source| {
            CaratheodoryError::CellDegeneracy {
                cell,
                source: Box::new(source),
            }
        })?;
        combos.push(ConvexCombination {
            indices: reduced.indices.iter().map(|&k| kept[k]).collect(),
            weights: reduced.weights,
        });
    }
    Ok(CaratheodoryCertificate { combos, dim: n })
}
