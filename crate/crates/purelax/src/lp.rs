//! Dense linear programming over bounded variables.
//!
//! Two-phase primal simplex with per-variable bounds. Slacks turn every row
//! into an equality; rows whose initial slack value violates its bounds get
//! an artificial variable that phase one drives to zero. Returned optima
//! are vertices: at most `rows` variables sit strictly between their
//! bounds, which is the structural fact the purification rounding step
//! relies on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{invert, Matrix};

/// Absolute feasibility tolerance on rows and bounds.
pub const FEAS_TOL: f64 = 1e-8;
/// Relative duality-gap tolerance accepted at optimality.
pub const GAP_RTOL: f64 = 1e-6;
/// Reduced costs within this of zero are treated as zero.
const RC_TOL: f64 = 1e-9;
/// Pivot elements smaller than this trigger reinversion or failure.
const PIVOT_TOL: f64 = 1e-11;
/// Basis reinversion cadence in pivots.
const REFRESH_EVERY: usize = 300;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("iteration limit {limit} exceeded")]
    IterationLimit { limit: usize },
    #[error("numerically unstable solve: {0}")]
    Unstable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `bounds[j] = (lo, hi)`; `lo` may be `-inf` and `hi` may be `+inf`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// Row-oriented text form for debugging.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Maximize => "max",
            Sense::Minimize => "min",
        };
        let _ = writeln!(out, "{sense} {:?}", self.objective);
        for c in &self.constraints {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "==",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, "  {:?} {rel} {}", c.coeffs, c.rhs);
        }
        let _ = writeln!(out, "  bounds {:?}", self.bounds);
        out
    }

    fn check(&self) -> Result<(), LpError> {
        let v = self.objective.len();
        if self.bounds.len() != v {
            return Err(LpError::Malformed(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                v
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective entry".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || !(lo <= hi) {
                return Err(LpError::Malformed(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != v {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients for {v} variables",
                    c.coeffs.len()
                )));
            }
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Vertex solution. `values` covers the structural variables only; `basis`
/// lists basic column indices where indices at or above the variable count
/// denote row slacks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasicSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub basis: Vec<usize>,
    pub status: SolveStatus,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Location {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    Floating,
}

enum LoopEnd {
    Converged,
    Unbounded,
}

struct Simplex {
    m: usize,
    v: usize,
    /// Column-major matrix: structurals, then one slack per row, then
    /// artificials appended during setup.
    cols: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    loc: Vec<Location>,
    x: Vec<f64>,
    binv: Matrix,
    first_artificial: usize,
    pivots: usize,
    iterations: usize,
    limit: usize,
}

impl Simplex {
    fn new(lp: &LinearProgram) -> Simplex {
        let v = lp.objective.len();
        let m = lp.constraints.len();
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(v + m);
        for j in 0..v {
            cols.push(lp.constraints.iter().map(|c| c.coeffs[j]).collect());
        }
        let mut lo: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();
        let mut hi: Vec<f64> = lp.bounds.iter().map(|b| b.1).collect();
        for i in 0..m {
            let mut col = vec![0.0; m];
            col[i] = 1.0;
            cols.push(col);
            match lp.constraints[i].relation {
                Relation::Le => {
                    lo.push(0.0);
                    hi.push(f64::INFINITY);
                }
                Relation::Ge => {
                    lo.push(f64::NEG_INFINITY);
                    hi.push(0.0);
                }
                Relation::Eq => {
                    lo.push(0.0);
                    hi.push(0.0);
                }
            }
        }
        let rhs: Vec<f64> = lp.constraints.iter().map(|c| c.rhs).collect();

        // Park structurals at a finite bound, or at zero when free.
        let mut loc = Vec::with_capacity(v + m);
        let mut x = Vec::with_capacity(v + m);
        for j in 0..v {
            if lo[j].is_finite() {
                loc.push(Location::AtLower);
                x.push(lo[j]);
            } else if hi[j].is_finite() {
                loc.push(Location::AtUpper);
                x.push(hi[j]);
            } else {
                loc.push(Location::Floating);
                x.push(0.0);
            }
        }

        // Slack basis; rows whose implied slack value violates its bounds
        // get the slack parked at the violated bound plus a basic artificial
        // absorbing the residual.
        let mut basis = Vec::with_capacity(m);
        let mut artificial_rows = Vec::new();
        for i in 0..m {
            let mut implied = rhs[i];
            for j in 0..v {
                if x[j] != 0.0 {
                    implied -= cols[j][i] * x[j];
                }
            }
            let sj = v + i;
            let clamped = implied.clamp(lo[sj], hi[sj]);
            if implied == clamped {
                basis.push(sj);
                loc.push(Location::Basic);
                x.push(implied);
            } else {
                loc.push(if clamped == lo[sj] {
                    Location::AtLower
                } else {
                    Location::AtUpper
                });
                x.push(clamped);
                artificial_rows.push((i, implied - clamped));
            }
        }
        let first_artificial = cols.len();
        for &(i, residual) in &artificial_rows {
            let mut col = vec![0.0; m];
            col[i] = residual.signum();
            cols.push(col);
            lo.push(0.0);
            hi.push(f64::INFINITY);
            loc.push(Location::Basic);
            x.push(residual.abs());
            basis.push(cols.len() - 1);
        }
        // Order the basis by row: artificial rows replace their slack slot.
        let mut by_row = vec![usize::MAX; m];
        for &b in &basis {
            let row = if b >= first_artificial {
                artificial_rows[b - first_artificial].0
            } else {
                b - v
            };
            by_row[row] = b;
        }
        let basis = by_row;

        // Every initial basic column is a unit vector up to sign, so the
        // inverse is the diagonal of reciprocals; artificials can carry -1.
        let mut binv = Matrix::identity(m);
        for (r, &b) in basis.iter().enumerate() {
            binv.set(r, r, 1.0 / cols[b][r]);
        }

        let ncols = cols.len();
        let limit = (20 * (ncols + m)).max(2000);
        Simplex {
            m,
            v,
            cols,
            lo,
            hi,
            rhs,
            basis,
            loc,
            x,
            binv,
            first_artificial,
            pivots: 0,
            iterations: 0,
            limit,
        }
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Rebuilds the basis inverse from scratch and recomputes basic values.
    fn refresh(&mut self) -> Result<(), LpError> {
        if self.m == 0 {
            return Ok(());
        }
        let mut b = Matrix::zeros(self.m, self.m);
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..self.m {
                b.set(i, k, self.cols[j][i]);
            }
        }
        self.binv = invert(&b).ok_or_else(|| LpError::Unstable("singular basis".into()))?;
        let mut r = self.rhs.clone();
        for j in 0..self.ncols() {
            if self.loc[j] != Location::Basic && self.x[j] != 0.0 {
                for i in 0..self.m {
                    r[i] -= self.cols[j][i] * self.x[j];
                }
            }
        }
        for k in 0..self.m {
            let mut val = 0.0;
            for i in 0..self.m {
                val += self.binv.at(k, i) * r[i];
            }
            self.x[self.basis[k]] = val;
        }
        Ok(())
    }

    fn dual_prices(&self, costs: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (k, &j) in self.basis.iter().enumerate() {
            let cb = costs[j];
            if cb != 0.0 {
                for i in 0..self.m {
                    y[i] += cb * self.binv.at(k, i);
                }
            }
        }
        y
    }

    fn reduced_cost(&self, costs: &[f64], y: &[f64], j: usize) -> f64 {
        let mut d = costs[j];
        for i in 0..self.m {
            if y[i] != 0.0 {
                d -= y[i] * self.cols[j][i];
            }
        }
        d
    }

    /// Primal simplex minimizing `costs` from the current basis.
    fn optimize(&mut self, costs: &[f64]) -> Result<LoopEnd, LpError> {
        let bland_after = self.iterations + 2 * (self.ncols() + self.m);
        loop {
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(LpError::IterationLimit { limit: self.limit });
            }
            let bland = self.iterations > bland_after;
            let y = self.dual_prices(costs);

            // Pricing: pick an entering column that improves the objective.
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.ncols() {
                if self.loc[j] == Location::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let d = self.reduced_cost(costs, &y, j);
                let dir = match self.loc[j] {
                    Location::AtLower if d < -RC_TOL => 1.0,
                    Location::AtUpper if d > RC_TOL => -1.0,
                    Location::Floating if d.abs() > RC_TOL => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, d));
                    break;
                }
                if entering.map_or(true, |(_, _, best)| d.abs() > best.abs()) {
                    entering = Some((j, dir, d));
                }
            }
            let (q, dir, _) = match entering {
                Some(e) => e,
                None => return Ok(LoopEnd::Converged),
            };

            // Ratio test: how far x_q can move before a basic variable or
            // x_q itself hits a bound.
            let mut w = vec![0.0; self.m];
            for k in 0..self.m {
                let mut val = 0.0;
                for i in 0..self.m {
                    val += self.binv.at(k, i) * self.cols[q][i];
                }
                w[k] = val;
            }
            let own_room = self.hi[q] - self.lo[q];
            let mut best_t = own_room;
            let mut leave: Option<(usize, bool)> = None;
            for (k, &wk) in w.iter().enumerate() {
                let rate = -dir * wk;
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[k];
                let (room, to_upper) = if rate > 0.0 {
                    (self.hi[b] - self.x[b], true)
                } else {
                    (self.x[b] - self.lo[b], false)
                };
                if !room.is_finite() {
                    continue;
                }
                let t = (room / rate.abs()).max(0.0);
                let replace = match leave {
                    None => t < best_t || (t <= best_t && !best_t.is_finite()),
                    Some((kk, _)) => {
                        t < best_t - 1e-12
                            || (t <= best_t + 1e-12
                                && if bland {
                                    self.basis[k] < self.basis[kk]
                                } else {
                                    wk.abs() > w[kk].abs()
                                })
                    }
                };
                if replace {
                    best_t = t.min(best_t);
                    leave = Some((k, to_upper));
                }
            }

            if !best_t.is_finite() {
                return Ok(LoopEnd::Unbounded);
            }

            match leave {
                None => {
                    // Bound flip: x_q crosses to its opposite bound.
                    let t = best_t;
                    for (k, &wk) in w.iter().enumerate() {
                        if wk != 0.0 {
                            let b = self.basis[k];
                            self.x[b] -= dir * t * wk;
                        }
                    }
                    if dir > 0.0 {
                        self.x[q] = self.hi[q];
                        self.loc[q] = Location::AtUpper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.loc[q] = Location::AtLower;
                    }
                }
                Some((r, to_upper)) => {
                    let t = best_t;
                    if w[r].abs() <= PIVOT_TOL {
                        return Err(LpError::Unstable("vanishing pivot element".into()));
                    }
                    for (k, &wk) in w.iter().enumerate() {
                        if wk != 0.0 {
                            let b = self.basis[k];
                            self.x[b] -= dir * t * wk;
                        }
                    }
                    self.x[q] += dir * t;
                    let out = self.basis[r];
                    self.x[out] = if to_upper { self.hi[out] } else { self.lo[out] };
                    self.loc[out] = if to_upper {
                        Location::AtUpper
                    } else {
                        Location::AtLower
                    };
                    self.loc[q] = Location::Basic;
                    self.basis[r] = q;
                    self.eta_update(r, &w);
                    self.pivots += 1;
                    if self.pivots % REFRESH_EVERY == 0 {
                        self.refresh()?;
                    }
                }
            }
        }
    }

    /// Product-form update of the basis inverse after column `r` of the
    /// basis is replaced; `w` is binv times the entering column.
    fn eta_update(&mut self, r: usize, w: &[f64]) {
        let piv = w[r];
        for i in 0..self.m {
            let val = self.binv.at(r, i) / piv;
            self.binv.set(r, i, val);
        }
        for k in 0..self.m {
            if k == r || w[k] == 0.0 {
                continue;
            }
            let f = w[k];
            for i in 0..self.m {
                let val = self.binv.at(k, i) - f * self.binv.at(r, i);
                self.binv.set(k, i, val);
            }
        }
    }

    /// Drives artificials out of the basis after phase one where possible;
    /// redundant rows keep a pinned artificial at zero.
    fn expel_artificials(&mut self) -> Result<(), LpError> {
        for r in 0..self.m {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let mut replacement = None;
            for j in 0..self.first_artificial {
                if self.loc[j] == Location::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let mut wr = 0.0;
                for i in 0..self.m {
                    wr += self.binv.at(r, i) * self.cols[j][i];
                }
                if wr.abs() > 1e-7 {
                    replacement = Some(j);
                    break;
                }
            }
            if let Some(q) = replacement {
                let mut w = vec![0.0; self.m];
                for k in 0..self.m {
                    let mut val = 0.0;
                    for i in 0..self.m {
                        val += self.binv.at(k, i) * self.cols[q][i];
                    }
                    w[k] = val;
                }
                let out = self.basis[r];
                self.x[out] = 0.0;
                self.loc[out] = Location::AtLower;
                self.loc[q] = Location::Basic;
                self.basis[r] = q;
                self.eta_update(r, &w);
                self.pivots += 1;
            }
        }
        // Pin every artificial so phase two can never move one.
        for j in self.first_artificial..self.ncols() {
            self.hi[j] = 0.0;
        }
        Ok(())
    }

    fn phase_costs(&self, lp: &LinearProgram, phase1: bool) -> Vec<f64> {
        let mut costs = vec![0.0; self.ncols()];
        if phase1 {
            for c in costs.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
        } else {
            let flip = match lp.sense {
                Sense::Maximize => -1.0,
                Sense::Minimize => 1.0,
            };
            for j in 0..self.v {
                costs[j] = flip * lp.objective[j];
            }
        }
        costs
    }

    fn infeasibility(&self) -> f64 {
        self.x[self.first_artificial..]
            .iter()
            .map(|v| v.max(0.0))
            .sum()
    }

    fn structurals(&self) -> Vec<f64> {
        self.x[..self.v].to_vec()
    }

    fn basis_report(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .basis
            .iter()
            .enumerate()
            .map(|(r, &b)| if b >= self.first_artificial { self.v + r } else { b })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Row feasibility and bound feasibility of the current point.
    fn primal_violation(&self, lp: &LinearProgram) -> f64 {
        let mut worst = 0.0f64;
        for (j, &xj) in self.x.iter().enumerate().take(self.v) {
            worst = worst.max(self.lo[j] - xj).max(xj - self.hi[j]);
        }
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut ax = 0.0;
            for (j, &a) in c.coeffs.iter().enumerate() {
                if a != 0.0 {
                    ax += a * self.x[j];
                }
            }
            let gap = match c.relation {
                Relation::Le => ax - c.rhs,
                Relation::Ge => c.rhs - ax,
                Relation::Eq => (ax - c.rhs).abs(),
            };
            worst = worst.max(gap);
            let _ = i;
        }
        worst
    }

    fn duality_gap(&self, costs: &[f64]) -> f64 {
        let y = self.dual_prices(costs);
        let mut zd = 0.0;
        for i in 0..self.m {
            zd += y[i] * self.rhs[i];
        }
        for j in 0..self.ncols() {
            if self.loc[j] == Location::Basic {
                continue;
            }
            if self.x[j] != 0.0 {
                zd += self.reduced_cost(costs, &y, j) * self.x[j];
            }
        }
        let mut zp = 0.0;
        for (j, &c) in costs.iter().enumerate() {
            if c != 0.0 {
                zp += c * self.x[j];
            }
        }
        (zp - zd).abs() / zp.abs().max(1.0)
    }
}

fn objective_of(lp: &LinearProgram, values: &[f64]) -> f64 {
    lp.objective
        .iter()
        .zip(values)
        .map(|(c, x)| c * x)
        .sum()
}

fn run(lp: &LinearProgram, stop_after_phase1: bool) -> Result<BasicSolution, LpError> {
    lp.check()?;
    let mut s = Simplex::new(lp);

    let p1 = s.phase_costs(lp, true);
    match s.optimize(&p1)? {
        LoopEnd::Converged => {}
        LoopEnd::Unbounded => {
            return Err(LpError::Unstable(
                "phase one produced an unbounded direction".into(),
            ))
        }
    }
    if s.m > 0 {
        s.refresh()?;
    }
    if s.infeasibility() > FEAS_TOL {
        return Ok(BasicSolution {
            values: s.structurals(),
            objective_value: f64::NAN,
            basis: s.basis_report(),
            status: SolveStatus::Infeasible,
        });
    }
    s.expel_artificials()?;

    if !stop_after_phase1 {
        let p2 = s.phase_costs(lp, false);
        match s.optimize(&p2)? {
            LoopEnd::Converged => {}
            LoopEnd::Unbounded => {
                let inf = match lp.sense {
                    Sense::Maximize => f64::INFINITY,
                    Sense::Minimize => f64::NEG_INFINITY,
                };
                return Ok(BasicSolution {
                    values: s.structurals(),
                    objective_value: inf,
                    basis: s.basis_report(),
                    status: SolveStatus::Unbounded,
                });
            }
        }
        if s.m > 0 {
            s.refresh()?;
        }
        let violation = s.primal_violation(lp);
        if violation > FEAS_TOL {
            return Err(LpError::Unstable(format!(
                "optimal point violates feasibility by {violation:.3e}"
            )));
        }
        let p2 = s.phase_costs(lp, false);
        let gap = s.duality_gap(&p2);
        if gap > GAP_RTOL {
            return Err(LpError::Unstable(format!(
                "duality gap {gap:.3e} exceeds tolerance"
            )));
        }
    } else {
        let violation = s.primal_violation(lp);
        if violation > FEAS_TOL {
            return Err(LpError::Unstable(format!(
                "phase-one point violates feasibility by {violation:.3e}"
            )));
        }
    }

    let values = s.structurals();
    Ok(BasicSolution {
        objective_value: objective_of(lp, &values),
        values,
        basis: s.basis_report(),
        status: SolveStatus::Optimal,
    })
}

/// Solves the program to a vertex optimum.
pub fn solve(lp: &LinearProgram) -> Result<BasicSolution, LpError> {
    run(lp, false)
}

/// Phase one only: finds a basic feasible point or reports infeasibility,
/// ignoring the objective (the returned objective value is informational).
pub fn feasibility(lp: &LinearProgram) -> Result<BasicSolution, LpError> {
    run(lp, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn lp(
        sense: Sense,
        objective: Vec<f64>,
        rows: Vec<(Vec<f64>, Relation, f64)>,
        bounds: Vec<(f64, f64)>,
    ) -> LinearProgram {
        LinearProgram {
            sense,
            objective,
            constraints: rows
                .into_iter()
                .map(|(coeffs, relation, rhs)| Constraint {
                    coeffs,
                    relation,
                    rhs,
                })
                .collect(),
            bounds,
        }
    }

    #[test]
    fn simplex_on_a_triangle() {
        let p = lp(
            Sense::Maximize,
            vec![1.0, 1.0],
            vec![(vec![1.0, 1.0], Relation::Le, 1.0)],
            vec![(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let p = lp(
            Sense::Maximize,
            vec![1.0],
            vec![
                (vec![1.0], Relation::Ge, 2.0),
                (vec![1.0], Relation::Le, 1.0),
            ],
            vec![(0.0, f64::INFINITY)],
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn missing_ceiling_is_unbounded() {
        let p = lp(
            Sense::Maximize,
            vec![1.0],
            vec![],
            vec![(0.0, f64::INFINITY)],
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
        assert_eq!(sol.objective_value, f64::INFINITY);
    }

    #[test]
    fn single_equality_is_feasible() {
        let p = lp(
            Sense::Maximize,
            vec![0.0],
            vec![(vec![1.0], Relation::Eq, 0.5)],
            vec![(0.0, 1.0)],
        );
        let sol = feasibility(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.values[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let p = lp(
            Sense::Minimize,
            vec![0.0, 0.0],
            vec![
                (vec![1.0, 1.0], Relation::Eq, 1.0),
                (vec![1.0, 1.0], Relation::Eq, 2.0),
            ],
            vec![(0.0, 10.0), (0.0, 10.0)],
        );
        let sol = feasibility(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn equalities_with_negative_activity_need_negative_artificials() {
        let p = lp(
            Sense::Minimize,
            vec![1.0, 1.0],
            vec![(vec![1.0, -1.0], Relation::Eq, -2.0)],
            vec![(0.0, 5.0), (0.0, 5.0)],
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-8);
        assert!((sol.values[1] - sol.values[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn free_variables_can_go_negative() {
        let p = lp(
            Sense::Minimize,
            vec![1.0],
            vec![(vec![1.0], Relation::Ge, -3.0)],
            vec![(f64::NEG_INFINITY, f64::INFINITY)],
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value + 3.0).abs() < 1e-8);
    }

    #[test]
    fn upper_bounded_variables_flip_to_their_ceiling() {
        let p = lp(
            Sense::Maximize,
            vec![1.0, 2.0],
            vec![(vec![1.0, 1.0], Relation::Le, 1.5)],
            vec![(0.0, 1.0), (0.0, 1.0)],
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 2.5).abs() < 1e-8);
        assert!((sol.values[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_rows_still_converge() {
        let p = lp(
            Sense::Maximize,
            vec![1.0, 1.0, 1.0],
            vec![
                (vec![1.0, 1.0, 0.0], Relation::Le, 1.0),
                (vec![1.0, 1.0, 0.0], Relation::Le, 1.0),
                (vec![0.0, 0.0, 1.0], Relation::Le, 0.0),
            ],
            vec![(0.0, f64::INFINITY); 3],
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        let p = lp(
            Sense::Maximize,
            vec![1.0, 1.0],
            vec![(vec![1.0], Relation::Le, 1.0)],
            vec![(0.0, 1.0), (0.0, 1.0)],
        );
        assert!(matches!(solve(&p), Err(LpError::Malformed(_))));
        let p = lp(Sense::Maximize, vec![1.0], vec![], vec![(2.0, 1.0)]);
        assert!(matches!(solve(&p), Err(LpError::Malformed(_))));
    }

    #[test]
    fn dump_lists_every_row() {
        let p = lp(
            Sense::Minimize,
            vec![1.0],
            vec![(vec![2.0], Relation::Ge, 1.0)],
            vec![(0.0, 4.0)],
        );
        let text = p.dump();
        assert!(text.contains("min"));
        assert!(text.contains(">="));
        assert!(text.contains("bounds"));
    }

    // Random bounded-feasible generator shared by the oracle tests: boxes
    // are finite and a random interior point is forced feasible.
    pub(crate) fn random_lp(seed: u64, v: usize, rows: usize) -> LinearProgram {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut bounds = Vec::with_capacity(v);
        let mut x0 = Vec::with_capacity(v);
        for _ in 0..v {
            let lo = rng.gen_range(-2.0..0.0);
            let hi = lo + rng.gen_range(0.5..3.0);
            bounds.push((lo, hi));
            x0.push(rng.gen_range(0.2..0.8) * (hi - lo) + lo);
        }
        let mut constraints = Vec::with_capacity(rows);
        for _ in 0..rows {
            let coeffs: Vec<f64> = (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ax: f64 = coeffs.iter().zip(&x0).map(|(a, x)| a * x).sum();
            let kind = rng.gen_range(0..5);
            let (relation, rhs) = match kind {
                0 => (Relation::Eq, ax),
                1 | 2 => (Relation::Le, ax + rng.gen_range(0.0..1.0)),
                _ => (Relation::Ge, ax - rng.gen_range(0.0..1.0)),
            };
            constraints.push(Constraint {
                coeffs,
                relation,
                rhs,
            });
        }
        let objective: Vec<f64> = (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect();
        LinearProgram {
            sense: if rng.gen_bool(0.5) {
                Sense::Maximize
            } else {
                Sense::Minimize
            },
            objective,
            constraints,
            bounds,
        }
    }

    /// Exhaustive vertex enumeration for small boxes: every choice of
    /// active rows plus variables pinned to a bound that yields a square
    /// nonsingular system produces a candidate vertex.
    pub(crate) fn vertex_enumeration_optimum(lp: &LinearProgram) -> Option<f64> {
        use crate::linalg::invert;
        let v = lp.objective.len();
        let eq_rows: Vec<usize> = (0..lp.constraints.len())
            .filter(|&i| lp.constraints[i].relation == Relation::Eq)
            .collect();
        let ineq_rows: Vec<usize> = (0..lp.constraints.len())
            .filter(|&i| lp.constraints[i].relation != Relation::Eq)
            .collect();
        if eq_rows.len() > v {
            return None;
        }
        let mut best: Option<f64> = None;
        let nin = ineq_rows.len();
        for rowmask in 0u32..(1 << nin) {
            let chosen: Vec<usize> = (0..nin)
                .filter(|&k| rowmask & (1 << k) != 0)
                .map(|k| ineq_rows[k])
                .collect();
            let need = v as isize - eq_rows.len() as isize - chosen.len() as isize;
            if need < 0 {
                continue;
            }
            let need = need as usize;
            for varmask in 0u32..(1 << v) {
                if (varmask.count_ones() as usize) != need {
                    continue;
                }
                let pinned: Vec<usize> = (0..v).filter(|&j| varmask & (1 << j) != 0).collect();
                for sides in 0u32..(1 << need) {
                    let mut a = Matrix::zeros(v, v);
                    let mut b = vec![0.0; v];
                    let mut r = 0;
                    for &i in eq_rows.iter().chain(&chosen) {
                        for j in 0..v {
                            a.set(r, j, lp.constraints[i].coeffs[j]);
                        }
                        b[r] = lp.constraints[i].rhs;
                        r += 1;
                    }
                    for (k, &j) in pinned.iter().enumerate() {
                        a.set(r, j, 1.0);
                        b[r] = if sides & (1 << k) != 0 {
                            lp.bounds[j].1
                        } else {
                            lp.bounds[j].0
                        };
                        r += 1;
                    }
                    let inv = match invert(&a) {
                        Some(m) => m,
                        None => continue,
                    };
                    let mut x = vec![0.0; v];
                    for i in 0..v {
                        for j in 0..v {
                            x[i] += inv.at(i, j) * b[j];
                        }
                    }
                    let pad = 1e-9;
                    let ok_bounds = (0..v)
                        .all(|j| x[j] >= lp.bounds[j].0 - pad && x[j] <= lp.bounds[j].1 + pad);
                    if !ok_bounds {
                        continue;
                    }
                    let ok_rows = lp.constraints.iter().all(|c| {
                        let ax: f64 = c.coeffs.iter().zip(&x).map(|(a, x)| a * x).sum();
                        match c.relation {
                            Relation::Le => ax <= c.rhs + pad,
                            Relation::Ge => ax >= c.rhs - pad,
                            Relation::Eq => (ax - c.rhs).abs() <= pad,
                        }
                    });
                    if !ok_rows {
                        continue;
                    }
                    let obj: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                    best = Some(match (best, lp.sense) {
                        (None, _) => obj,
                        (Some(b0), Sense::Maximize) => b0.max(obj),
                        (Some(b0), Sense::Minimize) => b0.min(obj),
                    });
                }
            }
        }
        best
    }

    pub(crate) fn strictly_interior_count(lp: &LinearProgram, sol: &BasicSolution) -> usize {
        sol.values
            .iter()
            .enumerate()
            .filter(|&(j, &x)| {
                let (lo, hi) = lp.bounds[j];
                x > lo + 1e-7 && x < hi - 1e-7
            })
            .count()
    }

    #[test]
    fn random_programs_match_vertex_enumeration() {
        for seed in 0..60 {
            let mut rng = StdRng::seed_from_u64(seed ^ 0xabcd);
            let v = rng.gen_range(2..=4);
            let rows = rng.gen_range(1..=3);
            let p = random_lp(seed, v, rows);
            let sol = solve(&p).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}");
            let oracle = vertex_enumeration_optimum(&p).expect("feasible by construction");
            assert!(
                (sol.objective_value - oracle).abs() < 1e-6,
                "seed {seed}: solver {} oracle {oracle}",
                sol.objective_value
            );
            assert!(strictly_interior_count(&p, &sol) <= p.constraints.len());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn permuting_variables_preserves_the_optimum(seed in 0u64..5_000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let v = rng.gen_range(2..=4usize);
            let rows = rng.gen_range(1..=3usize);
            let p = random_lp(seed.wrapping_mul(31), v, rows);
            let sol = solve(&p).unwrap();
            prop_assume!(sol.status == SolveStatus::Optimal);

            let perm: Vec<usize> = (0..v).rev().collect();
            let permuted = LinearProgram {
                sense: p.sense,
                objective: perm.iter().map(|&j| p.objective[j]).collect(),
                constraints: p
                    .constraints
                    .iter()
                    .map(|c| Constraint {
                        coeffs: perm.iter().map(|&j| c.coeffs[j]).collect(),
                        relation: c.relation,
                        rhs: c.rhs,
                    })
                    .collect(),
                bounds: perm.iter().map(|&j| p.bounds[j]).collect(),
            };
            let psol = solve(&permuted).unwrap();
            prop_assert_eq!(psol.status, SolveStatus::Optimal);
            prop_assert!((psol.objective_value - sol.objective_value).abs() < 1e-8);
        }
    }
}
