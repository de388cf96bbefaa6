//! Dense linear-algebra primitives shared by the support-reduction and
//! simplex code: square solves, matrix inversion, nullspace extraction,
//! and pairwise summation.
//!
//! Everything here works on small row-major matrices. Gaussian elimination
//! uses full pivoting with a relative singularity threshold; callers get
//! `None` back instead of garbage when the system is rank-deficient.

/// Pivots smaller than this times the largest initial entry are treated as
/// zero during elimination.
pub(crate) const SINGULARITY_RTOL: f64 = 1e-12;

/// Sums a slice by recursive halving. The tree shape depends only on the
/// slice length, so scaling every element by a power of two scales the
/// result exactly, which the refinement-halving guarantees rely on.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Row-major dense matrix with explicit dimensions.
#[derive(Debug, Clone)]
pub(crate) struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Inverts a square matrix by Gauss-Jordan elimination with partial
/// pivoting. Returns `None` when a pivot falls below the singularity
/// threshold.
pub(crate) fn invert(a: &Matrix) -> Option<Matrix> {
    assert_eq!(a.rows, a.cols, "invert requires a square matrix");
    let n = a.rows;
    if n == 0 {
        return Some(Matrix::zeros(0, 0));
    }
    let mut work = a.clone();
    let mut inv = Matrix::identity(n);
    let floor = SINGULARITY_RTOL * work.max_abs().max(1.0);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = work.at(col, col).abs();
        for r in (col + 1)..n {
            let v = work.at(r, col).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= floor {
            return None;
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = work.at(col, c);
                work.set(col, c, work.at(pivot_row, c));
                work.set(pivot_row, c, tmp);
                let tmp = inv.at(col, c);
                inv.set(col, c, inv.at(pivot_row, c));
                inv.set(pivot_row, c, tmp);
            }
        }
        let p = work.at(col, col);
        for c in 0..n {
            work.set(col, c, work.at(col, c) / p);
            inv.set(col, c, inv.at(col, c) / p);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work.at(r, col);
            if f == 0.0 {
                continue;
            }
            for c in 0..n {
                let v = work.at(r, c) - f * work.at(col, c);
                work.set(r, c, v);
                let v = inv.at(r, c) - f * inv.at(col, c);
                inv.set(r, c, v);
            }
        }
    }
    Some(inv)
}

/// Finds a nonzero vector `x` with `A x = 0` for a matrix with more columns
/// than rank. Uses Gaussian elimination with full pivoting; returns `None`
/// when the matrix has full column rank at the working precision.
pub(crate) fn nullspace_vector(a: &Matrix) -> Option<Vec<f64>> {
    let (rows, cols) = (a.rows, a.cols);
    if cols == 0 {
        return None;
    }
    if rows == 0 {
        let mut x = vec![0.0; cols];
        x[0] = 1.0;
        return Some(x);
    }

    let mut work = a.clone();
    let floor = SINGULARITY_RTOL * work.max_abs().max(1.0);
    // col_of_pivot[k] = original column eliminated in step k.
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut used_row = vec![false; rows];
    let mut used_col = vec![false; cols];

    loop {
        let mut best = floor;
        let mut best_rc: Option<(usize, usize)> = None;
        for r in 0..rows {
            if used_row[r] {
                continue;
            }
            for c in 0..cols {
                if used_col[c] {
                    continue;
                }
                let v = work.at(r, c).abs();
                if v > best {
                    best = v;
                    best_rc = Some((r, c));
                }
            }
        }
        let (pr, pc) = match best_rc {
            Some(rc) => rc,
            None => break,
        };
        used_row[pr] = true;
        used_col[pc] = true;
        pivot_rows.push(pr);
        pivot_cols.push(pc);
        let p = work.at(pr, pc);
        for r in 0..rows {
            if r == pr || used_row[r] {
                continue;
            }
            let f = work.at(r, pc) / p;
            if f == 0.0 {
                continue;
            }
            for c in 0..cols {
                if used_col[c] && c != pc {
                    continue;
                }
                let v = work.at(r, c) - f * work.at(pr, c);
                work.set(r, c, v);
            }
        }
    }

    let rank = pivot_cols.len();
    if rank >= cols {
        return None;
    }
    // First free column in index order gets coefficient 1.
    let free = (0..cols).find(|&c| !used_col[c])?;
    let mut x = vec![0.0; cols];
    x[free] = 1.0;
    // Back-substitute through the pivots in reverse elimination order.
    for k in (0..rank).rev() {
        let (pr, pc) = (pivot_rows[k], pivot_cols[k]);
        let mut s = work.at(pr, free);
        for j in (k + 1)..rank {
            s += work.at(pr, pivot_cols[j]) * x[pivot_cols[j]];
        }
        x[pc] = -s / work.at(pr, pc);
    }
    let norm = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if !norm.is_finite() || norm == 0.0 {
        return None;
    }
    for v in &mut x {
        *v /= norm;
    }
    Some(x)
}
