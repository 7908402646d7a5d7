//! Small dense exact linear algebra over the coefficient field.
//!
//! Row-major matrices with reduced row echelon form, rank, solving and
//! nullspace. Pivoting is deterministic (first nonzero entry scanning
//! left to right), so every result is bit-reproducible.

use crate::localring::{FieldCtx, Fq};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Fq>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![Fq::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Fq::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Fq>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, k: &FieldCtx, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(l, j)];
                    if !b.is_zero() {
                        out[(i, j)] = k.add(out[(i, j)], k.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, k: &FieldCtx, v: &[Fq]) -> Vec<Fq> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![Fq::ZERO; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Fq::ZERO;
            for (j, &x) in v.iter().enumerate() {
                if !x.is_zero() {
                    let a = self[(i, j)];
                    if !a.is_zero() {
                        acc = k.add(acc, k.mul(a, x));
                    }
                }
            }
            *o = acc;
        }
        out
    }

    /// In-place reduced row echelon form. Returns pivot columns.
    pub fn row_reduce(&mut self, k: &FieldCtx) -> Vec<usize> {
        let mut pivots = vec![];
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut sel = None;
            for i in r..self.rows {
                if !self[(i, c)].is_zero() {
                    sel = Some(i);
                    break;
                }
            }
            let Some(i) = sel else { continue };
            self.swap_rows(i, r);
            let inv = k.inv(self[(r, c)]).expect("pivot is nonzero");
            for j in c..self.cols {
                self[(r, j)] = k.mul(self[(r, j)], inv);
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let factor = self[(i, c)];
                    for j in c..self.cols {
                        let t = k.mul(factor, self[(r, j)]);
                        self[(i, j)] = k.sub(self[(i, j)], t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, k: &FieldCtx) -> usize {
        let mut m = self.clone();
        m.row_reduce(k).len()
    }

    /// Basis of the right nullspace, one vector per row of the result.
    pub fn nullspace(&self, k: &FieldCtx) -> Mat {
        let mut m = self.clone();
        let pivots = m.row_reduce(k);
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut out = Mat::zeros(free.len(), self.cols);
        for (row_idx, &fc) in free.iter().enumerate() {
            out[(row_idx, fc)] = Fq::ONE;
            for (pr, &pc) in pivots.iter().enumerate() {
                let v = m[(pr, fc)];
                if !v.is_zero() {
                    out[(row_idx, pc)] = k.neg(v);
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Fq;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Fq {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Fq {
        &mut self.data[i * self.cols + j]
    }
}

/// Column-echelon data for repeatedly solving A·w = c against a fixed tall
/// matrix A (the graded local operator blocks). The echelon basis of the
/// column space has one pivot row per basis vector, so the canonical
/// residual of a solve is supported exactly on the non-pivot rows.
#[derive(Debug, Clone)]
pub struct Solver {
    nrows: usize,
    ncols: usize,
    /// fully reduced column-space basis, pivot coefficient 1
    basis: Vec<Vec<Fq>>,
    /// basis[i] = A · exprs[i]
    exprs: Vec<Vec<Fq>>,
    pivot_rows: Vec<usize>,
    pub rank: usize,
}

impl Solver {
    /// Build from A (nrows x ncols). Deterministic: columns are processed
    /// in order and pivots are the first nonzero row.
    pub fn new(k: &FieldCtx, a: Mat) -> Solver {
        let nrows = a.rows;
        let ncols = a.cols;
        let mut basis: Vec<Vec<Fq>> = vec![];
        let mut exprs: Vec<Vec<Fq>> = vec![];
        let mut pivot_rows: Vec<usize> = vec![];
        for j in 0..ncols {
            let mut v: Vec<Fq> = (0..nrows).map(|i| a[(i, j)]).collect();
            let mut u = vec![Fq::ZERO; ncols];
            u[j] = Fq::ONE;
            for i in 0..basis.len() {
                let c = v[pivot_rows[i]];
                if !c.is_zero() {
                    let nc = k.neg(c);
                    for (slot, &b) in v.iter_mut().zip(&basis[i]) {
                        *slot = k.add(*slot, k.mul(nc, b));
                    }
                    for (slot, &e) in u.iter_mut().zip(&exprs[i]) {
                        *slot = k.add(*slot, k.mul(nc, e));
                    }
                }
            }
            let Some(pivot) = v.iter().position(|c| !c.is_zero()) else { continue };
            let inv = k.inv(v[pivot]).expect("pivot nonzero");
            for c in v.iter_mut() {
                *c = k.mul(*c, inv);
            }
            for c in u.iter_mut() {
                *c = k.mul(*c, inv);
            }
            // clear the new pivot from existing basis vectors
            for i in 0..basis.len() {
                let c = basis[i][pivot];
                if !c.is_zero() {
                    let nc = k.neg(c);
                    for idx in 0..nrows {
                        let t = k.mul(nc, v[idx]);
                        basis[i][idx] = k.add(basis[i][idx], t);
                    }
                    for idx in 0..ncols {
                        let t = k.mul(nc, u[idx]);
                        exprs[i][idx] = k.add(exprs[i][idx], t);
                    }
                }
            }
            basis.push(v);
            exprs.push(u);
            pivot_rows.push(pivot);
        }
        let rank = basis.len();
        Solver { nrows, ncols, basis, exprs, pivot_rows, rank }
    }

    /// Solve A·w = c as far as possible. Returns (w, residual) with
    /// c = A·w + residual; the residual is canonical, vanishes on every
    /// pivot row, and is zero iff c lies in the column space.
    pub fn solve(&self, k: &FieldCtx, c: &[Fq]) -> (Vec<Fq>, Vec<Fq>) {
        assert_eq!(c.len(), self.nrows);
        let mut r = c.to_vec();
        let mut w = vec![Fq::ZERO; self.ncols];
        for i in 0..self.rank {
            let coef = r[self.pivot_rows[i]];
            if coef.is_zero() {
                continue;
            }
            let nc = k.neg(coef);
            for (slot, &b) in r.iter_mut().zip(&self.basis[i]) {
                *slot = k.add(*slot, k.mul(nc, b));
            }
            for (slot, &e) in w.iter_mut().zip(&self.exprs[i]) {
                *slot = k.add(*slot, k.mul(coef, e));
            }
        }
        (w, r)
    }

    /// Rows that carry pivots; the canonical residual is supported on the
    /// complementary rows.
    pub fn pivot_rows(&self) -> &[usize] {
        &self.pivot_rows
    }
}
