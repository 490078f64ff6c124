//! Compressed sparse row matrices and a sparse Cholesky factorization.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-compressed matrix. Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in insertion order, so the result does not
    /// depend on anything but the triplet sequence.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = alloc::vec![0usize; n_rows + 1];
        let mut col = Vec::with_capacity(t.len());
        let mut val: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = (usize::MAX, usize::MAX);
        for (i, j, v) in t {
            assert!(i < n_rows && j < n_cols, "triplet ({i},{j}) out of range");
            if (i, j) == last {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = (i, j);
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n_rows, n_cols, row_ptr, col, val }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&alloc::vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { n_rows: n, n_cols: n, row_ptr: (0..=n).collect(), col: (0..n).collect(), val: d.to_vec() }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// (column, value) pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    /// All (row, column, value) entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(p) => self.val[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        for (i, yi) in y.iter_mut().enumerate().take(self.n_rows) {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[p] * x[self.col[p]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = A^T x`.
    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.n_cols];
        for (i, &xi) in x.iter().enumerate().take(self.n_rows) {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col[p]] += self.val[p] * xi;
            }
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, &xi) in x.iter().enumerate().take(self.n_rows) {
            let mut r = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.val[p] * y[self.col[p]];
            }
            s += xi * r;
        }
        s
    }

    pub fn transpose(&self) -> Self {
        let t = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n_cols, self.n_rows, t)
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols && self.iter().all(|(i, j, v)| self.get(j, i) == v)
    }

    /// Symmetric permutation `B = P A P^T` with `B[i][j] = A[perm[i]][perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut inv = alloc::vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let t = self.iter().map(|(i, j, v)| (inv[i], inv[j], v)).collect();
        Self::from_triplets(self.n_rows, self.n_cols, t)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = alloc::vec![0.0; self.n_rows * self.n_cols];
        for (i, j, v) in self.iter() {
            d[i * self.n_cols + j] = v;
        }
        d
    }

    /// `self + alpha * other` (same shape).
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        let mut t: Vec<_> = self.iter().collect();
        t.extend(other.iter().map(|(i, j, v)| (i, j, alpha * v)));
        Self::from_triplets(self.n_rows, self.n_cols, t)
    }

    /// Adjacency lists of the off-diagonal pattern (assumed symmetric).
    pub fn adjacency(&self) -> (Vec<usize>, Vec<usize>) {
        let mut ptr = alloc::vec![0usize; self.n_rows + 1];
        let mut adj = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            for (j, _) in self.row(i) {
                if j != i {
                    adj.push(j);
                }
            }
            ptr[i + 1] = adj.len();
        }
        (ptr, adj)
    }
}

const NONE: usize = usize::MAX;

/// Sparse Cholesky factor `P A P^T = L L^T` (up-looking, row subtrees of
/// the elimination tree), with a fill-reducing ordering.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix using nested dissection.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let perm = crate::ordering::nested_dissection(a);
        Self::with_ordering(a, perm)
    }

    pub fn with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::Dimension { expected: n, got: a.n_cols() });
        }
        let mut pinv = alloc::vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        // upper triangle of C = P A P^T, by columns
        let mut cp = alloc::vec![0usize; n + 1];
        let mut ci = Vec::with_capacity(a.nnz() / 2 + n);
        let mut cx = Vec::with_capacity(a.nnz() / 2 + n);
        for k in 0..n {
            let mut col: Vec<(usize, f64)> = a.row(perm[k]).map(|(j, v)| (pinv[j], v)).filter(|&(i, _)| i <= k).collect();
            col.sort_unstable_by_key(|e| e.0);
            for (i, v) in col {
                ci.push(i);
                cx.push(v);
            }
            cp[k + 1] = ci.len();
        }
        // elimination tree
        let mut parent = alloc::vec![NONE; n];
        let mut ancestor = alloc::vec![NONE; n];
        for k in 0..n {
            for &i0 in &ci[cp[k]..cp[k + 1]] {
                let mut i = i0;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }
        // column counts from row subtrees
        let mut flag = alloc::vec![NONE; n];
        let mut stack = alloc::vec![0usize; n];
        let mut counts = alloc::vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut flag, &mut stack);
            for &j in &stack[top..n] {
                counts[j] += 1;
            }
        }
        let mut lp = alloc::vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + counts[k];
        }
        let nnz = lp[n];
        let mut li = alloc::vec![0usize; nnz];
        let mut lx = alloc::vec![0.0f64; nnz];
        let mut next: Vec<usize> = lp[..n].to_vec();
        let mut x = alloc::vec![0.0f64; n];
        flag.fill(NONE);
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut flag, &mut stack);
            for p in cp[k]..cp[k + 1] {
                x[ci[p]] = cx[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..n] {
                let lki = x[i] / lx[lp[i]];
                x[i] = 0.0;
                for p in lp[i] + 1..next[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                li[p] = k;
                lx[p] = lki;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite(k));
            }
            let p = next[k];
            next[k] += 1;
            li[p] = k;
            lx[p] = crate::sqrt(d);
        }
        Ok(Self { n, perm, lp, li, lx })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros in the factor, diagonal included.
    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let yj = y[j] / self.lx[self.lp[j]];
            y[j] = yj;
            for p in self.lp[j] + 1..self.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s / self.lx[self.lp[j]];
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = y[k];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Nonzero pattern of row `k` of L, written to `stack[top..n]` in
/// topological order.
fn ereach(k: usize, cp: &[usize], ci: &[usize], parent: &[usize], flag: &mut [usize], stack: &mut [usize]) -> usize {
    let n = parent.len();
    let mut top = n;
    flag[k] = k;
    for &i0 in &ci[cp[k]..cp[k + 1]] {
        let mut i = i0;
        if i >= k {
            continue;
        }
        let mut len = 0;
        while flag[i] != k {
            stack[len] = i;
            len += 1;
            flag[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    crate::sqrt(dot(a, a))
}

/// `y += alpha x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
