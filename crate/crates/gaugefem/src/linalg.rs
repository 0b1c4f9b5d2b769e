//! Dense and sparse linear algebra kernels.
//!
//! The sparse side is an up-looking LDL^T factorization over an elimination
//! tree with a greedy minimum-degree ordering. No pivoting is performed: the
//! systems solved here are either symmetric positive definite (mass matrices)
//! or quasi-definite (regularized KKT saddle systems), for which LDL^T is
//! stable under any symmetric permutation. Everything is deterministic: fixed
//! orderings, fixed accumulation order.

use crate::error::{Error, Result};
use crate::scalar::Real;

// ---------------------------------------------------------------------------
// dense
// ---------------------------------------------------------------------------

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct DenseMat<S> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<S>,
}

impl<S: Real> DenseMat<S> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMat {
            n_rows,
            n_cols,
            data: vec![S::zero(); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n_cols + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n_cols + j] += v;
    }
}

/// Dense LU factorization with partial pivoting.
pub struct DenseLu<S> {
    n: usize,
    lu: Vec<S>,
    piv: Vec<usize>,
}

impl<S: Real> DenseLu<S> {
    pub fn new(a: &DenseMat<S>) -> Result<Self> {
        assert_eq!(a.n_rows, a.n_cols);
        let n = a.n_rows;
        let mut lu = a.data.clone();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut best = k;
            let mut best_val = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best_val {
                    best = i;
                    best_val = v;
                }
            }
            if best_val == S::zero() {
                return Err(Error::FactorizationFailure { pivot: k });
            }
            piv[k] = best;
            if best != k {
                for j in 0..n {
                    lu.swap(k * n + j, best * n + j);
                }
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    let upd = factor * lu[k * n + j];
                    lu[i * n + j] -= upd;
                }
            }
        }
        Ok(DenseLu { n, lu, piv })
    }

    pub fn solve_in_place(&self, b: &mut [S]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        // apply the full row permutation first: the stored multipliers are in
        // the final (pivoted) row order
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            for i in (k + 1)..n {
                let upd = self.lu[i * n + k] * b[k];
                b[i] -= upd;
            }
        }
        for k in (0..n).rev() {
            b[k] /= self.lu[k * n + k];
            for i in 0..k {
                let upd = self.lu[i * n + k] * b[k];
                b[i] -= upd;
            }
        }
    }

    /// Solve `A X = I`, returning the inverse (column major as row-major of A^-T
    /// is avoided by solving per column).
    pub fn inverse(&self) -> DenseMat<S> {
        let n = self.n;
        let mut inv = DenseMat::zeros(n, n);
        let mut col = vec![S::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = S::zero());
            col[j] = S::one();
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }
}

// ---------------------------------------------------------------------------
// sparse storage
// ---------------------------------------------------------------------------

/// General rectangular CSR matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix<S> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<S>,
}

impl<S: Real> CsrMatrix<S> {
    pub fn from_rows(n_cols: usize, rows: &[Vec<(usize, S)>]) -> Self {
        let n_rows = rows.len();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in rows {
            let mut entries: Vec<(usize, S)> = r.clone();
            entries.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < entries.len() {
                let c = entries[k].0;
                let mut v = S::zero();
                while k < entries.len() && entries[k].0 == c {
                    v += entries[k].1;
                    k += 1;
                }
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn mul_vec(&self, x: &[S], out: &mut [S]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(out.len(), self.n_rows);
        for i in 0..self.n_rows {
            let mut acc = S::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.col_idx[p]];
            }
            out[i] = acc;
        }
    }

    pub fn mul_transpose_vec(&self, y: &[S], out: &mut [S]) {
        assert_eq!(y.len(), self.n_rows);
        assert_eq!(out.len(), self.n_cols);
        out.iter_mut().for_each(|o| *o = S::zero());
        for i in 0..self.n_rows {
            let yi = y[i];
            if yi == S::zero() {
                continue;
            }
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.col_idx[p]] += self.vals[p] * yi;
            }
        }
    }
}

/// Symmetric sparse matrix, full pattern stored in CSR.
#[derive(Clone, Debug)]
pub struct SparseSym<S> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<S>,
    /// Positive-definite flag set by the assembling code.
    pub spd: bool,
}

impl<S: Real> SparseSym<S> {
    /// Build from (row, col, value) triplets; both triangles must be present
    /// or the entry is mirrored. Duplicates are summed in insertion order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, S)], spd: bool) -> Self {
        let mut all: Vec<(usize, usize, S)> = Vec::with_capacity(triplets.len() * 2);
        for &(i, j, v) in triplets {
            all.push((i, j, v));
            if i != j {
                all.push((j, i, v));
            }
        }
        all.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut k = 0;
        for i in 0..n {
            while k < all.len() && all[k].0 == i {
                let c = all[k].1;
                let mut v = S::zero();
                while k < all.len() && all[k].0 == i && all[k].1 == c {
                    v += all[k].2;
                    k += 1;
                }
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        SparseSym {
            n,
            row_ptr,
            col_idx,
            vals,
            spd,
        }
    }

    pub fn mul_vec(&self, x: &[S], out: &mut [S]) {
        for i in 0..self.n {
            let mut acc = S::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.col_idx[p]];
            }
            out[i] = acc;
        }
    }

    pub fn mean_diagonal(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[p] == i {
                    acc += self.vals[p];
                }
            }
        }
        acc / S::of_usize(self.n.max(1))
    }
}

// ---------------------------------------------------------------------------
// ordering
// ---------------------------------------------------------------------------

/// Greedy minimum-degree ordering on a symmetric pattern. Ties break on the
/// smallest node index, so the result is deterministic.
pub fn minimum_degree(n: usize, row_ptr: &[usize], col_idx: &[usize]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for p in row_ptr[i]..row_ptr[i + 1] {
            let j = col_idx[p];
            if j != i {
                adj[i].push(j);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];
    for step in 0..n {
        let mut best = usize::MAX;
        let mut best_deg = usize::MAX;
        for v in 0..n {
            if !eliminated[v] && adj[v].len() < best_deg {
                best_deg = adj[v].len();
                best = v;
            }
        }
        let v = best;
        eliminated[v] = true;
        order.push(v);
        // form the clique of v's remaining neighbors
        let nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| !eliminated[u]).collect();
        for &u in &nbrs {
            // remove v, then union in the clique
            adj[u].retain(|&w| w != v && !eliminated[w]);
            for &w in &adj[u] {
                mark[w] = step;
            }
            mark[u] = step;
            for &w in &nbrs {
                if mark[w] != step {
                    adj[u].push(w);
                    mark[w] = step;
                }
            }
        }
        adj[v] = Vec::new();
    }
    order
}

// ---------------------------------------------------------------------------
// sparse LDL^T
// ---------------------------------------------------------------------------

/// Symbolic + numeric LDL^T of a permuted symmetric matrix.
///
/// Built once per sparsity pattern; `refactor` reuses the symbolic analysis
/// when only the numerical values change.
pub struct LdltSolver<S> {
    n: usize,
    /// perm[k] = original index of the k-th pivot.
    perm: Vec<usize>,
    iperm: Vec<usize>,
    parent: Vec<isize>,
    // L stored by columns, diagonal excluded
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<S>,
    d: Vec<S>,
    // permuted copy of the matrix pattern (upper triangle rows per pivot row)
    ap: Vec<usize>,
    ai: Vec<usize>,
    ax: Vec<S>,
    /// map from permuted-entry slot to the source CSR value index
    asrc: Vec<usize>,
}

impl<S: Real> LdltSolver<S> {
    /// Analyze and factor `a` with a minimum-degree ordering.
    pub fn new(a: &SparseSym<S>) -> Result<Self> {
        let perm = minimum_degree(a.n, &a.row_ptr, &a.col_idx);
        Self::with_ordering(a, perm)
    }

    pub fn with_ordering(a: &SparseSym<S>, perm: Vec<usize>) -> Result<Self> {
        let n = a.n;
        let mut iperm = vec![0usize; n];
        for (k, &v) in perm.iter().enumerate() {
            iperm[v] = k;
        }
        // permuted upper-triangle pattern: for pivot row k, entries (i, k) with i <= k
        // gathered as row k listing i; source index recorded for refactoring
        let mut ap = vec![0usize; n + 1];
        let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for orig_i in 0..n {
            let pi = iperm[orig_i];
            for p in a.row_ptr[orig_i]..a.row_ptr[orig_i + 1] {
                let pj = iperm[a.col_idx[p]];
                if pj <= pi {
                    rows[pi].push((pj, p));
                }
            }
        }
        let mut ai = Vec::new();
        let mut asrc = Vec::new();
        for (k, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|e| e.0);
            for &(j, src) in row.iter() {
                ai.push(j);
                asrc.push(src);
            }
            ap[k + 1] = ai.len();
        }
        let ax = vec![S::zero(); ai.len()];

        // elimination tree over the permuted pattern
        let mut parent = vec![-1isize; n];
        let mut ancestor = vec![-1isize; n];
        for k in 0..n {
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p] as isize;
                while i != -1 && (i as usize) < k {
                    let next = ancestor[i as usize];
                    ancestor[i as usize] = k as isize;
                    if next == -1 {
                        parent[i as usize] = k as isize;
                    }
                    i = next;
                }
            }
        }

        // column counts via row subtree traversal
        let mut counts = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];
        for k in 0..n {
            mark[k] = k;
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p];
                while i != k && mark[i] != k {
                    counts[i] += 1;
                    mark[i] = k;
                    i = parent[i] as usize;
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + counts[k];
        }
        let nnz = lp[n];
        let li = vec![0usize; nnz];
        let lx = vec![S::zero(); nnz];
        let d = vec![S::zero(); n];

        let mut solver = LdltSolver {
            n,
            perm,
            iperm,
            parent,
            lp,
            li,
            lx,
            d,
            ap,
            ai,
            ax,
            asrc,
        };
        solver.refactor(a)?;
        Ok(solver)
    }

    /// Recompute the numeric factorization for new values with the same pattern.
    pub fn refactor(&mut self, a: &SparseSym<S>) -> Result<()> {
        let n = self.n;
        for (slot, &src) in self.asrc.iter().enumerate() {
            self.ax[slot] = a.vals[src];
        }
        let mut fill = vec![0usize; n]; // next free slot per column
        for k in 0..n {
            fill[k] = self.lp[k];
        }
        let mut x = vec![S::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];
        for k in 0..n {
            // scatter row k of the permuted upper triangle
            let mut diag = S::zero();
            let mut top = n;
            mark[k] = k;
            for p in self.ap[k]..self.ap[k + 1] {
                let i = self.ai[p];
                if i == k {
                    diag = self.ax[p];
                    continue;
                }
                x[i] = self.ax[p];
                // walk up the etree collecting the reach (stack into pattern)
                let mut len = 0;
                let mut j = i;
                let mut stack = [0usize; 64];
                while mark[j] != k {
                    stack[len] = j;
                    len += 1;
                    if len == stack.len() {
                        // very deep paths fall back to a heap walk
                        break;
                    }
                    mark[j] = k;
                    j = match self.parent[j] {
                        -1 => break,
                        pj => pj as usize,
                    };
                }
                if len == stack.len() {
                    // restart with heap storage (rare)
                    let mut heap_stack = Vec::new();
                    let mut j2 = i;
                    for s in stack.iter().take(len) {
                        heap_stack.push(*s);
                        j2 = *s;
                    }
                    let mut j3 = match self.parent[j2] {
                        -1 => k,
                        pj => pj as usize,
                    };
                    while mark[j3] != k {
                        heap_stack.push(j3);
                        mark[j3] = k;
                        j3 = match self.parent[j3] {
                            -1 => break,
                            pj => pj as usize,
                        };
                    }
                    for &s in heap_stack.iter().rev() {
                        top -= 1;
                        pattern[top] = s;
                    }
                } else {
                    for s in (0..len).rev() {
                        top -= 1;
                        pattern[top] = stack[s];
                    }
                }
            }
            // pattern[top..n] holds the row pattern in topological (descending
            // push) order; sort ascending for the triangular solve
            pattern[top..n].sort_unstable();
            for idx in top..n {
                let j = pattern[idx];
                let xj = x[j];
                x[j] = S::zero();
                let lkj = xj / self.d[j];
                // apply column j of L to the workspace
                for p in self.lp[j]..fill[j] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
                diag -= lkj * xj;
                let slot = fill[j];
                self.li[slot] = k;
                self.lx[slot] = lkj;
                fill[j] += 1;
            }
            if diag == S::zero() || !diag.is_finite() {
                return Err(Error::FactorizationFailure { pivot: k });
            }
            self.d[k] = diag;
        }
        Ok(())
    }

    /// Solve `A x = b` using the current factorization.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y = vec![S::zero(); n];
        for k in 0..n {
            y[k] = b[self.perm[k]];
        }
        // forward: L y = Pb
        for j in 0..n {
            let yj = y[j];
            if yj == S::zero() {
                continue;
            }
            for p in self.lp[j]..self.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
        for k in 0..n {
            y[k] /= self.d[k];
        }
        // backward: L^T z = y
        for j in (0..n).rev() {
            let mut acc = y[j];
            for p in self.lp[j]..self.lp[j + 1] {
                acc -= self.lx[p] * y[self.li[p]];
            }
            y[j] = acc;
        }
        let mut x = vec![S::zero(); n];
        for k in 0..n {
            x[self.perm[k]] = y[k];
        }
        x
    }

    /// Solve with one step of iterative refinement, reporting the final
    /// relative residual.
    pub fn solve_refined(&self, a: &SparseSym<S>, b: &[S]) -> (Vec<S>, S) {
        let mut x = self.solve(b);
        let mut r = vec![S::zero(); self.n];
        let norm_b = b
            .iter()
            .fold(S::zero(), |acc, v| acc + *v * *v)
            .sqrt()
            .max(S::min_positive_value());
        for _ in 0..2 {
            a.mul_vec(&x, &mut r);
            for i in 0..self.n {
                r[i] = b[i] - r[i];
            }
            let norm_r = r.iter().fold(S::zero(), |acc, v| acc + *v * *v).sqrt();
            if norm_r / norm_b <= S::epsilon() * S::lit(64.0) {
                return (x, norm_r / norm_b);
            }
            let dx = self.solve(&r);
            for i in 0..self.n {
                x[i] += dx[i];
            }
        }
        a.mul_vec(&x, &mut r);
        for i in 0..self.n {
            r[i] = b[i] - r[i];
        }
        let norm_r = r.iter().fold(S::zero(), |acc, v| acc + *v * *v).sqrt();
        (x, norm_r / norm_b)
    }
}

pub fn norm2<S: Real>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, x| acc + *x * *x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> (SparseSym<f64>, DenseMat<f64>) {
        // dense random SPD, then sparsified structurally (keep all entries)
        let mut m = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.add(i, j, rng.gen_range(-0.3..0.3));
            }
        }
        // A = M^T M + n I
        let mut a = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += m.get(k, i) * m.get(k, j);
                }
                a.set(i, j, acc + if i == j { n as f64 } else { 0.0 });
            }
        }
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                trips.push((i, j, a.get(i, j)));
            }
        }
        (SparseSym::from_triplets(n, &trips, true), a)
    }

    #[test]
    fn dense_lu_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 9] {
            let mut a = DenseMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
            for i in 0..n {
                a.add(i, i, 3.0);
            }
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    b[i] += a.get(i, j) * x0[j];
                }
            }
            let lu = DenseLu::new(&a).unwrap();
            lu.solve_in_place(&mut b);
            for i in 0..n {
                assert!((b[i] - x0[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn singular_dense_is_error() {
        let a = DenseMat::<f64>::zeros(3, 3);
        assert!(DenseLu::new(&a).is_err());
    }

    #[test]
    fn ldlt_matches_dense_on_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1usize, 5, 20, 40] {
            let (a, ad) = random_spd(&mut rng, n);
            let solver = LdltSolver::new(&a).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = solver.solve(&b);
            let lu = DenseLu::new(&ad).unwrap();
            let mut xd = b.clone();
            lu.solve_in_place(&mut xd);
            for i in 0..n {
                assert!((x[i] - xd[i]).abs() < 1e-10, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn ldlt_solves_quasi_definite_saddle() {
        // [Q C^T; C -delta I] with Q SPD
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nq = 12;
        let nc = 20; // more (redundant) constraints than unknowns
        let (_, q) = random_spd(&mut rng, nq);
        let delta = 1e-8;
        let n = nq + nc;
        let mut trips = Vec::new();
        for i in 0..nq {
            for j in 0..=i {
                trips.push((i, j, q.get(i, j)));
            }
        }
        let mut c = DenseMat::zeros(nc, nq);
        for r in 0..nc {
            for j in 0..nq {
                if rng.gen_bool(0.3) {
                    let v = rng.gen_range(-1.0..1.0);
                    c.set(r, j, v);
                    trips.push((nq + r, j, v));
                }
            }
            trips.push((nq + r, nq + r, -delta));
        }
        let a = SparseSym::from_triplets(n, &trips, false);
        let solver = LdltSolver::new(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solver.solve(&b);
        let mut ax = vec![0.0; n];
        a.mul_vec(&x, &mut ax);
        let res: f64 = ax
            .iter()
            .zip(&b)
            .map(|(l, r)| (l - r) * (l - r))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-7 * norm2(&b), "residual {res}");
    }

    #[test]
    fn refactor_reuses_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (a1, _) = random_spd(&mut rng, 15);
        let mut solver = LdltSolver::new(&a1).unwrap();
        // same pattern, new values
        let mut a2 = a1.clone();
        for v in a2.vals.iter_mut() {
            *v *= 1.5;
        }
        for i in 0..a2.n {
            for p in a2.row_ptr[i]..a2.row_ptr[i + 1] {
                if a2.col_idx[p] == i {
                    a2.vals[p] += 2.0;
                }
            }
        }
        solver.refactor(&a2).unwrap();
        let b: Vec<f64> = (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solver.solve(&b);
        let mut ax = vec![0.0; 15];
        a2.mul_vec(&x, &mut ax);
        for i in 0..15 {
            assert!((ax[i] - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn factorization_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, _) = random_spd(&mut rng, 25);
        let s1 = LdltSolver::new(&a).unwrap();
        let s2 = LdltSolver::new(&a).unwrap();
        assert_eq!(s1.perm, s2.perm);
        assert!(s1.lx.iter().zip(&s2.lx).all(|(a, b)| a == b));
        assert!(s1.d.iter().zip(&s2.d).all(|(a, b)| a == b));
    }

    #[test]
    fn minimum_degree_is_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (a, _) = random_spd(&mut rng, 30);
        let p = minimum_degree(a.n, &a.row_ptr, &a.col_idx);
        let mut seen = vec![false; a.n];
        for &v in &p {
            assert!(!seen[v]);
            seen[v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn singular_sparse_is_error() {
        // a structurally zero row makes the factorization fail rather than
        // silently producing garbage
        let trips = vec![(0usize, 0usize, 1.0f64), (2, 2, 1.0), (2, 0, 0.5)];
        let a = SparseSym::from_triplets(3, &trips, false);
        assert!(LdltSolver::new(&a).is_err());
    }

    #[test]
    fn csr_matvec_roundtrip() {
        let rows = vec![
            vec![(0usize, 1.0f64), (2, 2.0)],
            vec![(1, 3.0)],
            vec![(0, -1.0), (1, 0.5), (2, 1.5)],
        ];
        let c = CsrMatrix::from_rows(3, &rows);
        let x = [1.0, 2.0, 3.0];
        let mut y = vec![0.0; 3];
        c.mul_vec(&x, &mut y);
        assert_eq!(y, vec![7.0, 6.0, 4.5]);
        let mut z = vec![0.0; 3];
        c.mul_transpose_vec(&y, &mut z);
        assert!((z[0] - (7.0 - 4.5)).abs() < 1e-14);
    }
}
