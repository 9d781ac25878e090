//! Complex CSR matrices and the handful of dense-vector helpers the
//! eigensolver and the operator algebra need.
//!
//! Everything here is deterministic: row results never depend on thread
//! count, duplicate triplets are merged in sorted order, and products use a
//! per-row dense accumulator whose emission order is the sorted column index.

use crate::C64;
use rayon::prelude::*;

/// Row count above which matrix-vector products fan out over rayon. Each row
/// is reduced sequentially, so the result is bit-identical to the serial path.
const PAR_ROWS: usize = 4096;

/// Compressed sparse row matrix over complex doubles, column indices sorted
/// within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl Csr {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Csr {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Csr {
            n_rows: n,
            n_cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Csr {
            n_rows: n,
            n_cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: diag.to_vec(),
        }
    }

    /// Build from (row, col, value) triplets; duplicates are summed, exact
    /// zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut t: Vec<(usize, usize, C64)> = triplets.to_vec();
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n_rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<C64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for &(r, c, v) in &t {
            debug_assert!(r < n_rows && c < n_cols, "triplet out of bounds");
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *data.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            data.push(v);
        }
        // drop merged-to-zero entries
        let mut k = 0;
        for i in 0..data.len() {
            if data[i] != C64::new(0.0, 0.0) {
                rows[k] = rows[i];
                indices[k] = indices[i];
                data[k] = data[i];
                k += 1;
            }
        }
        rows.truncate(k);
        indices.truncate(k);
        data.truncate(k);
        for &r in &rows {
            indptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            indptr[i + 1] += indptr[i];
        }
        Csr {
            n_rows,
            n_cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.data[lo..hi])
    }

    /// Entry accessor by binary search; zero when absent.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        let row_dot = |i: usize| -> C64 {
            let (cols, vals) = self.row(i);
            let mut acc = C64::new(0.0, 0.0);
            for (c, v) in cols.iter().zip(vals.iter()) {
                acc += v * x[*c];
            }
            acc
        };
        if self.n_rows >= PAR_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = row_dot(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
    }

    /// Exact structural adjoint: transpose with conjugated entries.
    pub fn transpose_conj(&self) -> Csr {
        let mut indptr = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            indptr[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            indptr[i + 1] += indptr[i];
        }
        let mut cursor = indptr.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![C64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals.iter()) {
                let slot = cursor[*c];
                indices[slot] = r;
                data[slot] = v.conj();
                cursor[*c] += 1;
            }
        }
        Csr {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            indptr,
            indices,
            data,
        }
    }

    /// `self + factor * other`, rows merged in sorted column order.
    pub fn add_scaled(&self, other: &Csr, factor: C64) -> Csr {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut indptr = vec![0usize; self.n_rows + 1];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut data = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut ia, mut ib) = (0usize, 0usize);
            while ia < ac.len() || ib < bc.len() {
                let next_a = ac.get(ia).copied().unwrap_or(usize::MAX);
                let next_b = bc.get(ib).copied().unwrap_or(usize::MAX);
                if next_a < next_b {
                    indices.push(next_a);
                    data.push(av[ia]);
                    ia += 1;
                } else if next_b < next_a {
                    indices.push(next_b);
                    data.push(factor * bv[ib]);
                    ib += 1;
                } else {
                    indices.push(next_a);
                    data.push(av[ia] + factor * bv[ib]);
                    ia += 1;
                    ib += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Csr {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn scaled(&self, factor: C64) -> Csr {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= factor;
        }
        out
    }

    /// Sparse product via a per-row dense accumulator. Rows are independent,
    /// so the rayon fan-out is deterministic.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.n_cols, other.n_rows);
        let compute_row = |workspace: &mut (Vec<C64>, Vec<usize>), i: usize| {
            let (acc, touched) = workspace;
            let (ac, av) = self.row(i);
            for (k, a) in ac.iter().zip(av.iter()) {
                let (bc, bv) = other.row(*k);
                for (j, b) in bc.iter().zip(bv.iter()) {
                    if acc[*j] == C64::new(0.0, 0.0) {
                        touched.push(*j);
                    }
                    acc[*j] += a * b;
                }
            }
            touched.sort_unstable();
            let mut cols = Vec::with_capacity(touched.len());
            let mut vals = Vec::with_capacity(touched.len());
            for &j in touched.iter() {
                if acc[j] != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(acc[j]);
                }
                acc[j] = C64::new(0.0, 0.0);
            }
            touched.clear();
            (cols, vals)
        };
        let fresh = || (vec![C64::new(0.0, 0.0); other.n_cols], Vec::new());
        let rows: Vec<(Vec<usize>, Vec<C64>)> = if self.n_rows >= PAR_ROWS {
            (0..self.n_rows)
                .into_par_iter()
                .map_init(fresh, |ws, i| compute_row(ws, i))
                .collect()
        } else {
            let mut ws = fresh();
            (0..self.n_rows).map(|i| compute_row(&mut ws, i)).collect()
        };
        let mut indptr = vec![0usize; self.n_rows + 1];
        let total: usize = rows.iter().map(|(c, _)| c.len()).sum();
        let mut indices = Vec::with_capacity(total);
        let mut data = Vec::with_capacity(total);
        for (i, (cols, vals)) in rows.into_iter().enumerate() {
            indices.extend(cols);
            data.extend(vals);
            indptr[i + 1] = indices.len();
        }
        Csr {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            indptr,
            indices,
            data,
        }
    }

    /// Kronecker product with a dense 2x2 block on the right:
    /// index convention `(row, spin) -> 2*row + spin`.
    pub fn kron_spin(&self, s: &[[C64; 2]; 2]) -> Csr {
        let mut triplets = Vec::with_capacity(self.nnz() * 4);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals.iter()) {
                for (si, row_s) in s.iter().enumerate() {
                    for (sj, b) in row_s.iter().enumerate() {
                        if *b != C64::new(0.0, 0.0) {
                            triplets.push((2 * r + si, 2 * c + sj, v * b));
                        }
                    }
                }
            }
        }
        Csr::from_triplets(2 * self.n_rows, 2 * self.n_cols, &triplets)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Maximum absolute column sum (the operator 1-norm).
    pub fn norm1(&self) -> f64 {
        let mut col_sums = vec![0.0f64; self.n_cols];
        for (c, v) in self.indices.iter().zip(self.data.iter()) {
            col_sums[*c] += v.norm();
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from conjugate symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        assert_eq!(self.n_rows, self.n_cols);
        let diff = self.add_scaled(&self.transpose_conj(), C64::new(-1.0, 0.0));
        diff.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Dense copy, row-major; for the small cross-check paths only.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut out = vec![vec![C64::new(0.0, 0.0); self.n_cols]; self.n_rows];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals.iter()) {
                out[r][*c] = *v;
            }
        }
        out
    }

    /// Sorted triplet view `(row, col, value)` for serialization.
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals.iter()) {
                out.push((r, *c, *v));
            }
        }
        out
    }
}

// ----------------------------------------------------- dense vector helpers ----

/// Hermitian inner product, conjugate-linear in the first slot.
pub fn vdot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn vnorm(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += factor * x`.
pub fn vaxpy(factor: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (a, b) in x.iter().zip(y.iter_mut()) {
        *b += factor * a;
    }
}

pub fn vscale(x: &mut [C64], factor: C64) {
    for a in x.iter_mut() {
        *a *= factor;
    }
}

/// `<psi, A psi>` for a square operator.
pub fn expectation(a: &Csr, psi: &[C64]) -> C64 {
    vdot(psi, &a.matvec(psi))
}
