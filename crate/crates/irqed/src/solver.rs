//! Deterministic Hermitian eigensolvers and the deflated linear solve used
//! by the variational mass formula.
//!
//! The dense path is a cyclic complex Jacobi iteration: slow beyond a few
//! hundred rows but dependency-free, bitwise deterministic, and accurate to
//! machine precision. It doubles as the Rayleigh-Ritz kernel of the sparse
//! path, a block Davidson iteration with diagonal preconditioning, thick
//! restarts and a fixed, seedless starting block. Ground-state problems here
//! have an exact two-fold (time-reversal) degeneracy, so the block size is
//! two everywhere and "convergence" means both Ritz pairs meet the residual
//! target relative to the operator 1-norm.

use crate::fockspace::sparse::{vaxpy, vdot, vnorm, vscale, Csr};
use crate::{C64, Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

// ------------------------------------------------------------- dense ----

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct DenseEig {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<C64>>,
}

/// Cyclic complex Jacobi diagonalization. `a` must be Hermitian; the
/// imaginary parts of the diagonal are ignored (they are rounding noise for
/// any honestly Hermitian input).
pub fn eigh_dense(a: &[Vec<C64>]) -> DenseEig {
    let n = a.len();
    let mut m: Vec<Vec<C64>> = a.to_vec();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut row = vec![ZERO; n];
            row[i] = ONE;
            row
        })
        .collect();

    let frob: f64 = m
        .iter()
        .flat_map(|row| row.iter())
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let target = 1e-15 * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let alpha = m[p][p].re;
                let gamma = m[q][q].re;
                let b = apq.norm();
                // phase absorbed into column q so the 2x2 block is real
                let w = apq.conj() / b;
                let theta = (alpha - gamma) / (2.0 * b);
                let t = if theta >= 0.0 {
                    -1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // unitary: col_p' = c col_p - s w col_q ; col_q' = s w^* ... via
                // G[p][p] = c, G[p][q] = s, G[q][p] = -s w, G[q][q] = c w
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -C64::new(s, 0.0) * w;
                let gqq = C64::new(c, 0.0) * w;
                // columns: M <- M G
                for r in 0..n {
                    let mp = m[r][p];
                    let mq = m[r][q];
                    m[r][p] = mp * gpp + mq * gqp;
                    m[r][q] = mp * gpq + mq * gqq;
                }
                // rows: M <- G^H M
                for cidx in 0..n {
                    let mp = m[p][cidx];
                    let mq = m[q][cidx];
                    m[p][cidx] = gpp.conj() * mp + gqp.conj() * mq;
                    m[q][cidx] = gpq.conj() * mp + gqq.conj() * mq;
                }
                // accumulate eigenvectors: V <- V G
                for r in 0..n {
                    let vp = v[r][p];
                    let vq = v[r][q];
                    v[r][p] = vp * gpp + vq * gqp;
                    v[r][q] = vp * gpq + vq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].re.partial_cmp(&m[j][j].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[i][i].re).collect();
    let vectors: Vec<Vec<C64>> = order
        .iter()
        .map(|&col| (0..n).map(|r| v[r][col]).collect())
        .collect();
    DenseEig { values, vectors }
}

/// Dense-path convenience for small sparse operators (cross-checks only).
pub fn eigh_dense_csr(h: &Csr) -> DenseEig {
    eigh_dense(&h.to_dense())
}

// ---------------------------------------------------------- davidson ----

#[derive(Debug, Clone, Copy)]
pub struct EigOptions {
    /// Number of lowest eigenpairs tracked together.
    pub block: usize,
    /// Residual target relative to the operator 1-norm.
    pub tol: f64,
    /// Outer iteration cap.
    pub max_iter: usize,
    /// Subspace dimension triggering a thick restart.
    pub max_subspace: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            block: 2,
            tol: 1e-8,
            max_iter: 10_000,
            max_subspace: 24,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowestBlock {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    /// Absolute residual norms `||H x - theta x||`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// The operator 1-norm the tolerance was scaled by.
    pub norm_scale: f64,
}

/// Orthonormalize `x` against the columns in `basis` (two Gram-Schmidt
/// passes) and normalize; returns `None` when `x` lies in their span.
fn orthonormalize_against(x: &mut Vec<C64>, basis: &[Vec<C64>]) -> Option<()> {
    let initial = vnorm(x);
    if initial == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let overlap = vdot(b, x);
            vaxpy(-overlap, b, x);
        }
    }
    let after = vnorm(x);
    if after <= 1e-10 * initial {
        return None;
    }
    vscale(x, C64::new(1.0 / after, 0.0));
    Some(())
}

/// Lowest `opts.block` eigenpairs of a Hermitian sparse operator by block
/// Davidson iteration with diagonal preconditioning.
///
/// Fully deterministic: the starting block is supplied by the caller, the
/// expansion directions are preconditioned residuals in block order, and all
/// reductions are sequential per vector.
pub fn lowest_block(h: &Csr, start: &[Vec<C64>], opts: &EigOptions) -> Result<LowestBlock> {
    let n = h.n_rows();
    assert_eq!(h.n_cols(), n);
    assert!(opts.block >= 1 && start.len() >= opts.block);
    let scale = h.norm1().max(f64::MIN_POSITIVE);
    let target = opts.tol * scale;
    let diag: Vec<f64> = h.diagonal().iter().map(|d| d.re).collect();

    // basis V and its image W = H V
    let mut v_basis: Vec<Vec<C64>> = Vec::new();
    let mut w_image: Vec<Vec<C64>> = Vec::new();
    for s in start {
        let mut x = s.clone();
        if orthonormalize_against(&mut x, &v_basis).is_some() {
            w_image.push(h.matvec(&x));
            v_basis.push(x);
        }
    }
    if v_basis.len() < opts.block {
        return Err(Error::Domain {
            name: "start block",
            value: v_basis.len() as f64,
            constraint: "starting vectors must span at least `block` directions",
        });
    }

    let mut last_residual = f64::INFINITY;
    for iter in 0..opts.max_iter {
        // Rayleigh-Ritz on the current subspace
        let m = v_basis.len();
        let mut s_mat = vec![vec![ZERO; m]; m];
        for i in 0..m {
            for j in 0..m {
                s_mat[i][j] = vdot(&v_basis[i], &w_image[j]);
            }
        }
        let eig = eigh_dense(&s_mat);
        let mut ritz_vecs: Vec<Vec<C64>> = Vec::with_capacity(opts.block);
        let mut ritz_ims: Vec<Vec<C64>> = Vec::with_capacity(opts.block);
        for k in 0..opts.block {
            let mut x = vec![ZERO; n];
            let mut hx = vec![ZERO; n];
            for i in 0..m {
                let c = eig.vectors[k][i];
                vaxpy(c, &v_basis[i], &mut x);
                vaxpy(c, &w_image[i], &mut hx);
            }
            ritz_vecs.push(x);
            ritz_ims.push(hx);
        }
        let thetas: Vec<f64> = eig.values[..opts.block].to_vec();

        // residuals r_k = H x_k - theta_k x_k
        let mut residuals = Vec::with_capacity(opts.block);
        let mut res_vecs: Vec<Vec<C64>> = Vec::with_capacity(opts.block);
        for k in 0..opts.block {
            let mut r = ritz_ims[k].clone();
            vaxpy(C64::new(-thetas[k], 0.0), &ritz_vecs[k], &mut r);
            residuals.push(vnorm(&r));
            res_vecs.push(r);
        }
        let worst = residuals.iter().cloned().fold(0.0f64, f64::max);
        last_residual = worst;
        if worst <= target {
            return Ok(LowestBlock {
                values: thetas,
                vectors: ritz_vecs,
                residuals,
                iterations: iter,
                norm_scale: scale,
            });
        }

        // thick restart: collapse onto the best Ritz vectors
        if m + opts.block > opts.max_subspace {
            let keep = (2 * opts.block).min(m);
            let mut new_v = Vec::with_capacity(keep);
            let mut new_w = Vec::with_capacity(keep);
            for k in 0..keep {
                let mut x = vec![ZERO; n];
                let mut hx = vec![ZERO; n];
                for i in 0..m {
                    let c = eig.vectors[k][i];
                    vaxpy(c, &v_basis[i], &mut x);
                    vaxpy(c, &w_image[i], &mut hx);
                }
                // re-orthonormalize defensively; Ritz vectors are orthogonal
                // in exact arithmetic, and the scale correction keeps W in sync
                let before = vnorm(&x);
                if orthonormalize_against(&mut x, &new_v).is_some() {
                    vscale(&mut hx, C64::new(1.0 / before, 0.0));
                    new_v.push(x);
                    new_w.push(hx);
                }
            }
            v_basis = new_v;
            w_image = new_w;
        }

        // expand with preconditioned residuals
        let mut grew = false;
        for k in 0..opts.block {
            if residuals[k] <= target {
                continue;
            }
            let mut d = res_vecs[k].clone();
            let guard = 1e-10 * scale;
            for (i, di) in d.iter_mut().enumerate() {
                let denom = diag[i] - thetas[k];
                let denom = if denom.abs() < guard {
                    if denom >= 0.0 { guard } else { -guard }
                } else {
                    denom
                };
                *di /= denom;
            }
            if orthonormalize_against(&mut d, &v_basis).is_some() {
                w_image.push(h.matvec(&d));
                v_basis.push(d);
                grew = true;
            }
        }
        if !grew {
            // preconditioner yielded nothing new: fall back to raw residuals
            for k in 0..opts.block {
                let mut d = res_vecs[k].clone();
                if orthonormalize_against(&mut d, &v_basis).is_some() {
                    w_image.push(h.matvec(&d));
                    v_basis.push(d);
                    grew = true;
                }
            }
        }
        if !grew {
            return Err(Error::NoConvergence {
                residual: worst,
                target,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence {
        residual: last_residual,
        target,
        iterations: opts.max_iter,
    })
}

// ------------------------------------------------------ deflated solve ----

/// Solve `P (H - shift) P x = P rhs` by conjugate gradients, where `P`
/// projects off the span of `deflate` (assumed orthonormal). The operator
/// must be positive semidefinite on that complement, which holds whenever
/// `shift` is the lowest eigenvalue and `deflate` spans its eigenspace.
pub fn solve_deflated(
    h: &Csr,
    shift: f64,
    deflate: &[Vec<C64>],
    rhs: &[C64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<C64>> {
    let n = rhs.len();
    let project = |x: &mut Vec<C64>| {
        for d in deflate {
            let overlap = vdot(d, x);
            vaxpy(-overlap, d, x);
        }
    };
    let apply = |x: &[C64]| -> Vec<C64> {
        let mut y = h.matvec(x);
        vaxpy(C64::new(-shift, 0.0), x, &mut y);
        let mut y = y;
        project(&mut y);
        y
    };

    let mut b = rhs.to_vec();
    project(&mut b);
    let b_norm = vnorm(&b);
    if b_norm == 0.0 {
        return Ok(vec![ZERO; n]);
    }
    let target = rel_tol * b_norm;

    let mut x = vec![ZERO; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs_old = vdot(&r, &r).re;
    for _ in 0..max_iter {
        let ap = apply(&p);
        let denom = vdot(&p, &ap).re;
        if denom <= 0.0 {
            // stagnation on a numerically null direction
            break;
        }
        let alpha = rs_old / denom;
        vaxpy(C64::new(alpha, 0.0), &p, &mut x);
        vaxpy(C64::new(-alpha, 0.0), &ap, &mut r);
        let rs_new = vdot(&r, &r).re;
        if rs_new.sqrt() <= target {
            project(&mut x);
            return Ok(x);
        }
        let beta = rs_new / rs_old;
        for (pi, ri) in p.iter_mut().zip(r.iter()) {
            *pi = ri + C64::new(beta, 0.0) * *pi;
        }
        rs_old = rs_new;
    }
    Err(Error::LinearSolve {
        residual: vnorm(&r) / b_norm,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> Vec<Vec<C64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![vec![ZERO; n]; n];
        for i in 0..n {
            a[i][i] = c(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[i][j] = z;
                a[j][i] = z.conj();
            }
        }
        a
    }

    #[test]
    fn jacobi_pauli_and_tridiagonal() {
        // sigma_y has eigenvalues -1, +1
        let sy = vec![vec![ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), ZERO]];
        let eig = eigh_dense(&sy);
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        // tridiag(1,2,1) at n = 3: eigenvalues 2 - sqrt 2, 2, 2 + sqrt 2
        let t = vec![
            vec![c(2.0, 0.0), ONE, ZERO],
            vec![ONE, c(2.0, 0.0), ONE],
            vec![ZERO, ONE, c(2.0, 0.0)],
        ];
        let eig = eigh_dense(&t);
        let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (got, want) in eig.values.iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn jacobi_invariants_random() {
        let n = 30;
        let a = random_hermitian(n, 7);
        let eig = eigh_dense(&a);
        // ascending
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // trace preserved
        let tr: f64 = (0..n).map(|i| a[i][i].re).sum();
        let sum: f64 = eig.values.iter().sum();
        assert!((tr - sum).abs() < 1e-11, "trace {tr} vs {sum}");
        // orthonormality and eigen-residuals certify the decomposition
        for i in 0..n {
            for j in 0..n {
                let g = vdot(&eig.vectors[i], &eig.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(want, 0.0)).norm() < 1e-12, "gram ({i},{j}) = {g}");
            }
        }
        for k in 0..n {
            let mut r = vec![ZERO; n];
            for i in 0..n {
                for j in 0..n {
                    r[i] += a[i][j] * eig.vectors[k][j];
                }
            }
            vaxpy(c(-eig.values[k], 0.0), &eig.vectors[k], &mut r);
            assert!(vnorm(&r) < 1e-11, "residual of pair {k}: {}", vnorm(&r));
        }
    }

    fn sparse_test_matrix(n: usize, seed: u64) -> Csr {
        // diagonally dominant Hermitian with ~6 off-diagonals per row
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, c(i as f64 / n as f64 + 0.1, 0.0)));
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j == i {
                    continue;
                }
                let z = c(rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01));
                triplets.push((i, j, z));
                triplets.push((j, i, z.conj()));
            }
        }
        Csr::from_triplets(n, n, &triplets)
    }

    fn seed_block(n: usize) -> Vec<Vec<C64>> {
        let mut e0 = vec![ZERO; n];
        e0[0] = ONE;
        let mut e1 = vec![ZERO; n];
        e1[1] = ONE;
        vec![e0, e1]
    }

    #[test]
    fn davidson_matches_dense() {
        let n = 240;
        let h = sparse_test_matrix(n, 3);
        let opts = EigOptions {
            tol: 1e-10,
            ..EigOptions::default()
        };
        let out = lowest_block(&h, &seed_block(n), &opts).unwrap();
        let dense = eigh_dense_csr(&h);
        for k in 0..2 {
            assert!(
                (out.values[k] - dense.values[k]).abs() <= 1e-9 * out.norm_scale,
                "pair {k}: {} vs {}",
                out.values[k],
                dense.values[k]
            );
            assert!(out.residuals[k] <= 1e-10 * out.norm_scale);
        }
        // determinism: a second run is bitwise identical
        let again = lowest_block(&h, &seed_block(n), &opts).unwrap();
        assert_eq!(out.values, again.values);
        assert_eq!(out.iterations, again.iterations);
        for k in 0..2 {
            assert_eq!(out.vectors[k], again.vectors[k]);
        }
    }

    #[test]
    fn davidson_resolves_exact_doublet() {
        // H (x) I_2: every eigenvalue exactly twice
        let base = sparse_test_matrix(80, 11);
        let id = [[ONE, ZERO], [ZERO, ONE]];
        let h = base.kron_spin(&id);
        let out = lowest_block(&h, &seed_block(160), &EigOptions::default()).unwrap();
        let split = (out.values[1] - out.values[0]).abs();
        assert!(
            split <= 2.0 * 1e-8 * out.norm_scale,
            "doublet splitting {split}"
        );
        let overlap = vdot(&out.vectors[0], &out.vectors[1]).norm();
        assert!(overlap < 1e-8, "block vectors must stay orthogonal");
    }

    #[test]
    fn davidson_reports_non_convergence() {
        let h = sparse_test_matrix(120, 5);
        let opts = EigOptions {
            tol: 1e-12,
            max_iter: 2,
            ..EigOptions::default()
        };
        match lowest_block(&h, &seed_block(120), &opts) {
            Err(Error::NoConvergence { iterations, .. }) => assert_eq!(iterations, 2),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn deflated_solve_matches_dense_inverse() {
        let n = 40;
        let h = sparse_test_matrix(n, 23);
        let dense = eigh_dense_csr(&h);
        let e0 = dense.values[0];
        let ground = dense.vectors[0].clone();
        // rhs orthogonal to the ground state
        let mut rhs = vec![ZERO; n];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for r in rhs.iter_mut() {
            *r = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let x = solve_deflated(&h, e0, &[ground.clone()], &rhs, 1e-12, 10_000).unwrap();
        // dense reference through the spectral decomposition
        let mut want = vec![ZERO; n];
        for k in 1..n {
            let coeff = vdot(&dense.vectors[k], &rhs) / (dense.values[k] - e0);
            vaxpy(coeff, &dense.vectors[k], &mut want);
        }
        let mut diff = x.clone();
        vaxpy(-ONE, &want, &mut diff);
        assert!(
            vnorm(&diff) <= 1e-8 * vnorm(&want),
            "deflated CG deviates by {}",
            vnorm(&diff) / vnorm(&want)
        );
        // solution stays orthogonal to the deflated direction
        assert!(vdot(&ground, &x).norm() < 1e-10);
    }
}
