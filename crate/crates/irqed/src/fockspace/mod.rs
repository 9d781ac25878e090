//! Finite-mode, occupation-truncated bosonic Fock space with a spin factor:
//! mode grids, bases, ladder operators, coherent states and number operators.
//!
//! Layout conventions, fixed crate-wide:
//! * photon-sector (occupation) rank `r` and spin `s` combine to the full
//!   index `2 r + s`;
//! * a grid mode's amplitude slot in any kernel-derived coherent vector is
//!   `f_j = sqrt(w_j) * v(k_j, lambda_j)`, so that `||f||^2` tracks the
//!   continuum `L^2` norm of the kernel.

pub mod basis;
pub mod grid;
pub mod sparse;

pub use basis::FockBasis;
pub use grid::{build_mode_grid, Mode, ModeGrid, RadialLayout};
pub use sparse::Csr;

use crate::{C64, Error, Result};
use sparse::{vdot, vscale};

/// Complex coefficients over the full (spin included) basis.
pub type StateVector = Vec<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Annihilation and creation operators for mode `j` on the photon sector
/// (occupation basis, no spin factor). The creation operator is the exact
/// structural adjoint of the annihilation operator.
pub fn ladder_occ(basis: &FockBasis, j: usize) -> (Csr, Csr) {
    assert!(j < basis.n_modes(), "mode index out of range");
    let dim = basis.occ_dim();
    let mut triplets = Vec::new();
    for r in 0..dim {
        let occ = basis.occupation(r);
        let n = occ[j];
        if n > 0 {
            let mut lowered = occ.to_vec();
            lowered[j] = n - 1;
            let r2 = basis
                .occ_rank(&lowered)
                .expect("lowering stays inside the truncation");
            triplets.push((r2, r, C64::new((n as f64).sqrt(), 0.0)));
        }
    }
    let a = Csr::from_triplets(dim, dim, &triplets);
    let a_dag = a.transpose_conj();
    (a, a_dag)
}

/// Ladder pair lifted to the full space (tensored with the spin identity).
pub fn ladder(basis: &FockBasis, j: usize) -> (Csr, Csr) {
    let (a, a_dag) = ladder_occ(basis, j);
    let id = [[ONE, ZERO], [ZERO, ONE]];
    (a.kron_spin(&id), a_dag.kron_spin(&id))
}

/// Safe-subspace and full-space deviation of `[a_i, a_j^dag] - delta_ij`.
#[derive(Debug, Clone, Copy)]
pub struct CcrDefect {
    /// Largest matrix element over states with every occupation below
    /// `n_max` and total below `n_cap` (row and column). Exactly zero: the
    /// commutator entries are differences of products of integer square
    /// roots that cancel identically away from the truncation edge.
    pub safe: f64,
    /// Largest matrix element over the whole space; nonzero entries live on
    /// the truncation edge only.
    pub full: f64,
}

/// Measure `[a_i, a_j^dag] - delta_ij * Id` on the occupation basis (the spin
/// factor is inert and omitted).
///
/// The two product terms are composed state by state with the coefficient
/// products kept as integers under the square root, so when both terms
/// survive the truncation they cancel identically and the safe-subspace
/// defect is an exact zero, not a rounding residue. The floating-point route
/// through explicit `Csr` products agrees to machine epsilon (see tests); the
/// integer route is what isolates truncation as the only defect source.
pub fn ccr_defect(basis: &FockBasis, i: usize, j: usize) -> CcrDefect {
    let safe_state: Vec<bool> = (0..basis.occ_dim())
        .map(|r| {
            let occ = basis.occupation(r);
            occ.iter().all(|&n| n < basis.n_max)
                && basis.total_photons(r) < basis.n_cap as u32
        })
        .collect();
    let mut safe = 0.0f64;
    let mut full = 0.0f64;
    for c in 0..basis.occ_dim() {
        let occ = basis.occupation(c);
        let (ni, nj) = (occ[i] as u64, occ[j] as u64);
        let total = basis.total_photons(c);

        // a_i a_j^dag |n>: create at j (caps permitting), then annihilate at i
        let create_ok = occ[j] < basis.n_max && total < basis.n_cap as u32;
        let after_create_ni = ni + if i == j { 1 } else { 0 };
        let q1: Option<u64> = if create_ok && after_create_ni >= 1 {
            Some((nj + 1) * after_create_ni)
        } else {
            None
        };

        // a_j^dag a_i |n>: annihilate at i, then create at j (caps always
        // permit the re-creation since the total just dropped)
        let after_annihilate_nj = if i == j { nj - nj.min(1) } else { nj };
        let q2: Option<u64> = if ni >= 1 {
            let cap_ok = (after_annihilate_nj as u8) < basis.n_max;
            if cap_ok {
                Some(ni * (after_annihilate_nj + 1))
            } else {
                None
            }
        } else {
            None
        };

        // both terms target the same state n - e_i + e_j; on the diagonal
        // (i == j) the delta subtraction joins them
        let entry: f64 = if i == j {
            // perfect squares: sqrt((n+1)^2) = n+1 and sqrt(n^2) = n exactly
            let t1 = q1.map_or(0.0, |q| (q as f64).sqrt());
            let t2 = q2.map_or(0.0, |q| (q as f64).sqrt());
            t1 - t2 - 1.0
        } else {
            match (q1, q2) {
                (Some(a), Some(b)) if a == b => 0.0,
                (Some(a), Some(b)) => (a as f64).sqrt() - (b as f64).sqrt(),
                (Some(a), None) => (a as f64).sqrt(),
                (None, Some(b)) => -(b as f64).sqrt(),
                (None, None) => 0.0,
            }
        };
        if entry == 0.0 {
            continue;
        }
        // row index of the common target
        let row = if i == j {
            c
        } else {
            let mut target = occ.to_vec();
            if q1.is_some() || q2.is_some() {
                target[i] -= 1;
                target[j] += 1;
            }
            match basis.occ_rank(&target) {
                Some(r) => r,
                None => c, // unreachable: surviving terms stay in the basis
            }
        };
        let mag = entry.abs();
        full = full.max(mag);
        if safe_state[row] && safe_state[c] {
            safe = safe.max(mag);
        }
    }
    CcrDefect { safe, full }
}

/// Normalized truncated coherent state with per-mode amplitudes `f`, placed
/// in the spin-up sector (the photon content is what every caller probes;
/// tensor with another spinor by permuting the two spin slots if needed).
///
/// Returns the state and the truncation mass defect (the `|.|^2` weight the
/// caps removed before renormalization). Errors when the per-mode tail bound
/// `max_j |f_j|^{n_max+1} / sqrt((n_max+1)!)` or the realized defect exceeds
/// `defect_tol`.
pub fn coherent_state(
    basis: &FockBasis,
    f: &[C64],
    defect_tol: f64,
) -> Result<(StateVector, f64)> {
    assert_eq!(f.len(), basis.n_modes(), "one amplitude per mode");
    let mut fact = 1.0;
    for n in 1..=(basis.n_max as usize + 1) {
        fact *= n as f64;
    }
    let per_mode_tail = f
        .iter()
        .map(|fj| fj.norm().powi(basis.n_max as i32 + 1) / fact.sqrt())
        .fold(0.0f64, f64::max);
    if per_mode_tail > defect_tol {
        return Err(Error::Truncation {
            defect: per_mode_tail,
            threshold: defect_tol,
        });
    }

    let norm_sq: f64 = f.iter().map(|fj| fj.norm_sqr()).sum();
    let prefactor = (-0.5 * norm_sq).exp();
    let mut psi = vec![ZERO; basis.dim()];
    let mut kept_mass = 0.0;
    for r in 0..basis.occ_dim() {
        let occ = basis.occupation(r);
        let mut coeff = C64::new(prefactor, 0.0);
        for (fj, &n) in f.iter().zip(occ.iter()) {
            for step in 1..=(n as usize) {
                coeff *= fj / (step as f64).sqrt();
            }
        }
        kept_mass += coeff.norm_sqr();
        psi[2 * r] = coeff; // spin-up slot
    }
    let defect = 1.0 - kept_mass;
    if defect > defect_tol {
        return Err(Error::Truncation {
            defect,
            threshold: defect_tol,
        });
    }
    vscale(&mut psi, C64::new(1.0 / kept_mass.sqrt(), 0.0));
    Ok((psi, defect))
}

/// Exact overlap of two (untruncated) coherent states:
/// `exp(-||f||^2/2 - ||g||^2/2 + <f, g>)`.
pub fn coherent_overlap_analytic(f: &[C64], g: &[C64]) -> C64 {
    assert_eq!(f.len(), g.len());
    let nf: f64 = f.iter().map(|x| x.norm_sqr()).sum();
    let ng: f64 = g.iter().map(|x| x.norm_sqr()).sum();
    (vdot(f, g) - 0.5 * (nf + ng)).exp()
}

/// Photon number operator restricted to modes with `|k_j| >= rho`, on the
/// full space (diagonal). `rho = 0` gives the total number operator.
pub fn number_operator(basis: &FockBasis, rho: f64) -> Csr {
    let counted: Vec<bool> = basis
        .grid
        .modes
        .iter()
        .map(|m| crate::vec3::norm(m.k) >= rho)
        .collect();
    let mut diag = vec![ZERO; basis.dim()];
    for r in 0..basis.occ_dim() {
        let occ = basis.occupation(r);
        let count: f64 = occ
            .iter()
            .zip(counted.iter())
            .filter(|(_, keep)| **keep)
            .map(|(&n, _)| n as f64)
            .sum();
        diag[2 * r] = C64::new(count, 0.0);
        diag[2 * r + 1] = C64::new(count, 0.0);
    }
    Csr::from_diagonal(&diag)
}

// ------------------------------------------------------------- dumps ----

/// Serializable sparsity snapshot, `(row, col, re, im)` per entry.
#[derive(Debug, serde::Serialize)]
pub struct OperatorDump {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

pub fn operator_dump(op: &Csr) -> OperatorDump {
    OperatorDump {
        n_rows: op.n_rows(),
        n_cols: op.n_cols(),
        entries: op
            .entries()
            .into_iter()
            .map(|(r, c, v)| (r, c, v.re, v.im))
            .collect(),
    }
}

/// Serializable basis enumeration snapshot.
#[derive(Debug, serde::Serialize)]
pub struct BasisDump {
    pub n_modes: usize,
    pub n_max: u8,
    pub n_cap: u8,
    /// Mode table: (k, polarization tag, weight).
    pub modes: Vec<([f64; 3], char, f64)>,
    pub occupations: Vec<Vec<u8>>,
}

pub fn basis_dump(basis: &FockBasis) -> BasisDump {
    BasisDump {
        n_modes: basis.n_modes(),
        n_max: basis.n_max,
        n_cap: basis.n_cap,
        modes: basis
            .grid
            .modes
            .iter()
            .map(|m| {
                let tag = match m.lambda {
                    crate::kernels::Polarization::Plus => '+',
                    crate::kernels::Polarization::Minus => '-',
                };
                (m.k, tag, m.weight)
            })
            .collect(),
        occupations: (0..basis.occ_dim())
            .map(|r| basis.occupation(r).to_vec())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse::{expectation, vnorm};

    fn two_mode_basis(n_max: u8, n_cap: u8) -> FockBasis {
        let grid = build_mode_grid(0.1, 0.1, 1, 1, RadialLayout::LogUniform).unwrap();
        FockBasis::new(grid, n_max, n_cap, 100_000).unwrap()
    }

    fn four_mode_basis(n_max: u8, n_cap: u8) -> FockBasis {
        let grid = build_mode_grid(0.1, 0.1, 2, 1, RadialLayout::LogUniform).unwrap();
        FockBasis::new(grid, n_max, n_cap, 100_000).unwrap()
    }

    #[test]
    fn ladder_matrix_elements() {
        let basis = two_mode_basis(3, 3);
        let (a, a_dag) = ladder_occ(&basis, 0);
        let vac = basis.occ_rank(&[0, 0]).unwrap();
        let one = basis.occ_rank(&[1, 0]).unwrap();
        let two = basis.occ_rank(&[2, 0]).unwrap();
        assert_eq!(a_dag.get(one, vac), ONE, "<1|adag|0> = 1");
        assert_eq!(a_dag.get(two, one), C64::new(2f64.sqrt(), 0.0), "<2|adag|1> = sqrt 2");
        assert_eq!(a.get(one, two), C64::new(2f64.sqrt(), 0.0));
        // vacuum annihilation: the column of the vacuum is empty
        let mut vac_vec = vec![ZERO; basis.occ_dim()];
        vac_vec[vac] = ONE;
        assert!(vnorm(&a.matvec(&vac_vec)) == 0.0, "a|vac> = 0");
    }

    #[test]
    fn adjoint_is_structural() {
        // build the creator from its own definition and compare entrywise
        let basis = four_mode_basis(3, 3);
        for j in 0..basis.n_modes() {
            let (a, a_dag) = ladder_occ(&basis, j);
            let mut triplets = Vec::new();
            for r in 0..basis.occ_dim() {
                let occ = basis.occupation(r);
                if occ[j] < basis.n_max && basis.total_photons(r) < basis.n_cap as u32 {
                    let mut raised = occ.to_vec();
                    raised[j] += 1;
                    if let Some(r2) = basis.occ_rank(&raised) {
                        triplets.push((r2, r, C64::new(((occ[j] + 1) as f64).sqrt(), 0.0)));
                    }
                }
            }
            let independent = Csr::from_triplets(basis.occ_dim(), basis.occ_dim(), &triplets);
            assert_eq!(independent.entries(), a_dag.entries(), "mode {j}");
            assert_eq!(a.transpose_conj().entries(), a_dag.entries());
        }
    }

    #[test]
    fn ccr_exact_on_safe_subspace() {
        let basis = four_mode_basis(3, 3);
        let safe: Vec<bool> = (0..basis.occ_dim())
            .map(|r| {
                let occ = basis.occupation(r);
                occ.iter().all(|&n| n < basis.n_max)
                    && basis.total_photons(r) < basis.n_cap as u32
            })
            .collect();
        for i in 0..4 {
            for j in 0..4 {
                let d = ccr_defect(&basis, i, j);
                assert_eq!(d.safe, 0.0, "[{i},{j}] safe-subspace defect must vanish exactly");
                if i == j {
                    assert!(d.full > 0.0, "truncation edge must show up in the full defect");
                }
                // floating route: explicit sparse products land within a few
                // ulps of the integer-exact result on the safe subspace
                let (ai, _) = ladder_occ(&basis, i);
                let (_, ajd) = ladder_occ(&basis, j);
                let mut comm = ai.matmul(&ajd).add_scaled(&ajd.matmul(&ai), -ONE);
                if i == j {
                    comm = comm.add_scaled(&Csr::identity(basis.occ_dim()), -ONE);
                }
                let float_safe = comm
                    .entries()
                    .into_iter()
                    .filter(|(r, c, _)| safe[*r] && safe[*c])
                    .map(|(_, _, v)| v.norm())
                    .fold(0.0f64, f64::max);
                assert!(float_safe <= 1e-14, "float route defect {float_safe}");
            }
        }
        // annihilators commute everywhere, truncation or not
        for i in 0..4 {
            for j in 0..4 {
                let (ai, _) = ladder_occ(&basis, i);
                let (aj, _) = ladder_occ(&basis, j);
                let comm = ai.matmul(&aj).add_scaled(&aj.matmul(&ai), -ONE);
                let max = comm
                    .entries()
                    .iter()
                    .map(|(_, _, v)| v.norm())
                    .fold(0.0f64, f64::max);
                assert_eq!(max, 0.0, "[a_{i}, a_{j}] != 0");
            }
        }
    }

    #[test]
    fn coherent_state_mean_and_vacuum_overlap() {
        let basis = two_mode_basis(12, 12);
        let f = [C64::new(0.5, 0.0), ZERO];
        let (psi, defect) = coherent_state(&basis, &f, 1e-6).unwrap();
        assert!(defect < 1e-7, "truncation defect {defect}");
        let n = number_operator(&basis, 0.0);
        let mean = expectation(&n, &psi).re;
        assert!((mean - 0.25).abs() < 1e-10, "<N> = {mean}, want 0.25");
        // overlap with the vacuum
        let (vac, _) = coherent_state(&basis, &[ZERO, ZERO], 1e-12).unwrap();
        let want = (-0.125f64).exp();
        let got = vdot(&vac, &psi).re;
        assert!((got - want).abs() < 1e-9, "vacuum overlap {got} vs {want}");
    }

    #[test]
    fn zero_amplitudes_give_vacuum() {
        let basis = two_mode_basis(2, 2);
        let (psi, defect) = coherent_state(&basis, &[ZERO, ZERO], 1e-12).unwrap();
        assert_eq!(defect, 0.0);
        assert_eq!(psi[basis.vacuum_index(0)], ONE);
        assert!((vnorm(&psi) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn numeric_overlap_matches_analytic() {
        // single active mode, n_max = 12
        let basis = two_mode_basis(12, 12);
        let f = [C64::new(0.3, 0.2), ZERO];
        let g = [C64::new(-0.1, 0.4), ZERO];
        let (pf, _) = coherent_state(&basis, &f, 1e-6).unwrap();
        let (pg, _) = coherent_state(&basis, &g, 1e-6).unwrap();
        let numeric = vdot(&pf, &pg);
        let analytic = coherent_overlap_analytic(&f, &g);
        assert!(
            (numeric - analytic).norm() <= 1e-8,
            "numeric {numeric} vs analytic {analytic}"
        );
        // four modes, n_max = 4; the preflight tail bound is coarse at this
        // occupancy cap, so the tolerance reflects it (realized defect ~1e-8)
        let basis = four_mode_basis(4, 16);
        let f: Vec<C64> = vec![
            C64::new(0.2, 0.1),
            C64::new(-0.15, 0.0),
            C64::new(0.0, 0.25),
            C64::new(0.1, -0.1),
        ];
        let g: Vec<C64> = vec![
            C64::new(0.1, 0.0),
            C64::new(0.05, -0.2),
            C64::new(-0.1, 0.1),
            C64::new(0.0, 0.2),
        ];
        let (pf, df) = coherent_state(&basis, &f, 1e-3).unwrap();
        let (pg, dg) = coherent_state(&basis, &g, 1e-3).unwrap();
        assert!(df < 1e-7 && dg < 1e-7, "realized defects {df}, {dg}");
        let numeric = vdot(&pf, &pg);
        let analytic = coherent_overlap_analytic(&f, &g);
        assert!(
            (numeric - analytic).norm() <= 1e-8,
            "numeric {numeric} vs analytic {analytic}"
        );
        // modulus identity |<f,g>| = exp(-||f-g||^2/2)
        let diff_sq: f64 = f
            .iter()
            .zip(g.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!((analytic.norm() - (-0.5 * diff_sq).exp()).abs() < 1e-14);
    }

    #[test]
    fn analytic_overlap_identities() {
        let f = [C64::new(0.2, -0.3), C64::new(0.0, 0.1)];
        assert!((coherent_overlap_analytic(&f, &f) - ONE).norm() < 1e-15, "f = g gives 1");
        let zero = [ZERO, ZERO];
        let nf: f64 = f.iter().map(|x| x.norm_sqr()).sum();
        let want = (-0.5 * nf).exp();
        assert!((coherent_overlap_analytic(&zero, &f).norm() - want).abs() < 1e-15);
    }

    #[test]
    fn truncation_error_is_reported() {
        let basis = two_mode_basis(1, 1);
        let err = coherent_state(&basis, &[C64::new(0.5, 0.0), ZERO], 1e-6).unwrap_err();
        match err {
            Error::Truncation { defect, threshold } => {
                assert!(defect > threshold);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn displacement_exponential_cross_check() {
        // exp(f adag - conj(f) a)|vac> built by a vector Taylor series must
        // match the analytic per-mode construction
        let basis = two_mode_basis(14, 14);
        let f = C64::new(0.35, -0.35);
        let (a, a_dag) = ladder_occ(&basis, 0);
        let gen = a_dag.scaled(f).add_scaled(&a, -f.conj());
        let mut term = vec![ZERO; basis.occ_dim()];
        term[0] = ONE;
        let mut psi_taylor = term.clone();
        for n in 1..200 {
            term = gen.matvec(&term);
            vscale(&mut term, C64::new(1.0 / n as f64, 0.0));
            sparse::vaxpy(ONE, &term, &mut psi_taylor);
            if vnorm(&term) < 1e-18 {
                break;
            }
        }
        let (psi_analytic, defect) = coherent_state(&basis, &[f, ZERO], 1e-8).unwrap();
        assert!(defect < 1e-10);
        // compare on the photon sector (analytic state lives in spin-up slots)
        let mut diff = 0.0f64;
        for r in 0..basis.occ_dim() {
            diff = diff.max((psi_taylor[r] - psi_analytic[2 * r]).norm());
        }
        assert!(diff <= 1e-8, "Taylor vs analytic max deviation {diff}");
    }

    #[test]
    fn number_operator_restrictions() {
        let basis = four_mode_basis(2, 2);
        let radii: Vec<f64> = basis
            .grid
            .modes
            .iter()
            .map(|m| crate::vec3::norm(m.k))
            .collect();
        let r_split = (radii[0] + radii[radii.len() - 1]) / 2.0;
        let f: Vec<C64> = vec![
            C64::new(0.1, 0.0),
            C64::new(0.12, 0.0),
            C64::new(0.0, 0.09),
            C64::new(0.607, 0.0),
        ];
        // n_max = 2 is tight for |f| = 0.6; use a roomier basis for the mean
        let roomy = four_mode_basis(6, 24);
        let (psi, _) = coherent_state(&roomy, &f, 1e-2).unwrap();
        let want: f64 = f
            .iter()
            .zip(radii.iter())
            .filter(|(_, r)| **r >= r_split)
            .map(|(fj, _)| fj.norm_sqr())
            .sum();
        let n_rho = number_operator(&roomy, r_split);
        let got = expectation(&n_rho, &psi).re;
        assert!((got - want).abs() < 1e-5, "restricted mean {got} vs {want}");
        // vacuum expectation vanishes; rho above the ultraviolet edge kills it
        let vac_idx = roomy.vacuum_index(0);
        let mut vac = vec![ZERO; roomy.dim()];
        vac[vac_idx] = ONE;
        assert_eq!(expectation(&n_rho, &vac), ZERO);
        let n_empty = number_operator(&roomy, 2.0);
        assert_eq!(n_empty.norm1(), 0.0, "no modes above rho = 2");
        // rho = 0 counts everything
        let n_tot = number_operator(&roomy, 0.0);
        let full_mean: f64 = f.iter().map(|fj| fj.norm_sqr()).sum();
        assert!((expectation(&n_tot, &psi).re - full_mean).abs() < 1e-5);
    }
}
