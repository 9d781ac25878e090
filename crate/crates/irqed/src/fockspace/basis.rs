//! Occupation-number enumeration of the truncated Fock space.
//!
//! States are tuples `(n_1, ..., n_M; s)` with per-mode occupation
//! `n_j <= n_max`, total `sum n_j <= n_cap`, and a two-valued spin `s`.
//! Enumeration order is `(total photons, occupation tuple lex, spin)`, fixed
//! once and for all so serialized operators and golden files stay stable.
//! The spin index is innermost: full index = `2 * occupation_rank + s`.

use super::grid::ModeGrid;
use crate::{Error, Result};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct FockBasis {
    pub grid: ModeGrid,
    pub n_max: u8,
    pub n_cap: u8,
    occupations: Vec<Vec<u8>>,
    rank: HashMap<Vec<u8>, usize>,
}

impl FockBasis {
    /// Enumerate the basis; `dim_cap` bounds the full (spin-included)
    /// dimension and construction fails with a resource error beyond it.
    pub fn new(grid: ModeGrid, n_max: u8, n_cap: u8, dim_cap: usize) -> Result<Self> {
        let m = grid.n_modes();
        let mut occupations: Vec<Vec<u8>> = Vec::new();
        // ascending total, then lexicographic within a total: a depth-first
        // walk assigning n_1 first produces exactly that order
        for total in 0..=n_cap {
            let mut current = vec![0u8; m];
            enumerate_level(&mut occupations, &mut current, 0, total, n_max)?;
            if 2 * occupations.len() > dim_cap {
                return Err(Error::Resource {
                    requested: 2 * occupations.len(),
                    cap: dim_cap,
                });
            }
        }
        let rank = occupations
            .iter()
            .enumerate()
            .map(|(i, occ)| (occ.clone(), i))
            .collect();
        Ok(FockBasis {
            grid,
            n_max,
            n_cap,
            occupations,
            rank,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.grid.n_modes()
    }

    /// Number of occupation tuples (photon-sector dimension).
    pub fn occ_dim(&self) -> usize {
        self.occupations.len()
    }

    /// Full dimension including the spin factor.
    pub fn dim(&self) -> usize {
        2 * self.occ_dim()
    }

    pub fn occupation(&self, rank: usize) -> &[u8] {
        &self.occupations[rank]
    }

    pub fn occ_rank(&self, occ: &[u8]) -> Option<usize> {
        self.rank.get(occ).copied()
    }

    pub fn total_photons(&self, rank: usize) -> u32 {
        self.occupations[rank].iter().map(|&n| n as u32).sum()
    }

    /// Full-space index of `(occupation rank, spin)`.
    pub fn full_index(&self, occ_rank: usize, spin: usize) -> usize {
        debug_assert!(spin < 2);
        2 * occ_rank + spin
    }

    /// The vacuum tuple sits at occupation rank 0 by construction.
    pub fn vacuum_index(&self, spin: usize) -> usize {
        self.full_index(0, spin)
    }

    /// Fraction of `|psi|^2` carried by truncation-edge states: total photon
    /// number at `n_cap` or any single occupation at `n_max`. When this is
    /// small the occupation truncation is invisible to commutator identities.
    pub fn edge_mass(&self, psi: &[crate::C64]) -> f64 {
        assert_eq!(psi.len(), self.dim());
        let mut mass = 0.0;
        for (rank, occ) in self.occupations.iter().enumerate() {
            let total: u32 = occ.iter().map(|&n| n as u32).sum();
            let at_edge =
                total == self.n_cap as u32 || occ.iter().any(|&n| n == self.n_max);
            if at_edge {
                mass += psi[2 * rank].norm_sqr() + psi[2 * rank + 1].norm_sqr();
            }
        }
        mass
    }
}

/// Depth-first enumeration of tuples with exact sum `remaining`, lex order.
fn enumerate_level(
    out: &mut Vec<Vec<u8>>,
    current: &mut Vec<u8>,
    mode: usize,
    remaining: u8,
    n_max: u8,
) -> Result<()> {
    let m = current.len();
    if mode == m {
        if remaining == 0 {
            out.push(current.clone());
        }
        return Ok(());
    }
    // capacity pruning: the remaining modes bound the assignable total
    let tail_capacity = (m - mode - 1) as u32 * n_max as u32;
    for n in 0..=n_max.min(remaining) {
        if (remaining - n) as u32 > tail_capacity {
            continue;
        }
        current[mode] = n;
        enumerate_level(out, current, mode + 1, remaining - n, n_max)?;
    }
    current[mode] = 0;
    Ok(())
}
