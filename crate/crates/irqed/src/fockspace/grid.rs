//! Photon mode grids: deterministic quadrature discretizations of the ball
//! `rho_floor <= |k| <= 1` with two transverse polarizations per spatial node.
//!
//! A mode's weight is the full product quadrature weight of its spatial node
//! (exact shell volume times angular Gauss weight), so that for any smooth
//! `f(k, lambda)`,
//!
//! ```text
//! sum_j w_j f(k_j, lambda_j)  ~  sum_lambda \int dk f(k, lambda).
//! ```
//!
//! In particular `sum_j w_j |v(k_j, lambda_j)|^2` tracks the continuum
//! `L^2` norm of the cloud kernel, which is the identity every Fock-side /
//! kernel-side comparison in this crate rests on. Summing the weights over a
//! single polarization recovers the shell volume `(4 pi / 3)(1 - rho^3)`.

use crate::kernels::Polarization;
use crate::quad;
use crate::vec3::V3;
use crate::{Error, Result};

/// How radial panels divide `[rho_floor, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialLayout {
    /// Exactly `n_radial` log-uniform panels; refining `n_radial` refines
    /// every shell and keeps the panel set nested under doubling.
    LogUniform,
    /// Panel boundaries at `10^{-j/per_decade}` down to the floor, with the
    /// cutoff corners `sigma` and `1/2` inserted. Grids for different `sigma`
    /// then share all ultraviolet nodes, which keeps `sigma`-scans smooth.
    DecadeAnchored { per_decade: usize },
}

/// One polarized photon mode.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub k: V3,
    pub lambda: Polarization,
    /// Full spatial quadrature weight (shared by the two polarizations).
    pub weight: f64,
}

/// Deterministic quadrature grid over momentum space.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    pub modes: Vec<Mode>,
    /// Smallest node radius actually present.
    pub ir_floor: f64,
    /// Largest node radius actually present.
    pub uv_ceiling: f64,
    /// Realized number of radial shells.
    pub n_radial: usize,
    /// Realized number of angular nodes per shell.
    pub n_angular: usize,
    /// The requested lower edge of the radial domain.
    pub rho_floor: f64,
}

impl ModeGrid {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Sum of spatial weights over one polarization; approximates
    /// `(4 pi / 3)(1 - rho^3)` (exactly, for the shell-volume weights used
    /// here, up to rounding).
    pub fn spatial_weight_sum(&self) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.lambda == Polarization::Plus)
            .map(|m| m.weight)
            .sum()
    }
}

/// Radial panel boundaries for the requested layout.
fn radial_boundaries(sigma: f64, rho: f64, n_radial: usize, layout: RadialLayout) -> Vec<f64> {
    match layout {
        RadialLayout::LogUniform => {
            let mut b = Vec::with_capacity(n_radial + 1);
            for i in 0..=n_radial {
                let t = i as f64 / n_radial as f64;
                b.push(rho * (1.0 / rho).powf(t));
            }
            b[0] = rho;
            *b.last_mut().unwrap() = 1.0;
            b
        }
        RadialLayout::DecadeAnchored { per_decade } => {
            let m = per_decade.max(1);
            let mut b = vec![1.0];
            let mut j = 1usize;
            loop {
                let x = 10f64.powf(-(j as f64) / m as f64);
                if x <= rho * (1.0 + 1e-12) {
                    break;
                }
                b.push(x);
                j += 1;
            }
            b.push(rho);
            for anchor in [sigma, 0.5] {
                if anchor > rho && anchor < 1.0 {
                    b.push(anchor);
                }
            }
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * *y);
            b
        }
    }
}

/// Build a grid of polarized photon modes.
///
/// `n_radial` is consumed by [`RadialLayout::LogUniform`] (panel count);
/// the anchored layout derives its own count from `per_decade` and the floor.
/// `n_angular` sets the polar Gauss-Legendre order; the azimuthal count is
/// `2 * n_angular` (a single node when `n_angular = 1`). For `n_angular >= 2`
/// the angular node set is symmetric under `k -> -k`, which the parity checks
/// of the discrete model rely on.
pub fn build_mode_grid(
    sigma: f64,
    rho_floor: f64,
    n_radial: usize,
    n_angular: usize,
    layout: RadialLayout,
) -> Result<ModeGrid> {
    if !(rho_floor > 0.0 && rho_floor < 1.0) {
        return Err(Error::Domain {
            name: "rho_floor",
            value: rho_floor,
            constraint: "0 < rho_floor < 1 (empty grid otherwise)",
        });
    }
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::Domain {
            name: "n_radial/n_angular",
            value: 0.0,
            constraint: "at least one radial and one angular node",
        });
    }
    let boundaries = radial_boundaries(sigma, rho_floor, n_radial, layout);
    debug_assert!(boundaries.len() >= 2);

    let n_u = n_angular;
    let n_phi = if n_u == 1 { 1 } else { 2 * n_u };
    let (u_nodes, u_weights) = quad::gauss_legendre(n_u);

    // angular directions with weights summing to 4 pi
    let mut directions: Vec<(V3, f64)> = Vec::with_capacity(n_u * n_phi);
    for (u, wu) in u_nodes.iter().zip(u_weights.iter()) {
        let st = (1.0 - u * u).sqrt();
        for jp in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * jp as f64 / n_phi as f64;
            let dir = [st * phi.cos(), st * phi.sin(), *u];
            directions.push((dir, wu * 2.0 * std::f64::consts::PI / n_phi as f64));
        }
    }

    let mut modes = Vec::with_capacity((boundaries.len() - 1) * directions.len() * 2);
    let mut ir = f64::INFINITY;
    let mut uv = 0.0f64;
    for panel in boundaries.windows(2) {
        let (a, b) = (panel[0], panel[1]);
        let r = (a * b).sqrt();
        let shell_volume = (b * b * b - a * a * a) / 3.0;
        ir = ir.min(r);
        uv = uv.max(r);
        for (dir, w_ang) in &directions {
            let k = [r * dir[0], r * dir[1], r * dir[2]];
            let weight = shell_volume * w_ang;
            for lambda in Polarization::BOTH {
                modes.push(Mode { k, lambda, weight });
            }
        }
    }
    if modes.is_empty() {
        return Err(Error::Domain {
            name: "grid",
            value: 0.0,
            constraint: "grid construction produced no modes",
        });
    }
    Ok(ModeGrid {
        modes,
        ir_floor: ir,
        uv_ceiling: uv,
        n_radial: boundaries.len() - 1,
        n_angular: directions.len(),
        rho_floor,
    })
}
