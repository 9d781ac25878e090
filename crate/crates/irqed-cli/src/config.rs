//! Run configuration: a single TOML file with flat `key = value` sections.
//!
//! Runs carry on the order of twenty parameters, so everything lives in the
//! config file and the command line holds only the subcommand and the config
//! path. The schema is strict: unknown keys anywhere are rejected (typos
//! must fail loudly, not silently fall back to defaults), and every
//! validation message names the offending key. Keys that have safe defaults
//! may be omitted; the defaults are documented on the accessors below and in
//! the repository README.
//!
//! ```toml
//! command = "spectrum"            # optional guard, must match the subcommand
//!
//! [physics]
//! p = [0.0, 0.0, 0.2]
//! alpha = 1e-3
//! sigma = 1e-2                    # single cutoff
//! sigma_list = [1e-1, 1e-2]       # cutoff sequence (scans); wins over sigma
//! u = [0.0, 0.0, 1.0]             # spin direction for the doublet member
//! grad_e = [0.0, 0.0, 0.19]       # dispersion slope for kernel-level runs
//! rho = 0.0                       # infrared edge for kernel norms
//!
//! [grid]
//! n_radial = 3
//! n_angular = 1
//! n_max = 2                       # per-mode occupation cap
//! n_cap = 2                       # total occupation cap
//! per_decade = 2                  # radial nodes per decade (scan layout)
//! ir_floor_factor = 0.25          # grid floor at factor * sigma
//! dim_cap = 100000
//!
//! [solver]
//! tolerance = 1e-10
//! max_iter = 400
//! fd_step = 1e-3                  # finite-difference step for derivatives
//!
//! [scattering]
//! t_list = [16.0, 256.0, 4096.0]
//! epsilon = 0.25
//! beta = 2.0
//! bump_center = [0.0, 0.0, 0.15]
//! bump_radius = 0.1
//! velocity = "free"               # or "scaled" with velocity_factor
//! velocity_factor = 0.98
//!
//! [output]
//! path = "artifact.csv"
//! ```

use crate::errors::{CliError, CliResult};
use irqed::spectral::GridPolicy;
use irqed::vec3::V3;
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional guard: when present it must name the subcommand being run,
    /// which protects batch scripts from pointing a config at the wrong
    /// pipeline.
    pub command: Option<String>,
    pub physics: Option<Physics>,
    pub grid: Option<Grid>,
    pub solver: Option<Solver>,
    pub scattering: Option<Scattering>,
    pub output: Output,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub p: Option<[f64; 3]>,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma_list: Option<Vec<f64>>,
    pub u: Option<[f64; 3]>,
    pub grad_e: Option<[f64; 3]>,
    pub rho: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n_radial: Option<usize>,
    pub n_angular: Option<usize>,
    pub n_max: Option<u8>,
    pub n_cap: Option<u8>,
    pub per_decade: Option<usize>,
    pub ir_floor_factor: Option<f64>,
    pub dim_cap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    pub tolerance: Option<f64>,
    pub max_iter: Option<usize>,
    pub fd_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scattering {
    pub t_list: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    pub bump_center: Option<[f64; 3]>,
    pub bump_radius: Option<f64>,
    pub velocity: Option<String>,
    pub velocity_factor: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: PathBuf,
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

impl RunConfig {
    pub fn check_command(&self, subcommand: &str) -> CliResult<()> {
        match &self.command {
            Some(c) if c != subcommand => Err(CliError::Config(format!(
                "key `command` = \"{c}\" does not match subcommand `{subcommand}`"
            ))),
            _ => Ok(()),
        }
    }

    pub fn physics(&self) -> CliResult<&Physics> {
        self.physics.as_ref().ok_or_else(|| missing("[physics]"))
    }

    pub fn scattering(&self) -> CliResult<&Scattering> {
        self.scattering
            .as_ref()
            .ok_or_else(|| missing("[scattering]"))
    }

    /// Eigensolver options; `tolerance` defaults to `1e-10`, `max_iter`
    /// to `400`.
    pub fn eig_options(&self) -> irqed::solver::EigOptions {
        let s = self.solver.as_ref();
        irqed::solver::EigOptions {
            tol: s.and_then(|s| s.tolerance).unwrap_or(1e-10),
            max_iter: s.and_then(|s| s.max_iter).unwrap_or(400),
            ..Default::default()
        }
    }

    /// Finite-difference step for dispersion derivatives; defaults to the
    /// library's `1e-3`.
    pub fn fd_step(&self) -> f64 {
        self.solver
            .as_ref()
            .and_then(|s| s.fd_step)
            .unwrap_or(irqed::spectral::DEFAULT_FD_STEP)
    }

    /// Grid defaults: 3 radial shells, polar order 1, per-mode cap 2, total
    /// cap 2, 2 nodes per decade, floor factor 1/4, dimension cap 100000.
    pub fn grid_policy(&self) -> GridPolicy {
        let g = self.grid.as_ref();
        let d = GridPolicy::default();
        GridPolicy {
            per_decade: g.and_then(|g| g.per_decade).unwrap_or(d.per_decade),
            n_polar: g.and_then(|g| g.n_angular).unwrap_or(d.n_polar),
            n_max: g.and_then(|g| g.n_max).unwrap_or(d.n_max),
            n_cap: g.and_then(|g| g.n_cap).unwrap_or(d.n_cap),
            dim_cap: g.and_then(|g| g.dim_cap).unwrap_or(d.dim_cap),
            ir_floor_factor: g
                .and_then(|g| g.ir_floor_factor)
                .unwrap_or(d.ir_floor_factor),
        }
    }

    pub fn n_radial(&self) -> usize {
        self.grid.as_ref().and_then(|g| g.n_radial).unwrap_or(3)
    }

    pub fn n_angular(&self) -> usize {
        self.grid.as_ref().and_then(|g| g.n_angular).unwrap_or(1)
    }

    pub fn n_max(&self) -> u8 {
        self.grid.as_ref().and_then(|g| g.n_max).unwrap_or(2)
    }

    pub fn n_cap(&self) -> u8 {
        self.grid.as_ref().and_then(|g| g.n_cap).unwrap_or(2)
    }

    pub fn dim_cap(&self) -> usize {
        self.grid.as_ref().and_then(|g| g.dim_cap).unwrap_or(100_000)
    }

    pub fn ir_floor_factor(&self) -> f64 {
        self.grid
            .as_ref()
            .and_then(|g| g.ir_floor_factor)
            .unwrap_or(0.25)
    }
}

impl Physics {
    pub fn p(&self) -> CliResult<V3> {
        self.p.ok_or_else(|| missing("physics.p"))
    }

    pub fn alpha(&self) -> CliResult<f64> {
        self.alpha.ok_or_else(|| missing("physics.alpha"))
    }

    pub fn sigma(&self) -> CliResult<f64> {
        self.sigma.ok_or_else(|| missing("physics.sigma"))
    }

    /// The cutoff sequence of a run: `sigma_list` when present, otherwise
    /// the single `sigma`.
    pub fn sigmas(&self) -> CliResult<Vec<f64>> {
        if let Some(list) = &self.sigma_list {
            if list.is_empty() {
                return Err(CliError::Config(
                    "key `physics.sigma_list` must not be empty".into(),
                ));
            }
            return Ok(list.clone());
        }
        Ok(vec![self.sigma()?])
    }

    /// Spin direction selecting the doublet member; defaults to `+z`.
    pub fn u(&self) -> V3 {
        self.u.unwrap_or([0.0, 0.0, 1.0])
    }

    /// Dispersion slope for kernel-level pipelines. Defaults to `p` itself
    /// (the free approximation, exact at `alpha = 0`); paste a measured
    /// gradient from a `spectrum` run for radiatively corrected kernels.
    pub fn grad_e_or_free(&self, p: V3) -> V3 {
        self.grad_e.unwrap_or(p)
    }

    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(0.0)
    }
}

impl Scattering {
    pub fn t_list(&self) -> CliResult<&[f64]> {
        match &self.t_list {
            Some(list) if !list.is_empty() => Ok(list),
            Some(_) => Err(CliError::Config(
                "key `scattering.t_list` must not be empty".into(),
            )),
            None => Err(missing("scattering.t_list")),
        }
    }

    pub fn epsilon(&self) -> CliResult<f64> {
        self.epsilon.ok_or_else(|| missing("scattering.epsilon"))
    }

    pub fn beta(&self) -> CliResult<f64> {
        self.beta.ok_or_else(|| missing("scattering.beta"))
    }

    pub fn profile(&self) -> CliResult<irqed::scattering::BumpProfile> {
        let reference = irqed::scattering::BumpProfile::reference();
        let center = self.bump_center.unwrap_or(reference.center);
        let radius = self.bump_radius.unwrap_or(reference.radius);
        irqed::scattering::BumpProfile::new(center, radius).map_err(CliError::Engine)
    }

    pub fn velocity_model(&self) -> CliResult<irqed::scattering::VelocityModel> {
        match self.velocity.as_deref() {
            None | Some("free") => Ok(irqed::scattering::VelocityModel::Free),
            Some("scaled") => {
                let factor = self.velocity_factor.ok_or_else(|| {
                    missing("scattering.velocity_factor (required with velocity = \"scaled\")")
                })?;
                Ok(irqed::scattering::VelocityModel::Scaled { factor })
            }
            Some(other) => Err(CliError::Config(format!(
                "key `scattering.velocity` = \"{other}\" is not one of \"free\", \"scaled\""
            ))),
        }
    }
}
