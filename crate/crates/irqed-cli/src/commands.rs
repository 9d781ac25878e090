//! The six experiment pipelines behind the subcommands.
//!
//! Each pipeline reads its parameters from the validated config, drives the
//! corresponding library module, writes one artifact atomically and prints a
//! one-screen summary. Independent parameter points fan out over the rayon
//! pool; artifact rows always follow the input order, never completion
//! order, so outputs are reproducible under any worker count.

use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::output::{atomic_write, csv_header, csv_payload, fmt_f64, json_payload};
use irqed::fockspace::grid::{build_mode_grid, RadialLayout};
use irqed::fockspace::FockBasis;
use irqed::hamiltonian::{ground_state, pull_through_residual, FiberHamiltonian};
use irqed::kernels::{
    angular_constant, kernel_l2_norm_sq, Cutoff, KernelParams, Polarization, DEFAULT_ALPHA_CAP,
    RADIAL_TOL,
};
use irqed::quad::linear_fit;
use irqed::representation::equivalence_diagnostic;
use irqed::scattering::{decompose, overlap_matrix, CutoffSchedule};
use irqed::spectral::{gradient_and_mass, photon_number_scan, SpectralReport};
use irqed::vec3::{self, V3};
use rayon::prelude::*;
use std::sync::Arc;

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub config_sha: String,
}

/// Assemble the fiber Hamiltonian on the explicit (log-uniform) grid the
/// single-point commands use.
fn assemble_explicit(
    cfg: &RunConfig,
    p: V3,
    alpha: f64,
    sigma: f64,
) -> CliResult<FiberHamiltonian> {
    let cutoff = Cutoff::new(sigma)?;
    let grid = build_mode_grid(
        sigma,
        cfg.ir_floor_factor() * sigma,
        cfg.n_radial(),
        cfg.n_angular(),
        RadialLayout::LogUniform,
    )?;
    let basis = Arc::new(FockBasis::new(grid, cfg.n_max(), cfg.n_cap(), cfg.dim_cap())?);
    Ok(FiberHamiltonian::assemble(p, cutoff, alpha, basis)?)
}

// ------------------------------------------------------------- spectrum -----

pub fn spectrum(ctx: &Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let phys = cfg.physics()?;
    let p = phys.p()?;
    let alpha = phys.alpha()?;
    let u = phys.u();
    let sigmas = phys.sigmas()?;
    let opts = cfg.eig_options();
    let fd_step = cfg.fd_step();

    let reports: Vec<SpectralReport> = sigmas
        .par_iter()
        .map(|&sigma| {
            let h = assemble_explicit(cfg, p, alpha, sigma)?;
            Ok(gradient_and_mass(&h, u, fd_step, &opts)?)
        })
        .collect::<CliResult<_>>()?;

    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.p[0]),
                fmt_f64(r.p[1]),
                fmt_f64(r.p[2]),
                fmt_f64(r.sigma),
                fmt_f64(r.alpha),
                fmt_f64(r.energy),
                fmt_f64(r.grad_e[0]),
                fmt_f64(r.grad_e[1]),
                fmt_f64(r.grad_e[2]),
                fmt_f64(r.d2e),
                fmt_f64(r.m_ren),
                fmt_f64(r.residual),
            ]
        })
        .collect();
    let payload = csv_payload(
        csv_header("spectrum", &ctx.config_sha, &[]),
        &[
            "px", "py", "pz", "sigma", "alpha", "E", "gEx", "gEy", "gEz", "d2E", "m_ren",
            "residual",
        ],
        &rows,
    );
    atomic_write(&cfg.output.path, payload.as_bytes())?;

    println!("spectrum: p = {p:?}, alpha = {alpha}");
    for r in &reports {
        println!(
            "  sigma = {:<10} E = {:<22} d2E = {:<20} m_ren = {:<20} residual = {:.3e}",
            fmt_f64(r.sigma),
            fmt_f64(r.energy),
            fmt_f64(r.d2e),
            fmt_f64(r.m_ren),
            r.residual
        );
    }
    println!("wrote {}", cfg.output.path.display());
    Ok(())
}

// --------------------------------------------------- photon-number scan -----

pub fn photon_scan(ctx: &Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let phys = cfg.physics()?;
    let p = phys.p()?;
    let alpha = phys.alpha()?;
    let sigmas = phys.sigmas()?;
    let policy = cfg.grid_policy();
    let opts = cfg.eig_options();

    let scan = photon_number_scan(p, alpha, &sigmas, &policy, &opts)?;

    let extras = [
        ("fit intercept", fmt_f64(scan.intercept)),
        ("fit slope", fmt_f64(scan.slope)),
        ("fit rms", fmt_f64(scan.fit_rms)),
        ("rows in fit", scan.used.to_string()),
        ("predicted slope", fmt_f64(scan.predicted_slope)),
        (
            "grad_e",
            format!(
                "[{}, {}, {}]",
                fmt_f64(scan.grad_e[0]),
                fmt_f64(scan.grad_e[1]),
                fmt_f64(scan.grad_e[2])
            ),
        ),
    ];
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.sigma),
                r.dim.to_string(),
                fmt_f64(r.energy),
                fmt_f64(r.n_f),
                fmt_f64(r.residual),
                r.iterations.to_string(),
                r.converged.to_string(),
            ]
        })
        .collect();
    let payload = csv_payload(
        csv_header("photon-number-scan", &ctx.config_sha, &extras),
        &[
            "sigma",
            "dim",
            "energy",
            "n_f",
            "residual",
            "iterations",
            "converged",
        ],
        &rows,
    );
    atomic_write(&cfg.output.path, payload.as_bytes())?;

    println!(
        "photon-number-scan: p = {p:?}, alpha = {alpha}, {} cutoffs ({} in fit)",
        scan.rows.len(),
        scan.used
    );
    println!(
        "  <N_f> ~ {} + {} ln(1/sigma)   (predicted slope {})",
        fmt_f64(scan.intercept),
        fmt_f64(scan.slope),
        fmt_f64(scan.predicted_slope)
    );
    println!("wrote {}", cfg.output.path.display());

    if let Some(row) = scan.rows.iter().find(|r| !r.converged) {
        return Err(CliError::Engine(irqed::Error::NoConvergence {
            residual: row.residual,
            target: opts.tol,
            iterations: row.iterations,
        }));
    }
    Ok(())
}

// ----------------------------------------------------------- kernel norm ----

pub fn kernel_norm(ctx: &Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let phys = cfg.physics()?;
    let p = phys.p()?;
    let alpha = phys.alpha()?;
    let grad_e = phys.grad_e_or_free(p);
    let rho = phys.rho();
    let sigmas = phys.sigmas()?;

    let norms: Vec<f64> = sigmas
        .par_iter()
        .map(|&sigma| {
            // sigma = 0 requests the limit profile; divergent exactly when
            // the electron moves and no infrared edge shields the norm.
            let cutoff = if sigma == 0.0 {
                Cutoff::InfraredLimit
            } else {
                Cutoff::new(sigma)?
            };
            let params = KernelParams::with_alpha_cap(
                p,
                alpha,
                grad_e,
                cutoff,
                alpha.max(DEFAULT_ALPHA_CAP),
            )?;
            Ok(kernel_l2_norm_sq(&params, rho, RADIAL_TOL)?)
        })
        .collect::<CliResult<_>>()?;

    let speed = vec3::norm(grad_e);
    let angular = angular_constant(speed)?;
    let mut extras = vec![
        ("grad_e magnitude", fmt_f64(speed)),
        ("angular constant A", fmt_f64(angular)),
        ("predicted slope alpha*A", fmt_f64(alpha * angular)),
    ];
    let fit_points: Vec<(f64, f64)> = sigmas
        .iter()
        .zip(&norms)
        .filter(|(s, _)| **s > 0.0)
        .map(|(s, n)| ((1.0 / s).ln(), *n))
        .collect();
    if fit_points.len() >= 2 {
        if let Ok((intercept, slope, rms)) = linear_fit(&fit_points) {
            extras.push(("fit intercept", fmt_f64(intercept)));
            extras.push(("fit slope", fmt_f64(slope)));
            extras.push(("fit rms", fmt_f64(rms)));
        }
    }

    let rows: Vec<Vec<String>> = sigmas
        .iter()
        .zip(&norms)
        .map(|(s, n)| vec![fmt_f64(*s), fmt_f64(*n)])
        .collect();
    let payload = csv_payload(
        csv_header("kernel-norm", &ctx.config_sha, &extras),
        &["sigma", "norm_sq"],
        &rows,
    );
    atomic_write(&cfg.output.path, payload.as_bytes())?;

    println!(
        "kernel-norm: |grad_e| = {}, alpha = {alpha}, rho = {rho}, {} cutoffs",
        fmt_f64(speed),
        sigmas.len()
    );
    for (s, n) in sigmas.iter().zip(&norms) {
        println!("  sigma = {:<12} ||v||^2 = {}", fmt_f64(*s), fmt_f64(*n));
    }
    println!("wrote {}", cfg.output.path.display());
    Ok(())
}

// ----------------------------------------------------------- equivalence ----

pub fn equivalence(ctx: &Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let phys = cfg.physics()?;
    let p = phys.p()?;
    let alpha = phys.alpha()?;
    let grad_e = phys.grad_e_or_free(p);
    let sigmas = phys.sigmas()?;

    let verdict = equivalence_diagnostic(p, alpha, grad_e, &sigmas)?;
    let payload = json_payload("equivalence", &ctx.config_sha, &verdict)?;
    atomic_write(&cfg.output.path, payload.as_bytes())?;

    println!(
        "equivalence: p = {p:?}, alpha = {alpha}, {} cutoffs over {} decades",
        sigmas.len(),
        fmt_f64(
            (sigmas.iter().cloned().fold(0.0, f64::max)
                / sigmas.iter().cloned().fold(f64::INFINITY, f64::min))
            .log10()
        )
    );
    println!(
        "  fitted slope = {} (threshold {}), verdict: {:?}",
        fmt_f64(verdict.slope),
        fmt_f64(verdict.threshold),
        verdict.verdict
    );
    println!("wrote {}", cfg.output.path.display());
    Ok(())
}

// ----------------------------------------------------- pull-through check ---

pub fn pull_through_check(ctx: &Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let phys = cfg.physics()?;
    let p = phys.p()?;
    let alpha = phys.alpha()?;
    let sigma = phys.sigma()?;
    let u = phys.u();
    let opts = cfg.eig_options();

    let h = assemble_explicit(cfg, p, alpha, sigma)?;
    let gs = ground_state(&h, u, &opts)?;
    let n_modes = h.basis().grid.modes.len();
    let reports: Vec<_> = (0..n_modes)
        .into_par_iter()
        .map(|j| pull_through_residual(&h, &gs, j))
        .collect();

    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mode = h.basis().grid.modes[r.mode];
            let lambda = match mode.lambda {
                Polarization::Plus => "plus",
                Polarization::Minus => "minus",
            };
            vec![
                r.mode.to_string(),
                fmt_f64(mode.k[0]),
                fmt_f64(mode.k[1]),
                fmt_f64(mode.k[2]),
                lambda.to_string(),
                fmt_f64(r.residual),
                fmt_f64(r.edge_mass),
            ]
        })
        .collect();
    let extras = [
        ("ground energy", fmt_f64(gs.energy)),
        ("ground residual", fmt_f64(gs.residual)),
        ("basis dimension", h.basis().dim().to_string()),
    ];
    let payload = csv_payload(
        csv_header("pull-through-check", &ctx.config_sha, &extras),
        &["mode", "kx", "ky", "kz", "lambda", "residual", "edge_mass"],
        &rows,
    );
    atomic_write(&cfg.output.path, payload.as_bytes())?;

    let worst = reports
        .iter()
        .map(|r| r.residual)
        .fold(0.0f64, f64::max);
    let edge = reports.first().map(|r| r.edge_mass).unwrap_or(0.0);
    println!(
        "pull-through-check: p = {p:?}, alpha = {alpha}, sigma = {sigma}, {n_modes} modes"
    );
    println!(
        "  max residual = {:.6e}, occupation-cap edge mass = {:.6e}",
        worst, edge
    );
    println!("wrote {}", cfg.output.path.display());
    Ok(())
}

// ------------------------------------------------------- scattering cells ---

pub fn scattering_cells(ctx: &Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let alpha = cfg.physics()?.alpha()?;
    let scat = cfg.scattering()?;
    let t_list = scat.t_list()?;
    let epsilon = scat.epsilon()?;
    let schedule = CutoffSchedule::new(scat.beta()?)?;
    let profile = scat.profile()?;
    let model = scat.velocity_model()?;

    struct Row {
        t: f64,
        level: u32,
        n_full: u128,
        sigma_t: f64,
        c: f64,
        statistic: f64,
        occupied: usize,
    }
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let d = decompose(t, epsilon, &profile, model)?;
        let sigma_t = schedule.sigma_at(t)?;
        let report = overlap_matrix(&d, alpha, sigma_t)?;
        rows.push(Row {
            t,
            level: d.level,
            n_full: d.n_cells_full,
            sigma_t,
            c: report.c_max,
            statistic: report.statistic,
            occupied: report.occupied.len(),
        });
    }

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.t),
                r.level.to_string(),
                r.n_full.to_string(),
                fmt_f64(r.sigma_t),
                fmt_f64(r.c),
                fmt_f64(r.statistic),
            ]
        })
        .collect();
    let extras = [
        ("epsilon", fmt_f64(epsilon)),
        ("beta", fmt_f64(schedule.beta())),
        ("alpha", fmt_f64(alpha)),
    ];
    let payload = csv_payload(
        csv_header("scattering-cells", &ctx.config_sha, &extras),
        &["t", "n", "N", "sigma_t", "c", "cN2"],
        &csv_rows,
    );
    atomic_write(&cfg.output.path, payload.as_bytes())?;

    println!(
        "scattering-cells: epsilon = {epsilon}, beta = {}, alpha = {alpha}",
        schedule.beta()
    );
    for r in &rows {
        println!(
            "  t = {:<14} level {} ({} cells, {} occupied)  sigma_t = {:<12} c = {:<22} cN^2 = {}",
            fmt_f64(r.t),
            r.level,
            r.n_full,
            r.occupied,
            fmt_f64(r.sigma_t),
            fmt_f64(r.c),
            fmt_f64(r.statistic)
        );
    }
    println!("wrote {}", cfg.output.path.display());
    Ok(())
}
