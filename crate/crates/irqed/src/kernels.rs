//! Closed-form infrared kernels: the cutoff profile, the transverse
//! polarization frame, the soft-photon cloud amplitude `v(k, lambda)` and every
//! scalar integral derived from it.
//!
//! The cloud amplitude for a dressed electron moving with group velocity
//! `gradE` (|gradE| < 1) is
//!
//! ```text
//! v(k, lambda) = -sqrt(alpha) * (eps_lambda(k) . gradE) * kappa_sigma(|k|)
//!                / ( |k|^(1/2) * (|k| - k . gradE) )
//! ```
//!
//! Its `L^2` norm over `|k| >= rho` factorizes into a radial log integral
//! times an angular constant,
//! `||v||^2 = alpha * R(sigma, rho) * A(|gradE|)`, which is the single
//! identity behind the photon-number log divergence, the equivalence
//! dichotomy and the overlap decay rates computed elsewhere in the crate.
//! All quadrature here is deterministic and carries explicit tolerances.

use crate::quad::{self, QuadResult};
use crate::vec3::{self, V3};
use crate::{Error, Result};

/// Default cap on the coupling; callers may widen it explicitly but the
/// perturbative regime this laboratory is built for ends well before 1.
pub const DEFAULT_ALPHA_CAP: f64 = 1e-2;

/// Tolerances used by the radial quadratures unless a caller overrides them.
pub const RADIAL_TOL: f64 = 1e-12;

// ---------------------------------------------------------------- cutoff ----

/// Infrared cutoff profile. `Regularized(sigma)` ramps linearly on
/// `[0, sigma]`, is one on `[sigma, 1/2]`, and decays through a fixed
/// `C^infinity` bump on `(1/2, 1)`. `InfraredLimit` is the pointwise
/// `sigma -> 0` limit (no ramp).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Regularized(f64),
    InfraredLimit,
}

impl Cutoff {
    /// A regularized cutoff; `sigma` must lie in `(0, 1/2]`.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 0.5) {
            return Err(Error::Domain {
                name: "sigma",
                value: sigma,
                constraint: "0 < sigma <= 1/2",
            });
        }
        Ok(Cutoff::Regularized(sigma))
    }

    /// The infrared scale, `0.0` for the limit profile.
    pub fn sigma(&self) -> f64 {
        match *self {
            Cutoff::Regularized(s) => s,
            Cutoff::InfraredLimit => 0.0,
        }
    }
}

/// `exp(-1/y)` for `y > 0`, zero otherwise: the building block of the
/// smooth outer bump.
fn s_bridge(y: f64) -> f64 {
    if y > 0.0 {
        (-1.0 / y).exp()
    } else {
        0.0
    }
}

/// The fixed outer bump on `(1/2, 1)`: one at `1/2+`, zero at `1-`,
/// `C^infinity` across both junctions.
fn outer_bump(x: f64) -> f64 {
    let a = s_bridge(1.0 - x);
    let b = s_bridge(x - 0.5);
    a / (a + b)
}

fn outer_bump_derivative(x: f64) -> f64 {
    let a = s_bridge(1.0 - x);
    let b = s_bridge(x - 0.5);
    // s'(y) = exp(-1/y)/y^2
    let da = if 1.0 - x > 0.0 { a / ((1.0 - x) * (1.0 - x)) } else { 0.0 };
    let db = if x - 0.5 > 0.0 { b / ((x - 0.5) * (x - 0.5)) } else { 0.0 };
    let denom = a + b;
    (-da * denom - a * (-da + db)) / (denom * denom)
}

/// The cutoff profile `kappa_sigma(x)` for `x >= 0`.
pub fn cutoff(c: Cutoff, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    let sigma = c.sigma();
    if x <= 0.0 {
        return 0.0;
    }
    if x < sigma {
        return x / sigma;
    }
    if x <= 0.5 {
        return 1.0;
    }
    if x < 1.0 {
        return outer_bump(x);
    }
    0.0
}

/// `d kappa_sigma / dx`. At the (measure-zero) junction points the
/// right-hand derivative is returned; every integral in this crate anchors
/// those points on panel boundaries so the choice never matters.
pub fn cutoff_derivative(c: Cutoff, x: f64) -> f64 {
    let sigma = c.sigma();
    if x <= 0.0 {
        return 0.0;
    }
    if x < sigma {
        return 1.0 / sigma;
    }
    if x < 0.5 {
        return 0.0;
    }
    if x < 1.0 {
        return outer_bump_derivative(x);
    }
    0.0
}

// ---------------------------------------------------------- polarization ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Polarization {
    Plus,
    Minus,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Plus, Polarization::Minus];
}

/// Deterministic real transverse frame:
/// `eps_plus = (k x ref)/|k x ref|`, `eps_minus = khat x eps_plus`, with the
/// fallback axis replacing `ref` when `|k x ref| < 1e-12 |k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationConvention {
    pub reference_axis: V3,
    pub fallback_axis: V3,
}

impl Default for PolarizationConvention {
    fn default() -> Self {
        PolarizationConvention {
            reference_axis: [0.0, 0.0, 1.0],
            fallback_axis: [1.0, 0.0, 0.0],
        }
    }
}

/// Both polarization vectors at `k != 0`, `[eps_plus, eps_minus]`.
pub fn polarization_pair(k: V3, conv: &PolarizationConvention) -> Result<[V3; 2]> {
    let kn = vec3::norm(k);
    if kn == 0.0 {
        return Err(Error::Domain {
            name: "|k|",
            value: 0.0,
            constraint: "polarization frame needs |k| > 0",
        });
    }
    let mut c = vec3::cross(k, conv.reference_axis);
    if vec3::norm(c) < 1e-12 * kn {
        c = vec3::cross(k, conv.fallback_axis);
    }
    let eps_plus = vec3::unit(c);
    let eps_minus = vec3::cross(vec3::scale(k, 1.0 / kn), eps_plus);
    Ok([eps_plus, eps_minus])
}

pub fn polarization_vector(k: V3, lambda: Polarization, conv: &PolarizationConvention) -> Result<V3> {
    let pair = polarization_pair(k, conv)?;
    Ok(match lambda {
        Polarization::Plus => pair[0],
        Polarization::Minus => pair[1],
    })
}

// --------------------------------------------------------------- params ----

/// Everything a cloud-kernel evaluation needs: fiber momentum (metadata for
/// records), coupling, group velocity and the infrared cutoff.
#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    pub p: V3,
    pub alpha: f64,
    pub grad_e: V3,
    pub cutoff: Cutoff,
    pub convention: PolarizationConvention,
}

impl KernelParams {
    /// Validated constructor: `0 <= alpha <= cap`, `|p| < 1/3`, `|grad_e| < 1`.
    pub fn new(p: V3, alpha: f64, grad_e: V3, cutoff: Cutoff) -> Result<Self> {
        Self::with_alpha_cap(p, alpha, grad_e, cutoff, DEFAULT_ALPHA_CAP)
    }

    pub fn with_alpha_cap(p: V3, alpha: f64, grad_e: V3, cutoff: Cutoff, cap: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha <= cap) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                constraint: "0 <= alpha <= configured cap",
            });
        }
        if !(vec3::norm(p) < 1.0 / 3.0) {
            return Err(Error::Domain {
                name: "|p|",
                value: vec3::norm(p),
                constraint: "|p| < 1/3",
            });
        }
        if !(vec3::norm(grad_e) < 1.0) {
            return Err(Error::Domain {
                name: "|grad_e|",
                value: vec3::norm(grad_e),
                constraint: "|grad_e| < 1",
            });
        }
        Ok(KernelParams {
            p,
            alpha,
            grad_e,
            cutoff,
            convention: PolarizationConvention::default(),
        })
    }
}

// --------------------------------------------------------------- kernel ----

/// Scalar radial/angular profile `g(k) = kappa(|k|) / (|k|^(1/2) (|k| - k.gradE))`
/// shared by the per-polarization kernel and the transverse vector amplitude.
fn profile(params: &KernelParams, k: V3) -> Result<f64> {
    let r = vec3::norm(k);
    if r == 0.0 {
        return Err(Error::Domain {
            name: "|k|",
            value: 0.0,
            constraint: "kernel evaluation needs |k| > 0",
        });
    }
    let d = r - vec3::dot(k, params.grad_e);
    debug_assert!(d > 0.0, "|grad_e| < 1 keeps the denominator positive");
    Ok(cutoff(params.cutoff, r) / (r.sqrt() * d))
}

/// The soft-photon cloud kernel `v(k, lambda)`; real in this frame convention.
///
/// Sign note: this is the representation-theoretic kernel. The dressed ground
/// state of the truncated model carries the opposite per-mode sign; modulus
/// level quantities (norms, overlaps, verdicts) are unaffected, and the
/// state-facing comparison in `hamiltonian::phi_decomposition` negates
/// accordingly.
pub fn coherent_kernel(params: &KernelParams, k: V3, lambda: Polarization) -> Result<f64> {
    let eps = polarization_vector(k, lambda, &params.convention)?;
    Ok(-params.alpha.sqrt() * vec3::dot(eps, params.grad_e) * profile(params, k)?)
}

/// Transverse vector amplitude `w(k) = sum_lambda eps_lambda v(k, lambda)
/// = -sqrt(alpha) g(k) (gradE - khat (khat.gradE))`.
/// Satisfies `|w|^2 = sum_lambda v^2` and is smooth away from `k = 0`,
/// unlike the per-polarization components whose frame has polar strings.
pub fn kernel_vector(params: &KernelParams, k: V3) -> Result<V3> {
    let g = profile(params, k)?;
    let khat = vec3::unit(k);
    let t = vec3::sub(params.grad_e, vec3::scale(khat, vec3::dot(khat, params.grad_e)));
    Ok(vec3::scale(t, -params.alpha.sqrt() * g))
}

/// `w(k)` together with its closed-form Jacobian `J[m][n] = d w_m / d k_n`.
/// Used by the compact-resolvent expectation; a finite-difference spot check
/// lives in the tests.
pub fn kernel_vector_jacobian(params: &KernelParams, k: V3) -> Result<(V3, [[f64; 3]; 3])> {
    let r = vec3::norm(k);
    if r == 0.0 {
        return Err(Error::Domain {
            name: "|k|",
            value: 0.0,
            constraint: "kernel evaluation needs |k| > 0",
        });
    }
    let khat = vec3::scale(k, 1.0 / r);
    let v = params.grad_e;
    let kv = vec3::dot(khat, v);
    let d = r * (1.0 - kv);
    let kap = cutoff(params.cutoff, r);
    let dkap = cutoff_derivative(params.cutoff, r);
    let g = kap / (r.sqrt() * d);
    let sa = params.alpha.sqrt();

    // grad g = [kappa'/(sqrt r d) - kappa/(2 r^(3/2) d)] khat
    //          - kappa (khat - gradE) / (sqrt r d^2)
    let radial = dkap / (r.sqrt() * d) - kap / (2.0 * r * r.sqrt() * d);
    let mut grad_g = [0.0; 3];
    for n in 0..3 {
        grad_g[n] = radial * khat[n] - kap * (khat[n] - v[n]) / (r.sqrt() * d * d);
    }

    let t = vec3::sub(v, vec3::scale(khat, kv));
    let mut w = [0.0; 3];
    let mut jac = [[0.0; 3]; 3];
    for m in 0..3 {
        w[m] = -sa * g * t[m];
        for n in 0..3 {
            let delta = if m == n { 1.0 } else { 0.0 };
            // d t_m / d k_n = -[(delta_mn - khat_m khat_n) kv
            //                  + khat_m (v_n - khat_n kv)] / r
            let dt = -((delta - khat[m] * khat[n]) * kv + khat[m] * (v[n] - khat[n] * kv)) / r;
            jac[m][n] = -sa * (grad_g[n] * t[m] + g * dt);
        }
    }
    Ok((w, jac))
}

// ------------------------------------------------------ angular constant ----

/// Angular factor `A(v) = 2 pi v^2 \int_{-1}^{1} (1-u^2)/(1-vu)^2 du` for
/// `v = |gradE| in [0, 1)`. Monotone increasing, `A(0) = 0`, log-divergent as
/// `v -> 1`. Evaluated by a power series for small `v` (the closed form
/// cancels catastrophically there) and in closed form otherwise.
pub fn angular_constant(v: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::Domain {
            name: "|grad_e|",
            value: v,
            constraint: "0 <= |grad_e| < 1",
        });
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let eight_pi = 8.0 * std::f64::consts::PI;
    if v < 0.5 {
        // A(v) = 8 pi sum_{n>=1} v^(2n) / (2n+1)
        let v2 = v * v;
        let mut term = v2;
        let mut n = 1usize;
        let mut acc = 0.0;
        loop {
            let contrib = term / (2 * n + 1) as f64;
            acc += contrib;
            if contrib < 1e-18 * acc {
                break;
            }
            term *= v2;
            n += 1;
        }
        Ok(eight_pi * acc)
    } else {
        Ok(4.0 * std::f64::consts::PI / v * (((1.0 + v) / (1.0 - v)).ln() - 2.0 * v))
    }
}

/// Cross-velocity angular factor
/// `B(v1, v2) = \int dOmega [v1.v2 - (khat.v1)(khat.v2)]
///              / ((1 - khat.v1)(1 - khat.v2))`,
/// with `B(v, v) = A(|v|)`. Evaluated on a fixed product quadrature
/// (Gauss-Legendre in cos(theta) x uniform azimuth); for `|v| <= 1/3` the
/// integrand is analytic and the rule converges spectrally.
pub fn cross_angular_constant(v1: V3, v2: V3) -> Result<f64> {
    for (name, v) in [("|v1|", v1), ("|v2|", v2)] {
        if !(vec3::norm(v) < 1.0) {
            return Err(Error::Domain {
                name,
                value: vec3::norm(v),
                constraint: "velocities must satisfy |v| < 1",
            });
        }
    }
    let n_u = 48;
    let n_phi = 96;
    let (nodes, weights) = quad::gauss_legendre(n_u);
    let v12 = vec3::dot(v1, v2);
    let mut total = 0.0;
    for (u, wu) in nodes.iter().zip(weights.iter()) {
        let st = (1.0 - u * u).sqrt();
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let khat = [st * phi.cos(), st * phi.sin(), *u];
            let k1 = vec3::dot(khat, v1);
            let k2 = vec3::dot(khat, v2);
            total += wu * (v12 - k1 * k2) / ((1.0 - k1) * (1.0 - k2));
        }
    }
    Ok(total * 2.0 * std::f64::consts::PI / n_phi as f64)
}

// ------------------------------------------------------- radial integrals ----

/// Breakpoints for radial quadrature: the integration edge, the cutoff
/// corners `sigma`, `1/2`, `1`, with logarithmic refinement of the plateau.
fn radial_breaks(lo: f64, sigma: f64) -> Vec<f64> {
    let mut breaks = vec![lo];
    let push = |x: f64, breaks: &mut Vec<f64>| {
        if x > *breaks.last().unwrap() && x < 1.0 {
            breaks.push(x);
        }
    };
    if sigma > 0.0 {
        push(sigma, &mut breaks);
    }
    // log-spaced interior points up to 1/2 keep the 1/r weight well resolved
    let plateau_lo = breaks.last().unwrap().max(lo);
    if plateau_lo > 0.0 && plateau_lo < 0.5 {
        for x in quad::log_panels(plateau_lo, 0.5, 2).into_iter().skip(1) {
            push(x, &mut breaks);
        }
    } else {
        push(0.5, &mut breaks);
    }
    breaks.push(1.0);
    breaks.dedup_by(|a, b| (*a - *b).abs() < f64::EPSILON);
    breaks
}

/// `R(sigma, rho) = \int_max(rho,0)^infinity kappa_sigma(r)^2 / r dr`.
///
/// Finite for every `sigma > 0` even at `rho = 0` (the ramp tames the `1/r`
/// weight); for the `sigma -> 0` limit profile it diverges at `rho = 0`
/// (for non-zero velocity that is the inequivalence mechanism) and that case
/// is reported as [`Error::Divergent`].
pub fn radial_log_integral(c: Cutoff, rho: f64, tol: f64) -> Result<f64> {
    let sigma = c.sigma();
    let lo = rho.max(0.0);
    if lo >= 1.0 {
        return Ok(0.0);
    }
    if sigma == 0.0 && lo == 0.0 {
        return Err(Error::Divergent {
            what: "int kappa^2/r dr with sigma -> 0 and rho = 0".into(),
        });
    }
    let breaks = radial_breaks(lo, sigma);
    let q = quad::adaptive(|r| {
        let kap = cutoff(c, r);
        if r > 0.0 {
            kap * kap / r
        } else {
            0.0
        }
    }, &breaks, tol, tol)?;
    Ok(q.value)
}

/// `\int_0^infinity (kappa_sigma - kappa_sigma')^2 / r dr` for two
/// regularized cutoffs; closed form `ln(sig_hi/sig_lo) + sig_lo/sig_hi - 1`
/// (the profiles only differ on the ramps). Symmetric in its arguments.
pub fn radial_pair_integral(sigma_a: f64, sigma_b: f64) -> Result<f64> {
    for s in [sigma_a, sigma_b] {
        Cutoff::new(s)?;
    }
    let (hi, lo) = if sigma_a >= sigma_b {
        (sigma_a, sigma_b)
    } else {
        (sigma_b, sigma_a)
    };
    Ok((hi / lo).ln() + lo / hi - 1.0)
}

/// Full `L^2` norm reduction:
/// `||v_{p,sigma}||^2 over |k| >= rho = alpha * R(sigma, rho) * A(|gradE|)`.
pub fn kernel_l2_norm_sq(params: &KernelParams, rho: f64, tol: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            constraint: "rho >= 0",
        });
    }
    let v = vec3::norm(params.grad_e);
    if params.alpha == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    let radial = radial_log_integral(params.cutoff, rho, tol)?;
    Ok(params.alpha * radial * angular_constant(v)?)
}

/// Cross inner product of two equal-cutoff kernels with velocities
/// `grad_e_a`, `grad_e_b`:
/// `<v_a, v_b> = alpha * R(sigma, rho) * B(grad_e_a, grad_e_b)`.
pub fn kernel_l2_cross(
    a: &KernelParams,
    b: &KernelParams,
    rho: f64,
    tol: f64,
) -> Result<f64> {
    debug_assert!(a.cutoff == b.cutoff && a.alpha == b.alpha);
    if a.alpha == 0.0 {
        return Ok(0.0);
    }
    let radial = radial_log_integral(a.cutoff, rho, tol)?;
    Ok(a.alpha * radial * cross_angular_constant(a.grad_e, b.grad_e)?)
}

/// Vacuum expectation of the squared field,
/// `<Omega, A^2 Omega> = 8 pi \int_0^infinity r kappa_sigma(r)^2 dr`.
/// Finite and decreasing in `sigma`, bounded by `8 pi * 1/2`.
pub fn vacuum_field_energy(c: Cutoff, tol: f64) -> Result<f64> {
    let sigma = c.sigma();
    let mut breaks = vec![0.0];
    for x in [sigma, 0.5, 1.0] {
        if x > *breaks.last().unwrap() {
            breaks.push(x);
        }
    }
    let q: QuadResult = quad::adaptive(|r| {
        let kap = cutoff(c, r);
        r * kap * kap
    }, &breaks, tol, tol)?;
    Ok(8.0 * std::f64::consts::PI * q.value)
}
