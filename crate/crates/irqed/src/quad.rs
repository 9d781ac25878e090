//! Adaptive one-dimensional quadrature on a list of anchored panels.
//!
//! A 15-point Gauss-Kronrod rule supplies the per-segment estimate and the
//! embedded 7-point Gauss value supplies the error estimate. Refinement is
//! greedy: the segment with the largest error estimate is bisected until the
//! summed error meets the requested absolute + relative tolerance. The caller
//! seeds the worklist with panel breakpoints so known kinks of the integrand
//! (cutoff corners, integration-domain edges) sit on segment boundaries and
//! never degrade the convergence order.

use crate::{Error, Result};

/// Positive Kronrod-15 abscissae; even indices are also Gauss-7 abscissae.
const XK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

const WK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss-7 weights for `XK[1], XK[3], XK[5], XK[7]`.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Kronrod-15 estimate plus embedded-Gauss error estimate on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kron = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XK[i];
        let fsum = f(mid - dx) + f(mid + dx);
        kron += WK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    (kron * half, (kron - gauss).abs() * half)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Conservative estimate of the remaining quadrature error.
    pub error: f64,
}

/// Hard cap on adaptive bisections; hitting it means the integrand is far
/// rougher than anything this crate produces, so it is surfaced as an error.
const MAX_SEGMENTS: usize = 20_000;

/// Integrate `f` over the union of panels defined by consecutive `breaks`.
///
/// `breaks` must be strictly increasing with at least two entries. Refinement
/// stops once the summed error estimate is below
/// `max(abs_tol, rel_tol * |integral|)`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    assert!(breaks.len() >= 2, "need at least one panel");
    for w in breaks.windows(2) {
        assert!(w[0] < w[1], "breakpoints must be strictly increasing");
    }

    struct Seg {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
    }
    let mut segs: Vec<Seg> = breaks
        .windows(2)
        .map(|w| {
            let (value, error) = gk15(&f, w[0], w[1]);
            Seg {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();

    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(QuadResult { value: total, error: err });
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                error: err,
                tolerance: target,
            });
        }
        // Bisect the worst segment (first of equals, for determinism).
        let mut worst = 0;
        for (i, s) in segs.iter().enumerate() {
            if s.error > segs[worst].error {
                worst = i;
            }
        }
        let Seg { a, b, .. } = segs[worst];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // Segment collapsed to machine width; accept its estimate as is.
            let s = &mut segs[worst];
            s.error = 0.0;
            continue;
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        segs[worst] = Seg { a, b: m, value: v1, error: e1 };
        segs.push(Seg { a: m, b, value: v2, error: e2 });
    }
}

/// Insert logarithmically spaced interior points between `a` and `b`
/// (both must be positive), returning a valid breakpoint list.
pub fn log_panels(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a);
    let decades = (b / a).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        out.push(a * (b / a).powf(t));
    }
    out[0] = a;
    *out.last_mut().unwrap() = b;
    out
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// three-term recurrence. Nodes come out ascending; exact for polynomials of
/// degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    // P_n(x) and P_n'(x) via the recurrence.
    let eval = |x: f64| -> (f64, f64) {
        let mut p0 = 1.0;
        let mut p1 = x;
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        if n == 1 {
            return (x, 1.0);
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = eval(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = eval(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Ordinary least-squares line `y = intercept + slope * x` through the given
/// points, returned as `(intercept, slope, rms_residual)`.
///
/// Fails with [`Error::InsufficientData`] when fewer than two points are
/// supplied or when the abscissae are too degenerate to determine a slope.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            what: format!("linear fit needs at least 2 points, got {}", points.len()),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let spread = points
        .iter()
        .map(|p| p.0.abs())
        .fold(1.0_f64, f64::max);
    if sxx <= 1e-24 * spread * spread {
        return Err(Error::InsufficientData {
            what: "linear fit abscissae are degenerate".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss = points
        .iter()
        .map(|&(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum::<f64>();
    Ok((intercept, slope, (ss / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = adaptive(|x| 3.0 * x * x, &[0.0, 1.0], 1e-14, 1e-14).unwrap();
        assert!((q.value - 1.0).abs() < 1e-14, "got {}", q.value);
    }

    #[test]
    fn log_integrand_on_log_panels() {
        // \int_a^1 dx / x = ln(1/a) across eight decades.
        let a = 1e-8;
        let breaks = log_panels(a, 1.0, 2);
        let q = adaptive(|x| 1.0 / x, &breaks, 1e-13, 1e-13).unwrap();
        let exact = (1.0f64 / a).ln();
        assert!(
            (q.value - exact).abs() < 1e-10 * exact,
            "got {} want {}",
            q.value,
            exact
        );
    }

    #[test]
    fn kink_on_panel_boundary() {
        // |x - 1/3| has a kink; anchoring it keeps the error estimate honest.
        let breaks = [0.0, 1.0 / 3.0, 1.0];
        let q = adaptive(|x| (x - 1.0 / 3.0).abs(), &breaks, 1e-14, 1e-14).unwrap();
        let exact = (1.0 / 3.0f64).powi(2) / 2.0 + (2.0 / 3.0f64).powi(2) / 2.0;
        assert!((q.value - exact).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity_integrable() {
        // \int_0^1 x^{-1/2} dx = 2; the greedy bisection digs into x = 0.
        let q = adaptive(|x| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, &[0.0, 1.0], 1e-9, 1e-9)
            .unwrap();
        assert!((q.value - 2.0).abs() < 1e-6, "got {}", q.value);
    }

    #[test]
    fn gauss_legendre_known_rules() {
        let (x2, w2) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((x2[0] + r).abs() < 1e-15 && (x2[1] - r).abs() < 1e-15);
        assert!((w2[0] - 1.0).abs() < 1e-15 && (w2[1] - 1.0).abs() < 1e-15);

        let (x3, w3) = gauss_legendre(3);
        assert!(x3[1].abs() < 1e-15);
        assert!((x3[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((w3[0] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn linear_fit_recovers_exact_line_and_rejects_degenerate_input() {
        let pts: Vec<(f64, f64)> = (0..7).map(|i| {
            let x = -1.0 + 0.4 * i as f64;
            (x, 2.5 - 0.75 * x)
        }).collect();
        let (a, b, rms) = linear_fit(&pts).unwrap();
        assert!((a - 2.5).abs() < 1e-13, "intercept {a}");
        assert!((b + 0.75).abs() < 1e-13, "slope {b}");
        assert!(rms < 1e-13, "rms {rms}");

        assert!(linear_fit(&[(0.0, 1.0)]).is_err(), "one point cannot fix a line");
        assert!(
            linear_fit(&[(3.0, 1.0), (3.0, 2.0)]).is_err(),
            "coincident abscissae cannot fix a slope"
        );
    }

    #[test]
    fn gauss_legendre_exact_to_degree_2n_minus_1() {
        for n in [1usize, 2, 5, 16, 48] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!(
                    (got - exact).abs() < 1e-13,
                    "n = {n}, degree {deg}: {got} vs {exact}"
                );
            }
            // nodes ascending, weights positive and summing to 2
            for pair in x.windows(2) {
                assert!(pair[0] < pair[1]);
            }
            let ws: f64 = w.iter().sum();
            assert!((ws - 2.0).abs() < 1e-13);
            assert!(w.iter().all(|&wi| wi > 0.0));
        }
    }
}
