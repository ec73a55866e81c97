//! Semi-infinite oscillatory integrals int_a^inf f(x) trig(w x) dx for a
//! nonnegative-ish, slowly varying envelope f. The integrand is integrated
//! over consecutive half-periods aligned to the trig zeros, giving an
//! alternating series of panel values; the partial sums are then collapsed
//! by iterated averaging, which converges long before the envelope has
//! decayed. This is what makes tail-form characteristic exponents feasible
//! at large frequencies: at w ~ 1e9 the envelope spans billions of arches,
//! of which only a few dozen are ever evaluated.

use crate::error::{Error, Result};
use crate::quad::{integrate, Quad, QuadTol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    Sin,
    Cos,
}

/// Half-period batches collected before each acceleration attempt.
const BATCH: usize = 48;
/// Hard cap on collected half-periods.
const MAX_PANELS: usize = 1536;
/// Partial sums fed to the averaging collapse.
const WINDOW: usize = 48;

/// Iterated averaging of a partial-sum sequence: each sweep replaces the
/// sequence by adjacent means and drops the last element; the sole survivor
/// is the accelerated limit. Binomial weights bury the early (possibly
/// irregular) entries exponentially, so kinks in the envelope's first few
/// arches do not poison the extrapolation.
fn collapse(sums: &[f64]) -> f64 {
    let mut t = sums.to_vec();
    while t.len() > 1 {
        for i in 0..t.len() - 1 {
            t[i] = 0.5 * (t[i] + t[i + 1]);
        }
        t.pop();
    }
    t[0]
}

/// int_a^inf f(x) sin(w x) dx or int_a^inf f(x) cos(w x) dx.
///
/// The caller is responsible for the integrand being finite on [a, inf);
/// a singular head (power envelope at 0) must be split off beforehand and
/// `a` placed at a trig zero or any point past the singularity. Envelopes
/// with compact support terminate early once the panels die out.
pub fn trig_tail_integral(
    f: &dyn Fn(f64) -> f64,
    kind: TrigKind,
    w: f64,
    a: f64,
    tol: QuadTol,
) -> Result<Quad> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::DomainError(format!("oscillation frequency must be > 0, got {w}")));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::DomainError(format!("lower endpoint must be finite and >= 0, got {a}")));
    }
    let half = std::f64::consts::PI / w;
    // First trig zero strictly past a: sin vanishes at k*half, cos at
    // (k - 1/2)*half.
    let zero = |k: usize| match kind {
        TrigKind::Sin => k as f64 * half,
        TrigKind::Cos => (k as f64 - 0.5) * half,
    };
    let mut k0 = 1usize;
    while zero(k0) <= a {
        k0 += 1;
    }
    let g = |x: f64| {
        let t = match kind {
            TrigKind::Sin => (w * x).sin(),
            TrigKind::Cos => (w * x).cos(),
        };
        f(x) * t
    };
    let panel_tol = QuadTol::new((tol.abs * 1e-2).max(1e-300), 1e-13);

    let mut evals = 0usize;
    let mut panel_err = 0.0;
    let head = if zero(k0) > a {
        let q = integrate(g, a, zero(k0), panel_tol)?;
        evals += q.evals;
        panel_err += q.err;
        q.value
    } else {
        0.0
    };

    let mut values: Vec<f64> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut running = head;
    let mut peak = 0.0f64;
    let mut dead = 0usize;
    let mut best = head;
    let mut best_err = f64::INFINITY;

    while values.len() < MAX_PANELS {
        let batch_end = (values.len() + BATCH).min(MAX_PANELS);
        while values.len() < batch_end {
            let k = k0 + values.len();
            let q = integrate(g, zero(k), zero(k + 1), panel_tol)?;
            evals += q.evals;
            panel_err += q.err;
            running += q.value;
            values.push(q.value);
            sums.push(running);
            peak = peak.max(q.value.abs());
            // A dead envelope (compact support or fast decay) means the
            // series has converged outright: the running sum is the answer,
            // and collapsing a short stabilized window would only drag the
            // early partial sums back in.
            if q.value.abs() <= (1e-3 * tol.abs).max(1e-17 * peak) {
                dead += 1;
                if dead >= 3 {
                    let err = panel_err + q.value.abs();
                    return Ok(Quad { value: running, err, evals });
                }
            } else {
                dead = 0;
            }
        }
        let m = sums.len().min(WINDOW);
        let window = &sums[sums.len() - m..];
        let est = collapse(window);
        let alt = if m > 1 { collapse(&window[..m - 1]) } else { est };
        let err = (est - alt).abs() + panel_err;
        if err < best_err {
            best = est;
            best_err = err;
        }
        let target = tol.abs.max(tol.rel * est.abs());
        if err <= target {
            return Ok(Quad { value: est, err, evals });
        }
    }
    let target = tol.abs.max(tol.rel * best.abs());
    if best_err <= target {
        return Ok(Quad { value: best, err: best_err, evals });
    }
    Err(Error::QuadratureFailure(format!(
        "oscillatory tail from {a:.3e} at frequency {w:.3e} stalled: err {best_err:.3e} \
         vs target {target:.3e} after {MAX_PANELS} half-periods"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_log_split;

    #[test]
    fn damped_exponential_matches_closed_form() {
        // int_0^inf sin(ux) e^{-x} dx = u / (1 + u^2)
        for u in [0.7, 3.0, 50.0, 1e4] {
            let q = trig_tail_integral(&|x: f64| (-x).exp(), TrigKind::Sin, u, 0.0, QuadTol::new(1e-13, 1e-12))
                .unwrap();
            let exact = u / (1.0 + u * u);
            assert!(
                (q.value - exact).abs() <= 1e-11 * exact.abs(),
                "u = {u}: {} vs {exact}",
                q.value
            );
        }
    }

    #[test]
    fn slowly_decaying_power_envelope() {
        // int_0^inf sin(ux) x^{-1/2} dx = sqrt(pi / (2u)); the envelope
        // decays so slowly that direct summation is hopeless, and the head
        // is singular, so it is split off below the first zero.
        for u in [1.0, 100.0] {
            let z1 = std::f64::consts::PI / u;
            let head = integrate_log_split(
                |x: f64| (u * x).sin() / x.sqrt(),
                z1,
                QuadTol::new(1e-13, 1e-12),
            )
            .unwrap();
            let tail = trig_tail_integral(
                &|x: f64| 1.0 / x.sqrt(),
                TrigKind::Sin,
                u,
                z1,
                QuadTol::new(1e-13, 1e-11),
            )
            .unwrap();
            let exact = (std::f64::consts::PI / (2.0 * u)).sqrt();
            let got = head.value + tail.value;
            assert!(
                (got - exact).abs() <= 1e-10 * exact,
                "u = {u}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn gaussian_cosine_transform() {
        // int_0^inf cos(ux) e^{-x^2/2} dx = sqrt(pi/2) e^{-u^2/2}
        let c = (std::f64::consts::PI / 2.0).sqrt();
        for (u, rel) in [(2.0, 1e-11), (5.0, 1e-9)] {
            let q = trig_tail_integral(
                &|x: f64| (-0.5 * x * x).exp(),
                TrigKind::Cos,
                u,
                0.0,
                QuadTol::new(1e-16, 1e-12),
            )
            .unwrap();
            let exact = c * (-0.5 * u * u).exp();
            assert!(
                (q.value - exact).abs() <= rel * exact,
                "u = {u}: {} vs {exact}",
                q.value
            );
        }
    }

    #[test]
    fn shifted_start_matches_closed_form() {
        // int_1^inf cos(ux) e^{-x} dx = Re[e^{-(1-iu)} / (1-iu)]
        let u = 5.0;
        let q = trig_tail_integral(
            &|x: f64| (-x).exp(),
            TrigKind::Cos,
            u,
            1.0,
            QuadTol::new(1e-14, 1e-12),
        )
        .unwrap();
        // Re[e^{-1}(cos u + i sin u)(1 + iu)/(1+u^2)] = e^{-1}(cos u - u sin u)/(1+u^2)
        let exact = (-1.0f64).exp() * (u.cos() - u * u.sin()) / (1.0 + u * u);
        assert!(
            (q.value - exact).abs() <= 1e-11 * exact.abs(),
            "{} vs {exact}",
            q.value
        );
    }

    #[test]
    fn compact_envelope_terminates_early() {
        // int_0^1 sin(ux)(1 - x) dx = (u - sin u)/u^2 at u = 50 pi
        let u = 50.0 * std::f64::consts::PI;
        let q = trig_tail_integral(
            &|x: f64| (1.0 - x).max(0.0),
            TrigKind::Sin,
            u,
            0.0,
            QuadTol::new(1e-14, 1e-12),
        )
        .unwrap();
        let exact = (u - u.sin()) / (u * u);
        assert!(
            (q.value - exact).abs() <= 1e-12 * exact,
            "{} vs {exact}",
            q.value
        );
        // ~50 arches cover the support; well under one acceleration batch
        // plus the dead-tail allowance.
        assert!(q.evals < 60 * 200, "evals = {}", q.evals);
    }
}
