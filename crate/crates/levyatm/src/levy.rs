//! Model core: jump densities, characteristic triplets, the exponential
//! change of measure, and the cached tail functionals everything downstream
//! (scaling, Fourier pricing, simulation) is built from.
//!
//! Conventions fixed once here: the triplet truncation is 1_{|x|<=1}, prices
//! are normalized to S0 = 1, and "share" marks the measure with density
//! e^{X_t} (exponential tilt theta = 1).

use crate::error::{Error, Result};
use crate::interp::{LogLogInterp, Pchip};
use crate::quad::{integrate, piecewise_quad, qk15, QuadTol};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

/// Triplet truncation level for the compensator: 1_{|x| <= TRUNC}.
pub const TRUNC: f64 = 1.0;

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form one-sided tails gamma_plus(x) = nu({y > x}) and
/// gamma_minus(x) = nu({y < -x}), attachable when a model family knows them.
#[derive(Clone)]
pub struct AnalyticTail {
    pub gamma_plus: DensityFn,
    pub gamma_minus: DensityFn,
}

/// A Lévy density xi >= 0 on its support, with no atom at the origin.
///
/// `breakpoints` lists interior kink locations (as coordinates on the real
/// line); all quadrature over the density aligns panels to them, to the
/// truncation level, and to the support edges.
///
/// `share_eval` optionally carries the product e^x xi(x) in closed form.
/// For densities tempered at exactly the critical rate (xi ~ e^{-x} poly),
/// e^x xi(x) stays representable long after xi itself has underflowed, and
/// the exponential-moment and compensator tails genuinely need that range.
#[derive(Clone)]
pub struct JumpDensity {
    eval: DensityFn,
    share_eval: Option<DensityFn>,
    support_lo: f64,
    support_hi: f64,
    breakpoints: Vec<f64>,
    analytic_tail: Option<AnalyticTail>,
}

impl std::fmt::Debug for JumpDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JumpDensity")
            .field("support", &(self.support_lo, self.support_hi))
            .field("breakpoints", &self.breakpoints)
            .field("analytic_tail", &self.analytic_tail.is_some())
            .field("share_eval", &self.share_eval.is_some())
            .finish()
    }
}

/// ln of the smallest positive double / largest finite one, with margin.
const LN_TINY: f64 = -745.0;
const LN_HUGE: f64 = 700.0;

impl JumpDensity {
    /// Builds a density and verifies xi >= 0 on probe points plus the Lévy
    /// integrability condition int (1 ^ x^2) xi(x) dx < inf.
    pub fn new(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_lo: f64,
        support_hi: f64,
    ) -> Result<Self> {
        Self::with_breakpoints(eval, support_lo, support_hi, &[])
    }

    pub fn with_breakpoints(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_lo: f64,
        support_hi: f64,
        breakpoints: &[f64],
    ) -> Result<Self> {
        if !(support_lo <= 0.0 && support_hi >= 0.0) || support_lo == support_hi {
            return Err(Error::InvalidDensity(format!(
                "support [{support_lo}, {support_hi}] must straddle 0 (or use JumpDensity::zero)"
            )));
        }
        let mut bp: Vec<f64> = breakpoints.to_vec();
        bp.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bp.dedup();
        let d = JumpDensity {
            eval: Arc::new(eval),
            share_eval: None,
            support_lo,
            support_hi,
            breakpoints: bp,
            analytic_tail: None,
        };
        d.check_nonnegative()?;
        d.check_levy_integrability()?;
        Ok(d)
    }

    /// The no-jumps density (empty support).
    pub fn zero() -> Self {
        JumpDensity {
            eval: Arc::new(|_| 0.0),
            share_eval: None,
            support_lo: 0.0,
            support_hi: 0.0,
            breakpoints: Vec::new(),
            analytic_tail: None,
        }
    }

    /// Attaches closed-form tails after verifying they agree with quadrature
    /// of the density at 20 log-spaced probes (relative 1e-8).
    pub fn with_analytic_tail(mut self, tail: AnalyticTail) -> Result<Self> {
        for k in 0..20 {
            // probes span [1e-4, ~5.6], crossing the truncation level
            let x = 1e-4 * 10f64.powf(k as f64 * 4.7 / 19.0);
            for (closed, numeric) in [
                ((tail.gamma_plus)(x), self.gamma_plus_quad(x)?),
                ((tail.gamma_minus)(x), self.gamma_minus_quad(x)?),
            ] {
                let scale = numeric.abs().max(1e-300);
                if (closed - numeric).abs() > 1e-8 * scale && (closed - numeric).abs() > 1e-12 {
                    return Err(Error::InvalidDensity(format!(
                        "analytic tail disagrees with quadrature at x = {x:.6e}: \
                         closed form {closed:.12e} vs numeric {numeric:.12e}"
                    )));
                }
            }
        }
        self.analytic_tail = Some(tail);
        Ok(self)
    }

    /// Attaches a closed form for e^x xi(x), verified against the direct
    /// product at log-spaced probes where both are representable. Densities
    /// tempered at exactly rate 1 should provide this: past x ~ 745 the
    /// density itself underflows while e^x xi(x) is still a perfectly good
    /// double, and the exponential-moment tails live out there.
    pub fn with_share_form(
        mut self,
        share: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        for k in 0..24 {
            // probes span |x| in [1e-4, ~20]
            let x = 1e-4 * 10f64.powf(k as f64 * 5.3 / 23.0);
            for x in [x, -x] {
                if x < self.support_lo || x > self.support_hi {
                    continue;
                }
                let direct = x.exp() * self.xi(x);
                let closed = share(x);
                if !direct.is_finite() {
                    continue;
                }
                let scale = direct.abs().max(1e-300);
                if (closed - direct).abs() > 1e-11 * scale {
                    return Err(Error::InvalidDensity(format!(
                        "share form disagrees with e^x xi(x) at x = {x:.6e}: \
                         {closed:.12e} vs {direct:.12e}"
                    )));
                }
            }
        }
        self.share_eval = Some(Arc::new(share));
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.support_lo == self.support_hi
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn analytic_tail(&self) -> Option<&AnalyticTail> {
        self.analytic_tail.as_ref()
    }

    /// Density value, clamped to 0 outside the support and at the origin.
    pub fn xi(&self, x: f64) -> f64 {
        if x == 0.0 || x < self.support_lo || x > self.support_hi || self.is_zero() {
            0.0
        } else {
            (self.eval)(x)
        }
    }

    /// Symmetrized density xi(x) + xi(-x) for x > 0.
    pub fn xi_s(&self, x: f64) -> f64 {
        self.xi(x) + self.xi(-x)
    }

    /// e^{v x} xi(x) computed without intermediate over/underflow.
    ///
    /// For v = 1 this prefers the attached share form, which stays correct
    /// past the density's own floating-point floor. Otherwise mid-range
    /// values use the direct product (exact to 1 ulp) and extreme ones are
    /// assembled in log space; once xi itself underflows the weighted value
    /// is tiny too for every v < 1, so 0 is the right answer there. A
    /// divergent product (under-tempered density at v = 1) saturates
    /// continuously at e^700, large enough that tail integration overflows
    /// into a divergence report instead of producing NaN.
    pub fn xi_exp_weighted(&self, x: f64, v: f64) -> f64 {
        if self.is_zero() || x == 0.0 || x < self.support_lo || x > self.support_hi {
            return 0.0;
        }
        if v == 0.0 {
            return self.xi(x);
        }
        if v == 1.0 {
            if let Some(se) = &self.share_eval {
                return se(x);
            }
        }
        let xv = self.xi(x);
        if xv <= 0.0 {
            return 0.0;
        }
        let e = v * x;
        if e.abs() <= 300.0 && (1e-150..=1e150).contains(&xv) {
            return e.exp() * xv;
        }
        let l = (e + xv.ln()).min(LN_HUGE);
        if l <= LN_TINY {
            0.0
        } else {
            l.exp()
        }
    }

    /// Absolute cut positions (> 0) relevant to one-sided integrals on the
    /// positive axis for the `sign` in question (+1 → right jumps,
    /// -1 → left jumps mapped through x ↦ -x), plus the truncation level.
    fn side_cuts(&self, sign: f64) -> Vec<f64> {
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .map(|&b| b * sign)
            .filter(|&c| c > 0.0)
            .collect();
        cuts.push(TRUNC);
        let edge = if sign > 0.0 { self.support_hi } else { -self.support_lo };
        if edge.is_finite() && edge > 0.0 {
            cuts.push(edge);
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        cuts
    }

    /// integral over y in (max(lo,0), hi_abs) of g(y) dy, where g is the
    /// complete integrand for one side (y > 0 is the distance from 0, so a
    /// left-side caller evaluates its density at -y); support clamping and
    /// panel alignment to the side's cuts are applied here.
    fn side_quad_raw(
        &self,
        sign: f64,
        lo: f64,
        hi_abs: f64,
        g: &dyn Fn(f64) -> f64,
        tol: QuadTol,
    ) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let edge = if sign > 0.0 { self.support_hi } else { -self.support_lo };
        let hi = hi_abs.min(edge);
        if !(hi > lo) {
            return Ok(0.0);
        }
        let cuts = self.side_cuts(sign);
        let q = piecewise_quad(g, lo, hi, &cuts, tol)?;
        Ok(q.value)
    }

    /// integral over y in (max(lo,0), hi_abs) of f(y) * xi(sign*y) dy, with
    /// hi_abs possibly infinite; support clamping is applied for the side.
    fn side_quad(
        &self,
        sign: f64,
        lo: f64,
        hi_abs: f64,
        f: &dyn Fn(f64) -> f64,
        tol: QuadTol,
    ) -> Result<f64> {
        self.side_quad_raw(sign, lo, hi_abs, &|y| f(y) * self.xi(sign * y), tol)
    }

    /// gamma_plus(x) = int_x^inf xi, straight from quadrature (no caches).
    pub fn gamma_plus_quad(&self, x: f64) -> Result<f64> {
        self.side_quad(1.0, x, f64::INFINITY, &|_| 1.0, QuadTol::new(1e-13, 1e-11))
    }

    /// gamma_minus(x) = int_{-inf}^{-x} xi, straight from quadrature.
    pub fn gamma_minus_quad(&self, x: f64) -> Result<f64> {
        self.side_quad(-1.0, x, f64::INFINITY, &|_| 1.0, QuadTol::new(1e-13, 1e-11))
    }

    fn check_nonnegative(&self) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        let probe = |x: f64| -> Result<()> {
            let v = self.xi(x);
            if v < 0.0 || v.is_nan() {
                return Err(Error::InvalidDensity(format!("xi({x:.6e}) = {v:.6e}")));
            }
            Ok(())
        };
        for k in -60..=20 {
            let x = 10f64.powf(k as f64 / 5.0);
            if x <= self.support_hi {
                probe(x)?;
            }
            if -x >= self.support_lo {
                probe(-x)?;
            }
        }
        Ok(())
    }

    fn check_levy_integrability(&self) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        let w = |y: f64| y.min(1.0) * y.min(1.0);
        let tol = QuadTol::default();
        let right = self.side_quad(1.0, 0.0, f64::INFINITY, &w, tol);
        let left = self.side_quad(-1.0, 0.0, f64::INFINITY, &w, tol);
        match (right, left) {
            (Ok(r), Ok(l)) if r.is_finite() && l.is_finite() => Ok(()),
            (Err(Error::DivergentIntegral(m)), _) | (_, Err(Error::DivergentIntegral(m))) => {
                Err(Error::InvalidDensity(format!("int (1^x^2) xi diverges: {m}")))
            }
            (Err(e), _) | (_, Err(e)) => Err(e),
            _ => Err(Error::InvalidDensity("int (1^x^2) xi is not finite".into())),
        }
    }
}

/// Which probability measure a triplet lives under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasureTag {
    Physical,
    Share,
}

/// Characteristic triplet (b, sigma, xi) with the 1_{|x|<=1} truncation.
#[derive(Clone, Debug)]
pub struct LevyModel {
    pub b: f64,
    pub sigma: f64,
    pub jumps: JumpDensity,
    pub measure_tag: MeasureTag,
    martingale_calibrated: bool,
}

impl LevyModel {
    /// Builds a physical-measure model, verifying the exponential moment
    /// int_{|y|>1} e^y xi(y) dy < inf and int_{|x|>1} |x| e^x xi(x) dx < inf.
    pub fn new(b: f64, sigma: f64, jumps: JumpDensity) -> Result<Self> {
        let m = LevyModel {
            b,
            sigma,
            jumps,
            measure_tag: MeasureTag::Physical,
            martingale_calibrated: false,
        };
        for (name, outcome) in [
            ("int_{|y|>1} e^y xi", m.exp_moment()),
            ("int_{|x|>1} |x| e^x xi", m.x_exp_moment()),
        ] {
            match outcome {
                Ok(v) if v.is_finite() => {}
                Ok(v) => return Err(Error::MomentFailure(format!("{name} = {v}"))),
                Err(Error::DivergentIntegral(msg)) => {
                    return Err(Error::MomentFailure(format!("{name} diverges: {msg}")))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(m)
    }

    /// Martingale-calibrated model: b is produced by [`martingale_drift`].
    pub fn martingale(sigma: f64, jumps: JumpDensity) -> Result<Self> {
        let b = martingale_drift(sigma, &jumps)?;
        let mut m = LevyModel::new(b, sigma, jumps)?;
        m.martingale_calibrated = true;
        Ok(m)
    }

    /// Skips the moment checks. For diagnostic work on densities that are
    /// not valid exponential-model inputs (e.g. full-support power tails
    /// used only through their tail functionals); `validate_model` will
    /// still report the failing checks.
    pub fn unchecked(b: f64, sigma: f64, jumps: JumpDensity, tag: MeasureTag) -> Self {
        LevyModel {
            b,
            sigma,
            jumps,
            measure_tag: tag,
            martingale_calibrated: false,
        }
    }

    pub fn is_martingale_calibrated(&self) -> bool {
        self.martingale_calibrated
    }

    /// int_{|y|>1} e^y xi(y) dy. Errors only on quadrature breakdown; a
    /// divergent right tail comes back as the DivergentIntegral error.
    pub fn exp_moment(&self) -> Result<f64> {
        let j = &self.jumps;
        let tol = QuadTol::default();
        let right = j.side_quad_raw(1.0, TRUNC, f64::INFINITY, &|y| j.xi_exp_weighted(y, 1.0), tol)?;
        let left =
            j.side_quad_raw(-1.0, TRUNC, f64::INFINITY, &|y| j.xi_exp_weighted(-y, 1.0), tol)?;
        Ok(right + left)
    }

    /// int_{|x|>1} |x| e^x xi(x) dx.
    pub fn x_exp_moment(&self) -> Result<f64> {
        let j = &self.jumps;
        let tol = QuadTol::default();
        let right =
            j.side_quad_raw(1.0, TRUNC, f64::INFINITY, &|y| y * j.xi_exp_weighted(y, 1.0), tol)?;
        let left =
            j.side_quad_raw(-1.0, TRUNC, f64::INFINITY, &|y| y * j.xi_exp_weighted(-y, 1.0), tol)?;
        Ok(right + left)
    }
}

/// e^z - 1 - z without cancellation for small |z|.
fn expm1m(z: Complex64) -> Complex64 {
    if z.norm() <= 1e-2 {
        // z^2/2 (1 + z/3 (1 + z/4 (1 + z/5 (1 + z/6 (1 + z/7)))))
        let inner = 1.0 + z / 7.0;
        let inner = 1.0 + z / 6.0 * inner;
        let inner = 1.0 + z / 5.0 * inner;
        let inner = 1.0 + z / 4.0 * inner;
        let inner = 1.0 + z / 3.0 * inner;
        0.5 * z * z * inner
    } else {
        z.exp() - 1.0 - z
    }
}

/// Real-argument e^y - 1 - y; exp_m1(y) - y throws away half the digits
/// once y is small, so the series takes over there.
fn expm1m_real(y: f64) -> f64 {
    if y.abs() <= 1e-2 {
        let inner = 1.0 + y / 7.0;
        let inner = 1.0 + y / 6.0 * inner;
        let inner = 1.0 + y / 5.0 * inner;
        let inner = 1.0 + y / 4.0 * inner;
        let inner = 1.0 + y / 3.0 * inner;
        0.5 * y * y * inner
    } else {
        y.exp_m1() - y
    }
}

/// Characteristic exponent psi(u) = iub - sigma^2 u^2 / 2
/// + int (e^{iux} - 1 - iux 1_{|x|<=1}) xi(x) dx, valid on the analytic
/// strip: Im(u) in [-1, 0] under the physical measure, [0, 1] under the
/// share measure.
pub fn char_exponent(model: &LevyModel, u: Complex64) -> Result<Complex64> {
    let v = u.im;
    let (lo, hi) = match model.measure_tag {
        MeasureTag::Physical => (-1.0, 0.0),
        MeasureTag::Share => (0.0, 1.0),
    };
    if v < lo - 1e-12 || v > hi + 1e-12 {
        return Err(Error::StripViolation(v));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut psi = i * u * model.b - 0.5 * model.sigma * model.sigma * u * u;
    let j = &model.jumps;
    if j.is_zero() {
        return Ok(psi);
    }
    let tol = QuadTol::new(1e-13, 1e-11);
    // e^{iux} = e^{iax} e^{w x} with a = Re(u), w = -Im(u); the outer part
    // folds the growth factor e^{wx} into the density in log space so that
    // critically tempered right tails stay representable well past the
    // density's own underflow point.
    let (a_re, w) = (u.re, -u.im);
    for sign in [1.0, -1.0] {
        let edge = if sign > 0.0 { j.support_hi } else { -j.support_lo };
        if !(edge > 0.0) {
            continue;
        }
        let cuts = j.side_cuts(sign);
        // Compensated part on (0, 1]: integrand ~ (iux)^2 xi / 2 near 0.
        let g_in = |y: f64| {
            let x = sign * y;
            expm1m(i * u * x) * j.xi(x)
        };
        let b_in = TRUNC.min(edge);
        let re = piecewise_quad(|y| g_in(y).re, 0.0, b_in, &cuts, tol)?;
        let im = piecewise_quad(|y| g_in(y).im, 0.0, b_in, &cuts, tol)?;
        psi += Complex64::new(re.value, im.value);
        if edge > TRUNC {
            // Uncompensated part: (e^{iux} - 1) xi = e^{iax} (e^{wx} xi) - xi.
            let re = piecewise_quad(
                |y| {
                    let x = sign * y;
                    (a_re * x).cos() * j.xi_exp_weighted(x, w) - j.xi(x)
                },
                TRUNC,
                edge,
                &cuts,
                tol,
            )?;
            let im = piecewise_quad(
                |y| {
                    let x = sign * y;
                    (a_re * x).sin() * j.xi_exp_weighted(x, w)
                },
                TRUNC,
                edge,
                &cuts,
                tol,
            )?;
            psi += Complex64::new(re.value, im.value);
        }
    }
    Ok(psi)
}

/// Drift making e^{X_t} a martingale:
/// b = -sigma^2/2 - int (e^y - 1 - y 1_{|y|<=1}) xi(y) dy.
pub fn martingale_drift(sigma: f64, jumps: &JumpDensity) -> Result<f64> {
    let mut comp = 0.0;
    if !jumps.is_zero() {
        let tol = QuadTol::new(1e-13, 1e-11);
        for sign in [1.0f64, -1.0] {
            let inner = jumps.side_quad(sign, 0.0, TRUNC, &|y| expm1m_real(sign * y), tol)?;
            // (e^x - 1) xi = (e^x xi) - xi, each factor representable on its own
            let outer = jumps.side_quad_raw(
                sign,
                TRUNC,
                f64::INFINITY,
                &|y| {
                    let x = sign * y;
                    jumps.xi_exp_weighted(x, 1.0) - jumps.xi(x)
                },
                tol,
            )?;
            comp += inner + outer;
        }
    }
    Ok(-0.5 * sigma * sigma - comp)
}

/// Exponential tilt by theta in [0, 1]: xi*(x) = e^{theta x} xi(x),
/// b* = b + sigma^2 theta + int_{|x|<=1} x (e^{theta x} - 1) xi(x) dx.
/// theta = 1 tags the result as the share measure.
pub fn esscher_transform(model: &LevyModel, theta: f64) -> Result<LevyModel> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::DomainError(format!("theta must lie in [0,1], got {theta}")));
    }
    if theta == 0.0 {
        return Ok(model.clone());
    }
    let j = &model.jumps;
    let tilted = if j.is_zero() {
        JumpDensity::zero()
    } else {
        // Prefer the exact share form at theta = 1; otherwise build the
        // tilt in log space, which keeps e^{theta x} xi(x) from tripping
        // over the intermediate overflow of either factor.
        let tilted_eval: DensityFn = match (&j.share_eval, theta == 1.0) {
            (Some(se), true) => se.clone(),
            _ => {
                let base = j.eval.clone();
                Arc::new(move |x: f64| {
                    let v = base(x);
                    if v <= 0.0 {
                        return 0.0;
                    }
                    let e = theta * x;
                    if e.abs() <= 300.0 && (1e-150..=1e150).contains(&v) {
                        return e.exp() * v;
                    }
                    let l = (e + v.ln()).min(LN_HUGE);
                    if l <= LN_TINY {
                        0.0
                    } else {
                        l.exp()
                    }
                })
            }
        };
        let mut t = JumpDensity {
            eval: tilted_eval,
            share_eval: None,
            support_lo: j.support_lo,
            support_hi: j.support_hi,
            breakpoints: j.breakpoints.clone(),
            analytic_tail: None,
        };
        t.check_levy_integrability()
            .map_err(|e| Error::MomentFailure(format!("tilted density not integrable: {e}")))?;
        if theta < 1.0 {
            // Tilted model stays under the physical-measure contract and
            // must keep its exponential moment.
            let probe = LevyModel {
                b: 0.0,
                sigma: 0.0,
                jumps: t.clone(),
                measure_tag: MeasureTag::Physical,
                martingale_calibrated: false,
            };
            let m = probe.exp_moment().map_err(|e| {
                Error::MomentFailure(format!("tilted exponential moment: {e}"))
            })?;
            if !m.is_finite() {
                return Err(Error::MomentFailure("tilted exponential moment infinite".into()));
            }
            t = probe.jumps;
        }
        t
    };
    let mut b_star = model.b + model.sigma * model.sigma * theta;
    if !j.is_zero() && theta > 0.0 {
        let tol = QuadTol::new(1e-13, 1e-11);
        for sign in [1.0f64, -1.0] {
            // x (e^{theta x} - 1) xi(x) on 0 < |x| <= 1; ~ theta x^2 xi near 0.
            b_star +=
                j.side_quad(sign, 0.0, TRUNC, &|y| sign * y * (theta * sign * y).exp_m1(), tol)?;
        }
    }
    Ok(LevyModel {
        b: b_star,
        sigma: model.sigma,
        jumps: tilted,
        measure_tag: if theta == 1.0 { MeasureTag::Share } else { model.measure_tag },
        martingale_calibrated: false,
    })
}

/// One integrability check inside a validation report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckItem>,
    pub all_pass: bool,
}

/// Report-only audit of the model's integrability conditions and, when the
/// model claims martingale calibration, the residual of that calibration.
pub fn validate_model(model: &LevyModel) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, outcome: Result<f64>, finite_required: bool| {
        let item = match outcome {
            Ok(v) => CheckItem {
                name: name.into(),
                value: v,
                pass: !finite_required || v.is_finite(),
                note: String::new(),
            },
            Err(e) => CheckItem {
                name: name.into(),
                value: f64::INFINITY,
                pass: false,
                note: e.to_string(),
            },
        };
        checks.push(item);
    };

    let j = &model.jumps;
    let levy_int = (|| -> Result<f64> {
        if j.is_zero() {
            return Ok(0.0);
        }
        let w = |y: f64| y.min(1.0) * y.min(1.0);
        Ok(j.side_quad(1.0, 0.0, f64::INFINITY, &w, QuadTol::default())?
            + j.side_quad(-1.0, 0.0, f64::INFINITY, &w, QuadTol::default())?)
    })();
    push("levy_integrability", levy_int, true);
    push("exponential_moment", model.exp_moment(), true);
    push("x_exponential_moment", model.x_exp_moment(), true);

    if model.martingale_calibrated {
        let resid = char_exponent(model, Complex64::new(0.0, -1.0)).map(|z| z.norm());
        let item = match resid {
            Ok(r) => CheckItem {
                name: "martingale_residual".into(),
                value: r,
                pass: r <= 1e-10,
                note: "|psi(-i)|".into(),
            },
            Err(e) => CheckItem {
                name: "martingale_residual".into(),
                value: f64::INFINITY,
                pass: false,
                note: e.to_string(),
            },
        };
        checks.push(item);
    }

    let all_pass = checks.iter().all(|c| c.pass);
    ValidationReport { checks, all_pass }
}

/// How the running sup of |mu_eta| behaved as eta swept down the decades;
/// the finiteness call is made from the increment pattern.
#[derive(Debug, Clone, Serialize)]
pub struct MuReport {
    /// (decade top, running sup at that decade) pairs, eta descending.
    pub decade_sups: Vec<(f64, f64)>,
    pub rule: String,
    pub finite: bool,
}

/// Cached tail functionals of one model: one-sided tails, truncated second
/// moment, U(x) = 2 int_0^x y gamma(y) dy, and the truncated drift mu.
///
/// gamma/V are accumulated straight from the density; U is accumulated by
/// its own quadrature of y*gamma(y) (gamma re-derived locally from the
/// density inside each panel), so the integration-by-parts identity
/// U = V + x^2 gamma stays a real cross-check of the whole stack.
#[derive(Clone)]
pub struct TailFunctionals {
    grid: Vec<f64>,
    dense_lo: f64,
    gp: Vec<f64>,
    gm: Vec<f64>,
    gd: Vec<f64>,
    v: Vec<f64>,
    u: Vec<f64>,
    mu_vals: Vec<f64>,
    gp_i: LogLogInterp,
    gm_i: LogLogInterp,
    gd_i: Pchip,
    gamma_i: LogLogInterp,
    v_i: LogLogInterp,
    u_i: LogLogInterp,
    mu_i: Pchip,
    pub b: f64,
    pub mu_bar0: f64,
    pub mu_bar: f64,
    pub mu_bar_finite: bool,
    pub mu_report: MuReport,
}

impl std::fmt::Debug for TailFunctionals {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TailFunctionals")
            .field("grid", &(self.grid.first(), self.grid.last(), self.grid.len()))
            .field("mu_bar0", &self.mu_bar0)
            .field("mu_bar", &self.mu_bar)
            .field("mu_bar_finite", &self.mu_bar_finite)
            .finish()
    }
}

/// Node layout for the tail caches. The dense part carries the interpolants;
/// the deep extension only has to keep the *accumulations* (U's head in
/// particular) accurate relative to values at the probe scale.
const DENSE_PPD: usize = 16;
const DEEP_PPD: usize = 4;
const DEEP_DECADES: f64 = 48.0;

pub fn tail_functionals(model: &LevyModel, probes: &[f64]) -> Result<TailFunctionals> {
    if probes.is_empty() {
        return Err(Error::GridError("probe grid is empty".into()));
    }
    for w in probes.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::GridError(format!(
                "probe grid must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !(probes[0] > 0.0) || !probes.iter().all(|p| p.is_finite()) {
        return Err(Error::GridError("probes must be finite and positive".into()));
    }

    let j = &model.jumps;
    let probe_min = probes[0];
    let probe_max = *probes.last().unwrap();
    let dense_lo = 1e-12f64.min(probe_min / 10.0);
    let hi = 64.0f64.max(10.0 * probe_max);
    let deep_lo = dense_lo * 10f64.powf(-DEEP_DECADES);

    // --- node set ---------------------------------------------------------
    let mut nodes: Vec<f64> = Vec::new();
    let mut x = deep_lo;
    let deep_step = 10f64.powf(1.0 / DEEP_PPD as f64);
    while x < dense_lo * 0.999 {
        nodes.push(x);
        x *= deep_step;
    }
    let dense_step = 10f64.powf(1.0 / DENSE_PPD as f64);
    let mut x = dense_lo;
    while x < hi * 0.999 {
        nodes.push(x);
        x *= dense_step;
    }
    nodes.push(hi);
    nodes.extend_from_slice(probes);
    nodes.push(TRUNC);
    for &bpt in &j.breakpoints {
        let a = bpt.abs();
        if a > deep_lo && a < hi {
            nodes.push(a);
        }
    }
    for edge in [j.support_hi, -j.support_lo] {
        if edge.is_finite() && edge > deep_lo && edge < hi {
            nodes.push(edge);
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    let n = nodes.len();

    let tol = QuadTol::new(1e-15, 1e-11);

    // --- one-sided tails, accumulated downward from hi --------------------
    let mut gp = vec![0.0; n];
    let mut gm = vec![0.0; n];
    let top_p = j.side_quad(1.0, hi, f64::INFINITY, &|_| 1.0, tol)?;
    let top_m = j.side_quad(-1.0, hi, f64::INFINITY, &|_| 1.0, tol)?;
    gp[n - 1] = top_p;
    gm[n - 1] = top_m;
    for k in (0..n - 1).rev() {
        let (a, b) = (nodes[k], nodes[k + 1]);
        gp[k] = gp[k + 1] + j.side_quad(1.0, a, b, &|_| 1.0, tol)?;
        gm[k] = gm[k + 1] + j.side_quad(-1.0, a, b, &|_| 1.0, tol)?;
    }

    // --- signed tail difference, accumulated downward from hi --------------
    // gamma_delta = gamma_+ - gamma_- must NOT be formed by differencing the
    // one-sided caches: for nearly symmetric densities both sides are huge
    // while the difference is O(1), and the caches' relative noise swamps it.
    // Accumulating xi(y) - xi(-y) directly only pays the pointwise
    // cancellation, which leaves plenty of digits.
    let mut gd = vec![0.0; n];
    gd[n - 1] = top_p - top_m;
    let dxi = |y: f64| j.xi(y) - j.xi(-y);
    let gd_tol = |a: f64, b: f64| {
        let floor = 2e-15 * j.xi_s((a * b).sqrt()) * (b - a);
        QuadTol::new(floor.max(1e-15), 1e-11)
    };
    for k in (0..n - 1).rev() {
        let inc = if j.is_zero() {
            0.0
        } else {
            integrate(dxi, nodes[k], nodes[k + 1], gd_tol(nodes[k], nodes[k + 1]))?.value
        };
        // no mass on either side above x_k: the difference is exactly zero,
        // don't let segment-floor noise accumulate into it
        gd[k] = if gp[k] == 0.0 && gm[k] == 0.0 {
            0.0
        } else {
            gd[k + 1] + inc
        };
    }

    // --- V, accumulated upward with an exact singular head ----------------
    let mut v = vec![0.0; n];
    v[0] = if j.is_zero() {
        0.0
    } else {
        j.side_quad(1.0, 0.0, nodes[0], &|y| y * y, tol)?
            + j.side_quad(-1.0, 0.0, nodes[0], &|y| y * y, tol)?
    };
    for k in 1..n {
        let (a, b) = (nodes[k - 1], nodes[k]);
        v[k] = v[k - 1]
            + j.side_quad(1.0, a, b, &|y| y * y, tol)?
            + j.side_quad(-1.0, a, b, &|y| y * y, tol)?;
    }

    // --- U, by its own quadrature of 2 y gamma(y) --------------------------
    // Inside panel [a, b]: gamma(y) = gamma(b) + int_y^b xi_S, the inner
    // integral evaluated fresh per outer node. The sub-relative-1e-9 head
    // below the deep extension uses the local power continuation of gamma.
    let mut u = vec![0.0; n];
    let gamma0 = gp[0] + gm[0];
    u[0] = if gamma0 > 0.0 && n >= 2 {
        let slope = ((gp[1] + gm[1]).max(1e-300) / gamma0.max(1e-300)).ln()
            / (nodes[1] / nodes[0]).ln();
        // gamma(y) ~ gamma0 (y/x0)^slope below the grid; 2 int_0^{x0} y gamma
        // = 2 gamma0 x0^2 / (slope + 2) provided slope > -2 (Lévy integrability).
        if slope > -1.999 {
            2.0 * gamma0 * nodes[0] * nodes[0] / (slope + 2.0)
        } else {
            2.0 * gamma0 * nodes[0] * nodes[0] / 0.001
        }
    } else {
        0.0
    };
    for k in 1..n {
        let (a, b) = (nodes[k - 1], nodes[k]);
        let gb = gp[k] + gm[k];
        let inc = if j.is_zero() {
            0.0
        } else {
            let f = |y: f64| {
                let (tail_part, _, _) = qk15(&mut |s| j.xi_s(s), y, b);
                2.0 * y * (gb + tail_part)
            };
            integrate(f, a, b, QuadTol::new(1e-15, 1e-10))?.value
        };
        u[k] = u[k - 1] + inc;
    }

    // --- mu, anchored at the truncation level ------------------------------
    let idx1 = nodes
        .iter()
        .position(|&x| (x - TRUNC).abs() <= 1e-12)
        .expect("truncation level is always a node");
    let mut mu_vals = vec![model.b; n];
    let d = |y: f64| y * (j.xi(y) - j.xi(-y));
    // For nearly symmetric densities the difference above cancels while each
    // side is huge, leaving irreducible roundoff of order xi_s * eps; the
    // per-panel absolute target has to sit above that floor or the panels
    // chase noise forever.
    let mu_tol = |a: f64, b: f64| {
        let floor = 2e-15 * j.xi_s((a * b).sqrt()) * (a * b).sqrt() * (b - a);
        QuadTol::new(floor.max(1e-15), 1e-11)
    };
    for k in (0..idx1).rev() {
        let inc = if j.is_zero() {
            0.0
        } else {
            integrate(d, nodes[k], nodes[k + 1], mu_tol(nodes[k], nodes[k + 1]))?.value
        };
        mu_vals[k] = mu_vals[k + 1] - inc;
    }
    for k in idx1 + 1..n {
        let inc = if j.is_zero() {
            0.0
        } else {
            integrate(d, nodes[k - 1], nodes[k], mu_tol(nodes[k - 1], nodes[k]))?.value
        };
        mu_vals[k] = mu_vals[k - 1] + inc;
    }

    // mu_bar0 = sup over (0,1]; the eta >= 1 part is bounded analytically by
    // |b| + int_{|x|>=1} |x| nu(dx), which is finite for admissible models.
    let mu_bar0 = mu_vals[..=idx1].iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let tail_first_moment = if j.is_zero() {
        0.0
    } else {
        j.side_quad(1.0, TRUNC, f64::INFINITY, &|y| y, tol)
            .unwrap_or(f64::INFINITY)
            + j.side_quad(-1.0, TRUNC, f64::INFINITY, &|y| y, tol)
                .unwrap_or(f64::INFINITY)
    };
    let mu_bar = mu_bar0.max(model.b.abs() + tail_first_moment);

    // Finiteness: watch the per-decade increments of the running sup on the
    // way down. Geometrically shrinking increments (ratio <= 0.9 across the
    // last three decades) or outright stabilization means a finite sup;
    // anything else is flagged divergent.
    let mut decade_sups = Vec::new();
    let mut run = 0.0f64;
    let mut decade_top = 1.0f64;
    let mut k = idx1 as isize;
    while decade_top > nodes[0] * 0.99 {
        let decade_bot = decade_top / 10.0;
        while k >= 0 && nodes[k as usize] >= decade_bot * 0.999 {
            run = run.max(mu_vals[k as usize].abs());
            k -= 1;
        }
        decade_sups.push((decade_top, run));
        decade_top = decade_bot;
    }
    let mut incs: Vec<f64> = decade_sups
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).max(0.0))
        .collect();
    // Only the behavior down at the bottom matters for the sup's existence.
    let finite = if incs.len() < 4 {
        true
    } else {
        let last = incs.split_off(incs.len() - 3);
        let scale = mu_bar0.max(1.0);
        let stabilized = last.iter().all(|&i| i < 1e-9 * scale);
        let geometric = last
            .iter()
            .zip(incs[incs.len() - 1..].iter().chain(last.iter()))
            .all(|(&cur, &prev)| cur <= 0.9 * prev.max(1e-300) || cur < 1e-12 * scale);
        stabilized || geometric
    };
    let mu_report = MuReport {
        decade_sups,
        rule: "finite iff last-3 per-decade sup increments decay geometrically (ratio <= 0.9) \
               or stabilize below 1e-9 relative"
            .into(),
        finite,
    };

    // --- interpolants over the dense range ---------------------------------
    let dense_from = nodes.partition_point(|&x| x < dense_lo * 0.999);
    let dx: Vec<f64> = nodes[dense_from..].to_vec();
    let gamma_vals: Vec<f64> = gp.iter().zip(&gm).map(|(&a, &b)| a + b).collect();
    let gp_i = LogLogInterp::new(&dx, &gp[dense_from..]);
    let gm_i = LogLogInterp::new(&dx, &gm[dense_from..]);
    let gamma_i = LogLogInterp::new(&dx, &gamma_vals[dense_from..]);
    let v_i = LogLogInterp::new(&dx, &v[dense_from..]);
    let u_i = LogLogInterp::new(&dx, &u[dense_from..]);
    let lnx: Vec<f64> = nodes.iter().map(|x| x.ln()).collect();
    // asinh keeps the signed difference interpolable across zero crossings
    // while staying log-accurate where it grows like a power.
    let gd_i = Pchip::new(lnx.clone(), gd.iter().map(|g| g.asinh()).collect());
    let mu_i = Pchip::new(lnx, mu_vals.clone());

    let tf = TailFunctionals {
        dense_lo,
        grid: nodes,
        gp,
        gm,
        gd,
        v,
        u,
        mu_vals,
        gp_i,
        gm_i,
        gd_i,
        gamma_i,
        v_i,
        u_i,
        mu_i,
        b: model.b,
        mu_bar0,
        mu_bar,
        mu_bar_finite: finite,
        mu_report,
    };
    tf.verify_internal(probes)?;
    Ok(tf)
}

impl TailFunctionals {
    pub fn gamma(&self, x: f64) -> f64 {
        self.gamma_i.eval(x)
    }
    pub fn gamma_plus(&self, x: f64) -> f64 {
        self.gp_i.eval(x)
    }
    pub fn gamma_minus(&self, x: f64) -> f64 {
        self.gm_i.eval(x)
    }
    /// Signed tail difference gamma_plus - gamma_minus, kept in its own
    /// cache — differencing the one-sided tails would lose it to
    /// cancellation whenever the density is close to symmetric.
    pub fn gamma_delta(&self, x: f64) -> f64 {
        self.gd_i.eval(x.ln()).sinh()
    }
    pub fn v(&self, x: f64) -> f64 {
        self.v_i.eval(x)
    }
    pub fn u(&self, x: f64) -> f64 {
        self.u_i.eval(x)
    }
    pub fn mu(&self, x: f64) -> f64 {
        assert!(x > 0.0, "mu needs x > 0");
        self.mu_i.eval(x.ln())
    }

    pub(crate) fn gamma_plus_interp(&self) -> &LogLogInterp {
        &self.gp_i
    }
    pub(crate) fn gamma_minus_interp(&self) -> &LogLogInterp {
        &self.gm_i
    }

    /// Smallest dense-grid node (the interpolants are exact accumulations
    /// from here up; below, evaluation is power-law continuation).
    pub fn grid_lo(&self) -> f64 {
        self.dense_lo
    }
    pub fn grid_hi(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// The accumulation nodes and the truncated-drift values on them,
    /// for diagnostics that want to scan the raw table.
    pub fn mu_table(&self) -> (&[f64], &[f64]) {
        (&self.grid, &self.mu_vals)
    }

    fn verify_internal(&self, probes: &[f64]) -> Result<()> {
        // gamma nonincreasing, V and U nondecreasing along the grid.
        for (name, arr) in [("gamma_plus", &self.gp), ("gamma_minus", &self.gm)] {
            for w in arr.windows(2) {
                if w[1] > w[0] * (1.0 + 1e-12) + 1e-300 {
                    return Err(Error::NonMonotoneTail(format!(
                        "{name} increases: {} -> {}",
                        w[0], w[1]
                    )));
                }
            }
        }
        for (name, arr) in [("V", &self.v), ("U", &self.u)] {
            for w in arr.windows(2) {
                if w[1] < w[0] * (1.0 - 1e-12) {
                    return Err(Error::NonMonotoneTail(format!(
                        "{name} decreases: {} -> {}",
                        w[0], w[1]
                    )));
                }
            }
        }
        // The signed difference can never exceed the sum of the sides; a
        // violation means its independent accumulation drifted off the
        // one-sided ones.
        for (k, &d) in self.gd.iter().enumerate() {
            let cap = self.gp[k] + self.gm[k];
            if d.abs() > cap * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::QuadratureFailure(format!(
                    "tail-difference cache inconsistent at x = {:.6e}:                      |gamma_delta| = {:.12e} exceeds gamma = {cap:.12e}",
                    self.grid[k],
                    d.abs()
                )));
            }
        }
        // Integration-by-parts consistency at the probe points.
        for &p in probes {
            let u = self.u(p);
            if u == 0.0 {
                continue;
            }
            let rhs = self.v(p) + p * p * self.gamma(p);
            if (u - rhs).abs() > 1e-8 * u.abs() {
                return Err(Error::QuadratureFailure(format!(
                    "tail-functional consistency failed at x = {p:.6e}: \
                     U = {u:.12e} vs V + x^2 gamma = {rhs:.12e}"
                )));
            }
        }
        Ok(())
    }
}
