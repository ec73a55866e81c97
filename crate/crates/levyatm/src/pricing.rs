//! ATM call prices for exponential Levy models.
//!
//! Everything here works on the share measure: an ATM call on S = e^X with
//! S_0 = 1 and zero rates prices as c(t) = int_0^inf e^{-x} P*(X_t >= x) dx,
//! where P* is the theta = 1 Esscher tilt of the physical law. The tail
//! probability comes from Gil-Pelaez inversion of exp(t psi*), and for the
//! price itself the x-integral is swapped inside the frequency integral, so
//! one quadrature per maturity suffices:
//!
//!   c(t) = (1/pi) int_0^inf [Im phi*(u)/u + 1 - Re phi*(u)] / (1 + u^2) du.
//!
//! (Insert the inversion formula into the x-integral; int_0^inf e^{-x(1+iu)}dx
//! = 1/(1+iu), and the constant 1/2 cancels against the -1/(1+u^2) part.)
//! Both routes are kept: the swapped form is the production path, the
//! literal composition is the slow cross-check.

use crate::cf::{CfOpts, CharFn};
use crate::error::{Error, Result};
use crate::levy::{
    LevyModel, MeasureTag, TailFunctionals, esscher_transform, tail_functionals,
};
use crate::osc::{TrigKind, trig_tail_integral};
use crate::quad::{QuadTol, integrate};
use crate::regvar::ScalingFunction;
use crate::special::{normal_cdf, normal_quantile};
use crate::stable::{StableLaw, expected_positive_part};
use rayon::prelude::*;
use std::f64::consts::PI;

// Quadrature targets depend on how psi is evaluated: closed-form exponents
// (no jumps, or nothing but the Brownian part) support near-machine targets,
// while the interpolated jump cache carries ~1e-9 relative noise and
// piecewise-cubic kinks that stall error estimates below ~1e-11.
const PROB_TOL_EXACT: QuadTol = QuadTol { abs: 1e-12, rel: 1e-10 };
const PRICE_TOL_EXACT: QuadTol = QuadTol { abs: 1e-13, rel: 1e-11 };
const PROB_TOL_CACHED: QuadTol = QuadTol { abs: 1e-10, rel: 1e-8 };
const PRICE_TOL_CACHED: QuadTol = QuadTol { abs: 1e-11, rel: 1e-9 };

/// t * (-Re psi) beyond which exp(t psi) is dead (< 1e-20 in magnitude).
const PHASE_DEAD: f64 = 46.0;

/// Switch the tail-probability quadrature to the oscillatory engine once
/// the kernel e^{-iux} winds more than this many radians over the live
/// frequency range.
const OSC_SWITCH: f64 = 64.0 * PI;

/// Truncation point for the literal composition route; e^{-40} ~ 4e-18.
const X_MAX: f64 = 40.0;

/// Black-Scholes ATM call in closed form: 2 Phi(sigma sqrt(t)/2) - 1.
pub fn bs_atm_price(sigma: f64, t: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::DomainError(format!("sigma = {sigma}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::DomainError(format!("t = {t}")));
    }
    Ok(2.0 * normal_cdf(0.5 * sigma * t.sqrt()) - 1.0)
}

/// Inverts the Black-Scholes ATM formula: sigma = (2/sqrt(t)) Phi^{-1}((c+1)/2).
pub fn implied_vol(price: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DomainError(format!("t = {t}")));
    }
    if !(0.0..1.0).contains(&price) {
        return Err(Error::PriceOutOfRange(price));
    }
    Ok(2.0 / t.sqrt() * normal_quantile(0.5 * (price + 1.0)))
}

/// Fourier pricer for one model: holds the share-measure triplet and its
/// cached characteristic exponent so a whole maturity grid reuses them.
pub struct Pricer {
    share: LevyModel,
    share_tails: TailFunctionals,
    cf: CharFn,
    prob_tol: QuadTol,
    price_tol: QuadTol,
}

impl Pricer {
    /// Accepts the physical model (tilted internally, theta = 1) or an
    /// already-tilted share model.
    pub fn new(model: &LevyModel) -> Result<Pricer> {
        let share = match model.measure_tag {
            MeasureTag::Share => model.clone(),
            MeasureTag::Physical => esscher_transform(model, 1.0)?,
        };
        let share_tails = tail_functionals(&share, &[1e-9, 1e-2])?;
        let cf = CharFn::build(&share, &share_tails, &CfOpts::default())?;
        let (prob_tol, price_tol) = if cf.jumps.is_some() {
            (PROB_TOL_CACHED, PRICE_TOL_CACHED)
        } else {
            (PROB_TOL_EXACT, PRICE_TOL_EXACT)
        };
        Ok(Pricer {
            share,
            share_tails,
            cf,
            prob_tol,
            price_tol,
        })
    }

    pub fn share_model(&self) -> &LevyModel {
        &self.share
    }

    pub fn share_tails(&self) -> &TailFunctionals {
        &self.share_tails
    }

    fn degenerate(&self) -> bool {
        self.share.sigma == 0.0 && self.share.jumps.is_zero()
    }

    /// Smallest u with t |Re psi(u)| >= PHASE_DEAD; the integrands beyond it
    /// are below 1e-20 times their scale.
    fn decay_cutoff(&self, t: f64) -> Result<f64> {
        let dead = |u: f64| t * (-self.cf.psi(u).re) >= PHASE_DEAD;
        let mut hi = 1.0;
        let mut lo = 0.0;
        while !dead(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::QuadratureFailure(format!(
                    "exp(t psi) has not decayed by u = 1e15 at t = {t}"
                )));
            }
        }
        if lo == 0.0 {
            return Ok(hi);
        }
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            if dead(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// P*(X_t >= x) by Gil-Pelaez inversion:
    /// 1/2 + (1/pi) int_0^inf e^{t Re psi} sin(t Im psi - u x) / u du.
    pub fn share_tail_prob(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::DomainError(format!("t = {t}")));
        }
        if !x.is_finite() {
            return Err(Error::DomainError(format!("x = {x}")));
        }
        if self.degenerate() {
            // X_t is the point mass at b t.
            return Ok(if self.share.b * t >= x { 1.0 } else { 0.0 });
        }
        let ud = self.decay_cutoff(t)?;
        let full = |u: f64| {
            let p = self.cf.psi(u);
            (t * p.re).exp() * (t * p.im - u * x).sin() / u
        };
        let w = x.abs();
        let total = if w * ud <= OSC_SWITCH {
            integrate(&full, 0.0, ud, self.prob_tol)?.value
        } else {
            // Split sin(t Im psi - ux) against the slowly varying envelope;
            // each trig piece goes to the alternating-series engine.
            let h = (PI / w).min(ud);
            let head = integrate(&full, 0.0, h, self.prob_tol)?.value;
            let sgn = x.signum();
            let env_sin = |u: f64| {
                let p = self.cf.psi(u);
                -sgn * (t * p.re).exp() * (t * p.im).cos() / u
            };
            let env_cos = |u: f64| {
                let p = self.cf.psi(u);
                (t * p.re).exp() * (t * p.im).sin() / u
            };
            let a = trig_tail_integral(&env_sin, TrigKind::Sin, w, h, self.prob_tol)?;
            let b = trig_tail_integral(&env_cos, TrigKind::Cos, w, h, self.prob_tol)?;
            head + a.value + b.value
        };
        Ok((0.5 + total / PI).clamp(0.0, 1.0))
    }

    /// ATM call price by the swapped single integral (see module docs).
    pub fn atm_call_price(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::DomainError(format!("t = {t}")));
        }
        if self.degenerate() {
            return Ok((self.share.b * t).exp_m1().max(0.0));
        }
        let ud = self.decay_cutoff(t)?;
        // Im phi / u and 1 - Re phi, both assembled without cancellation:
        // 1 - e^a cos p = -expm1(a) + e^a 2 sin^2(p/2), a = t Re psi <= 0.
        let f = |u: f64| {
            let p = self.cf.psi(u);
            let a = t * p.re;
            let ph = t * p.im;
            let im_over_u = a.exp() * ph.sin() / u;
            let one_minus_re = -a.exp_m1() + a.exp() * 2.0 * (0.5 * ph).sin().powi(2);
            (im_over_u + one_minus_re) / (1.0 + u * u)
        };
        let body = integrate(&f, 0.0, ud, self.price_tol)?.value;
        let price = (body + (1.0 / ud).atan()) / PI;
        if !(-1e-9..=1.0 + 1e-9).contains(&price) {
            return Err(Error::PriceOutOfRange(price));
        }
        Ok(price.clamp(0.0, 1.0))
    }

    /// Slow reference route: composes the tail probability with the payoff
    /// transform literally, c = int_0^{40} e^{-x} P*(X_t >= x) dx. Kept as a
    /// cross-check on the swapped integral; do not use in loops.
    pub fn atm_call_price_composed(&self, t: f64) -> Result<f64> {
        use std::cell::RefCell;
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let f = |x: f64| match self.share_tail_prob(t, x) {
            Ok(p) => (-x).exp() * p,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let q = integrate(&f, 0.0, X_MAX, QuadTol { abs: 1e-9, rel: 1e-7 })?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(q.value)
    }
}

/// Free-function form of [`Pricer::share_tail_prob`]; requires a share-measure
/// model and builds the characteristic function on the spot.
pub fn share_tail_prob(share_model: &LevyModel, t: f64, x: f64) -> Result<f64> {
    if share_model.measure_tag != MeasureTag::Share {
        return Err(Error::MeasureTagError(
            "share_tail_prob expects the share-measure model; \
             tilt with esscher_transform(model, 1.0) first"
                .into(),
        ));
    }
    Pricer::new(share_model)?.share_tail_prob(t, x)
}

/// Free-function form of [`Pricer::atm_call_price`]: tilts the physical
/// model to the share measure and prices. Builds everything per call; use a
/// [`Pricer`] for maturity grids.
pub fn atm_call_price(model: &LevyModel, t: f64) -> Result<f64> {
    Pricer::new(model)?.atm_call_price(t)
}

/// One maturity on a price curve. Optional columns stay empty in the CSV.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PricePoint {
    pub t: f64,
    pub exact: f64,
    pub mc: Option<f64>,
    pub mc_se: Option<f64>,
    pub prediction: Option<f64>,
    pub b_t: Option<f64>,
    pub ratio: Option<f64>,
    pub ivol: Option<f64>,
    pub ivol_prediction: Option<f64>,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct PriceCurve {
    pub points: Vec<PricePoint>,
}

impl PriceCurve {
    /// Fixed header, 17 significant digits, empty cells for absent columns.
    pub fn to_csv(&self) -> String {
        let fmt = |v: f64| format!("{v:.16e}");
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        let mut s = String::from("t,exact,mc,mc_se,prediction,B_t,ratio,ivol,ivol_prediction\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt(p.t),
                fmt(p.exact),
                opt(p.mc),
                opt(p.mc_se),
                opt(p.prediction),
                opt(p.b_t),
                opt(p.ratio),
                opt(p.ivol),
                opt(p.ivol_prediction),
            ));
        }
        s
    }

    /// Price bounds and maturity monotonicity; the monotonicity half only
    /// makes sense for martingale-calibrated inputs.
    pub fn check_invariants(&self) -> Result<()> {
        for pair in self.points.windows(2) {
            if pair[1].exact < pair[0].exact - 1e-12 {
                return Err(Error::PreconditionViolation(format!(
                    "price decreases between t = {} and t = {}",
                    pair[0].t, pair[1].t
                )));
            }
        }
        for p in &self.points {
            if !(p.exact > 0.0 && p.exact < 1.0) {
                return Err(Error::PriceOutOfRange(p.exact));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct McSpec {
    pub n: usize,
    pub seed: u64,
}

/// Which first-order prediction to tabulate alongside the exact prices.
pub enum PredictionSpec<'a> {
    /// sigma sqrt(t) / sqrt(2 pi); implied vol prediction is sigma itself.
    Brownian { sigma: f64 },
    /// E*[Z_+] B_t with Z the limiting stable law and B the jump scaling;
    /// implied vol prediction is sqrt(2 pi) (B_t / sqrt(t)) E*[Z_+].
    PureJump {
        scaling: &'a ScalingFunction,
        law: &'a StableLaw,
    },
}

pub struct CurveSpec<'a> {
    pub maturities: Vec<f64>,
    pub mc: Option<McSpec>,
    pub prediction: Option<PredictionSpec<'a>>,
}

impl CurveSpec<'_> {
    pub fn new(maturities: Vec<f64>) -> CurveSpec<'static> {
        CurveSpec {
            maturities,
            mc: None,
            prediction: None,
        }
    }
}

/// Prices a maturity grid in parallel. The model is the physical martingale
/// model (the share tilt happens inside); MC columns simulate it directly.
pub fn price_curve(model: &LevyModel, spec: &CurveSpec) -> Result<PriceCurve> {
    if spec.maturities.is_empty() {
        return Ok(PriceCurve::default());
    }
    for pair in spec.maturities.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::GridError(format!(
                "maturities must be strictly increasing: {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if !(spec.maturities[0] > 0.0) {
        return Err(Error::GridError(format!(
            "maturities must be positive, got {}",
            spec.maturities[0]
        )));
    }
    let pricer = Pricer::new(model)?;
    let phys_tails = match (&spec.mc, model.jumps.is_zero()) {
        (Some(_), false) => Some(tail_functionals(model, &[1e-9, 1e-2])?),
        _ => None,
    };
    let epp = match &spec.prediction {
        Some(PredictionSpec::PureJump { law, .. }) => Some(expected_positive_part(law)?),
        _ => None,
    };
    let points: Result<Vec<PricePoint>> = spec
        .maturities
        .par_iter()
        .map(|&t| {
            let exact = pricer.atm_call_price(t)?;
            let (mc, mc_se) = match &spec.mc {
                Some(m) => {
                    let est = match &phys_tails {
                        Some(tails) => crate::mc::atm_call_mc_with(model, tails, t, m.n, m.seed)?,
                        None => crate::mc::atm_call_mc(model, t, m.n, m.seed)?,
                    };
                    (Some(est.value), Some(est.std_error))
                }
                None => (None, None),
            };
            let b_t = match &spec.prediction {
                Some(PredictionSpec::PureJump { scaling, .. }) => Some(scaling.eval(t)?),
                _ => None,
            };
            let sqrt_2pi = (2.0 * PI).sqrt();
            let (prediction, ivol_prediction) = match &spec.prediction {
                Some(PredictionSpec::Brownian { sigma }) => {
                    (Some(sigma * t.sqrt() / sqrt_2pi), Some(*sigma))
                }
                Some(PredictionSpec::PureJump { .. }) => {
                    let b = b_t.unwrap();
                    let e = epp.unwrap();
                    (Some(e * b), Some(sqrt_2pi * b / t.sqrt() * e))
                }
                None => (None, None),
            };
            Ok(PricePoint {
                t,
                exact,
                mc,
                mc_se,
                prediction,
                b_t,
                ratio: b_t.map(|b| exact / b),
                ivol: implied_vol(exact, t).ok(),
                ivol_prediction,
            })
        })
        .collect();
    Ok(PriceCurve { points: points? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpDensity;
    use crate::preset::{black_scholes, symmetric_stable_truncated, toy_log, toy_share};

    #[test]
    fn bs_closed_form_reference_points() {
        // 2 Phi(0.05) - 1 at sigma = 0.2, t = 0.25.
        let c = bs_atm_price(0.2, 0.25).unwrap();
        assert!((c - (2.0 * normal_cdf(0.05) - 1.0)).abs() < 1e-16);
        assert!((c - 0.0398776116).abs() < 1e-9);
        assert_eq!(bs_atm_price(0.2, 0.0).unwrap(), 0.0);
        assert!(bs_atm_price(0.4, 0.25).unwrap() > c);
        assert!(bs_atm_price(0.2, 1.0).unwrap() > c);
        assert!(bs_atm_price(-0.1, 1.0).is_err());
    }

    #[test]
    fn implied_vol_round_trips_and_rejects_bad_prices() {
        for sigma in [0.05, 0.2, 0.8] {
            for t in [1e-4, 0.25, 2.0] {
                let c = bs_atm_price(sigma, t).unwrap();
                let v = implied_vol(c, t).unwrap();
                assert!(
                    (v - sigma).abs() < 1e-10,
                    "sigma {sigma} t {t}: recovered {v}"
                );
            }
        }
        assert_eq!(implied_vol(0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            implied_vol(-0.1, 1.0),
            Err(Error::PriceOutOfRange(_))
        ));
        assert!(matches!(
            implied_vol(1.0, 1.0),
            Err(Error::PriceOutOfRange(_))
        ));
        assert!(implied_vol(0.2, -1.0).is_err());
    }

    #[test]
    fn share_tail_prob_matches_the_brownian_share_law() {
        // Share tilt of Black-Scholes is Brownian motion with drift
        // +sigma^2/2, so X_t ~ N(sigma^2 t / 2, sigma^2 t).
        let share = esscher_transform(&black_scholes(0.2).unwrap(), 1.0).unwrap();
        assert!((share.b - 0.02).abs() < 1e-15);
        let t: f64 = 0.25;
        let sd = 0.2 * t.sqrt();
        for x in [0.0, 0.1, -0.2] {
            let p = share_tail_prob(&share, t, x).unwrap();
            let want = normal_cdf((share.b * t - x) / sd);
            assert!(
                (p - want).abs() < 1e-9,
                "x = {x}: {p} vs {want}"
            );
        }
    }

    #[test]
    fn share_tail_prob_rejects_physical_models() {
        let m = black_scholes(0.2).unwrap();
        assert!(matches!(
            share_tail_prob(&m, 0.25, 0.0),
            Err(Error::MeasureTagError(_))
        ));
    }

    #[test]
    fn symmetric_driftless_share_is_balanced_at_zero() {
        let jumps = symmetric_stable_truncated(1.5, 0.0).unwrap().jumps.clone();
        let m = LevyModel::unchecked(0.0, 0.0, jumps, MeasureTag::Share);
        let p = share_tail_prob(&m, 0.01, 0.0).unwrap();
        assert!((p - 0.5).abs() < 1e-6, "p = {p}");
    }

    #[test]
    fn share_tail_prob_matches_simulation() {
        let share = toy_share(1.5, 0.3).unwrap();
        let pricer = Pricer::new(&share).unwrap();
        let (t, x) = (1e-3, 0.01);
        let p = pricer.share_tail_prob(t, x).unwrap();
        let est = crate::mc::mc_tail_prob(&share, t, x, 1_000_000, 2024).unwrap();
        assert!(
            (p - est.value).abs() <= 3.0 * est.std_error,
            "fourier {p} vs mc {} (se {})",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn tail_prob_decreases_in_the_level() {
        let pricer = Pricer::new(&toy_share(1.5, 0.0).unwrap()).unwrap();
        let t = 1e-3;
        let grid = [-0.5, -0.1, -0.01, 0.0, 0.005, 0.02, 0.1, 0.5, 2.0];
        let mut last = 1.0f64;
        for &x in &grid {
            let p = pricer.share_tail_prob(t, x).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!(
                p <= last + 1e-9,
                "tail probability rose from {last} to {p} at x = {x}"
            );
            last = p;
        }
    }

    #[test]
    fn fourier_price_matches_black_scholes() {
        let m = black_scholes(0.2).unwrap();
        let pricer = Pricer::new(&m).unwrap();
        for t in [1e-6, 1e-2, 0.25] {
            let got = pricer.atm_call_price(t).unwrap();
            let want = bs_atm_price(0.2, t).unwrap();
            assert!(
                (got - want).abs() < 1e-10,
                "t = {t}: fourier {got} vs closed form {want}"
            );
        }
    }

    #[test]
    fn swapped_integral_agrees_with_literal_composition() {
        let pricer = Pricer::new(&toy_log(1.5, 0.0).unwrap()).unwrap();
        let t = 0.25;
        let fast = pricer.atm_call_price(t).unwrap();
        let slow = pricer.atm_call_price_composed(t).unwrap();
        assert!(
            (fast - slow).abs() < 1e-7,
            "swapped {fast} vs composed {slow}"
        );
    }

    #[test]
    fn price_vanishes_at_tiny_maturity_and_grows_with_t() {
        let pricer = Pricer::new(&toy_log(1.5, 0.2).unwrap()).unwrap();
        let tiny = pricer.atm_call_price(1e-10).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-4, "price(1e-10) = {tiny}");
        let mut last = 0.0;
        for t in [1e-3, 1e-2, 0.1, 0.5] {
            let c = pricer.atm_call_price(t).unwrap();
            assert!(c > last && c < 1.0, "t = {t}: {c} after {last}");
            last = c;
        }
    }

    #[test]
    fn fourier_price_matches_simulation_on_the_toy_model() {
        let m = toy_log(1.5, 0.3).unwrap();
        let pricer = Pricer::new(&m).unwrap();
        let t = 1e-4;
        let exact = pricer.atm_call_price(t).unwrap();
        let est = crate::mc::atm_call_mc(&m, t, 1_000_000, 11).unwrap();
        assert!(
            (exact - est.value).abs() <= 3.0 * est.std_error,
            "fourier {exact} vs mc {} (se {})",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn degenerate_model_prices_zero() {
        let m = LevyModel::martingale(0.0, JumpDensity::zero()).unwrap();
        let pricer = Pricer::new(&m).unwrap();
        assert_eq!(pricer.atm_call_price(1.0).unwrap(), 0.0);
        assert_eq!(pricer.share_tail_prob(1.0, 0.1).unwrap(), 0.0);
        assert_eq!(pricer.share_tail_prob(1.0, -0.1).unwrap(), 1.0);
    }

    #[test]
    fn curve_columns_csv_and_determinism() {
        let m = black_scholes(0.2).unwrap();
        let spec = CurveSpec {
            maturities: vec![1e-4, 1e-2, 0.25, 1.0],
            mc: Some(McSpec { n: 20_000, seed: 5 }),
            prediction: Some(PredictionSpec::Brownian { sigma: 0.2 }),
        };
        let curve = price_curve(&m, &spec).unwrap();
        curve.check_invariants().unwrap();
        for p in &curve.points {
            assert!((p.ivol.unwrap() - 0.2).abs() < 1e-9);
            assert_eq!(p.ivol_prediction.unwrap(), 0.2);
            // Brownian first-order prediction undershoots slightly but is
            // within a percent out to t = 1.
            assert!((p.prediction.unwrap() / p.exact - 1.0).abs() < 0.01);
            assert!((p.mc.unwrap() - p.exact).abs() <= 4.0 * p.mc_se.unwrap());
        }
        let csv = curve.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,exact,mc,mc_se,prediction,B_t,ratio,ivol,ivol_prediction"
        );
        let first = lines.next().unwrap();
        let cells: Vec<&str> = first.split(',').collect();
        assert_eq!(cells.len(), 9);
        // 17 significant digits survive a parse round-trip.
        assert_eq!(cells[1].parse::<f64>().unwrap(), curve.points[0].exact);
        // B_t column is absent for the Brownian prediction.
        assert!(cells[5].is_empty());
        let again = price_curve(&m, &spec).unwrap();
        assert_eq!(csv, again.to_csv());
    }

    #[test]
    fn curve_rejects_bad_grids() {
        let m = black_scholes(0.2).unwrap();
        for bad in [vec![0.25, 0.25], vec![0.5, 0.25], vec![0.0, 0.25]] {
            let spec = CurveSpec {
                maturities: bad,
                mc: None,
                prediction: None,
            };
            assert!(matches!(
                price_curve(&m, &spec),
                Err(Error::GridError(_))
            ));
        }
    }
}
