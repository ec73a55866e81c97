//! Model presets and the JSON model configuration.
//!
//! Four presets: `black_scholes` (pure Gaussian), `toy_log` (the power-log
//! jump family with exponential right taper), `symmetric_stable` (power-law
//! jumps truncated to |x| <= 1 so the exponential moment exists), and
//! `custom` (a sum of power/exponential/log terms given in JSON).

use crate::error::{Error, Result};
use crate::levy::{
    esscher_transform, AnalyticTail, JumpDensity, LevyModel, MeasureTag,
};
use crate::quad::QuadTol;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    BlackScholes,
    ToyLog,
    SymmetricStable,
    Custom,
}

/// Quadrature tolerance overrides, used by the CLI layers; library-internal
/// tables run at tighter fixed tolerances regardless.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    #[serde(default = "default_abs_tol")]
    pub abs: f64,
    #[serde(default = "default_rel_tol")]
    pub rel: f64,
}

fn default_abs_tol() -> f64 {
    1e-10
}
fn default_rel_tol() -> f64 {
    1e-8
}

impl Default for TolSpec {
    fn default() -> Self {
        TolSpec { abs: default_abs_tol(), rel: default_rel_tol() }
    }
}

/// Multiplicative log correction on a density term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LogFactor {
    #[default]
    None,
    /// |ln|x||; vanishes at |x| = 1 with a corner.
    AbsLn,
    /// 2 + sin(ln(1/|x|)); oscillates forever on the way into 0.
    TwoPlusSinLn,
}

/// One additive piece of a custom density:
/// coef * |x|^{-(tail_exponent+1)} * exp(-rate*x) * L(x) on [lo, hi].
/// `null` support endpoints mean unbounded on that side.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityTerm {
    pub coef: f64,
    pub tail_exponent: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub log_factor: LogFactor,
    #[serde(default)]
    pub support: (Option<f64>, Option<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub terms: Vec<DensityTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: PresetKind,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub density: Option<DensitySpec>,
    #[serde(default)]
    pub tolerances: Option<TolSpec>,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigError(e.to_string()))
    }

    pub fn quad_tol(&self) -> QuadTol {
        let t = self.tolerances.unwrap_or_default();
        QuadTol::new(t.abs, t.rel)
    }

    /// Builds the martingale-calibrated physical-measure model.
    pub fn build(&self) -> Result<LevyModel> {
        let sigma = self.sigma.unwrap_or(0.0);
        if sigma < 0.0 || !sigma.is_finite() {
            return Err(Error::ConfigError(format!("sigma must be >= 0, got {sigma}")));
        }
        match self.preset {
            PresetKind::BlackScholes => {
                let s = self
                    .sigma
                    .ok_or_else(|| Error::ConfigError("black_scholes needs sigma".into()))?;
                black_scholes(s)
            }
            PresetKind::ToyLog => toy_log(self.require_alpha()?, sigma),
            PresetKind::SymmetricStable => {
                symmetric_stable_truncated(self.require_alpha()?, sigma)
            }
            PresetKind::Custom => {
                let spec = self
                    .density
                    .as_ref()
                    .ok_or_else(|| Error::ConfigError("custom preset needs density".into()))?;
                LevyModel::martingale(sigma, density_from_spec(spec)?)
            }
        }
    }

    fn require_alpha(&self) -> Result<f64> {
        let a = self
            .alpha
            .ok_or_else(|| Error::ConfigError("this preset needs alpha".into()))?;
        check_alpha(a)?;
        Ok(a)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::AlphaDomain(alpha))
    }
}

/// Pure Gaussian martingale model: b = -sigma^2/2, no jumps.
pub fn black_scholes(sigma: f64) -> Result<LevyModel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::ConfigError(format!(
            "black_scholes needs sigma > 0, got {sigma}"
        )));
    }
    LevyModel::martingale(sigma, JumpDensity::zero())
}

/// xi(x) = |x|^{-alpha-1} e^{-x} |ln|x|| on [-1, inf), zero below -1.
/// The |ln| factor puts a corner at x = 1 and makes the small-jump tail
/// regularly varying with a genuinely slowly-varying (log) correction.
pub fn toy_density(alpha: f64) -> Result<JumpDensity> {
    check_alpha(alpha)?;
    JumpDensity::with_breakpoints(
        move |x: f64| {
            let a = x.abs();
            a.powf(-alpha - 1.0) * (-x).exp() * a.ln().abs()
        },
        -1.0,
        f64::INFINITY,
        &[1.0],
    )?
    // e^x cancels the taper exactly; the share form keeps the far right
    // tail computable where e^{-x} has already underflowed.
    .with_share_form(move |x: f64| {
        let a = x.abs();
        a.powf(-alpha - 1.0) * a.ln().abs()
    })
}

/// Martingale-calibrated physical model over the toy density.
pub fn toy_log(alpha: f64, sigma: f64) -> Result<LevyModel> {
    LevyModel::martingale(sigma, toy_density(alpha)?)
}

/// Closed-form one-sided upper tail of the share-measure toy density
/// (the e^x tilt cancels the e^{-x} taper exactly, leaving
/// xi*(x) = |x|^{-alpha-1}|ln|x|| on [-1, inf)).
pub fn toy_share_gamma_plus(alpha: f64, x: f64) -> f64 {
    let a = alpha;
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x < 1.0 {
        2.0 / (a * a) + x.powf(-a) / a * ((1.0 / x).ln() - 1.0 / a)
    } else {
        x.powf(-a) / a * (x.ln() + 1.0 / a)
    }
}

/// Closed-form one-sided lower tail; the left support ends at -1.
pub fn toy_share_gamma_minus(alpha: f64, x: f64) -> f64 {
    let a = alpha;
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x < 1.0 {
        1.0 / (a * a) + x.powf(-a) / a * ((1.0 / x).ln() - 1.0 / a)
    } else {
        0.0
    }
}

pub fn toy_share_gamma_star(alpha: f64, x: f64) -> f64 {
    toy_share_gamma_plus(alpha, x) + toy_share_gamma_minus(alpha, x)
}

/// Share-measure toy model: drift from the exponential tilt of the
/// physical model, jumps in their exactly-cancelled closed form with the
/// analytic tail attached (and verified against quadrature on attachment).
pub fn toy_share(alpha: f64, sigma: f64) -> Result<LevyModel> {
    let physical = toy_log(alpha, sigma)?;
    let tilted = esscher_transform(&physical, 1.0)?;
    let jumps = JumpDensity::with_breakpoints(
        move |x: f64| {
            let a = x.abs();
            a.powf(-alpha - 1.0) * a.ln().abs()
        },
        -1.0,
        f64::INFINITY,
        &[1.0],
    )?
    .with_analytic_tail(AnalyticTail {
        gamma_plus: Arc::new(move |x| toy_share_gamma_plus(alpha, x)),
        gamma_minus: Arc::new(move |x| toy_share_gamma_minus(alpha, x)),
    })?;
    Ok(LevyModel::unchecked(tilted.b, tilted.sigma, jumps, MeasureTag::Share))
}

/// xi(x) = |x|^{-alpha-1} on 0 < |x| <= 1, zero beyond. Truncation keeps
/// the exponential moment finite so the model can price; the small-jump
/// scaling behavior is identical to the untruncated power law.
pub fn symmetric_stable_truncated(alpha: f64, sigma: f64) -> Result<LevyModel> {
    check_alpha(alpha)?;
    let jumps = JumpDensity::new(
        move |x: f64| {
            let a = x.abs();
            if a <= 1.0 {
                a.powf(-alpha - 1.0)
            } else {
                0.0
            }
        },
        -1.0,
        1.0,
    )?
    .with_analytic_tail(AnalyticTail {
        gamma_plus: Arc::new(move |x: f64| truncated_power_tail(alpha, x)),
        gamma_minus: Arc::new(move |x: f64| truncated_power_tail(alpha, x)),
    })?;
    LevyModel::martingale(sigma, jumps)
}

/// One-sided tail of the truncated power density: (x^{-alpha} - 1)/alpha
/// on (0, 1], zero past the support.
pub fn truncated_power_tail(alpha: f64, x: f64) -> f64 {
    if x >= 1.0 {
        0.0
    } else {
        (x.powf(-alpha) - 1.0) / alpha
    }
}

/// The untruncated |x|^{-alpha-1} density. Has no exponential moment, so
/// it cannot back a priced model; used for tail-functional diagnostics
/// where the closed forms (gamma, V, U, the scaling map) are exact.
pub fn symmetric_stable_full_density(alpha: f64) -> Result<JumpDensity> {
    check_alpha(alpha)?;
    JumpDensity::new(
        move |x: f64| x.abs().powf(-alpha - 1.0),
        f64::NEG_INFINITY,
        f64::INFINITY,
    )
}

/// Assembles a `JumpDensity` from a term-sum spec. Terms must have
/// nonnegative coefficients so the sum is a density without cancellation
/// analysis; integrability is verified by the density constructor.
pub fn density_from_spec(spec: &DensitySpec) -> Result<JumpDensity> {
    if spec.terms.is_empty() {
        return Err(Error::ConfigError("density needs at least one term".into()));
    }
    for t in &spec.terms {
        if t.coef < 0.0 || !t.coef.is_finite() {
            return Err(Error::ConfigError(format!(
                "term coefficients must be >= 0, got {}",
                t.coef
            )));
        }
        if let (Some(lo), Some(hi)) = t.support {
            if !(lo < hi) {
                return Err(Error::ConfigError(format!(
                    "term support [{lo}, {hi}] is empty"
                )));
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut breakpoints: Vec<f64> = Vec::new();
    for t in &spec.terms {
        let tlo = t.support.0.unwrap_or(f64::NEG_INFINITY);
        let thi = t.support.1.unwrap_or(f64::INFINITY);
        lo = lo.min(tlo);
        hi = hi.max(thi);
        for edge in [tlo, thi] {
            if edge.is_finite() && edge != 0.0 {
                breakpoints.push(edge);
            }
        }
        if t.log_factor == LogFactor::AbsLn {
            for corner in [-1.0, 1.0] {
                if corner > tlo && corner < thi {
                    breakpoints.push(corner);
                }
            }
        }
    }
    lo = lo.min(0.0);
    hi = hi.max(0.0);
    // rate_shift folds an extra e^{shift * x} into the term sum; shift = 1
    // gives the share form e^x xi(x) with the exponent combined
    // analytically, so critically tempered terms never underflow early.
    let term_sum = |terms: Vec<DensityTerm>, shift: f64| {
        move |x: f64| {
            let mut s = 0.0;
            for t in &terms {
                let tlo = t.support.0.unwrap_or(f64::NEG_INFINITY);
                let thi = t.support.1.unwrap_or(f64::INFINITY);
                if x < tlo || x > thi {
                    continue;
                }
                let a = x.abs();
                let l = match t.log_factor {
                    LogFactor::None => 1.0,
                    LogFactor::AbsLn => a.ln().abs(),
                    LogFactor::TwoPlusSinLn => 2.0 + (1.0 / a).ln().sin(),
                };
                s += t.coef * a.powf(-(t.tail_exponent + 1.0)) * ((shift - t.rate) * x).exp() * l;
            }
            s
        }
    };
    JumpDensity::with_breakpoints(term_sum(spec.terms.clone(), 0.0), lo, hi, &breakpoints)?
        .with_share_form(term_sum(spec.terms.clone(), 1.0))
}
