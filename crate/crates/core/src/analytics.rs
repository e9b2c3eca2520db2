//! Closed-form results for the Ornstein-Uhlenbeck rate model.
//!
//! With `μ = m/α` and `κ = k/α^{3/2}` the exact discount function is
//!
//! ```text
//! ln D(t) = -(r0/α)(1 - e^{-αt}) + (κ²/2)·g(αt) - μ·h(αt)
//! g(τ) = τ - 2(1 - e^{-τ}) + ½(1 - e^{-2τ})
//! h(τ) = τ - (1 - e^{-τ})
//! ```
//!
//! and for `t ≫ 1/α` it decays like `e^{-r∞ t}` with `r∞ = m - k²/2α²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::OuParams;
use crate::special::erfc;

/// Default half-width of the band around `μ = κ²/2` treated as the boundary.
pub const DEFAULT_REGIME_TOL: f64 = 1e-9;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Scale-free OU parameters plus the time scale needed to undo the scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondimParams {
    pub mu: f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl NondimParams {
    pub fn new(mu: f64, kappa: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be >= 0, got {kappa}")));
        }
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { mu, kappa, alpha })
    }

    /// Build from a Table-style `(μ, κ, 1/α)` triple.
    pub fn from_correlation_time(mu: f64, kappa: f64, corr_time: f64) -> Result<Self> {
        Self::new(mu, kappa, 1.0 / corr_time)
    }

    /// Dimensional parameters with the given initial rate.
    pub fn to_ou(&self, r0: f64) -> Result<OuParams> {
        OuParams::new(self.mu * self.alpha, self.alpha, self.kappa * self.alpha.powf(1.5), r0)
    }

    /// Dimensional parameters started at the mean, `r0 = m`.
    pub fn to_ou_at_mean(&self) -> Result<OuParams> {
        let m = self.mu * self.alpha;
        self.to_ou(m)
    }

    /// `μ - κ²/2`; its sign decides the long-run regime.
    pub fn regime_margin(&self) -> f64 {
        self.mu - 0.5 * self.kappa * self.kappa
    }

    pub fn r_infinity(&self) -> f64 {
        self.alpha * self.regime_margin()
    }
}

pub fn nondimensionalize(p: &OuParams) -> NondimParams {
    NondimParams { mu: p.m / p.alpha, kappa: p.k / p.alpha.powf(1.5), alpha: p.alpha }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    ExponentialDecay,
    AsymptoticallyConstant,
    ExponentialGrowth,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ExponentialDecay => "ExponentialDecay",
            Regime::AsymptoticallyConstant => "AsymptoticallyConstant",
            Regime::ExponentialGrowth => "ExponentialGrowth",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A regime together with the tolerance it was decided at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub tolerance: f64,
}

pub fn classify_regime(nd: &NondimParams, tol: f64) -> RegimeLabel {
    let margin = nd.regime_margin();
    let regime = if margin > tol {
        Regime::ExponentialDecay
    } else if margin < -tol {
        Regime::ExponentialGrowth
    } else {
        Regime::AsymptoticallyConstant
    };
    RegimeLabel { regime, tolerance: tol }
}

/// `τ - (1 - e^{-τ})`.
pub(crate) fn drift_bracket(tau: f64) -> f64 {
    if tau < 0.1 {
        // Σ_{n≥2} (-1)^n τ^n / n!
        let mut term = tau * tau / 2.0;
        let mut sum = 0.0_f64;
        let mut n = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term;
            n += 1.0;
            term *= -tau / n;
        }
        sum
    } else {
        tau + (-tau).exp_m1()
    }
}

/// Fluctuation bracket `g(τ) = τ - 2(1 - e^{-τ}) + ½(1 - e^{-2τ})`.
///
/// Equals `α³/k² · Var[∫₀^t r]` at `τ = αt`, so it is non-negative; for small
/// `τ` it behaves like `τ³/3` and is summed as a series.
pub fn fluctuation_bracket(tau: f64) -> f64 {
    if tau < 0.1 {
        // Σ_{n≥3} (-1)^{n+1} (2^{n-1} - 2) τ^n / n!
        let mut sum = 0.0;
        let mut pow_fact = tau * tau * tau / 6.0; // τ^n / n!
        let mut two_pow = 4.0; // 2^{n-1}
        let mut sign = 1.0;
        for n in 3..40 {
            let term = sign * (two_pow - 2.0) * pow_fact;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            pow_fact *= tau / (n as f64 + 1.0);
            two_pow *= 2.0;
            sign = -sign;
        }
        sum
    } else {
        let one_minus = -(-tau).exp_m1();
        let one_minus_2 = -(-2.0 * tau).exp_m1();
        tau - 2.0 * one_minus + 0.5 * one_minus_2
    }
}

/// Exact `ln D(t)` for the OU model.
///
/// Returns [`Error::Overflow`] if the value is not representable; callers that
/// prefer saturation can use [`discount_exact`].
pub fn log_discount_exact(p: &OuParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let nd = nondimensionalize(p);
    let tau = p.alpha * t;
    let relax = -(-tau).exp_m1();
    let value =
        -(p.r0 / p.alpha) * relax + 0.5 * nd.kappa * nd.kappa * fluctuation_bracket(tau) - nd.mu * drift_bracket(tau);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(format!("ln D({t}) is not representable for {p:?}")))
    }
}

/// `D(t)`, saturating to `+∞` (or `0`) instead of failing.
pub fn discount_exact(p: &OuParams, t: f64) -> Result<f64> {
    match log_discount_exact(p, t) {
        Ok(v) => Ok(v.exp()),
        Err(Error::Overflow(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Analytic `d ln D / dt`.
pub fn log_discount_slope(p: &OuParams, t: f64) -> f64 {
    let e1 = (-p.alpha * t).exp();
    let fluct = p.k * p.k / (2.0 * p.alpha * p.alpha) * (1.0 - e1) * (1.0 - e1);
    -p.r0 * e1 + fluct - p.m * (1.0 - e1)
}

/// Long-run discount rate `m - k²/2α²`.
pub fn r_infinity(p: &OuParams) -> f64 {
    p.m - p.k * p.k / (2.0 * p.alpha * p.alpha)
}

/// Stationary probability of a negative rate, `½·erfc(μ/κ)`.
///
/// With `κ = 0` the stationary law is a point mass at `m`: the result is
/// 0, 1 or ½ for positive, negative or zero `μ`.
pub fn prob_negative_stationary(nd: &NondimParams) -> f64 {
    if nd.kappa == 0.0 {
        return if nd.mu > 0.0 {
            0.0
        } else if nd.mu < 0.0 {
            1.0
        } else {
            0.5
        };
    }
    0.5 * erfc(nd.mu / nd.kappa)
}

/// Small-ratio expansion `½ - x/√π` of the negative-rate probability.
pub fn prob_negative_small_ratio(ratio: f64) -> f64 {
    0.5 - FRAC_1_SQRT_PI * ratio
}

/// Large-ratio asymptote `(1/2√π)(1/x)e^{-x²}` with `x = μ/κ`.
pub fn prob_negative_large_ratio(ratio: f64) -> f64 {
    0.5 * FRAC_1_SQRT_PI / ratio * (-ratio * ratio).exp()
}

/// Stationary probability that the rate sits below `r∞`:
/// `½·erfc(√((m - r∞)/2α))`. Equals ½ in the noiseless limit.
pub fn prob_below_r_infinity(p: &OuParams) -> f64 {
    let gap = p.m - r_infinity(p);
    0.5 * erfc((gap / (2.0 * p.alpha)).sqrt())
}

/// The same probability written through `κ` alone: `½·erfc(κ/2)`.
pub fn prob_below_r_infinity_nondim(nd: &NondimParams) -> f64 {
    0.5 * erfc(0.5 * nd.kappa)
}

/// Asymptote `√(α / 2π(m - r∞)) · e^{-(m - r∞)/2α}` for slow reversion.
pub fn prob_below_r_infinity_asymptote(gap: f64, alpha: f64) -> f64 {
    (alpha / (2.0 * std::f64::consts::PI * gap)).sqrt() * (-gap / (2.0 * alpha)).exp()
}
