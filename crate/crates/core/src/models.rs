//! Short-rate processes.
//!
//! All rates are continuously compounded annual log-rates in decimal units
//! (0.026 is 2.6% per year) and all times are in years.
//!
//! * Ornstein-Uhlenbeck: `dr = -α(r - m)dt + k dw`. Sampled exactly.
//! * Feller (square-root): `dr = -α(r - m)dt + k√r dw`. Full-truncation Euler.
//! * Log-normal (geometric): `dr = a r dt + b r dw`. Sampled exactly.
//!
//! Only the OU dynamics are fully pinned down by the analytic results in
//! [`crate::analytics`]; the Feller and log-normal forms are the standard
//! textbook processes and are provided for Monte Carlo comparison.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    /// Mean-reversion level.
    pub m: f64,
    /// Reversion strength; 1/alpha is the correlation time.
    pub alpha: f64,
    /// Noise amplitude (year^-3/2).
    pub k: f64,
    /// Initial rate r(0).
    pub r0: f64,
}

impl OuParams {
    pub fn new(m: f64, alpha: f64, k: f64, r0: f64) -> Result<Self> {
        let p = Self { m, alpha, k, r0 };
        p.validate()?;
        Ok(p)
    }

    /// Parameters started at the mean level, `r0 = m`.
    pub fn at_mean(m: f64, alpha: f64, k: f64) -> Result<Self> {
        Self::new(m, alpha, k, m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(domain(format!("OU alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(domain(format!("OU k must be >= 0, got {}", self.k)));
        }
        if !self.m.is_finite() {
            return Err(domain(format!("OU m must be finite, got {}", self.m)));
        }
        if !self.r0.is_finite() {
            return Err(domain(format!("OU r0 must be finite, got {}", self.r0)));
        }
        Ok(())
    }

    /// Stationary mean and variance `(m, k²/2α)`.
    pub fn stationary_stats(&self) -> (f64, f64) {
        (self.m, self.k * self.k / (2.0 * self.alpha))
    }

    /// Mean and variance of `r(t + dt)` given `r(t) = r`.
    pub fn transition_moments(&self, r: f64, dt: f64) -> (f64, f64) {
        let decay = (-self.alpha * dt).exp();
        // 1 - e^{-2 alpha dt} without cancellation for small steps
        let one_minus = -(-2.0 * self.alpha * dt).exp_m1();
        let (_, var_inf) = self.stationary_stats();
        (self.m + (r - self.m) * decay, var_inf * one_minus)
    }

    /// Exact OU transition driven by a standard-normal draw.
    pub fn transition_sample(&self, r: f64, dt: f64, noise: f64) -> f64 {
        let (mean, var) = self.transition_moments(r, dt);
        mean + noise * var.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FellerParams {
    pub m: f64,
    pub alpha: f64,
    /// Noise amplitude multiplying √r.
    pub k: f64,
    pub r0: f64,
}

impl FellerParams {
    pub fn new(m: f64, alpha: f64, k: f64, r0: f64) -> Result<Self> {
        let p = Self { m, alpha, k, r0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(domain(format!("Feller alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(domain(format!("Feller k must be >= 0, got {}", self.k)));
        }
        if !(self.m >= 0.0) || !self.m.is_finite() {
            return Err(domain(format!("Feller m must be >= 0, got {}", self.m)));
        }
        if !(self.r0 >= 0.0) || !self.r0.is_finite() {
            return Err(domain(format!("Feller r0 must be >= 0, got {}", self.r0)));
        }
        Ok(())
    }

    /// Full-truncation Euler step, clamped at zero.
    pub fn step(&self, r: f64, dt: f64, noise: f64) -> f64 {
        let rp = r.max(0.0);
        let next = r + self.alpha * (self.m - rp) * dt + self.k * rp.sqrt() * dt.sqrt() * noise;
        next.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    /// Drift of the rate in `dr = a r dt + b r dw`.
    pub a: f64,
    /// Volatility of the log-rate.
    pub b: f64,
    pub r0: f64,
}

impl LognormalParams {
    pub fn new(a: f64, b: f64, r0: f64) -> Result<Self> {
        let p = Self { a, b, r0 };
        p.validate()?;
        Ok(p)
    }

    /// Geometric random walk: the log-rate has no drift (`a = b²/2`).
    pub fn driftless_log(b: f64, r0: f64) -> Result<Self> {
        Self::new(0.5 * b * b, b, r0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(domain(format!("log-normal a must be finite, got {}", self.a)));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(domain(format!("log-normal b must be >= 0, got {}", self.b)));
        }
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(domain(format!("log-normal r0 must be > 0, got {}", self.r0)));
        }
        Ok(())
    }

    /// Exact geometric step.
    pub fn step(&self, r: f64, dt: f64, noise: f64) -> f64 {
        r * ((self.a - 0.5 * self.b * self.b) * dt + self.b * dt.sqrt() * noise).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelKind {
    Ou(OuParams),
    Feller(FellerParams),
    Lognormal(LognormalParams),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Ou(_) => "ou",
            ModelKind::Feller(_) => "feller",
            ModelKind::Lognormal(_) => "lognormal",
        }
    }
}

impl From<OuParams> for ModelKind {
    fn from(p: OuParams) -> Self {
        ModelKind::Ou(p)
    }
}

impl From<FellerParams> for ModelKind {
    fn from(p: FellerParams) -> Self {
        ModelKind::Feller(p)
    }
}

impl From<LognormalParams> for ModelKind {
    fn from(p: LognormalParams) -> Self {
        ModelKind::Lognormal(p)
    }
}

/// A [`ModelKind`] whose invariants have been checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedModel(ModelKind);

pub fn validate(model: ModelKind) -> Result<ValidatedModel> {
    match &model {
        ModelKind::Ou(p) => p.validate()?,
        ModelKind::Feller(p) => p.validate()?,
        ModelKind::Lognormal(p) => p.validate()?,
    }
    Ok(ValidatedModel(model))
}

impl ValidatedModel {
    pub fn kind(&self) -> &ModelKind {
        &self.0
    }

    pub fn initial_rate(&self) -> f64 {
        match self.0 {
            ModelKind::Ou(p) => p.r0,
            ModelKind::Feller(p) => p.r0,
            ModelKind::Lognormal(p) => p.r0,
        }
    }

    /// Reversion strength, if the model mean-reverts.
    pub fn reversion(&self) -> Option<f64> {
        match self.0 {
            ModelKind::Ou(p) => Some(p.alpha),
            ModelKind::Feller(p) => Some(p.alpha),
            ModelKind::Lognormal(_) => None,
        }
    }

    /// Advance the rate by `dt` using one standard-normal draw.
    #[inline]
    pub fn step(&self, r: f64, dt: f64, noise: f64) -> f64 {
        match &self.0 {
            ModelKind::Ou(p) => p.transition_sample(r, dt, noise),
            ModelKind::Feller(p) => p.step(r, dt, noise),
            ModelKind::Lognormal(p) => p.step(r, dt, noise),
        }
    }
}
