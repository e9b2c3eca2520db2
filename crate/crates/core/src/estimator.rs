//! OU parameter estimation from an observed real-rate series.
//!
//! * `m` is the sample mean.
//! * `α` comes from a nonlinear least-squares fit of `σ²e^{-ατ}` to the
//!   empirical autocovariance (biased, 1/N normalisation).
//! * `k = √(2α σ²)`, with `σ² = K̂(0)`.
//!
//! Robustness is gauged by splitting the series into equal contiguous blocks
//! and re-estimating `m` and `σ²` per block, keeping the full-sample `α`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, classify_regime, NondimParams, Regime};
use crate::error::{domain, Error, Result};
use crate::pipeline::{negative_rate_summary, RateSeries, MIN_SERIES_LEN};

pub const DEFAULT_MAX_LAG_YEARS: f64 = 20.0;
pub const DEFAULT_BLOCKS: usize = 4;
const MAX_ITERATIONS: usize = 500;
/// Upper bound on `α·dt` during the fit; beyond it `e^{-α dt}` is ~1e-22.
const MAX_ALPHA_DT: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrFit {
    /// Lag times in years, starting at 0.
    pub lags: Vec<f64>,
    pub acov: Vec<f64>,
    pub alpha_hat: f64,
    /// Empirical variance `K̂(0)`.
    pub sigma2_hat: f64,
    /// Fitted amplitude of `A e^{-ατ}`; close to `sigma2_hat` for OU data.
    pub amplitude: f64,
    pub residual_sse: f64,
    pub alpha_stderr: f64,
    pub iterations: usize,
    /// Correlation time shorter than the sampling step.
    pub short_correlation: bool,
}

/// Result of fitting `A e^{-α τ}` to `(τ, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub amplitude: f64,
    pub alpha: f64,
    pub sse: f64,
    pub alpha_stderr: f64,
    pub iterations: usize,
}

pub fn estimate_mean(series: &RateSeries) -> Result<f64> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::InsufficientData { needed: MIN_SERIES_LEN, got: series.len() });
    }
    Ok(mean(&series.r))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Biased sample autocovariance for lags `0..=max_lag`.
pub fn autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|lag| d[..n - lag].iter().zip(&d[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

fn sse_of(taus: &[f64], y: &[f64], amp: f64, alpha: f64) -> f64 {
    taus.iter().zip(y).map(|(t, v)| (v - amp * (-alpha * t).exp()).powi(2)).sum()
}

/// Normal-equation pieces `(JᵀJ, Jᵀres)` for the residual `y - A e^{-ατ}`.
fn normal_equations(taus: &[f64], y: &[f64], amp: f64, alpha: f64) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut jtj = [[0.0; 2]; 2];
    let mut jtr = [0.0; 2];
    for (&t, &v) in taus.iter().zip(y) {
        let e = (-alpha * t).exp();
        let res = v - amp * e;
        let ja = -e;
        let jb = amp * t * e;
        jtj[0][0] += ja * ja;
        jtj[0][1] += ja * jb;
        jtj[1][1] += jb * jb;
        jtr[0] += ja * res;
        jtr[1] += jb * res;
    }
    jtj[1][0] = jtj[0][1];
    (jtj, jtr)
}

/// Levenberg-Marquardt fit of `A e^{-ατ}` with `0 < α ≤ alpha_max`.
pub fn fit_exponential(taus: &[f64], y: &[f64], init: (f64, f64), alpha_max: f64) -> Result<ExpFit> {
    if taus.len() != y.len() || taus.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", taus.len())));
    }
    let (mut amp, mut alpha) = init;
    alpha = alpha.clamp(f64::MIN_POSITIVE, alpha_max);
    let mut sse = sse_of(taus, y, amp, alpha);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NonConvergence(MAX_ITERATIONS));
        }
        iterations += 1;
        let (jtj, jtr) = normal_equations(taus, y, amp, alpha);
        let grad = (jtr[0] * jtr[0] + jtr[1] * jtr[1]).sqrt();
        if grad <= 1e-15 * scale {
            break;
        }
        let a00 = jtj[0][0] * (1.0 + lambda);
        let a11 = jtj[1][1] * (1.0 + lambda);
        let a01 = jtj[0][1];
        let det = a00 * a11 - a01 * a01;
        let accepted = if det.abs() > 0.0 && det.is_finite() {
            let da = -(a11 * jtr[0] - a01 * jtr[1]) / det;
            let db = -(a00 * jtr[1] - a01 * jtr[0]) / det;
            let new_alpha = (alpha + db).min(alpha_max);
            if new_alpha > 0.0 {
                let new_amp = amp + da;
                let new_sse = sse_of(taus, y, new_amp, new_alpha);
                if new_sse < sse {
                    let rel_change = (sse - new_sse) / sse.max(f64::MIN_POSITIVE);
                    let step = (da / amp.abs().max(f64::MIN_POSITIVE)).abs() + (db / alpha).abs();
                    amp = new_amp;
                    alpha = new_alpha;
                    sse = new_sse;
                    lambda = (lambda / 3.0).max(1e-12);
                    if rel_change < 1e-14 || step < 1e-12 {
                        break;
                    }
                    true
                } else {
                    false
                }
            } else {
                false
            }
        } else {
            false
        };
        if !accepted {
            lambda *= 4.0;
            if lambda > 1e16 {
                // no descent direction left: at a minimum or pinned at the bound
                break;
            }
        }
    }
    let (jtj, _) = normal_equations(taus, y, amp, alpha);
    let dof = (taus.len() - 2) as f64;
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[0][1];
    let alpha_stderr = if det > 0.0 { (sse / dof * jtj[0][0] / det).sqrt() } else { f64::INFINITY };
    Ok(ExpFit { amplitude: amp, alpha, sse, alpha_stderr, iterations })
}

/// Exponential fit of the empirical autocovariance up to `max_lag` years.
pub fn fit_autocorrelation(series: &RateSeries, max_lag: f64) -> Result<AutocorrFit> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InsufficientData { needed: MIN_SERIES_LEN, got: n });
    }
    let dt = series.dt;
    if max_lag > series.span() / 4.0 * (1.0 + 1e-12) {
        return Err(domain(format!("max lag {max_lag} exceeds a quarter of the span {}", series.span())));
    }
    let n_lags = (max_lag / dt * (1.0 + 1e-12)).floor() as usize;
    if n_lags < 2 {
        return Err(Error::Fit(format!("max lag {max_lag} covers fewer than 2 steps of {dt}")));
    }
    let acov = autocovariance(&series.r, n_lags);
    let sigma2 = acov[0];
    let scale = series.r.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if !(sigma2 > 1e-24 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Fit("series has zero variance".into()));
    }
    let lags: Vec<f64> = (0..acov.len()).map(|l| l as f64 * dt).collect();
    let alpha_max = MAX_ALPHA_DT / dt;

    // log-linear initial guess on the positive prefix
    let prefix = acov.iter().take_while(|&&v| v > 0.0).count();
    let init = if prefix >= 3 {
        let xs = &lags[..prefix];
        let ys: Vec<f64> = acov[..prefix].iter().map(|v| v.ln()).collect();
        let xm = mean(xs);
        let ym = mean(&ys);
        let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>() / sxx;
        let alpha0 = if slope < 0.0 { -slope } else { 1.0 / series.span() };
        ((ym - slope * xm).exp(), alpha0)
    } else if prefix == 2 {
        (sigma2, (sigma2 / acov[1]).ln() / dt)
    } else {
        (sigma2, 3.0 / dt)
    };
    let fit = fit_exponential(&lags, &acov, init, alpha_max)?;
    if !(fit.alpha > 0.0) {
        return Err(Error::Fit(format!("non-positive decay rate {}", fit.alpha)));
    }
    let short_correlation = fit.alpha * dt > 1.0;
    if short_correlation {
        warn!(
            "{}: fitted correlation time {:.3} years is shorter than the sampling step {dt}",
            series.country,
            1.0 / fit.alpha
        );
    }
    Ok(AutocorrFit {
        lags,
        acov,
        alpha_hat: fit.alpha,
        sigma2_hat: sigma2,
        amplitude: fit.amplitude,
        residual_sse: fit.sse,
        alpha_stderr: fit.alpha_stderr,
        iterations: fit.iterations,
        short_correlation,
    })
}

/// `k = √(2α σ²)`.
pub fn estimate_k(fit: &AutocorrFit) -> f64 {
    (2.0 * fit.alpha_hat * fit.sigma2_hat).sqrt()
}

pub fn default_max_lag(series: &RateSeries) -> f64 {
    DEFAULT_MAX_LAG_YEARS.min(series.span() / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockEstimate {
    pub start_time: f64,
    pub m: f64,
    pub sigma2: f64,
    pub k: f64,
    pub mu: f64,
    pub kappa: f64,
    pub r_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        values.fold(Self { min: f64::INFINITY, max: f64::NEG_INFINITY }, |acc, v| Self {
            min: acc.min.min(v),
            max: acc.max.max(v),
        })
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub blocks: Vec<BlockEstimate>,
    pub mu: MinMax,
    pub kappa: MinMax,
    pub r_inf: MinMax,
}

/// Re-estimate per contiguous block using the full-sample `α`.
///
/// Blocks have `len / n_blocks` samples each; a remainder at the end of the
/// series is dropped. `σ²` is demeaned per block.
pub fn block_subsample_report(series: &RateSeries, full_alpha: f64, n_blocks: usize) -> Result<BlockReport> {
    if n_blocks == 0 {
        return Err(domain("block count must be >= 1"));
    }
    if !(full_alpha > 0.0) {
        return Err(domain(format!("alpha must be > 0, got {full_alpha}")));
    }
    let needed = MIN_SERIES_LEN * n_blocks;
    if series.len() < needed {
        return Err(Error::InsufficientData { needed, got: series.len() });
    }
    let len = series.len() / n_blocks;
    let blocks: Vec<BlockEstimate> = (0..n_blocks)
        .map(|b| {
            let chunk = &series.r[b * len..(b + 1) * len];
            let m = mean(chunk);
            let sigma2 = chunk.iter().map(|v| (v - m).powi(2)).sum::<f64>() / len as f64;
            let k = (2.0 * full_alpha * sigma2).sqrt();
            BlockEstimate {
                start_time: series.times[b * len],
                m,
                sigma2,
                k,
                mu: m / full_alpha,
                kappa: k / full_alpha.powf(1.5),
                r_inf: m - k * k / (2.0 * full_alpha * full_alpha),
            }
        })
        .collect();
    Ok(BlockReport {
        mu: MinMax::of(blocks.iter().map(|b| b.mu)),
        kappa: MinMax::of(blocks.iter().map(|b| b.kappa)),
        r_inf: MinMax::of(blocks.iter().map(|b| b.r_inf)),
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Largest autocovariance lag in years; defaults to `min(20, span/4)`.
    pub max_lag: Option<f64>,
    pub n_blocks: usize,
    pub regime_tol: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { max_lag: None, n_blocks: DEFAULT_BLOCKS, regime_tol: analytics::DEFAULT_REGIME_TOL }
    }
}

/// Fitted OU parameters and derived quantities for one country.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub country: String,
    pub n_samples: usize,
    pub dt: f64,
    pub start_time: f64,
    pub span_years: f64,
    pub m_hat: f64,
    pub alpha_hat: f64,
    /// Written as `null` when the fit gives no usable curvature.
    #[serde(with = "unbounded_f64")]
    pub alpha_stderr: f64,
    pub correlation_time: f64,
    pub sigma2_hat: f64,
    pub k_hat: f64,
    pub mu_hat: f64,
    pub kappa_hat: f64,
    pub r_inf_hat: f64,
    pub regime: Regime,
    pub prob_negative_model: f64,
    pub neg_fraction_empirical: f64,
    pub neg_years_empirical: f64,
    pub mean_negative_amplitude: f64,
    pub blocks: Vec<BlockEstimate>,
    pub mu_range: MinMax,
    pub kappa_range: MinMax,
    pub r_inf_range: MinMax,
    pub warnings: Vec<String>,
}

mod unbounded_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl EstimationReport {
    pub fn nondim(&self) -> NondimParams {
        NondimParams { mu: self.mu_hat, kappa: self.kappa_hat, alpha: self.alpha_hat }
    }
}

pub fn build_report(series: &RateSeries) -> Result<EstimationReport> {
    build_report_with(series, &EstimatorOptions::default())
}

pub fn build_report_with(series: &RateSeries, opts: &EstimatorOptions) -> Result<EstimationReport> {
    let m_hat = estimate_mean(series)?;
    let max_lag = opts.max_lag.unwrap_or_else(|| default_max_lag(series));
    let fit = fit_autocorrelation(series, max_lag)?;
    let alpha = fit.alpha_hat;
    let k_hat = estimate_k(&fit);
    let nd = NondimParams { mu: m_hat / alpha, kappa: k_hat / alpha.powf(1.5), alpha };
    let r_inf_hat = m_hat - k_hat * k_hat / (2.0 * alpha * alpha);
    let blocks = block_subsample_report(series, alpha, opts.n_blocks)?;
    let neg = negative_rate_summary(series);

    let mut warnings = Vec::new();
    if fit.short_correlation {
        warnings.push(format!(
            "correlation time {:.4} years is shorter than the sampling step {}",
            1.0 / alpha,
            series.dt
        ));
    }
    let dropped = series.len() % opts.n_blocks;
    if dropped > 0 {
        warnings.push(format!("{dropped} trailing samples not assigned to any block"));
    }

    Ok(EstimationReport {
        country: series.country.clone(),
        n_samples: series.len(),
        dt: series.dt,
        start_time: series.times[0],
        span_years: series.span(),
        m_hat,
        alpha_hat: alpha,
        alpha_stderr: fit.alpha_stderr,
        correlation_time: 1.0 / alpha,
        sigma2_hat: fit.sigma2_hat,
        k_hat,
        mu_hat: nd.mu,
        kappa_hat: nd.kappa,
        r_inf_hat,
        regime: classify_regime(&nd, opts.regime_tol).regime,
        prob_negative_model: analytics::prob_negative_stationary(&nd),
        neg_fraction_empirical: neg.fraction,
        neg_years_empirical: neg.total_years,
        mean_negative_amplitude: neg.mean_negative_amplitude,
        mu_range: blocks.mu,
        kappa_range: blocks.kappa,
        r_inf_range: blocks.r_inf,
        blocks: blocks.blocks,
        warnings,
    })
}
