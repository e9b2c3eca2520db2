//! Monte Carlo estimation of `D(t) = E[exp(-∫₀ᵗ r(s) ds)]`.
//!
//! Each path draws from its own ChaCha stream, keyed by the run seed and the
//! path index, so a path's randomness does not depend on which worker runs it.
//! Paths are grouped into batches; batch statistics are merged strictly in
//! batch order. Results are therefore bit-identical across thread counts.
//!
//! The integral `x(t) = ∫r` is accumulated with the trapezoid rule on the
//! simulation grid. Averages of `e^{-x}` are kept in a shifted (log-sum-exp)
//! representation so very large or very small discount factors do not
//! overflow.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analytics::{self, Regime, RegimeLabel};
use crate::error::{Error, Result};
use crate::models::{self, ModelKind, OuParams, ValidatedModel};
use crate::pipeline::RateSeries;

/// Default cap on `n_paths × n_steps`.
pub const DEFAULT_MAX_PATH_STEPS: u128 = 20_000_000_000;

/// Largest Feller step, in units of 1/α, used without an explicit override.
pub const FELLER_MAX_DT_ALPHA: f64 = 0.1;

/// Burn-in before stationary sampling, in units of the correlation time.
pub const BURN_IN_CORRELATION_TIMES: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub batch_size: usize,
    pub max_path_steps: u128,
    /// Worker count; `None` uses the global pool. Never changes results.
    pub threads: Option<usize>,
    /// Keep a Feller `dt` coarser than `0.1/α` instead of refining it.
    pub allow_coarse_feller_dt: bool,
}

impl McConfig {
    pub fn new(n_paths: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        Self {
            n_paths,
            dt,
            horizon,
            seed,
            batch_size: 1024,
            max_path_steps: DEFAULT_MAX_PATH_STEPS,
            threads: None,
            allow_coarse_feller_dt: false,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::Domain(format!("n_paths must be >= 2, got {}", self.n_paths)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Domain(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return Err(Error::Domain(format!(
                "horizon must be >= dt, got horizon {} with dt {}",
                self.horizon, self.dt
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Domain("batch_size must be >= 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Domain("threads must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of whole steps that fit in the horizon.
    pub fn n_steps(&self) -> usize {
        ((self.horizon / self.dt) * (1.0 + 1e-12)).floor() as usize
    }

    /// `n` sample times, evenly spread over the horizon and lying on the grid,
    /// starting at 0.
    pub fn grid_times(&self, n: usize) -> Vec<f64> {
        let steps = self.n_steps();
        if n <= 1 {
            return vec![0.0];
        }
        let mut out: Vec<usize> = (0..n).map(|i| i * steps / (n - 1)).collect();
        out.dedup();
        out.into_iter().map(|i| i as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveSource {
    ClosedForm,
    MonteCarlo,
}

impl CurveSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveSource::ClosedForm => "closed-form",
            CurveSource::MonteCarlo => "monte-carlo",
        }
    }
}

/// Sampled discount function.
///
/// `ln_d` and `rel_errors` (standard error divided by the estimate) are the
/// primary storage; `d_values` and `std_errors` are their exponentiated
/// forms and may saturate to `+∞` for explosive models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscountCurve {
    pub times: Vec<f64>,
    pub d_values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub ln_d: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub source: CurveSource,
    pub model: ModelKind,
}

impl DiscountCurve {
    /// Exact OU curve; standard errors are zero.
    pub fn closed_form(p: &OuParams, times: &[f64]) -> Result<Self> {
        p.validate()?;
        check_times(times)?;
        let mut ln_d = Vec::with_capacity(times.len());
        for &t in times {
            ln_d.push(match analytics::log_discount_exact(p, t) {
                Ok(v) => v,
                Err(Error::Overflow(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            });
        }
        let n = times.len();
        Ok(Self {
            times: times.to_vec(),
            d_values: ln_d.iter().map(|v| v.exp()).collect(),
            std_errors: vec![0.0; n],
            ln_d,
            rel_errors: vec![0.0; n],
            source: CurveSource::ClosedForm,
            model: ModelKind::Ou(*p),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(D̂ - D)/σ̂` at point `i` against an exact `ln D`, computed in a
    /// scale-free way. Zero when both agree and the error is zero.
    pub fn z_score(&self, i: usize, exact_ln_d: f64) -> f64 {
        let diff = 1.0 - (exact_ln_d - self.ln_d[i]).exp();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.rel_errors[i]
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::Domain("curve times must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("curve times must be strictly increasing".into()));
    }
    Ok(())
}

/// Welford-style accumulator of `e^{y}` held relative to a shift `e^{c}`.
#[derive(Debug, Clone, Copy)]
struct ShiftedMoments {
    n: u64,
    shift: f64,
    mean: f64,
    m2: f64,
}

impl ShiftedMoments {
    const EMPTY: Self = Self { n: 0, shift: f64::NEG_INFINITY, mean: 0.0, m2: 0.0 };

    fn from_logs(logs: &[f64]) -> Self {
        if logs.is_empty() {
            return Self::EMPTY;
        }
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n = logs.len() as f64;
        let mean = logs.iter().map(|y| (y - shift).exp()).sum::<f64>() / n;
        let m2 = logs.iter().map(|y| ((y - shift).exp() - mean).powi(2)).sum();
        Self { n: logs.len() as u64, shift, mean, m2 }
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let shift = self.shift.max(other.shift);
        let sa = (self.shift - shift).exp();
        let sb = (other.shift - shift).exp();
        let (ma, mb) = (self.mean * sa, other.mean * sb);
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = mb - ma;
        Self {
            n: self.n + other.n,
            shift,
            mean: ma + delta * nb / n,
            m2: self.m2 * sa * sa + other.m2 * sb * sb + delta * delta * na * nb / n,
        }
    }

    /// `(ln mean, standard error / mean)`.
    fn finish(&self) -> (f64, f64) {
        let n = self.n as f64;
        let ln_mean = self.shift + self.mean.ln();
        let var = self.m2 / (n - 1.0);
        let rel = if self.m2 == 0.0 { 0.0 } else { (var / n).sqrt() / self.mean };
        (ln_mean, rel)
    }
}

/// Grid used for a given model, after any Feller refinement.
struct Grid {
    dt: f64,
    n_steps: usize,
    /// Fine steps per requested step.
    substeps: usize,
}

fn simulation_grid(model: &ValidatedModel, cfg: &McConfig) -> Grid {
    let mut substeps = 1;
    if let (ModelKind::Feller(p), false) = (model.kind(), cfg.allow_coarse_feller_dt) {
        let limit = FELLER_MAX_DT_ALPHA / p.alpha;
        if cfg.dt > limit * (1.0 + 1e-12) {
            substeps = (cfg.dt / limit).ceil() as usize;
            warn!(
                "Feller dt {} exceeds {FELLER_MAX_DT_ALPHA}/alpha = {limit}; refining by a factor {substeps}",
                cfg.dt
            );
        }
    }
    Grid { dt: cfg.dt / substeps as f64, n_steps: cfg.n_steps() * substeps, substeps }
}

fn check_budget(cfg: &McConfig, grid: &Grid) -> Result<()> {
    let requested = cfg.n_paths as u128 * grid.n_steps as u128;
    if requested > cfg.max_path_steps {
        return Err(Error::Budget { requested, cap: cfg.max_path_steps });
    }
    Ok(())
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Run `f` over batch indices, in parallel when available, returning results
/// in batch order.
fn map_batches<T, F>(n_batches: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..n_batches).into_par_iter().map(&f).collect::<Vec<T>>();
        match threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
                Ok(pool.install(run))
            }
            None => Ok(run()),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok((0..n_batches).map(f).collect())
    }
}

fn batch_bounds(cfg: &McConfig, batch: usize) -> std::ops::Range<usize> {
    let start = batch * cfg.batch_size;
    start..(start + cfg.batch_size).min(cfg.n_paths)
}

/// Monte Carlo discount curve.
///
/// `sample_times` must lie on the `cfg.dt` grid within the horizon. A leading
/// `t = 0` is added when absent so that the curve always starts at `D(0) = 1`.
pub fn estimate_discount(model: ModelKind, cfg: &McConfig, sample_times: &[f64]) -> Result<DiscountCurve> {
    let model = models::validate(model)?;
    cfg.validate()?;
    let grid = simulation_grid(&model, cfg);
    check_budget(cfg, &grid)?;

    let mut times = sample_times.to_vec();
    if times.first() != Some(&0.0) {
        times.insert(0, 0.0);
    }
    check_times(&times)?;
    let coarse_steps = cfg.n_steps();
    let mut sample_steps = Vec::with_capacity(times.len());
    for &t in &times {
        let idx = (t / cfg.dt).round();
        if (idx * cfg.dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Domain(format!("sample time {t} is not a multiple of dt {}", cfg.dt)));
        }
        let idx = idx as usize;
        if idx > coarse_steps {
            return Err(Error::Domain(format!("sample time {t} beyond horizon {}", cfg.horizon)));
        }
        sample_steps.push(idx * grid.substeps);
    }
    let last_step = *sample_steps.last().unwrap_or(&0);
    let n_times = times.len();

    let n_batches = cfg.n_paths.div_ceil(cfg.batch_size);
    let batches = map_batches(n_batches, cfg.threads, |b| {
        let range = batch_bounds(cfg, b);
        // logs[j * batch_len + i] = -x_i(t_j)
        let batch_len = range.len();
        let mut logs = vec![0.0; n_times * batch_len];
        for (i, path) in range.enumerate() {
            let mut rng = path_rng(cfg.seed, path as u64);
            let mut r = model.initial_rate();
            let mut x = 0.0;
            let mut j = 0;
            while j < n_times && sample_steps[j] == 0 {
                logs[j * batch_len + i] = 0.0;
                j += 1;
            }
            for step in 1..=last_step {
                let z: f64 = StandardNormal.sample(&mut rng);
                let next = model.step(r, grid.dt, z);
                x += 0.5 * (r + next) * grid.dt;
                r = next;
                while j < n_times && sample_steps[j] == step {
                    logs[j * batch_len + i] = -x;
                    j += 1;
                }
            }
        }
        (0..n_times).map(|j| ShiftedMoments::from_logs(&logs[j * batch_len..(j + 1) * batch_len])).collect::<Vec<_>>()
    })?;

    let mut totals = vec![ShiftedMoments::EMPTY; n_times];
    for batch in batches {
        for (acc, part) in totals.iter_mut().zip(batch) {
            *acc = acc.merge(part);
        }
    }

    let mut ln_d = Vec::with_capacity(n_times);
    let mut rel_errors = Vec::with_capacity(n_times);
    for m in &totals {
        let (l, rel) = m.finish();
        ln_d.push(l);
        rel_errors.push(rel);
    }
    // D(0) = 1 with no uncertainty by construction
    ln_d[0] = 0.0;
    rel_errors[0] = 0.0;
    let d_values: Vec<f64> = ln_d.iter().map(|l| l.exp()).collect();
    let std_errors = d_values.iter().zip(&rel_errors).map(|(d, r)| d * r).collect();
    Ok(DiscountCurve {
        times,
        d_values,
        std_errors,
        ln_d,
        rel_errors,
        source: CurveSource::MonteCarlo,
        model: *model.kind(),
    })
}

/// Rate of every path at the end of the horizon.
pub fn terminal_rates(model: ModelKind, cfg: &McConfig) -> Result<Vec<f64>> {
    let model = models::validate(model)?;
    cfg.validate()?;
    let grid = simulation_grid(&model, cfg);
    check_budget(cfg, &grid)?;
    let n_batches = cfg.n_paths.div_ceil(cfg.batch_size);
    let batches = map_batches(n_batches, cfg.threads, |b| {
        batch_bounds(cfg, b)
            .map(|path| {
                let mut rng = path_rng(cfg.seed, path as u64);
                let mut r = model.initial_rate();
                for _ in 0..grid.n_steps {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    r = model.step(r, grid.dt, z);
                }
                r
            })
            .collect::<Vec<_>>()
    })?;
    Ok(batches.into_iter().flatten().collect())
}

/// One path sampled every `dt`: `n` rates starting with `r(dt)`.
pub fn simulate_path(model: ModelKind, dt: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let model = models::validate(model)?;
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    let mut rng = path_rng(seed, 0);
    let mut r = model.initial_rate();
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            r = model.step(r, dt, z);
            r
        })
        .collect())
}

/// Synthetic OU real-rate series, exact in distribution.
pub fn simulate_ou_series(p: &OuParams, dt: f64, n: usize, seed: u64, country: &str) -> Result<RateSeries> {
    let r = simulate_path(ModelKind::Ou(*p), dt, n, seed)?;
    RateSeries::from_values(r, dt, 0.0, country)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub fraction: f64,
    pub negatives: u64,
    pub samples: u64,
}

impl Occupancy {
    /// Binomial standard error, valid when the samples are independent.
    pub fn binomial_stderr(&self) -> f64 {
        (self.fraction * (1.0 - self.fraction) / self.samples as f64).sqrt()
    }
}

/// Fraction of simulated `(path, step)` samples with a negative rate, after a
/// burn-in of five correlation times (none for the log-normal model).
pub fn negative_rate_occupancy(model: ModelKind, cfg: &McConfig) -> Result<Occupancy> {
    let model = models::validate(model)?;
    cfg.validate()?;
    let grid = simulation_grid(&model, cfg);
    check_budget(cfg, &grid)?;
    let burn_in = model.reversion().map_or(0.0, |a| BURN_IN_CORRELATION_TIMES / a);
    // first coarse step at or after the burn-in
    let first = ((burn_in / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let coarse_steps = cfg.n_steps();
    if first > coarse_steps {
        return Err(Error::InsufficientSpan(format!("horizon {} does not exceed the burn-in {burn_in}", cfg.horizon)));
    }

    let n_batches = cfg.n_paths.div_ceil(cfg.batch_size);
    let counts = map_batches(n_batches, cfg.threads, |b| {
        let mut neg = 0u64;
        let mut total = 0u64;
        for path in batch_bounds(cfg, b) {
            let mut rng = path_rng(cfg.seed, path as u64);
            let mut r = model.initial_rate();
            for fine in 1..=grid.n_steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                r = model.step(r, grid.dt, z);
                if fine % grid.substeps == 0 && fine / grid.substeps >= first {
                    total += 1;
                    neg += u64::from(r < 0.0);
                }
            }
        }
        (neg, total)
    })?;
    let (negatives, samples) = counts.into_iter().fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    Ok(Occupancy { fraction: negatives as f64 / samples as f64, negatives, samples })
}

/// Long-run behaviour read off the tail of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRunFit {
    /// Regime; the label's tolerance is the slope threshold used.
    pub label: RegimeLabel,
    /// Fitted long-run rate, `-slope` of `ln D`.
    pub rate: f64,
    pub slope_stderr: f64,
    /// Slope not distinguishable from zero; the label is then
    /// `AsymptoticallyConstant`.
    pub inconclusive: bool,
    pub points_used: usize,
}

/// Least-squares slope of `ln D` over the final third of the horizon.
///
/// The slope is significant when it exceeds twice its standard error, which
/// is propagated from the per-point relative errors (zero for closed-form
/// curves).
pub fn classify_longrun_empirical(curve: &DiscountCurve) -> Result<LongRunFit> {
    let horizon = *curve.times.last().ok_or(Error::InsufficientData { needed: 10, got: 0 })?;
    let start = horizon - horizon / 3.0;
    let idx: Vec<usize> = (0..curve.len()).filter(|&i| curve.times[i] >= start - 1e-12 * horizon).collect();
    if idx.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: idx.len() });
    }
    if idx.iter().any(|&i| !curve.ln_d[i].is_finite()) {
        return Err(Error::Overflow("ln D is not finite in the fitted window".into()));
    }
    let n = idx.len() as f64;
    let t_mean = idx.iter().map(|&i| curve.times[i]).sum::<f64>() / n;
    let y_mean = idx.iter().map(|&i| curve.ln_d[i]).sum::<f64>() / n;
    let sxx: f64 = idx.iter().map(|&i| (curve.times[i] - t_mean).powi(2)).sum();
    let slope = idx.iter().map(|&i| (curve.times[i] - t_mean) * (curve.ln_d[i] - y_mean)).sum::<f64>() / sxx;
    // ln D̂ has standard error ≈ σ̂/D̂
    let slope_var: f64 =
        idx.iter().map(|&i| ((curve.times[i] - t_mean) / sxx).powi(2) * curve.rel_errors[i].powi(2)).sum();
    let slope_stderr = slope_var.sqrt();
    let threshold = 2.0 * slope_stderr;
    let inconclusive = slope.abs() <= threshold;
    let regime = if inconclusive {
        Regime::AsymptoticallyConstant
    } else if slope < 0.0 {
        Regime::ExponentialDecay
    } else {
        Regime::ExponentialGrowth
    };
    Ok(LongRunFit {
        label: RegimeLabel { regime, tolerance: threshold },
        rate: -slope,
        slope_stderr,
        inconclusive,
        points_used: idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FellerParams, LognormalParams};
    use approx::assert_relative_eq;

    fn ou(m: f64, alpha: f64, k: f64, r0: f64) -> ModelKind {
        ModelKind::Ou(OuParams::new(m, alpha, k, r0).unwrap())
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(1, 0.1, 1.0, 0).validate().is_err());
        assert!(McConfig::new(10, 0.0, 1.0, 0).validate().is_err());
        assert!(McConfig::new(10, 0.5, 0.1, 0).validate().is_err());
        assert!(McConfig::new(10, 0.1, 1.0, 0).with_batch_size(0).validate().is_err());
        assert!(McConfig::new(10, 0.1, 1.0, 0).validate().is_ok());
        assert_eq!(McConfig::new(10, 0.1, 1.0, 0).n_steps(), 10);
        assert_eq!(McConfig::new(10, 1.0 / 64.0, 10.0, 0).n_steps(), 640);
    }

    #[test]
    fn grid_times_lie_on_grid() {
        let cfg = McConfig::new(10, 0.25, 10.0, 0);
        let t = cfg.grid_times(5);
        assert_eq!(t, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn deterministic_rate_is_exact() {
        let cfg = McConfig::new(64, 1.0 / 64.0, 10.0, 7).with_batch_size(10);
        let curve = estimate_discount(ou(0.03, 0.5, 0.0, 0.03), &cfg, &[5.0, 10.0]).unwrap();
        assert_eq!(curve.times, vec![0.0, 5.0, 10.0]);
        assert_eq!(curve.d_values[0], 1.0);
        assert_relative_eq!(curve.d_values[2], (-0.3f64).exp(), max_relative = 1e-12);
        assert_eq!(curve.std_errors, vec![0.0; 3]);
    }

    #[test]
    fn rejects_off_grid_and_out_of_range_times() {
        let cfg = McConfig::new(8, 0.5, 5.0, 1);
        let m = ou(0.03, 0.5, 0.01, 0.03);
        assert!(estimate_discount(m, &cfg, &[0.0, 0.3]).is_err());
        assert!(estimate_discount(m, &cfg, &[0.0, 5.5]).is_err());
        assert!(estimate_discount(m, &cfg, &[0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn budget_enforced() {
        let mut cfg = McConfig::new(1000, 0.01, 10.0, 1);
        cfg.max_path_steps = 999_999;
        let err = estimate_discount(ou(0.03, 0.5, 0.01, 0.03), &cfg, &[10.0]).unwrap_err();
        assert_eq!(err, Error::Budget { requested: 1_000_000, cap: 999_999 });
    }

    #[test]
    fn shifted_moments_merge_matches_direct() {
        let logs: Vec<f64> = (0..100).map(|i| -0.5 + 0.013 * i as f64).collect();
        let whole = ShiftedMoments::from_logs(&logs);
        let merged = ShiftedMoments::from_logs(&logs[..37]).merge(ShiftedMoments::from_logs(&logs[37..]));
        let (l1, r1) = whole.finish();
        let (l2, r2) = merged.finish();
        assert_relative_eq!(l1, l2, max_relative = 1e-14);
        assert_relative_eq!(r1, r2, max_relative = 1e-12);

        let direct_mean = logs.iter().map(|y| y.exp()).sum::<f64>() / 100.0;
        assert_relative_eq!(l1, direct_mean.ln(), max_relative = 1e-14);
    }

    #[test]
    fn huge_discount_factors_do_not_overflow() {
        let logs = [800.0, 801.0, 799.5];
        let (l, rel) = ShiftedMoments::from_logs(&logs).finish();
        assert!(l.is_finite() && l > 800.0);
        assert!(rel.is_finite() && rel > 0.0);
    }

    #[test]
    fn matches_closed_form_moderate_run() {
        let p = OuParams::new(0.03, 0.5, 0.02, 0.03).unwrap();
        let cfg = McConfig::new(20_000, 1.0 / 64.0, 10.0, 11);
        let curve = estimate_discount(ModelKind::Ou(p), &cfg, &cfg.grid_times(6)).unwrap();
        for (i, &t) in curve.times.iter().enumerate().skip(1) {
            let z = curve.z_score(i, analytics::log_discount_exact(&p, t).unwrap());
            assert!(z.abs() < 4.0, "t={t}: z={z}");
        }
    }

    #[test]
    fn feller_occupancy_zero_and_symmetric_ou() {
        let cfg = McConfig::new(500, 0.05, 20.0, 3);
        let feller = ModelKind::Feller(FellerParams::new(0.01, 0.5, 0.3, 0.01).unwrap());
        assert_eq!(negative_rate_occupancy(feller, &cfg).unwrap().fraction, 0.0);

        // m = 0: symmetric stationary law
        let cfg = McConfig::new(100_000, 10.0, 10.0, 5);
        let occ = negative_rate_occupancy(ou(0.0, 0.5, 0.1, 0.0), &cfg).unwrap();
        assert_eq!(occ.samples, 100_000);
        assert!((occ.fraction - 0.5).abs() < 0.01, "{}", occ.fraction);
    }

    #[test]
    fn occupancy_requires_span_past_burn_in() {
        let cfg = McConfig::new(10, 0.5, 5.0, 0);
        assert!(matches!(negative_rate_occupancy(ou(0.0, 0.5, 0.1, 0.0), &cfg), Err(Error::InsufficientSpan(_))));
    }

    #[test]
    fn feller_grid_refined_unless_overridden() {
        let m = models::validate(ModelKind::Feller(FellerParams::new(0.03, 1.0, 0.1, 0.03).unwrap())).unwrap();
        let mut cfg = McConfig::new(10, 0.25, 1.0, 0);
        let g = simulation_grid(&m, &cfg);
        assert_eq!((g.substeps, g.n_steps), (3, 12));
        cfg.allow_coarse_feller_dt = true;
        assert_eq!(simulation_grid(&m, &cfg).substeps, 1);
    }

    #[test]
    fn longrun_fit_on_exact_exponential() {
        let times: Vec<f64> = (0..=60).map(|i| i as f64).collect();
        let curve = DiscountCurve {
            ln_d: times.iter().map(|t| -0.02 * t).collect(),
            d_values: times.iter().map(|t| (-0.02 * t).exp()).collect(),
            std_errors: vec![0.0; times.len()],
            rel_errors: vec![0.0; times.len()],
            times,
            source: CurveSource::ClosedForm,
            model: ou(0.02, 1.0, 0.0, 0.02),
        };
        let fit = classify_longrun_empirical(&curve).unwrap();
        assert!((fit.rate - 0.02).abs() < 1e-9);
        assert_eq!(fit.label.regime, Regime::ExponentialDecay);
        assert!(!fit.inconclusive);
    }

    #[test]
    fn longrun_fit_needs_ten_tail_points() {
        let p = OuParams::new(0.02, 1.0, 0.0, 0.02).unwrap();
        let curve = DiscountCurve::closed_form(&p, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(matches!(classify_longrun_empirical(&curve), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn lognormal_terminal_rates_positive() {
        let m = ModelKind::Lognormal(LognormalParams::new(0.0, 0.8, 0.05).unwrap());
        let rates = terminal_rates(m, &McConfig::new(2000, 0.1, 20.0, 9)).unwrap();
        assert_eq!(rates.len(), 2000);
        assert!(rates.iter().all(|&r| r > 0.0));
    }
}
