//! Real-rate construction from nominal bond yields and a CPI index.
//!
//! ```text
//! b(t) = ln(1 + nominal open annual rate)
//! c(t) = (1/T) ln[C(t + T) / C(t)]        (forward window, default T = 10y)
//! r(t) = b(t) - c(t)
//! ```
//!
//! The forward window means the last `T` years of CPI data produce no
//! inflation estimate, so the real-rate series ends `T` years before the CPI
//! series does.
//!
//! Input files are CSV with a `time,value` header, decimal-year times and one
//! file per (country, kind). Missing values are not interpolated: a gap splits
//! the series and the longest contiguous segment is kept.

use std::io::Read;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Minimum length of a series handed to the estimator.
pub const MIN_SERIES_LEN: usize = 20;
pub const DEFAULT_INFLATION_WINDOW: f64 = 10.0;
/// Accepted sampling steps: annual and quarterly.
pub const ALLOWED_SPACINGS: [f64; 2] = [1.0, 0.25];

const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    NominalOpenRate,
    CpiIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SeriesKind,
    pub country: String,
    /// Sampling step, 1.0 or 0.25 years.
    pub spacing: f64,
}

fn detect_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: times.len() });
    }
    let d = times[1] - times[0];
    ALLOWED_SPACINGS
        .iter()
        .copied()
        .find(|s| (d - s).abs() < SPACING_TOL)
        .ok_or_else(|| domain(format!("spacing {d} is neither annual nor quarterly")))
}

impl RawSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, kind: SeriesKind, country: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(domain("times and values differ in length"));
        }
        let spacing = detect_spacing(&times)?;
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(domain(format!("times not strictly increasing at {}", w[1])));
            }
            if ((w[1] - w[0]) - spacing).abs() > SPACING_TOL {
                return Err(domain(format!("non-uniform spacing at {}", w[1])));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite value {v}")));
        }
        if kind == SeriesKind::CpiIndex {
            if let Some(v) = values.iter().find(|&&v| v <= 0.0) {
                return Err(domain(format!("CPI must be positive, got {v}")));
            }
        }
        Ok(Self { times, values, kind, country: country.into(), spacing })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// A uniformly sampled derived series (`b(t)` or `c(t)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub dt: f64,
}

/// Real log-rate series ready for estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    pub dt: f64,
    pub country: String,
}

impl RateSeries {
    pub fn new(times: Vec<f64>, r: Vec<f64>, dt: f64, country: impl Into<String>) -> Result<Self> {
        if times.len() != r.len() {
            return Err(domain("times and rates differ in length"));
        }
        if r.len() < MIN_SERIES_LEN {
            return Err(Error::InsufficientData { needed: MIN_SERIES_LEN, got: r.len() });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(domain(format!("dt must be > 0, got {dt}")));
        }
        if r.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(domain("rate series contains non-finite values"));
        }
        if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > SPACING_TOL * dt.max(1.0)) {
            return Err(domain("rate series is not uniformly spaced"));
        }
        Ok(Self { times, r, dt, country: country.into() })
    }

    /// Evenly spaced series starting at `t0`.
    pub fn from_values(r: Vec<f64>, dt: f64, t0: f64, country: impl Into<String>) -> Result<Self> {
        let times = (0..r.len()).map(|i| t0 + i as f64 * dt).collect();
        Self::new(times, r, dt, country)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Years covered, counting one step per sample.
    pub fn span(&self) -> f64 {
        self.r.len() as f64 * self.dt
    }
}

/// `ln(1 + rate)` for an open (simple) annual rate.
pub fn to_log_rate(open_annual_rate: f64) -> Result<f64> {
    if !(open_annual_rate > -1.0) || !open_annual_rate.is_finite() {
        return Err(domain(format!("open annual rate must be > -1, got {open_annual_rate}")));
    }
    Ok(open_annual_rate.ln_1p())
}

/// `b(t)`: nominal open rates converted to log-rates.
pub fn nominal_log_rates(nominal: &RawSeries) -> Result<SampledSeries> {
    if nominal.kind != SeriesKind::NominalOpenRate {
        return Err(domain("expected a nominal open-rate series"));
    }
    let values = nominal.values.iter().map(|&v| to_log_rate(v)).collect::<Result<Vec<_>>>()?;
    Ok(SampledSeries { times: nominal.times.clone(), values, dt: nominal.spacing })
}

fn window_steps(spacing: f64, window: f64) -> Result<usize> {
    if !(window > 0.0) {
        return Err(domain(format!("inflation window must be > 0, got {window}")));
    }
    let lag = (window / spacing).round();
    if (lag * spacing - window).abs() > SPACING_TOL {
        return Err(domain(format!("window {window} is not a multiple of the spacing {spacing}")));
    }
    Ok(lag as usize)
}

fn inflation_unchecked(cpi: &RawSeries, window: f64) -> Result<SampledSeries> {
    if cpi.kind != SeriesKind::CpiIndex {
        return Err(domain("expected a CPI index series"));
    }
    if let Some(v) = cpi.values.iter().find(|&&v| !(v > 0.0)) {
        return Err(domain(format!("CPI must be positive, got {v}")));
    }
    let lag = window_steps(cpi.spacing, window)?;
    let n_out = cpi.len().saturating_sub(lag);
    let values = (0..n_out).map(|i| (cpi.values[i + lag] / cpi.values[i]).ln() / window).collect();
    Ok(SampledSeries { times: cpi.times[..n_out].to_vec(), values, dt: cpi.spacing })
}

/// `c(t) = (1/T) ln[C(t+T)/C(t)]` for every `t` with `t + T` in range.
pub fn inflation_log_rate(cpi: &RawSeries, window: f64) -> Result<SampledSeries> {
    let c = inflation_unchecked(cpi, window)?;
    if c.values.len() < MIN_SERIES_LEN {
        return Err(Error::InsufficientSpan(format!(
            "{} inflation points after a {window}-year window, need {MIN_SERIES_LEN}",
            c.values.len()
        )));
    }
    Ok(c)
}

fn grid_key(t: f64, spacing: f64) -> i64 {
    (t / spacing).round() as i64
}

/// `r(t) = b(t) - c(t)` on the common time grid.
pub fn real_rate_series(nominal: &RawSeries, cpi: &RawSeries, window: f64) -> Result<RateSeries> {
    if nominal.country != cpi.country {
        return Err(Error::Alignment(format!("country mismatch: {} vs {}", nominal.country, cpi.country)));
    }
    if (nominal.spacing - cpi.spacing).abs() > SPACING_TOL {
        return Err(Error::Alignment(format!("spacing mismatch: nominal {} vs CPI {}", nominal.spacing, cpi.spacing)));
    }
    let dt = nominal.spacing;
    let phase = (nominal.times[0] - cpi.times[0]) / dt;
    if (phase - phase.round()).abs() > SPACING_TOL {
        return Err(Error::Alignment("nominal and CPI grids are offset".into()));
    }
    let b = nominal_log_rates(nominal)?;
    let c = inflation_unchecked(cpi, window)?;
    if c.values.is_empty() {
        return Err(Error::Alignment(format!("CPI series is shorter than the {window}-year window")));
    }

    let b0 = grid_key(b.times[0], dt);
    let c0 = grid_key(c.times[0], dt);
    let lo = b0.max(c0);
    let hi = (b0 + b.values.len() as i64).min(c0 + c.values.len() as i64);
    let overlap = (hi - lo).max(0) as usize;
    if overlap < MIN_SERIES_LEN {
        return Err(Error::Alignment(format!(
            "only {overlap} overlapping points after the inflation window, need {MIN_SERIES_LEN}"
        )));
    }
    let (bi, ci) = ((lo - b0) as usize, (lo - c0) as usize);
    let times = b.times[bi..bi + overlap].to_vec();
    let r = (0..overlap).map(|i| b.values[bi + i] - c.values[ci + i]).collect();
    RateSeries::new(times, r, dt, nominal.country.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeRateSummary {
    pub fraction: f64,
    pub total_years: f64,
    /// Mean of |r| over negative samples only.
    pub mean_negative_amplitude: f64,
}

pub fn negative_rate_summary(series: &RateSeries) -> NegativeRateSummary {
    let negatives: Vec<f64> = series.r.iter().copied().filter(|&r| r < 0.0).collect();
    let n = series.r.len();
    let fraction = if n == 0 { 0.0 } else { negatives.len() as f64 / n as f64 };
    let mean_negative_amplitude = if negatives.is_empty() {
        0.0
    } else {
        negatives.iter().map(|r| r.abs()).sum::<f64>() / negatives.len() as f64
    };
    NegativeRateSummary { fraction, total_years: fraction * series.span(), mean_negative_amplitude }
}

fn parse_missing(field: &str) -> Option<f64> {
    let f = field.trim();
    if f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan") {
        None
    } else {
        f.parse().ok()
    }
}

/// Read a `time,value` CSV.
///
/// Rows with an empty or `NA` value, and jumps in the time grid, split the
/// series; the longest contiguous run is returned.
pub fn parse_series_csv<R: Read>(reader: R, kind: SeriesKind, country: &str) -> Result<RawSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "time" || &headers[1] != "value" {
        return Err(Error::Parse(format!(
            "expected header `time,value`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows: Vec<(f64, Option<f64>)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let t: f64 = rec[0].parse().map_err(|_| Error::Parse(format!("row {}: bad time `{}`", line + 2, &rec[0])))?;
        let v = parse_missing(&rec[1]);
        if v.is_none()
            && !rec[1].trim().is_empty()
            && !rec[1].trim().eq_ignore_ascii_case("na")
            && !rec[1].trim().eq_ignore_ascii_case("nan")
        {
            return Err(Error::Parse(format!("row {}: bad value `{}`", line + 2, &rec[1])));
        }
        rows.push((t, v));
    }
    if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Parse("times are not strictly increasing".into()));
    }
    let spacing = smallest_allowed_spacing(&rows)?;

    // split into contiguous runs of present values on the spacing grid
    let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for &(t, v) in &rows {
        match v {
            Some(v) => {
                if let Some(&(prev, _)) = current.last() {
                    if ((t - prev) - spacing).abs() > SPACING_TOL {
                        segments.push(std::mem::take(&mut current));
                    }
                }
                current.push((t, v));
            }
            None => segments.push(std::mem::take(&mut current)),
        }
    }
    segments.push(current);
    segments.retain(|s| !s.is_empty());
    if segments.len() > 1 {
        warn!("{country}: {} gaps in {kind:?} data; using the longest contiguous segment", segments.len() - 1);
    }
    // max_by_key keeps the last maximum; reverse to prefer the earliest
    let best = segments.into_iter().rev().max_by_key(|s| s.len()).ok_or_else(|| Error::Parse("no data rows".into()))?;
    let (times, values) = best.into_iter().unzip();
    RawSeries::new(times, values, kind, country)
}

fn smallest_allowed_spacing(rows: &[(f64, Option<f64>)]) -> Result<f64> {
    let min_gap = rows.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min);
    ALLOWED_SPACINGS
        .iter()
        .copied()
        .find(|s| (min_gap - s).abs() < SPACING_TOL)
        .ok_or_else(|| Error::Parse(format!("time step {min_gap} is neither annual nor quarterly")))
}

pub fn read_series_csv(path: &Path, kind: SeriesKind, country: &str) -> Result<RawSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_series_csv(file, kind, country)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn annual(values: Vec<f64>, kind: SeriesKind, t0: f64) -> RawSeries {
        let times = (0..values.len()).map(|i| t0 + i as f64).collect();
        RawSeries::new(times, values, kind, "X").unwrap()
    }

    #[test]
    fn log_rate_examples() {
        assert_eq!(to_log_rate(0.0).unwrap(), 0.0);
        assert_relative_eq!(to_log_rate(0.05).unwrap(), 0.048_790_164_169_432, max_relative = 1e-12);
        assert_relative_eq!(to_log_rate(std::f64::consts::E - 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(to_log_rate(-1.0).is_err());
        assert!(to_log_rate(-1.5).is_err());
    }

    #[test]
    fn inflation_examples() {
        let g = 0.037;
        let cpi = annual((0..60).map(|i| 100.0 * (g * i as f64).exp()).collect(), SeriesKind::CpiIndex, 1900.0);
        let c = inflation_log_rate(&cpi, 10.0).unwrap();
        assert_eq!(c.values.len(), 50);
        assert!(c.values.iter().all(|v| (v - g).abs() < 1e-14));

        let flat = annual(vec![7.0; 40], SeriesKind::CpiIndex, 1900.0);
        assert!(inflation_log_rate(&flat, 10.0).unwrap().values.iter().all(|&v| v == 0.0));

        let jump: Vec<f64> = (0..40).map(|i| if i < 10 { 1.0 } else { 0.5f64.exp() }).collect();
        let c = inflation_log_rate(&annual(jump, SeriesKind::CpiIndex, 0.0), 10.0).unwrap();
        assert_relative_eq!(c.values[0], 0.05, max_relative = 1e-14);

        let short = annual(vec![1.0; 25], SeriesKind::CpiIndex, 0.0);
        assert!(matches!(inflation_log_rate(&short, 10.0), Err(Error::InsufficientSpan(_))));
    }

    #[test]
    fn cpi_must_be_positive() {
        let times: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let mut v = vec![1.0; 30];
        v[3] = 0.0;
        assert!(RawSeries::new(times, v, SeriesKind::CpiIndex, "X").is_err());
    }

    #[test]
    fn quarterly_window_bookkeeping() {
        let times: Vec<f64> = (0..120).map(|i| 1950.0 + 0.25 * i as f64).collect();
        let cpi = RawSeries::new(times, vec![3.0; 120], SeriesKind::CpiIndex, "X").unwrap();
        assert_eq!(cpi.spacing, 0.25);
        assert_eq!(inflation_log_rate(&cpi, 10.0).unwrap().values.len(), 80);
    }

    #[test]
    fn real_rate_examples() {
        let n = 50;
        let nominal = annual(vec![0.05f64.exp_m1(); n], SeriesKind::NominalOpenRate, 1900.0);
        let cpi = annual((0..n).map(|i| (0.03 * i as f64).exp()).collect(), SeriesKind::CpiIndex, 1900.0);
        let r = real_rate_series(&nominal, &cpi, 10.0).unwrap();
        assert_eq!(r.len(), n - 10);
        assert!(r.r.iter().all(|v| (v - 0.02).abs() < 1e-14));
        assert_eq!(r.dt, 1.0);

        let nominal = annual(vec![0.02f64.exp_m1(); n], SeriesKind::NominalOpenRate, 1900.0);
        let cpi = annual((0..n).map(|i| (0.06 * i as f64).exp()).collect(), SeriesKind::CpiIndex, 1900.0);
        let r = real_rate_series(&nominal, &cpi, 10.0).unwrap();
        assert!(r.r.iter().all(|v| (v + 0.04).abs() < 1e-14));
    }

    #[test]
    fn real_rate_alignment_errors() {
        let nominal = annual(vec![0.03; 60], SeriesKind::NominalOpenRate, 1900.0);
        let q_times: Vec<f64> = (0..240).map(|i| 1900.0 + 0.25 * i as f64).collect();
        let cpi_q = RawSeries::new(q_times, vec![1.0; 240], SeriesKind::CpiIndex, "X").unwrap();
        assert!(matches!(real_rate_series(&nominal, &cpi_q, 10.0), Err(Error::Alignment(_))));

        let cpi_far = annual(vec![1.0; 60], SeriesKind::CpiIndex, 1945.0);
        assert!(matches!(real_rate_series(&nominal, &cpi_far, 10.0), Err(Error::Alignment(_))));

        let mut other = annual(vec![1.0; 60], SeriesKind::CpiIndex, 1900.0);
        other.country = "Y".into();
        assert!(matches!(real_rate_series(&nominal, &other, 10.0), Err(Error::Alignment(_))));

        let offset = annual(vec![1.0; 60], SeriesKind::CpiIndex, 1900.5);
        assert!(real_rate_series(&nominal, &offset, 10.0).is_err());
    }

    #[test]
    fn negative_summary_examples() {
        let pos = RateSeries::from_values(vec![0.01; 40], 1.0, 0.0, "X").unwrap();
        let s = negative_rate_summary(&pos);
        assert_eq!((s.fraction, s.total_years, s.mean_negative_amplitude), (0.0, 0.0, 0.0));

        let half: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { -0.02 } else { 0.02 }).collect();
        let series = RateSeries::from_values(half, 0.25, 0.0, "X").unwrap();
        let s = negative_rate_summary(&series);
        assert_eq!(s.fraction, 0.5);
        assert_eq!(s.total_years, series.span() / 2.0);
        assert_relative_eq!(s.mean_negative_amplitude, 0.02, max_relative = 1e-15);
    }

    #[test]
    fn csv_parsing_and_gaps() {
        let text = "time,value\n1900,1.0\n1901,1.1\n1902,\n1903,1.2\n1904,1.3\n1905,1.4\n1907,1.5\n1908,1.6\n";
        let s = parse_series_csv(text.as_bytes(), SeriesKind::CpiIndex, "X").unwrap();
        assert_eq!(s.times, vec![1903.0, 1904.0, 1905.0]);
        assert_eq!(s.values, vec![1.2, 1.3, 1.4]);

        let q = "time,value\n1820.0,0.05\n1820.25,0.051\n1820.5,0.049\n";
        let s = parse_series_csv(q.as_bytes(), SeriesKind::NominalOpenRate, "X").unwrap();
        assert_eq!(s.spacing, 0.25);

        assert!(parse_series_csv("t,v\n1,2\n2,3\n".as_bytes(), SeriesKind::CpiIndex, "X").is_err());
        assert!(parse_series_csv("time,value\n1900,abc\n1901,1\n".as_bytes(), SeriesKind::CpiIndex, "X").is_err());
        assert!(parse_series_csv("time,value\n1900,1\n1899,1\n".as_bytes(), SeriesKind::CpiIndex, "X").is_err());
        assert!(parse_series_csv("time,value\n1900,1\n1900.5,1\n".as_bytes(), SeriesKind::CpiIndex, "X").is_err());
    }

    proptest! {
        #[test]
        fn inflation_invariant_under_cpi_rescaling(
            growth in proptest::collection::vec(-0.2f64..0.3, 40..80),
            lambda in 1e-3f64..1e3,
        ) {
            let mut level = 100.0;
            let values: Vec<f64> = growth.iter().map(|g| { level *= g.exp(); level }).collect();
            let scaled: Vec<f64> = values.iter().map(|v| v * lambda).collect();
            let a = inflation_log_rate(&annual(values, SeriesKind::CpiIndex, 0.0), 10.0).unwrap();
            let b = inflation_log_rate(&annual(scaled, SeriesKind::CpiIndex, 0.0), 10.0).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-13);
            }
        }

        #[test]
        fn real_rate_plus_inflation_reconstructs_nominal(
            rates in proptest::collection::vec(-0.05f64..0.2, 50),
            growth in proptest::collection::vec(-0.1f64..0.4, 50),
            quarterly in any::<bool>(),
        ) {
            let dt = if quarterly { 0.25 } else { 1.0 };
            let times: Vec<f64> = (0..50).map(|i| 1800.0 + dt * i as f64).collect();
            let mut level = 1.0;
            let cpi_vals: Vec<f64> = growth.iter().map(|g| { level *= (g * dt).exp(); level }).collect();
            let nominal = RawSeries::new(times.clone(), rates.clone(), SeriesKind::NominalOpenRate, "X").unwrap();
            let cpi = RawSeries::new(times, cpi_vals, SeriesKind::CpiIndex, "X").unwrap();
            let window = if quarterly { 5.0 } else { 10.0 };
            let r = real_rate_series(&nominal, &cpi, window).unwrap();
            let c = inflation_unchecked(&cpi, window).unwrap();
            let lag = (window / dt) as usize;
            prop_assert_eq!(r.len(), 50 - lag);
            for (i, &rate) in rates.iter().enumerate().take(r.len()) {
                let b = to_log_rate(rate).unwrap();
                prop_assert!((r.r[i] + c.values[i] - b).abs() < 1e-12);
            }
        }
    }
}
