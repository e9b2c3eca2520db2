//! Command implementations behind the `stochdisc` binary.
//!
//! Every command is split into a pure computation (`run_*`, returning plain
//! data) and a writer, so the numbers can be checked without touching disk.
//! File output is deterministic: fixed column order, shortest round-trip
//! float formatting, countries in sorted order.

pub mod config;
mod table;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{self, classify_regime, NondimParams, Regime};
use crate::error::{Error, Result};
use crate::estimator::{build_report_with, EstimationReport};
use crate::models::{self, ModelKind, OuParams};
use crate::montecarlo::{estimate_discount, DiscountCurve, McConfig};
use crate::pipeline::{read_series_csv, real_rate_series, SeriesKind};

pub use config::RunConfig;
pub use table::{format_percent, render_table};

/// Bundled JSON schema for [`EstimationReport`] files.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/estimation_report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    ClosedForm,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// File-name-safe form of a country label.
pub fn file_stem(country: &str) -> String {
    country.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryFailure {
    pub country: String,
    pub error: String,
}

/// Column means over a group of countries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub label: String,
    pub count: usize,
    /// Countries with `r∞` within the regime tolerance of zero, counted stable.
    pub boundary_count: usize,
    pub neg_fraction_empirical: f64,
    pub neg_years_empirical: f64,
    pub mean_negative_amplitude: f64,
    pub m_hat: f64,
    pub correlation_time: f64,
    pub k_hat: f64,
    pub mu_hat: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub kappa_hat: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub r_inf_hat: f64,
    pub r_inf_min: f64,
    pub r_inf_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub reports: Vec<EstimationReport>,
    pub failures: Vec<CountryFailure>,
    pub aggregates: Vec<AggregateRow>,
}

impl FitOutcome {
    /// 0 when every country succeeded, 2 when some failed, 1 when all failed.
    pub fn exit_code(&self) -> i32 {
        match (self.reports.is_empty(), self.failures.is_empty()) {
            (_, true) => 0,
            (true, false) => 1,
            (false, false) => 2,
        }
    }
}

pub fn fit_country(name: &str, spec: &config::CountrySpec, cfg: &RunConfig) -> Result<EstimationReport> {
    let nominal = read_series_csv(&spec.nominal, SeriesKind::NominalOpenRate, name)?;
    let cpi = read_series_csv(&spec.cpi, SeriesKind::CpiIndex, name)?;
    let series = real_rate_series(&nominal, &cpi, cfg.inflation_window)?;
    let mut report = build_report_with(&series, &cfg.estimator_options())?;
    report.warnings.push(format!(
        "forward {}-year inflation window: real rates end {} years before the last CPI observation",
        cfg.inflation_window, cfg.inflation_window
    ));
    Ok(report)
}

fn map_countries<T: Send, F>(names: &[(&String, &config::CountrySpec)], f: F) -> Vec<T>
where
    F: Fn(&str, &config::CountrySpec) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        names.par_iter().map(|(n, s)| f(n, s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        names.iter().map(|(n, s)| f(n, s)).collect()
    }
}

/// Fit every configured country. Failures are collected, not propagated.
pub fn run_fit(cfg: &RunConfig) -> FitOutcome {
    let entries: Vec<_> = cfg.countries.iter().collect();
    let results = map_countries(&entries, |name, spec| fit_country(name, spec, cfg));
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for ((name, _), res) in entries.iter().zip(results) {
        match res {
            Ok(r) => reports.push(r),
            Err(e) => {
                log::error!("{name}: {e}");
                failures.push(CountryFailure { country: (*name).clone(), error: e.to_string() });
            }
        }
    }
    let aggregates = aggregate_rows(&reports);
    FitOutcome { reports, failures, aggregates }
}

fn mean_of(reports: &[&EstimationReport], f: impl Fn(&EstimationReport) -> f64) -> f64 {
    if reports.is_empty() {
        return f64::NAN;
    }
    reports.iter().map(|r| f(r)).sum::<f64>() / reports.len() as f64
}

fn aggregate(label: &str, group: &[&EstimationReport]) -> AggregateRow {
    AggregateRow {
        label: label.to_string(),
        count: group.len(),
        boundary_count: group.iter().filter(|r| r.regime == Regime::AsymptoticallyConstant).count(),
        neg_fraction_empirical: mean_of(group, |r| r.neg_fraction_empirical),
        neg_years_empirical: mean_of(group, |r| r.neg_years_empirical),
        mean_negative_amplitude: mean_of(group, |r| r.mean_negative_amplitude),
        m_hat: mean_of(group, |r| r.m_hat),
        correlation_time: mean_of(group, |r| r.correlation_time),
        k_hat: mean_of(group, |r| r.k_hat),
        mu_hat: mean_of(group, |r| r.mu_hat),
        mu_min: mean_of(group, |r| r.mu_range.min),
        mu_max: mean_of(group, |r| r.mu_range.max),
        kappa_hat: mean_of(group, |r| r.kappa_hat),
        kappa_min: mean_of(group, |r| r.kappa_range.min),
        kappa_max: mean_of(group, |r| r.kappa_range.max),
        r_inf_hat: mean_of(group, |r| r.r_inf_hat),
        r_inf_min: mean_of(group, |r| r.r_inf_range.min),
        r_inf_max: mean_of(group, |r| r.r_inf_range.max),
    }
}

/// "all countries", "stable" and "unstable" rows.
///
/// Stability follows the report's regime: growth is unstable; decay and the
/// boundary band are stable, with boundary cases counted in `boundary_count`.
pub fn aggregate_rows(reports: &[EstimationReport]) -> Vec<AggregateRow> {
    let all: Vec<&EstimationReport> = reports.iter().collect();
    let (unstable, stable): (Vec<&EstimationReport>, Vec<&EstimationReport>) =
        all.iter().partition(|r| r.regime == Regime::ExponentialGrowth);
    vec![aggregate("all countries", &all), aggregate("stable", &stable), aggregate("unstable", &unstable)]
}

const REPORT_CSV_HEADER: [&str; 27] = [
    "country",
    "n_samples",
    "dt",
    "start_time",
    "span_years",
    "m_hat",
    "alpha_hat",
    "alpha_stderr",
    "correlation_time",
    "sigma2_hat",
    "k_hat",
    "mu_hat",
    "kappa_hat",
    "r_inf_hat",
    "regime",
    "prob_negative_model",
    "neg_fraction_empirical",
    "neg_years_empirical",
    "mean_negative_amplitude",
    "mu_min",
    "mu_max",
    "kappa_min",
    "kappa_max",
    "r_inf_min",
    "r_inf_max",
    "n_blocks",
    "warnings",
];

fn report_csv_row(r: &EstimationReport) -> Vec<String> {
    let nums = [
        r.dt,
        r.start_time,
        r.span_years,
        r.m_hat,
        r.alpha_hat,
        r.alpha_stderr,
        r.correlation_time,
        r.sigma2_hat,
        r.k_hat,
        r.mu_hat,
        r.kappa_hat,
        r.r_inf_hat,
    ];
    let mut row = vec![r.country.clone(), r.n_samples.to_string()];
    row.extend(nums.iter().map(|&v| fmt_num(v)));
    row.push(r.regime.to_string());
    row.extend(
        [
            r.prob_negative_model,
            r.neg_fraction_empirical,
            r.neg_years_empirical,
            r.mean_negative_amplitude,
            r.mu_range.min,
            r.mu_range.max,
            r.kappa_range.min,
            r.kappa_range.max,
            r.r_inf_range.min,
            r.r_inf_range.max,
        ]
        .iter()
        .map(|&v| fmt_num(v)),
    );
    row.push(r.blocks.len().to_string());
    row.push(r.warnings.join("; "));
    row
}

pub fn reports_csv(reports: &[EstimationReport]) -> Result<String> {
    let header = REPORT_CSV_HEADER.iter().map(|s| s.to_string()).collect();
    csv_string(std::iter::once(header).chain(reports.iter().map(report_csv_row)))
}

#[derive(Serialize)]
struct Summary<'a> {
    aggregates: &'a [AggregateRow],
    failures: &'a [CountryFailure],
}

fn curve_times(horizon: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect()
}

/// Write per-country reports, the summary and per-country discount curves.
pub fn write_fit_outputs(
    outcome: &FitOutcome,
    cfg: &RunConfig,
    out: &Path,
    format: OutputFormat,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for r in &outcome.reports {
        let stem = file_stem(&r.country);
        written.push(match format {
            OutputFormat::Json => write_file(&out.join(format!("report_{stem}.json")), &to_json(r)?)?,
            OutputFormat::Csv => {
                write_file(&out.join(format!("report_{stem}.csv")), &reports_csv(std::slice::from_ref(r))?)?
            }
        });

        let params = OuParams::at_mean(r.m_hat, r.alpha_hat, r.k_hat)?;
        let req = CurveRequest {
            model: ModelKind::Ou(params),
            t_max: cfg.curve.horizon,
            points: cfg.curve.points,
            engine: cfg.curve.engine,
            mc: McOptions {
                paths: cfg.mc.paths,
                seed,
                dt: Some(cfg.mc.dt_alpha / r.alpha_hat),
                threads,
                allow_coarse_feller_dt: false,
                max_path_steps: cfg.mc.max_path_steps,
            },
        };
        match run_curve(&req) {
            Ok(curves) => written.extend(write_curves(&curves, out, format, &format!("curve_{stem}"))?),
            Err(e) => log::warn!("{}: curve not written: {e}", r.country),
        }
    }
    let summary = Summary { aggregates: &outcome.aggregates, failures: &outcome.failures };
    written.push(match format {
        OutputFormat::Json => write_file(&out.join("summary.json"), &to_json(&summary)?)?,
        OutputFormat::Csv => write_file(&out.join("summary.csv"), &aggregates_csv(&outcome.aggregates)?)?,
    });
    Ok(written)
}

fn aggregates_csv(rows: &[AggregateRow]) -> Result<String> {
    let header = [
        "label",
        "count",
        "boundary_count",
        "neg_fraction_empirical",
        "neg_years_empirical",
        "mean_negative_amplitude",
        "m_hat",
        "correlation_time",
        "k_hat",
        "mu_hat",
        "mu_min",
        "mu_max",
        "kappa_hat",
        "kappa_min",
        "kappa_max",
        "r_inf_hat",
        "r_inf_min",
        "r_inf_max",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let body = rows.iter().map(|a| {
        let mut row = vec![a.label.clone(), a.count.to_string(), a.boundary_count.to_string()];
        row.extend(
            [
                a.neg_fraction_empirical,
                a.neg_years_empirical,
                a.mean_negative_amplitude,
                a.m_hat,
                a.correlation_time,
                a.k_hat,
                a.mu_hat,
                a.mu_min,
                a.mu_max,
                a.kappa_hat,
                a.kappa_min,
                a.kappa_max,
                a.r_inf_hat,
                a.r_inf_min,
                a.r_inf_max,
            ]
            .iter()
            .map(|&v| fmt_num(v)),
        );
        row
    });
    csv_string(std::iter::once(header).chain(body))
}

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    pub paths: usize,
    pub seed: u64,
    /// Simulation step; defaults to `(1/32)/α` (or 1/32 year without mean
    /// reversion), refined so that every output time lies on the grid.
    pub dt: Option<f64>,
    pub threads: Option<usize>,
    pub allow_coarse_feller_dt: bool,
    pub max_path_steps: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRequest {
    pub model: ModelKind,
    pub t_max: f64,
    pub points: usize,
    pub engine: Engine,
    pub mc: McOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveOutcome {
    pub curves: Vec<DiscountCurve>,
    /// Largest |z| between Monte Carlo and closed form, for `Engine::Both`.
    pub max_abs_z: Option<f64>,
}

pub fn run_curve(req: &CurveRequest) -> Result<CurveOutcome> {
    let model = *models::validate(req.model)?.kind();
    if !(req.t_max > 0.0) || req.points < 2 {
        return Err(Error::Domain("curve needs t_max > 0 and at least 2 points".into()));
    }
    let times = curve_times(req.t_max, req.points);
    let closed = match (req.engine, model) {
        (Engine::Mc, _) => None,
        (_, ModelKind::Ou(p)) => Some(DiscountCurve::closed_form(&p, &times)?),
        (_, other) => {
            return Err(Error::Domain(format!("no closed form for the {} model; use --engine mc", other.name())))
        }
    };
    let mc = if req.engine == Engine::ClosedForm {
        None
    } else {
        let step = req.t_max / (req.points - 1) as f64;
        let target = req.mc.dt.unwrap_or_else(|| {
            models::validate(model).ok().and_then(|m| m.reversion()).map_or(1.0 / 32.0, |a| 1.0 / (32.0 * a))
        });
        let substeps = (step / target * (1.0 - 1e-12)).ceil().max(1.0);
        let dt = step / substeps;
        let mut cfg = McConfig::new(req.mc.paths, dt, req.t_max, req.mc.seed);
        cfg.threads = req.mc.threads;
        cfg.allow_coarse_feller_dt = req.mc.allow_coarse_feller_dt;
        cfg.max_path_steps = req.mc.max_path_steps;
        let grid: Vec<f64> = (0..req.points).map(|i| (i as f64 * substeps) * dt).collect();
        Some(estimate_discount(model, &cfg, &grid)?)
    };
    let max_abs_z = match (&closed, &mc) {
        (Some(c), Some(m)) => {
            Some((1..m.len()).map(|i| m.z_score(i, c.ln_d[i]).abs()).filter(|z| z.is_finite()).fold(0.0, f64::max))
        }
        _ => None,
    };
    Ok(CurveOutcome { curves: closed.into_iter().chain(mc).collect(), max_abs_z })
}

/// `t,D,stderr,lnD` rows.
pub fn curve_csv(curve: &DiscountCurve) -> Result<String> {
    let header = ["t", "D", "stderr", "lnD"].iter().map(|s| s.to_string()).collect();
    let body = (0..curve.len()).map(|i| {
        vec![fmt_num(curve.times[i]), fmt_num(curve.d_values[i]), fmt_num(curve.std_errors[i]), fmt_num(curve.ln_d[i])]
    });
    csv_string(std::iter::once(header).chain(body))
}

pub fn write_curves(outcome: &CurveOutcome, out: &Path, format: OutputFormat, stem: &str) -> Result<Vec<PathBuf>> {
    outcome
        .curves
        .iter()
        .map(|c| {
            let name = format!("{stem}_{}", c.source.as_str());
            match format {
                OutputFormat::Csv => write_file(&out.join(format!("{name}.csv")), &curve_csv(c)?),
                OutputFormat::Json => write_file(&out.join(format!("{name}.json")), &to_json(c)?),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// phase
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub country: String,
    pub kappa: f64,
    pub mu: f64,
    pub r_inf: f64,
    pub regime: Regime,
    /// `μ < κ`: negative rates are common in the stationary law.
    pub below_identity: bool,
}

pub fn phase_row(country: &str, nd: &NondimParams, tol: f64) -> PhaseRow {
    PhaseRow {
        country: country.to_string(),
        kappa: nd.kappa,
        mu: nd.mu,
        r_inf: nd.r_infinity(),
        regime: classify_regime(nd, tol).regime,
        below_identity: nd.mu < nd.kappa,
    }
}

pub fn phase_rows(reports: &[EstimationReport], tol: f64) -> Vec<PhaseRow> {
    let mut rows: Vec<PhaseRow> = reports.iter().map(|r| phase_row(&r.country, &r.nondim(), tol)).collect();
    rows.sort_by(|a, b| a.country.cmp(&b.country));
    rows
}

/// Load every `report_*.json` file in `dir`.
pub fn load_reports(dir: &Path) -> Result<Vec<EstimationReport>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("report_"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Io(format!("no report_*.json files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
        })
        .collect()
}

pub fn phase_csv(rows: &[PhaseRow]) -> Result<String> {
    let header =
        ["country", "kappa", "mu", "r_inf", "regime", "below_identity"].iter().map(|s| s.to_string()).collect();
    let body = rows.iter().map(|r| {
        vec![
            r.country.clone(),
            fmt_num(r.kappa),
            fmt_num(r.mu),
            fmt_num(r.r_inf),
            r.regime.to_string(),
            r.below_identity.to_string(),
        ]
    });
    csv_string(std::iter::once(header).chain(body))
}

// ---------------------------------------------------------------------------
// negprob
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegProbPoint {
    pub kappa: f64,
    pub mu: f64,
    pub p_negative: f64,
}

/// Stationary negative-rate probability on a `(steps+1)²` grid over
/// `[0, kappa_max] × [0, mu_max]`.
pub fn negprob_grid(kappa_max: f64, mu_max: f64, steps: usize) -> Result<Vec<NegProbPoint>> {
    if !(kappa_max > 0.0) || !(mu_max > 0.0) || steps == 0 {
        return Err(Error::Domain("grid bounds must be positive and steps >= 1".into()));
    }
    let mut out = Vec::with_capacity((steps + 1) * (steps + 1));
    for i in 0..=steps {
        let kappa = kappa_max * i as f64 / steps as f64;
        for j in 0..=steps {
            let mu = mu_max * j as f64 / steps as f64;
            let nd = NondimParams { mu, kappa, alpha: 1.0 };
            out.push(NegProbPoint { kappa, mu, p_negative: analytics::prob_negative_stationary(&nd) });
        }
    }
    Ok(out)
}

pub fn negprob_csv(points: &[NegProbPoint]) -> Result<String> {
    let header = ["kappa", "mu", "p_negative"].iter().map(|s| s.to_string()).collect();
    let body = points.iter().map(|p| vec![fmt_num(p.kappa), fmt_num(p.mu), fmt_num(p.p_negative)]);
    csv_string(std::iter::once(header).chain(body))
}

pub fn write_text(path: &Path, contents: &str) -> Result<PathBuf> {
    write_file(path, contents)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    write_file(path, &to_json(value)?)
}
