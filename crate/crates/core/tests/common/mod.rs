#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use stochdisc::montecarlo::simulate_ou_series;
use stochdisc::OuParams;

/// Table 2 row: (country, μ, κ, 1/α, printed r∞ in %, printed Neg RI in %).
pub const TABLE2: [(&str, f64, f64, f64, f64, f64); 14] = [
    ("Italy", -0.01, 0.68, 4.5, -5.4, 28.0),
    ("Chile", -0.17, 0.98, 2.5, -26.0, 56.0),
    ("Canada", 0.11, 0.18, 3.8, 2.5, 22.0),
    ("Germany", -0.55, 3.9, 5.0, -160.0, 14.0),
    ("Spain", 0.96, 2.0, 17.0, -6.4, 25.0),
    ("Argentina", 0.06, 0.26, 2.6, 1.1, 20.0),
    ("Netherlands", 0.23, 0.34, 7.1, 2.4, 17.0),
    ("Japan", -0.09, 0.81, 4.2, -10.0, 33.0),
    ("Australia", 0.14, 0.27, 5.3, 1.9, 23.0),
    ("Denmark", 0.14, 0.21, 4.3, 2.7, 18.0),
    ("South Africa", 0.08, 0.26, 4.8, 1.1, 43.0),
    ("Sweden", 0.09, 0.20, 4.0, 1.9, 28.0),
    ("U.K.", 0.18, 0.23, 5.3, 2.8, 14.0),
    ("U.S.A", 0.14, 0.23, 5.6, 2.1, 19.0),
];

/// OU parameters (started at the mean) for a Table 2 row.
pub fn table2_params(mu: f64, kappa: f64, corr_time: f64) -> OuParams {
    let alpha = 1.0 / corr_time;
    OuParams::at_mean(mu * alpha, alpha, kappa * alpha.powf(1.5)).unwrap()
}

pub fn usa_like() -> OuParams {
    table2_params(0.14, 0.23, 5.6)
}

fn write_series(path: &Path, times: &[f64], values: &[f64]) {
    let mut s = String::from("time,value\n");
    for (t, v) in times.iter().zip(values) {
        writeln!(s, "{t},{v}").unwrap();
    }
    fs::write(path, s).unwrap();
}

fn log_cpi(t: f64) -> f64 {
    0.03 * t + 0.05 * (t / 7.0).sin()
}

/// Writes `<stem>_nominal.csv` and `<stem>_cpi.csv` whose real-rate series,
/// with a 10-year forward inflation window, is an exact OU path with the
/// given parameters. Returns the two paths.
pub fn write_country(dir: &Path, stem: &str, p: &OuParams, years: f64, dt: f64, seed: u64) -> (PathBuf, PathBuf) {
    let window = 10.0;
    let n = (years / dt).round() as usize;
    let t0 = 1800.0;
    let real = simulate_ou_series(p, dt, n, seed, stem).unwrap();
    let times: Vec<f64> = (0..n).map(|i| t0 + i as f64 * dt).collect();
    let nominal: Vec<f64> = times
        .iter()
        .zip(&real.r)
        .map(|(&t, &r)| {
            let c = (log_cpi(t + window) - log_cpi(t)) / window;
            (r + c).exp_m1()
        })
        .collect();
    let n_cpi = n + (window / dt).round() as usize;
    let cpi_times: Vec<f64> = (0..n_cpi).map(|i| t0 + i as f64 * dt).collect();
    let cpi: Vec<f64> = cpi_times.iter().map(|&t| 100.0 * log_cpi(t).exp()).collect();
    let nominal_path = dir.join(format!("{stem}_nominal.csv"));
    let cpi_path = dir.join(format!("{stem}_cpi.csv"));
    write_series(&nominal_path, &times, &nominal);
    write_series(&cpi_path, &cpi_times, &cpi);
    (nominal_path, cpi_path)
}

/// Writes a config listing `countries` as `(name, nominal, cpi)`.
pub fn write_config(dir: &Path, countries: &[(&str, &Path, &Path)], extra: &str) -> PathBuf {
    let mut s = String::from(extra);
    s.push('\n');
    for (name, nominal, cpi) in countries {
        writeln!(
            s,
            "[countries.\"{name}\"]\nnominal = {:?}\ncpi = {:?}\n",
            nominal.display().to_string(),
            cpi.display().to_string()
        )
        .unwrap();
    }
    let path = dir.join("run.toml");
    fs::write(&path, s).unwrap();
    path
}
