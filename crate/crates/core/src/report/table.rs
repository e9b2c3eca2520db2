use std::fmt::Write;

use crate::analytics::Regime;

use super::{AggregateRow, FitOutcome};

/// `x` as a percentage with `digits` decimals, or `-` for NaN.
pub fn format_percent(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{:.*}", digits, 100.0 * x)
    }
}

fn fixed(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x:.digits$}")
    }
}

const HEADER: [&str; 15] = [
    "Country", "NegRI%", "m(-)%", "m%", "1/a", "k*100", "mu", "min", "max", "kappa", "min", "max", "r_inf%", "min",
    "max",
];

struct Row {
    cells: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn row_cells(
    label: String,
    neg_frac: f64,
    neg_amp: f64,
    m: f64,
    corr: f64,
    k: f64,
    mu: (f64, f64, f64),
    kappa: (f64, f64, f64),
    r_inf: (f64, f64, f64),
) -> Row {
    Row {
        cells: vec![
            label,
            format_percent(neg_frac, 0),
            format_percent(neg_amp, 1),
            format_percent(m, 1),
            fixed(corr, 1),
            fixed(100.0 * k, 1),
            fixed(mu.0, 2),
            fixed(mu.1, 2),
            fixed(mu.2, 2),
            fixed(kappa.0, 2),
            fixed(kappa.1, 2),
            fixed(kappa.2, 2),
            format_percent(r_inf.0, 1),
            format_percent(r_inf.1, 1),
            format_percent(r_inf.2, 1),
        ],
    }
}

fn aggregate_cells(a: &AggregateRow) -> Row {
    let label = if a.boundary_count > 0 {
        format!("{} ({}, {} boundary)", a.label, a.count, a.boundary_count)
    } else {
        format!("{} ({})", a.label, a.count)
    };
    row_cells(
        label,
        a.neg_fraction_empirical,
        a.mean_negative_amplitude,
        a.m_hat,
        a.correlation_time,
        a.k_hat,
        (a.mu_hat, a.mu_min, a.mu_max),
        (a.kappa_hat, a.kappa_min, a.kappa_max),
        (a.r_inf_hat, a.r_inf_min, a.r_inf_max),
    )
}

/// Fixed-width summary table of a `fit` run, one line per country followed
/// by the aggregate rows and any failures.
pub fn render_table(outcome: &FitOutcome) -> String {
    let mut rows: Vec<Row> = outcome
        .reports
        .iter()
        .map(|r| {
            let mut label = r.country.clone();
            match r.regime {
                Regime::ExponentialGrowth => label.push_str(" *"),
                Regime::AsymptoticallyConstant => label.push_str(" ~"),
                Regime::ExponentialDecay => {}
            }
            row_cells(
                label,
                r.neg_fraction_empirical,
                r.mean_negative_amplitude,
                r.m_hat,
                r.correlation_time,
                r.k_hat,
                (r.mu_hat, r.mu_range.min, r.mu_range.max),
                (r.kappa_hat, r.kappa_range.min, r.kappa_range.max),
                (r.r_inf_hat, r.r_inf_range.min, r.r_inf_range.max),
            )
        })
        .collect();
    let n_countries = rows.len();
    rows.extend(outcome.aggregates.iter().filter(|a| a.count > 0).map(aggregate_cells));

    let mut widths: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(&row.cells) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "  {c:>w$}");
            }
        }
        s.push('\n');
        s
    };

    let mut out = line(&HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    let rule = format!("{}\n", "-".repeat(total));
    out.push_str(&rule);
    for (i, row) in rows.iter().enumerate() {
        if i == n_countries {
            out.push_str(&rule);
        }
        out.push_str(&line(&row.cells));
    }
    out.push_str("* exponential growth, ~ within tolerance of the boundary (counted stable)\n");
    for f in &outcome.failures {
        let _ = writeln!(out, "FAILED {}: {}", f.country, f.error);
    }
    out
}
