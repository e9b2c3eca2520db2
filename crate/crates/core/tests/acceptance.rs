//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{table2_params, usa_like, TABLE2};
use stochdisc::analytics::{
    discount_exact, fluctuation_bracket, log_discount_exact, prob_below_r_infinity, prob_below_r_infinity_asymptote,
    prob_negative_large_ratio, prob_negative_small_ratio, prob_negative_stationary, r_infinity, NondimParams,
};
use stochdisc::estimator::build_report;
use stochdisc::montecarlo::{
    classify_longrun_empirical, estimate_discount, negative_rate_occupancy, simulate_ou_series, terminal_rates,
};
use stochdisc::special::erfc;
use stochdisc::{FellerParams, LognormalParams, McConfig, ModelKind, OuParams};

struct Outcome {
    pass: bool,
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new(summary: impl Into<String>, failures: Vec<String>) -> Self {
        Self { pass: failures.is_empty(), summary: summary.into(), failures }
    }
}

fn criterion_1() -> Outcome {
    let mut sets: Vec<(&str, OuParams)> =
        ["U.S.A", "Spain", "Chile", "Italy", "Germany", "Japan", "Argentina", "Netherlands", "Denmark", "U.K."]
            .iter()
            .map(|name| {
                let row = TABLE2.iter().find(|r| r.0 == *name).unwrap();
                (*name, table2_params(row.1, row.2, row.3))
            })
            .collect();
    sets.push(("fast decay", NondimParams::new(1.0, 0.5, 0.3).unwrap().to_ou(0.1).unwrap()));
    sets.push(("near boundary, r0 < 0", NondimParams::new(0.125, 0.5, 0.25).unwrap().to_ou(-0.05).unwrap()));

    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut devs = Vec::new();
    for (i, (name, p)) in sets.iter().enumerate() {
        // keep Var[∫r] = κ²g(αt) moderate so the estimator's tails stay tame
        let kappa2 = p.k * p.k / p.alpha.powi(3);
        let mut tau = 10.0_f64;
        while kappa2 * fluctuation_bracket(tau) > 1.5 {
            tau *= 0.9;
        }
        let dt = (1.0 / 32.0) / p.alpha;
        let n_steps = (tau * 32.0).floor().max(16.0);
        let cfg = McConfig::new(100_000, dt, n_steps * dt, 20_240 + i as u64);
        let times: Vec<f64> = cfg.grid_times(17).into_iter().skip(1).collect();
        assert_eq!(times.len(), 16);
        let curve = estimate_discount((*p).into(), &cfg, &times).unwrap();
        for j in 1..curve.len() {
            let exact = discount_exact(p, curve.times[j]).unwrap();
            let signed = (curve.d_values[j] - exact) / curve.std_errors[j];
            devs.push(signed);
            let dev = signed.abs();
            worst = worst.max(dev);
            if dev > 3.0 {
                failures.push(format!("{name}: t = {:.3}, |D̂ - D| = {dev:.2} stderr", curve.times[j]));
            }
        }
    }
    // calibration of the 192 comparisons against a standard normal
    let n = devs.len() as f64;
    let over2 = devs.iter().filter(|d| d.abs() > 2.0).count();
    let over3 = devs.iter().filter(|d| d.abs() > 3.0).count();
    let mean = devs.iter().sum::<f64>() / n;
    Outcome::new(
        format!(
            "12 OU sets x 16 times, worst deviation {worst:.2} stderr; |z| > 2: {over2} (normal: {:.1}), |z| > 3: {over3} (normal: {:.2}), mean z {mean:+.3}",
            n * 0.0455,
            n * 0.0027
        ),
        failures,
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, mu, kappa, corr, printed, _) in TABLE2 {
        let nd = NondimParams::from_correlation_time(mu, kappa, corr).unwrap();
        let r_inf = 100.0 * nd.r_infinity();
        let tol = if printed.abs() < 10.0 { 0.3 } else { 1.5 };
        let diff = r_inf - printed;
        worst = worst.max(diff.abs() / tol);
        if diff.abs() > tol {
            failures.push(format!("{name}: r_inf = {r_inf:.2}% vs printed {printed}% (tolerance {tol}pp)"));
        }
    }
    let spain = NondimParams::from_correlation_time(0.96, 2.0, 17.0).unwrap().r_infinity();
    let chile = NondimParams::from_correlation_time(-0.17, 0.98, 2.5).unwrap().r_infinity();
    Outcome::new(
        format!("14 rows; Spain {:.2}%, Chile {:.2}%; worst |diff|/tol = {worst:.2}", 100.0 * spain, 100.0 * chile),
        failures,
    )
}

fn criterion_3() -> Outcome {
    let nd = NondimParams::new(0.3, 0.3, 0.2).unwrap();
    let p_exact = prob_negative_stationary(&nd);
    let mut failures = Vec::new();
    if (p_exact - 0.0786).abs() > 0.0005 {
        failures.push(format!("P(r<0) at mu = kappa is {p_exact}"));
    }
    // one sample per path, taken after the burn-in: independent draws
    let p = nd.to_ou_at_mean().unwrap();
    let dt = 5.0 / p.alpha;
    let occ = negative_rate_occupancy(p.into(), &McConfig::new(1_000_000, dt, dt, 314)).unwrap();
    let se = occ.binomial_stderr();
    if occ.samples != 1_000_000 {
        failures.push(format!("expected 10^6 samples, got {}", occ.samples));
    }
    if (occ.fraction - p_exact).abs() > 3.0 * se {
        failures.push(format!("occupancy {} vs {p_exact} (se {se})", occ.fraction));
    }
    Outcome::new(
        format!(
            "P = {p_exact:.7}; MC occupancy {:.5} over {} samples ({:.2} se)",
            occ.fraction,
            occ.samples,
            (occ.fraction - p_exact) / se
        ),
        failures,
    )
}

fn criterion_4() -> Outcome {
    let p = prob_negative_stationary(&NondimParams::new(0.14, 0.23, 1.0 / 5.6).unwrap());
    let failures = if (100.0 * p - 19.0).abs() <= 3.0 { vec![] } else { vec![format!("{:.2}% vs 19%", 100.0 * p)] };
    Outcome::new(format!("USA model P(r<0) = {:.2}% vs empirical 19%", 100.0 * p), failures)
}

fn slope_at(p: &OuParams, t: f64) -> f64 {
    let h = 1e-3 * t.max(1.0);
    (log_discount_exact(p, t + h).unwrap() - log_discount_exact(p, t - h).unwrap()) / (2.0 * h)
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_scaled: f64 = 0.0;
    let mut worst_calendar: f64 = 0.0;
    for (name, mu, kappa, corr, _, _) in TABLE2 {
        let p = table2_params(mu, kappa, corr);
        let target = -r_infinity(&p);
        let rel = (slope_at(&p, 30.0 / p.alpha) - target).abs() / target.abs();
        worst_scaled = worst_scaled.max(rel);
        if rel > 0.01 {
            failures.push(format!("{name}: slope at 30/alpha off by {:.2}%", 100.0 * rel));
        }
        let rel = (slope_at(&p, 30.0) - target).abs() / target.abs();
        worst_calendar = worst_calendar.max(rel);
        if rel > 0.10 {
            failures.push(format!("{name} (1/alpha = {corr}y): slope at 30 years off by {:.1}%", 100.0 * rel));
        }
    }
    Outcome::new(
        format!(
            "worst relative error {:.3}% at t = 30/alpha, {:.1}% at t = 30 years",
            100.0 * worst_scaled,
            100.0 * worst_calendar
        ),
        failures,
    )
}

fn criterion_6() -> Outcome {
    let truth = usa_like();
    let dt = 0.25;
    let span = 10_000.0;
    let (_, sigma2) = truth.stationary_stats();
    let m_se = (2.0 * sigma2 / (truth.alpha * span)).sqrt();
    let m_tol = (0.1 * truth.m.abs()).max(3.0 * m_se);
    let r_inf = r_infinity(&truth);
    let mut failures = Vec::new();
    let mut worst = [0.0_f64; 4];
    for seed in 0..20u64 {
        let series = simulate_ou_series(&truth, dt, (span / dt) as usize, 9000 + seed, "synthetic").unwrap();
        let r = build_report(&series).unwrap();
        let errs = [
            (r.m_hat - truth.m).abs() / m_tol,
            (r.alpha_hat / truth.alpha - 1.0).abs() / 0.2,
            (r.k_hat / truth.k - 1.0).abs() / 0.2,
            (r.r_inf_hat - r_inf).abs() / 0.005,
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        for (label, e) in ["m", "alpha", "k", "r_inf"].iter().zip(errs) {
            if e > 1.0 {
                failures.push(format!("seed {seed}: {label} error is {e:.2}x its tolerance"));
            }
        }
    }
    Outcome::new(
        format!(
            "20 seeds; worst error / tolerance: m {:.2}, alpha {:.2}, k {:.2}, r_inf {:.2}",
            worst[0], worst[1], worst[2], worst[3]
        ),
        failures,
    )
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    // small-ratio series
    let mut worst_small: f64 = 0.0;
    for i in 1..=50 {
        let x = 0.001 * i as f64;
        let exact = 0.5 * erfc(x);
        let err = (prob_negative_small_ratio(x) - exact).abs();
        worst_small = worst_small.max(err / (x * x));
        if err > x * x {
            failures.push(format!("small-ratio series at x = {x}: error {err:e}"));
        }
    }
    // large-ratio asymptote
    let mut worst_large: f64 = 0.0;
    for i in 0..=70 {
        let x = 3.0 + 0.1 * i as f64;
        let exact = 0.5 * erfc(x);
        let rel = (prob_negative_large_ratio(x) / exact - 1.0).abs();
        worst_large = worst_large.max(rel);
        if rel > 0.10 {
            failures.push(format!("large-ratio asymptote at x = {x:.1}: off by {:.1}%", 100.0 * rel));
        }
    }
    // slow-reversion asymptote of P(r < r_inf)
    let mut ratios = Vec::new();
    for big_r in [8.0, 10.0, 12.0, 20.0, 50.0] {
        let alpha = 0.05_f64;
        let gap = 2.0 * alpha * big_r;
        let k = alpha * (2.0 * gap).sqrt();
        let p = OuParams::at_mean(0.02, alpha, k).unwrap();
        let ratio = prob_below_r_infinity_asymptote(gap, alpha) / prob_below_r_infinity(&p);
        ratios.push(format!("R={big_r}: {ratio:.4}"));
        if (ratio - 1.0).abs() > 0.05 {
            failures.push(format!("slow-reversion asymptote at (m - r_inf)/2alpha = {big_r}: ratio {ratio:.4}"));
        }
    }
    Outcome::new(
        format!(
            "series err/x^2 <= {worst_small:.3}; large-ratio worst {:.1}%; asymptote ratios {}",
            100.0 * worst_large,
            ratios.join(", ")
        ),
        failures,
    )
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut tau = 0.0;
    while tau <= 1000.0 {
        let g = fluctuation_bracket(tau);
        if !(g >= 0.0) {
            failures.push(format!("g({tau}) = {g}"));
            break;
        }
        tau += if tau < 1.0 { 1e-4 } else { 1e-2 };
    }

    for _ in 0..10_000 {
        let m = rng.random_range(-0.2..0.2);
        let alpha = rng.random_range(0.01..2.0);
        let k = rng.random_range(1e-4..0.5);
        let r0 = rng.random_range(-0.3..0.3);
        let p = OuParams::new(m, alpha, k, r0).unwrap();
        if !(r_infinity(&p) < m) {
            failures.push(format!("r_inf >= m for {p:?}"));
            break;
        }
        if discount_exact(&p, 0.0).unwrap() != 1.0 {
            failures.push(format!("D(0) != 1 for {p:?}"));
            break;
        }
        let flat = OuParams::at_mean(m, alpha, 0.0).unwrap();
        let t = rng.random_range(0.0..100.0);
        let d = discount_exact(&flat, t).unwrap();
        let e = (-m * t).exp();
        if (d - e).abs() > 1e-12 * e {
            failures.push(format!("k = 0: D({t}) = {d} vs {e}"));
            break;
        }
    }

    let mut bad_steps = 0;
    for _ in 0..100_000 {
        let alpha = rng.random_range(0.01..2.0);
        let f = FellerParams::new(rng.random_range(0.0..0.1), alpha, rng.random_range(0.0..1.0), 0.01).unwrap();
        let r = rng.random_range(0.0..0.2);
        let dt = rng.random_range(1e-4..1.0);
        let z = rng.random_range(-8.0..8.0);
        if !(f.step(r, dt, z) >= 0.0) {
            bad_steps += 1;
        }
        let ln = LognormalParams::new(rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0), 0.03).unwrap();
        let x = ln.step(rng.random_range(1e-6..1.0), dt, z);
        if !(x > 0.0) {
            bad_steps += 1;
        }
    }
    if bad_steps > 0 {
        failures.push(format!("{bad_steps} Feller/log-normal steps left the positive domain"));
    }

    let models: [ModelKind; 3] = [
        usa_like().into(),
        FellerParams::new(0.03, 0.3, 0.1, 0.02).unwrap().into(),
        LognormalParams::driftless_log(0.3, 0.03).unwrap().into(),
    ];
    for model in models {
        let base = McConfig::new(4096, 0.1, 10.0, 77).with_batch_size(256);
        let times = base.grid_times(11);
        let curves: Vec<_> = [1, 4, 8]
            .iter()
            .map(|&t| estimate_discount(model, &base.clone().with_threads(t), &times).unwrap())
            .collect();
        let rates: Vec<_> =
            [1, 4, 8].iter().map(|&t| terminal_rates(model, &base.clone().with_threads(t)).unwrap()).collect();
        let same_bits = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        for i in 1..3 {
            if !same_bits(&curves[0].ln_d, &curves[i].ln_d)
                || !same_bits(&curves[0].std_errors, &curves[i].std_errors)
                || !same_bits(&rates[0], &rates[i])
            {
                failures.push(format!("{} output differs between 1 and {} workers", model.name(), [1, 4, 8][i]));
            }
        }
    }
    Outcome::new("g >= 0, r_inf < m, D(0) = 1, k = 0 exactness, positivity, 1/4/8-worker bit identity", failures)
}

fn criterion_9() -> Outcome {
    let model: ModelKind = LognormalParams::driftless_log(0.5, 0.05).unwrap().into();
    let horizon = 100.0;
    let rate_at = |h: f64, seed: u64| {
        let cfg = McConfig::new(50_000, 0.125, h, seed);
        let curve = estimate_discount(model, &cfg, &cfg.grid_times(61)).unwrap();
        classify_longrun_empirical(&curve).unwrap()
    };
    let near = rate_at(horizon, 91);
    let far = rate_at(2.0 * horizon, 92);
    let ratio = far.rate / near.rate;
    let failures = if near.rate > 0.0 && ratio < 0.6 {
        vec![]
    } else {
        vec![format!("rate({}) / rate({horizon}) = {ratio:.3}", 2.0 * horizon)]
    };
    Outcome::new(
        format!(
            "driftless log-normal: rate {:.5} at H = {horizon}, {:.5} at 2H, ratio {ratio:.3} (t^-1/2 predicts 0.5)",
            near.rate, far.rate
        ),
        failures,
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("closed form vs Monte Carlo", criterion_1),
        ("Table 2 r_inf regression", criterion_2),
        ("negative-rate landmark at mu = kappa", criterion_3),
        ("USA model vs empirical negative-rate share", criterion_4),
        ("asymptotic slope", criterion_5),
        ("estimation round trip", criterion_6),
        ("erfc asymptotics", criterion_7),
        ("property suites", criterion_8),
        ("log-normal power-law signature", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {name}: {} [{:.1}s]", i + 1, outcome.summary, start.elapsed().as_secs_f64());
        for f in &outcome.failures {
            println!("    {f}");
        }
        failed += usize::from(!outcome.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
