mod common;

use stochdisc::estimator::{block_subsample_report, build_report, fit_autocorrelation, DEFAULT_BLOCKS};
use stochdisc::montecarlo::simulate_ou_series;
use stochdisc::{OuParams, Regime};

#[test]
fn usa_like_report_within_table_band() {
    let truth = common::usa_like();
    for seed in 0..5 {
        let series = simulate_ou_series(&truth, 0.25, 4000, 100 + seed, "USA").unwrap();
        let r = build_report(&series).unwrap();
        assert!((0.003..=0.038).contains(&r.r_inf_hat), "seed {seed}: r_inf = {}", r.r_inf_hat);
        assert_eq!(r.regime, Regime::ExponentialDecay);
        assert_eq!(r.blocks.len(), DEFAULT_BLOCKS);
        assert!(r.r_inf_range.min <= r.r_inf_range.max);
        assert!(r.neg_fraction_empirical > 0.0 && r.neg_fraction_empirical < 0.5);
    }
}

#[test]
fn k_round_trip_over_ten_thousand_years() {
    let truth = OuParams::at_mean(0.02, 0.2, 0.02).unwrap();
    let series = simulate_ou_series(&truth, 0.25, 40_000, 7, "X").unwrap();
    let r = build_report(&series).unwrap();
    assert!((r.k_hat / truth.k - 1.0).abs() < 0.2, "k_hat = {}", r.k_hat);
    let fit = fit_autocorrelation(&series, 20.0).unwrap();
    assert!((fit.alpha_hat / truth.alpha - 1.0).abs() < 0.2);
    assert!(!fit.short_correlation);
}

fn mean_r_inf_spread(block_years: f64, seeds: std::ops::Range<u64>) -> f64 {
    let truth = common::usa_like();
    let dt = 0.25;
    let n = (DEFAULT_BLOCKS as f64 * block_years / dt) as usize;
    let spreads: Vec<f64> = seeds
        .map(|seed| {
            let series = simulate_ou_series(&truth, dt, n, seed, "X").unwrap();
            block_subsample_report(&series, truth.alpha, DEFAULT_BLOCKS).unwrap().r_inf.spread()
        })
        .collect();
    spreads.iter().sum::<f64>() / spreads.len() as f64
}

#[test]
fn block_spread_follows_clt_scaling() {
    let short = mean_r_inf_spread(2500.0, 0..12);
    let long = mean_r_inf_spread(10_000.0, 100..112);
    let ratio = short / long;
    // quadrupling the block length should halve the spread, within a factor 2
    assert!((1.0..=4.0).contains(&ratio), "ratio {ratio}");
}
