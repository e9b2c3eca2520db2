//! Browser bindings for the demo page in `www/`.
//!
//! Three operations are exported: an OU discount curve (closed form, with an
//! optional Monte Carlo overlay), the regime and probabilities at a point of
//! the (κ, μ) plane, and the P(r < 0) surface over a grid.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use stochdisc::analytics::{self, classify_regime, DEFAULT_REGIME_TOL};
use stochdisc::montecarlo::estimate_discount;
use stochdisc::{DiscountCurve, McConfig, NondimParams, OuParams};

/// Longest Monte Carlo run the page will start, in path-steps.
const MC_BUDGET: u128 = 20_000_000;

#[wasm_bindgen]
pub struct Curve {
    times: Vec<f64>,
    ln_d: Vec<f64>,
    mc_ln_d: Vec<f64>,
    mc_rel_err: Vec<f64>,
    r_inf: f64,
    regime: String,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    #[wasm_bindgen(getter, js_name = lnD)]
    pub fn ln_d(&self) -> Vec<f64> {
        self.ln_d.clone()
    }

    /// Empty unless paths were requested.
    #[wasm_bindgen(getter, js_name = mcLnD)]
    pub fn mc_ln_d(&self) -> Vec<f64> {
        self.mc_ln_d.clone()
    }

    #[wasm_bindgen(getter, js_name = mcRelErr)]
    pub fn mc_rel_err(&self) -> Vec<f64> {
        self.mc_rel_err.clone()
    }

    #[wasm_bindgen(getter, js_name = rInf)]
    pub fn r_inf(&self) -> f64 {
        self.r_inf
    }

    #[wasm_bindgen(getter)]
    pub fn regime(&self) -> String {
        self.regime.clone()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build_curve(
    m: f64,
    alpha: f64,
    k: f64,
    r0: f64,
    t_max: f64,
    points: usize,
    paths: usize,
    seed: u64,
) -> stochdisc::Result<Curve> {
    let p = OuParams::new(m, alpha, k, r0)?;
    if !(t_max > 0.0) || points < 2 {
        return Err(stochdisc::Error::Domain("need t_max > 0 and at least 2 points".into()));
    }
    let step = t_max / (points - 1) as f64;
    let times: Vec<f64> = (0..points).map(|i| i as f64 * step).collect();
    let exact = DiscountCurve::closed_form(&p, &times)?;
    let (mc_ln_d, mc_rel_err) = if paths >= 2 {
        let sub = (step * alpha * 32.0).ceil().max(1.0);
        let dt = step / sub;
        let mut cfg = McConfig::new(paths, dt, t_max, seed);
        cfg.max_path_steps = MC_BUDGET;
        let grid: Vec<f64> = (0..points).map(|i| i as f64 * sub * dt).collect();
        let mc = estimate_discount(p.into(), &cfg, &grid)?;
        (mc.ln_d, mc.rel_errors)
    } else {
        (Vec::new(), Vec::new())
    };
    let nd = analytics::nondimensionalize(&p);
    Ok(Curve {
        times,
        ln_d: exact.ln_d,
        mc_ln_d,
        mc_rel_err,
        r_inf: analytics::r_infinity(&p),
        regime: classify_regime(&nd, DEFAULT_REGIME_TOL).regime.to_string(),
    })
}

/// `ln D(t)` on `points` evenly spaced times in `[0, t_max]`; with
/// `paths >= 2` a Monte Carlo estimate is added.
#[wasm_bindgen(js_name = discountCurve)]
#[allow(clippy::too_many_arguments)]
pub fn discount_curve(
    m: f64,
    alpha: f64,
    k: f64,
    r0: f64,
    t_max: f64,
    points: usize,
    paths: usize,
    seed: u32,
) -> Result<Curve, JsError> {
    build_curve(m, alpha, k, r0, t_max, points, paths, u64::from(seed)).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub struct PhasePoint {
    /// `r∞ / α = μ - κ²/2`.
    #[wasm_bindgen(js_name = rInfOverAlpha)]
    pub r_inf_over_alpha: f64,
    #[wasm_bindgen(js_name = pNegative)]
    pub p_negative: f64,
    #[wasm_bindgen(js_name = pBelowRInf)]
    pub p_below_r_inf: f64,
    #[wasm_bindgen(js_name = belowIdentity)]
    pub below_identity: bool,
    regime: String,
}

#[wasm_bindgen]
impl PhasePoint {
    #[wasm_bindgen(getter)]
    pub fn regime(&self) -> String {
        self.regime.clone()
    }
}

pub fn build_phase_point(mu: f64, kappa: f64) -> stochdisc::Result<PhasePoint> {
    let nd = NondimParams::new(mu, kappa, 1.0)?;
    Ok(PhasePoint {
        r_inf_over_alpha: nd.regime_margin(),
        p_negative: analytics::prob_negative_stationary(&nd),
        p_below_r_inf: analytics::prob_below_r_infinity_nondim(&nd),
        below_identity: mu < kappa,
        regime: classify_regime(&nd, DEFAULT_REGIME_TOL).regime.to_string(),
    })
}

#[wasm_bindgen(js_name = phasePoint)]
pub fn phase_point(mu: f64, kappa: f64) -> Result<PhasePoint, JsError> {
    build_phase_point(mu, kappa).map_err(|e| JsError::new(&e.to_string()))
}

/// Row-major `(steps+1)²` grid of P(r < 0): row `i` is `μ = mu_max·i/steps`
/// and column `j` is `κ = kappa_max·j/steps`.
pub fn build_surface(kappa_max: f64, mu_max: f64, steps: usize) -> stochdisc::Result<Vec<f64>> {
    if !(kappa_max > 0.0) || !(mu_max > 0.0) || steps == 0 || steps > 1000 {
        return Err(stochdisc::Error::Domain("need positive bounds and 1 <= steps <= 1000".into()));
    }
    let n = steps + 1;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mu = mu_max * i as f64 / steps as f64;
        for j in 0..n {
            let kappa = kappa_max * j as f64 / steps as f64;
            out.push(analytics::prob_negative_stationary(&NondimParams { mu, kappa, alpha: 1.0 }));
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = negprobSurface)]
pub fn negprob_surface(kappa_max: f64, mu_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    build_surface(kappa_max, mu_max, steps).map_err(|e| JsError::new(&e.to_string()))
}
