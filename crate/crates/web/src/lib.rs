//! Browser demo: three small experiments driven from a static page.
//!
//! * `burgers_profile`: viscous or hyperbolic shock exit on the unit interval
//!   next to the entropy solution.
//! * `band_heatmap`: Burgers on a spherical band, cell values at a chosen time.
//! * `trace_explorer`: boundary trace of a step on the band, with the terms of
//!   the trace formula.

use bvlab::bv_trace::{extract_trace, trace_formula_terms};
use bvlab::entropy::evolve;
use bvlab::geometry::TangentVector;
use bvlab::grid::StructuredGrid;
use bvlab::harness::scenarios;
use bvlab::oracles::{burgers_interval_exact, BurgersCase};
use bvlab::problem::InitialProfile;
use bvlab::viscous::SolveOptions;
use wasm_bindgen::prelude::*;

fn js_err(e: bvlab::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[x_0.., u_0.., exact_0..]` for `n` cells at time `t`.
pub fn burgers_profile_native(n: usize, epsilon: f64, t: f64) -> bvlab::Result<Vec<f64>> {
    let sc = scenarios::shock_exit(n);
    let sc = sc.with_epsilon(epsilon.max(0.0)).with_cadence(t);
    let sc = bvlab::problem::Scenario { horizon: t, ..sc };
    let ev = evolve(&sc, &SolveOptions::default())?;
    let (_, u) = ev.snapshots.last().cloned().expect("the run reaches its horizon");
    let x: Vec<f64> = ev.grid.centers().iter().map(|z| z[0]).collect();
    let exact = x
        .iter()
        .map(|&x| burgers_interval_exact(BurgersCase::ShockExit, x, t))
        .collect::<bvlab::Result<Vec<f64>>>()?;
    Ok([x, u.into_values(), exact].concat())
}

/// `[n_theta, n_phi, u..]` in row-major order (theta rows).
pub fn band_heatmap_native(n: usize, t: f64) -> bvlab::Result<Vec<f64>> {
    let base = scenarios::band_burgers(n, 2 * n);
    let sc = bvlab::problem::Scenario {
        horizon: t,
        ..base.with_cadence(t)
    };
    let ev = evolve(&sc, &SolveOptions::default())?;
    let (_, u) = ev.snapshots.last().cloned().expect("the run reaches its horizon");
    let [n1, n2] = ev.grid.shape();
    Ok([vec![n1 as f64, n2 as f64], u.into_values()].concat())
}

/// `[volume, variation, boundary, Tu at each boundary face..]` for the step
/// `left` below `at`, `right` above, on the quarter band with `X = d_theta`.
pub fn trace_explorer_native(n: usize, at: f64, left: f64, right: f64) -> bvlab::Result<Vec<f64>> {
    let grid = StructuredGrid::build(scenarios::quarter_band(), &[n, 2 * n])?;
    let u = bvlab::problem::InitialData::Profile(InitialProfile::Step { at, left, right }).sample(&grid)?;
    let x = |_z: [f64; 2]| TangentVector::d2(1.0, 0.0);
    let terms = trace_formula_terms(&grid, &u, &x)?;
    let trace = extract_trace(&grid, &u)?;
    Ok([vec![terms.volume, terms.variation, terms.boundary], trace.values].concat())
}

#[wasm_bindgen]
pub fn burgers_profile(n: usize, epsilon: f64, t: f64) -> Result<Vec<f64>, JsError> {
    burgers_profile_native(n, epsilon, t).map_err(js_err)
}

#[wasm_bindgen]
pub fn band_heatmap(n: usize, t: f64) -> Result<Vec<f64>, JsError> {
    band_heatmap_native(n, t).map_err(js_err)
}

#[wasm_bindgen]
pub fn trace_explorer(n: usize, at: f64, left: f64, right: f64) -> Result<Vec<f64>, JsError> {
    trace_explorer_native(n, at, left, right).map_err(js_err)
}
