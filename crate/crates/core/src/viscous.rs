//! Method-of-lines solver for the parabolic regularization with homogeneous
//! Dirichlet data: Godunov advection plus `eps` times the Laplace-Beltrami
//! stencil, advanced by Heun's method.

use serde::Serialize;

use crate::bv_trace::{total_variation, total_variation_with_boundary};
use crate::error::{Error, Result};
use crate::grid::{CellField, StructuredGrid};
use crate::numerics::pairwise_sum_by;
use crate::problem::{mollify_initial, step_limits, stable_dt_with, Scenario, StepLimits};
use crate::scheme::{Discretization, Godunov, NumericalFlux};

/// Relative sup-norm growth that aborts a run.
pub const INSTABILITY_GROWTH: f64 = 1.1;

/// Monitored quantities at one output time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesRecord {
    pub t: f64,
    pub linf: f64,
    pub tv_jump: f64,
    pub tv_gradient: f64,
    /// Jump variation of the field extended by the boundary datum 0.
    pub tv_extended: f64,
    /// Largest `|(u^{n+1} - u^n) / dt|_L1` over the steps since the previous record.
    pub dudt_l1: f64,
    pub mass: f64,
    pub entropy_cell_resid_max: Option<f64>,
    pub bln_resid_max: Option<f64>,
    /// Net numerical flux through the boundary at the last step before this record.
    pub mass_flux_boundary: Option<f64>,
}

impl SeriesRecord {
    pub(crate) fn measure(grid: &StructuredGrid, t: f64, u: &CellField) -> Result<Self> {
        let tv = total_variation(grid, u)?;
        Ok(Self {
            t,
            linf: u.linf(),
            tv_jump: tv.tv_jump,
            tv_gradient: tv.tv_gradient,
            tv_extended: total_variation_with_boundary(grid, u, 0.0)?,
            dudt_l1: 0.0,
            mass: grid.integrate(u)?,
            entropy_cell_resid_max: None,
            bln_resid_max: None,
            mass_flux_boundary: None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ViscousState {
    pub t: f64,
    pub u: CellField,
}

/// Options shared by both solvers.
#[derive(Clone, Copy)]
pub struct SolveOptions<'a> {
    /// Range of values used for wave-speed bounds; defaults to `[-|u0|, |u0|]`.
    pub u_range: Option<(f64, f64)>,
    pub flux: &'a dyn NumericalFlux,
    /// Keep every output-time field.
    pub keep_snapshots: bool,
    /// Keep the field after every step.
    pub keep_trajectory: bool,
    /// Skip mollification of the initial data.
    pub raw_initial: bool,
}

impl Default for SolveOptions<'_> {
    fn default() -> Self {
        Self {
            u_range: None,
            flux: &Godunov,
            keep_snapshots: true,
            keep_trajectory: false,
            raw_initial: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ViscousRun {
    pub state: ViscousState,
    pub series: Vec<SeriesRecord>,
    /// `(t, u)` at every output time.
    pub snapshots: Vec<(f64, CellField)>,
    /// Initial field after mollification.
    pub initial: CellField,
    pub steps: usize,
    /// Extended variation after every step, starting with the initial field.
    pub tv_steps: Vec<f64>,
}

/// Heun step with the viscous right-hand side.
pub fn step_viscous(
    disc: &Discretization<'_>,
    state: &ViscousState,
    dt: f64,
    epsilon: f64,
) -> Result<ViscousState> {
    let u0 = state.u.values();
    let (k1, _) = disc.rhs(u0, state.t, epsilon);
    let u1: Vec<f64> = u0.iter().zip(&k1).map(|(u, k)| u + dt * k).collect();
    let (k2, _) = disc.rhs(&u1, state.t + dt, epsilon);
    let u2: Vec<f64> = u0
        .iter()
        .zip(u1.iter().zip(&k2))
        .map(|(u, (v, k))| 0.5 * u + 0.5 * (v + dt * k))
        .collect();
    let next = disc.grid.field(u2)?;
    check_growth(state.t + dt, state.u.linf(), next.linf())?;
    Ok(ViscousState {
        t: state.t + dt,
        u: next,
    })
}

pub(crate) fn check_growth(t: f64, before: f64, after: f64) -> Result<()> {
    if after > INSTABILITY_GROWTH * before + f64::MIN_POSITIVE || !after.is_finite() {
        return Err(Error::Instability { t, before, after });
    }
    Ok(())
}

pub(crate) fn time_derivative_norm(grid: &StructuredGrid, old: &[f64], new: &[f64], dt: f64) -> f64 {
    let vols = grid.volumes();
    pairwise_sum_by(old.len(), |c| (new[c] - old[c]).abs() * vols[c]) / dt
}

/// Time stepper shared by both solvers: chooses steps that land on every
/// output time.
pub(crate) struct Clock {
    pub times: Vec<f64>,
    pub next: usize,
    limits: StepLimits,
    cfl: f64,
    tol: f64,
}

impl Clock {
    pub fn new(scenario: &Scenario, limits: StepLimits) -> Self {
        Self {
            times: scenario.output_times(),
            next: 1,
            limits,
            cfl: scenario.cfl,
            tol: 1e-12 * scenario.horizon,
        }
    }

    pub fn done(&self) -> bool {
        self.next >= self.times.len()
    }

    /// Step size from `t`, and whether it reaches the next output time.
    pub fn step(&self, t: f64) -> (f64, bool) {
        let target = self.times[self.next];
        let remaining = target - t;
        let dt = stable_dt_with(&self.limits, self.cfl, remaining);
        if remaining - dt <= self.tol {
            (remaining, true)
        } else {
            (dt, false)
        }
    }
}

pub(crate) fn default_range(u0: &CellField) -> (f64, f64) {
    let m = u0.linf();
    (-m, m)
}

pub fn solve_viscous(scenario: &Scenario) -> Result<ViscousRun> {
    solve_viscous_with(scenario, &SolveOptions::default())
}

pub fn solve_viscous_with(scenario: &Scenario, opts: &SolveOptions<'_>) -> Result<ViscousRun> {
    scenario.validate()?;
    if !(scenario.epsilon > 0.0) {
        return Err(Error::param("epsilon", "the viscous solver needs epsilon > 0"));
    }
    let grid = scenario.build_grid()?;
    let sampled = scenario.initial.sample(&grid)?;
    let initial = if opts.raw_initial {
        sampled
    } else {
        mollify_initial(&grid, &sampled, scenario.epsilon, &scenario.mollifier)?
    };
    let range = opts.u_range.unwrap_or_else(|| default_range(&initial));
    let limits = step_limits(&grid, &scenario.flux, scenario.epsilon, range);
    let disc = Discretization::new(&grid, &scenario.flux, opts.flux);
    let mut clock = Clock::new(scenario, limits);

    let mut state = ViscousState {
        t: 0.0,
        u: initial.clone(),
    };
    let mut series = vec![SeriesRecord::measure(&grid, 0.0, &initial)?];
    let mut snapshots = Vec::new();
    if opts.keep_snapshots {
        snapshots.push((0.0, initial.clone()));
    }
    let mut tv_steps = vec![series[0].tv_extended];
    let mut window_max: f64 = 0.0;
    let mut steps = 0usize;
    while !clock.done() {
        let (dt, lands) = clock.step(state.t);
        let mut next = step_viscous(&disc, &state, dt, scenario.epsilon)?;
        let rate = time_derivative_norm(&grid, state.u.values(), next.u.values(), dt);
        if steps == 0 {
            series[0].dudt_l1 = rate;
        }
        window_max = window_max.max(rate);
        steps += 1;
        tv_steps.push(total_variation_with_boundary(&grid, &next.u, 0.0)?);
        if lands {
            next.t = clock.times[clock.next];
            let mut rec = SeriesRecord::measure(&grid, next.t, &next.u)?;
            rec.dudt_l1 = window_max;
            window_max = 0.0;
            series.push(rec);
            if opts.keep_snapshots {
                snapshots.push((next.t, next.u.clone()));
            }
            clock.next += 1;
        }
        state = next;
    }
    Ok(ViscousRun {
        state,
        series,
        snapshots,
        initial,
        steps,
        tv_steps,
    })
}

/// Largest recorded `|du/dt|_L1`.
pub fn time_derivative_l1(series: &[SeriesRecord]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::param("series", "need at least two records"));
    }
    Ok(series.iter().map(|r| r.dudt_l1).fold(0.0, f64::max))
}

/// Fitted total-variation envelope `(1 + c2 t) tv0 (1 + c3 t exp(c3 t))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TvEnvelope {
    pub c2: f64,
    pub c3: f64,
}

impl TvEnvelope {
    pub fn eval(&self, t: f64, tv0: f64) -> f64 {
        (1.0 + self.c2 * t) * tv0 * (1.0 + self.c3 * t * (self.c3 * t).exp())
    }

    /// `c2` from the linear growth rate over the first half of the horizon,
    /// then the smallest `c3` that keeps every sample under the envelope.
    pub fn fit(samples: &[(f64, f64)], tv0: f64, horizon: f64) -> Result<Self> {
        if !(tv0 > 0.0) {
            return Err(Error::param("tv0", "envelope fit needs positive initial variation"));
        }
        let c2 = samples
            .iter()
            .filter(|(t, _)| *t > 0.0 && *t <= 0.5 * horizon * (1.0 + 1e-12))
            .map(|(t, tv)| (tv / tv0 - 1.0) / t)
            .fold(0.0, f64::max);
        let covers = |c3: f64| {
            let env = TvEnvelope { c2, c3 };
            samples.iter().all(|&(t, tv)| env.eval(t, tv0) >= tv * (1.0 - 1e-12))
        };
        if covers(0.0) {
            return Ok(Self { c2, c3: 0.0 });
        }
        let mut hi = 1.0;
        while !covers(hi) {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::param("tv", "variation growth cannot be enveloped"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if covers(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        Ok(Self { c2, c3: hi })
    }

    pub fn covers(&self, samples: &[(f64, f64)], tv0: f64, slack: f64) -> bool {
        samples.iter().all(|&(t, tv)| tv <= self.eval(t, tv0) * (1.0 + slack))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartGeometry, Weight};
    use crate::problem::{FluxFamily, FluxShape, InitialProfile};
    use std::f64::consts::PI;

    fn interval_scenario(shape: FluxShape, a: f64, u0: InitialProfile, eps: f64, n: usize) -> Scenario {
        Scenario::new(
            ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(),
            FluxFamily::transverse(shape, a),
            u0,
            0.2,
            vec![n],
        )
        .with_epsilon(eps)
    }

    #[test]
    fn zero_stays_zero() {
        let sc = interval_scenario(FluxShape::Burgers, 1.0, InitialProfile::Constant { value: 0.0 }, 0.05, 50);
        let run = solve_viscous(&sc).unwrap();
        assert!(run.state.u.values().iter().all(|&v| v == 0.0));
        assert!(run.series.iter().all(|r| r.linf == 0.0 && r.dudt_l1 == 0.0));
    }

    #[test]
    fn inviscid_step_is_upwind() {
        let sc = interval_scenario(FluxShape::Linear, 1.0, InitialProfile::Constant { value: 0.0 }, 0.0, 4);
        let grid = sc.build_grid().unwrap();
        let disc = Discretization::new(&grid, &sc.flux, &Godunov);
        let u = grid.field(vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        let state = ViscousState { t: 0.0, u };
        let dt = 0.1;
        let next = step_viscous(&disc, &state, dt, 0.0).unwrap();
        // Heun of the upwind operator L u_i = -(u_i - u_{i-1}) / h, ghost 0
        let h = 0.25;
        let l = |v: &[f64]| -> Vec<f64> {
            (0..4).map(|i| -(v[i] - if i == 0 { 0.0 } else { v[i - 1] }) / h).collect()
        };
        let u0 = [1.0, 2.0, 4.0, 3.0];
        let k1 = l(&u0);
        let u1: Vec<f64> = (0..4).map(|i| u0[i] + dt * k1[i]).collect();
        let k2 = l(&u1);
        for i in 0..4 {
            let expect = 0.5 * u0[i] + 0.5 * (u1[i] + dt * k2[i]);
            assert!((next.u.values()[i] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn diffusion_decays_eigenmode() {
        let eps = 0.1;
        let sc = interval_scenario(FluxShape::Linear, 0.0, InitialProfile::Sine { k: 1.0, amplitude: 1.0 }, eps, 200);
        let grid = sc.build_grid().unwrap();
        let disc = Discretization::new(&grid, &sc.flux, &Godunov);
        let u = grid.field_from_fn(|z| (PI * z[0]).sin());
        let dt = 1e-4;
        let next = step_viscous(&disc, &ViscousState { t: 0.0, u: u.clone() }, dt, eps).unwrap();
        let ratio = next.u.values()[100] / u.values()[100];
        assert!((ratio - (-eps * PI * PI * dt).exp()).abs() < 1e-8);
    }

    #[test]
    fn maximum_principle_and_records() {
        let sc = interval_scenario(
            FluxShape::Burgers,
            1.0,
            InitialProfile::Step {
                at: 0.5,
                left: -0.5,
                right: 1.0,
            },
            0.01,
            100,
        );
        let run = solve_viscous(&sc).unwrap();
        let bound = run.initial.linf();
        assert_eq!(run.series.len(), 5);
        assert_eq!(run.series.last().unwrap().t, 0.2);
        assert!(run.series.iter().all(|r| r.linf <= bound + 1e-8));
        assert!(run.tv_steps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(time_derivative_l1(&run.series).unwrap() > 0.0);
    }

    #[test]
    fn envelope_fit_covers_samples() {
        let samples: Vec<(f64, f64)> = (0..=10).map(|k| {
            let t = k as f64 * 0.1;
            (t, 1.0 + 0.3 * t + 0.5 * t * t)
        }).collect();
        let env = TvEnvelope::fit(&samples, 1.0, 1.0).unwrap();
        assert!(env.covers(&samples, 1.0, 1e-12));
        let tighter = TvEnvelope { c3: env.c3 * 0.99, ..env };
        assert!(!tighter.covers(&samples, 1.0, 0.0));
    }
}
