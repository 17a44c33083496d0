//! Monotone finite-volume solver for the hyperbolic problem with the
//! boundary condition realized by Godunov fluxes against exterior state 0,
//! together with discrete entropy and boundary-condition residuals.

use serde::Serialize;

use crate::bv_trace::{total_variation_with_boundary, TraceField, TraceOperator, MIN_TRACE_RESOLUTION};
use crate::error::{Error, Result};
use crate::grid::{CellField, StructuredGrid};
use crate::numerics::{pairwise_sum_by, quintic_cutoff, quintic_cutoff_deriv, sgn, wrap_angle};
use crate::par::map_indices;
use crate::problem::{step_limits, FluxFamily, FluxShape, InitialData, Scenario};
use crate::scheme::{Discretization, Godunov, NumericalFlux};
use crate::viscous::{
    check_growth, default_range, time_derivative_norm, Clock, SeriesRecord, SolveOptions, ViscousRun,
};

/// Test function: product of quintic bumps in space and time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestFunction {
    pub center: [f64; 2],
    /// Chart radii per spatial axis.
    pub radius: [f64; 2],
    pub t_center: f64,
    pub t_radius: f64,
}

fn bump(xi: f64) -> (f64, f64) {
    let a = xi.abs();
    (quintic_cutoff(a), quintic_cutoff_deriv(a) * sgn(xi))
}

impl TestFunction {
    /// Value, covector `d_x phi`, and `d_t phi` at `(z, t)`.
    pub fn eval(&self, z: [f64; 2], t: f64, dim: usize) -> (f64, [f64; 2], f64) {
        let (p0, d0) = bump((z[0] - self.center[0]) / self.radius[0]);
        let (p1, d1) = if dim == 2 {
            bump(wrap_angle(z[1] - self.center[1]) / self.radius[1])
        } else {
            (1.0, 0.0)
        };
        let (pt, dt) = bump((t - self.t_center) / self.t_radius);
        let space = p0 * p1;
        (
            space * pt,
            [d0 / self.radius[0] * p1 * pt, p0 * d1 / self.radius[1] * pt],
            space * dt / self.t_radius,
        )
    }
}

/// Levels and test functions for entropy diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyCheckConfig {
    pub kruzkov_levels: Vec<f64>,
    pub boundary_samples: usize,
    pub test_functions: Vec<TestFunction>,
    /// Width of the smoothed sign used in the `S_eta` diagnostics.
    pub eta: f64,
}

impl EntropyCheckConfig {
    /// `levels` uniform Kruzkov levels over `[-bound, bound]`, a 3x3(x3)
    /// lattice of test functions.
    pub fn new(grid: &StructuredGrid, horizon: f64, bound: f64, levels: usize, boundary_samples: usize) -> Self {
        let kruzkov_levels = if levels == 1 {
            vec![0.0]
        } else {
            (0..levels)
                .map(|i| -bound + 2.0 * bound * i as f64 / (levels - 1) as f64)
                .collect()
        };
        let g = grid.geometry();
        let mid = 0.5 * (g.lo + g.hi);
        let half = 0.5 * (g.hi - g.lo);
        let third = std::f64::consts::TAU / 3.0;
        let phis: Vec<f64> = if grid.dim() == 2 { vec![0.0, third, 2.0 * third] } else { vec![0.0] };
        let mut test_functions = Vec::new();
        for &s in &[g.lo, mid, g.hi] {
            for &p in &phis {
                for &tc in &[0.25 * horizon, 0.5 * horizon, 0.75 * horizon] {
                    test_functions.push(TestFunction {
                        center: [s, p],
                        radius: [half, third],
                        t_center: tc,
                        t_radius: 0.25 * horizon,
                    });
                }
            }
        }
        Self {
            kruzkov_levels,
            boundary_samples,
            test_functions,
            eta: 1e-3,
        }
    }

    pub fn for_scenario(grid: &StructuredGrid, scenario: &Scenario, bound: f64) -> Self {
        Self::new(
            grid,
            scenario.horizon,
            bound,
            scenario.entropy.kruzkov_levels,
            scenario.entropy.boundary_samples,
        )
    }
}

/// Smoothed absolute value `S_eta`.
pub fn s_eta_primitive(z: f64, eta: f64) -> f64 {
    if z.abs() < eta {
        z * z / (2.0 * eta) + eta / 2.0
    } else {
        z.abs()
    }
}

/// Smoothed sign `s_eta = S_eta'`.
pub fn s_eta(z: f64, eta: f64) -> f64 {
    if z.abs() < eta {
        z / eta
    } else {
        sgn(z)
    }
}

/// Godunov flux through face `face` of `grid` at time `t`.
pub fn godunov_flux(grid: &StructuredGrid, family: &FluxFamily, face: usize, a: f64, b: f64, t: f64) -> f64 {
    let f = &grid.faces()[face];
    let geom = grid.geometry();
    let xi = geom
        .metric_unchecked(f.center)
        .inner(&family.direction(geom, f.center, t), &f.normal)
        * f.measure;
    crate::scheme::godunov(family.shape, xi, a, b)
}

#[derive(Clone, Debug)]
pub struct HyperbolicState {
    pub t: f64,
    pub u: CellField,
}

/// Forward-Euler conservative update; returns the new state and face fluxes.
pub fn step_hyperbolic(disc: &Discretization<'_>, state: &HyperbolicState, dt: f64) -> Result<(HyperbolicState, Vec<f64>)> {
    let (k, fluxes) = disc.rhs(state.u.values(), state.t, 0.0);
    let next: Vec<f64> = state.u.values().iter().zip(&k).map(|(u, r)| u + dt * r).collect();
    let next = disc.grid.field(next)?;
    check_growth(state.t + dt, state.u.linf(), next.linf())?;
    Ok((
        HyperbolicState {
            t: state.t + dt,
            u: next,
        },
        fluxes,
    ))
}

/// `max over cells [ |u_new - k| - |u_old - k| + dt/vol * sum Q ]_+` with the
/// numerical entropy flux `Q(a, b) = F(a v k, b v k) - F(a ^ k, b ^ k)`;
/// boundary faces use exterior state 0.
pub fn entropy_residual_cells(
    disc: &Discretization<'_>,
    u_old: &[f64],
    u_new: &[f64],
    dt: f64,
    t: f64,
    k: f64,
) -> f64 {
    let xi = disc.speeds.at(t);
    entropy_residual_with_speeds(disc, &xi, u_old, u_new, dt, k)
}

fn entropy_residual_with_speeds(
    disc: &Discretization<'_>,
    xi: &[f64],
    u_old: &[f64],
    u_new: &[f64],
    dt: f64,
    k: f64,
) -> f64 {
    let faces = disc.grid.faces();
    let q = map_indices(faces.len(), |f| {
        let face = &faces[f];
        let a = u_old[face.minus];
        let b = face.plus.map_or(0.0, |p| u_old[p]);
        disc.flux.eval(disc.shape, xi[f], a.max(k), b.max(k))
            - disc.flux.eval(disc.shape, xi[f], a.min(k), b.min(k))
    });
    let vols = disc.grid.volumes();
    let per_cell = map_indices(u_old.len(), |c| {
        let mut acc = 0.0;
        for (f, s) in disc.incidence.faces_of(c) {
            acc += s * q[f];
        }
        ((u_new[c] - k).abs() - (u_old[c] - k).abs() + dt * acc / vols[c]).max(0.0)
    });
    per_cell.into_iter().fold(0.0, f64::max)
}

/// `|min over k in I(Tu, 0) of sgn(Tu) (h(Tu) - h(k)) x_n|` where `x_n = <X, N>_g`.
pub fn bln_residual_scalar(shape: FluxShape, x_n: f64, tu: f64, samples: usize) -> f64 {
    if tu == 0.0 {
        return 0.0;
    }
    let (lo, hi) = (tu.min(0.0), tu.max(0.0));
    let s = sgn(tu);
    let value = |k: f64| s * (shape.h(tu) - shape.h(k)) * x_n;
    let mut best = value(lo).min(value(hi));
    if let Some(c) = shape.critical_point() {
        if c >= lo && c <= hi {
            best = best.min(value(c));
        }
    }
    let n = samples.max(2);
    for i in 0..n {
        best = best.min(value(lo + (hi - lo) * i as f64 / (n - 1) as f64));
    }
    best.abs()
}

/// Boundary-condition residual at boundary face `k` (boundary order).
pub fn bln_residual(grid: &StructuredGrid, family: &FluxFamily, k: usize, tu: f64, t: f64, samples: usize) -> f64 {
    let face = &grid.faces()[grid.boundary_faces()[k]];
    let geom = grid.geometry();
    let x_n = geom
        .metric_unchecked(face.center)
        .inner(&family.direction(geom, face.center, t), &face.normal);
    bln_residual_scalar(family.shape, x_n, tu, samples)
}

/// Every step of a run, for space-time diagnostics.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct HyperbolicRun {
    pub state: HyperbolicState,
    pub series: Vec<SeriesRecord>,
    pub traces: Vec<(f64, TraceField)>,
    /// BLN residual per boundary face at each output time.
    pub bln: Vec<(f64, Vec<f64>)>,
    pub snapshots: Vec<(f64, CellField)>,
    pub trajectory: Option<Trajectory>,
    pub initial: CellField,
    pub steps: usize,
    pub tv_steps: Vec<f64>,
    /// Largest `|mass change + dt * boundary outflow|` over all steps.
    pub mass_balance_max: f64,
    /// Largest cell entropy residual over all steps and levels.
    pub entropy_cell_max: f64,
}

pub fn solve_hyperbolic(scenario: &Scenario) -> Result<HyperbolicRun> {
    solve_hyperbolic_with(scenario, &SolveOptions::default())
}

pub fn solve_hyperbolic_with(scenario: &Scenario, opts: &SolveOptions<'_>) -> Result<HyperbolicRun> {
    scenario.validate()?;
    if scenario.epsilon != 0.0 {
        return Err(Error::param("epsilon", "the hyperbolic solver needs epsilon = 0"));
    }
    let grid = scenario.build_grid()?;
    let initial = scenario.initial.sample(&grid)?;
    let range = opts.u_range.unwrap_or_else(|| default_range(&initial));
    let limits = step_limits(&grid, &scenario.flux, 0.0, range);
    let disc = Discretization::new(&grid, &scenario.flux, opts.flux);
    let mut clock = Clock::new(scenario, limits);
    let bound = range.0.abs().max(range.1.abs());
    let config = EntropyCheckConfig::for_scenario(&grid, scenario, bound);
    let trace_op = if grid.shape()[0] >= MIN_TRACE_RESOLUTION {
        Some(TraceOperator::new(&grid)?)
    } else {
        None
    };

    let mut run = HyperbolicRun {
        state: HyperbolicState {
            t: 0.0,
            u: initial.clone(),
        },
        series: Vec::new(),
        traces: Vec::new(),
        bln: Vec::new(),
        snapshots: Vec::new(),
        trajectory: opts.keep_trajectory.then(|| Trajectory {
            times: vec![0.0],
            fields: vec![initial.values().to_vec()],
        }),
        initial: initial.clone(),
        steps: 0,
        tv_steps: Vec::new(),
        mass_balance_max: 0.0,
        entropy_cell_max: 0.0,
    };
    let record = |run: &mut HyperbolicRun, t: f64, u: &CellField, rec: SeriesRecord| -> Result<()> {
        let mut rec = rec;
        if let Some(op) = &trace_op {
            let tr = op.apply(&grid, u)?;
            let b: Vec<f64> = (0..tr.values.len())
                .map(|k| bln_residual(&grid, &scenario.flux, k, tr.values[k], t, config.boundary_samples))
                .collect();
            rec.bln_resid_max = Some(b.iter().copied().fold(0.0, f64::max));
            run.bln.push((t, b));
            run.traces.push((t, tr));
        }
        if opts.keep_snapshots {
            run.snapshots.push((t, u.clone()));
        }
        run.series.push(rec);
        Ok(())
    };

    let mut rec0 = SeriesRecord::measure(&grid, 0.0, &initial)?;
    rec0.entropy_cell_resid_max = Some(0.0);
    rec0.mass_flux_boundary = Some(0.0);
    run.tv_steps.push(rec0.tv_extended);
    record(&mut run, 0.0, &initial, rec0)?;

    let mut window_rate: f64 = 0.0;
    let mut window_entropy: f64 = 0.0;
    let mut mass = grid.integrate(&initial)?;
    let mut state = run.state.clone();
    while !clock.done() {
        let (dt, lands) = clock.step(state.t);
        let (mut next, fluxes) = step_hyperbolic(&disc, &state, dt)?;
        let outflow = disc.boundary_outflow(&fluxes);
        let new_mass = grid.integrate(&next.u)?;
        run.mass_balance_max = run.mass_balance_max.max((new_mass - mass + dt * outflow).abs());
        mass = new_mass;
        let rate = time_derivative_norm(&grid, state.u.values(), next.u.values(), dt);
        if run.steps == 0 {
            run.series[0].dudt_l1 = rate;
        }
        window_rate = window_rate.max(rate);
        if scenario.entropy.cell_check {
            let xi = disc.speeds.at(state.t);
            for &k in &config.kruzkov_levels {
                let r = entropy_residual_with_speeds(&disc, &xi, state.u.values(), next.u.values(), dt, k);
                window_entropy = window_entropy.max(r);
            }
        }
        run.steps += 1;
        run.tv_steps.push(total_variation_with_boundary(&grid, &next.u, 0.0)?);
        if lands {
            next.t = clock.times[clock.next];
        }
        if let Some(tr) = run.trajectory.as_mut() {
            tr.times.push(next.t);
            tr.fields.push(next.u.values().to_vec());
        }
        if lands {
            let mut rec = SeriesRecord::measure(&grid, next.t, &next.u)?;
            rec.dudt_l1 = window_rate;
            rec.entropy_cell_resid_max = Some(window_entropy);
            rec.mass_flux_boundary = Some(outflow);
            run.entropy_cell_max = run.entropy_cell_max.max(window_entropy);
            window_rate = 0.0;
            window_entropy = 0.0;
            record(&mut run, next.t, &next.u, rec)?;
            clock.next += 1;
        }
        state = next;
    }
    run.state = state;
    Ok(run)
}

/// Space-time weak entropy functional for every `(k, phi)` pair.
#[derive(Clone, Debug, Serialize)]
pub struct WeakEntropyReport {
    pub min: f64,
    pub argmin: (f64, usize),
    pub values: Vec<(f64, usize, f64)>,
}

/// Discretized entropy inequality over a stored trajectory:
///
/// ```text
/// int int |u-k| d_t phi + sgn(u-k) <f(u)-f(k), grad phi>
///   + int_bdry sgn(k) <f(Tu)-f(k), N> phi >= 0
/// ```
pub fn entropy_residual_weak(
    grid: &StructuredGrid,
    family: &FluxFamily,
    trajectory: &Trajectory,
    config: &EntropyCheckConfig,
) -> Result<WeakEntropyReport> {
    let steps = trajectory.fields.len();
    if steps < 8 || trajectory.times.len() != steps {
        return Err(Error::param(
            "trajectory",
            "need the field after every step (at least 8 steps)",
        ));
    }
    if let Some(tf) = config.test_functions.first() {
        let gaps = trajectory.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if gaps > 0.25 * tf.t_radius {
            return Err(Error::param("trajectory", "snapshot cadence too coarse for the test functions"));
        }
    }
    let geom = grid.geometry();
    let dim = grid.dim();
    let op = TraceOperator::new(grid)?;
    let vols = grid.volumes();
    let centers = grid.centers();
    let bfaces = grid.boundary_faces();
    let traces: Vec<Vec<f64>> = trajectory
        .fields
        .iter()
        .map(|u| (0..op.len()).map(|k| op.apply_face(u, k).0).collect())
        .collect();
    let pairs: Vec<(f64, usize)> = config
        .kruzkov_levels
        .iter()
        .flat_map(|&k| (0..config.test_functions.len()).map(move |p| (k, p)))
        .collect();
    let values = map_indices(pairs.len(), |idx| {
        let (k, p) = pairs[idx];
        let phi = &config.test_functions[p];
        let hk = family.shape.h(k);
        let per_step: Vec<f64> = (0..steps - 1)
            .map(|n| {
                let (t0, t1) = (trajectory.times[n], trajectory.times[n + 1]);
                let dt = t1 - t0;
                let tm = 0.5 * (t0 + t1);
                let u = &trajectory.fields[n];
                let interior = pairwise_sum_by(u.len(), |c| {
                    let z = centers[c];
                    let (v1, _, _) = phi.eval(z, t1, dim);
                    let (v0, _, _) = phi.eval(z, t0, dim);
                    let time_part = (u[c] - k).abs() * (v1 - v0);
                    let (_, dphi, _) = phi.eval(z, tm, dim);
                    let x = family.direction(geom, z, tm);
                    let xdphi: f64 = x.comps().iter().zip(&dphi).map(|(a, b)| a * b).sum();
                    let space = sgn(u[c] - k) * (family.shape.h(u[c]) - hk) * xdphi * dt;
                    (time_part + space) * vols[c]
                });
                let boundary = pairwise_sum_by(bfaces.len(), |q| {
                    let face = &grid.faces()[bfaces[q]];
                    let (v, _, _) = phi.eval(face.center, tm, dim);
                    if v == 0.0 {
                        return 0.0;
                    }
                    let x_n = geom
                        .metric_unchecked(face.center)
                        .inner(&family.direction(geom, face.center, tm), &face.normal);
                    sgn(k) * (family.shape.h(traces[n][q]) - hk) * x_n * v * face.measure * dt
                });
                interior + boundary
            })
            .collect();
        crate::numerics::pairwise_sum(&per_step)
    });
    let mut report = WeakEntropyReport {
        min: f64::INFINITY,
        argmin: (0.0, 0),
        values: Vec::with_capacity(pairs.len()),
    };
    for (&(k, p), &v) in pairs.iter().zip(&values) {
        if v < report.min {
            report.min = v;
            report.argmin = (k, p);
        }
        report.values.push((k, p, v));
    }
    Ok(report)
}

/// Result of a run through either solver, reduced to what comparisons need.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub grid: StructuredGrid,
    pub snapshots: Vec<(f64, CellField)>,
    pub series: Vec<SeriesRecord>,
}

impl From<(StructuredGrid, ViscousRun)> for Evolution {
    fn from((grid, run): (StructuredGrid, ViscousRun)) -> Self {
        Self {
            grid,
            snapshots: run.snapshots,
            series: run.series,
        }
    }
}

/// Run the solver selected by `epsilon` and keep output-time snapshots.
pub fn evolve(scenario: &Scenario, opts: &SolveOptions<'_>) -> Result<Evolution> {
    let grid = scenario.build_grid()?;
    let opts = SolveOptions {
        keep_snapshots: true,
        ..*opts
    };
    if scenario.epsilon > 0.0 {
        let run = crate::viscous::solve_viscous_with(scenario, &opts)?;
        Ok((grid, run).into())
    } else {
        let run = solve_hyperbolic_with(scenario, &opts)?;
        Ok(Evolution {
            grid,
            snapshots: run.snapshots,
            series: run.series,
        })
    }
}

/// `|u(t) - v(t)|_L1` at every output time for two runs of the same scenario
/// from different initial data, sharing one time-step sequence.
pub fn l1_contraction_check(scenario: &Scenario, u0_a: &InitialData, u0_b: &InitialData) -> Result<Vec<f64>> {
    l1_contraction_check_with(scenario, u0_a, u0_b, &Godunov)
}

/// [`l1_contraction_check`] with a chosen numerical flux.
pub fn l1_contraction_check_with(
    scenario: &Scenario,
    u0_a: &InitialData,
    u0_b: &InitialData,
    flux: &dyn NumericalFlux,
) -> Result<Vec<f64>> {
    let grid = scenario.build_grid()?;
    let a = u0_a.sample(&grid)?;
    let b = u0_b.sample(&grid)?;
    let bound = a.linf().max(b.linf());
    let opts = SolveOptions {
        u_range: Some((-bound, bound)),
        raw_initial: true,
        flux,
        ..SolveOptions::default()
    };
    let sa = Scenario {
        initial: u0_a.clone(),
        ..scenario.clone()
    };
    let sb = Scenario {
        initial: u0_b.clone(),
        ..scenario.clone()
    };
    let ra = evolve(&sa, &opts)?;
    let rb = evolve(&sb, &opts)?;
    ra.snapshots
        .iter()
        .zip(&rb.snapshots)
        .map(|((_, u), (_, v))| grid.l1_norm(&u.axpby(1.0, v, -1.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartGeometry, Weight};
    use crate::problem::InitialProfile;

    fn shock(n: usize, horizon: f64) -> Scenario {
        Scenario::new(
            ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(),
            FluxFamily::transverse(FluxShape::Burgers, 1.0),
            InitialProfile::Constant { value: 1.0 },
            horizon,
            vec![n],
        )
    }

    #[test]
    fn godunov_boundary_examples() {
        let sc = shock(10, 1.0);
        let g = sc.build_grid().unwrap();
        let b = g.boundary_faces();
        assert_eq!(godunov_flux(&g, &sc.flux, b[0], 1.0, 0.0, 0.0), 0.0);
        assert_eq!(godunov_flux(&g, &sc.flux, b[1], 1.0, 0.0, 0.0), 0.5);
    }

    #[test]
    fn bln_examples() {
        assert_eq!(bln_residual_scalar(FluxShape::Burgers, 1.0, 0.0, 101), 0.0);
        assert!(bln_residual_scalar(FluxShape::Burgers, 1.0, 1.0, 101) < 1e-15);
        assert!((bln_residual_scalar(FluxShape::Burgers, 1.0, -1.0, 101) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let sc = shock(32, 0.5).with_initial(InitialProfile::Constant { value: 0.0 });
        let run = solve_hyperbolic(&sc).unwrap();
        assert!(run.state.u.values().iter().all(|&v| v == 0.0));
        assert_eq!(run.entropy_cell_max, 0.0);
    }

    #[test]
    fn inflow_datum_opens_a_fan() {
        let run = solve_hyperbolic(&shock(200, 0.5)).unwrap();
        let u = run.state.u.values();
        // u = x / t behind the fan head x = t
        assert!((u[40] - 0.2025 / 0.5).abs() < 0.03, "{}", u[40]);
        assert!(u[150] > 0.99);
        assert!(run.entropy_cell_max <= 1e-12, "{}", run.entropy_cell_max);
        assert!(run.mass_balance_max <= 1e-12);
        assert!(run.tv_steps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn entropy_cells_constant_state() {
        let sc = shock(20, 1.0);
        let g = sc.build_grid().unwrap();
        let d = Discretization::new(&g, &sc.flux, &Godunov);
        let state = HyperbolicState {
            t: 0.0,
            u: g.field_from_fn(|_| 0.4),
        };
        let (next, _) = step_hyperbolic(&d, &state, 0.02).unwrap();
        for k in [-1.0, -0.2, 0.0, 0.3, 0.4, 0.9] {
            let r = entropy_residual_cells(&d, state.u.values(), next.u.values(), 0.02, 0.0, k);
            assert!(r <= 1e-12, "k = {k}: {r}");
        }
    }

    #[test]
    fn flipped_flux_breaks_entropy() {
        struct Flipped;
        impl NumericalFlux for Flipped {
            fn eval(&self, shape: FluxShape, xi: f64, a: f64, b: f64) -> f64 {
                crate::scheme::godunov(shape, xi, b, a)
            }
            fn name(&self) -> &'static str {
                "flipped"
            }
        }
        let sc = shock(20, 1.0).with_initial(InitialProfile::Step {
            at: 0.5,
            left: 1.0,
            right: 0.0,
        });
        let g = sc.build_grid().unwrap();
        let d = Discretization::new(&g, &sc.flux, &Flipped);
        let state = HyperbolicState {
            t: 0.0,
            u: sc.initial.sample(&g).unwrap(),
        };
        let (k, _) = d.rhs(state.u.values(), 0.0, 0.0);
        let next: Vec<f64> = state.u.values().iter().zip(&k).map(|(u, r)| u + 0.02 * r).collect();
        let worst = (0..=10)
            .map(|i| entropy_residual_cells(&d, state.u.values(), &next, 0.02, 0.0, i as f64 / 10.0))
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn weak_residual_vanishes_for_zero() {
        let sc = shock(32, 0.5).with_initial(InitialProfile::Constant { value: 0.0 });
        let run = solve_hyperbolic_with(
            &sc,
            &SolveOptions {
                keep_trajectory: true,
                u_range: Some((-1.0, 1.0)),
                ..SolveOptions::default()
            },
        )
        .unwrap();
        let g = sc.build_grid().unwrap();
        let cfg = EntropyCheckConfig::new(&g, 0.5, 1.0, 5, 101);
        let rep = entropy_residual_weak(&g, &sc.flux, run.trajectory.as_ref().unwrap(), &cfg).unwrap();
        assert!(rep.min.abs() < 1e-3, "{}", rep.min);
    }

    #[test]
    fn contraction_identical_data() {
        let sc = shock(40, 1.0);
        let d = l1_contraction_check(&sc, &sc.initial, &sc.initial).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }
}
