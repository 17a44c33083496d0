//! Independent reference solutions: characteristic tracing for linear flux,
//! closed-form Burgers solutions on the unit interval, and the comparison of
//! viscous runs against the finite-volume limit.

use serde::{Deserialize, Serialize};

use crate::entropy::evolve;
use crate::error::{Error, Result};
use crate::geometry::ChartGeometry;
use crate::grid::{CellField, StructuredGrid};
use crate::numerics::{ls_slope, pairwise_sum_by};
use crate::problem::{FluxFamily, FluxShape, Scenario};
use crate::viscous::SolveOptions;

/// Bisection tolerance for boundary exit points, in chart units.
pub const EXIT_TOL: f64 = 1e-10;

/// Fourth-order Runge-Kutta tracer for `dz/dtau = X(z, tau)`.
#[derive(Clone, Copy, Debug)]
pub struct CharacteristicTracer {
    pub geometry: ChartGeometry,
    pub flux: FluxFamily,
    pub step: f64,
}

/// End point of a traced path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Traced {
    /// Reached the final time inside `M`.
    Inside([f64; 2]),
    /// Left through the boundary at this time and point.
    Exit { t: f64, z: [f64; 2] },
}

impl CharacteristicTracer {
    /// Tracer with RK4 step `h / 4` for the transverse cell width `h` of `grid`.
    pub fn for_grid(grid: &StructuredGrid, flux: FluxFamily) -> Self {
        Self {
            geometry: *grid.geometry(),
            flux,
            step: grid.widths()[0] / 4.0,
        }
    }

    fn velocity(&self, z: [f64; 2], t: f64) -> [f64; 2] {
        let x = self.flux.direction(&self.geometry, z, t);
        let c = x.comps();
        [c[0], c.get(1).copied().unwrap_or(0.0)]
    }

    fn rk4(&self, z: [f64; 2], t: f64, dt: f64) -> [f64; 2] {
        let add = |z: [f64; 2], k: [f64; 2], s: f64| [z[0] + s * k[0], z[1] + s * k[1]];
        let k1 = self.velocity(z, t);
        let k2 = self.velocity(add(z, k1, 0.5 * dt), t + 0.5 * dt);
        let k3 = self.velocity(add(z, k2, 0.5 * dt), t + 0.5 * dt);
        let k4 = self.velocity(add(z, k3, dt), t + dt);
        let mut out = [
            z[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            z[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if self.geometry.dim() == 2 {
            out[1] = out[1].rem_euclid(std::f64::consts::TAU);
        }
        out
    }

    fn inside(&self, z: [f64; 2]) -> bool {
        z[0] >= self.geometry.lo && z[0] <= self.geometry.hi
    }

    /// Trace from `(z, t0)` to time `t1` (either direction).
    pub fn trace(&self, z: [f64; 2], t0: f64, t1: f64) -> Result<Traced> {
        if !self.inside(z) {
            return Err(Error::Domain { point: z });
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::param("step", "tracer step must be positive"));
        }
        let span = t1 - t0;
        let n = (span.abs() / self.step).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        let mut z = z;
        for i in 0..n {
            let t = t0 + i as f64 * dt;
            let next = self.rk4(z, t, dt);
            if !next.iter().all(|v| v.is_finite()) {
                return Err(Error::Oracle(format!("integration failed at t = {t}")));
            }
            if !self.inside(next) {
                // Bisect on the sub-step length for the crossing point.
                let (mut lo, mut hi) = (0.0, 1.0);
                let mut zc = z;
                while (hi - lo) * dt.abs() > EXIT_TOL {
                    let mid = 0.5 * (lo + hi);
                    let zm = self.rk4(z, t, mid * dt);
                    if self.inside(zm) {
                        lo = mid;
                        zc = zm;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                return Ok(Traced::Exit { t: t + lo * dt, z: zc });
            }
            z = next;
        }
        Ok(Traced::Inside(z))
    }

    /// First time the forward path from `(z, t0)` leaves `M`, searched up to `t_max`.
    pub fn exit_time(&self, z: [f64; 2], t0: f64, t_max: f64) -> Result<Option<f64>> {
        match self.trace(z, t0, t_max)? {
            Traced::Exit { t, .. } => Ok(Some(t)),
            Traced::Inside(_) => Ok(None),
        }
    }
}

/// Solution of the linear problem at `(x, t)`: initial data transported along
/// characteristics, datum 0 on paths entering through the boundary.
pub fn characteristic_solution(
    tracer: &CharacteristicTracer,
    u0: &dyn Fn([f64; 2]) -> f64,
    x: [f64; 2],
    t: f64,
) -> Result<f64> {
    if tracer.flux.shape != FluxShape::Linear {
        return Err(Error::Oracle("characteristic solution needs linear flux".into()));
    }
    match tracer.trace(x, t, 0.0)? {
        Traced::Inside(z) => Ok(u0(z)),
        Traced::Exit { .. } => Ok(0.0),
    }
}

/// Closed-form Burgers problems on `(0, 1)` with `w = 1`, `a = 1`, datum 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BurgersCase {
    /// `u0 = 1` on `(0, 1/2)`, `0` on `(1/2, 1)`: a fan opens at the inflow
    /// boundary and the shock leaves through `x = 1` at `t = 1`.
    ShockExit,
    /// `u0 = -1`: fan centered at `(1, 0)`.
    BoundaryRarefaction,
}

pub fn burgers_interval_exact(case: BurgersCase, x: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Oracle(format!("({x}, {t}) outside the validity range")));
    }
    Ok(match case {
        BurgersCase::ShockExit => {
            if t == 0.0 {
                if x < 0.5 {
                    1.0
                } else {
                    0.0
                }
            } else if x < t.min(1.0) || t >= 1.0 {
                x / t
            } else if x < 0.5 * (1.0 + t) {
                1.0
            } else {
                0.0
            }
        }
        BurgersCase::BoundaryRarefaction => {
            if x < 1.0 - t {
                -1.0
            } else {
                (x - 1.0) / t
            }
        }
    })
}

/// `sum |field - oracle(center, t)| * volume`.
pub fn l1_error(grid: &StructuredGrid, field: &CellField, oracle: &dyn Fn([f64; 2], f64) -> f64, t: f64) -> Result<f64> {
    grid.check(field)?;
    let u = field.values();
    let centers = grid.centers();
    let vols = grid.volumes();
    Ok(pairwise_sum_by(u.len(), |c| (u[c] - oracle(centers[c], t)).abs() * vols[c]))
}

/// Like [`l1_error`] with an oracle that may fail.
pub fn l1_error_checked(
    grid: &StructuredGrid,
    field: &CellField,
    oracle: &dyn Fn([f64; 2], f64) -> Result<f64>,
    t: f64,
) -> Result<f64> {
    grid.check(field)?;
    let values = grid
        .centers()
        .iter()
        .map(|&z| oracle(z, t))
        .collect::<Result<Vec<f64>>>()?;
    let exact = grid.field(values)?;
    grid.l1_norm(&field.axpby(1.0, &exact, -1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViscosityLimitRow {
    pub epsilon: f64,
    pub l1_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViscosityLimitTable {
    pub rows: Vec<ViscosityLimitRow>,
    /// Least-squares slope of `ln distance` against `ln sqrt(eps)`.
    pub fitted_rate: Option<f64>,
}

impl ViscosityLimitTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].l1_distance < w[0].l1_distance)
    }
}

/// Number of internal snapshot intervals for the space-time quadrature.
pub const LIMIT_INTERVALS: usize = 20;

/// `|u^eps - u^FV|_{L1(M x (0,T))}` per `eps`, by the trapezoidal rule over
/// snapshots at cadence `T / 20`.
pub fn viscosity_limit_study(scenario: &Scenario, epsilons: &[f64]) -> Result<ViscosityLimitTable> {
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("eps", "list must be strictly decreasing"));
    }
    if epsilons.iter().any(|&e| !(e >= 0.0)) {
        return Err(Error::param("eps", "values must be >= 0"));
    }
    let base = Scenario {
        epsilon: 0.0,
        ..scenario.clone()
    }
    .with_cadence(scenario.horizon / LIMIT_INTERVALS as f64);
    let opts = SolveOptions::default();
    let reference = evolve(&base, &opts)?;
    let grid = &reference.grid;
    let mut rows = Vec::new();
    for &eps in epsilons {
        let run = evolve(&base.clone().with_epsilon(eps), &opts)?;
        if run.snapshots.len() != reference.snapshots.len() {
            return Err(Error::param("cadence", "snapshot times differ between runs"));
        }
        let per_time: Vec<f64> = run
            .snapshots
            .iter()
            .zip(&reference.snapshots)
            .map(|((_, u), (_, v))| grid.l1_norm(&u.axpby(1.0, v, -1.0)))
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        for k in 0..per_time.len() - 1 {
            let dt = reference.snapshots[k + 1].0 - reference.snapshots[k].0;
            total += 0.5 * dt * (per_time[k] + per_time[k + 1]);
        }
        rows.push(ViscosityLimitRow {
            epsilon: eps,
            l1_distance: total,
        });
    }
    let fit: Vec<&ViscosityLimitRow> = rows.iter().filter(|r| r.epsilon > 0.0 && r.l1_distance > 0.0).collect();
    let fitted_rate = (fit.len() >= 2).then(|| {
        let xs: Vec<f64> = fit.iter().map(|r| 0.5 * r.epsilon.ln()).collect();
        let ys: Vec<f64> = fit.iter().map(|r| r.l1_distance.ln()).collect();
        ls_slope(&xs, &ys)
    });
    Ok(ViscosityLimitTable { rows, fitted_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Profile, Weight};
    use crate::problem::InitialProfile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

    fn unit_tracer(a: f64) -> CharacteristicTracer {
        CharacteristicTracer {
            geometry: ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(),
            flux: FluxFamily::transverse(FluxShape::Linear, a),
            step: 0.01,
        }
    }

    #[test]
    fn interval_transport() {
        let tr = unit_tracer(1.0);
        let u0 = |z: [f64; 2]| (3.0 * z[0]).sin() + 2.0;
        for &(x, t) in &[(0.8, 0.3), (0.2, 0.3), (0.5, 0.5)] {
            let v = characteristic_solution(&tr, &u0, [x, 0.0], t).unwrap();
            let expect = if x > t { u0([x - t, 0.0]) } else { 0.0 };
            assert!((v - expect).abs() < 1e-12, "{v} {expect}");
        }
    }

    #[test]
    fn band_rotation() {
        let geom = ChartGeometry::band(FRAC_PI_4, FRAC_PI_2).unwrap();
        let tr = CharacteristicTracer {
            geometry: geom,
            flux: FluxFamily::rotation(FluxShape::Linear, 1.0),
            step: 0.01,
        };
        let u0 = |z: [f64; 2]| z[1].sin() * z[0];
        let v = characteristic_solution(&tr, &u0, [1.0, 0.5], 2.0).unwrap();
        let expect = (0.5 - 2.0_f64).rem_euclid(TAU).sin() * 1.0;
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn revolution_exit_time_matches_quadrature() {
        let profile = Profile::Sine { alpha: 0.3, length: 2.0 };
        let geom = ChartGeometry::revolution(profile, 0.0, 2.0).unwrap();
        let tr = CharacteristicTracer {
            geometry: geom,
            flux: FluxFamily::transverse(FluxShape::Linear, 1.0),
            step: 0.01,
        };
        let s0 = 0.25;
        let t = tr.exit_time([s0, 1.0], 0.0, 10.0).unwrap().unwrap();
        // int_{s0}^{2} r ds with r = 1 + 0.3 sin(pi s / 2)
        let pi = std::f64::consts::PI;
        let prim = |s: f64| s - 0.3 * 2.0 / pi * (pi * s / 2.0).cos();
        let exact = prim(2.0) - prim(s0);
        assert!((t - exact).abs() < 1e-8, "{t} {exact}");
    }

    #[test]
    fn forward_then_backward_returns() {
        let geom = ChartGeometry::revolution(Profile::Sine { alpha: 0.4, length: 3.0 }, 0.0, 3.0).unwrap();
        let fam = FluxFamily::new(
            FluxShape::Linear,
            crate::problem::TimeProfile::Sine {
                amplitude: 0.7,
                period: 1.3,
            },
            crate::problem::AzimuthalProfile::Linear { c0: 0.2, c1: 0.5 },
        );
        let tr = CharacteristicTracer {
            geometry: geom,
            flux: fam,
            step: 0.005,
        };
        let z0 = [1.5, 2.0];
        let Traced::Inside(z1) = tr.trace(z0, 0.0, 0.6).unwrap() else {
            panic!("left the domain")
        };
        let Traced::Inside(z2) = tr.trace(z1, 0.6, 0.0).unwrap() else {
            panic!("left the domain")
        };
        assert!((z2[0] - z0[0]).abs() < 1e-8 && (z2[1] - z0[1]).abs() < 1e-8);
    }

    #[test]
    fn burgers_examples() {
        use BurgersCase::*;
        assert_eq!(burgers_interval_exact(ShockExit, 0.3, 0.5).unwrap(), 0.6);
        assert_eq!(burgers_interval_exact(ShockExit, 0.7, 0.5).unwrap(), 1.0);
        assert_eq!(burgers_interval_exact(ShockExit, 0.8, 0.5).unwrap(), 0.0);
        assert_eq!(burgers_interval_exact(ShockExit, 0.3, 1.0).unwrap(), 0.3);
        assert!((burgers_interval_exact(BoundaryRarefaction, 0.9, 0.5).unwrap() + 0.2).abs() < 1e-15);
        assert!(burgers_interval_exact(ShockExit, 1.5, 0.5).is_err());
        assert!(burgers_interval_exact(ShockExit, 0.5, -0.1).is_err());
    }

    #[test]
    fn burgers_exact_satisfies_jump_and_fan_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(0.01..0.99);
            let x: f64 = rng.gen_range(0.0..1.0);
            let d = 1e-6;
            for case in [BurgersCase::ShockExit, BurgersCase::BoundaryRarefaction] {
                let u = |x: f64, t: f64| burgers_interval_exact(case, x, t).unwrap();
                let shock = 0.5 * (1.0 + t);
                let near_kink = (x - t).abs() < 2.0 * d
                    || (x - shock).abs() < 2.0 * d
                    || (x - (1.0 - t)).abs() < 2.0 * d;
                if near_kink || x < 2.0 * d || x > 1.0 - 2.0 * d {
                    continue;
                }
                let ut = (u(x, t + d) - u(x, t - d)) / (2.0 * d);
                let ux = (u(x + d, t) - u(x - d, t)) / (2.0 * d);
                if case == BurgersCase::ShockExit && (x - shock).abs() < 4.0 * d {
                    continue;
                }
                assert!((ut + u(x, t) * ux).abs() < 1e-6, "{case:?} at ({x}, {t})");
            }
            // jump condition: shock speed equals the mean of the adjacent states
            let s = 0.5 * (1.0 + t);
            let (l, r) = (
                burgers_interval_exact(BurgersCase::ShockExit, s - 1e-9, t).unwrap(),
                burgers_interval_exact(BurgersCase::ShockExit, (s + 1e-9).min(1.0), t).unwrap(),
            );
            if t < 0.99 && s + 1e-9 < 1.0 {
                assert!((0.5 * (l + r) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn l1_error_examples() {
        let g = StructuredGrid::build(ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(), &[50]).unwrap();
        let f = g.field_from_fn(|z| z[0] * z[0] + 0.25);
        let oracle = |z: [f64; 2], _t: f64| z[0] * z[0];
        assert!((l1_error(&g, &f, &oracle, 0.0).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_limit_is_zero() {
        let sc = Scenario::new(
            ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(),
            FluxFamily::transverse(FluxShape::Burgers, 1.0),
            InitialProfile::Step {
                at: 0.5,
                left: 1.0,
                right: 0.0,
            },
            0.5,
            vec![50],
        );
        let table = viscosity_limit_study(&sc, &[0.0]).unwrap();
        assert_eq!(table.rows[0].l1_distance, 0.0);
        assert!(viscosity_limit_study(&sc, &[0.01, 0.05]).is_err());
    }
}
