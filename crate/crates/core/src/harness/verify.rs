//! Named property checks grouped in suites. Each check reports a measured
//! value, the bound it is held to, and the property it exercises.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bv_trace::{
    boundary_normal_components, compose_trace_check, cutoff_pairing, extract_trace, total_variation,
    trace_formula_residual, TraceOperator,
};
use crate::entropy::{
    bln_residual_scalar, entropy_residual_weak, evolve, l1_contraction_check_with, solve_hyperbolic_with,
    EntropyCheckConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{ChartGeometry, Profile, TangentVector, Weight};
use crate::grid::{BoundaryMode, StructuredGrid};
use crate::harness::scenarios;
use crate::numerics::{observed_order, quintic_cutoff};
use crate::oracles::{viscosity_limit_study, BurgersCase};
use crate::harness::config::OracleSpec;
use crate::harness::study::oracle_field;
use crate::problem::{
    h21_surrogate, mollify_initial, verify_div_free, FluxFamily, FluxShape, InitialData, InitialProfile,
    MollifierSpec, Scenario,
};
use crate::scheme::{FaceSpeeds, Godunov, Incidence, NumericalFlux};
use crate::viscous::{solve_viscous_with, time_derivative_l1, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Trace,
    Viscous,
    Entropy,
    Contraction,
    Limit,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Geometry,
        Suite::Trace,
        Suite::Viscous,
        Suite::Entropy,
        Suite::Contraction,
        Suite::Limit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Trace => "trace",
            Suite::Viscous => "viscous",
            Suite::Entropy => "entropy",
            Suite::Contraction => "contraction",
            Suite::Limit => "limit",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single suite or all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    One(Suite),
    All,
}

impl Selection {
    pub fn suites(self) -> Vec<Suite> {
        match self {
            Selection::One(s) => vec![s],
            Selection::All => Suite::ALL.to_vec(),
        }
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Selection::All);
        }
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == s)
            .map(|&suite| Selection::One(suite))
            .ok_or_else(|| Error::InvalidQuery(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    /// The property the check exercises.
    pub anchor: &'static str,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
    pub note: Option<String>,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{} [{}] value={:.6e} bound: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.anchor,
            self.value,
            self.bound
        )?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} passed, {} failed", self.checks.len(), self.checks.len() - failed, failed)
    }
}

/// Measured value and verdict of one check.
struct Outcome {
    value: f64,
    passed: bool,
    note: Option<String>,
}

impl Outcome {
    fn at_most(value: f64, bound: f64) -> Self {
        Self {
            value,
            passed: value <= bound,
            note: None,
        }
    }

    fn at_least(value: f64, bound: f64) -> Self {
        Self {
            value,
            passed: value >= bound,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

struct Runner<'a> {
    report: Report,
    flux: &'a dyn NumericalFlux,
}

impl Runner<'_> {
    fn check(
        &mut self,
        suite: Suite,
        name: &'static str,
        anchor: &'static str,
        bound: &str,
        f: impl FnOnce(&dyn NumericalFlux) -> Result<Outcome>,
    ) {
        let start = Instant::now();
        let (value, passed, note) = match f(self.flux) {
            Ok(o) => (o.value, o.passed && o.value.is_finite(), o.note),
            Err(e) => (f64::NAN, false, Some(format!("error: {e}"))),
        };
        self.report.checks.push(Check {
            suite,
            name,
            anchor,
            value,
            bound: bound.to_string(),
            passed,
            note,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}

/// Run the selected suites with the Godunov flux.
pub fn verify(selection: Selection) -> Report {
    verify_with(selection, &Godunov)
}

/// Run the selected suites with `flux` in every solver call.
pub fn verify_with(selection: Selection, flux: &dyn NumericalFlux) -> Report {
    let mut r = Runner {
        report: Report::default(),
        flux,
    };
    for suite in selection.suites() {
        match suite {
            Suite::Geometry => geometry_suite(&mut r),
            Suite::Trace => trace_suite(&mut r),
            Suite::Viscous => viscous_suite(&mut r),
            Suite::Entropy => entropy_suite(&mut r),
            Suite::Contraction => contraction_suite(&mut r),
            Suite::Limit => limit_suite(&mut r),
        }
    }
    r.report
}

fn sample_points(geom: &ChartGeometry, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let s = rng.gen_range(geom.lo..=geom.hi);
            let phi = if geom.dim() == 2 {
                rng.gen_range(0.0..std::f64::consts::TAU)
            } else {
                0.0
            };
            [s, phi]
        })
        .collect()
}

fn all_geometries() -> Vec<ChartGeometry> {
    let mut out: Vec<ChartGeometry> = scenarios::shipped_families().into_iter().map(|(g, _)| g).collect();
    out.push(ChartGeometry::revolution(Profile::Cylinder, 0.0, 2.0).expect("valid cylinder"));
    out
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

/// Largest increase between consecutive entries (0 for non-increasing data).
fn max_increase(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn min_order(errors: &[f64]) -> f64 {
    errors
        .windows(2)
        .map(|w| observed_order(w[0], w[1], 2.0))
        .fold(f64::INFINITY, f64::min)
}

fn geometry_suite(r: &mut Runner<'_>) {
    let s = Suite::Geometry;
    r.check(s, "metric_positive_definite", "Riemannian metric", "|g g^-1 - I| <= 1e-12 and det g > 0", |_| {
        let mut worst: f64 = 0.0;
        for geom in all_geometries() {
            for z in sample_points(&geom, 200, 11) {
                let m = geom.metric_at(z)?;
                if !(m.sqrt_det > 0.0 && m.g[0][0] > 0.0) {
                    return Ok(Outcome::at_most(f64::INFINITY, 0.0));
                }
                for i in 0..m.dim {
                    for j in 0..m.dim {
                        let p: f64 = (0..m.dim).map(|k| m.g[i][k] * m.g_inv[k][j]).sum();
                        worst = worst.max((p - if i == j { 1.0 } else { 0.0 }).abs());
                    }
                }
            }
        }
        Ok(Outcome::at_most(worst, 1e-12))
    });
    r.check(s, "band_ricci_is_metric", "Ricci tensor of the unit sphere", "|Ric - g| <= 1e-12", |_| {
        let geom = scenarios::quarter_band();
        let mut worst: f64 = 0.0;
        for z in sample_points(&geom, 200, 12) {
            let m = geom.metric_at(z)?;
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((m.ricci[i][j] - m.g[i][j]).abs());
                }
            }
        }
        Ok(Outcome::at_most(worst, 1e-12))
    });
    r.check(s, "cylinder_ricci_zero", "Ricci tensor of a flat surface", "|Ric| <= 1e-14", |_| {
        let geom = ChartGeometry::revolution(Profile::Cylinder, 0.0, 2.0)?;
        let mut worst: f64 = 0.0;
        for z in sample_points(&geom, 100, 13) {
            let m = geom.metric_at(z)?;
            worst = worst.max(m.ricci.iter().flatten().fold(0.0, |a: f64, v| a.max(v.abs())));
        }
        Ok(Outcome::at_most(worst, 1e-14))
    });
    r.check(s, "commutator_flat_interval", "commutator identity", "<= 1e-8 at fd_step 1e-3", |_| {
        let geom = ChartGeometry::interval(Weight::Unit, 0.0, 1.0)?;
        let u = |z: [f64; 2]| (3.0 * z[0]).sin() + z[0].powi(4);
        let mut worst: f64 = 0.0;
        for x in [0.2, 0.4, 0.6, 0.8] {
            worst = worst.max(geom.commutator_residual_at(&u, [x, 0.0], 1e-3)?.value);
        }
        Ok(Outcome::at_most(worst, 1e-8))
    });
    r.check(s, "commutator_flat_cylinder", "commutator identity", "<= 1e-8 at fd_step 1e-3", |_| {
        let geom = ChartGeometry::revolution(Profile::Cylinder, 0.0, 3.0)?;
        let u = |z: [f64; 2]| z[0].sin() * (1.0 + 0.5 * z[1].cos());
        let mut worst: f64 = 0.0;
        for z in [[1.3, 0.5], [0.7, 2.0], [2.1, 4.0]] {
            worst = worst.max(geom.commutator_residual_at(&u, z, 1e-3)?.value);
        }
        Ok(Outcome::at_most(worst, 1e-8))
    });
    r.check(s, "commutator_band_halving", "commutator identity", "residual ratio >= 2 per fd_step halving", |_| {
        let geom = scenarios::quarter_band();
        let u = |z: [f64; 2]| z[0].cos() * (1.0 + 0.3 * z[1].sin()) + z[0].powi(3);
        let mut worst = f64::INFINITY;
        for z in [[1.1, 0.7], [0.95, 3.0], [1.35, 5.0]] {
            let res: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
                .iter()
                .map(|&h| geom.commutator_residual_at(&u, z, h).map(|v| v.value))
                .collect::<Result<_>>()?;
            for w in res.windows(2) {
                worst = worst.min(w[0] / w[1]);
            }
        }
        Ok(Outcome::at_least(worst, 2.0))
    });
    r.check(s, "flux_divergence_free", "divergence-free flux", "<= 1e-5 at t in {0, T/2, T}", |_| {
        let mut worst: f64 = 0.0;
        for (geom, fam) in scenarios::shipped_families() {
            let res = if geom.dim() == 2 { vec![8, 8] } else { vec![8] };
            let grid = StructuredGrid::build(geom, &res)?;
            for t in [0.0, 0.25, 0.5] {
                for u in [-0.8, 0.3, 1.0] {
                    worst = worst.max(verify_div_free(&fam, &grid, t, u)?);
                }
            }
        }
        Ok(Outcome::at_most(worst, 1e-5))
    });
    r.check(s, "face_speeds_conservative", "divergence-free flux", "interior face-speed sums <= 1e-13", |_| {
        let sc = scenarios::revolution_linear(24, 16);
        let grid = sc.build_grid()?;
        let inc = Incidence::new(&grid);
        let mut worst: f64 = 0.0;
        for t in [0.0, 0.3, 0.45] {
            let xi = FaceSpeeds::new(&grid, &sc.flux).at(t);
            for c in 0..grid.cell_count() {
                if inc.faces_of(c).any(|(f, _)| grid.faces()[f].is_boundary()) {
                    continue;
                }
                let sum: f64 = inc.faces_of(c).map(|(f, sg)| sg * xi[f]).sum();
                worst = worst.max(sum.abs());
            }
        }
        Ok(Outcome::at_most(worst, 1e-13))
    });
    r.check(s, "band_area", "Riemannian volume", "relative error <= 1e-3", |_| {
        let geom = scenarios::quarter_band();
        let grid = StructuredGrid::build(geom, &[64, 128])?;
        let area: f64 = grid.volumes().iter().sum();
        let exact = std::f64::consts::TAU * (geom.lo.cos() - geom.hi.cos());
        Ok(Outcome::at_most((area - exact).abs() / exact, 1e-3))
    });
    r.check(s, "laplace_beltrami_eigenfunction", "Laplace-Beltrami operator", "interior relative error <= 1e-3", |_| {
        let geom = ChartGeometry::band(0.4, 2.7)?;
        let grid = StructuredGrid::build(geom, &[64, 128])?;
        let u = grid.field_from_fn(|z| z[0].cos());
        let lap = grid.discrete_laplace(&u, BoundaryMode::DirichletZero)?;
        let n2 = grid.shape()[1];
        let mut worst: f64 = 0.0;
        for (c, z) in grid.centers().iter().enumerate() {
            let i = c / n2;
            if i < 2 || i + 2 >= grid.shape()[0] {
                continue;
            }
            worst = worst.max((lap.values()[c] + 2.0 * z[0].cos()).abs());
        }
        Ok(Outcome::at_most(worst / 2.0, 1e-3))
    });
}

/// `X = chi(theta) d_theta`, equal to `d_theta` near the lower boundary of the
/// quarter band and vanishing near the upper one.
fn lower_side_field(z: [f64; 2]) -> TangentVector {
    let (a, b) = (std::f64::consts::FRAC_PI_4 + 0.2, std::f64::consts::FRAC_PI_2 - 0.2);
    TangentVector::d2(quintic_cutoff((z[0] - a) / (b - a)), 0.0)
}

fn trace_suite(r: &mut Runner<'_>) {
    let s = Suite::Trace;
    let band = scenarios::quarter_band();
    let unit_theta = |_z: [f64; 2]| TangentVector::d2(1.0, 0.0);
    r.check(s, "trace_formula_smooth_order", "trace formula", "observed order >= 1.7 over N = 32, 64, 128", |_| {
        let errs: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let g = StructuredGrid::build(band, &[n, 2 * n])?;
                trace_formula_residual(&g, &g.field_from_fn(|z| z[0].cos()), &unit_theta)
            })
            .collect::<Result<_>>()?;
        Ok(Outcome::at_least(min_order(&errs), 1.7).with_note(format!("residuals {}", sci(&errs))))
    });
    r.check(s, "trace_formula_piecewise_order", "trace formula", "observed order >= 0.9 over N = 32, 64, 128", |_| {
        let errs: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let g = StructuredGrid::build(band, &[n, 2 * n])?;
                let u = g.field_from_fn(|z| if z[0] < 1.2 { 1.0 } else { 0.25 });
                trace_formula_residual(&g, &u, &unit_theta)
            })
            .collect::<Result<_>>()?;
        Ok(Outcome::at_least(min_order(&errs), 0.9).with_note(format!("residuals {}", sci(&errs))))
    });
    r.check(s, "trace_bounded", "trace boundedness", "max(|Tu| - |u|_inf) <= 0", |_| {
        let g = StructuredGrid::build(band, &[32, 64])?;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..5 {
            let u = g.field((0..g.cell_count()).map(|_| rng.gen_range(-2.0..2.0)).collect())?;
            let tr = extract_trace(&g, &u)?;
            let m = u.linf();
            worst = worst.max(tr.values.iter().map(|v| v.abs() - m).fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Outcome::at_most(worst, 0.0))
    });
    r.check(s, "trace_constants", "trace of a constant", "|Tc - c| <= 1e-14", |_| {
        let g = StructuredGrid::build(ChartGeometry::revolution(Profile::Sine { alpha: 0.3, length: 2.0 }, 0.0, 2.0)?, &[32, 32])?;
        let tr = extract_trace(&g, &g.field_from_fn(|_| -1.75))?;
        Ok(Outcome::at_most(tr.values.iter().map(|v| (v + 1.75).abs()).fold(0.0, f64::max), 1e-14))
    });
    r.check(s, "trace_linear", "trace linearity", "|T(au + bv) - aTu - bTv| <= 1e-12 (unclamped)", |_| {
        let g = StructuredGrid::build(band, &[32, 64])?;
        let op = TraceOperator::new(&g)?;
        let u = g.field_from_fn(|z| z[0].sin() * z[1].cos());
        let v = g.field_from_fn(|z| (3.0 * z[0]).cos() + 0.2 * z[1]);
        let w = u.axpby(2.0, &v, -0.5);
        let (tu, tv, tw) = (op.apply(&g, &u)?, op.apply(&g, &v)?, op.apply(&g, &w)?);
        let worst = (0..tw.raw.len())
            .map(|k| (tw.raw[k] - 2.0 * tu.raw[k] + 0.5 * tv.raw[k]).abs())
            .fold(0.0, f64::max);
        Ok(Outcome::at_most(worst, 1e-12))
    });
    r.check(s, "trace_second_order", "trace as boundary limit", "unclamped error ratio >= 3 per halving", |_| {
        let errs: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let g = StructuredGrid::build(band, &[n, 2 * n])?;
                let tr = extract_trace(&g, &g.field_from_fn(|z| z[0].cos()))?;
                Ok(g.boundary_faces()
                    .iter()
                    .enumerate()
                    .map(|(k, &f)| (tr.raw[k] - g.faces()[f].center[0].cos()).abs())
                    .fold(0.0, f64::max))
            })
            .collect::<Result<_>>()?;
        let ratio = errs.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
        Ok(Outcome::at_least(ratio, 3.0).with_note(format!("errors {}", sci(&errs))))
    });
    r.check(s, "trace_composition", "trace of a composition", "<= C h with C from N = 32, halving per refinement", |_| {
        let mut prev: Option<(f64, f64)> = None;
        let mut c0 = 0.0;
        let mut worst_ratio = f64::INFINITY;
        let mut ok = true;
        for n in [32, 64, 128] {
            let g = StructuredGrid::build(band, &[n, 2 * n])?;
            let u = g.field_from_fn(|z| 0.5 + z[0].cos());
            let e = compose_trace_check(&g, &u, &|v| 0.5 * v * v)?;
            let h = g.widths()[0];
            match prev {
                None => c0 = e / h,
                Some((pe, _)) => {
                    ok &= e <= c0 * h;
                    worst_ratio = worst_ratio.min(pe / e);
                }
            }
            prev = Some((e, h));
        }
        let mut o = Outcome::at_least(worst_ratio, 2.0);
        o.passed &= ok;
        Ok(o)
    });
    r.check(s, "cutoff_pairing_band", "cutoff approximation of the boundary integral", "relative gap <= 2% at delta = 0.05", |_| {
        let g = StructuredGrid::build(band, &[128, 256])?;
        let u = g.field_from_fn(|z| z[0].cos());
        let pairing = cutoff_pairing(&g, &u, &lower_side_field, 0.05)?;
        let tr = extract_trace(&g, &u)?;
        let xn = boundary_normal_components(&g, &lower_side_field);
        let vals: Vec<f64> = tr.values.iter().zip(&xn).map(|(t, x)| t * x).collect();
        let bdry = g.boundary_integrate(&vals)?;
        Ok(Outcome::at_most((pairing - bdry).abs() / bdry.abs(), 0.02)
            .with_note(format!("pairing {pairing:.6}, boundary {bdry:.6}")))
    });
}

fn viscous_opts(flux: &dyn NumericalFlux) -> SolveOptions<'_> {
    SolveOptions {
        flux,
        ..SolveOptions::default()
    }
}

fn raw_sup(sc: &Scenario) -> Result<f64> {
    Ok(sc.initial.sample(&sc.build_grid()?)?.linf())
}

const EPS_LIST: [f64; 3] = [0.1, 0.05, 0.025];

fn viscous_suite(r: &mut Runner<'_>) {
    let s = Suite::Viscous;
    r.check(s, "max_principle_viscous", "maximum principle", "|u(t)|_inf - |u0|_inf <= 1e-8", |flux| {
        let mut worst = f64::NEG_INFINITY;
        for sc in [
            scenarios::shock_exit(200).with_epsilon(0.05),
            scenarios::band_burgers(32, 64).with_epsilon(0.05),
            scenarios::revolution_linear(32, 32).with_epsilon(0.02),
        ] {
            let bound = raw_sup(&sc)?;
            let run = solve_viscous_with(&sc, &viscous_opts(flux))?;
            worst = worst.max(run.series.iter().map(|rec| rec.linf - bound).fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Outcome::at_most(worst, 1e-8))
    });
    r.check(s, "tvd_unit_interval_viscous", "total variation control", "per-step TV increase <= 1e-12", |flux| {
        let mut worst: f64 = 0.0;
        for sc in [
            scenarios::shock_exit(200).with_epsilon(0.05),
            scenarios::smooth_linear(200).with_epsilon(0.025),
        ] {
            let run = solve_viscous_with(&sc, &viscous_opts(flux))?;
            worst = worst.max(max_increase(&run.tv_steps));
        }
        Ok(Outcome::at_most(worst, 1e-12))
    });
    r.check(s, "time_derivative_uniform", "time-derivative bound", "max |du/dt|_L1 <= c1 tv(u0), c1 fitted at eps = 0.1", |flux| {
        let mut ratios = Vec::new();
        for eps in EPS_LIST {
            let sc = scenarios::shock_exit(200).with_epsilon(eps);
            let grid = sc.build_grid()?;
            let tv0 = total_variation(&grid, &sc.initial.sample(&grid)?)?.tv_jump;
            let run = solve_viscous_with(&sc, &viscous_opts(flux))?;
            ratios.push(time_derivative_l1(&run.series)? / tv0);
        }
        let c1 = ratios[0];
        let worst = ratios[1..].iter().map(|q| q / c1).fold(0.0, f64::max);
        Ok(Outcome::at_most(worst, 1.0).with_note(format!("c1 = {c1:.4}, ratios {ratios:.4?}")))
    });
    r.check(s, "mollifier_sup_clamp", "mollified data sup bound", "|u0^eps|_inf <= |u0|_inf exactly", |_| {
        let mut worst = f64::NEG_INFINITY;
        for sc in [scenarios::shock_exit(400), scenarios::band_burgers(64, 128)] {
            let g = sc.build_grid()?;
            let u0 = sc.initial.sample(&g)?;
            for eps in EPS_LIST {
                let m = mollify_initial(&g, &u0, eps, &MollifierSpec::default())?;
                worst = worst.max(m.linf() - u0.linf());
            }
        }
        Ok(Outcome::at_most(worst, 0.0))
    });
    r.check(s, "mollifier_convergence", "mollified data convergence", "L1 and TV distances non-increasing as eps decreases", |_| {
        let mut worst: f64 = 0.0;
        for sc in [scenarios::shock_exit(400), scenarios::band_burgers(64, 128)] {
            let g = sc.build_grid()?;
            let u0 = sc.initial.sample(&g)?;
            let tv0 = total_variation(&g, &u0)?.tv_jump;
            let mut l1 = Vec::new();
            let mut tv = Vec::new();
            for eps in EPS_LIST {
                let m = mollify_initial(&g, &u0, eps, &MollifierSpec::default())?;
                l1.push(g.l1_norm(&m.axpby(1.0, &u0, -1.0))?);
                tv.push((total_variation(&g, &m)?.tv_jump - tv0).abs());
            }
            worst = worst.max(max_increase(&l1)).max(max_increase(&tv));
        }
        Ok(Outcome::at_most(worst, 0.0))
    });
    r.check(s, "mollifier_h21_uniform", "mollified data second-derivative bound", "eps |u0^eps|_{H^{2,1}} <= c0 tv(u0), c0 fitted at eps = 0.1", |_| {
        let mut worst: f64 = 0.0;
        let mut note = String::new();
        for sc in [scenarios::shock_exit(400), scenarios::band_burgers(64, 128)] {
            let g = sc.build_grid()?;
            let u0 = sc.initial.sample(&g)?;
            let tv0 = total_variation(&g, &u0)?.tv_jump;
            let q: Vec<f64> = EPS_LIST
                .iter()
                .map(|&eps| {
                    let m = mollify_initial(&g, &u0, eps, &MollifierSpec::default())?;
                    Ok(h21_surrogate(&g, &m, eps)? / tv0)
                })
                .collect::<Result<_>>()?;
            worst = worst.max(q[1] / q[0]).max(q[2] / q[0]);
            note.push_str(&format!("{q:.3?} "));
        }
        Ok(Outcome::at_most(worst, 1.0).with_note(note.trim_end().to_string()))
    });
    r.check(s, "heat_decay", "Laplace-Beltrami diffusion", "relative L1 gap to exp(-eps pi^2 T) sin(pi x) <= 1e-2", |flux| {
        let sc = Scenario::new(
            ChartGeometry::interval(Weight::Unit, 0.0, 1.0)?,
            FluxFamily::transverse(FluxShape::Linear, 0.0),
            InitialProfile::Sine { k: 1.0, amplitude: 1.0 },
            0.5,
            vec![100],
        )
        .with_epsilon(0.1);
        let opts = SolveOptions {
            raw_initial: true,
            ..viscous_opts(flux)
        };
        let run = solve_viscous_with(&sc, &opts)?;
        let g = sc.build_grid()?;
        let decay = (-0.1 * std::f64::consts::PI.powi(2) * 0.5).exp();
        let exact = g.field_from_fn(|z| decay * (std::f64::consts::PI * z[0]).sin());
        let gap = g.l1_norm(&run.state.u.axpby(1.0, &exact, -1.0))? / g.l1_norm(&exact)?;
        Ok(Outcome::at_most(gap, 1e-2))
    });
}

fn entropy_suite(r: &mut Runner<'_>) {
    let s = Suite::Entropy;
    r.check(s, "numerical_flux_monotone", "monotone scheme", "consistency and monotonicity violations <= 1e-14", |flux| {
        let vals: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let mut worst: f64 = 0.0;
        for shape in [FluxShape::Linear, FluxShape::Burgers] {
            for xi in [1.0, -0.7] {
                for &a in &vals {
                    worst = worst.max((flux.eval(shape, xi, a, a) - xi * shape.h(a)).abs());
                    for &b in &vals {
                        let f = flux.eval(shape, xi, a, b);
                        worst = worst.max(f - flux.eval(shape, xi, a + 0.05, b));
                        worst = worst.max(flux.eval(shape, xi, a, b + 0.05) - f);
                    }
                }
            }
        }
        Ok(Outcome::at_most(worst, 1e-14))
    });
    r.check(s, "entropy_cells", "discrete entropy inequality", "cell residual <= 1e-12, all steps and 21 levels", |flux| {
        let mut worst: f64 = 0.0;
        for sc in [scenarios::shock_exit(100), scenarios::boundary_rarefaction(100), scenarios::band_burgers(32, 64)] {
            let run = solve_hyperbolic_with(&sc, &viscous_opts(flux))?;
            worst = worst.max(run.entropy_cell_max);
        }
        Ok(Outcome::at_most(worst, 1e-12))
    });
    r.check(s, "entropy_weak", "entropy inequality with boundary term", "weak residual >= -5e-3 at N = 200", |flux| {
        let sc = scenarios::shock_exit(200);
        let opts = SolveOptions {
            keep_trajectory: true,
            ..viscous_opts(flux)
        };
        let run = solve_hyperbolic_with(&sc, &opts)?;
        let grid = sc.build_grid()?;
        let cfg = EntropyCheckConfig::for_scenario(&grid, &sc, 1.0);
        let traj = run.trajectory.ok_or_else(|| Error::param("trajectory", "missing"))?;
        let w = entropy_residual_weak(&grid, &sc.flux, &traj, &cfg)?;
        Ok(Outcome::at_least(w.min, -5e-3))
    });
    r.check(s, "bln_shock_exit", "boundary condition", "BLN residual <= 0.05 on both boundaries at t = 1, N = 200", |flux| {
        let run = solve_hyperbolic_with(&scenarios::shock_exit(200), &viscous_opts(flux))?;
        let (_, b) = run.bln.last().ok_or_else(|| Error::param("bln", "no boundary data"))?;
        Ok(Outcome::at_most(b.iter().copied().fold(0.0, f64::max), 0.05))
    });
    r.check(s, "bln_analytic_violation", "boundary condition", "Tu = -1 at the outflow boundary gives 0.5 +- 1e-6", |_| {
        let v = bln_residual_scalar(FluxShape::Burgers, 1.0, -1.0, 101);
        Ok(Outcome {
            value: v,
            passed: (v - 0.5).abs() <= 1e-6,
            note: None,
        })
    });
    r.check(s, "mass_balance", "conservation", "per-step mass defect <= 1e-12", |flux| {
        let mut worst: f64 = 0.0;
        for sc in [scenarios::shock_exit(100), scenarios::band_burgers(32, 64)] {
            worst = worst.max(solve_hyperbolic_with(&sc, &viscous_opts(flux))?.mass_balance_max);
        }
        Ok(Outcome::at_most(worst, 1e-12))
    });
    r.check(s, "max_principle_hyperbolic", "maximum principle", "|u(t)|_inf - |u0|_inf <= 1e-8", |flux| {
        let mut worst = f64::NEG_INFINITY;
        for sc in [scenarios::shock_exit(200), scenarios::band_burgers(32, 64), scenarios::band_shear(50, 64)] {
            let bound = raw_sup(&sc)?;
            let run = solve_hyperbolic_with(&sc, &viscous_opts(flux))?;
            worst = worst.max(run.series.iter().map(|rec| rec.linf - bound).fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Outcome::at_most(worst, 1e-8))
    });
    r.check(s, "tvd_unit_interval_hyperbolic", "total variation control", "per-step TV increase <= 1e-12", |flux| {
        let mut worst: f64 = 0.0;
        for sc in [scenarios::shock_exit(200), scenarios::boundary_rarefaction(200), scenarios::smooth_linear(200)] {
            let run = solve_hyperbolic_with(&sc, &viscous_opts(flux))?;
            worst = worst.max(max_increase(&run.tv_steps));
        }
        Ok(Outcome::at_most(worst, 1e-12))
    });
    for (name, case, scen) in [
        ("shock_exit_order", BurgersCase::ShockExit, scenarios::shock_exit as ScenarioFn),
        ("boundary_rarefaction_order", BurgersCase::BoundaryRarefaction, scenarios::boundary_rarefaction),
    ] {
        r.check(s, name, "convergence to the entropy solution", "L1 order >= 0.5 over N = 100, 200, 400", move |flux| {
            let errs = oracle_errors(flux, scen, OracleSpec::Burgers(case), &[100, 200, 400])?;
            Ok(Outcome::at_least(min_order(&errs), 0.5).with_note(format!("errors {}", sci(&errs))))
        });
    }
}

type ScenarioFn = fn(usize) -> Scenario;

fn oracle_errors(
    flux: &dyn NumericalFlux,
    scen: ScenarioFn,
    oracle: OracleSpec,
    levels: &[usize],
) -> Result<Vec<f64>> {
    levels
        .iter()
        .map(|&n| {
            let sc = scen(n);
            let sc = sc.clone().with_cadence(sc.horizon);
            let ev = evolve(&sc, &viscous_opts(flux))?;
            let (t, u) = ev.snapshots.last().ok_or_else(|| Error::param("snapshots", "empty"))?;
            let exact = oracle_field(&sc, oracle, &ev.grid, *t)?;
            ev.grid.l1_norm(&u.axpby(1.0, &exact, -1.0))
        })
        .collect()
}

fn contraction_suite(r: &mut Runner<'_>) {
    let s = Suite::Contraction;
    let pairs: [(&'static str, Scenario, InitialProfile); 3] = [
        ("l1_contraction_interval", scenarios::shock_exit(200), InitialProfile::Sine { k: 2.0, amplitude: 0.8 }),
        ("l1_contraction_band", scenarios::band_burgers(32, 64), InitialProfile::Constant { value: 0.4 }),
        (
            "l1_contraction_viscous",
            scenarios::shock_exit(200).with_epsilon(0.05),
            InitialProfile::Step {
                at: 0.3,
                left: -0.5,
                right: 0.7,
            },
        ),
    ];
    for (name, sc, other) in pairs {
        r.check(s, name, "L1 contraction", "|u - v|_L1 non-increasing within 1e-10", move |flux| {
            let d = l1_contraction_check_with(&sc, &sc.initial, &InitialData::Profile(other), flux)?;
            Ok(Outcome::at_most(max_increase(&d), 1e-10).with_note(format!("distances {d:.4?}")))
        });
    }
    r.check(s, "linear_oracle_order", "convergence to the transported solution", "L1 order >= 0.8 on interval, weighted interval and band rotation", |flux| {
        let mut worst = f64::INFINITY;
        let cases: [(ScenarioFn, [usize; 3]); 3] = [
            (scenarios::smooth_linear, [100, 200, 400]),
            (scenarios::weighted_linear, [100, 200, 400]),
            (scenarios::band_rotation, [16, 32, 64]),
        ];
        for (scen, levels) in cases {
            let errs = oracle_errors(flux, scen, OracleSpec::Characteristic, &levels)?;
            worst = worst.min(min_order(&errs));
        }
        Ok(Outcome::at_least(worst, 0.8))
    });
    r.check(s, "band_rotation_return", "convergence to the transported solution", "L1 error after one period <= C h T, C = |c| |d_phi^2 u0|_L1 / 2", |flux| {
        let mut worst: f64 = 0.0;
        let mut c = f64::NAN;
        for n in [16, 32, 64] {
            let sc = scenarios::band_rotation(n);
            let sc = sc.clone().with_cadence(sc.horizon);
            let ev = evolve(&sc, &viscous_opts(flux))?;
            c = 0.5 * sc.flux.c.eval(0.0).abs() * azimuthal_curvature_l1(&sc)?;
            let u0 = sc.initial.sample(&ev.grid)?;
            let (_, u) = ev.snapshots.last().ok_or_else(|| Error::param("snapshots", "empty"))?;
            let err = ev.grid.l1_norm(&u.axpby(1.0, &u0, -1.0))?;
            worst = worst.max(err / (c * ev.grid.widths()[1] * sc.horizon));
        }
        Ok(Outcome::at_most(worst, 1.0).with_note(format!("C = {c:.4}")))
    });
}

/// `|d_phi^2 u0|_L1` by second differences on a fine grid.
fn azimuthal_curvature_l1(sc: &Scenario) -> Result<f64> {
    let InitialData::Profile(p) = sc.initial else {
        return Err(Error::param("initial", "needs an analytic profile"));
    };
    let geom = sc.geometry;
    let g = StructuredGrid::build(geom, &[256, 512])?;
    let k = 1e-3;
    let d2 = g.field_from_fn(|z| {
        (p.eval(&geom, [z[0], z[1] + k]) - 2.0 * p.eval(&geom, z) + p.eval(&geom, [z[0], z[1] - k])) / (k * k)
    });
    g.l1_norm(&d2)
}

fn limit_suite(r: &mut Runner<'_>) {
    let s = Suite::Limit;
    for (name, sc) in [
        ("viscosity_limit_shock_exit", scenarios::shock_exit(200)),
        ("viscosity_limit_band_burgers", scenarios::band_burgers(32, 64)),
    ] {
        r.check(s, name, "vanishing viscosity limit", "space-time L1 distance strictly decreasing over eps = 0.1, 0.05, 0.025", move |_| {
            let t = viscosity_limit_study(&sc, &EPS_LIST)?;
            let d: Vec<f64> = t.rows.iter().map(|r| r.l1_distance).collect();
            let worst = d.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            Ok(Outcome {
                value: worst,
                passed: t.strictly_decreasing(),
                note: Some(format!("distances {}", sci(&d))),
            })
        });
    }
    r.check(s, "viscosity_limit_rate", "vanishing viscosity limit", "fitted rate in sqrt(eps) >= 0.4 (smooth linear)", |_| {
        let t = viscosity_limit_study(&scenarios::smooth_linear(200), &EPS_LIST)?;
        Ok(Outcome::at_least(t.fitted_rate.unwrap_or(f64::NAN), 0.4))
    });
}
