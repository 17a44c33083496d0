//! Flux families, initial data, mollification and time-step control.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ChartGeometry, GeometryKind, TangentVector, DEFAULT_FD_STEP};
use crate::grid::{BoundaryMode, CellField, StructuredGrid};
use crate::numerics::{pairwise_sum_by, quintic_cutoff, wrap_angle};

/// Scalar factor `h(u)` of a separable flux `f(u, x, t) = h(u) X(x, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxShape {
    Linear,
    Burgers,
}

impl FluxShape {
    pub fn h(self, u: f64) -> f64 {
        match self {
            FluxShape::Linear => u,
            FluxShape::Burgers => 0.5 * u * u,
        }
    }

    pub fn dh(self, u: f64) -> f64 {
        match self {
            FluxShape::Linear => 1.0,
            FluxShape::Burgers => u,
        }
    }

    /// Interior critical point of `h`, if any.
    pub fn critical_point(self) -> Option<f64> {
        match self {
            FluxShape::Linear => None,
            FluxShape::Burgers => Some(0.0),
        }
    }

    /// `sup |h'|` over `[lo, hi]`.
    pub fn max_speed(self, lo: f64, hi: f64) -> f64 {
        match self {
            FluxShape::Linear => 1.0,
            FluxShape::Burgers => lo.abs().max(hi.abs()),
        }
    }
}

/// Time modulation `a(t)` of the transverse component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TimeProfile {
    Const { value: f64 },
    /// `amplitude * sin(2 pi t / period)`.
    Sine { amplitude: f64, period: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Const { value } => value,
            TimeProfile::Sine { amplitude, period } => {
                amplitude * (std::f64::consts::TAU * t / period).sin()
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match *self {
            TimeProfile::Const { value } => value.abs(),
            TimeProfile::Sine { amplitude, .. } => amplitude.abs(),
        }
    }
}

/// Azimuthal component `c(s)` of 2D direction fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum AzimuthalProfile {
    Const { c0: f64 },
    /// `c0 + c1 * s`.
    Linear { c0: f64, c1: f64 },
}

impl AzimuthalProfile {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            AzimuthalProfile::Const { c0 } => c0,
            AzimuthalProfile::Linear { c0, c1 } => c0 + c1 * s,
        }
    }
}

/// `f(u, x, t) = h(u) X(x, t)` with `X = (a(t)/sqrt|g|, c(s))` on surfaces and
/// `X = a(t)/w(x)` on intervals. `div_g X = 0` holds identically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxFamily {
    pub shape: FluxShape,
    pub a: TimeProfile,
    pub c: AzimuthalProfile,
}

impl FluxFamily {
    pub fn new(shape: FluxShape, a: TimeProfile, c: AzimuthalProfile) -> Self {
        Self { shape, a, c }
    }

    /// Transverse transport at constant rate `a`.
    pub fn transverse(shape: FluxShape, a: f64) -> Self {
        Self::new(shape, TimeProfile::Const { value: a }, AzimuthalProfile::Const { c0: 0.0 })
    }

    /// Pure azimuthal rotation at rate `c`.
    pub fn rotation(shape: FluxShape, c: f64) -> Self {
        Self::new(shape, TimeProfile::Const { value: 0.0 }, AzimuthalProfile::Const { c0: c })
    }

    fn field_with(&self, geom: &ChartGeometry, z: [f64; 2], a: f64) -> TangentVector {
        let sqrt_det = geom.metric_unchecked(z).sqrt_det;
        match geom.kind {
            GeometryKind::WeightedInterval { .. } => TangentVector::d1(a / sqrt_det),
            _ => TangentVector::d2(a / sqrt_det, self.c.eval(z[0])),
        }
    }

    /// Direction field `X(z, t)`.
    pub fn direction(&self, geom: &ChartGeometry, z: [f64; 2], t: f64) -> TangentVector {
        self.field_with(geom, z, self.a.eval(t))
    }

    /// Direction field with `a` replaced by `sup |a|`; bounds `|X|` pointwise.
    pub fn direction_bound(&self, geom: &ChartGeometry, z: [f64; 2]) -> TangentVector {
        self.field_with(geom, z, self.a.sup_abs())
    }

    pub fn flux_eval(&self, geom: &ChartGeometry, u: f64, z: [f64; 2], t: f64) -> TangentVector {
        self.direction(geom, z, t).scale(self.shape.h(u))
    }

    pub fn dflux_eval(&self, geom: &ChartGeometry, u: f64, z: [f64; 2], t: f64) -> TangentVector {
        self.direction(geom, z, t).scale(self.shape.dh(u))
    }

    /// `sup |h'| * sup |X|_g` over `u_range` and the grid's cell centers.
    pub fn wave_speed_bound(&self, grid: &StructuredGrid, u_range: (f64, f64)) -> f64 {
        let geom = grid.geometry();
        let sup_x = grid
            .centers()
            .iter()
            .enumerate()
            .map(|(c, &z)| grid.metric(c).norm(&self.direction_bound(geom, z)))
            .fold(0.0, f64::max);
        self.shape.max_speed(u_range.0, u_range.1) * sup_x
    }
}

/// Max over 10^3 seeded sample points of `|div_g f(u_frozen, ., t)|`.
pub fn verify_div_free(family: &FluxFamily, grid: &StructuredGrid, t: f64, u_frozen: f64) -> Result<f64> {
    let geom = *grid.geometry();
    let field = |z: [f64; 2]| family.flux_eval(&geom, u_frozen, z, t);
    max_divergence(&geom, &field, 1000, 0x5eed)
}

/// Max of `|div_at(X)|` over `samples` seeded random points.
pub fn max_divergence(
    geom: &ChartGeometry,
    field: &dyn Fn([f64; 2]) -> TangentVector,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z = [
            rng.gen_range(geom.lo..=geom.hi),
            if geom.dim() == 2 {
                rng.gen_range(0.0..std::f64::consts::TAU)
            } else {
                0.0
            },
        ];
        worst = worst.max(geom.div_at(field, z, DEFAULT_FD_STEP)?.value.abs());
    }
    Ok(worst)
}

/// Named analytic initial profiles, functions of chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum InitialProfile {
    Constant { value: f64 },
    /// `left` for `z1 < at`, `right` otherwise.
    Step { at: f64, left: f64, right: f64 },
    /// Compactly supported C2 bump of metric radius `radius`.
    Bump { center: [f64; 2], radius: f64, amplitude: f64 },
    /// `amplitude * sin(k pi (z1 - lo) / (hi - lo))`.
    Sine { k: f64, amplitude: f64 },
    /// `amplitude * cos(z1)`.
    Cosine { amplitude: f64 },
    /// `amplitude * sin(k pi (z1 - lo) / (hi - lo)) * cos(m z2)`.
    Mode { k: f64, m: f64, amplitude: f64 },
}

impl InitialProfile {
    pub fn eval(&self, geom: &ChartGeometry, z: [f64; 2]) -> f64 {
        match *self {
            InitialProfile::Constant { value } => value,
            InitialProfile::Step { at, left, right } => {
                if z[0] < at {
                    left
                } else {
                    right
                }
            }
            InitialProfile::Bump {
                center,
                radius,
                amplitude,
            } => {
                let dn = z[0] - center[0];
                let d = if geom.dim() == 2 {
                    let r = geom.radius(center[0]).0;
                    let dt = r * wrap_angle(z[1] - center[1]);
                    (dn * dn + dt * dt).sqrt()
                } else {
                    dn.abs()
                };
                amplitude * quintic_cutoff(d / radius)
            }
            InitialProfile::Sine { k, amplitude } => {
                amplitude * (k * std::f64::consts::PI * (z[0] - geom.lo) / (geom.hi - geom.lo)).sin()
            }
            InitialProfile::Cosine { amplitude } => amplitude * z[0].cos(),
            InitialProfile::Mode { k, m, amplitude } => {
                let s = (k * std::f64::consts::PI * (z[0] - geom.lo) / (geom.hi - geom.lo)).sin();
                amplitude * s * (m * z[1]).cos()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum InitialData {
    Profile(InitialProfile),
    Csv { path: PathBuf },
}

impl InitialData {
    pub fn sample(&self, grid: &StructuredGrid) -> Result<CellField> {
        match self {
            InitialData::Profile(p) => {
                let geom = *grid.geometry();
                Ok(grid.field_from_fn(|z| p.eval(&geom, z)))
            }
            InitialData::Csv { path } => grid.read_field_csv(path),
        }
    }
}

/// Initial-data mollifier: truncated Gaussian of width `sqrt(eps)` in chart
/// arclength, weighted by cell volume, renormalized on the domain and clamped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    /// Truncation radius in units of the kernel width.
    pub truncation: f64,
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self { truncation: 3.0 }
    }
}

impl MollifierSpec {
    pub fn width(&self, epsilon: f64) -> f64 {
        epsilon.sqrt()
    }
}

pub fn mollify_initial(grid: &StructuredGrid, u0: &CellField, epsilon: f64, spec: &MollifierSpec) -> Result<CellField> {
    grid.check(u0)?;
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", "mollification needs epsilon > 0"));
    }
    let geom = grid.geometry();
    let sigma = spec.width(epsilon);
    let half = 0.5 * geom.transverse_distance(geom.lo, geom.hi);
    if sigma > half {
        return Err(Error::param(
            "epsilon",
            format!("kernel width {sigma} exceeds the domain half-width {half}"),
        ));
    }
    let bound = u0.linf();
    let reach = spec.truncation * sigma;
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    let vols = grid.volumes();
    let values = crate::par::map_indices(grid.cell_count(), |c| {
        let ball = grid.ball_cells(grid.centers()[c], reach);
        let w: Vec<f64> = ball.iter().map(|b| (-b.dist2 * inv2s2).exp() * vols[b.cell]).collect();
        let mass = pairwise_sum_by(w.len(), |k| w[k]);
        let acc = pairwise_sum_by(w.len(), |k| w[k] * u0.values()[ball[k].cell]);
        (acc / mass).clamp(-bound, bound)
    });
    grid.field(values)
}

/// `eps * (|u|_L1 + |grad u|_L1 + |lap u|_L1)`, the weighted second-order
/// Sobolev surrogate tracked for mollified data.
pub fn h21_surrogate(grid: &StructuredGrid, u: &CellField, epsilon: f64) -> Result<f64> {
    let l1 = grid.l1_norm(u)?;
    let d = grid.discrete_differential(u)?;
    let grad = pairwise_sum_by(u.len(), |c| grid.metric(c).conorm(&d[c]) * grid.volumes()[c]);
    let lap = grid.discrete_laplace(u, BoundaryMode::DirichletZero)?;
    Ok(epsilon * (l1 + grad + grid.l1_norm(&lap)?))
}

/// Time-step bounds for the explicit schemes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLimits {
    /// `h_min / lambda_max`, from per-cell face wave speeds.
    pub advective: f64,
    /// `h_min^2 / (2 n eps gamma_max)`, from per-cell diffusion weights.
    pub diffusive: f64,
    /// Largest step keeping every forward-Euler stage monotone.
    pub monotone: f64,
}

pub fn step_limits(grid: &StructuredGrid, flux: &FluxFamily, epsilon: f64, u_range: (f64, f64)) -> StepLimits {
    let geom = grid.geometry();
    let speed = flux.shape.max_speed(u_range.0, u_range.1);
    let n = grid.cell_count();
    let mut adv = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let mut diff_ghost = vec![0.0; n];
    for face in grid.faces() {
        let m = geom.metric_unchecked(face.center);
        let xi = m.inner(&flux.direction_bound(geom, face.center), &face.normal).abs() * face.measure;
        adv[face.minus] += 0.5 * speed * xi;
        diff[face.minus] += face.diffusion;
        match face.plus {
            Some(p) => {
                adv[p] += 0.5 * speed * xi;
                diff[p] += face.diffusion;
                diff_ghost[p] += face.diffusion;
                diff_ghost[face.minus] += face.diffusion;
            }
            None => diff_ghost[face.minus] += 2.0 * face.diffusion,
        }
    }
    let vols = grid.volumes();
    let mut advective = f64::INFINITY;
    let mut diffusive = f64::INFINITY;
    let mut monotone = f64::INFINITY;
    for c in 0..n {
        let a = adv[c] / vols[c];
        let d = epsilon * diff[c] / vols[c];
        let total = a + epsilon * diff_ghost[c] / vols[c];
        if a > 0.0 {
            advective = advective.min(1.0 / a);
        }
        if d > 0.0 {
            diffusive = diffusive.min(1.0 / d);
        }
        if total > 0.0 {
            monotone = monotone.min(1.0 / total);
        }
    }
    StepLimits {
        advective,
        diffusive,
        monotone,
    }
}

/// `cfl * min(h/lambda, h^2/(2 n eps gamma))`, additionally capped so each
/// forward-Euler stage stays monotone, and by the remaining horizon.
pub fn stable_dt_with(limits: &StepLimits, cfl: f64, remaining: f64) -> f64 {
    let nominal = cfl * limits.advective.min(limits.diffusive);
    nominal.min(limits.monotone).min(remaining)
}

pub fn stable_dt(scenario: &Scenario, grid: &StructuredGrid, t: f64, u_range: (f64, f64)) -> f64 {
    let limits = step_limits(grid, &scenario.flux, scenario.epsilon, u_range);
    stable_dt_with(&limits, scenario.cfl, scenario.horizon - t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Time between recorded outputs.
    pub cadence: f64,
    pub snapshots: bool,
}

/// Overrides for the entropy diagnostics of the hyperbolic solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySettings {
    pub kruzkov_levels: usize,
    pub boundary_samples: usize,
    pub cell_check: bool,
}

impl Default for EntropySettings {
    fn default() -> Self {
        Self {
            kruzkov_levels: 21,
            boundary_samples: 101,
            cell_check: true,
        }
    }
}

/// The unit of a reproducible run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub geometry: ChartGeometry,
    pub flux: FluxFamily,
    pub initial: InitialData,
    pub horizon: f64,
    pub resolution: Vec<usize>,
    pub cfl: f64,
    pub epsilon: f64,
    pub mollifier: MollifierSpec,
    pub output: OutputSpec,
    pub entropy: EntropySettings,
}

impl Scenario {
    pub fn new(
        geometry: ChartGeometry,
        flux: FluxFamily,
        initial: InitialProfile,
        horizon: f64,
        resolution: Vec<usize>,
    ) -> Self {
        Self {
            geometry,
            flux,
            initial: InitialData::Profile(initial),
            horizon,
            resolution,
            cfl: 0.45,
            epsilon: 0.0,
            mollifier: MollifierSpec::default(),
            output: OutputSpec {
                cadence: horizon / 4.0,
                snapshots: false,
            },
            entropy: EntropySettings::default(),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_resolution(mut self, resolution: Vec<usize>) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_cadence(mut self, cadence: f64) -> Self {
        self.output.cadence = cadence;
        self
    }

    pub fn with_initial(mut self, initial: InitialProfile) -> Self {
        self.initial = InitialData::Profile(initial);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", "must be > 0"));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::param("cfl", "must lie in (0, 1)"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", "must be >= 0"));
        }
        if !(self.output.cadence > 0.0) {
            return Err(Error::param("cadence", "must be > 0"));
        }
        if self.resolution.len() != self.geometry.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.geometry.dim(),
                got: self.resolution.len(),
            });
        }
        if let TimeProfile::Sine { period, .. } = self.flux.a {
            if !(period > 0.0) {
                return Err(Error::param("a_period", "must be > 0"));
            }
        }
        if self.entropy.kruzkov_levels == 0 || self.entropy.boundary_samples < 2 {
            return Err(Error::param("entropy", "need at least one level and two boundary samples"));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<StructuredGrid> {
        StructuredGrid::build(self.geometry, &self.resolution)
    }

    /// Output times `0, cadence, 2 cadence, ..., horizon`.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        let mut k = 1usize;
        loop {
            let t = k as f64 * self.output.cadence;
            if t >= self.horizon * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(self.horizon);
        times
    }
}
