//! Discrete total variation, boundary traces by half-ball averaging, and the
//! trace identities for BV fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::TangentVector;
use crate::grid::{CellField, StructuredGrid};
use crate::numerics::pairwise_sum_by;
use crate::problem::FluxFamily;

/// Gradient magnitudes below this count as zero for the BV surrogate.
pub const TOL_GRAD: f64 = 1e-10;

/// Finite-difference step used for divergences inside the trace identities.
pub const TRACE_FD_STEP: f64 = 1e-5;

/// Inner and outer extraction radii, in units of the adjacent cell width.
pub const TRACE_RADII: (f64, f64) = (4.0, 8.0);

/// Minimum transverse resolution for trace extraction.
pub const MIN_TRACE_RESOLUTION: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TvReport {
    /// `sum |grad_g u|_g dv_g` with the discrete gradient.
    pub tv_gradient: f64,
    /// `sum over interior faces |u_plus - u_minus| * measure`.
    pub tv_jump: f64,
}

pub fn total_variation(grid: &StructuredGrid, field: &CellField) -> Result<TvReport> {
    let d = grid.discrete_differential(field)?;
    let vols = grid.volumes();
    let tv_gradient = pairwise_sum_by(d.len(), |c| grid.metric(c).conorm(&d[c]) * vols[c]);
    Ok(TvReport {
        tv_gradient,
        tv_jump: interior_jump_tv(grid, field.values()),
    })
}

pub(crate) fn interior_jump_tv(grid: &StructuredGrid, u: &[f64]) -> f64 {
    let faces = grid.faces();
    pairwise_sum_by(faces.len(), |f| match faces[f].plus {
        Some(p) => (u[p] - u[faces[f].minus]).abs() * faces[f].measure,
        None => 0.0,
    })
}

/// Jump total variation including the jumps against a boundary datum,
/// the variation of the field extended by `datum` outside `M`.
pub fn total_variation_with_boundary(grid: &StructuredGrid, field: &CellField, datum: f64) -> Result<f64> {
    grid.check(field)?;
    let u = field.values();
    let faces = grid.faces();
    Ok(pairwise_sum_by(faces.len(), |f| {
        let face = &faces[f];
        let other = face.plus.map_or(datum, |p| u[p]);
        (other - u[face.minus]).abs() * face.measure
    }))
}

/// Stencil of the trace estimator at one boundary face.
#[derive(Clone, Debug)]
struct TraceStencil {
    anchor: usize,
    cells: Vec<usize>,
    /// Weights of the extrapolated value, acting on `u - u[anchor]`.
    extrapolate: Vec<f64>,
    /// Weights of `A2 - A1`.
    spread: Vec<f64>,
    radii: [f64; 2],
}

/// Linear trace estimator: averages over half balls of radii `4h` and `8h`
/// around each boundary face center, extrapolated linearly in the mean normal
/// distance of the averaging cells to distance zero.
#[derive(Clone, Debug)]
pub struct TraceOperator {
    stencils: Vec<TraceStencil>,
    coords: Vec<[f64; 2]>,
    key_cells: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceField {
    /// `Tu` per boundary face, clamped to `[-|u|_inf, |u|_inf]`.
    pub values: Vec<f64>,
    /// Unclamped linear estimate.
    pub raw: Vec<f64>,
    /// Boundary face centers in chart coordinates.
    pub coords: Vec<[f64; 2]>,
    /// `|A2 - A1|`, the spread between the two ball averages.
    pub residual: Vec<f64>,
    pub clamped: Vec<bool>,
    /// Extraction radii `(rho1, rho2)` per face.
    pub radii: Vec<[f64; 2]>,
}

impl TraceOperator {
    pub fn new(grid: &StructuredGrid) -> Result<Self> {
        if grid.shape()[0] < MIN_TRACE_RESOLUTION {
            return Err(Error::param(
                "resolution",
                format!(
                    "trace extraction needs {MIN_TRACE_RESOLUTION} transverse cells, got {}",
                    grid.shape()[0]
                ),
            ));
        }
        let vols = grid.volumes();
        let mut stencils = Vec::with_capacity(grid.boundary_faces().len());
        let mut coords = Vec::with_capacity(grid.boundary_faces().len());
        for &f in grid.boundary_faces() {
            let face = &grid.faces()[f];
            let h = grid.transverse_metric_width(face.minus);
            let radii = [TRACE_RADII.0 * h, TRACE_RADII.1 * h];
            let balls = [grid.ball_cells(face.center, radii[0]), grid.ball_cells(face.center, radii[1])];
            if balls.iter().any(|b| b.is_empty()) {
                return Err(Error::param("radius", format!("no cells near boundary face {f}")));
            }
            let mut means = [0.0; 2];
            let mut totals = [0.0; 2];
            for (k, ball) in balls.iter().enumerate() {
                totals[k] = pairwise_sum_by(ball.len(), |q| vols[ball[q].cell]);
                means[k] = pairwise_sum_by(ball.len(), |q| vols[ball[q].cell] * ball[q].normal.abs()) / totals[k];
            }
            let lambda = -means[0] / (means[1] - means[0]);
            // The outer ball contains the inner one; both are sorted by cell.
            let outer = &balls[1];
            let mut cells = Vec::with_capacity(outer.len());
            let mut extrapolate = Vec::with_capacity(outer.len());
            let mut spread = Vec::with_capacity(outer.len());
            let mut inner = balls[0].iter().peekable();
            for b in outer {
                let a2 = vols[b.cell] / totals[1];
                let a1 = match inner.peek() {
                    Some(ib) if ib.cell == b.cell => {
                        inner.next();
                        vols[b.cell] / totals[0]
                    }
                    _ => 0.0,
                };
                cells.push(b.cell);
                extrapolate.push((1.0 - lambda) * a1 + lambda * a2);
                spread.push(a2 - a1);
            }
            stencils.push(TraceStencil {
                anchor: face.minus,
                cells,
                extrapolate,
                spread,
                radii,
            });
            coords.push(face.center);
        }
        Ok(Self {
            stencils,
            coords,
            key_cells: grid.cell_count(),
        })
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    /// Unclamped estimate and spread at boundary face `k` (boundary order).
    pub fn apply_face(&self, u: &[f64], k: usize) -> (f64, f64) {
        let s = &self.stencils[k];
        let base = u[s.anchor];
        let n = s.cells.len();
        let value = base + pairwise_sum_by(n, |q| s.extrapolate[q] * (u[s.cells[q]] - base));
        let spread = pairwise_sum_by(n, |q| s.spread[q] * (u[s.cells[q]] - base));
        (value, spread.abs())
    }

    pub fn apply(&self, grid: &StructuredGrid, field: &CellField) -> Result<TraceField> {
        grid.check(field)?;
        if field.len() != self.key_cells {
            return Err(Error::GridMismatch("trace operator built for another grid".into()));
        }
        let u = field.values();
        let bound = field.linf();
        let n = self.len();
        let mut out = TraceField {
            values: Vec::with_capacity(n),
            raw: Vec::with_capacity(n),
            coords: self.coords.clone(),
            residual: Vec::with_capacity(n),
            clamped: Vec::with_capacity(n),
            radii: self.stencils.iter().map(|s| s.radii).collect(),
        };
        for k in 0..n {
            let (value, spread) = self.apply_face(u, k);
            let clamped_value = value.clamp(-bound, bound);
            out.raw.push(value);
            out.values.push(clamped_value);
            out.clamped.push(clamped_value != value);
            out.residual.push(spread);
        }
        Ok(out)
    }
}

pub fn extract_trace(grid: &StructuredGrid, field: &CellField) -> Result<TraceField> {
    TraceOperator::new(grid)?.apply(grid, field)
}

/// Smooth stand-in for the BV measure `|Du|` and its polar direction.
#[derive(Clone, Debug)]
pub struct SmoothBvSurrogate {
    /// `|grad_g u|_g * volume` per cell.
    pub density: Vec<f64>,
    /// `grad_g u / |grad_g u|_g`, zero where the gradient is below [`TOL_GRAD`].
    pub direction: Vec<TangentVector>,
}

impl SmoothBvSurrogate {
    pub fn new(grid: &StructuredGrid, field: &CellField) -> Result<Self> {
        let grad = grid.discrete_gradient(field)?;
        let mut density = Vec::with_capacity(grad.len());
        let mut direction = Vec::with_capacity(grad.len());
        for (c, g) in grad.iter().enumerate() {
            let norm = grid.metric(c).norm(g);
            if norm > TOL_GRAD {
                density.push(norm * grid.volumes()[c]);
                direction.push(g.scale(1.0 / norm));
            } else {
                density.push(0.0);
                direction.push(TangentVector::zeros(grid.dim()));
            }
        }
        Ok(Self { density, direction })
    }
}

/// Resolution classes for which the trace identity is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum SurrogateClass {
    /// Resolved field: face jumps small against the range of values.
    Smooth,
    /// Two-valued field; interface faces listed.
    PiecewiseConstant { interface_faces: Vec<usize> },
}

/// Largest interior face jump, relative to the range, still treated as resolved.
pub const RESOLVED_JUMP_FRACTION: f64 = 0.25;

pub fn classify(grid: &StructuredGrid, field: &CellField) -> Result<SurrogateClass> {
    grid.check(field)?;
    let u = field.values();
    let (lo, hi) = (field.min(), field.max());
    if hi == lo {
        return Ok(SurrogateClass::Smooth);
    }
    if u.iter().all(|&v| v == lo || v == hi) {
        let interface_faces = grid
            .faces()
            .iter()
            .enumerate()
            .filter(|(_, face)| face.plus.is_some_and(|p| u[p] != u[face.minus]))
            .map(|(f, _)| f)
            .collect();
        return Ok(SurrogateClass::PiecewiseConstant { interface_faces });
    }
    let max_jump = grid
        .faces()
        .iter()
        .filter_map(|face| face.plus.map(|p| (u[p] - u[face.minus]).abs()))
        .fold(0.0, f64::max);
    if max_jump <= RESOLVED_JUMP_FRACTION * (hi - lo) {
        Ok(SurrogateClass::Smooth)
    } else {
        Err(Error::UnsupportedSurrogate(format!(
            "field has more than two values and a face jump of {max_jump} over a range of {}",
            hi - lo
        )))
    }
}

/// The three terms of the trace formula for a vector field `X`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceFormulaTerms {
    /// `int u div_g X dv_g`.
    pub volume: f64,
    /// `-int <X, sigma_u>_g d|Du|`.
    pub variation: f64,
    /// `int <X, N>_g Tu dv_g~`.
    pub boundary: f64,
}

impl TraceFormulaTerms {
    pub fn residual(&self) -> f64 {
        (self.volume - self.variation - self.boundary).abs()
    }
}

pub fn trace_formula_terms(
    grid: &StructuredGrid,
    field: &CellField,
    x: &dyn Fn([f64; 2]) -> TangentVector,
) -> Result<TraceFormulaTerms> {
    let class = classify(grid, field)?;
    let geom = grid.geometry();
    let u = field.values();
    let vols = grid.volumes();
    let centers = grid.centers();
    let mut div = Vec::with_capacity(u.len());
    for &z in centers {
        div.push(geom.div_at(x, z, TRACE_FD_STEP)?.value);
    }
    let volume = pairwise_sum_by(u.len(), |c| u[c] * div[c] * vols[c]);
    let variation = match class {
        SurrogateClass::Smooth => {
            let s = SmoothBvSurrogate::new(grid, field)?;
            -pairwise_sum_by(u.len(), |c| {
                grid.metric(c).inner(&x(centers[c]), &s.direction[c]) * s.density[c]
            })
        }
        SurrogateClass::PiecewiseConstant { interface_faces } => {
            let faces = grid.faces();
            -pairwise_sum_by(interface_faces.len(), |k| {
                let face = &faces[interface_faces[k]];
                let jump = u[face.plus.expect("interface faces are interior")] - u[face.minus];
                let m = geom.metric_unchecked(face.center);
                m.inner(&x(face.center), &face.normal) * jump * face.measure
            })
        }
    };
    let trace = extract_trace(grid, field)?;
    let normal_part = boundary_normal_components(grid, x);
    let vals: Vec<f64> = trace.raw.iter().zip(&normal_part).map(|(t, xn)| t * xn).collect();
    let boundary = grid.boundary_integrate(&vals)?;
    Ok(TraceFormulaTerms {
        volume,
        variation,
        boundary,
    })
}

/// `|int u div X - (-int <X, sigma_u> d|Du| + int <X, N> Tu)|`.
pub fn trace_formula_residual(
    grid: &StructuredGrid,
    field: &CellField,
    x: &dyn Fn([f64; 2]) -> TangentVector,
) -> Result<f64> {
    Ok(trace_formula_terms(grid, field, x)?.residual())
}

/// `<X, N>_g` at each boundary face center, in boundary order.
pub fn boundary_normal_components(grid: &StructuredGrid, x: &dyn Fn([f64; 2]) -> TangentVector) -> Vec<f64> {
    let geom = grid.geometry();
    grid.boundary_faces()
        .iter()
        .map(|&f| {
            let face = &grid.faces()[f];
            geom.metric_unchecked(face.center).inner(&x(face.center), &face.normal)
        })
        .collect()
}

fn check_pairing_delta(grid: &StructuredGrid, delta: f64) -> Result<()> {
    let extent = grid.geometry().transverse_distance(grid.geometry().lo, grid.geometry().hi);
    let h = (0..grid.cell_count())
        .step_by(grid.shape()[1])
        .map(|c| grid.transverse_metric_width(c))
        .fold(0.0, f64::max);
    if !(delta > 4.0 * h && delta < extent / 4.0) {
        return Err(Error::param(
            "delta",
            format!("need {} < delta < {}, got {delta}", 4.0 * h, extent / 4.0),
        ));
    }
    Ok(())
}

/// `int u <grad_g R_delta, X>_g dv_g`.
pub fn cutoff_pairing(
    grid: &StructuredGrid,
    field: &CellField,
    x: &dyn Fn([f64; 2]) -> TangentVector,
    delta: f64,
) -> Result<f64> {
    grid.check(field)?;
    check_pairing_delta(grid, delta)?;
    let u = field.values();
    let vols = grid.volumes();
    let centers = grid.centers();
    Ok(pairwise_sum_by(u.len(), |c| {
        if u[c] == 0.0 {
            return 0.0;
        }
        let dr = grid.cutoff_differential(c, delta);
        let xv = x(centers[c]);
        let pair: f64 = dr.comps().iter().zip(xv.comps()).map(|(a, b)| a * b).sum();
        u[c] * pair * vols[c]
    }))
}

/// `max over boundary faces of |T[h(u)] - h(Tu)|`.
pub fn compose_trace_check(grid: &StructuredGrid, field: &CellField, h_fn: &dyn Fn(f64) -> f64) -> Result<f64> {
    let op = TraceOperator::new(grid)?;
    let tu = op.apply(grid, field)?;
    let composed = op.apply(grid, &field.map(h_fn))?;
    Ok(tu
        .values
        .iter()
        .zip(&composed.values)
        .map(|(t, th)| (th - h_fn(*t)).abs())
        .fold(0.0, f64::max))
}

/// `(int <f(u), grad_g R_delta>_g phi dv_g, int_bdry <f(Tu), N>_g T[phi] dv_g~)`.
pub fn flux_trace_pairing(
    grid: &StructuredGrid,
    field: &CellField,
    flux: &FluxFamily,
    t: f64,
    phi: &CellField,
    delta: f64,
) -> Result<(f64, f64)> {
    grid.check(field)?;
    grid.check(phi)?;
    check_pairing_delta(grid, delta)?;
    if phi.min() < 0.0 {
        return Err(Error::param("phi", "test function must be nonnegative"));
    }
    let geom = grid.geometry();
    let u = field.values();
    let p = phi.values();
    let vols = grid.volumes();
    let centers = grid.centers();
    let volume = pairwise_sum_by(u.len(), |c| {
        let dr = grid.cutoff_differential(c, delta);
        let f = flux.flux_eval(geom, u[c], centers[c], t);
        let pair: f64 = dr.comps().iter().zip(f.comps()).map(|(a, b)| a * b).sum();
        pair * p[c] * vols[c]
    });
    let op = TraceOperator::new(grid)?;
    let tu = op.apply(grid, field)?;
    let tphi = op.apply(grid, phi)?;
    let vals: Vec<f64> = grid
        .boundary_faces()
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let face = &grid.faces()[f];
            let fv = flux.flux_eval(geom, tu.values[k], face.center, t);
            geom.metric_unchecked(face.center).inner(&fv, &face.normal) * tphi.values[k]
        })
        .collect();
    Ok((volume, grid.boundary_integrate(&vals)?))
}

/// Jump total variation of `x -> F(u(x), x)`.
pub fn composed_tv_bounded(
    grid: &StructuredGrid,
    field: &CellField,
    f: &dyn Fn(f64, [f64; 2]) -> f64,
) -> Result<f64> {
    grid.check(field)?;
    let composed: Vec<f64> = field
        .values()
        .iter()
        .zip(grid.centers())
        .map(|(&u, &z)| f(u, z))
        .collect();
    Ok(interior_jump_tv(grid, &composed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartGeometry, Weight};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn unit(n: usize) -> StructuredGrid {
        StructuredGrid::build(ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(), &[n]).unwrap()
    }

    fn band(n1: usize, n2: usize) -> StructuredGrid {
        StructuredGrid::build(ChartGeometry::band(FRAC_PI_4, FRAC_PI_2).unwrap(), &[n1, n2]).unwrap()
    }

    #[test]
    fn tv_examples() {
        let g = unit(10);
        let c = g.field_from_fn(|_| 3.0);
        let r = total_variation(&g, &c).unwrap();
        assert_eq!((r.tv_gradient, r.tv_jump), (0.0, 0.0));
        let step = g.field_from_fn(|z| if z[0] > 0.5 { 1.0 } else { 0.0 });
        assert_eq!(total_variation(&g, &step).unwrap().tv_jump, 1.0);

        let b = band(128, 32);
        let u = b.field_from_fn(|z| z[0].cos());
        let tv = total_variation(&b, &u).unwrap().tv_gradient;
        let exact = 2.0 * PI * (PI / 8.0 + 0.25);
        assert!((tv - exact).abs() / exact < 0.01, "{tv} vs {exact}");
    }

    #[test]
    fn extended_tv_counts_boundary_jumps() {
        let g = unit(10);
        let c = g.field_from_fn(|_| 1.0);
        assert_eq!(total_variation_with_boundary(&g, &c, 0.0).unwrap(), 2.0);
        assert_eq!(total_variation_with_boundary(&g, &c, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn trace_of_constant_is_exact() {
        let b = band(32, 32);
        let u = b.field_from_fn(|_| 0.3);
        let t = extract_trace(&b, &u).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.3));
        assert!(extract_trace(&band(8, 16), &u).is_err());
    }

    #[test]
    fn trace_of_cosine_is_second_order() {
        let worst = |n: usize| {
            let b = band(n, 32);
            let u = b.field_from_fn(|z| z[0].cos());
            let t = extract_trace(&b, &u).unwrap();
            let mut err: f64 = 0.0;
            for (k, &f) in b.boundary_faces().iter().enumerate() {
                let s = b.faces()[f].center[0];
                err = err.max((t.raw[k] - s.cos()).abs());
                if s > 1.5 {
                    assert!(t.values[k].abs() < 1e-3);
                }
            }
            err
        };
        let (e1, e2, e3) = (worst(32), worst(64), worst(128));
        assert!(e1 / e2 > 3.0 && e2 / e3 > 3.0, "{e1} {e2} {e3}");
    }

    #[test]
    fn trace_ignores_interior_jump() {
        let g = unit(100);
        let u = g.field_from_fn(|z| if z[0] < 0.5 { 2.0 * z[0] } else { -1.0 });
        let t = extract_trace(&g, &u).unwrap();
        assert!(t.values[0].abs() < 1e-12);
        assert!((t.values[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_formula_examples() {
        let g = unit(200);
        let u = g.field_from_fn(|z| if z[0] > 0.5 { 1.0 } else { 0.0 });
        let x = |_: [f64; 2]| TangentVector::d1(1.0);
        let terms = trace_formula_terms(&g, &u, &x).unwrap();
        assert!(terms.volume.abs() < 1e-9);
        assert!((terms.variation + 1.0).abs() < 1e-12);
        assert!((terms.boundary - 1.0).abs() < 1e-12);

        let zero = |_: [f64; 2]| TangentVector::d1(0.0);
        assert_eq!(trace_formula_residual(&g, &u, &zero).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_fields_are_rejected() {
        let g = unit(32);
        let u = g.field_from_fn(|z| if z[0] > 0.5 { 1.0 + z[0] } else { 0.0 });
        assert!(matches!(classify(&g, &u), Err(Error::UnsupportedSurrogate(_))));
    }

    #[test]
    fn composition_examples() {
        let b = band(32, 32);
        let u = b.field_from_fn(|z| z[0].cos());
        assert_eq!(compose_trace_check(&b, &u, &|z| z).unwrap(), 0.0);
        let c = b.field_from_fn(|_| -0.4);
        assert_eq!(compose_trace_check(&b, &c, &|z| z * z).unwrap(), 0.0);

        let g = unit(10);
        let step = g.field_from_fn(|z| if z[0] > 0.5 { 1.0 } else { 0.0 });
        assert_eq!(composed_tv_bounded(&g, &step, &|u, _| 0.5 * u * u).unwrap(), 0.5);
        assert_eq!(composed_tv_bounded(&g, &step, &|_, _| 2.0).unwrap(), 0.0);
    }

    #[test]
    fn cutoff_pairing_examples() {
        let b = band(64, 64);
        let zero = b.zeros();
        let x = |_: [f64; 2]| TangentVector::d2(1.0, 0.0);
        assert_eq!(cutoff_pairing(&b, &zero, &x, 0.1).unwrap(), 0.0);
        let one = b.field_from_fn(|_| 1.0);
        let tangential = |_: [f64; 2]| TangentVector::d2(0.0, 1.0);
        assert!(cutoff_pairing(&b, &one, &tangential, 0.1).unwrap().abs() < 1e-12);
        assert!(cutoff_pairing(&b, &one, &x, 0.01).is_err());
        assert!(cutoff_pairing(&b, &one, &x, 0.5).is_err());
    }

    #[test]
    fn flux_pairing_one_dimensional() {
        let g = unit(400);
        let one = g.field_from_fn(|_| 1.0);
        let flux = FluxFamily::transverse(crate::problem::FluxShape::Linear, 1.0);
        let (vol, bdry) = flux_trace_pairing(&g, &one, &flux, 0.0, &one, 0.05).unwrap();
        assert!(bdry.abs() < 1e-12);
        assert!(vol.abs() < 1e-12);
    }
}
