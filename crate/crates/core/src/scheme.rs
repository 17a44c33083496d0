//! Finite-volume building blocks shared by the viscous and hyperbolic solvers:
//! numerical fluxes, discrete face speeds and the cell/face incidence.

use crate::grid::StructuredGrid;
use crate::par::map_indices;
use crate::problem::{FluxFamily, FluxShape, TimeProfile};

/// Two-point numerical flux for `f_hat(s) = xi * h(s)`.
pub trait NumericalFlux: Send + Sync {
    fn eval(&self, shape: FluxShape, xi: f64, a: f64, b: f64) -> f64;

    fn name(&self) -> &'static str;
}

/// Exact Riemann (Godunov) flux: `min f_hat` over `[a, b]` when `a <= b`,
/// `max f_hat` over `[b, a]` otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct Godunov;

impl NumericalFlux for Godunov {
    fn eval(&self, shape: FluxShape, xi: f64, a: f64, b: f64) -> f64 {
        godunov(shape, xi, a, b)
    }

    fn name(&self) -> &'static str {
        "godunov"
    }
}

pub fn godunov(shape: FluxShape, xi: f64, a: f64, b: f64) -> f64 {
    let fa = xi * shape.h(a);
    let fb = xi * shape.h(b);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let crit = shape
        .critical_point()
        .filter(|&c| c > lo && c < hi)
        .map(|c| xi * shape.h(c));
    if a <= b {
        crit.map_or(fa.min(fb), |fc| fa.min(fb).min(fc))
    } else {
        crit.map_or(fa.max(fb), |fc| fa.max(fb).max(fc))
    }
}

/// Face speeds `xi_f(t) = <X(x_f, t), n_f>_g * measure_f`, affine in `a(t)`.
#[derive(Clone, Debug)]
pub struct FaceSpeeds {
    per_a: Vec<f64>,
    offset: Vec<f64>,
    time: TimeProfile,
}

impl FaceSpeeds {
    pub fn new(grid: &StructuredGrid, flux: &FluxFamily) -> Self {
        let geom = grid.geometry();
        let unit_a = FluxFamily {
            a: TimeProfile::Const { value: 1.0 },
            ..*flux
        };
        let zero_a = FluxFamily {
            a: TimeProfile::Const { value: 0.0 },
            ..*flux
        };
        let mut per_a = Vec::with_capacity(grid.faces().len());
        let mut offset = Vec::with_capacity(grid.faces().len());
        for face in grid.faces() {
            let m = geom.metric_unchecked(face.center);
            let x1 = unit_a.direction(geom, face.center, 0.0);
            let x0 = zero_a.direction(geom, face.center, 0.0);
            let b = m.inner(&x0, &face.normal) * face.measure;
            per_a.push(m.inner(&x1, &face.normal) * face.measure - b);
            offset.push(b);
        }
        Self {
            per_a,
            offset,
            time: flux.a,
        }
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let a = self.time.eval(t);
        self.per_a
            .iter()
            .zip(&self.offset)
            .map(|(p, q)| a * p + q)
            .collect()
    }
}

/// Cell-to-face incidence in compressed rows, with orientation signs.
#[derive(Clone, Debug)]
pub struct Incidence {
    start: Vec<usize>,
    face: Vec<usize>,
    /// `+1` when the face normal leaves the cell.
    sign: Vec<f64>,
}

impl Incidence {
    pub fn new(grid: &StructuredGrid) -> Self {
        let n = grid.cell_count();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (f, face) in grid.faces().iter().enumerate() {
            rows[face.minus].push((f, 1.0));
            if let Some(p) = face.plus {
                rows[p].push((f, -1.0));
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut face = Vec::new();
        let mut sign = Vec::new();
        start.push(0);
        for row in rows {
            for (f, s) in row {
                face.push(f);
                sign.push(s);
            }
            start.push(face.len());
        }
        Self { start, face, sign }
    }

    /// `(face, sign)` pairs of cell `c`.
    pub fn faces_of(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.start[c]..self.start[c + 1]).map(move |k| (self.face[k], self.sign[k]))
    }

    /// `-(1/vol_c) sum_f sign * F_f` per cell.
    pub fn divergence(&self, grid: &StructuredGrid, face_flux: &[f64]) -> Vec<f64> {
        let vols = grid.volumes();
        map_indices(grid.cell_count(), |c| {
            let mut acc = 0.0;
            for (f, s) in self.faces_of(c) {
                acc += s * face_flux[f];
            }
            -acc / vols[c]
        })
    }
}

/// Everything a solver needs to evaluate the discrete operator on one grid.
pub struct Discretization<'a> {
    pub grid: &'a StructuredGrid,
    pub shape: FluxShape,
    pub speeds: FaceSpeeds,
    pub incidence: Incidence,
    pub flux: &'a dyn NumericalFlux,
}

impl<'a> Discretization<'a> {
    pub fn new(grid: &'a StructuredGrid, family: &FluxFamily, flux: &'a dyn NumericalFlux) -> Self {
        Self {
            grid,
            shape: family.shape,
            speeds: FaceSpeeds::new(grid, family),
            incidence: Incidence::new(grid),
            flux,
        }
    }

    /// Numerical flux through every face; boundary faces see exterior state 0.
    pub fn face_fluxes(&self, u: &[f64], xi: &[f64]) -> Vec<f64> {
        let faces = self.grid.faces();
        map_indices(faces.len(), |f| {
            let face = &faces[f];
            let b = face.plus.map_or(0.0, |p| u[p]);
            self.flux.eval(self.shape, xi[f], u[face.minus], b)
        })
    }

    /// `-div F + eps * lap u` with the odd Dirichlet ghost for diffusion.
    pub fn rhs(&self, u: &[f64], t: f64, epsilon: f64) -> (Vec<f64>, Vec<f64>) {
        let xi = self.speeds.at(t);
        let fluxes = self.face_fluxes(u, &xi);
        let faces = self.grid.faces();
        let vols = self.grid.volumes();
        let inc = &self.incidence;
        let out = map_indices(self.grid.cell_count(), |c| {
            let mut adv = 0.0;
            let mut diff = 0.0;
            for (f, s) in inc.faces_of(c) {
                adv += s * fluxes[f];
                if epsilon > 0.0 {
                    let face = &faces[f];
                    let other = match face.plus {
                        Some(p) if p == c => u[face.minus],
                        Some(p) => u[p],
                        None => -u[c],
                    };
                    diff += face.diffusion * (other - u[c]);
                }
            }
            (-adv + epsilon * diff) / vols[c]
        });
        (out, fluxes)
    }

    /// Sum of numerical fluxes leaving through the boundary.
    pub fn boundary_outflow(&self, fluxes: &[f64]) -> f64 {
        let b = self.grid.boundary_faces();
        crate::numerics::pairwise_sum_by(b.len(), |k| fluxes[b[k]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartGeometry, Profile, Weight};
    use crate::grid::BoundaryMode;
    use crate::problem::AzimuthalProfile;

    #[test]
    fn godunov_examples() {
        let b = FluxShape::Burgers;
        assert_eq!(godunov(b, 1.0, 0.3, 0.3), 0.045);
        assert_eq!(godunov(b, 1.0, 1.0, 0.0), 0.5);
        assert_eq!(godunov(b, 1.0, -1.0, 0.0), 0.0);
        assert_eq!(godunov(b, 1.0, -1.0, 2.0), 0.0);
        assert_eq!(godunov(b, 1.0, 0.0, 1.0), 0.0);
        assert_eq!(godunov(b, -1.0, 0.0, 1.0), -0.5);
        let l = FluxShape::Linear;
        assert_eq!(godunov(l, 2.0, 1.0, 3.0), 2.0);
        assert_eq!(godunov(l, -2.0, 1.0, 3.0), -6.0);
    }

    #[test]
    fn godunov_matches_brute_force() {
        let samples: Vec<f64> = (0..=2000).map(|k| -1.0 + k as f64 * 1e-3).collect();
        for &(a, b) in &[(0.7_f64, -0.4_f64), (-0.9, 0.2), (0.1, 0.8), (-0.3, -0.8)] {
            for xi in [1.0, -0.5] {
                let range = samples.iter().filter(|&&s| s >= a.min(b) && s <= a.max(b));
                let vals = range.map(|&s| xi * 0.5 * s * s);
                let brute = if a <= b {
                    vals.fold(f64::INFINITY, f64::min)
                } else {
                    vals.fold(f64::NEG_INFINITY, f64::max)
                };
                assert!((godunov(FluxShape::Burgers, xi, a, b) - brute).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn face_speeds_are_discretely_divergence_free() {
        let fam = FluxFamily::new(
            FluxShape::Linear,
            TimeProfile::Sine {
                amplitude: 1.0,
                period: 1.0,
            },
            AzimuthalProfile::Linear { c0: 0.3, c1: 0.7 },
        );
        let geom = ChartGeometry::revolution(Profile::Sine { alpha: 0.3, length: 2.0 }, 0.0, 2.0).unwrap();
        let g = StructuredGrid::build(geom, &[12, 10]).unwrap();
        let xi = FaceSpeeds::new(&g, &fam).at(0.2);
        let inc = Incidence::new(&g);
        for c in 0..g.cell_count() {
            let touches_boundary = inc.faces_of(c).any(|(f, _)| g.faces()[f].is_boundary());
            if !touches_boundary {
                let s: f64 = inc.faces_of(c).map(|(f, s)| s * xi[f]).sum();
                assert!(s.abs() < 1e-14, "{s}");
            }
        }
    }

    #[test]
    fn rhs_diffusion_matches_grid_laplacian() {
        let g = StructuredGrid::build(ChartGeometry::band(0.5, 1.5).unwrap(), &[10, 12]).unwrap();
        let u = g.field_from_fn(|z| (3.0 * z[0]).sin() * z[1].cos());
        let fam = FluxFamily::transverse(FluxShape::Linear, 0.0);
        let d = Discretization::new(&g, &fam, &Godunov);
        let (r, _) = d.rhs(u.values(), 0.0, 1.0);
        let lap = g.discrete_laplace(&u, BoundaryMode::DirichletZero).unwrap();
        for (a, b) in r.iter().zip(lap.values()) {
            assert!((a - b).abs() < 1e-10);
        }

        let w = StructuredGrid::build(ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(), &[8]).unwrap();
        let one = w.field_from_fn(|_| 1.0);
        let fam = FluxFamily::transverse(FluxShape::Linear, 1.0);
        let d = Discretization::new(&w, &fam, &Godunov);
        let (r, fl) = d.rhs(one.values(), 0.0, 0.0);
        assert_eq!(r[0], -8.0);
        assert!(r[1..].iter().all(|&v| v == 0.0));
        assert_eq!(d.boundary_outflow(&fl), 1.0);
    }
}
