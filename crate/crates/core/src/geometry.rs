//! Single-chart Riemannian manifolds with boundary.
//!
//! Every shipped geometry is covered by one coordinate rectangle. One-dimensional
//! charts are intervals `[x_lo, x_hi]` carrying the metric `w(x)^2 dx^2`. Two
//! dimensional charts use coordinates `(s, phi)` with `s` the transverse
//! arclength coordinate (`g_ss = 1`) and `phi` periodic on `[0, 2pi)`, metric
//! `ds^2 + r(s)^2 dphi^2`. The spherical band is the warped case `r = sin`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DOMAIN_TOL: f64 = 1e-12;

/// Weight of a one-dimensional chart, metric `w(x)^2 dx^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "weight", rename_all = "kebab-case")]
pub enum Weight {
    Unit,
    /// `w(x) = 1 + beta x`, `beta >= 0`.
    Linear { beta: f64 },
}

impl Weight {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Weight::Unit => 1.0,
            Weight::Linear { beta } => 1.0 + beta * x,
        }
    }

    pub fn deriv(&self, _x: f64) -> f64 {
        match *self {
            Weight::Unit => 0.0,
            Weight::Linear { beta } => beta,
        }
    }

    /// Antiderivative with `W(0) = 0`; metric arclength is `W(b) - W(a)`.
    pub fn primitive(&self, x: f64) -> f64 {
        match *self {
            Weight::Unit => x,
            Weight::Linear { beta } => x + 0.5 * beta * x * x,
        }
    }
}

/// Profile `r(s)` of a surface of revolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    Cylinder,
    /// `r(s) = 1 + alpha sin(pi s / length)`, `|alpha| <= 0.5`.
    Sine { alpha: f64, length: f64 },
}

impl Profile {
    /// `(r, r', r'')` at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Cylinder => (1.0, 0.0, 0.0),
            Profile::Sine { alpha, length } => {
                let k = PI / length;
                let (sn, cs) = (k * s).sin_cos();
                (1.0 + alpha * sn, alpha * k * cs, -alpha * k * k * sn)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeometryKind {
    WeightedInterval { weight: Weight },
    /// Colatitude band `theta0 <= theta <= theta1` of the unit sphere.
    SphericalBand,
    SurfaceOfRevolution { profile: Profile },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideTag {
    Boundary,
    Periodic,
}

/// Sides of the coordinate rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `z1 = lo`.
    Lower,
    /// `z1 = hi`.
    Upper,
    /// `phi = 0`.
    AzimuthStart,
    /// `phi = 2 pi`.
    AzimuthEnd,
}

/// Chart components of a tangent vector (or covector) at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    dim: usize,
    comps: [f64; 2],
}

impl TangentVector {
    pub fn d1(x: f64) -> Self {
        Self {
            dim: 1,
            comps: [x, 0.0],
        }
    }

    pub fn d2(a: f64, b: f64) -> Self {
        Self {
            dim: 2,
            comps: [a, b],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            comps: [0.0; 2],
        }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        match c {
            [x] => Self::d1(*x),
            [a, b] => Self::d2(*a, *b),
            _ => panic!("tangent vectors have 1 or 2 components"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps[..self.dim]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            comps: [self.comps[0] * s, self.comps[1] * s],
        }
    }
}

impl std::ops::Index<usize> for TangentVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.comps()[i]
    }
}

/// Pointwise metric data. Unused entries of the 2x2 arrays are zero for 1D charts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSample {
    pub dim: usize,
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub sqrt_det: f64,
    /// `christoffel[k][i][j] = Gamma^k_ij`.
    pub christoffel: [[[f64; 2]; 2]; 2],
    pub ricci: [[f64; 2]; 2],
}

impl MetricSample {
    pub fn inner(&self, x: &TangentVector, y: &TangentVector) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.g[i][j] * x.comps[i] * y.comps[j];
            }
        }
        acc
    }

    pub fn norm(&self, x: &TangentVector) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Norm of a covector, `sqrt(g^ij w_i w_j)`.
    pub fn conorm(&self, w: &TangentVector) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.g_inv[i][j] * w.comps[i] * w.comps[j];
            }
        }
        acc.max(0.0).sqrt()
    }

    /// Index raising `g^ij w_j`.
    pub fn raise(&self, w: &TangentVector) -> TangentVector {
        let mut out = TangentVector::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.comps[i] += self.g_inv[i][j] * w.comps[j];
            }
        }
        out
    }
}

/// Result of a finite-difference evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdValue {
    pub value: f64,
    /// A one-sided stencil was used because a centered one would leave the domain.
    pub one_sided: bool,
}

/// Default finite-difference step in chart units.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartGeometry {
    pub kind: GeometryKind,
    /// Transverse coordinate range (`x`, `theta` or `s`).
    pub lo: f64,
    pub hi: f64,
}

impl ChartGeometry {
    pub fn new(kind: GeometryKind, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param("domain", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        match kind {
            GeometryKind::WeightedInterval { weight } => {
                if let Weight::Linear { beta } = weight {
                    if !(beta >= 0.0) {
                        return Err(Error::param("beta", "weight slope must be >= 0"));
                    }
                    if weight.value(lo) <= 0.0 {
                        return Err(Error::param("beta", "weight must stay positive"));
                    }
                }
            }
            GeometryKind::SphericalBand => {
                if !(lo > 0.0 && hi < PI) {
                    return Err(Error::param(
                        "theta",
                        format!("need 0 < theta0 < theta1 < pi, got [{lo}, {hi}]"),
                    ));
                }
            }
            GeometryKind::SurfaceOfRevolution { profile } => {
                if let Profile::Sine { alpha, length } = profile {
                    if alpha.abs() > 0.5 {
                        return Err(Error::param("alpha", "need |alpha| <= 0.5"));
                    }
                    if !(length > 0.0) {
                        return Err(Error::param("length", "profile length must be > 0"));
                    }
                }
            }
        }
        Ok(Self { kind, lo, hi })
    }

    pub fn interval(weight: Weight, lo: f64, hi: f64) -> Result<Self> {
        Self::new(GeometryKind::WeightedInterval { weight }, lo, hi)
    }

    pub fn band(theta0: f64, theta1: f64) -> Result<Self> {
        Self::new(GeometryKind::SphericalBand, theta0, theta1)
    }

    pub fn revolution(profile: Profile, s_lo: f64, s_hi: f64) -> Result<Self> {
        Self::new(GeometryKind::SurfaceOfRevolution { profile }, s_lo, s_hi)
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            GeometryKind::WeightedInterval { .. } => 1,
            _ => 2,
        }
    }

    /// Side tags of the coordinate rectangle: transverse sides are boundary,
    /// azimuthal sides are identified.
    pub fn side_tags(&self) -> Vec<(Side, SideTag)> {
        let mut tags = vec![(Side::Lower, SideTag::Boundary), (Side::Upper, SideTag::Boundary)];
        if self.dim() == 2 {
            tags.push((Side::AzimuthStart, SideTag::Periodic));
            tags.push((Side::AzimuthEnd, SideTag::Periodic));
        }
        tags
    }

    pub fn transverse_extent(&self) -> f64 {
        self.hi - self.lo
    }

    /// Warping radius `(r, r', r'')` of a 2D chart.
    pub fn radius(&self, s: f64) -> (f64, f64, f64) {
        match self.kind {
            GeometryKind::SphericalBand => (s.sin(), s.cos(), -s.sin()),
            GeometryKind::SurfaceOfRevolution { profile } => profile.eval(s),
            GeometryKind::WeightedInterval { .. } => (1.0, 0.0, 0.0),
        }
    }

    /// Gauss curvature of a 2D chart; zero for intervals.
    pub fn gauss_curvature(&self, s: f64) -> f64 {
        match self.kind {
            GeometryKind::WeightedInterval { .. } => 0.0,
            _ => {
                let (r, _, r2) = self.radius(s);
                -r2 / r
            }
        }
    }

    /// Metric arclength along the transverse coordinate between `a` and `b`.
    pub fn transverse_distance(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            GeometryKind::WeightedInterval { weight } => {
                (weight.primitive(b) - weight.primitive(a)).abs()
            }
            _ => (b - a).abs(),
        }
    }

    /// Riemannian distance from `z` to the boundary (exact for these charts).
    pub fn distance_to_boundary(&self, z: [f64; 2]) -> f64 {
        self.transverse_distance(self.lo, z[0])
            .min(self.transverse_distance(z[0], self.hi))
    }

    pub fn contains(&self, z: [f64; 2]) -> bool {
        z[0] >= self.lo - DOMAIN_TOL && z[0] <= self.hi + DOMAIN_TOL && z.iter().all(|c| c.is_finite())
    }

    fn check(&self, z: [f64; 2]) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::Domain { point: z })
        }
    }

    /// Analytic metric sample at `z`.
    pub fn metric_at(&self, z: [f64; 2]) -> Result<MetricSample> {
        self.check(z)?;
        Ok(self.metric_unchecked(z))
    }

    pub(crate) fn metric_unchecked(&self, z: [f64; 2]) -> MetricSample {
        match self.kind {
            GeometryKind::WeightedInterval { weight } => {
                let w = weight.value(z[0]);
                let dw = weight.deriv(z[0]);
                let mut christoffel = [[[0.0; 2]; 2]; 2];
                christoffel[0][0][0] = dw / w;
                MetricSample {
                    dim: 1,
                    g: [[w * w, 0.0], [0.0, 0.0]],
                    g_inv: [[1.0 / (w * w), 0.0], [0.0, 0.0]],
                    sqrt_det: w,
                    christoffel,
                    ricci: [[0.0; 2]; 2],
                }
            }
            _ => {
                let (r, dr, d2r) = self.radius(z[0]);
                let k = -d2r / r;
                let mut christoffel = [[[0.0; 2]; 2]; 2];
                christoffel[0][1][1] = -r * dr;
                christoffel[1][0][1] = dr / r;
                christoffel[1][1][0] = dr / r;
                MetricSample {
                    dim: 2,
                    g: [[1.0, 0.0], [0.0, r * r]],
                    g_inv: [[1.0, 0.0], [0.0, 1.0 / (r * r)]],
                    sqrt_det: r,
                    christoffel,
                    ricci: [[k, 0.0], [0.0, k * r * r]],
                }
            }
        }
    }

    pub fn inner_product_at(&self, z: [f64; 2], x: &TangentVector, y: &TangentVector) -> Result<f64> {
        let d = self.dim();
        for v in [x, y] {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.dim(),
                });
            }
        }
        Ok(self.metric_at(z)?.inner(x, y))
    }

    /// Which boundary side `z` lies on, if any.
    pub fn boundary_side(&self, z: [f64; 2]) -> Option<Side> {
        let tol = 1e-9 * (1.0 + self.transverse_extent());
        if (z[0] - self.hi).abs() <= tol {
            Some(Side::Upper)
        } else if (z[0] - self.lo).abs() <= tol {
            Some(Side::Lower)
        } else {
            None
        }
    }

    /// Outward unit normal (in `g`) at a boundary point.
    pub fn unit_outer_normal(&self, z: [f64; 2]) -> Result<TangentVector> {
        let side = self.boundary_side(z).ok_or_else(|| {
            Error::InvalidQuery(format!(
                "{z:?} is not on a boundary side (periodic sides carry no normal)"
            ))
        })?;
        let sign = if side == Side::Upper { 1.0 } else { -1.0 };
        let m = self.metric_unchecked(z);
        let scale = 1.0 / m.g[0][0].sqrt();
        Ok(match self.dim() {
            1 => TangentVector::d1(sign * scale),
            _ => TangentVector::d2(sign * scale, 0.0),
        })
    }

    fn wrap(&self, mut z: [f64; 2]) -> [f64; 2] {
        if self.dim() == 2 && !(0.0..TAU).contains(&z[1]) {
            z[1] = z[1].rem_euclid(TAU);
        }
        z
    }

    fn shifted(&self, z: [f64; 2], axis: usize, d: f64) -> [f64; 2] {
        let mut p = z;
        p[axis] += d;
        self.wrap(p)
    }

    /// First partial derivative of a scalar sampler along `axis`.
    pub fn partial(&self, f: &dyn Fn([f64; 2]) -> f64, z: [f64; 2], axis: usize, step: f64) -> FdValue {
        if axis == 0 {
            if z[0] - step < self.lo - DOMAIN_TOL {
                let v = (-3.0 * f(z) + 4.0 * f(self.shifted(z, 0, step))
                    - f(self.shifted(z, 0, 2.0 * step)))
                    / (2.0 * step);
                return FdValue { value: v, one_sided: true };
            }
            if z[0] + step > self.hi + DOMAIN_TOL {
                let v = (3.0 * f(z) - 4.0 * f(self.shifted(z, 0, -step))
                    + f(self.shifted(z, 0, -2.0 * step)))
                    / (2.0 * step);
                return FdValue { value: v, one_sided: true };
            }
        }
        let v = (f(self.shifted(z, axis, step)) - f(self.shifted(z, axis, -step))) / (2.0 * step);
        FdValue { value: v, one_sided: false }
    }

    /// `div_g X = (1/sqrt|g|) d_i (sqrt|g| X^i)` by centered differences.
    pub fn div_at(&self, x: &dyn Fn([f64; 2]) -> TangentVector, z: [f64; 2], step: f64) -> Result<FdValue> {
        self.check(z)?;
        let mut one_sided = false;
        let mut acc = 0.0;
        for axis in 0..self.dim() {
            let flux = |p: [f64; 2]| self.metric_unchecked(p).sqrt_det * x(p).comps[axis];
            let d = self.partial(&flux, z, axis, step);
            one_sided |= d.one_sided;
            acc += d.value;
        }
        Ok(FdValue {
            value: acc / self.metric_unchecked(z).sqrt_det,
            one_sided,
        })
    }

    /// Covector of partial derivatives `d_i u`.
    pub fn differential_at(&self, u: &dyn Fn([f64; 2]) -> f64, z: [f64; 2], step: f64) -> (TangentVector, bool) {
        let mut w = TangentVector::zeros(self.dim());
        let mut one_sided = false;
        for axis in 0..self.dim() {
            let d = self.partial(u, z, axis, step);
            w.comps[axis] = d.value;
            one_sided |= d.one_sided;
        }
        (w, one_sided)
    }

    /// `grad_g u = g^ij d_j u`.
    pub fn gradient_at(&self, u: &dyn Fn([f64; 2]) -> f64, z: [f64; 2], step: f64) -> (TangentVector, bool) {
        let (w, one_sided) = self.differential_at(u, z, step);
        (self.metric_unchecked(z).raise(&w), one_sided)
    }

    /// Laplace-Beltrami operator `div_g grad_g u` by nested differences.
    pub fn laplace_at(&self, u: &dyn Fn([f64; 2]) -> f64, z: [f64; 2], step: f64) -> Result<FdValue> {
        let grad = |p: [f64; 2]| self.gradient_at(u, p, step).0;
        self.div_at(&grad, z, step)
    }

    /// `|Delta_g du - d Delta_g u - Ric(grad u, .)|_g` at `z`, with the rough
    /// Laplacian of the one-form `du` assembled from analytic Christoffel
    /// symbols and nested differences of `u`.
    pub fn commutator_residual_at(&self, u: &dyn Fn([f64; 2]) -> f64, z: [f64; 2], step: f64) -> Result<FdValue> {
        self.check(z)?;
        let n = self.dim();
        let omega = |p: [f64; 2], k: usize| self.partial(u, p, k, step).value;
        // Hessian T_jk = d_j w_k - Gamma^l_jk w_l.
        let hess = |p: [f64; 2], j: usize, k: usize| {
            let m = self.metric_unchecked(p);
            let d = self.partial(&|q| omega(q, k), p, j, step).value;
            let mut corr = 0.0;
            for l in 0..n {
                corr += m.christoffel[l][j][k] * omega(p, l);
            }
            d - corr
        };
        let m = self.metric_unchecked(z);
        let mut one_sided = false;
        let mut residual = TangentVector::zeros(n);
        let lap = |p: [f64; 2]| {
            self.laplace_at(u, p, step)
                .map(|v| v.value)
                .unwrap_or(f64::NAN)
        };
        for k in 0..n {
            // (Delta du)_k = g^ij (d_i T_jk - Gamma^l_ij T_lk - Gamma^l_ik T_jl)
            let mut rough = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if m.g_inv[i][j] == 0.0 {
                        continue;
                    }
                    let d = self.partial(&|q| hess(q, j, k), z, i, step);
                    one_sided |= d.one_sided;
                    let mut corr = 0.0;
                    for l in 0..n {
                        corr += m.christoffel[l][i][j] * hess(z, l, k)
                            + m.christoffel[l][i][k] * hess(z, j, l);
                    }
                    rough += m.g_inv[i][j] * (d.value - corr);
                }
            }
            let d_lap = self.partial(&lap, z, k, step);
            one_sided |= d_lap.one_sided;
            let mut ric = 0.0;
            for j in 0..n {
                for l in 0..n {
                    ric += m.ricci[k][j] * m.g_inv[j][l] * omega(z, l);
                }
            }
            residual.comps[k] = rough - d_lap.value - ric;
        }
        Ok(FdValue {
            value: m.conorm(&residual),
            one_sided,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn band() -> ChartGeometry {
        ChartGeometry::band(FRAC_PI_4, PI / 2.0).unwrap()
    }

    #[test]
    fn euclidean_interval_metric_is_trivial() {
        let g = ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap();
        let m = g.metric_at([0.3, 0.0]).unwrap();
        assert_eq!(m.g[0][0], 1.0);
        assert_eq!(m.christoffel[0][0][0], 0.0);
        assert_eq!(m.ricci[0][0], 0.0);
    }

    #[test]
    fn band_equator_metric() {
        let g = ChartGeometry::band(0.5, PI / 2.0).unwrap();
        let m = g.metric_at([PI / 2.0, 1.0]).unwrap();
        assert!((m.g[1][1] - 1.0).abs() < 1e-15);
        assert!((m.sqrt_det - 1.0).abs() < 1e-15);
        // unit sphere: Ric = g
        assert!((m.ricci[1][1] - m.g[1][1]).abs() < 1e-15);
    }

    #[test]
    fn cylinder_is_flat() {
        let g = ChartGeometry::revolution(Profile::Cylinder, 0.0, 2.0).unwrap();
        let m = g.metric_at([1.2, 4.0]).unwrap();
        assert_eq!(m.ricci, [[0.0; 2]; 2]);
    }

    #[test]
    fn point_outside_domain_is_rejected() {
        let g = band();
        assert!(matches!(g.metric_at([0.1, 0.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn inner_products() {
        let g = ChartGeometry::band(0.5, 2.0).unwrap();
        let e = TangentVector::d2(0.0, 1.0);
        let v = g.inner_product_at([PI / 3.0, 0.0], &e, &e).unwrap();
        assert!((v - 0.75).abs() < 1e-14);
        let z = TangentVector::zeros(2);
        assert_eq!(g.inner_product_at([1.0, 0.0], &z, &e).unwrap(), 0.0);

        let w = ChartGeometry::interval(Weight::Linear { beta: 1.0 }, 0.0, 1.0).unwrap();
        let one = TangentVector::d1(1.0);
        assert!((w.inner_product_at([1.0, 0.0], &one, &one).unwrap() - 4.0).abs() < 1e-14);
        assert!(matches!(
            w.inner_product_at([0.5, 0.0], &one, &e),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn outer_normals() {
        let g = band();
        assert_eq!(g.unit_outer_normal([PI / 2.0, 0.3]).unwrap(), TangentVector::d2(1.0, 0.0));
        assert_eq!(g.unit_outer_normal([FRAC_PI_4, 0.3]).unwrap(), TangentVector::d2(-1.0, 0.0));
        assert!(matches!(g.unit_outer_normal([1.0, 0.0]), Err(Error::InvalidQuery(_))));

        let w = ChartGeometry::interval(Weight::Linear { beta: 1.0 }, 0.0, 1.0).unwrap();
        let n = w.unit_outer_normal([1.0, 0.0]).unwrap();
        assert!((n[0] - 0.5).abs() < 1e-15);
        let m = w.metric_at([1.0, 0.0]).unwrap();
        assert!((m.norm(&n) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_examples() {
        let e = ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap();
        let c = |_: [f64; 2]| TangentVector::d1(2.5);
        assert!(e.div_at(&c, [0.4, 0.0], 1e-3).unwrap().value.abs() < 1e-10);

        let g = ChartGeometry::band(0.3, 2.5).unwrap();
        let free = |z: [f64; 2]| TangentVector::d2(0.7 / z[0].sin(), (3.0 * z[0]).cos());
        let d = g.div_at(&free, [1.1, 2.0], 1e-3).unwrap();
        assert!(d.value.abs() < 1e-5);

        let radial = |_: [f64; 2]| TangentVector::d2(1.0, 0.0);
        let d = g.div_at(&radial, [PI / 3.0, 0.0], 1e-3).unwrap();
        assert!((d.value - (PI / 3.0).tan().recip()).abs() < 1e-6);
        assert!(!d.one_sided);
    }

    #[test]
    fn divergence_near_boundary_uses_one_sided_stencil() {
        let g = band();
        let radial = |_: [f64; 2]| TangentVector::d2(1.0, 0.0);
        let d = g.div_at(&radial, [PI / 2.0, 0.0], 1e-3).unwrap();
        assert!(d.one_sided);
        assert!(d.value.abs() < 1e-5);
    }

    #[test]
    fn laplace_examples() {
        let e = ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap();
        let c = |_: [f64; 2]| 3.0;
        assert!(e.laplace_at(&c, [0.5, 0.0], 1e-3).unwrap().value.abs() < 1e-9);
        let sq = |z: [f64; 2]| z[0] * z[0];
        assert!((e.laplace_at(&sq, [0.5, 0.0], 1e-3).unwrap().value - 2.0).abs() < 1e-6);

        let g = ChartGeometry::band(0.3, 2.5).unwrap();
        let u = |z: [f64; 2]| z[0].cos();
        let v = g.laplace_at(&u, [FRAC_PI_4, 1.0], 1e-3).unwrap().value;
        assert!((v + 2.0 * FRAC_PI_4.cos()).abs() < 1e-5);
    }

    #[test]
    fn commutator_flat_cases_vanish() {
        let e = ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap();
        let u = |z: [f64; 2]| (3.0 * z[0]).sin() + z[0].powi(4);
        assert!(e.commutator_residual_at(&u, [0.4, 0.0], 1e-3).unwrap().value <= 1e-8);

        let cyl = ChartGeometry::revolution(Profile::Cylinder, 0.0, 3.0).unwrap();
        let u = |z: [f64; 2]| z[0].sin();
        assert!(cyl.commutator_residual_at(&u, [1.3, 0.5], 1e-3).unwrap().value <= 1e-8);
    }

    #[test]
    fn commutator_on_sphere_matches_ricci() {
        let g = ChartGeometry::band(0.3, 2.5).unwrap();
        let u = |z: [f64; 2]| z[0].cos();
        let r = g.commutator_residual_at(&u, [PI / 3.0, 0.2], 5e-3).unwrap().value;
        assert!(r < 1e-3, "residual {r}");
    }
}
