//! Cell-centered structured discretization of a [`ChartGeometry`].
//!
//! Cells are indexed row-major, `c = i * n2 + j`, with `i` the transverse and
//! `j` the azimuthal index (`n2 = 1` on intervals). Faces are stored in a single
//! list: transverse faces `(i_f, j)` first, then azimuthal faces `(i, j + 1/2)`.
//! A face normal points from its `minus` cell to its `plus` cell; boundary
//! faces have no `plus` cell and their normal points out of the domain.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{ChartGeometry, MetricSample, Side, TangentVector};
use crate::numerics::{pairwise_sum_by, quintic_cutoff, quintic_cutoff_deriv, wrap_angle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Transverse,
    Azimuthal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub minus: usize,
    pub plus: Option<usize>,
    pub axis: Axis,
    pub center: [f64; 2],
    /// Unit normal in `g`.
    pub normal: TangentVector,
    /// `sqrt|g~|` times the face width (1 for the end points of an interval).
    pub measure: f64,
    /// `sqrt|g| g^nn * width / spacing`, the two-point diffusion coefficient.
    pub diffusion: f64,
    pub side: Option<Side>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.plus.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Homogeneous Dirichlet data realized by the odd ghost `u_ghost = -u`.
    DirichletZero,
}

#[derive(Clone, Debug)]
pub struct StructuredGrid {
    geometry: ChartGeometry,
    n: [usize; 2],
    h: [f64; 2],
    centers: Vec<[f64; 2]>,
    volume: Vec<f64>,
    metric: Vec<MetricSample>,
    dist: Vec<f64>,
    faces: Vec<Face>,
    boundary_faces: Vec<usize>,
    key: u64,
}

/// One real value per cell, tied to the grid that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    values: Vec<f64>,
    key: u64,
}

impl CellField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> CellField {
        CellField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            key: self.key,
        }
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &CellField, b: f64) -> CellField {
        assert_eq!(self.key, other.key, "fields from different grids");
        CellField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            key: self.key,
        }
    }
}

/// A cell inside a metric ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallCell {
    pub cell: usize,
    /// Transverse metric distance from the ball center.
    pub normal: f64,
    /// Squared metric distance from the ball center.
    pub dist2: f64,
}

/// Smooth boundary cutoff `R_delta` sampled at cell centers.
#[derive(Clone, Debug)]
pub struct CutoffField {
    pub field: CellField,
    pub delta: f64,
}

/// Value of `R_delta` at metric distance `d` from the boundary.
pub fn cutoff_value(d: f64, delta: f64) -> f64 {
    quintic_cutoff(2.0 * d / delta - 1.0)
}

impl StructuredGrid {
    pub fn build(geometry: ChartGeometry, resolution: &[usize]) -> Result<Self> {
        let dim = geometry.dim();
        if resolution.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: resolution.len(),
            });
        }
        if resolution.iter().any(|&r| r < 4) {
            return Err(Error::param("resolution", "need at least 4 cells per axis"));
        }
        let n1 = resolution[0];
        let n2 = if dim == 2 { resolution[1] } else { 1 };
        let h1 = geometry.transverse_extent() / n1 as f64;
        let h2 = if dim == 2 { TAU / n2 as f64 } else { 1.0 };

        let mut centers = Vec::with_capacity(n1 * n2);
        let mut volume = Vec::with_capacity(n1 * n2);
        let mut metric = Vec::with_capacity(n1 * n2);
        let mut dist = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                let z = [
                    geometry.lo + (i as f64 + 0.5) * h1,
                    if dim == 2 { (j as f64 + 0.5) * h2 } else { 0.0 },
                ];
                let m = geometry.metric_unchecked(z);
                if !(m.sqrt_det > 0.0) {
                    return Err(Error::param("geometry", format!("degenerate metric at {z:?}")));
                }
                centers.push(z);
                volume.push(m.sqrt_det * h1 * if dim == 2 { h2 } else { 1.0 });
                metric.push(m);
                dist.push(geometry.distance_to_boundary(z));
            }
        }

        let mut faces = Vec::new();
        let mut boundary_faces = Vec::new();
        for i_f in 0..=n1 {
            for j in 0..n2 {
                let z = [geometry.lo + i_f as f64 * h1, if dim == 2 { (j as f64 + 0.5) * h2 } else { 0.0 }];
                let m = geometry.metric_unchecked(z);
                let unit = 1.0 / m.g[0][0].sqrt();
                let (measure, diffusion) = if dim == 2 {
                    (m.sqrt_det * h2, m.sqrt_det * m.g_inv[0][0] * h2 / h1)
                } else {
                    (1.0, m.sqrt_det * m.g_inv[0][0] / h1)
                };
                let (minus, plus, sign, side) = if i_f == 0 {
                    (j, None, -1.0, Some(Side::Lower))
                } else if i_f == n1 {
                    ((n1 - 1) * n2 + j, None, 1.0, Some(Side::Upper))
                } else {
                    ((i_f - 1) * n2 + j, Some(i_f * n2 + j), 1.0, None)
                };
                let normal = if dim == 2 {
                    TangentVector::d2(sign * unit, 0.0)
                } else {
                    TangentVector::d1(sign * unit)
                };
                if plus.is_none() {
                    boundary_faces.push(faces.len());
                }
                faces.push(Face {
                    minus,
                    plus,
                    axis: Axis::Transverse,
                    center: z,
                    normal,
                    measure,
                    diffusion,
                    side,
                });
            }
        }
        if dim == 2 {
            for i in 0..n1 {
                for j in 0..n2 {
                    let s = geometry.lo + (i as f64 + 0.5) * h1;
                    let phi = ((j + 1) % n2) as f64 * h2;
                    let m = geometry.metric_unchecked([s, phi]);
                    let r = m.g[1][1].sqrt();
                    faces.push(Face {
                        minus: i * n2 + j,
                        plus: Some(i * n2 + (j + 1) % n2),
                        axis: Axis::Azimuthal,
                        center: [s, phi],
                        normal: TangentVector::d2(0.0, 1.0 / r),
                        measure: h1,
                        diffusion: m.sqrt_det * m.g_inv[1][1] * h1 / h2,
                        side: None,
                    });
                }
            }
        }
        // Lower boundary faces come first, ordered by azimuth.
        boundary_faces.sort_by_key(|&f| (faces[f].side != Some(Side::Lower), f));

        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        serde_json::to_string(&geometry)
            .expect("geometry serializes")
            .hash(&mut hasher);
        (n1, n2).hash(&mut hasher);

        Ok(Self {
            geometry,
            n: [n1, n2],
            h: [h1, h2],
            centers,
            volume,
            metric,
            dist,
            faces,
            boundary_faces,
            key: hasher.finish(),
        })
    }

    pub fn geometry(&self) -> &ChartGeometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    /// `(n1, n2)`; `n2 = 1` on intervals.
    pub fn shape(&self) -> [usize; 2] {
        self.n
    }

    pub fn resolution(&self) -> Vec<usize> {
        self.n[..self.dim()].to_vec()
    }

    /// Chart cell widths `(h1, h2)`.
    pub fn widths(&self) -> [f64; 2] {
        self.h
    }

    pub fn cell_count(&self) -> usize {
        self.centers.len()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n[1] + j
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    pub fn metric(&self, c: usize) -> &MetricSample {
        &self.metric[c]
    }

    pub fn distance_to_boundary(&self) -> &[f64] {
        &self.dist
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    pub fn zeros(&self) -> CellField {
        CellField {
            values: vec![0.0; self.cell_count()],
            key: self.key,
        }
    }

    pub fn field(&self, values: Vec<f64>) -> Result<CellField> {
        if values.len() != self.cell_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                self.cell_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("field", format!("non-finite value at cell {i}")));
        }
        Ok(CellField { values, key: self.key })
    }

    pub fn field_from_fn(&self, f: impl Fn([f64; 2]) -> f64) -> CellField {
        CellField {
            values: self.centers.iter().map(|&z| f(z)).collect(),
            key: self.key,
        }
    }

    pub fn check(&self, field: &CellField) -> Result<()> {
        if field.key != self.key || field.len() != self.cell_count() {
            return Err(Error::GridMismatch(format!(
                "field with {} cells does not match grid {:?}",
                field.len(),
                self.resolution()
            )));
        }
        Ok(())
    }

    /// Metric transverse width of cell `c`.
    pub fn transverse_metric_width(&self, c: usize) -> f64 {
        let s = self.centers[c][0];
        let h = 0.5 * self.h[0];
        self.geometry.transverse_distance(s - h, s + h)
    }

    /// Midpoint-rule integral `sum field * volume`.
    pub fn integrate(&self, field: &CellField) -> Result<f64> {
        self.check(field)?;
        Ok(pairwise_sum_by(field.len(), |c| field.values[c] * self.volume[c]))
    }

    /// `sum value * face_measure` over boundary faces, in `boundary_faces` order.
    pub fn boundary_integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.boundary_faces.len() {
            return Err(Error::GridMismatch(format!(
                "{} boundary values for {} boundary faces",
                values.len(),
                self.boundary_faces.len()
            )));
        }
        Ok(pairwise_sum_by(values.len(), |k| {
            values[k] * self.faces[self.boundary_faces[k]].measure
        }))
    }

    /// Volume-weighted L1 norm.
    pub fn l1_norm(&self, field: &CellField) -> Result<f64> {
        self.check(field)?;
        Ok(pairwise_sum_by(field.len(), |c| field.values[c].abs() * self.volume[c]))
    }

    /// Per-cell differential `d_i u` (covector components).
    pub fn discrete_differential(&self, field: &CellField) -> Result<Vec<TangentVector>> {
        self.check(field)?;
        let [n1, n2] = self.n;
        let [h1, h2] = self.h;
        let u = &field.values;
        let mut out = Vec::with_capacity(u.len());
        for i in 0..n1 {
            for j in 0..n2 {
                let at = |ii: usize| u[ii * n2 + j];
                let d0 = if i == 0 {
                    (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h1)
                } else if i == n1 - 1 {
                    (3.0 * at(n1 - 1) - 4.0 * at(n1 - 2) + at(n1 - 3)) / (2.0 * h1)
                } else {
                    (at(i + 1) - at(i - 1)) / (2.0 * h1)
                };
                if self.dim() == 1 {
                    out.push(TangentVector::d1(d0));
                } else {
                    let jp = (j + 1) % n2;
                    let jm = (j + n2 - 1) % n2;
                    let d1 = (u[i * n2 + jp] - u[i * n2 + jm]) / (2.0 * h2);
                    out.push(TangentVector::d2(d0, d1));
                }
            }
        }
        Ok(out)
    }

    /// `grad_g u = g^ij d_j u` at cell centers: centered differences inside,
    /// second-order one-sided differences in boundary-adjacent cells, periodic
    /// wrap in azimuth.
    pub fn discrete_gradient(&self, field: &CellField) -> Result<Vec<TangentVector>> {
        let d = self.discrete_differential(field)?;
        Ok(d.iter()
            .enumerate()
            .map(|(c, w)| self.metric[c].raise(w))
            .collect())
    }

    /// `(1/vol) * sum over faces of +-flux`, with `face_flux[f]` oriented along
    /// the face normal (minus to plus, outward on the boundary).
    pub fn face_divergence(&self, face_flux: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.cell_count()];
        for (f, face) in self.faces.iter().enumerate() {
            acc[face.minus] += face_flux[f];
            if let Some(p) = face.plus {
                acc[p] -= face_flux[f];
            }
        }
        acc.iter_mut()
            .zip(&self.volume)
            .for_each(|(a, v)| *a /= v);
        acc
    }

    /// Conservative Laplace-Beltrami stencil
    /// `(1/vol) sum_faces sqrt|g| g^nn (du/dn) * width`.
    pub fn discrete_laplace(&self, field: &CellField, mode: BoundaryMode) -> Result<CellField> {
        self.check(field)?;
        let BoundaryMode::DirichletZero = mode;
        Ok(CellField {
            values: self.laplace_values(&field.values),
            key: self.key,
        })
    }

    pub(crate) fn laplace_values(&self, u: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; u.len()];
        for face in &self.faces {
            let um = u[face.minus];
            match face.plus {
                Some(p) => {
                    let q = face.diffusion * (u[p] - um);
                    acc[face.minus] += q;
                    acc[p] -= q;
                }
                None => acc[face.minus] += face.diffusion * (-2.0 * um),
            }
        }
        acc.iter_mut()
            .zip(&self.volume)
            .for_each(|(a, v)| *a /= v);
        acc
    }

    fn max_cutoff_delta(&self) -> f64 {
        0.5 * self
            .geometry
            .transverse_distance(self.geometry.lo, self.geometry.hi)
    }

    pub fn build_cutoff(&self, delta: f64) -> Result<CutoffField> {
        if !(delta > 0.0 && delta < self.max_cutoff_delta()) {
            return Err(Error::param(
                "delta",
                format!("need 0 < delta < {}, got {delta}", self.max_cutoff_delta()),
            ));
        }
        Ok(CutoffField {
            field: CellField {
                values: self.dist.iter().map(|&d| cutoff_value(d, delta)).collect(),
                key: self.key,
            },
            delta,
        })
    }

    /// Covector `dR_delta` at cell `c`, from the exact distance function.
    pub fn cutoff_differential(&self, c: usize, delta: f64) -> TangentVector {
        let z = self.centers[c];
        let g = &self.geometry;
        let to_lower = g.transverse_distance(g.lo, z[0]);
        let to_upper = g.transverse_distance(z[0], g.hi);
        let d = to_lower.min(to_upper);
        let sign = if to_lower <= to_upper { 1.0 } else { -1.0 };
        let dd = sign * self.metric[c].g[0][0].sqrt();
        let dr = quintic_cutoff_deriv(2.0 * d / delta - 1.0) * 2.0 / delta * dd;
        if self.dim() == 1 {
            TangentVector::d1(dr)
        } else {
            TangentVector::d2(dr, 0.0)
        }
    }

    /// Metric offset `(transverse, tangential)` from `x0` to cell `c`, using the
    /// local azimuthal coefficient at `x0`.
    fn offset(&self, x0: [f64; 2], c: usize) -> (f64, f64) {
        let z = self.centers[c];
        let dn = self.geometry.transverse_distance(x0[0], z[0]);
        if self.dim() == 1 {
            (dn, 0.0)
        } else {
            let r0 = self.geometry.radius(x0[0]).0;
            (dn, r0 * wrap_angle(z[1] - x0[1]))
        }
    }

    /// Cells whose centers lie within metric distance `rho` of `x0`, sorted by
    /// cell index.
    pub fn ball_cells(&self, x0: [f64; 2], rho: f64) -> Vec<BallCell> {
        let [n1, n2] = self.n;
        let [h1, h2] = self.h;
        let g = &self.geometry;
        // Chart-coordinate bounds of the ball.
        let min_w = match self.dim() {
            1 => {
                let a = g.transverse_distance(g.lo, g.lo + h1) / h1;
                let b = g.transverse_distance(g.hi - h1, g.hi) / h1;
                a.min(b)
            }
            _ => 1.0,
        };
        let span = rho / min_w;
        let i_lo = (((x0[0] - span - g.lo) / h1).floor().max(0.0)) as usize;
        let i_hi = ((((x0[0] + span - g.lo) / h1).ceil()) as usize).min(n1);
        let (j_range, wrap) = if self.dim() == 1 {
            (0..1, false)
        } else {
            let r0 = g.radius(x0[0]).0;
            let dphi = rho / r0;
            if dphi >= std::f64::consts::PI {
                (0..n2, false)
            } else {
                let k = (dphi / h2).ceil() as usize + 1;
                let j0 = (x0[1] / h2).floor() as isize;
                let lo = j0 - k as isize;
                let count = (2 * k + 1).min(n2);
                ((lo.rem_euclid(n2 as isize) as usize)..(lo.rem_euclid(n2 as isize) as usize + count), true)
            }
        };
        let mut cells = Vec::new();
        for i in i_lo..i_hi {
            for jj in j_range.clone() {
                let j = if wrap { jj % n2 } else { jj };
                let c = i * n2 + j;
                let (dn, dt) = self.offset(x0, c);
                let dist2 = dn * dn + dt * dt;
                if dist2 <= rho * rho {
                    cells.push(BallCell {
                        cell: c,
                        normal: dn,
                        dist2,
                    });
                }
            }
        }
        cells.sort_unstable_by_key(|b| b.cell);
        cells
    }

    /// Volume-weighted mean of `field` over the metric ball `B_rho(x0)`
    /// intersected with `M` (half balls at the boundary).
    pub fn lebesgue_average(&self, field: &CellField, x0: [f64; 2], rho: f64) -> Result<f64> {
        self.check(field)?;
        let cells = self.ball_cells(x0, rho);
        if cells.is_empty() {
            return Err(Error::param(
                "rho",
                format!("ball of radius {rho} around {x0:?} contains no cell center"),
            ));
        }
        let vol = pairwise_sum_by(cells.len(), |k| self.volume[cells[k].cell]);
        let mass = pairwise_sum_by(cells.len(), |k| {
            self.volume[cells[k].cell] * field.values[cells[k].cell]
        });
        Ok(mass / vol)
    }

    /// Write `i[,j],z1[,z2],value` rows with 17 significant digits.
    pub fn write_field_csv(&self, field: &CellField, mut out: impl Write) -> Result<()> {
        self.check(field)?;
        let mut buf = String::new();
        if self.dim() == 1 {
            buf.push_str("i,z1,value\n");
        } else {
            buf.push_str("i,j,z1,z2,value\n");
        }
        let n2 = self.n[1];
        for (c, v) in field.values.iter().enumerate() {
            let z = self.centers[c];
            if self.dim() == 1 {
                writeln!(buf, "{},{:.16e},{:.16e}", c, z[0], v).unwrap();
            } else {
                writeln!(buf, "{},{},{:.16e},{:.16e},{:.16e}", c / n2, c % n2, z[0], z[1], v).unwrap();
            }
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_field_csv(&self, path: &Path) -> Result<CellField> {
        let file = std::fs::File::open(path)?;
        let csv_err = |message: String| Error::Csv {
            path: path.to_path_buf(),
            message,
        };
        let mut values = vec![f64::NAN; self.cell_count()];
        let mut seen = 0usize;
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let expected = if self.dim() == 1 { 3 } else { 5 };
            if cols.len() != expected {
                return Err(csv_err(format!("line {}: expected {expected} columns", lineno + 1)));
            }
            let parse_idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| csv_err(format!("line {}: {e}", lineno + 1)))
            };
            let c = if self.dim() == 1 {
                parse_idx(cols[0])?
            } else {
                let (i, j) = (parse_idx(cols[0])?, parse_idx(cols[1])?);
                if i >= self.n[0] || j >= self.n[1] {
                    return Err(csv_err(format!("line {}: index out of range", lineno + 1)));
                }
                self.index(i, j)
            };
            if c >= values.len() {
                return Err(csv_err(format!("line {}: index out of range", lineno + 1)));
            }
            values[c] = cols[expected - 1]
                .parse::<f64>()
                .map_err(|e| csv_err(format!("line {}: {e}", lineno + 1)))?;
            seen += 1;
        }
        if seen != values.len() || values.iter().any(|v| v.is_nan()) {
            return Err(csv_err(format!("expected {} cells, got {seen}", values.len())));
        }
        self.field(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Weight;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn band(n1: usize, n2: usize) -> StructuredGrid {
        StructuredGrid::build(ChartGeometry::band(FRAC_PI_4, FRAC_PI_2).unwrap(), &[n1, n2]).unwrap()
    }

    fn unit_interval(n: usize) -> StructuredGrid {
        StructuredGrid::build(ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(), &[n]).unwrap()
    }

    #[test]
    fn volumes() {
        let g = band(64, 128);
        let v = g.integrate(&g.field_from_fn(|_| 1.0)).unwrap();
        let exact = PI * 2f64.sqrt();
        assert!((v - exact).abs() / exact < 0.01);

        let g = unit_interval(10);
        assert!((g.integrate(&g.field_from_fn(|_| 1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(g.integrate(&g.zeros()).unwrap(), 0.0);

        let g = StructuredGrid::build(
            ChartGeometry::interval(Weight::Linear { beta: 1.0 }, 0.0, 1.0).unwrap(),
            &[100],
        )
        .unwrap();
        assert!((g.integrate(&g.field_from_fn(|_| 1.0)).unwrap() - 1.5).abs() < 1e-4);
    }

    #[test]
    fn resolution_checks() {
        let geom = ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap();
        assert!(StructuredGrid::build(geom, &[3]).is_err());
        assert!(StructuredGrid::build(geom, &[8, 8]).is_err());
    }

    #[test]
    fn grid_mismatch_is_detected() {
        let a = unit_interval(10);
        let b = unit_interval(12);
        assert!(matches!(a.integrate(&b.zeros()), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn boundary_integrals() {
        let g = StructuredGrid::build(ChartGeometry::band(FRAC_PI_4, FRAC_PI_2).unwrap(), &[16, 64]).unwrap();
        let upper: Vec<f64> = g
            .boundary_faces()
            .iter()
            .map(|&f| if g.faces()[f].side == Some(Side::Upper) { 1.0 } else { 0.0 })
            .collect();
        assert!((g.boundary_integrate(&upper).unwrap() - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
        assert_eq!(g.boundary_integrate(&vec![0.0; upper.len()]).unwrap(), 0.0);

        let g = unit_interval(10);
        assert_eq!(g.boundary_integrate(&[2.0, 3.0]).unwrap(), 5.0);
        assert!(g.boundary_integrate(&[1.0]).is_err());
    }

    #[test]
    fn normals_are_unit_on_boundary_faces() {
        let geoms = [
            ChartGeometry::band(0.4, 1.9).unwrap(),
            ChartGeometry::interval(Weight::Linear { beta: 2.0 }, 0.0, 1.0).unwrap(),
        ];
        for geom in geoms {
            let res: Vec<usize> = vec![8; geom.dim()];
            let g = StructuredGrid::build(geom, &res).unwrap();
            for &f in g.boundary_faces() {
                let face = &g.faces()[f];
                let m = geom.metric_at(face.center).unwrap();
                assert!((m.norm(&face.normal) - 1.0).abs() < 1e-12);
                let n = geom.unit_outer_normal(face.center).unwrap();
                assert!((n[0] - face.normal[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradients() {
        let g = unit_interval(20);
        let grad = g.discrete_gradient(&g.field_from_fn(|_| 4.0)).unwrap();
        assert!(grad.iter().all(|v| v[0] == 0.0));
        let grad = g.discrete_gradient(&g.field_from_fn(|z| z[0])).unwrap();
        assert!(grad.iter().all(|v| (v[0] - 1.0).abs() < 1e-12));

        let g = band(32, 64);
        let grad = g.discrete_gradient(&g.field_from_fn(|z| z[1])).unwrap();
        let [n1, n2] = g.shape();
        for i in 0..n1 {
            for j in 1..n2 - 1 {
                let c = g.index(i, j);
                let s = g.centers()[c][0];
                assert!((grad[c][1] - 1.0 / (s.sin() * s.sin())).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dirichlet_laplace_eigenfunction() {
        let g = unit_interval(200);
        let u = g.field_from_fn(|z| (PI * z[0]).sin());
        let lap = g.discrete_laplace(&u, BoundaryMode::DirichletZero).unwrap();
        let h = 1.0 / 200.0;
        for (l, v) in lap.values().iter().zip(u.values()) {
            assert!((l + PI * PI * v).abs() < 10.0 * h * h);
        }
        let zero = g.discrete_laplace(&g.zeros(), BoundaryMode::DirichletZero).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn band_laplace_matches_pointwise_operator() {
        let geom = ChartGeometry::band(FRAC_PI_4, FRAC_PI_2).unwrap();
        let f = |z: [f64; 2]| z[0].cos() - FRAC_PI_2.cos();
        let mut errs = Vec::new();
        for n in [32, 64] {
            let g = StructuredGrid::build(geom, &[n, 16]).unwrap();
            let lap = g.discrete_laplace(&g.field_from_fn(f), BoundaryMode::DirichletZero).unwrap();
            let mut err: f64 = 0.0;
            for (c, z) in g.centers().iter().enumerate() {
                if g.distance_to_boundary()[c] > 0.1 {
                    let exact = geom.laplace_at(&f, *z, 1e-3).unwrap().value;
                    err = err.max((lap.values()[c] - exact).abs());
                }
            }
            errs.push(err);
        }
        assert!(errs[0] < 1e-3);
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn discrete_divergence_theorem_telescopes() {
        let geom = ChartGeometry::band(0.5, 2.0).unwrap();
        let g = StructuredGrid::build(geom, &[12, 20]).unwrap();
        let x = |z: [f64; 2]| TangentVector::d2(z[0].cos() + 0.3, (2.0 * z[1]).sin());
        let flux: Vec<f64> = g
            .faces()
            .iter()
            .map(|f| geom.metric_at(f.center).unwrap().inner(&x(f.center), &f.normal) * f.measure)
            .collect();
        let div = g.face_divergence(&flux);
        let lhs: f64 = div.iter().zip(g.volumes()).map(|(d, v)| d * v).sum();
        let bvals: Vec<f64> = g.boundary_faces().iter().map(|&f| flux[f] / g.faces()[f].measure).collect();
        let rhs = g.boundary_integrate(&bvals).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn cutoff_profile() {
        let g = unit_interval(400);
        let delta = 0.2;
        let r = g.build_cutoff(delta).unwrap();
        for (c, d) in g.distance_to_boundary().iter().enumerate() {
            let v = r.field.values()[c];
            assert!((0.0..=1.0).contains(&v));
            if *d <= delta / 2.0 {
                assert_eq!(v, 1.0);
            }
            if *d > delta {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(cutoff_value(0.2 * delta, delta), 1.0);
        assert_eq!(cutoff_value(2.0 * delta, delta), 0.0);
        assert!((cutoff_value(0.75 * delta, delta) - 0.5).abs() < 1e-15);
        assert!(g.build_cutoff(0.6).is_err());
    }

    #[test]
    fn lebesgue_averages() {
        let g = unit_interval(200);
        let c = g.field_from_fn(|_| 2.5);
        assert!((g.lebesgue_average(&c, [0.37, 0.0], 0.05).unwrap() - 2.5).abs() < 1e-14);
        let lin = g.field_from_fn(|z| 3.0 * z[0] - 1.0);
        let v = g.lebesgue_average(&lin, [0.5, 0.0], 0.05).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let step = g.field_from_fn(|z| if z[0] > 0.5 { 1.0 } else { 0.0 });
        let v = g.lebesgue_average(&step, [0.5, 0.0], 0.05).unwrap();
        assert!((v - 0.5).abs() < 0.005 / 0.05);
        assert!(g.lebesgue_average(&c, [0.5, 0.0], 1e-4).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = band(8, 8);
        let u = g.field_from_fn(|z| z[0].sin() * z[1].cos() / 3.0);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.csv");
        g.write_field_csv(&u, std::fs::File::create(&p).unwrap()).unwrap();
        let back = g.read_field_csv(&p).unwrap();
        assert_eq!(back, u);
    }
}
