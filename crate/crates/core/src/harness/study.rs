//! Refinement studies against an oracle (`rates.csv`) and the vanishing
//! viscosity table (`viscosity_limit.csv`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::entropy::evolve;
use crate::error::{Error, Result};
use crate::grid::{CellField, StructuredGrid};
use crate::harness::artifact::fmt_num;
use crate::harness::config::{OracleSpec, RunConfig};
use crate::numerics::observed_order;
use crate::oracles::{
    burgers_interval_exact, characteristic_solution, viscosity_limit_study, CharacteristicTracer,
    ViscosityLimitTable,
};
use crate::par::map_indices;
use crate::problem::{InitialData, Scenario};
use crate::viscous::SolveOptions;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub l1_error: f64,
    /// `log2(e_coarse / e_fine)` against the previous row.
    pub observed_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatesTable {
    pub rows: Vec<RateRow>,
}

impl RatesTable {
    pub fn min_order(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.observed_order)
            .fold(None, |m, o| Some(m.map_or(o, |m: f64| m.min(o))))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,l1_error,observed_order\n");
        for r in &self.rows {
            let order = r.observed_order.map_or_else(String::new, fmt_num);
            let _ = writeln!(out, "{},{},{}", r.n, fmt_num(r.l1_error), order);
        }
        out
    }
}

/// Oracle values at the cell centers of `grid` at time `t`.
pub fn oracle_field(scenario: &Scenario, oracle: OracleSpec, grid: &StructuredGrid, t: f64) -> Result<CellField> {
    let centers = grid.centers();
    let values: Vec<Result<f64>> = match oracle {
        OracleSpec::Burgers(case) => centers.iter().map(|z| burgers_interval_exact(case, z[0], t)).collect(),
        OracleSpec::Characteristic => {
            let InitialData::Profile(p) = scenario.initial else {
                return Err(Error::Oracle("characteristic oracle needs an analytic initial profile".into()));
            };
            let geom = scenario.geometry;
            let tracer = CharacteristicTracer::for_grid(grid, scenario.flux);
            let u0 = move |z: [f64; 2]| p.eval(&geom, z);
            map_indices(centers.len(), |c| characteristic_solution(&tracer, &u0, centers[c], t))
        }
        OracleSpec::Reference => {
            return Err(Error::Oracle("reference oracle has no closed form".into()));
        }
    };
    grid.field(values.into_iter().collect::<Result<Vec<f64>>>()?)
}

/// Volume-weighted average of a field on a grid refined by integer factors.
pub fn restrict(fine_grid: &StructuredGrid, fine: &CellField, coarse_grid: &StructuredGrid) -> Result<CellField> {
    fine_grid.check(fine)?;
    let [f1, f2] = fine_grid.shape();
    let [c1, c2] = coarse_grid.shape();
    if f1 % c1 != 0 || f2 % c2 != 0 {
        return Err(Error::GridMismatch("resolutions are not nested".into()));
    }
    let (r1, r2) = (f1 / c1, f2 / c2);
    if r1 == 1 && r2 == 1 {
        return coarse_grid.field(fine.values().to_vec());
    }
    let vols = fine_grid.volumes();
    let u = fine.values();
    let values = (0..coarse_grid.cell_count())
        .map(|c| {
            let (i, j) = (c / c2, c % c2);
            let (mut m, mut v) = (0.0, 0.0);
            for a in i * r1..(i + 1) * r1 {
                for b in j * r2..(j + 1) * r2 {
                    let k = fine_grid.index(a, b);
                    m += vols[k] * u[k];
                    v += vols[k];
                }
            }
            m / v
        })
        .collect();
    coarse_grid.field(values)
}

/// Runs at `N, 2N, ..., 2^(levels-1) N` (all axes refined) and the `L1`
/// error against the configured oracle at the horizon.
pub fn convergence_table(cfg: &RunConfig, levels: usize) -> Result<RatesTable> {
    let oracle = cfg
        .oracle
        .ok_or_else(|| Error::Oracle(format!("scenario `{}` has no oracle", cfg.name)))?;
    if levels == 0 {
        return Err(Error::param("levels", "need at least one level"));
    }
    let opts = SolveOptions {
        keep_snapshots: true,
        ..SolveOptions::default()
    };
    let base = &cfg.scenario;
    let t = base.horizon;
    let mut runs = Vec::with_capacity(levels);
    for l in 0..levels {
        let resolution: Vec<usize> = base.resolution.iter().map(|n| n << l).collect();
        let sc = base.clone().with_resolution(resolution).with_cadence(base.horizon);
        let ev = evolve(&sc, &opts)?;
        let (_, u) = ev.snapshots.last().cloned().ok_or_else(|| Error::Oracle("run produced no output".into()))?;
        runs.push((sc, ev.grid, u));
    }
    let mut rows: Vec<RateRow> = Vec::with_capacity(levels);
    let (_, fine_grid, fine_u) = runs.last().unwrap();
    for (sc, grid, u) in &runs {
        let exact = match oracle {
            OracleSpec::Reference => restrict(fine_grid, fine_u, grid)?,
            _ => oracle_field(sc, oracle, grid, t)?,
        };
        let err = grid.l1_norm(&u.axpby(1.0, &exact, -1.0))?;
        let order = rows
            .last()
            .filter(|prev| prev.l1_error > 0.0 && err > 0.0)
            .map(|prev| observed_order(prev.l1_error, err, 2.0));
        rows.push(RateRow {
            n: sc.resolution[0],
            l1_error: err,
            observed_order: order,
        });
    }
    Ok(RatesTable { rows })
}

pub fn limit_csv(table: &ViscosityLimitTable) -> String {
    let mut out = String::from("epsilon,l1_distance,fitted_rate\n");
    let rate = table.fitted_rate.map_or_else(String::new, fmt_num);
    for r in &table.rows {
        let _ = writeln!(out, "{},{},{}", fmt_num(r.epsilon), fmt_num(r.l1_distance), rate);
    }
    out
}

/// Write `rates.csv` under `out_root/<name>`.
pub fn convergence(cfg: &RunConfig, levels: usize, out_root: &Path) -> Result<(RatesTable, PathBuf)> {
    let table = convergence_table(cfg, levels)?;
    let dir = out_root.join(&cfg.name);
    fs::create_dir_all(&dir)?;
    let path = dir.join("rates.csv");
    fs::write(&path, table.to_csv())?;
    Ok((table, path))
}

/// Write `viscosity_limit.csv` under `out_root/<name>`.
pub fn limit(cfg: &RunConfig, epsilons: &[f64], out_root: &Path) -> Result<(ViscosityLimitTable, PathBuf)> {
    let table = viscosity_limit_study(&cfg.scenario, epsilons)?;
    let dir = out_root.join(&cfg.name);
    fs::create_dir_all(&dir)?;
    let path = dir.join("viscosity_limit.csv");
    fs::write(&path, limit_csv(&table))?;
    Ok((table, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn cfg(oracle: &str) -> RunConfig {
        let text = format!(
            "[geometry]\nkind = interval\nlo = 0\nhi = 1\n[flux]\nshape = linear\na = 1\n\
             [initial]\nprofile = sine\nk = 1\namplitude = 1\n[solver]\nhorizon = 0.4\nresolution = 25\n\
             [output]\noracle = {oracle}\n"
        );
        parse_config(Path::new("lin.cfg"), &text).unwrap()
    }

    #[test]
    fn reference_oracle_at_one_level_is_exact() {
        let t = convergence_table(&cfg("reference"), 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].l1_error, 0.0);
    }

    #[test]
    fn linear_transport_converges() {
        let t = convergence_table(&cfg("characteristic"), 3).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![25, 50, 100]);
        assert!(t.min_order().unwrap() > 0.5, "{t:?}");
        assert!(t.to_csv().starts_with("N,l1_error,observed_order\n25,"));
    }

    #[test]
    fn missing_oracle_is_an_error() {
        let mut c = cfg("none");
        c.oracle = None;
        assert!(matches!(convergence_table(&c, 2), Err(Error::Oracle(_))));
    }

    #[test]
    fn restriction_is_a_weighted_average() {
        let geom = crate::geometry::ChartGeometry::band(0.5, 1.2).unwrap();
        let fine = StructuredGrid::build(geom, &[16, 32]).unwrap();
        let coarse = StructuredGrid::build(geom, &[8, 16]).unwrap();
        let u = fine.field_from_fn(|z| z[0].sin() + z[1].cos());
        let r = restrict(&fine, &u, &coarse).unwrap();
        let (a, b) = (fine.integrate(&u).unwrap(), coarse.integrate(&r).unwrap());
        assert!((a - b).abs() < 1e-3 * a.abs());
        let one = restrict(&fine, &fine.field_from_fn(|_| 2.5), &coarse).unwrap();
        assert!(one.values().iter().all(|&v| (v - 2.5).abs() < 1e-14));
    }
}
