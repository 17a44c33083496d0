//! Run persistence: `series.csv`, field snapshots, trace and BLN tables and
//! `run.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bv_trace::{extract_trace, total_variation, TraceField};
use crate::entropy::solve_hyperbolic;
use crate::error::{Error, Result};
use crate::grid::{CellField, StructuredGrid};
use crate::harness::config::RunConfig;
use crate::problem::{h21_surrogate, Scenario};
use crate::viscous::{solve_viscous, SeriesRecord, TvEnvelope};

/// Fitted constants of the monitored bounds, per run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FittedConstants {
    /// `eps * |u0^eps|_{H^{2,1}} / tv(u0)`.
    pub c0: Option<f64>,
    /// `max |du/dt|_L1 / tv(u0)`.
    pub c1: Option<f64>,
    /// Linear growth rate of the TV envelope.
    pub c2: Option<f64>,
    /// Exponential rate of the TV envelope.
    pub c3: Option<f64>,
    /// `max |u(t)|_inf / |u0|_inf`.
    pub c4: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Viscous,
    Hyperbolic,
}

impl SolverKind {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        if scenario.epsilon > 0.0 {
            SolverKind::Viscous
        } else {
            SolverKind::Hyperbolic
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord<'a> {
    pub name: &'a str,
    pub code_version: &'static str,
    pub solver: SolverKind,
    pub status: RunStatus,
    pub wall_time_s: f64,
    pub steps: usize,
    pub constants: FittedConstants,
    pub snapshots: Vec<String>,
    pub scenario: &'a Scenario,
}

/// Outcome of [`run`].
#[derive(Clone, Debug)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub solver: SolverKind,
    pub status: RunStatus,
    pub constants: FittedConstants,
    pub files: Vec<PathBuf>,
}

impl RunArtifact {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_num)
}

/// `series.csv` text; hyperbolic runs carry three extra columns.
pub fn series_csv(series: &[SeriesRecord], solver: SolverKind) -> String {
    let mut out = String::from("t,linf,tv_jump,tv_gradient,dudt_l1,mass");
    if solver == SolverKind::Hyperbolic {
        out.push_str(",entropy_cell_resid_max,bln_resid_max,mass_flux_boundary");
    }
    out.push('\n');
    for r in series {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            fmt_num(r.t),
            fmt_num(r.linf),
            fmt_num(r.tv_jump),
            fmt_num(r.tv_gradient),
            fmt_num(r.dudt_l1),
            fmt_num(r.mass)
        );
        if solver == SolverKind::Hyperbolic {
            let _ = write!(
                out,
                ",{},{},{}",
                opt_num(r.entropy_cell_resid_max),
                opt_num(r.bln_resid_max),
                opt_num(r.mass_flux_boundary)
            );
        }
        out.push('\n');
    }
    out
}

fn boundary_columns(dim: usize) -> &'static str {
    if dim == 1 {
        "face,z1"
    } else {
        "face,z1,z2"
    }
}

fn boundary_prefix(out: &mut String, grid: &StructuredGrid, face: usize, z: [f64; 2]) {
    if grid.dim() == 1 {
        let _ = write!(out, "{face},{}", fmt_num(z[0]));
    } else {
        let _ = write!(out, "{face},{},{}", fmt_num(z[0]), fmt_num(z[1]));
    }
}

/// `face,z1[,z2],tu,residual` per boundary face.
pub fn trace_csv(grid: &StructuredGrid, trace: &TraceField) -> String {
    let mut out = format!("{},tu,residual\n", boundary_columns(grid.dim()));
    for (k, &f) in grid.boundary_faces().iter().enumerate() {
        boundary_prefix(&mut out, grid, f, trace.coords[k]);
        let _ = writeln!(out, ",{},{}", fmt_num(trace.values[k]), fmt_num(trace.residual[k]));
    }
    out
}

/// `face,z1[,z2],tu,bln_residual` per boundary face.
pub fn bln_csv(grid: &StructuredGrid, trace: &TraceField, bln: &[f64]) -> String {
    let mut out = format!("{},tu,bln_residual\n", boundary_columns(grid.dim()));
    for (k, &f) in grid.boundary_faces().iter().enumerate() {
        boundary_prefix(&mut out, grid, f, trace.coords[k]);
        let _ = writeln!(out, ",{},{}", fmt_num(trace.raw[k]), fmt_num(bln[k]));
    }
    out
}

fn time_tag(t: f64) -> String {
    format!("{t:.6}")
}

/// Constants read off a finished run.
pub fn fit_constants(
    grid: &StructuredGrid,
    scenario: &Scenario,
    raw_initial: &CellField,
    initial: &CellField,
    series: &[SeriesRecord],
) -> Result<FittedConstants> {
    let tv0 = total_variation(grid, raw_initial)?.tv_jump;
    let per_tv = |v: f64| (tv0 > 0.0).then(|| v / tv0);
    let c0 = if scenario.epsilon > 0.0 {
        per_tv(h21_surrogate(grid, initial, scenario.epsilon)?)
    } else {
        None
    };
    let c1 = per_tv(series.iter().map(|r| r.dudt_l1).fold(0.0, f64::max));
    let samples: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.tv_jump)).collect();
    let tv_start = series.first().map_or(tv0, |r| r.tv_jump);
    let envelope = TvEnvelope::fit(&samples, tv_start, scenario.horizon).ok();
    let linf0 = initial.linf();
    let c4 = (linf0 > 0.0).then(|| series.iter().map(|r| r.linf).fold(0.0, f64::max) / linf0);
    Ok(FittedConstants {
        c0,
        c1,
        c2: envelope.map(|e| e.c2),
        c3: envelope.map(|e| e.c3),
        c4,
    })
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, text)?;
        self.files.push(p);
        Ok(())
    }

    fn field(&mut self, grid: &StructuredGrid, name: &str, u: &CellField) -> Result<()> {
        let mut buf = Vec::new();
        grid.write_field_csv(u, &mut buf)?;
        let p = self.dir.join(name);
        fs::write(&p, buf)?;
        self.files.push(p);
        Ok(())
    }
}

/// Solve `cfg` and write artifacts to `out_root/<name>`. Solver aborts are
/// recorded in `run.json` and returned as [`RunStatus::Aborted`].
pub fn run(cfg: &RunConfig, out_root: &Path) -> Result<RunArtifact> {
    let scenario = &cfg.scenario;
    scenario.validate()?;
    let dir = out_root.join(&cfg.name);
    fs::create_dir_all(&dir)?;
    let mut w = Writer { dir, files: Vec::new() };
    let solver = SolverKind::for_scenario(scenario);
    let grid = scenario.build_grid()?;
    let raw_initial = scenario.initial.sample(&grid)?;
    let start = Instant::now();

    let outcome = match solver {
        SolverKind::Viscous => solve_viscous(scenario).map(|r| {
            let traces = if grid.shape()[0] >= crate::bv_trace::MIN_TRACE_RESOLUTION {
                r.snapshots
                    .iter()
                    .map(|(t, u)| extract_trace(&grid, u).map(|tr| (*t, tr)))
                    .collect::<Result<Vec<_>>>()
            } else {
                Ok(Vec::new())
            };
            (r.series, r.snapshots, r.initial, r.steps, traces, Vec::new())
        }),
        SolverKind::Hyperbolic => solve_hyperbolic(scenario)
            .map(|r| (r.series, r.snapshots, r.initial, r.steps, Ok(r.traces), r.bln)),
    };
    let wall = start.elapsed().as_secs_f64();

    let (status, constants, steps, snapshot_names) = match outcome {
        Ok((series, snapshots, initial, steps, traces, bln)) => {
            let traces = traces?;
            w.put("series.csv", &series_csv(&series, solver))?;
            let mut names = Vec::new();
            if scenario.output.snapshots {
                for (k, (_, u)) in snapshots.iter().enumerate() {
                    let name = format!("u_{k}.csv");
                    w.field(&grid, &name, u)?;
                    names.push(name);
                }
            }
            for (t, tr) in &traces {
                w.put(&format!("trace_{}.csv", time_tag(*t)), &trace_csv(&grid, tr))?;
            }
            for ((t, tr), (_, b)) in traces.iter().zip(&bln) {
                w.put(&format!("bln_{}.csv", time_tag(*t)), &bln_csv(&grid, tr, b))?;
            }
            let constants = fit_constants(&grid, scenario, &raw_initial, &initial, &series)?;
            (RunStatus::Completed, constants, steps, names)
        }
        Err(e @ Error::Instability { .. }) => (
            RunStatus::Aborted { reason: e.to_string() },
            FittedConstants::default(),
            0,
            Vec::new(),
        ),
        Err(e) => return Err(e),
    };

    let record = RunRecord {
        name: &cfg.name,
        code_version: env!("CARGO_PKG_VERSION"),
        solver,
        status: status.clone(),
        wall_time_s: wall,
        steps,
        constants,
        snapshots: snapshot_names,
        scenario,
    };
    w.put("run.json", &serde_json::to_string_pretty(&record)?)?;
    Ok(RunArtifact {
        dir: w.dir,
        solver,
        status,
        constants,
        files: w.files,
    })
}
