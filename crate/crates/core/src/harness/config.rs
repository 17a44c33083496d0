//! Sectioned `key = value` scenario files.
//!
//! ```text
//! [geometry]
//! kind = interval        # interval | band | revolution
//! lo = 0
//! hi = 1
//! [flux]
//! shape = burgers
//! a = 1
//! [initial]
//! profile = step
//! at = 0.5
//! left = 1
//! right = 0
//! [solver]
//! horizon = 1
//! resolution = 200
//! [output]
//! oracle = shock-exit
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ChartGeometry, GeometryKind, Profile, Weight};
use crate::oracles::BurgersCase;
use crate::problem::{
    AzimuthalProfile, EntropySettings, FluxFamily, FluxShape, InitialData, InitialProfile, MollifierSpec,
    OutputSpec, Scenario, TimeProfile,
};

const SECTIONS: [&str; 5] = ["geometry", "flux", "initial", "solver", "output"];

/// Reference solution used by convergence studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleSpec {
    /// Transport along characteristics (linear flux).
    Characteristic,
    Burgers(BurgersCase),
    /// The solver itself at the finest level.
    Reference,
}

/// A parsed scenario file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub name: String,
    pub scenario: Scenario,
    /// Second initial datum for paired (contraction) runs.
    pub pair: Option<InitialData>,
    pub oracle: Option<OracleSpec>,
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

struct Section<'a> {
    path: &'a str,
    name: &'static str,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl<'a> Section<'a> {
    fn err(&self, line: usize, message: String) -> Error {
        Error::Config {
            path: self.path.to_string(),
            line,
            message,
        }
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| self.err(e.line, format!("field `{key}`: expected a number, got `{}`", e.value))),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn req_f64(&mut self, key: &str) -> Result<f64> {
        let line = self.line;
        self.opt_f64(key)?
            .ok_or_else(|| self.err(line, format!("[{}] is missing field `{key}`", self.name)))
    }

    fn opt_str(&mut self, key: &str) -> Option<(String, usize)> {
        self.take(key).map(|e| (e.value, e.line))
    }

    fn req_str(&mut self, key: &str) -> Result<(String, usize)> {
        let line = self.line;
        self.opt_str(key)
            .ok_or_else(|| self.err(line, format!("[{}] is missing field `{key}`", self.name)))
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| self.err(e.line, format!("field `{key}`: expected an integer, got `{}`", e.value))),
        }
    }

    fn opt_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" | "yes" | "1" => Ok(Some(true)),
                "false" | "no" | "0" => Ok(Some(false)),
                _ => Err(self.err(e.line, format!("field `{key}`: expected true or false, got `{}`", e.value))),
            },
        }
    }

    fn list_f64(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| self.err(e.line, format!("field `{key}`: expected comma-separated numbers"))),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((key, e)) = self.entries.iter().min_by_key(|(_, e)| e.line) {
            return Err(self.err(e.line, format!("unknown key `{key}` in [{}]", self.name)));
        }
        Ok(())
    }
}

fn split_sections<'a>(path: &'a str, text: &str) -> Result<Vec<Section<'a>>> {
    let mut sections: Vec<Section<'a>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config {
            path: path.to_string(),
            line,
            message,
        };
        if let Some(head) = content.strip_prefix('[') {
            let name = head
                .strip_suffix(']')
                .ok_or_else(|| err(format!("malformed section header `{content}`")))?
                .trim();
            let known = SECTIONS
                .iter()
                .find(|s| **s == name)
                .ok_or_else(|| err(format!("unknown section [{name}]")))?;
            if sections.iter().any(|s| s.name == *known) {
                return Err(err(format!("duplicate section [{name}]")));
            }
            sections.push(Section {
                path,
                name: known,
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(err("empty key".into()));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| err(format!("key `{key}` appears before any section")))?;
        let entry = Entry {
            value: value.to_string(),
            line,
        };
        if section.entries.insert(key.to_string(), entry).is_some() {
            return Err(err(format!("duplicate key `{key}` in [{}]", section.name)));
        }
    }
    Ok(sections)
}

fn take_section<'a>(sections: &mut Vec<Section<'a>>, path: &'a str, name: &'static str) -> Section<'a> {
    match sections.iter().position(|s| s.name == name) {
        Some(i) => sections.remove(i),
        None => Section {
            path,
            name,
            line: 0,
            entries: BTreeMap::new(),
        },
    }
}

fn parse_geometry(s: &mut Section<'_>) -> Result<ChartGeometry> {
    let (kind, line) = s.req_str("kind")?;
    let (lo, hi) = (s.req_f64("lo")?, s.req_f64("hi")?);
    let kind = match kind.as_str() {
        "interval" => {
            let weight = match s.opt_str("weight") {
                None => Weight::Unit,
                Some((w, _)) if w == "unit" => Weight::Unit,
                Some((w, _)) if w == "linear" => Weight::Linear { beta: s.req_f64("beta")? },
                Some((w, l)) => return Err(s.err(l, format!("field `weight`: unknown weight `{w}`"))),
            };
            GeometryKind::WeightedInterval { weight }
        }
        "band" => GeometryKind::SphericalBand,
        "revolution" => {
            let profile = match s.req_str("profile")? {
                (p, _) if p == "cylinder" => Profile::Cylinder,
                (p, _) if p == "sine" => Profile::Sine {
                    alpha: s.req_f64("alpha")?,
                    length: s.req_f64("length")?,
                },
                (p, l) => return Err(s.err(l, format!("field `profile`: unknown profile `{p}`"))),
            };
            GeometryKind::SurfaceOfRevolution { profile }
        }
        other => return Err(s.err(line, format!("field `kind`: unknown geometry `{other}`"))),
    };
    ChartGeometry::new(kind, lo, hi).map_err(|e| s.err(line, e.to_string()))
}

fn parse_flux(s: &mut Section<'_>) -> Result<FluxFamily> {
    let shape = match s.req_str("shape")? {
        (v, _) if v == "linear" => FluxShape::Linear,
        (v, _) if v == "burgers" => FluxShape::Burgers,
        (v, l) => return Err(s.err(l, format!("field `shape`: unknown flux shape `{v}`"))),
    };
    let a = match s.opt_str("a_type") {
        None => TimeProfile::Const { value: s.f64_or("a", 0.0)? },
        Some((v, _)) if v == "const" => TimeProfile::Const { value: s.f64_or("a", 0.0)? },
        Some((v, _)) if v == "sine" => TimeProfile::Sine {
            amplitude: s.req_f64("a")?,
            period: s.req_f64("a_period")?,
        },
        Some((v, l)) => return Err(s.err(l, format!("field `a_type`: unknown time profile `{v}`"))),
    };
    let c0 = s.f64_or("c0", 0.0)?;
    let c = match s.opt_f64("c1")? {
        Some(c1) => AzimuthalProfile::Linear { c0, c1 },
        None => AzimuthalProfile::Const { c0 },
    };
    Ok(FluxFamily::new(shape, a, c))
}

fn parse_initial(s: &mut Section<'_>, prefix: &str, base: &Path) -> Result<Option<InitialData>> {
    let key = |k: &str| format!("{prefix}{k}");
    let Some((profile, line)) = s.opt_str(&key("profile")) else {
        return Ok(None);
    };
    let data = match profile.as_str() {
        "constant" => InitialProfile::Constant {
            value: s.req_f64(&key("value"))?,
        },
        "step" => InitialProfile::Step {
            at: s.req_f64(&key("at"))?,
            left: s.req_f64(&key("left"))?,
            right: s.req_f64(&key("right"))?,
        },
        "bump" => {
            let center = match s.list_f64(&key("center"))? {
                Some(v) if v.len() == 1 => [v[0], 0.0],
                Some(v) if v.len() == 2 => [v[0], v[1]],
                _ => return Err(s.err(line, format!("field `{}`: expected one or two numbers", key("center")))),
            };
            InitialProfile::Bump {
                center,
                radius: s.req_f64(&key("radius"))?,
                amplitude: s.req_f64(&key("amplitude"))?,
            }
        }
        "sine" => InitialProfile::Sine {
            k: s.req_f64(&key("k"))?,
            amplitude: s.req_f64(&key("amplitude"))?,
        },
        "mode" => InitialProfile::Mode {
            k: s.req_f64(&key("k"))?,
            m: s.req_f64(&key("m"))?,
            amplitude: s.req_f64(&key("amplitude"))?,
        },
        "cosine" => InitialProfile::Cosine {
            amplitude: s.f64_or(&key("amplitude"), 1.0)?,
        },
        "csv" => {
            let (p, _) = s.req_str(&key("path"))?;
            let p = PathBuf::from(p);
            let path = if p.is_absolute() { p } else { base.join(p) };
            return Ok(Some(InitialData::Csv { path }));
        }
        other => return Err(s.err(line, format!("field `{}`: unknown profile `{other}`", key("profile")))),
    };
    Ok(Some(InitialData::Profile(data)))
}

fn parse_oracle(s: &mut Section<'_>) -> Result<Option<OracleSpec>> {
    Ok(match s.opt_str("oracle") {
        None => None,
        Some((v, l)) => match v.as_str() {
            "none" => None,
            "characteristic" => Some(OracleSpec::Characteristic),
            "shock-exit" => Some(OracleSpec::Burgers(BurgersCase::ShockExit)),
            "boundary-rarefaction" => Some(OracleSpec::Burgers(BurgersCase::BoundaryRarefaction)),
            "reference" => Some(OracleSpec::Reference),
            other => return Err(s.err(l, format!("field `oracle`: unknown oracle `{other}`"))),
        },
    })
}

/// Parse scenario text; `path` is used for diagnostics and relative CSV paths.
pub fn parse_config(path: &Path, text: &str) -> Result<RunConfig> {
    let shown = path.display().to_string();
    let base = path.parent().unwrap_or(Path::new("."));
    let mut sections = split_sections(&shown, text)?;

    let mut geo = take_section(&mut sections, &shown, "geometry");
    let geometry = parse_geometry(&mut geo)?;
    geo.finish()?;

    let mut fl = take_section(&mut sections, &shown, "flux");
    let flux = parse_flux(&mut fl)?;
    fl.finish()?;

    let mut ini = take_section(&mut sections, &shown, "initial");
    let ini_line = ini.line;
    let initial = parse_initial(&mut ini, "", base)?
        .ok_or_else(|| ini.err(ini_line, "[initial] is missing field `profile`".into()))?;
    let pair = parse_initial(&mut ini, "pair_", base)?;
    ini.finish()?;

    let mut sol = take_section(&mut sections, &shown, "solver");
    let horizon = sol.req_f64("horizon")?;
    let res_line = sol.entries.get("resolution").map_or(sol.line, |e| e.line);
    let resolution = match sol.opt_str("resolution") {
        None => return Err(sol.err(sol.line, "[solver] is missing field `resolution`".into())),
        Some((v, _)) => v
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| sol.err(res_line, format!("field `resolution`: expected integers, got `{v}`")))?,
    };
    let cfl = sol.f64_or("cfl", 0.45)?;
    let epsilon = sol.f64_or("epsilon", 0.0)?;
    let mollifier = MollifierSpec {
        truncation: sol.f64_or("truncation", MollifierSpec::default().truncation)?,
    };
    let defaults = EntropySettings::default();
    let entropy = EntropySettings {
        kruzkov_levels: sol.opt_usize("kruzkov_levels")?.unwrap_or(defaults.kruzkov_levels),
        boundary_samples: sol.opt_usize("boundary_samples")?.unwrap_or(defaults.boundary_samples),
        cell_check: sol.opt_bool("cell_check")?.unwrap_or(defaults.cell_check),
    };
    sol.finish()?;

    let mut out = take_section(&mut sections, &shown, "output");
    let cadence = out.f64_or("cadence", horizon / 4.0)?;
    let snapshots = out.opt_bool("snapshots")?.unwrap_or(true);
    let oracle = parse_oracle(&mut out)?;
    let name = match out.opt_str("name") {
        Some((n, _)) => n,
        None => path
            .file_stem()
            .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned()),
    };
    let out_line = out.line;
    out.finish()?;

    let scenario = Scenario {
        geometry,
        flux,
        initial,
        horizon,
        resolution,
        cfl,
        epsilon,
        mollifier,
        output: OutputSpec { cadence, snapshots },
        entropy,
    };
    scenario.validate().map_err(|e| Error::Config {
        path: shown.clone(),
        line: out_line.max(1),
        message: e.to_string(),
    })?;
    Ok(RunConfig {
        name,
        scenario,
        pair,
        oracle,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    parse_config(path, &text)
}
