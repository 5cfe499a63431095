//! Run configuration: a TOML file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use homoclinic::chart::VerdictTolerances;
use homoclinic::model::Params;
use homoclinic::riccati::RiccatiOptions;
use serde::Deserialize;

use crate::CliError;

/// `a:b:n`, `n` points from `a` to `b` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.n - 1) as f64;
        let mut v: Vec<f64> = (0..self.n).map(|i| self.start + h * i as f64).collect();
        v[self.n - 1] = self.end;
        v
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("grid must look like a:b:n, got '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let end: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(start.is_finite() && end.is_finite()) || n == 0 {
            return Err(bad());
        }
        if n > 1 && end <= start {
            return Err(CliError::Usage(format!("grid '{s}' is not increasing")));
        }
        if n == 1 && end != start {
            return Err(CliError::Usage(format!("single-point grid '{s}' needs a = b")));
        }
        Ok(Grid { start, end, n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum ParamValue {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    rtol: Option<f64>,
    atol: Option<f64>,
    epsilon: Option<f64>,
    cap: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictSection {
    tol: Option<f64>,
    tangent: Option<f64>,
    q1_star: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    q: Option<String>,
    s: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    model: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, ParamValue>,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    verdict: VerdictSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    output: OutputSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))
    }
}

/// Values given on the command line; each one beats the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub model: Option<String>,
    pub params: Vec<String>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub epsilon: Option<f64>,
    pub cap: Option<f64>,
    pub tol: Option<f64>,
    pub tangent_tol: Option<f64>,
    pub q1_star: Option<f64>,
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: String,
    pub params: Params,
    pub solver: RiccatiOptions,
    pub tolerances: VerdictTolerances,
    pub q1_star: Option<f64>,
    pub q_grid: Option<Grid>,
    pub s_grid: Option<Grid>,
    pub out: Option<PathBuf>,
    /// `None` lets each command pick: tables for curves, objects for reports.
    pub format: Option<Format>,
}

/// `k=v` with `v` a comma-separated list of numbers.
pub fn parse_param(kv: &str) -> Result<(String, Vec<f64>), CliError> {
    let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("parameter '{kv}' is missing '=value'")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::Usage(format!("parameter '{kv}' has no name")));
    }
    let vals = v
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| CliError::Usage(format!("parameter '{kv}' needs numeric values")))?;
    if vals.is_empty() || vals.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!("parameter '{kv}' needs finite values")));
    }
    Ok((k.to_string(), vals))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

/// The `s` grid flag and the `q` grid flag share `--grid`; the command
/// decides which one it fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Q,
    S,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, o: &Overrides, grid_kind: GridKind) -> Result<Self, CliError> {
        let model = o
            .model
            .clone()
            .or(file.model)
            .ok_or_else(|| CliError::Usage("no model given (use --model or set model in the config)".into()))?;
        let mut params: Params = file
            .params
            .into_iter()
            .map(|(k, v)| match v {
                ParamValue::One(x) => (k, vec![x]),
                ParamValue::Many(xs) => (k, xs),
            })
            .collect();
        for kv in &o.params {
            let (k, v) = parse_param(kv)?;
            params.insert(k, v);
        }
        let d = RiccatiOptions::default();
        let mut solver = RiccatiOptions {
            rtol: positive("rtol", o.rtol.or(file.solver.rtol).unwrap_or(d.rtol))?,
            atol: positive("atol", o.atol.or(file.solver.atol).unwrap_or(d.atol))?,
            cap: positive("cap", o.cap.or(file.solver.cap).unwrap_or(d.cap))?,
            ..d
        };
        if let Some(e) = o.epsilon.or(file.solver.epsilon) {
            solver.epsilon = Some(positive("epsilon", e)?);
        }
        let dt = VerdictTolerances::default();
        let tolerances = VerdictTolerances {
            tol: positive("tol", o.tol.or(file.verdict.tol).unwrap_or(dt.tol))?,
            tangent: positive("tangent tolerance", o.tangent_tol.or(file.verdict.tangent).unwrap_or(dt.tangent))?,
        };
        if tolerances.tangent >= tolerances.tol {
            return Err(CliError::Usage("tangent tolerance must be below tol".into()));
        }
        let parse = |s: Option<String>| s.map(|s| s.parse::<Grid>()).transpose();
        let mut q_grid = parse(file.grid.q)?;
        let mut s_grid = parse(file.grid.s)?;
        if let Some(g) = &o.grid {
            let g = g.parse::<Grid>()?;
            match grid_kind {
                GridKind::Q => q_grid = Some(g),
                GridKind::S => s_grid = Some(g),
            }
        }
        Ok(RunConfig {
            model,
            params,
            solver,
            tolerances,
            q1_star: o.q1_star.or(file.verdict.q1_star),
            q_grid,
            s_grid,
            out: o.out.clone().or(file.output.out),
            format: o.format.or(file.output.format),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g: Grid = "0:4:5".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!("4:0:5".parse::<Grid>().is_err());
        assert!("0:4".parse::<Grid>().is_err());
        assert!("0:4:0".parse::<Grid>().is_err());
        assert_eq!("2:2:1".parse::<Grid>().unwrap().points(), vec![2.0]);
    }

    #[test]
    fn flags_beat_file() {
        let file = FileConfig::parse(
            "model = \"neumann\"\n[params]\nl1 = 1.0\nl2 = 3.0\n[solver]\nrtol = 1e-8\n[grid]\nq = \"0:2:3\"\n",
        )
        .unwrap();
        let o = Overrides { params: vec!["l2=2.5".into()], atol: Some(1e-13), ..Default::default() };
        let c = RunConfig::resolve(file, &o, GridKind::Q).unwrap();
        assert_eq!(c.params["l2"], vec![2.5]);
        assert_eq!(c.params["l1"], vec![1.0]);
        assert_eq!(c.solver.rtol, 1e-8);
        assert_eq!(c.solver.atol, 1e-13);
        assert_eq!(c.q_grid.unwrap().n, 3);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(FileConfig::parse("modle = \"x\"").is_err());
        let o = Overrides { model: Some("neumann".into()), rtol: Some(-1.0), ..Default::default() };
        assert!(RunConfig::resolve(FileConfig::default(), &o, GridKind::Q).is_err());
        assert!(RunConfig::resolve(FileConfig::default(), &Overrides::default(), GridKind::Q).is_err());
        assert!(parse_param("l1").is_err());
        assert!(parse_param("f=0.1,x").is_err());
        assert_eq!(parse_param("f=0.25,-0.125").unwrap().1, vec![0.25, -0.125]);
    }
}
