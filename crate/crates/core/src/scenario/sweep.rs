//! Parameter sweeps over one or two config keys.

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::config::{ScenarioConfig, SweepSpec};
use super::output::{format_number, write_csv};
use super::{evaluate, regime_name, Category, CliError, PointSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub point: PointSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Axis parameter names, in config order.
    pub params: Vec<String>,
    /// Row-major over the axes, first axis slowest.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn header(&self) -> Vec<String> {
        let mut h = self.params.clone();
        h.extend(
            [
                "lyapunov",
                "regime",
                "fitted_slope",
                "intercept",
                "relative_error",
                "status",
            ]
            .map(String::from),
        );
        h
    }

    pub fn records(&self) -> Vec<Vec<String>> {
        let cell = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| {
                let mut rec: Vec<String> = r.coords.iter().map(|&x| format_number(x)).collect();
                let p = &r.point;
                rec.push(cell(p.lyapunov));
                rec.push(p.regime.map(regime_name).unwrap_or_default().to_owned());
                rec.push(cell(p.fitted_slope));
                rec.push(cell(p.intercept));
                rec.push(cell(p.relative_error));
                rec.push(p.failure.map_or("ok", Category::name).to_owned());
                rec
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        write_csv(path, &self.header(), &self.records())
    }
}

pub(super) fn check_axes(spec: &SweepSpec) -> Result<Vec<Vec<f64>>, CliError> {
    if spec.axes.is_empty() || spec.axes.len() > 2 {
        return Err(CliError::new(
            Category::Precondition,
            format!("a sweep takes 1 or 2 axes, got {}", spec.axes.len()),
        ));
    }
    spec.axes
        .iter()
        .map(|a| a.grid().map_err(CliError::precondition))
        .collect()
}

fn set(raw: &mut toml::Table, path: &[String], value: f64) -> Result<(), CliError> {
    let mut table = raw;
    for key in &path[..path.len() - 1] {
        table = match table.get_mut(key) {
            Some(toml::Value::Table(t)) => t,
            _ => {
                return Err(CliError::new(
                    Category::Parse,
                    format!("sweep parameter `{}`: no table `{key}`", path.join(".")),
                ))
            }
        };
    }
    let last = &path[path.len() - 1];
    let integral = matches!(table.get(last), Some(toml::Value::Integer(_)))
        && value.fract() == 0.0
        && value.abs() < 9.0e15;
    let v = if integral {
        toml::Value::Integer(value as i64)
    } else {
        toml::Value::Float(value)
    };
    table.insert(last.clone(), v);
    Ok(())
}

fn point_config(raw: &toml::Table, paths: &[Vec<String>], coords: &[f64]) -> Result<ScenarioConfig, CliError> {
    let mut t = raw.clone();
    for (path, &v) in paths.iter().zip(coords) {
        set(&mut t, path, v)?;
    }
    ScenarioConfig::deserialize(toml::Value::Table(t))
        .map_err(|e| CliError::new(Category::Parse, e.to_string()))
}

/// Evaluates every grid point of `cfg.sweep` on a pool of `workers`
/// threads (0 means one per processor) and writes the table into `out_dir`.
///
/// Schema errors in the patched configs abort the sweep; precondition and
/// runtime failures are recorded in the point's status column.
pub fn run_sweep(
    raw: &toml::Table,
    cfg: &ScenarioConfig,
    workers: Option<usize>,
    out_dir: Option<&Path>,
) -> Result<SweepResult, CliError> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| {
        CliError::new(Category::Precondition, "the sweep verb needs a [sweep] table")
    })?;
    let grids = check_axes(spec)?;
    let paths: Vec<Vec<String>> = spec.axes.iter().map(|a| a.path()).collect();

    let mut coords: Vec<Vec<f64>> = vec![vec![]];
    for grid in &grids {
        coords = coords
            .iter()
            .flat_map(|c| {
                grid.iter().map(move |&v| {
                    let mut next = c.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    let configs = coords
        .iter()
        .map(|c| point_config(raw, &paths, c))
        .collect::<Result<Vec<_>, _>>()?;

    let threads = workers.unwrap_or(spec.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::new(Category::Io, format!("worker pool: {e}")))?;
    let points: Vec<PointSummary> = pool.install(|| {
        configs
            .par_iter()
            .map(|pc| {
                let failed = |category| PointSummary {
                    lyapunov: None,
                    regime: None,
                    fitted_slope: None,
                    intercept: None,
                    half_log_c20: None,
                    relative_error: None,
                    failure: Some(category),
                };
                let prepared = match pc.prepare() {
                    Ok(p) => p,
                    Err(_) => return failed(Category::Precondition),
                };
                match evaluate(pc, &prepared, false) {
                    Ok(eval) => eval.point,
                    Err(e) => failed(e.category),
                }
            })
            .collect()
    });

    let result = SweepResult {
        params: spec.axes.iter().map(|a| a.param.clone()).collect(),
        rows: coords
            .into_iter()
            .zip(points)
            .map(|(coords, point)| SweepRow { coords, point })
            .collect(),
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::new(Category::Io, format!("{}: {e}", dir.display())))?;
        result.write_csv(&dir.join(&cfg.output.table))?;
    }
    Ok(result)
}
