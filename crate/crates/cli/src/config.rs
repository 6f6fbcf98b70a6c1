use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gfic_dpanel::{parse_candidate, DpanelSpec, FitOptions, Target};
use gfic_engine::Criterion;
use gfic_inference::{RegionGrid, MIN_DRAWS};
use gfic_mc::named::{NamedDesign, Overrides};
use gfic_mc::Metric;
use gfic_panel::ColumnSchema;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
pub enum Method {
    #[value(name = "1step")]
    #[serde(rename = "1step")]
    OneStep,
    #[value(name = "2step")]
    #[serde(rename = "2step")]
    TwoStep,
    #[default]
    #[value(name = "both")]
    #[serde(rename = "both")]
    Both,
}

/// Every setting, as flags. All are optional here so that a config file can
/// fill the gaps; flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// JSON file with any of the settings below (kebab-case keys).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file, or `-` for standard output (the default).
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true, env = "GFIC_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Panel CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Inclusive period range `FROM:TO`.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub id_col: Option<String>,
    #[arg(long)]
    pub time_col: Option<String>,
    #[arg(long)]
    pub y_col: Option<String>,
    #[arg(long)]
    pub x_col: Option<String>,
    /// Control columns; by default every other column.
    #[arg(long, value_delimiter = ',')]
    pub controls: Option<Vec<String>>,
    /// Partial period dummies out of the differenced system.
    #[arg(long)]
    pub period_dummies: Option<bool>,
    /// Candidate labels: `LP,LS,P,S` relative to `--k/--r`, or `<lag><P|S>`.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Option<Vec<String>>,
    /// Lag order of the valid specification.
    #[arg(long)]
    pub k: Option<usize>,
    /// Lag order of the restricted specifications.
    #[arg(long)]
    pub r: Option<usize>,
    /// short-run or long-run.
    #[arg(long)]
    pub target: Option<String>,
    /// gfic or gfic-plus.
    #[arg(long)]
    pub criterion: Option<String>,

    /// Named design: table1, lag-exog, refe or slopehet.
    #[arg(long)]
    pub design: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Loss metrics: rmse, mad, trimmed-mse-<M>.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
    /// Use the fine 0.005-step grid (lag-exog only; long running).
    #[arg(long)]
    pub fine: Option<bool>,
    /// Keep every replication's estimates in the JSON output.
    #[arg(long)]
    pub raw: Option<bool>,

    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Monte Carlo draws for the limit distribution.
    #[arg(long)]
    pub draws: Option<usize>,
    /// `select` for post-selection weights, or a candidate label.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub grid_directions: Option<usize>,
    #[arg(long)]
    pub grid_shells: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    command: Option<String>,
    format: Option<Format>,
    out: Option<String>,
    threads: Option<usize>,
    seed: Option<u64>,
    data: Option<PathBuf>,
    window: Option<String>,
    id_col: Option<String>,
    time_col: Option<String>,
    y_col: Option<String>,
    x_col: Option<String>,
    controls: Option<Vec<String>>,
    period_dummies: Option<bool>,
    candidates: Option<Vec<String>>,
    k: Option<usize>,
    r: Option<usize>,
    target: Option<String>,
    criterion: Option<String>,
    design: Option<String>,
    reps: Option<usize>,
    n: Option<usize>,
    t: Option<usize>,
    metrics: Option<Vec<String>>,
    fine: Option<bool>,
    raw: Option<bool>,
    method: Option<Method>,
    alpha: Option<f64>,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    draws: Option<usize>,
    weights: Option<String>,
    grid_directions: Option<usize>,
    grid_shells: Option<usize>,
}

/// Fully validated settings for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: u64,
    pub data: Option<PathBuf>,
    pub window: Option<(i64, i64)>,
    pub schema: ColumnSchema,
    pub fit: FitOptions,
    pub candidates: Vec<DpanelSpec>,
    pub k: usize,
    pub target: Target,
    pub criterion: Criterion,
    pub design: Option<NamedDesign>,
    pub overrides: Overrides,
    pub fine: bool,
    pub method: Method,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub draws: usize,
    pub weights: String,
    pub grid: RegionGrid,
}

pub const DEFAULT_SEED: u64 = 42;

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_window(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || {
        cfg_err(format!(
            "window `{s}` must look like FROM:TO, e.g. 1975:1985"
        ))
    };
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (
        a.trim().parse::<i64>().map_err(|_| bad())?,
        b.trim().parse::<i64>().map_err(|_| bad())?,
    );
    if a > b {
        return Err(cfg_err(format!("window `{s}` is empty")));
    }
    Ok((a, b))
}

fn check_level(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(cfg_err(format!(
            "--{name} must lie strictly between 0 and 1, got {v}"
        )))
    }
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| cfg_err(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| cfg_err(format!("config file {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(command: &str, o: &Opts) -> Result<RunConfig, CliError> {
        let f = match &o.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        if let Some(c) = &f.command {
            if c != command {
                return Err(cfg_err(format!(
                    "config file is for `{c}` but the command is `{command}`"
                )));
            }
        }
        macro_rules! pick {
            ($field:ident) => {
                o.$field.clone().or_else(|| f.$field.clone())
            };
        }

        let threads = pick!(threads);
        if threads == Some(0) {
            return Err(cfg_err("--threads must be at least 1"));
        }
        let out = match pick!(out) {
            None => None,
            Some(s) if s == "-" => None,
            Some(s) => Some(PathBuf::from(s)),
        };
        let window = pick!(window).map(|w| parse_window(&w)).transpose()?;
        let defaults = ColumnSchema::default();
        let schema = ColumnSchema {
            id: pick!(id_col).unwrap_or(defaults.id),
            time: pick!(time_col).unwrap_or(defaults.time),
            y: pick!(y_col).unwrap_or(defaults.y),
            x: pick!(x_col).unwrap_or(defaults.x),
            controls: pick!(controls),
        };

        let k = pick!(k).unwrap_or(1);
        let r = pick!(r).unwrap_or(0);
        if r >= k {
            return Err(cfg_err(format!("--r ({r}) must be below --k ({k})")));
        }
        let labels =
            pick!(candidates).unwrap_or_else(|| ["LP", "LS", "P", "S"].map(String::from).to_vec());
        if labels.is_empty() {
            return Err(cfg_err("the candidate list is empty"));
        }
        let candidates = labels
            .iter()
            .map(|s| parse_candidate(s.trim(), k, r).map_err(|e| cfg_err(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let target = match pick!(target).as_deref() {
            None | Some("short-run") | Some("sr") => Target::ShortRun,
            Some("long-run") | Some("lr") => Target::LongRun,
            Some(other) => {
                return Err(cfg_err(format!(
                    "unknown target `{other}` (expected short-run or long-run)"
                )))
            }
        };
        let criterion = match pick!(criterion) {
            None => Criterion::Gfic,
            Some(c) => c.parse::<Criterion>().map_err(cfg_err)?,
        };

        let design = pick!(design)
            .map(|d| d.parse::<NamedDesign>())
            .transpose()?;
        let reps = pick!(reps);
        if reps == Some(0) {
            return Err(cfg_err("--reps must be at least 1"));
        }
        let metrics = pick!(metrics)
            .map(|ms| {
                ms.iter()
                    .map(|m| m.parse::<Metric>().map_err(cfg_err))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let seed = pick!(seed).unwrap_or(DEFAULT_SEED);
        let overrides = Overrides {
            reps,
            seed: Some(seed),
            n: pick!(n),
            t: pick!(t),
            metrics,
            keep_raw: pick!(raw),
        };

        let alpha = check_level("alpha", pick!(alpha).unwrap_or(0.10))?;
        let alpha1 = check_level("alpha1", pick!(alpha1).unwrap_or(0.05))?;
        let alpha2 = check_level("alpha2", pick!(alpha2).unwrap_or(0.05))?;
        let draws = pick!(draws).unwrap_or(10_000);
        if draws < MIN_DRAWS {
            return Err(cfg_err(format!(
                "--draws must be at least {MIN_DRAWS}, got {draws}"
            )));
        }
        let dg = RegionGrid::default();
        let grid = RegionGrid {
            directions: pick!(grid_directions).unwrap_or(dg.directions),
            shells: pick!(grid_shells).unwrap_or(dg.shells),
        };
        if grid.directions == 0 || grid.shells == 0 {
            return Err(cfg_err(
                "region grid needs at least one direction and one shell",
            ));
        }
        let weights = pick!(weights).unwrap_or_else(|| "select".into());
        if weights != "select" && !labels.iter().any(|l| l.trim() == weights) {
            return Err(cfg_err(format!(
                "--weights must be `select` or one of the candidates ({}), got `{weights}`",
                labels.join(",")
            )));
        }

        // configuration problems take precedence over a missing file
        let data = pick!(data);
        if let Some(d) = &data {
            if !d.is_file() {
                return Err(CliError::Data(format!(
                    "data file {} does not exist",
                    d.display()
                )));
            }
        }

        Ok(RunConfig {
            command: command.to_string(),
            format: pick!(format).unwrap_or_default(),
            out,
            threads,
            seed,
            data,
            window,
            schema,
            fit: FitOptions {
                period_dummies: pick!(period_dummies).unwrap_or(false),
            },
            candidates,
            k,
            target,
            criterion,
            design,
            overrides,
            fine: pick!(fine).unwrap_or(false),
            method: pick!(method).unwrap_or_default(),
            alpha,
            alpha1,
            alpha2,
            draws,
            weights,
            grid,
        })
    }
}
