use clap::ValueEnum;
use gfic_dpanel::{standard_candidates, FitOptions, Target};
use gfic_engine::Criterion;
use gfic_mc::named::{refe_layout, table1_layout, NamedDesign};
use serde::Serialize;

use crate::output::csv_text;
use crate::select::{score, SelectReport};
use crate::simulate::simulate;
use crate::{CliError, Format, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Replication {
    Table1,
    Cigarettes,
    Refe,
}

/// The two windows of the cigarette table.
pub const CIGARETTE_WINDOWS: [(i64, i64); 2] = [(1975, 1980), (1975, 1985)];

#[derive(Debug, Serialize)]
pub struct CigaretteWindow {
    pub window: String,
    pub report: SelectReport,
    pub selected_gfic_plus: String,
}

pub fn cigarettes(cfg: &RunConfig) -> Result<Vec<CigaretteWindow>, CliError> {
    if cfg.data.is_none() {
        return Err(CliError::MissingDataset);
    }
    let windows = match cfg.window {
        Some(w) => vec![w],
        None => CIGARETTE_WINDOWS.to_vec(),
    };
    let opts = FitOptions {
        period_dummies: true,
    };
    let cands = standard_candidates(1, 0);
    let mut out = Vec::new();
    for (a, b) in windows {
        let mut c = cfg.clone();
        c.window = Some((a, b));
        let p = crate::input::load(&c)?;
        let report = score(&p, &cands, Target::ShortRun, Criterion::Gfic, opts)?;
        let plus = score(&p, &cands, Target::ShortRun, Criterion::GficPlus, opts)?;
        out.push(CigaretteWindow {
            window: format!("{a}:{b}"),
            report,
            selected_gfic_plus: plus.selected,
        });
    }
    Ok(out)
}

/// Rows `theta`, `var`, `bias2`, `gfic`, `gfic+` and the two selections,
/// one column per specification; the valid specification has no squared
/// bias entry.
pub fn cigarette_layout(ws: &[CigaretteWindow]) -> Result<String, CliError> {
    let labels = ["LP", "LS", "P", "S"];
    let mut rows = Vec::new();
    for w in ws {
        let get = |l: &str| w.report.candidates.iter().find(|c| c.candidate == l);
        let line = |name: &str, f: &dyn Fn(&crate::select::CandidateRow) -> String| {
            let mut r = vec![w.window.clone(), name.to_string()];
            r.extend(labels.iter().map(|l| get(l).map(f).unwrap_or_default()));
            r
        };
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_default();
        rows.push(line("theta", &|c| fmt(c.mu_hat)));
        rows.push(line("var", &|c| fmt(c.avar)));
        rows.push(line("bias2", &|c| {
            if c.valid {
                "---".into()
            } else {
                fmt(c.sq_bias)
            }
        }));
        rows.push(line("gfic", &|c| fmt(c.gfic)));
        rows.push(line("gfic+", &|c| fmt(c.gfic_plus)));
        rows.push(line("selected gfic", &|c| {
            if c.candidate == w.report.selected {
                "*".into()
            } else {
                String::new()
            }
        }));
        rows.push(line("selected gfic+", &|c| {
            if c.candidate == w.selected_gfic_plus {
                "*".into()
            } else {
                String::new()
            }
        }));
    }
    csv_text(&["window", "row", "LP", "LS", "P", "S"], &rows)
}

pub fn run(cfg: &RunConfig, what: Replication) -> Result<String, CliError> {
    match what {
        Replication::Cigarettes => {
            let ws = cigarettes(cfg)?;
            match cfg.format {
                Format::Json => Ok(serde_json::to_string_pretty(&ws)? + "\n"),
                Format::Csv => cigarette_layout(&ws),
            }
        }
        Replication::Table1 | Replication::Refe => {
            let design = if what == Replication::Table1 {
                NamedDesign::Table1
            } else {
                NamedDesign::Refe
            };
            let r = simulate(cfg, design)?;
            match cfg.format {
                Format::Json => Ok(r.to_json()? + "\n"),
                Format::Csv if what == Replication::Table1 => Ok(table1_layout(&r)?),
                Format::Csv => Ok(refe_layout(&r)?),
            }
        }
    }
}
