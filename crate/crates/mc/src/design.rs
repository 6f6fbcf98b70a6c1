use std::collections::BTreeMap;
use std::io::Write;

use gfic_numerics::rng::{substream, StreamRng};
use gfic_numerics::stats::{mean, mean_se};
use rayon::prelude::*;
use serde::Serialize;

use crate::{loss_metrics, LossValue, McError, Metric};

/// One estimate produced in a replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcEstimate {
    pub procedure: String,
    pub estimate: f64,
    pub truth: f64,
}

impl ProcEstimate {
    pub fn new(procedure: impl Into<String>, estimate: f64, truth: f64) -> Self {
        ProcEstimate {
            procedure: procedure.into(),
            estimate,
            truth,
        }
    }
}

/// Everything a replication reports: estimates and, for selection
/// procedures, the label each one chose.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RepOutput {
    pub estimates: Vec<ProcEstimate>,
    /// `(selector, choice)`.
    pub choices: Vec<(String, String)>,
}

/// A grid of cells sharing a replication function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McDesign {
    pub name: String,
    pub seed: u64,
    pub reps: usize,
    pub metrics: Vec<Metric>,
    /// Named parameter values for each cell, in grid order.
    pub cells: Vec<BTreeMap<String, f64>>,
    /// Keep every replication's estimates in the result.
    pub keep_raw: bool,
}

impl McDesign {
    pub fn validate(&self) -> Result<(), McError> {
        if self.reps == 0 {
            return Err(McError::InvalidDesign("reps must be at least 1".into()));
        }
        if self.cells.is_empty() {
            return Err(McError::InvalidDesign("the grid has no cells".into()));
        }
        for cell in &self.cells {
            if let Some((k, v)) = cell.iter().find(|(_, v)| !v.is_finite()) {
                return Err(McError::InvalidDesign(format!(
                    "grid value {k} = {v} is not finite"
                )));
            }
        }
        for m in &self.metrics {
            if let Metric::TrimmedMse { m } = m {
                if m.is_nan() || *m <= 0.0 {
                    return Err(McError::InvalidDesign(format!(
                        "trimming constant must be positive, got {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn cell_label(&self, g: usize) -> String {
        self.cells[g]
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcedureSummary {
    pub procedure: String,
    pub reps: usize,
    pub mean_error: f64,
    pub mean_error_se: f64,
    pub losses: Vec<LossValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionFreq {
    pub selector: String,
    pub choice: String,
    pub freq: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub index: usize,
    pub label: String,
    pub params: BTreeMap<String, f64>,
    pub reps_ok: usize,
    pub reps_failed: usize,
    /// The first few failure messages, in replication order.
    pub failure_examples: Vec<String>,
    pub procedures: Vec<ProcedureSummary>,
    pub selections: Vec<SelectionFreq>,
}

impl CellResult {
    pub fn procedure(&self, name: &str) -> Option<&ProcedureSummary> {
        self.procedures.iter().find(|p| p.procedure == name)
    }

    pub fn loss(&self, procedure: &str, metric: Metric) -> Option<&LossValue> {
        self.procedure(procedure)?
            .losses
            .iter()
            .find(|l| l.metric == metric)
    }

    pub fn freq(&self, selector: &str, choice: &str) -> f64 {
        self.selections
            .iter()
            .find(|s| s.selector == selector && s.choice == choice)
            .map_or(0.0, |s| s.freq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub design: McDesign,
    pub cells: Vec<CellResult>,
}

const FAILURE_EXAMPLES: usize = 3;

fn summarize(
    design: &McDesign,
    g: usize,
    outs: Vec<Result<RepOutput, String>>,
) -> Result<CellResult, McError> {
    let mut est: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut sel: Vec<(String, Vec<(String, usize)>)> = Vec::new();
    let (mut ok, mut failed, mut examples) = (0, 0, Vec::new());
    for out in outs {
        let out = match out {
            Ok(o) => o,
            Err(e) => {
                failed += 1;
                if examples.len() < FAILURE_EXAMPLES {
                    examples.push(e);
                }
                continue;
            }
        };
        ok += 1;
        for pe in out.estimates {
            let slot = match est.iter().position(|(p, _, _)| *p == pe.procedure) {
                Some(i) => i,
                None => {
                    est.push((pe.procedure.clone(), Vec::new(), Vec::new()));
                    est.len() - 1
                }
            };
            est[slot].1.push(pe.estimate - pe.truth);
            est[slot].2.push(pe.estimate);
        }
        for (selector, choice) in out.choices {
            let slot = match sel.iter().position(|(s, _)| *s == selector) {
                Some(i) => i,
                None => {
                    sel.push((selector.clone(), Vec::new()));
                    sel.len() - 1
                }
            };
            let counts = &mut sel[slot].1;
            match counts.iter_mut().find(|(c, _)| *c == choice) {
                Some(c) => c.1 += 1,
                None => counts.push((choice, 1)),
            }
        }
    }
    let mut procedures = Vec::new();
    for (procedure, errors, estimates) in est {
        let losses = loss_metrics(&errors, &estimates, &design.metrics)?;
        procedures.push(ProcedureSummary {
            procedure,
            reps: errors.len(),
            mean_error: mean(&errors),
            mean_error_se: mean_se(&errors),
            losses,
            raw: design.keep_raw.then_some(estimates),
        });
    }
    let mut selections = Vec::new();
    for (selector, counts) in sel {
        let total: usize = counts.iter().map(|c| c.1).sum();
        for (choice, c) in counts {
            let freq = c as f64 / total as f64;
            selections.push(SelectionFreq {
                selector: selector.clone(),
                choice,
                freq,
                mc_se: (freq * (1.0 - freq) / total as f64).sqrt(),
            });
        }
    }
    Ok(CellResult {
        index: g,
        label: design.cell_label(g),
        params: design.cells[g].clone(),
        reps_ok: ok,
        reps_failed: failed,
        failure_examples: examples,
        procedures,
        selections,
    })
}

/// Run every cell of `design`; replication `r` of cell `g` receives the
/// stream `(seed, g, r)`. `sink` sees each cell as soon as it is done.
pub fn run_design_with<F>(
    design: &McDesign,
    rep: F,
    sink: &mut dyn FnMut(&CellResult),
) -> Result<McResult, McError>
where
    F: Fn(usize, &mut StreamRng) -> Result<RepOutput, String> + Sync,
{
    design.validate()?;
    let mut cells = Vec::with_capacity(design.cells.len());
    for g in 0..design.cells.len() {
        let outs: Vec<Result<RepOutput, String>> = (0..design.reps)
            .into_par_iter()
            .map(|r| rep(g, &mut substream(design.seed, &[g as u64, r as u64])))
            .collect();
        let cell = summarize(design, g, outs)?;
        sink(&cell);
        cells.push(cell);
    }
    Ok(McResult {
        design: design.clone(),
        cells,
    })
}

pub fn run_design<F>(design: &McDesign, rep: F) -> Result<McResult, McError>
where
    F: Fn(usize, &mut StreamRng) -> Result<RepOutput, String> + Sync,
{
    run_design_with(design, rep, &mut |_| {})
}

fn num(v: f64) -> String {
    format!("{v}")
}

impl McResult {
    pub fn cell(&self, params: &[(&str, f64)]) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            params
                .iter()
                .all(|(k, v)| c.params.get(*k).is_some_and(|x| (x - v).abs() < 1e-12))
        })
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .cells
            .iter()
            .flat_map(|c| c.params.keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Long format: one row per cell, procedure and metric. Mean errors are
    /// reported as metric `mean-error`; selection frequencies as
    /// `select:<choice>` rows under the selector's name.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), McError> {
        let names = self.param_names();
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["design".to_string(), "cell".to_string()];
        header.extend(names.iter().cloned());
        header.extend(
            [
                "procedure",
                "metric",
                "value",
                "mc_se",
                "reps_ok",
                "reps_failed",
                "discarded",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        wr.write_record(&header)?;
        for c in &self.cells {
            let lead = |rec: &mut Vec<String>| {
                rec.push(self.design.name.clone());
                rec.push(c.index.to_string());
                for n in &names {
                    rec.push(c.params.get(n).map(|v| num(*v)).unwrap_or_default());
                }
            };
            let tail = [c.reps_ok.to_string(), c.reps_failed.to_string()];
            for p in &c.procedures {
                let mut rec = Vec::new();
                lead(&mut rec);
                rec.extend([
                    p.procedure.clone(),
                    "mean-error".into(),
                    num(p.mean_error),
                    num(p.mean_error_se),
                ]);
                rec.extend(tail.iter().cloned());
                rec.push("0".into());
                wr.write_record(&rec)?;
                for l in &p.losses {
                    let mut rec = Vec::new();
                    lead(&mut rec);
                    rec.extend([
                        p.procedure.clone(),
                        l.metric.to_string(),
                        num(l.value),
                        num(l.mc_se),
                    ]);
                    rec.extend(tail.iter().cloned());
                    rec.push(l.discarded.to_string());
                    wr.write_record(&rec)?;
                }
            }
            for s in &c.selections {
                let mut rec = Vec::new();
                lead(&mut rec);
                rec.extend([
                    s.selector.clone(),
                    format!("select:{}", s.choice),
                    num(s.freq),
                    num(s.mc_se),
                ]);
                rec.extend(tail.iter().cloned());
                rec.push("0".into());
                wr.write_record(&rec)?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, McError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String, McError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Wide layout: one row per cell, a value and an MC-SE column per
    /// procedure for a single metric.
    pub fn wide_table(
        &self,
        param_cols: &[&str],
        procedures: &[&str],
        metric: Metric,
    ) -> Result<String, McError> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = param_cols.iter().map(|s| s.to_string()).collect();
        for p in procedures {
            header.push(p.to_string());
            header.push(format!("{p} se"));
        }
        header.push("failed".into());
        wr.write_record(&header)?;
        for c in &self.cells {
            let mut rec: Vec<String> = param_cols
                .iter()
                .map(|k| c.params.get(*k).map(|v| num(*v)).unwrap_or_default())
                .collect();
            for p in procedures {
                match c.loss(p, metric) {
                    Some(l) => {
                        rec.push(format!("{:.3}", l.value));
                        rec.push(format!("{:.3}", l.mc_se));
                    }
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            rec.push(c.reps_failed.to_string());
            wr.write_record(&rec)?;
        }
        let bytes = wr.into_inner().map_err(|e| McError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
