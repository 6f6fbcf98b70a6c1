use gfic_alt::{j_statistic, mmsc, MmscFlavor};
use gfic_dpanel::{gfic_dpanel, DpanelSpec, Exog, FitOptions, Target};
use gfic_engine::Criterion;
use gfic_panel::PanelDataset;
use serde::Serialize;

use crate::output::{csv_text, num};
use crate::{CliError, Format, RunConfig};

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRow {
    pub candidate: String,
    pub lag: usize,
    pub exog: String,
    /// `ok`, `infeasible: ...` or `failed: ...`.
    pub status: String,
    /// Differenced periods used in estimation.
    pub periods: Option<usize>,
    pub mu_hat: Option<f64>,
    pub avar: Option<f64>,
    pub sq_bias: Option<f64>,
    pub gfic: Option<f64>,
    pub gfic_plus: Option<f64>,
    pub j: Option<f64>,
    pub df: Option<usize>,
    pub p_value: Option<f64>,
    pub gmm_bic: Option<f64>,
    pub gmm_aic: Option<f64>,
    pub gmm_hq: Option<f64>,
    pub valid: bool,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectReport {
    pub n: usize,
    pub periods: usize,
    pub target: Target,
    pub criterion: Criterion,
    pub k: usize,
    pub r: usize,
    pub selected: String,
    pub candidates: Vec<CandidateRow>,
}

fn exog_name(e: Exog) -> String {
    match e {
        Exog::Predetermined => "predetermined".into(),
        Exog::Strict => "strict".into(),
    }
}

fn blank(spec: &DpanelSpec, status: String) -> CandidateRow {
    CandidateRow {
        candidate: spec.label.clone(),
        lag: spec.lag,
        exog: exog_name(spec.exog),
        status,
        periods: None,
        mu_hat: None,
        avar: None,
        sq_bias: None,
        gfic: None,
        gfic_plus: None,
        j: None,
        df: None,
        p_value: None,
        gmm_bic: None,
        gmm_aic: None,
        gmm_hq: None,
        valid: false,
        selected: false,
    }
}

/// Score `candidates` on `p`. Candidates that need more periods than the
/// panel has are reported as infeasible; the valid lag is the largest lag
/// among the rest.
pub fn score(
    p: &PanelDataset,
    candidates: &[DpanelSpec],
    target: Target,
    criterion: Criterion,
    opts: FitOptions,
) -> Result<SelectReport, CliError> {
    let tt = p.periods();
    let mut rows: Vec<CandidateRow> = Vec::new();
    let mut feasible = Vec::new();
    for spec in candidates {
        match spec.n_moments(tt) {
            Ok(_) => feasible.push(spec.clone()),
            Err(e) => rows.push(blank(spec, format!("infeasible: {e}"))),
        }
    }
    let k = feasible.iter().map(|s| s.lag).max().ok_or_else(|| {
        CliError::Data(format!("no candidate can be estimated with {tt} periods"))
    })?;
    let r = feasible.iter().map(|s| s.lag).min().unwrap_or(k);
    let g = gfic_dpanel(p, &feasible, target, k, opts)?;
    if g.candidates.is_empty() {
        let why: Vec<String> = g
            .failures
            .iter()
            .map(|(s, e)| format!("{}: {e}", s.label))
            .collect();
        return Err(CliError::Numeric(format!(
            "every candidate failed: {}",
            why.join("; ")
        )));
    }
    let best = g.select(criterion)?;
    let selected = g.candidates[best].spec().label.clone();
    for (i, c) in g.candidates.iter().enumerate() {
        let spec = c.spec();
        let mut row = blank(spec, "ok".into());
        row.periods = Some(c.fit.data.n_blocks);
        row.mu_hat = Some(c.mu_hat);
        row.avar = Some(c.score.avar);
        row.sq_bias = Some(c.score.sq_bias);
        row.gfic = Some(c.score.gfic);
        row.gfic_plus = Some(c.score.gfic_plus);
        row.valid = spec.lag == k && spec.exog == Exog::Predetermined;
        row.selected = i == best;
        match j_statistic(p, spec, opts) {
            Ok(j) => {
                row.j = Some(j.j_stat);
                row.df = Some(j.df);
                row.p_value = Some(j.p_value);
                let m = |f| mmsc(&j, p.n(), f).ok();
                row.gmm_bic = m(MmscFlavor::Bic);
                row.gmm_aic = m(MmscFlavor::Aic);
                row.gmm_hq = m(MmscFlavor::Hq);
            }
            Err(e) => row.status = format!("ok (J unavailable: {e})"),
        }
        rows.push(row);
    }
    for (spec, e) in &g.failures {
        rows.push(blank(spec, format!("failed: {e}")));
    }
    // report in the order the candidates were given
    rows.sort_by_key(|r| candidates.iter().position(|c| c.label == r.candidate));
    Ok(SelectReport {
        n: p.n(),
        periods: tt,
        target,
        criterion,
        k,
        r,
        selected,
        candidates: rows,
    })
}

pub fn render(report: &SelectReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Csv => {
            let header = [
                "candidate",
                "lag",
                "exog",
                "status",
                "periods",
                "mu_hat",
                "avar",
                "sq_bias",
                "gfic",
                "gfic_plus",
                "j",
                "df",
                "p_value",
                "gmm_bic",
                "gmm_aic",
                "gmm_hq",
                "valid",
                "selected",
            ];
            let rows: Vec<Vec<String>> = report
                .candidates
                .iter()
                .map(|r| {
                    vec![
                        r.candidate.clone(),
                        r.lag.to_string(),
                        r.exog.clone(),
                        r.status.clone(),
                        r.periods.map(|v| v.to_string()).unwrap_or_default(),
                        num(r.mu_hat),
                        num(r.avar),
                        num(r.sq_bias),
                        num(r.gfic),
                        num(r.gfic_plus),
                        num(r.j),
                        r.df.map(|v| v.to_string()).unwrap_or_default(),
                        num(r.p_value),
                        num(r.gmm_bic),
                        num(r.gmm_aic),
                        num(r.gmm_hq),
                        r.valid.to_string(),
                        r.selected.to_string(),
                    ]
                })
                .collect();
            csv_text(&header, &rows)
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let p = crate::input::load(cfg)?;
    let report = score(&p, &cfg.candidates, cfg.target, cfg.criterion, cfg.fit)?;
    render(&report, cfg.format)
}
