//! The named studies: `table1` (short-run versus long-run with a fixed
//! instrument set), `lag-exog` (lag and exogeneity selection against the
//! J-test and MMSC competitors), `refe` (random versus fixed effects) and
//! `slopehet` (pooled OLS versus mean group).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use gfic_alt::{downward_select, j_statistic, mmsc_select, MmscFlavor};
use gfic_classic::{
    refe_average, refe_fit, refe_select, slopehet_fit, slopehet_select, ReFeChoice, SlopeHetChoice,
};
use gfic_dpanel::{fixed_instrument_gfic, gfic_dpanel, standard_candidates, FitOptions, Target};
use gfic_engine::Criterion;
use gfic_numerics::rng::StreamRng;
use serde::{Deserialize, Serialize};

use crate::{
    draw_dpanel, draw_refe, draw_slopehet, run_design_with, CellResult, DpanelDgp, McDesign,
    McError, McResult, Metric, ProcEstimate, ReFeDgp, RepOutput, SlopeHetDgp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedDesign {
    Table1,
    LagExog,
    Refe,
    SlopeHet,
}

impl NamedDesign {
    pub const ALL: [NamedDesign; 4] = [
        NamedDesign::Table1,
        NamedDesign::LagExog,
        NamedDesign::Refe,
        NamedDesign::SlopeHet,
    ];
}

impl fmt::Display for NamedDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamedDesign::Table1 => "table1",
            NamedDesign::LagExog => "lag-exog",
            NamedDesign::Refe => "refe",
            NamedDesign::SlopeHet => "slopehet",
        })
    }
}

impl FromStr for NamedDesign {
    type Err = McError;

    fn from_str(s: &str) -> Result<Self, McError> {
        NamedDesign::ALL
            .into_iter()
            .find(|d| d.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| McError::UnknownDesign(s.to_string()))
    }
}

/// Settings a caller may override on any named design.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub t: Option<usize>,
    /// Replace the default metrics.
    pub metrics: Option<Vec<Metric>>,
    pub keep_raw: Option<bool>,
}

/// Run a named design with its defaults, adjusted by `o`.
pub fn run_named(
    which: NamedDesign,
    o: &Overrides,
    sink: &mut dyn FnMut(&CellResult),
) -> Result<McResult, McError> {
    match which {
        NamedDesign::Table1 => Table1::default().apply(o).run(sink),
        NamedDesign::LagExog => LagExog::default().apply(o).run(sink),
        NamedDesign::Refe => Refe::default().apply(o).run(sink),
        NamedDesign::SlopeHet => SlopeHet::default().apply(o).run(sink),
    }
}

fn grid(name: &str, values: &[f64]) -> Vec<BTreeMap<String, f64>> {
    values
        .iter()
        .map(|v| BTreeMap::from([(name.to_string(), *v)]))
        .collect()
}

fn grid2(a: &str, av: &[f64], b: &str, bv: &[f64]) -> Vec<BTreeMap<String, f64>> {
    av.iter()
        .flat_map(|x| {
            bv.iter()
                .map(move |y| BTreeMap::from([(a.to_string(), *x), (b.to_string(), *y)]))
        })
        .collect()
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

macro_rules! apply_common {
    ($self:ident, $o:ident) => {{
        if let Some(v) = $o.reps {
            $self.reps = v;
        }
        if let Some(v) = $o.seed {
            $self.seed = v;
        }
        if let Some(v) = $o.n {
            $self.n = v;
        }
        if let Some(v) = $o.t {
            $self.t = v;
        }
        if let Some(v) = &$o.metrics {
            $self.metrics = v.clone();
        }
        if let Some(v) = $o.keep_raw {
            $self.keep_raw = v;
        }
        $self
    }};
}

/// Short-run versus long-run effects with two true lags, choosing between
/// the two-lag model (`L2`) and the one-lag model (`L1`), both estimated on
/// the two-lag predetermined instruments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: Vec<f64>,
    pub sigma_x_eta: f64,
    pub sigma_xv: f64,
    pub reps: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub keep_raw: bool,
}

impl Default for Table1 {
    fn default() -> Self {
        Table1 {
            n: 250,
            t: 5,
            theta: 0.5,
            gamma1: 0.4,
            gamma2: (10..=20).map(|g| g as f64 / 100.0).collect(),
            sigma_x_eta: 0.2,
            sigma_xv: 0.1,
            reps: 1000,
            seed: 42,
            metrics: vec![Metric::Mad],
            keep_raw: false,
        }
    }
}

pub const TABLE1_PROCEDURES: [&str; 6] = ["SR L2", "SR L1", "SR GFIC", "LR L2", "LR L1", "LR GFIC"];

impl Table1 {
    pub fn apply(mut self, o: &Overrides) -> Self {
        apply_common!(self, o)
    }

    pub fn design(&self) -> McDesign {
        McDesign {
            name: "table1".into(),
            seed: self.seed,
            reps: self.reps,
            metrics: self.metrics.clone(),
            cells: grid("gamma2", &self.gamma2),
            keep_raw: self.keep_raw,
        }
    }

    pub fn dgp(&self, gamma2: f64) -> DpanelDgp {
        DpanelDgp {
            theta: self.theta,
            gamma: vec![self.gamma1, gamma2],
            sigma_x_eta: self.sigma_x_eta,
            sigma_xv: self.sigma_xv,
            t: self.t,
            n: self.n,
        }
    }

    pub fn rep(&self, g: usize, rng: &mut StreamRng) -> Result<RepOutput, String> {
        let dgp = self.dgp(self.gamma2[g]);
        let p = draw_dpanel(&dgp, rng).map_err(err)?;
        let mut out = RepOutput::default();
        for (target, tag, truth) in [
            (Target::ShortRun, "SR", dgp.short_run()),
            (Target::LongRun, "LR", dgp.long_run()),
        ] {
            let f = fixed_instrument_gfic(&p, 2, 1, target, Criterion::Gfic, FitOptions::default())
                .map_err(err)?;
            out.estimates
                .push(ProcEstimate::new(format!("{tag} L2"), f.mu_full, truth));
            out.estimates.push(ProcEstimate::new(
                format!("{tag} L1"),
                f.mu_restricted,
                truth,
            ));
            out.estimates.push(ProcEstimate::new(
                format!("{tag} GFIC"),
                f.mu_selected(),
                truth,
            ));
            let choice = if f.selected == 0 { "L2" } else { "L1" };
            out.choices.push((format!("{tag} GFIC"), choice.into()));
        }
        Ok(out)
    }

    pub fn run(&self, sink: &mut dyn FnMut(&CellResult)) -> Result<McResult, McError> {
        for g in &self.gamma2 {
            self.dgp(*g).validate()?;
        }
        run_design_with(&self.design(), |g, rng| self.rep(g, rng), sink)
    }
}

/// MAD of each estimator by `γ₂`, short-run then long-run.
pub fn table1_layout(r: &McResult) -> Result<String, McError> {
    r.wide_table(&["gamma2"], &TABLE1_PROCEDURES, Metric::Mad)
}

/// One true lag; candidates `LP`, `LS`, `P`, `S` for the short-run effect,
/// chosen by GFIC, GFIC+, the three MMSC flavors and downward J tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagExog {
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub sigma_x_eta: f64,
    pub gamma: Vec<f64>,
    pub sigma_xv: Vec<f64>,
    pub j_alphas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub keep_raw: bool,
}

impl Default for LagExog {
    fn default() -> Self {
        let coarse = vec![0.0, 0.05, 0.10, 0.15, 0.20];
        LagExog {
            n: 500,
            t: 5,
            theta: 0.5,
            sigma_x_eta: 0.2,
            gamma: coarse.clone(),
            sigma_xv: coarse,
            j_alphas: vec![0.05, 0.10],
            reps: 2000,
            seed: 42,
            metrics: vec![Metric::Rmse],
            keep_raw: false,
        }
    }
}

impl LagExog {
    pub fn apply(mut self, o: &Overrides) -> Self {
        apply_common!(self, o)
    }

    /// The full fine grid in steps of 0.005.
    pub fn fine(mut self) -> Self {
        let fine: Vec<f64> = (0..=40).map(|i| i as f64 * 0.005).collect();
        self.gamma = fine.clone();
        self.sigma_xv = fine;
        self
    }

    pub fn design(&self) -> McDesign {
        McDesign {
            name: "lag-exog".into(),
            seed: self.seed,
            reps: self.reps,
            metrics: self.metrics.clone(),
            cells: grid2("gamma", &self.gamma, "sigma_xv", &self.sigma_xv),
            keep_raw: self.keep_raw,
        }
    }

    pub fn dgp(&self, g: usize) -> DpanelDgp {
        let (gi, si) = (g / self.sigma_xv.len(), g % self.sigma_xv.len());
        DpanelDgp {
            theta: self.theta,
            gamma: vec![self.gamma[gi]],
            sigma_x_eta: self.sigma_x_eta,
            sigma_xv: self.sigma_xv[si],
            t: self.t,
            n: self.n,
        }
    }

    pub fn procedures(&self) -> Vec<String> {
        let mut p: Vec<String> = ["LP", "LS", "P", "S", "GFIC", "GFIC+"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        p.extend(MmscFlavor::ALL.iter().map(|f| f.to_string().to_uppercase()));
        p.extend(self.j_alphas.iter().map(|a| format!("J-{a}")));
        p
    }

    /// Every selector reports the TSLS estimate of the specification it
    /// picks, so selectors differ only in their choices.
    pub fn rep(&self, g: usize, rng: &mut StreamRng) -> Result<RepOutput, String> {
        let dgp = self.dgp(g);
        let p = draw_dpanel(&dgp, rng).map_err(err)?;
        let opts = FitOptions::default();
        let cands = standard_candidates(1, 0);
        let fit = gfic_dpanel(&p, &cands, Target::ShortRun, 1, opts).map_err(err)?;
        if let Some((spec, e)) = fit.failures.first() {
            return Err(format!("{}: {e}", spec.label));
        }
        let truth = dgp.short_run();
        let mu: Vec<f64> = fit.candidates.iter().map(|c| c.mu_hat).collect();
        let label = |i: usize| cands[i].label.clone();
        let mut out = RepOutput::default();
        for (i, m) in mu.iter().enumerate() {
            out.estimates.push(ProcEstimate::new(label(i), *m, truth));
        }
        let mut pick = |name: String, i: usize| {
            out.estimates
                .push(ProcEstimate::new(name.clone(), mu[i], truth));
            out.choices.push((name, label(i)));
        };
        pick("GFIC".into(), fit.select(Criterion::Gfic).map_err(err)?);
        pick(
            "GFIC+".into(),
            fit.select(Criterion::GficPlus).map_err(err)?,
        );

        let js = cands
            .iter()
            .map(|c| j_statistic(&p, c, opts))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        for f in MmscFlavor::ALL {
            pick(
                f.to_string().to_uppercase(),
                mmsc_select(&js, p.n(), f).map_err(err)?,
            );
        }
        // most restrictive first: S, P, LS, LP
        let order = [3, 2, 1, 0];
        let pv: Vec<Option<f64>> = order.iter().map(|&i| Some(js[i].p_value)).collect();
        for a in &self.j_alphas {
            let k = downward_select(&pv, *a).expect("four candidates");
            pick(format!("J-{a}"), order[k]);
        }
        Ok(out)
    }

    pub fn run(&self, sink: &mut dyn FnMut(&CellResult)) -> Result<McResult, McError> {
        for g in 0..self.gamma.len() * self.sigma_xv.len() {
            self.dgp(g).validate()?;
        }
        run_design_with(&self.design(), |g, rng| self.rep(g, rng), sink)
    }
}

/// Largest value of `metric` for `procedure` over all cells.
pub fn worst_case(r: &McResult, procedure: &str, metric: Metric) -> Option<f64> {
    r.cells
        .iter()
        .map(|c| c.loss(procedure, metric).map(|l| l.value))
        .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))
}

/// Random versus fixed effects with equicorrelated `x` and `cov(x, α) = γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refe {
    pub n: usize,
    pub t: usize,
    pub beta: f64,
    pub sigma2_eps: f64,
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub keep_raw: bool,
}

impl Default for Refe {
    fn default() -> Self {
        Refe {
            n: 250,
            t: 2,
            beta: 0.5,
            sigma2_eps: 2.5,
            gamma: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            rho: vec![0.3, 0.5, 0.7],
            reps: 10_000,
            seed: 42,
            metrics: vec![Metric::Rmse],
            keep_raw: false,
        }
    }
}

pub const REFE_PROCEDURES: [&str; 4] = ["RE", "FE", "GFIC", "AVG"];

impl Refe {
    pub fn apply(mut self, o: &Overrides) -> Self {
        apply_common!(self, o)
    }

    pub fn design(&self) -> McDesign {
        McDesign {
            name: "refe".into(),
            seed: self.seed,
            reps: self.reps,
            metrics: self.metrics.clone(),
            cells: grid2("rho", &self.rho, "gamma", &self.gamma),
            keep_raw: self.keep_raw,
        }
    }

    pub fn dgp(&self, g: usize) -> ReFeDgp {
        let (ri, gi) = (g / self.gamma.len(), g % self.gamma.len());
        ReFeDgp {
            beta: self.beta,
            rho: self.rho[ri],
            gamma: self.gamma[gi],
            sigma2_eps: self.sigma2_eps,
            t: self.t,
            n: self.n,
        }
    }

    pub fn rep(&self, g: usize, rng: &mut StreamRng) -> Result<RepOutput, String> {
        let dgp = self.dgp(g);
        let p = draw_refe(&dgp, rng).map_err(err)?;
        let fit = refe_fit(&p).map_err(err)?;
        let choice = refe_select(&fit).map_err(err)?;
        let avg = refe_average(&fit).map_err(err)?;
        let b = dgp.beta;
        let (post, label) = match choice {
            ReFeChoice::Re => (fit.beta_re, "RE"),
            ReFeChoice::Fe => (fit.beta_fe, "FE"),
        };
        Ok(RepOutput {
            estimates: vec![
                ProcEstimate::new("RE", fit.beta_re, b),
                ProcEstimate::new("FE", fit.beta_fe, b),
                ProcEstimate::new("GFIC", post, b),
                ProcEstimate::new("AVG", avg.mu, b),
            ],
            choices: vec![("GFIC".into(), label.into())],
        })
    }

    pub fn run(&self, sink: &mut dyn FnMut(&CellResult)) -> Result<McResult, McError> {
        for g in 0..self.rho.len() * self.gamma.len() {
            self.dgp(g).validate()?;
        }
        run_design_with(&self.design(), |g, rng| self.rep(g, rng), sink)
    }
}

pub fn refe_layout(r: &McResult) -> Result<String, McError> {
    r.wide_table(&["rho", "gamma"], &REFE_PROCEDURES, Metric::Rmse)
}

/// Pooled OLS versus mean group under random slopes, over a grid of
/// `σ_η² / σ_ε²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeHet {
    pub n: usize,
    pub t: usize,
    pub beta: f64,
    pub sigma2_eps: f64,
    pub eta_ratio: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub keep_raw: bool,
}

impl Default for SlopeHet {
    fn default() -> Self {
        SlopeHet {
            n: 2000,
            t: 5,
            beta: 1.0,
            sigma2_eps: 1.0,
            eta_ratio: vec![1.0 / 12.0, 1.0 / 6.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0],
            reps: 1000,
            seed: 42,
            metrics: vec![Metric::Rmse],
            keep_raw: false,
        }
    }
}

impl SlopeHet {
    pub fn apply(mut self, o: &Overrides) -> Self {
        apply_common!(self, o)
    }

    pub fn design(&self) -> McDesign {
        McDesign {
            name: "slopehet".into(),
            seed: self.seed,
            reps: self.reps,
            metrics: self.metrics.clone(),
            cells: grid("eta_ratio", &self.eta_ratio),
            keep_raw: self.keep_raw,
        }
    }

    pub fn dgp(&self, g: usize) -> SlopeHetDgp {
        SlopeHetDgp {
            beta: self.beta,
            sigma2_eta: self.eta_ratio[g] * self.sigma2_eps,
            sigma2_eps: self.sigma2_eps,
            t: self.t,
            n: self.n,
        }
    }

    pub fn rep(&self, g: usize, rng: &mut StreamRng) -> Result<RepOutput, String> {
        let dgp = self.dgp(g);
        let p = draw_slopehet(&dgp, rng).map_err(err)?;
        let fit = slopehet_fit(&p).map_err(err)?;
        let (post, label) = match slopehet_select(&fit) {
            SlopeHetChoice::Ols => (fit.beta_ols, "OLS"),
            SlopeHetChoice::Mg => (fit.beta_mg, "MG"),
        };
        let b = dgp.beta;
        Ok(RepOutput {
            estimates: vec![
                ProcEstimate::new("OLS", fit.beta_ols, b),
                ProcEstimate::new("MG", fit.beta_mg, b),
                ProcEstimate::new("GFIC", post, b),
            ],
            choices: vec![("GFIC".into(), label.into())],
        })
    }

    pub fn run(&self, sink: &mut dyn FnMut(&CellResult)) -> Result<McResult, McError> {
        for g in 0..self.eta_ratio.len() {
            self.dgp(g).validate()?;
        }
        run_design_with(&self.design(), |g, rng| self.rep(g, rng), sink)
    }
}
