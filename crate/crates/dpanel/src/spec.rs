use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::DpanelError;

/// How the regressor `x` is treated when building instruments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exog {
    /// Uncorrelated with current and future errors: instruments stop at `x_{t-1}`.
    Predetermined,
    /// Also uncorrelated with past errors: `x_t` is an extra instrument.
    Strict,
}

impl Exog {
    pub fn is_strict(self) -> bool {
        matches!(self, Exog::Strict)
    }
}

/// One dynamic-panel candidate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DpanelSpec {
    /// Number of lagged outcome differences in the model.
    pub lag: usize,
    /// Number of lagged outcome levels used as instruments. Equal to `lag`
    /// except for fixed-instrument designs, where it may exceed it.
    pub instrument_lag: usize,
    pub exog: Exog,
    pub label: String,
}

impl DpanelSpec {
    pub fn new(lag: usize, exog: Exog, label: impl Into<String>) -> Self {
        Self {
            lag,
            instrument_lag: lag,
            exog,
            label: label.into(),
        }
    }

    /// A model with `lag` lags estimated on the instruments of a larger
    /// model with `instrument_lag` lags.
    pub fn with_instruments(
        lag: usize,
        instrument_lag: usize,
        exog: Exog,
        label: impl Into<String>,
    ) -> Result<Self, DpanelError> {
        if instrument_lag < lag {
            return Err(DpanelError::InvalidCandidate(format!(
                "instrument lag {instrument_lag} is below model lag {lag}"
            )));
        }
        Ok(Self {
            lag,
            instrument_lag,
            exog,
            label: label.into(),
        })
    }

    /// First period with a complete equation.
    pub fn first_period(&self) -> usize {
        self.instrument_lag + 2
    }

    /// Number of period blocks for a panel with `t` periods.
    pub fn n_blocks(&self, t: usize) -> Result<usize, DpanelError> {
        if t < self.first_period() {
            return Err(DpanelError::TooFewPeriods {
                need: self.first_period(),
                got: t,
            });
        }
        Ok(t + 1 - self.first_period())
    }

    /// Instruments per period block.
    pub fn block_width(&self) -> usize {
        self.instrument_lag + 1 + usize::from(self.exog.is_strict())
    }

    pub fn n_moments(&self, t: usize) -> Result<usize, DpanelError> {
        Ok(self.block_width() * self.n_blocks(t)?)
    }

    pub fn n_params(&self) -> usize {
        self.lag + 1
    }
}

impl fmt::Display for DpanelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// The four candidates of a lag-`k` versus lag-`r` comparison, labelled
/// `LP`, `LS`, `P`, `S` (lagged/unlagged, predetermined/strict). The first is
/// the valid one.
pub fn standard_candidates(k: usize, r: usize) -> Vec<DpanelSpec> {
    vec![
        DpanelSpec::new(k, Exog::Predetermined, "LP"),
        DpanelSpec::new(k, Exog::Strict, "LS"),
        DpanelSpec::new(r, Exog::Predetermined, "P"),
        DpanelSpec::new(r, Exog::Strict, "S"),
    ]
}

/// Parses `LP`, `LS`, `P`, `S` relative to `(k, r)`, or `<lag><P|S>` such
/// as `2P`.
pub fn parse_candidate(s: &str, k: usize, r: usize) -> Result<DpanelSpec, DpanelError> {
    let exog = |c: char| match c {
        'P' | 'p' => Some(Exog::Predetermined),
        'S' | 's' => Some(Exog::Strict),
        _ => None,
    };
    let bad = || DpanelError::InvalidCandidate(format!("cannot parse candidate `{s}`"));
    match s {
        "LP" => return Ok(DpanelSpec::new(k, Exog::Predetermined, s)),
        "LS" => return Ok(DpanelSpec::new(k, Exog::Strict, s)),
        "P" => return Ok(DpanelSpec::new(r, Exog::Predetermined, s)),
        "S" => return Ok(DpanelSpec::new(r, Exog::Strict, s)),
        _ => {}
    }
    let last = s.chars().last().ok_or_else(bad)?;
    let e = exog(last).ok_or_else(bad)?;
    let lag = usize::from_str(&s[..s.len() - 1]).map_err(|_| bad())?;
    Ok(DpanelSpec::new(lag, e, s))
}
