use gfic_numerics::linalg::ls_residuals;
use gfic_panel::{first_difference, DiffPanel, PanelDataset};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{DpanelError, DpanelSpec};

/// Block-diagonal instrument matrix, rows stacked individual-major
/// (`row = i * blocks + a` for period `t = first + a`).
///
/// Block for period `t`: `[y_{t-2}, ..., y_{t-(ℓ+1)}, x_{t-1}]`, with `x_t`
/// appended under strict exogeneity.
pub fn build_instruments(p: &PanelDataset, spec: &DpanelSpec) -> Result<DMatrix<f64>, DpanelError> {
    let (n, tt) = (p.n(), p.periods());
    let nb = spec.n_blocks(tt)?;
    let bw = spec.block_width();
    let first = spec.first_period();
    let (y, x) = (p.y(), p.x());
    let mut z = DMatrix::zeros(n * nb, nb * bw);
    for i in 0..n {
        for a in 0..nb {
            let t = first + a;
            let row = i * nb + a;
            let col = a * bw;
            for j in 2..=spec.instrument_lag + 1 {
                z[(row, col + j - 2)] = y[(i, t - j - 1)];
            }
            z[(row, col + spec.instrument_lag)] = x[(i, t - 2)];
            if spec.exog.is_strict() {
                z[(row, col + spec.instrument_lag + 1)] = x[(i, t - 1)];
            }
        }
    }
    Ok(z)
}

/// Regressors `[Δx_t, Δy_{t-1}, ..., Δy_{t-lag}]` for `t = first..=T`.
pub fn build_regressors(
    d: &DiffPanel,
    lag: usize,
    first: usize,
) -> Result<DMatrix<f64>, DpanelError> {
    let tt = d.dy.ncols() + 1;
    if first < lag + 2 || first > tt {
        return Err(DpanelError::TooFewPeriods {
            need: first.max(lag + 2),
            got: tt,
        });
    }
    let (n, nb) = (d.n(), tt + 1 - first);
    let mut w = DMatrix::zeros(n * nb, lag + 1);
    for i in 0..n {
        for a in 0..nb {
            let t = first + a;
            let row = i * nb + a;
            w[(row, 0)] = d.dx[(i, t - 2)];
            for j in 1..=lag {
                w[(row, j)] = d.dy[(i, t - j - 2)];
            }
        }
    }
    Ok(w)
}

/// `Δy_t` for `t = first..=T`, stacked individual-major.
pub fn build_outcome(d: &DiffPanel, first: usize) -> Result<DVector<f64>, DpanelError> {
    let tt = d.dy.ncols() + 1;
    if first < 2 || first > tt {
        return Err(DpanelError::TooFewPeriods {
            need: first.max(2),
            got: tt,
        });
    }
    let nb = tt + 1 - first;
    Ok(DVector::from_fn(d.n() * nb, |row, _| {
        d.dy[(row / nb, first + row % nb - 2)]
    }))
}

/// Options for building a candidate's estimating system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Partial period dummies out of the differenced system.
    pub period_dummies: bool,
}

/// The stacked estimating system of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Stacked {
    pub spec: DpanelSpec,
    pub n: usize,
    pub n_blocks: usize,
    pub z: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub dy: DVector<f64>,
}

impl Stacked {
    pub fn first_period(&self) -> usize {
        self.spec.first_period()
    }

    /// Row of individual `i` at period `t`.
    pub fn row(&self, i: usize, t: usize) -> usize {
        i * self.n_blocks + t - self.first_period()
    }

    /// Sum of the current-period `x` instrument columns at every row, for
    /// strict candidates. Without partialling out this is just `x_it`; with
    /// it, the row still carries the residualized entries of other periods'
    /// columns, so that `x_total' Δv` is the sum of the `x` moments.
    pub fn x_total(&self) -> Option<DVector<f64>> {
        if !self.spec.exog.is_strict() {
            return None;
        }
        let bw = self.spec.block_width();
        Some(DVector::from_fn(self.z.nrows(), |row, _| {
            (0..self.n_blocks)
                .map(|a| self.z[(row, a * bw + bw - 1)])
                .sum()
        }))
    }

    /// The current-period `x` instrument at every row, for strict
    /// candidates.
    pub fn x_current(&self) -> Option<DVector<f64>> {
        if !self.spec.exog.is_strict() {
            return None;
        }
        let bw = self.spec.block_width();
        Some(DVector::from_fn(self.z.nrows(), |row, _| {
            self.z[(row, (row % self.n_blocks) * bw + bw - 1)]
        }))
    }
}

/// Build (and, with controls or dummies, residualize) a candidate's system.
///
/// Controls enter in first differences. Together with the optional period
/// dummies they are partialled out of `Z`, `W` and `Δy` by pooled least
/// squares on the stacked rows before TSLS.
pub fn stack_candidate(
    p: &PanelDataset,
    spec: &DpanelSpec,
    opts: FitOptions,
) -> Result<Stacked, DpanelError> {
    let d = first_difference(p)?;
    let first = spec.first_period();
    let mut z = build_instruments(p, spec)?;
    let mut w = build_regressors(&d, spec.lag, first)?;
    let mut dy = build_outcome(&d, first)?;
    let (n, nb) = (p.n(), spec.n_blocks(p.periods())?);

    let mut cols: Vec<DVector<f64>> = Vec::new();
    for c in p.controls() {
        let v = DVector::from_fn(n * nb, |row, _| {
            let (i, t) = (row / nb, first + row % nb);
            c.values[(i, t - 1)] - c.values[(i, t - 2)]
        });
        if v.iter().any(|&a| a != 0.0) {
            cols.push(v);
        }
    }
    if opts.period_dummies {
        for a in 0..nb {
            cols.push(DVector::from_fn(n * nb, |row, _| {
                if row % nb == a {
                    1.0
                } else {
                    0.0
                }
            }));
        }
    }
    if !cols.is_empty() {
        let e = DMatrix::from_columns(&cols);
        let what = format!("exogenous block of `{}`", spec.label);
        let err = |x| DpanelError::singular(&what, x);
        z = ls_residuals(&e, &z, &what).map_err(err)?;
        w = ls_residuals(&e, &w, &what).map_err(err)?;
        let r = ls_residuals(
            &e,
            &DMatrix::from_column_slice(n * nb, 1, dy.as_slice()),
            &what,
        )
        .map_err(err)?;
        dy = r.column(0).into_owned();
    }
    Ok(Stacked {
        spec: spec.clone(),
        n,
        n_blocks: nb,
        z,
        w,
        dy,
    })
}
