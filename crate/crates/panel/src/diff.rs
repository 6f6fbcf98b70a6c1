use nalgebra::DMatrix;

use crate::{PanelDataset, PanelError};

/// First differences of a panel.
///
/// Column `j` of `dy` holds `Δy` at period index `j + 1` (model time
/// `t = j + 2`); `Δy` at the first period does not exist.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffPanel {
    pub dy: DMatrix<f64>,
    pub dx: DMatrix<f64>,
}

impl DiffPanel {
    /// The first model-time period at which a difference is observed.
    pub const FIRST_OBSERVABLE: usize = 2;

    pub fn n(&self) -> usize {
        self.dy.nrows()
    }

    /// `Δy_{it}` for model time `t` (1-based), if observed.
    pub fn dy_at(&self, i: usize, t: usize) -> Option<f64> {
        (t >= Self::FIRST_OBSERVABLE && t - 2 < self.dy.ncols()).then(|| self.dy[(i, t - 2)])
    }

    pub fn dx_at(&self, i: usize, t: usize) -> Option<f64> {
        (t >= Self::FIRST_OBSERVABLE && t - 2 < self.dx.ncols()).then(|| self.dx[(i, t - 2)])
    }

    /// `L^j Δy_{it}`, defined iff `t - j >= 2`.
    pub fn lag_dy(&self, i: usize, t: usize, j: usize) -> Option<f64> {
        t.checked_sub(j).and_then(|s| self.dy_at(i, s))
    }
}

/// Difference outcome and regressor over time.
pub fn first_difference(p: &PanelDataset) -> Result<DiffPanel, PanelError> {
    let t = p.periods();
    if t < 2 {
        return Err(PanelError::TooFewPeriods { need: 2, got: t });
    }
    let diff =
        |m: &DMatrix<f64>| DMatrix::from_fn(m.nrows(), t - 1, |i, j| m[(i, j + 1)] - m[(i, j)]);
    Ok(DiffPanel {
        dy: diff(p.y()),
        dx: diff(p.x()),
    })
}
