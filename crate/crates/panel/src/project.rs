use gfic_numerics::linalg::{condition_number, ls_residuals, MAX_CONDITION};
use nalgebra::DMatrix;

use crate::{PanelDataset, PanelError};

/// Replace `y` and `x` by their residuals from a pooled least-squares
/// projection on the control columns (plus period dummies when
/// `period_dummies` is set). Controls are dropped from the result.
///
/// Identically zero control columns span nothing and are ignored; any other
/// collinearity in the block is an error.
pub fn project_out_controls(
    p: &PanelDataset,
    period_dummies: bool,
) -> Result<PanelDataset, PanelError> {
    if !p.has_controls() {
        return Err(PanelError::NoControls);
    }
    let (n, t) = (p.n(), p.periods());
    let rows = n * t;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for c in p.controls() {
        // row index i * T + p: individual-major stacking
        let v: Vec<f64> = (0..rows).map(|r| c.values[(r / t, r % t)]).collect();
        if v.iter().any(|&a| a != 0.0) {
            cols.push(v);
        }
    }
    if period_dummies {
        for q in 0..t {
            cols.push(
                (0..rows)
                    .map(|r| if r % t == q { 1.0 } else { 0.0 })
                    .collect(),
            );
        }
    }
    let stack = |m: &DMatrix<f64>| DMatrix::from_fn(rows, 1, |r, _| m[(r / t, r % t)]);
    let unstack = |v: &DMatrix<f64>| DMatrix::from_fn(n, t, |i, q| v[(i * t + q, 0)]);
    if cols.is_empty() {
        return p.with_yx(p.y().clone(), p.x().clone());
    }
    let e = DMatrix::from_fn(rows, cols.len(), |r, j| cols[j][r]);
    let gram = e.transpose() * &e;
    let cond = condition_number(&gram);
    if cond.is_nan() || cond > MAX_CONDITION {
        return Err(PanelError::RankDeficientControls(format!(
            "condition number {cond:e}"
        )));
    }
    let ry = ls_residuals(&e, &stack(p.y()), "control block")
        .map_err(|e| PanelError::RankDeficientControls(e.to_string()))?;
    let rx = ls_residuals(&e, &stack(p.x()), "control block")
        .map_err(|e| PanelError::RankDeficientControls(e.to_string()))?;
    p.with_yx(unstack(&ry), unstack(&rx))
}
