use nalgebra::DMatrix;

use crate::PanelError;

/// An exogenous control column, stored `n x T` like the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Control {
    pub name: String,
    pub values: DMatrix<f64>,
}

/// A balanced panel of `n` individuals observed over `T` contiguous periods.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    ids: Vec<String>,
    times: Vec<i64>,
    y: DMatrix<f64>,
    x: DMatrix<f64>,
    controls: Vec<Control>,
}

impl PanelDataset {
    /// Build a panel from `n x T` matrices. `times` must be contiguous
    /// increasing integers and every value finite.
    pub fn new(
        ids: Vec<String>,
        times: Vec<i64>,
        y: DMatrix<f64>,
        x: DMatrix<f64>,
        controls: Vec<Control>,
    ) -> Result<Self, PanelError> {
        let n = ids.len();
        let t = times.len();
        if n == 0 || t == 0 {
            return Err(PanelError::Empty);
        }
        for w in times.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(PanelError::NonContiguousTimes { after: w[0] });
            }
        }
        let check = |name: &str, m: &DMatrix<f64>| -> Result<(), PanelError> {
            if m.shape() != (n, t) {
                return Err(PanelError::Shape(format!(
                    "{name} is {}x{}, expected {n}x{t}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
                let (i, p) = (pos % n, pos / n);
                return Err(PanelError::NonNumericValue {
                    row: i * t + p + 1,
                    column: name.to_string(),
                    value: m[(i, p)].to_string(),
                });
            }
            Ok(())
        };
        check("y", &y)?;
        check("x", &x)?;
        for c in &controls {
            check(&c.name, &c.values)?;
        }
        Ok(Self {
            ids,
            times,
            y,
            x,
            controls,
        })
    }

    /// Convenience constructor with integer ids `1..=n` and times `1..=T`.
    pub fn from_matrices(y: DMatrix<f64>, x: DMatrix<f64>) -> Result<Self, PanelError> {
        let ids = (1..=y.nrows()).map(|i| i.to_string()).collect();
        let times = (1..=y.ncols() as i64).collect();
        Self::new(ids, times, y, x, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Number of periods `T`.
    pub fn periods(&self) -> usize {
        self.times.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn has_controls(&self) -> bool {
        !self.controls.is_empty()
    }

    /// Same individuals restricted to periods whose labels lie in `[from, to]`.
    pub fn window(&self, from: i64, to: i64) -> Result<Self, PanelError> {
        let cols: Vec<usize> = (0..self.periods())
            .filter(|&p| self.times[p] >= from && self.times[p] <= to)
            .collect();
        if cols.is_empty() {
            return Err(PanelError::Empty);
        }
        let pick = |m: &DMatrix<f64>| m.select_columns(cols.iter());
        Self::new(
            self.ids.clone(),
            cols.iter().map(|&p| self.times[p]).collect(),
            pick(&self.y),
            pick(&self.x),
            self.controls
                .iter()
                .map(|c| Control {
                    name: c.name.clone(),
                    values: pick(&c.values),
                })
                .collect(),
        )
    }

    /// Replace outcome and regressor, keeping labels; controls are dropped.
    pub(crate) fn with_yx(&self, y: DMatrix<f64>, x: DMatrix<f64>) -> Result<Self, PanelError> {
        Self::new(self.ids.clone(), self.times.clone(), y, x, Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_gaps_in_time() {
        let y = DMatrix::zeros(1, 2);
        let err =
            PanelDataset::new(vec!["a".into()], vec![1, 3], y.clone(), y, vec![]).unwrap_err();
        assert!(matches!(err, PanelError::NonContiguousTimes { after: 1 }));
    }

    #[test]
    fn rejects_non_finite() {
        let mut y = DMatrix::zeros(2, 2);
        y[(1, 0)] = f64::NAN;
        let x = DMatrix::zeros(2, 2);
        assert!(PanelDataset::from_matrices(y, x).is_err());
    }

    #[test]
    fn window_selects_periods() {
        let y = DMatrix::from_fn(2, 4, |i, t| (10 * i + t) as f64);
        let p = PanelDataset::from_matrices(y.clone(), y).unwrap();
        let w = p.window(2, 3).unwrap();
        assert_eq!(w.times(), &[2, 3]);
        assert_eq!(w.y()[(1, 0)], 11.0);
    }
}
