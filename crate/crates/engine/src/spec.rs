use gfic_numerics::linalg::{min_eigenvalue, psd_sqrt};
use nalgebra::DMatrix;

use crate::EngineError;

/// A (model, moment) selection pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecId {
    /// Number of protected parameters `θ` (always estimated).
    pub s: usize,
    /// Which of the `r` suspect parameters are estimated.
    pub b: Vec<bool>,
    /// Which of the `p + q` moment conditions are used.
    pub c: Vec<bool>,
    pub label: String,
}

impl SpecId {
    pub fn new(
        s: usize,
        b: Vec<bool>,
        c: Vec<bool>,
        label: impl Into<String>,
    ) -> Result<Self, EngineError> {
        let spec = Self {
            s,
            b,
            c,
            label: label.into(),
        };
        if spec.n_moments() < spec.n_params() {
            return Err(EngineError::InvalidSpec(format!(
                "`{}` uses {} moments for {} parameters",
                spec.label,
                spec.n_moments(),
                spec.n_params()
            )));
        }
        Ok(spec)
    }

    /// The valid candidate: every parameter, only the first `p` moments.
    pub fn valid(s: usize, r: usize, p: usize, q: usize) -> Result<Self, EngineError> {
        let c = (0..p + q).map(|j| j < p).collect();
        Self::new(s, vec![true; r], c, "valid")
    }

    pub fn n_params(&self) -> usize {
        self.s + self.b.iter().filter(|&&v| v).count()
    }

    pub fn n_moments(&self) -> usize {
        self.c.iter().filter(|&&v| v).count()
    }

    /// Indices into `(θ, γ)` of the estimated parameters.
    pub fn param_index(&self) -> Vec<usize> {
        (0..self.s)
            .chain(
                self.b
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v)
                    .map(|(j, _)| self.s + j),
            )
            .collect()
    }

    pub fn moment_index(&self) -> Vec<usize> {
        self.c
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(j, _)| j)
            .collect()
    }

    /// `Ξ_b`, the `(|b| + s) x (r + s)` parameter selection matrix.
    pub fn xi_b(&self) -> DMatrix<f64> {
        selection(&self.param_index(), self.s + self.b.len())
    }

    /// `Ξ_c`, the `|c| x (p + q)` moment selection matrix.
    pub fn xi_c(&self) -> DMatrix<f64> {
        selection(&self.moment_index(), self.c.len())
    }
}

fn selection(idx: &[usize], width: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(idx.len(), width);
    for (row, &j) in idx.iter().enumerate() {
        m[(row, j)] = 1.0;
    }
    m
}

/// Estimated limit-theory objects shared by all candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitObjects {
    /// Jacobian of the moments, `(p + q) x (s + r)`, blocks `[G; H]`.
    pub f: DMatrix<f64>,
    /// Covariance of the moment functions.
    pub omega: DMatrix<f64>,
    /// Weighting matrix.
    pub w: DMatrix<f64>,
    pub p: usize,
    pub s: usize,
}

impl LimitObjects {
    pub fn new(
        f: DMatrix<f64>,
        omega: DMatrix<f64>,
        w: DMatrix<f64>,
        p: usize,
        s: usize,
    ) -> Result<Self, EngineError> {
        let m = f.nrows();
        let bad = |msg: String| Err(EngineError::InvalidLimitObjects(msg));
        if p > m || s > f.ncols() {
            return bad(format!(
                "p={p}, s={s} do not fit a {}x{} Jacobian",
                m,
                f.ncols()
            ));
        }
        if omega.shape() != (m, m) || w.shape() != (m, m) {
            return bad(format!("Omega and W must be {m}x{m}"));
        }
        let asym = |a: &DMatrix<f64>| (a - a.transpose()).amax() / a.amax().max(1.0);
        if asym(&omega) > 1e-10 || asym(&w) > 1e-10 {
            return bad("Omega and W must be symmetric".into());
        }
        psd_sqrt(&omega, 1e-10, "Omega")
            .map_err(|e| EngineError::InvalidLimitObjects(e.to_string()))?;
        if m > 0 && min_eigenvalue(&w) <= 0.0 {
            return bad("W must be positive definite".into());
        }
        Ok(Self { f, omega, w, p, s })
    }

    pub fn q(&self) -> usize {
        self.f.nrows() - self.p
    }

    pub fn r(&self) -> usize {
        self.f.ncols() - self.s
    }

    /// `G`, the trusted-moment rows of `F`.
    pub fn g(&self) -> DMatrix<f64> {
        self.f.rows(0, self.p).into_owned()
    }

    /// `H`, the suspect-moment rows of `F`.
    pub fn h(&self) -> DMatrix<f64> {
        self.f.rows(self.p, self.q()).into_owned()
    }

    pub(crate) fn check_spec(&self, spec: &SpecId) -> Result<(), EngineError> {
        if spec.s != self.s || spec.b.len() != self.r() || spec.c.len() != self.f.nrows() {
            return Err(EngineError::DimensionMismatch(format!(
                "candidate `{}` has (s, r, p+q) = ({}, {}, {}), limit objects have ({}, {}, {})",
                spec.label,
                spec.s,
                spec.b.len(),
                spec.c.len(),
                self.s,
                self.r(),
                self.f.nrows()
            )));
        }
        Ok(())
    }
}
