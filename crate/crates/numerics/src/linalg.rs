use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

/// Matrices whose 2-norm condition number exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular {what} (condition number {cond:e})")]
    Singular { what: String, cond: f64 },
    #[error("{what} is not positive semi-definite (smallest eigenvalue {min_eig:e})")]
    NotPsd { what: String, min_eig: f64 },
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: String,
        got: String,
    },
}

/// Ratio of the largest to the smallest singular value. Empty matrices and
/// matrices with a zero singular value report `f64::INFINITY`.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return f64::INFINITY;
    }
    let sv = a.singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solve `a x = b` for square `a`, refusing ill-conditioned systems.
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>, LinalgError> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(LinalgError::Dimension {
            what: what.to_string(),
            expected: format!("square system with {} rows", b.nrows()),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let cond = condition_number(a);
    if cond.is_nan() || cond > MAX_CONDITION {
        return Err(LinalgError::Singular {
            what: what.to_string(),
            cond,
        });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| LinalgError::Singular {
            what: what.to_string(),
            cond,
        })
}

pub fn solve_vec(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    what: &str,
) -> Result<DVector<f64>, LinalgError> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = solve(a, &bm, what)?;
    Ok(x.column(0).into_owned())
}

/// `(a + a') / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// A factor `L` with `L L' = a` for a symmetric PSD matrix, built from the
/// eigendecomposition so rank-deficient inputs are fine. Eigenvalues below
/// `-tol * max(1, |largest|)` are an error; smaller negative ones are clipped.
pub fn psd_sqrt(a: &DMatrix<f64>, tol: f64, what: &str) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinalgError::Dimension {
            what: what.to_string(),
            expected: "square matrix".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let scale = eig.eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -tol * scale {
        return Err(LinalgError::NotPsd {
            what: what.to_string(),
            min_eig: min,
        });
    }
    let mut f = eig.eigenvectors.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        f.column_mut(j).scale_mut(s);
    }
    Ok(f)
}

/// Quadratic form `v' a v`.
pub fn quad_form(a: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (v.transpose() * a * v)[(0, 0)]
}

/// Block-diagonal assembly of the given matrices.
pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Least-squares residuals of each column of `y` on the columns of `x`.
/// Rank deficiency of `x` is reported as `Singular`.
pub fn ls_residuals(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    what: &str,
) -> Result<DMatrix<f64>, LinalgError> {
    if x.ncols() == 0 {
        return Ok(y.clone());
    }
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let coef = solve(&xtx, &xty, what)?;
    Ok(y - x * coef)
}
