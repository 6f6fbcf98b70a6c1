use std::f64::consts::PI;

use gfic_numerics::linalg::psd_sqrt;
use gfic_numerics::rng::substream;
use gfic_numerics::stats::chi2_quantile;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::InferenceError;

/// Resolution of the deterministic grid over the confidence ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionGrid {
    /// Directions from the center. In one dimension there are only two.
    pub directions: usize,
    /// Evenly spaced radii `1/shells, ..., 1` of the boundary scale.
    pub shells: usize,
}

impl Default for RegionGrid {
    fn default() -> Self {
        RegionGrid {
            directions: 200,
            shells: 5,
        }
    }
}

// Fixed so that the grid never depends on the simulation seed.
const DIRECTION_SEED: u64 = 0x6f1c_2e55_a9d3_0b17;

fn unit_directions(dim: usize, count: usize) -> Vec<DVector<f64>> {
    match dim {
        0 => vec![],
        1 => vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, -1.0),
        ],
        2 => (0..count.max(2))
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count.max(2) as f64;
                DVector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..dim {
                for s in [1.0, -1.0] {
                    let mut e = DVector::zeros(dim);
                    e[i] = s;
                    out.push(e);
                }
            }
            let mut rng = substream(DIRECTION_SEED, &[dim as u64]);
            while out.len() < count {
                let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                let norm = v.norm();
                if norm > 1e-12 {
                    out.push(v / norm);
                }
            }
            out
        }
    }
}

/// Grid points of `{d : (d - d̂)'V⁻¹(d - d̂) ≤ χ²_D(1 - α₁)}`, center first.
///
/// `V` may be singular; the region is then the degenerate ellipsoid
/// `d̂ + c V^{1/2} u`, `|u| ≤ 1`, and `V = 0` gives the center alone.
pub fn region_points(
    center: &DVector<f64>,
    metric: &DMatrix<f64>,
    alpha1: f64,
    grid: RegionGrid,
) -> Result<Vec<DVector<f64>>, InferenceError> {
    let dim = center.len();
    if metric.shape() != (dim, dim) {
        return Err(InferenceError::DimensionMismatch(format!(
            "region metric is {}x{}, center has length {dim}",
            metric.nrows(),
            metric.ncols()
        )));
    }
    if metric.iter().any(|v| !v.is_finite()) {
        return Err(InferenceError::SingularRegionMetric(
            "non-finite entries".into(),
        ));
    }
    let root = psd_sqrt(metric, 1e-8, "ΨΩΨ'")
        .map_err(|e| InferenceError::SingularRegionMetric(e.to_string()))?;
    let mut pts = vec![center.clone()];
    if root.amax() == 0.0 || grid.shells == 0 {
        return Ok(pts);
    }
    let scale = chi2_quantile(1.0 - alpha1, dim).sqrt();
    for u in unit_directions(dim, grid.directions) {
        let step = &root * u * scale;
        for s in 1..=grid.shells {
            pts.push(center + &step * (s as f64 / grid.shells as f64));
        }
    }
    Ok(pts)
}
