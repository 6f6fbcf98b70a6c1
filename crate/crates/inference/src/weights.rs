use std::sync::Arc;

use gfic_engine::Criterion;

/// What a weight rule sees for one simulated draw, one entry per candidate.
#[derive(Debug, Clone, Copy)]
pub struct DrawView<'a> {
    /// Point estimates of each candidate's asymptotic variance.
    pub avar: &'a [f64],
    /// Simulated squared-bias estimate `(ℓ'ξ)² - ℓ'ΨΩΨ'ℓ` with
    /// `ξ = d + ΨN` the simulated limit of `[δ̂; τ̂]`.
    pub sq_bias: &'a [f64],
    /// `ℓ'ξ`.
    pub bias: &'a [f64],
}

/// Limit of the data-dependent weights as a function of the simulated draw.
/// Implementations must fill `out` with weights summing to one.
pub trait WeightRule: Send + Sync {
    fn weights(&self, draw: &DrawView<'_>, out: &mut [f64]);
}

/// Weights that do not depend on the data.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedWeights(pub Vec<f64>);

impl FixedWeights {
    /// All weight on candidate `i` of `len`.
    pub fn indicator(len: usize, i: usize) -> Self {
        let mut w = vec![0.0; len];
        w[i] = 1.0;
        FixedWeights(w)
    }
}

impl WeightRule for FixedWeights {
    fn weights(&self, _: &DrawView<'_>, out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}

/// Zero-one weights on the candidate minimizing the simulated criterion.
/// Ties go to the earlier candidate, so callers should order candidates by
/// their tie-break preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectRule(pub Criterion);

impl WeightRule for SelectRule {
    fn weights(&self, draw: &DrawView<'_>, out: &mut [f64]) {
        let mut best = (0, f64::INFINITY);
        for (i, (v, b)) in draw.avar.iter().zip(draw.sq_bias).enumerate() {
            let b = match self.0 {
                Criterion::Gfic => *b,
                Criterion::GficPlus => b.max(0.0),
            };
            let s = v + b;
            let s = if s.is_nan() { f64::INFINITY } else { s };
            if s < best.1 {
                best = (i, s);
            }
        }
        out.fill(0.0);
        out[best.0] = 1.0;
    }
}

pub type WeightFn = dyn Fn(&DrawView<'_>, &mut [f64]) + Send + Sync;

/// A rule given as a closure.
#[derive(Clone)]
pub struct FnRule(pub Arc<WeightFn>);

impl WeightRule for FnRule {
    fn weights(&self, draw: &DrawView<'_>, out: &mut [f64]) {
        (self.0)(draw, out)
    }
}
