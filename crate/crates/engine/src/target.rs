use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

type Scalar = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type Vector = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// A smooth scalar target `μ = φ(θ, γ)` and its gradient.
#[derive(Clone)]
pub struct TargetFunction {
    name: String,
    value: Arc<Scalar>,
    gradient: Arc<Vector>,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("name", &self.name)
            .finish()
    }
}

impl TargetFunction {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    /// `φ(β) = w'β`.
    pub fn linear(name: impl Into<String>, weights: DVector<f64>) -> Self {
        let w1 = weights.clone();
        Self::new(name, move |b| w1.dot(b), move |_| weights.clone())
    }

    /// The `j`-th coordinate of `β`.
    pub fn coordinate(name: impl Into<String>, dim: usize, j: usize) -> Self {
        let mut w = DVector::zeros(dim);
        w[j] = 1.0;
        Self::linear(name, w)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, beta: &DVector<f64>) -> f64 {
        (self.value)(beta)
    }

    pub fn gradient(&self, beta: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(beta)
    }

    /// Largest relative gap between the analytic gradient and central
    /// differences at `beta`.
    pub fn gradient_error(&self, beta: &DVector<f64>) -> f64 {
        let g = self.gradient(beta);
        let mut worst: f64 = 0.0;
        for j in 0..beta.len() {
            let h = 1e-6 * beta[j].abs().max(1.0);
            let mut up = beta.clone();
            let mut dn = beta.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (self.value(&up) - self.value(&dn)) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1.0));
        }
        worst
    }
}
