use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Polynomial,
    Sigmoid,
}

/// `linear: x·y`, `polynomial: (gamma x·y + coef0)^degree`,
/// `sigmoid: tanh(gamma x·y + coef0)`. `degree` is ignored by the sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub gamma: f64,
    pub coef0: f64,
    pub degree: u32,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self::linear()
    }
}

impl KernelConfig {
    pub fn linear() -> Self {
        KernelConfig {
            kind: KernelKind::Linear,
            gamma: 1.0,
            coef0: 0.0,
            degree: 1,
        }
    }

    pub fn polynomial(gamma: f64, coef0: f64, degree: u32) -> Self {
        KernelConfig {
            kind: KernelKind::Polynomial,
            gamma,
            coef0,
            degree,
        }
    }

    pub fn sigmoid(gamma: f64, coef0: f64) -> Self {
        KernelConfig {
            kind: KernelKind::Sigmoid,
            gamma,
            coef0,
            degree: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            KernelKind::Linear => Ok(()),
            KernelKind::Polynomial if !(self.gamma > 0.0) => Err(Error::param("polynomial kernel needs gamma > 0")),
            KernelKind::Polynomial if self.degree == 0 => Err(Error::param("polynomial degree must be at least 1")),
            KernelKind::Sigmoid if !(self.gamma > 0.0) => Err(Error::param("sigmoid kernel needs gamma > 0")),
            _ => Ok(()),
        }
    }

    /// Kernel value from a precomputed inner product.
    pub fn apply(&self, dot: f64) -> f64 {
        match self.kind {
            KernelKind::Linear => dot,
            KernelKind::Polynomial => (self.gamma * dot + self.coef0).powi(self.degree as i32),
            KernelKind::Sigmoid => (self.gamma * dot + self.coef0).tanh(),
        }
    }
}

pub fn kernel_eval(cfg: &KernelConfig, x: &SparseVector, y: &SparseVector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    Ok(cfg.apply(x.dot(y)))
}
