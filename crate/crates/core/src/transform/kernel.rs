use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// Double exponential `(1/2b) e^{−|x|/b}`.
    Laplace,
    /// Top hat of half-width `b`, i.e. a histogram with bin width `2b`.
    Rectangular,
}

/// Smoothing kernel used to turn an atomic distribution into a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

pub const DEFAULT_BANDWIDTH: f64 = 1.0 / 3.0;

impl Default for Kernel {
    fn default() -> Self {
        Kernel { kind: KernelKind::Laplace, bandwidth: DEFAULT_BANDWIDTH }
    }
}

impl Kernel {
    pub fn new(kind: KernelKind, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::param(format!("kernel bandwidth must be positive, got {bandwidth}")));
        }
        Ok(Kernel { kind, bandwidth })
    }

    pub fn laplace(bandwidth: f64) -> Result<Self> {
        Self::new(KernelKind::Laplace, bandwidth)
    }

    /// Histogram kernel for bins of width `bin_width`.
    pub fn histogram(bin_width: f64) -> Result<Self> {
        Self::new(KernelKind::Rectangular, bin_width / 2.0)
    }

    /// Kernel transform on the imaginary axis, `F_κ(iθ)`; real because the
    /// kernel is symmetric.
    pub fn transform(&self, theta: f64) -> f64 {
        let b = self.bandwidth;
        match self.kind {
            // 1 / (1 − b² s²) at s = iθ
            KernelKind::Laplace => 1.0 / (1.0 + b * b * theta * theta),
            KernelKind::Rectangular => {
                let z = b * theta;
                if z.abs() < 1e-8 {
                    1.0 - z * z / 6.0
                } else {
                    z.sin() / z
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let b = self.bandwidth;
        match self.kind {
            KernelKind::Laplace => (-x.abs() / b).exp() / (2.0 * b),
            KernelKind::Rectangular => {
                if x.abs() < b {
                    1.0 / (2.0 * b)
                } else if x.abs() == b {
                    0.25 / b
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let b = self.bandwidth;
        match self.kind {
            KernelKind::Laplace => {
                if x < 0.0 {
                    0.5 * (x / b).exp()
                } else {
                    1.0 - 0.5 * (-x / b).exp()
                }
            }
            KernelKind::Rectangular => ((x + b) / (2.0 * b)).clamp(0.0, 1.0),
        }
    }

    /// Distance beyond which the kernel mass is below `1e-16`.
    pub fn reach(&self) -> f64 {
        match self.kind {
            KernelKind::Laplace => self.bandwidth * 37.0,
            KernelKind::Rectangular => self.bandwidth,
        }
    }
}
