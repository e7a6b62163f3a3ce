//! Finite-sum objective `J(w) = (1/N) Σ Q(w; x_n)` with ℓ2-regularized losses.

use alloc::format;

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `(ρ/2)‖w‖² + ln(1 + exp(−γ hᵀw))`
    LogisticL2,
    /// `(ρ/2)‖w‖² + ½(γ − hᵀw)²`
    QuadraticL2,
}

/// Per-sample loss definition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossModel {
    kind: LossKind,
    rho: f64,
}

/// Gradient Lipschitz constant `delta` of every `Q(·; x_n)` and strong convexity `nu` of `J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureConstants {
    pub delta: f64,
    pub nu: f64,
}

/// Logistic sigmoid `1 / (1 + e^{-z})`, stable for large `|z|`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

impl LossModel {
    /// `rho` must be positive and finite; it is the strong convexity the rate bounds rely on.
    pub fn new(kind: LossKind, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!("regularization rho must be > 0, got {rho}")));
        }
        Ok(LossModel { kind, rho })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn check_dim(w: &[f64], sample: &Sample) -> Result<()> {
        if w.len() != sample.dim() {
            return Err(Error::invalid(format!(
                "weight dimension {} does not match sample dimension {}",
                w.len(),
                sample.dim()
            )));
        }
        Ok(())
    }

    pub fn sample_loss(&self, w: &[f64], sample: &Sample) -> Result<f64> {
        Self::check_dim(w, sample)?;
        Ok(self.loss_unchecked(w, sample))
    }

    pub(crate) fn loss_unchecked(&self, w: &[f64], sample: &Sample) -> f64 {
        let reg = 0.5 * self.rho * dot(w, w);
        let margin = dot(sample.features(), w);
        let y = sample.target();
        match self.kind {
            LossKind::LogisticL2 => reg + softplus(-y * margin),
            LossKind::QuadraticL2 => {
                let r = y - margin;
                reg + 0.5 * r * r
            }
        }
    }

    pub fn sample_grad(&self, w: &[f64], sample: &Sample) -> Result<Weights> {
        Self::check_dim(w, sample)?;
        let mut out = Weights::zeros(w.len());
        self.grad_into(w, sample, &mut out);
        Ok(out)
    }

    /// Writes `∇Q(w; sample)` into `out`. Dimensions are the caller's responsibility.
    #[inline]
    pub fn grad_into(&self, w: &[f64], sample: &Sample, out: &mut [f64]) {
        debug_assert_eq!(w.len(), sample.dim());
        debug_assert_eq!(out.len(), w.len());
        let h = sample.features();
        let y = sample.target();
        let margin = dot(h, w);
        let coeff = match self.kind {
            LossKind::LogisticL2 => -y * sigmoid(-y * margin),
            LossKind::QuadraticL2 => -(y - margin),
        };
        for ((o, wi), hi) in out.iter_mut().zip(w).zip(h) {
            *o = self.rho * wi + coeff * hi;
        }
    }

    pub fn full_risk(&self, w: &[f64], dataset: &Dataset) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::invalid("empty dataset"));
        }
        if w.len() != dataset.dim() {
            return Err(Error::invalid("weight dimension does not match dataset"));
        }
        let total: f64 = dataset.samples().iter().map(|s| self.loss_unchecked(w, s)).sum();
        Ok(total / dataset.len() as f64)
    }

    pub fn full_grad(&self, w: &[f64], dataset: &Dataset) -> Result<Weights> {
        if dataset.is_empty() {
            return Err(Error::invalid("empty dataset"));
        }
        if w.len() != dataset.dim() {
            return Err(Error::invalid("weight dimension does not match dataset"));
        }
        let mut total = Weights::zeros(w.len());
        let mut g = Weights::zeros(w.len());
        for s in dataset.samples() {
            self.grad_into(w, s, &mut g);
            axpy(&mut total, 1.0, &g);
        }
        total.scale(1.0 / dataset.len() as f64);
        Ok(total)
    }

    /// Tight per-sample Hessian bounds: `ν = ρ`, and `δ = ρ + max‖h‖²/4` (logistic) or
    /// `δ = ρ + max‖h‖²` (quadratic).
    pub fn curvature(&self, dataset: &Dataset) -> Result<CurvatureConstants> {
        if dataset.is_empty() {
            return Err(Error::invalid("empty dataset"));
        }
        let max_sq = dataset
            .samples()
            .iter()
            .map(|s| dot(s.features(), s.features()))
            .fold(0.0, f64::max);
        let data_term = match self.kind {
            LossKind::LogisticL2 => max_sq / 4.0,
            LossKind::QuadraticL2 => max_sq,
        };
        Ok(CurvatureConstants { delta: self.rho + data_term, nu: self.rho })
    }
}
