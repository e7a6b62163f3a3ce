//! Epoch-structured stochastic solvers.
//!
//! Every solver state implements [`Solver`]: one call to [`Solver::run_epoch`] processes
//! one pass over the data in the supplied index order and reports each fresh per-sample
//! gradient evaluation to a [`TraceSink`]. The multi-epoch [`run`] driver draws the orders,
//! evaluates metrics and assembles [`EpochTrace`] rows.

use alloc::format;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Weights;
use crate::model::LossModel;

mod avrg;
mod driver;
mod saga;
mod sgd;
mod svrg;

pub use avrg::AvrgState;
pub use driver::{run, run_from, RunConfig, Sampling, SolverKind};
pub use saga::{PhiConvention, SagaState};
pub use sgd::SgdState;
pub use svrg::SvrgState;

/// What happened in one inner iteration.
#[derive(Debug)]
pub struct StepView<'a> {
    pub epoch: usize,
    pub inner: usize,
    /// Sample index processed at this step.
    pub index: usize,
    pub w_before: &'a [f64],
    /// Search direction `d` applied as `w_after = w_before − μ d`.
    pub direction: &'a [f64],
    pub w_after: &'a [f64],
}

/// Receives gradient-evaluation counts and, optionally, per-step views.
pub trait TraceSink {
    fn grad_evals(&mut self, count: u64);

    fn step(&mut self, _view: &StepView<'_>) {}
}

/// Sink that only counts gradient evaluations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GradCounter {
    pub evals: u64,
}

impl TraceSink for GradCounter {
    fn grad_evals(&mut self, count: u64) {
        self.evals += count;
    }
}

/// Sink that keeps the full iterate transcript `w_0, …, w_N` of an epoch together with
/// the processed indices and applied directions.
#[derive(Clone, Debug, Default)]
pub struct EpochRecorder {
    pub evals: u64,
    pub iterates: Vec<Weights>,
    pub indices: Vec<usize>,
    pub directions: Vec<Weights>,
}

impl EpochRecorder {
    pub fn clear(&mut self) {
        self.evals = 0;
        self.iterates.clear();
        self.indices.clear();
        self.directions.clear();
    }
}

impl TraceSink for EpochRecorder {
    fn grad_evals(&mut self, count: u64) {
        self.evals += count;
    }

    fn step(&mut self, view: &StepView<'_>) {
        if self.iterates.is_empty() {
            self.iterates.push(Weights::from_vec(view.w_before.to_vec()));
        }
        self.iterates.push(Weights::from_vec(view.w_after.to_vec()));
        self.indices.push(view.index);
        self.directions.push(Weights::from_vec(view.direction.to_vec()));
    }
}

/// One row of a convergence trace. Metrics refer to the iterate `w_0^t` that starts
/// epoch `t`; counters and inner differences describe the pass made during epoch `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochTrace {
    pub epoch: usize,
    pub rel_mse: f64,
    pub excess_risk: f64,
    pub grad_evals: u64,
    /// Forward inner-difference sum of this epoch divided by `N`.
    pub a_sq: Option<f64>,
    /// Backward inner-difference sum of this epoch divided by `N`.
    pub b_sq: Option<f64>,
    /// Lyapunov energy `V_t`.
    pub energy: Option<f64>,
}

/// A solver whose state advances one epoch at a time.
pub trait Solver {
    fn weights(&self) -> &Weights;

    /// Number of completed epochs.
    fn epochs_done(&self) -> usize;

    /// Processes `order.len() == N` steps. On a divergence error the state is left
    /// at the failing step and should be discarded.
    fn run_epoch(
        &mut self,
        dataset: &Dataset,
        model: &LossModel,
        order: &[usize],
        mu: f64,
        sink: &mut dyn TraceSink,
    ) -> Result<()>;
}

pub(crate) fn check_epoch_args(dataset: &Dataset, dim: usize, order: &[usize], mu: f64) -> Result<()> {
    if dataset.dim() != dim {
        return Err(Error::invalid(format!(
            "solver dimension {dim} does not match dataset dimension {}",
            dataset.dim()
        )));
    }
    if order.len() != dataset.len() {
        return Err(Error::invalid(format!(
            "epoch order has {} entries for {} samples",
            order.len(),
            dataset.len()
        )));
    }
    if let Some(&bad) = order.iter().find(|&&k| k >= dataset.len()) {
        return Err(Error::invalid(format!("sample index {bad} out of range")));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("step size must be finite and >= 0, got {mu}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn ensure_finite(w: &[f64], epoch: usize, step: usize) -> Result<()> {
    if w.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { epoch, step })
    }
}
