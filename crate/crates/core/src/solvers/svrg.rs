use super::{check_epoch_args, ensure_finite, Solver, StepView, TraceSink};
use crate::data::Dataset;
use crate::error::Result;
use crate::linalg::{axpy, Weights};
use crate::model::LossModel;

/// SVRG state: iterate, epoch snapshot and the full gradient at the snapshot.
#[derive(Clone, Debug)]
pub struct SvrgState {
    w: Weights,
    w_snapshot: Weights,
    snapshot_full_grad: Weights,
    epoch: usize,
}

impl SvrgState {
    pub fn new(dim: usize) -> Self {
        Self::with_weights(Weights::zeros(dim))
    }

    pub fn with_weights(w: Weights) -> Self {
        let dim = w.len();
        SvrgState { w_snapshot: w.clone(), snapshot_full_grad: Weights::zeros(dim), epoch: 0, w }
    }

    pub fn snapshot(&self) -> &Weights {
        &self.w_snapshot
    }

    pub fn snapshot_full_grad(&self) -> &Weights {
        &self.snapshot_full_grad
    }
}

impl Solver for SvrgState {
    fn weights(&self) -> &Weights {
        &self.w
    }

    fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// `N` evaluations for the snapshot gradient, then two per inner step: `3N` in total.
    fn run_epoch(
        &mut self,
        dataset: &Dataset,
        model: &LossModel,
        order: &[usize],
        mu: f64,
        sink: &mut dyn TraceSink,
    ) -> Result<()> {
        let dim = self.w.len();
        check_epoch_args(dataset, dim, order, mu)?;
        self.w_snapshot = self.w.clone();
        self.snapshot_full_grad = model.full_grad(&self.w_snapshot, dataset)?;
        sink.grad_evals(dataset.len() as u64);

        let mut g = Weights::zeros(dim);
        let mut g_snap = Weights::zeros(dim);
        let mut direction = Weights::zeros(dim);
        for (i, &n) in order.iter().enumerate() {
            let sample = dataset.sample(n);
            model.grad_into(&self.w, sample, &mut g);
            model.grad_into(&self.w_snapshot, sample, &mut g_snap);
            sink.grad_evals(2);
            direction.copy_from_slice(&g);
            axpy(&mut direction, -1.0, &g_snap);
            axpy(&mut direction, 1.0, &self.snapshot_full_grad);
            let w_before = self.w.clone();
            self.w.axpy(-mu, &direction);
            ensure_finite(&self.w, self.epoch, i)?;
            sink.step(&StepView {
                epoch: self.epoch,
                inner: i,
                index: n,
                w_before: &w_before,
                direction: &direction,
                w_after: &self.w,
            });
        }
        self.w_snapshot = self.w.clone();
        self.epoch += 1;
        Ok(())
    }
}
