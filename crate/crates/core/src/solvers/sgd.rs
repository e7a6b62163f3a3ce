use super::{check_epoch_args, ensure_finite, Solver, StepView, TraceSink};
use crate::data::Dataset;
use crate::error::Result;
use crate::linalg::Weights;
use crate::model::LossModel;

/// Plain constant-step stochastic gradient descent.
#[derive(Clone, Debug)]
pub struct SgdState {
    w: Weights,
    epoch: usize,
}

impl SgdState {
    pub fn new(dim: usize) -> Self {
        Self::with_weights(Weights::zeros(dim))
    }

    pub fn with_weights(w: Weights) -> Self {
        SgdState { w, epoch: 0 }
    }
}

impl Solver for SgdState {
    fn weights(&self) -> &Weights {
        &self.w
    }

    fn epochs_done(&self) -> usize {
        self.epoch
    }

    fn run_epoch(
        &mut self,
        dataset: &Dataset,
        model: &LossModel,
        order: &[usize],
        mu: f64,
        sink: &mut dyn TraceSink,
    ) -> Result<()> {
        check_epoch_args(dataset, self.w.len(), order, mu)?;
        let mut g = Weights::zeros(self.w.len());
        for (i, &n) in order.iter().enumerate() {
            model.grad_into(&self.w, dataset.sample(n), &mut g);
            sink.grad_evals(1);
            let w_before = self.w.clone();
            self.w.axpy(-mu, &g);
            ensure_finite(&self.w, self.epoch, i)?;
            sink.step(&StepView {
                epoch: self.epoch,
                inner: i,
                index: n,
                w_before: &w_before,
                direction: &g,
                w_after: &self.w,
            });
        }
        self.epoch += 1;
        Ok(())
    }
}
