use super::{check_epoch_args, ensure_finite, Solver, StepView, TraceSink};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, Weights};
use crate::model::LossModel;
use crate::sampling::is_permutation;

/// AVRG state. The full-gradient surrogate `g_current` is the average of the per-sample
/// gradients met during the previous epoch; `g_accum` builds the next one.
#[derive(Clone, Debug)]
pub struct AvrgState {
    w: Weights,
    w_snapshot: Weights,
    g_current: Weights,
    g_accum: Weights,
    epoch: usize,
}

impl AvrgState {
    pub fn new(dim: usize) -> Self {
        Self::with_weights(Weights::zeros(dim))
    }

    pub fn with_weights(w: Weights) -> Self {
        let dim = w.len();
        AvrgState {
            w_snapshot: w.clone(),
            g_current: Weights::zeros(dim),
            g_accum: Weights::zeros(dim),
            epoch: 0,
            w,
        }
    }

    /// State as it stands at the start of an epoch with the given snapshot and surrogate.
    pub fn from_parts(w: Weights, w_snapshot: Weights, g_current: Weights, epoch: usize) -> Result<Self> {
        if w.len() != w_snapshot.len() || w.len() != g_current.len() {
            return Err(Error::invalid("AVRG state vectors differ in length"));
        }
        let dim = w.len();
        Ok(AvrgState { w, w_snapshot, g_current, g_accum: Weights::zeros(dim), epoch })
    }

    pub fn snapshot(&self) -> &Weights {
        &self.w_snapshot
    }

    pub fn g_current(&self) -> &Weights {
        &self.g_current
    }

    pub fn g_accum(&self) -> &Weights {
        &self.g_accum
    }

    /// `∇Q(w; x_n) − ∇Q(w_snapshot; x_n) + g_current`, no mutation.
    pub fn gradient_estimate(&self, model: &LossModel, dataset: &Dataset, w: &[f64], n: usize) -> Result<Weights> {
        if n >= dataset.len() {
            return Err(Error::invalid("sample index out of range"));
        }
        let sample = dataset.sample(n);
        let mut g = model.sample_grad(w, sample)?;
        let snap = model.sample_grad(&self.w_snapshot, sample)?;
        axpy(&mut g, -1.0, &snap);
        axpy(&mut g, 1.0, &self.g_current);
        Ok(g)
    }
}

impl Solver for AvrgState {
    fn weights(&self) -> &Weights {
        &self.w
    }

    fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// Two evaluations per step; the gradient at `w_i` feeds both the step and the
    /// accumulator. `order` must be a permutation.
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
        if !is_permutation(order) {
            return Err(Error::invalid("AVRG requires random reshuffling: order must be a permutation"));
        }
        let inv_n = 1.0 / dataset.len() as f64;
        self.g_accum.fill(0.0);
        let mut g = Weights::zeros(dim);
        let mut g_snap = Weights::zeros(dim);
        let mut direction = Weights::zeros(dim);
        for (i, &n) in order.iter().enumerate() {
            let sample = dataset.sample(n);
            model.grad_into(&self.w, sample, &mut g);
            model.grad_into(&self.w_snapshot, sample, &mut g_snap);
            sink.grad_evals(2);
            for k in 0..dim {
                direction[k] = g[k] - g_snap[k] + self.g_current[k];
            }
            self.g_accum.axpy(inv_n, &g);
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
        self.g_current = self.g_accum.clone();
        self.w_snapshot = self.w.clone();
        self.epoch += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::data::Sample;
    use crate::model::LossKind;
    use crate::solvers::GradCounter;

    fn toy() -> (Dataset, LossModel) {
        let ds = Dataset::new(vec![
            Sample::new(vec![0.6, 0.8], 1).unwrap(),
            Sample::new(vec![-1.0, 0.0], -1).unwrap(),
        ])
        .unwrap();
        (ds, LossModel::new(LossKind::LogisticL2, 0.1).unwrap())
    }

    #[test]
    fn rejects_non_permutation() {
        let (ds, model) = toy();
        let mut s = AvrgState::new(2);
        let err = s.run_epoch(&ds, &model, &[1, 1], 0.1, &mut GradCounter::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn estimate_at_snapshot_is_surrogate() {
        let (ds, model) = toy();
        let mut s = AvrgState::new(2);
        let z = s.gradient_estimate(&model, &ds, s.snapshot(), 1).unwrap();
        assert_eq!(z.as_slice(), &[0.0, 0.0]);
        s.run_epoch(&ds, &model, &[1, 0], 0.2, &mut GradCounter::default()).unwrap();
        let e = s.gradient_estimate(&model, &ds, &s.snapshot().clone(), 0).unwrap();
        assert_eq!(e.as_slice(), s.g_current().as_slice());
    }

    #[test]
    fn two_evaluations_per_step() {
        let (ds, model) = toy();
        let mut s = AvrgState::new(2);
        let mut c = GradCounter::default();
        s.run_epoch(&ds, &model, &[0, 1], 0.2, &mut c).unwrap();
        s.run_epoch(&ds, &model, &[1, 0], 0.2, &mut c).unwrap();
        assert_eq!(c.evals, 8);
    }
}
