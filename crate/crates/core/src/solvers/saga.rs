use alloc::vec;
use alloc::vec::Vec;

use super::{check_epoch_args, ensure_finite, Solver, StepView, TraceSink};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, Weights};
use crate::model::LossModel;

/// Which iterate a SAGA table write refers to after processing sample `n` at step `i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PhiConvention {
    /// `φ_n ← w_{i+1}`: the table stores `∇Q(w_{i+1}; x_n)`, one extra evaluation per step.
    #[default]
    PostStep,
    /// `φ_n ← w_i`: the table reuses the gradient of the step, one evaluation per step.
    PreStep,
}

/// SAGA state: iterate, per-sample gradient table and its running mean.
///
/// The table starts at zero (no history). With `diagnostic` enabled the iterate that
/// each table row was evaluated at (`φ_n`) is kept alongside; `None` marks a row that
/// still holds the zero initialization.
#[derive(Clone, Debug)]
pub struct SagaState {
    w: Weights,
    grad_table: Vec<f64>,
    table_avg: Weights,
    history: Option<Vec<Option<Weights>>>,
    convention: PhiConvention,
    samples: usize,
    epoch: usize,
    grad: Weights,
    direction: Weights,
    stored: Weights,
}

impl SagaState {
    pub fn new(samples: usize, dim: usize, convention: PhiConvention, diagnostic: bool) -> Self {
        Self::with_weights(Weights::zeros(dim), samples, convention, diagnostic)
    }

    pub fn with_weights(w: Weights, samples: usize, convention: PhiConvention, diagnostic: bool) -> Self {
        let dim = w.len();
        SagaState {
            grad_table: vec![0.0; samples * dim],
            table_avg: Weights::zeros(dim),
            history: diagnostic.then(|| vec![None; samples]),
            convention,
            samples,
            epoch: 0,
            grad: Weights::zeros(dim),
            direction: Weights::zeros(dim),
            stored: Weights::zeros(dim),
            w,
        }
    }

    pub fn convention(&self) -> PhiConvention {
        self.convention
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn grad_row(&self, n: usize) -> &[f64] {
        let dim = self.dim();
        &self.grad_table[n * dim..(n + 1) * dim]
    }

    pub fn table_avg(&self) -> &Weights {
        &self.table_avg
    }

    /// History iterates `φ_n` (diagnostic mode only).
    pub fn history(&self) -> Option<&[Option<Weights>]> {
        self.history.as_deref()
    }

    pub fn is_diagnostic(&self) -> bool {
        self.history.is_some()
    }

    pub fn set_weights(&mut self, w: Weights) {
        assert_eq!(w.len(), self.dim());
        self.w = w;
    }

    /// Exact arithmetic mean of the gradient table, recomputed from scratch.
    pub fn table_mean(&self) -> Weights {
        let dim = self.dim();
        let mut mean = Weights::zeros(dim);
        for row in self.grad_table.chunks_exact(dim) {
            axpy(&mut mean, 1.0, row);
        }
        mean.scale(1.0 / self.samples as f64);
        mean
    }

    /// Deviation of the running average from the exact mean, relative to the average
    /// row norm. Near a minimizer the mean itself cancels towards zero, so the rows set
    /// the scale at which rounding is committed.
    pub fn table_avg_drift(&self) -> f64 {
        let dim = self.dim();
        let mean = self.table_mean();
        let scale = self
            .grad_table
            .chunks_exact(dim)
            .map(|row| libm::sqrt(crate::linalg::dot(row, row)))
            .sum::<f64>()
            / self.samples as f64;
        libm::sqrt(mean.dist_sq(&self.table_avg)) / mean.norm().max(scale).max(1e-300)
    }

    /// `∇Q(w; x_n) − ∇Q(φ_n; x_n) + (1/N) Σ_m ∇Q(φ_m; x_m)` without touching the state.
    pub fn gradient_estimate(&self, model: &LossModel, dataset: &Dataset, w: &[f64], n: usize) -> Result<Weights> {
        if n >= self.samples {
            return Err(Error::invalid("sample index out of range"));
        }
        let mut g = model.sample_grad(w, dataset.sample(n))?;
        axpy(&mut g, -1.0, self.grad_row(n));
        axpy(&mut g, 1.0, &self.table_avg);
        Ok(g)
    }

    /// Fresh evaluation of `∇Q(φ_n; x_n)` from the stored history iterate, zero for a row
    /// still at its initialization. `None` outside diagnostic mode.
    pub fn history_gradient(&self, model: &LossModel, dataset: &Dataset, n: usize) -> Option<Weights> {
        let history = self.history.as_ref()?;
        Some(match &history[n] {
            Some(phi) => {
                let mut g = Weights::zeros(self.dim());
                model.grad_into(phi, dataset.sample(n), &mut g);
                g
            }
            None => Weights::zeros(self.dim()),
        })
    }

    /// One inner iteration on sample `n`.
    pub fn step(
        &mut self,
        dataset: &Dataset,
        model: &LossModel,
        inner: usize,
        n: usize,
        mu: f64,
        sink: &mut dyn TraceSink,
    ) -> Result<()> {
        let dim = self.dim();
        let sample = dataset.sample(n);
        model.grad_into(&self.w, sample, &mut self.grad);
        sink.grad_evals(1);

        let row = n * dim..(n + 1) * dim;
        for (k, d) in self.direction.iter_mut().enumerate() {
            *d = self.grad[k] - self.grad_table[row.start + k] + self.table_avg[k];
        }
        let w_before = self.w.clone();
        self.w.axpy(-mu, &self.direction);
        ensure_finite(&self.w, self.epoch, inner)?;
        sink.step(&StepView {
            epoch: self.epoch,
            inner,
            index: n,
            w_before: &w_before,
            direction: &self.direction,
            w_after: &self.w,
        });

        let phi = match self.convention {
            PhiConvention::PreStep => {
                self.stored.copy_from_slice(&self.grad);
                w_before
            }
            PhiConvention::PostStep => {
                model.grad_into(&self.w, sample, &mut self.stored);
                sink.grad_evals(1);
                self.w.clone()
            }
        };
        let inv_n = 1.0 / self.samples as f64;
        for (k, slot) in self.grad_table[row].iter_mut().enumerate() {
            self.table_avg[k] += (self.stored[k] - *slot) * inv_n;
            *slot = self.stored[k];
        }
        if let Some(history) = self.history.as_mut() {
            history[n] = Some(phi);
        }
        Ok(())
    }

    /// Closes an epoch: resynchronizes the running mean and advances the epoch counter.
    pub fn finish_epoch(&mut self) {
        self.table_avg = self.table_mean();
        self.epoch += 1;
    }
}

impl Solver for SagaState {
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
        check_epoch_args(dataset, self.dim(), order, mu)?;
        if dataset.len() != self.samples {
            return Err(Error::invalid("SAGA table size does not match dataset"));
        }
        for (i, &n) in order.iter().enumerate() {
            self.step(dataset, model, i, n, mu, sink)?;
        }
        self.finish_epoch();
        Ok(())
    }
}
