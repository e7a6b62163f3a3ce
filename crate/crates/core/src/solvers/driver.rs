use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{AvrgState, EpochRecorder, EpochTrace, GradCounter, PhiConvention, SagaState, SgdState, Solver, SvrgState};
use crate::analysis::{
    excess_risk, inner_differences, relative_mse, theorem_constants, ConstantsVariant, DifferenceConvention,
    ReferenceSolution, TheoremKind,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Weights;
use crate::model::LossModel;
use crate::sampling::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Sgd,
    Saga,
    Svrg,
    Avrg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sampling {
    /// A fresh uniform permutation every epoch (sampling without replacement).
    Reshuffle,
    /// `N` independent uniform draws every epoch (sampling with replacement).
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub solver: SolverKind,
    pub sampling: Sampling,
    pub mu: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Keep inner iterates to report inner differences and energy.
    pub diagnostic: bool,
    pub phi_convention: PhiConvention,
    pub constants: ConstantsVariant,
}

impl RunConfig {
    pub fn new(solver: SolverKind, sampling: Sampling, mu: f64, epochs: usize, seed: u64) -> Self {
        RunConfig {
            solver,
            sampling,
            mu,
            epochs,
            seed,
            diagnostic: false,
            phi_convention: PhiConvention::default(),
            constants: ConstantsVariant::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(alloc::format!("step size must be > 0, got {}", self.mu)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("at least one epoch is required".into()));
        }
        if self.solver == SolverKind::Avrg && self.sampling == Sampling::Uniform {
            return Err(Error::Config("AVRG requires random reshuffling".into()));
        }
        Ok(())
    }

    /// Rate theorem that covers this solver/sampling pair, if any.
    pub fn theorem(&self) -> Option<TheoremKind> {
        TheoremKind::for_solver(self.solver, self.sampling)
    }
}

fn make_solver(config: &RunConfig, samples: usize, initial: Weights) -> Box<dyn Solver> {
    match config.solver {
        SolverKind::Sgd => Box::new(SgdState::with_weights(initial)),
        SolverKind::Saga => Box::new(SagaState::with_weights(initial, samples, config.phi_convention, false)),
        SolverKind::Svrg => Box::new(SvrgState::with_weights(initial)),
        SolverKind::Avrg => Box::new(AvrgState::with_weights(initial)),
    }
}

/// Runs `config.epochs` epochs from `w = 0`.
pub fn run(config: &RunConfig, dataset: &Dataset, model: &LossModel, reference: &ReferenceSolution) -> Result<Vec<EpochTrace>> {
    run_from(config, dataset, model, reference, Weights::zeros(dataset.dim()))
}

/// Runs `config.epochs` epochs from `initial`, one trace row per epoch.
///
/// Row `t` carries the metrics of the iterate that starts epoch `t` and the counters of the
/// pass made in epoch `t`. With diagnostics on, `a_sq`/`b_sq` come from the recorded inner
/// iterates and, for solver/sampling pairs covered by a rate theorem, the energy is
/// `V_t = ‖w_0^t − w*‖² + c·γ·(a_t² + b_{t−1}²)` with `b_{−1}² = 0`.
pub fn run_from(
    config: &RunConfig,
    dataset: &Dataset,
    model: &LossModel,
    reference: &ReferenceSolution,
    initial: Weights,
) -> Result<Vec<EpochTrace>> {
    config.validate()?;
    if initial.len() != dataset.dim() {
        return Err(Error::invalid("initial weights do not match dataset dimension"));
    }
    let n = dataset.len();
    let mut solver = make_solver(config, n, initial);
    let mut rng = RngStream::new(config.seed);

    let energy_weight = match (config.diagnostic, config.theorem()) {
        (true, Some(kind)) => {
            let curvature = model.curvature(dataset)?;
            let constants = theorem_constants(kind, config.mu, curvature, n, config.constants)?;
            Some(kind.energy_coefficient() * constants.gamma)
        }
        _ => None,
    };
    let convention = match config.solver {
        SolverKind::Avrg => DifferenceConvention::FullRange,
        _ => DifferenceConvention::Interior,
    };

    let mut traces = Vec::with_capacity(config.epochs);
    let mut recorder = EpochRecorder::default();
    let mut prev_b = 0.0;
    for epoch in 0..config.epochs {
        let w0 = solver.weights();
        let rel_mse = relative_mse(w0, reference)?;
        let excess = excess_risk(model, dataset, w0, reference)?;
        let mse = w0.dist_sq(&reference.w_star);

        let order = match config.sampling {
            Sampling::Reshuffle => rng.random_permutation(n).into_vec(),
            Sampling::Uniform => rng.uniform_indices(n, n),
        };
        let row = if config.diagnostic {
            recorder.clear();
            solver.run_epoch(dataset, model, &order, config.mu, &mut recorder)?;
            let (a_sq, b_sq) = inner_differences(&recorder.iterates, convention)?;
            let energy = energy_weight.map(|c| mse + c * (a_sq + prev_b));
            prev_b = b_sq;
            EpochTrace {
                epoch,
                rel_mse,
                excess_risk: excess,
                grad_evals: recorder.evals,
                a_sq: Some(a_sq),
                b_sq: Some(b_sq),
                energy,
            }
        } else {
            let mut counter = GradCounter::default();
            solver.run_epoch(dataset, model, &order, config.mu, &mut counter)?;
            EpochTrace {
                epoch,
                rel_mse,
                excess_risk: excess,
                grad_evals: counter.evals,
                a_sq: None,
                b_sq: None,
                energy: None,
            }
        };
        traces.push(row);
    }
    Ok(traces)
}
