//! Multi-seed experiments: dataset preparation, step-size calibration, seed fan-out and
//! the metadata written alongside seed-averaged traces.

use std::path::PathBuf;

use rayon::prelude::*;
use rrvr_core::analysis::{
    average_traces, reference_minimizer, theorem_constants, ConstantsVariant, ReferenceSolution, TheoremConstants,
    TheoremKind,
};
use rrvr_core::data::synth_logistic;
use rrvr_core::sampling::run_seed;
use rrvr_core::solvers::{run, EpochTrace, PhiConvention, RunConfig, Sampling, SolverKind};
use rrvr_core::{CurvatureConstants, Dataset, LossKind, LossModel};

use crate::error::{Error, Result};
use crate::libsvm::read_libsvm;
use crate::trace::Metadata;

/// Gradient-norm tolerance of the reference minimizer.
pub const REFERENCE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    /// `n` unit-norm samples in dimension `m`.
    Synthetic { n: usize, m: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rho {
    Value(f64),
    /// `ρ = 1/N`
    InverseN,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    Mu(f64),
    /// Fraction of the rate theorem's bound for the solver. Pairs without a theorem use
    /// the SAGA+RR bound `ν/(11δ²N)`.
    MuFrac(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Seeds {
    /// `count` runs seeded from `run_seed(base, 0..count)`.
    Count { count: u64, base: u64 },
    List(Vec<u64>),
}

impl Seeds {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Seeds::Count { count, base } => (0..*count).map(|k| run_seed(*base, k)).collect(),
            Seeds::List(list) => list.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub source: DataSource,
    pub loss: LossKind,
    pub rho: Rho,
}

/// A loaded problem with its curvature and reference minimizer.
#[derive(Clone, Debug)]
pub struct Problem {
    pub dataset: Dataset,
    pub model: LossModel,
    pub curvature: CurvatureConstants,
    pub reference: ReferenceSolution,
}

impl ProblemSpec {
    pub fn synthetic(n: usize, m: usize, seed: u64, loss: LossKind) -> Self {
        ProblemSpec { source: DataSource::Synthetic { n, m, seed }, loss, rho: Rho::InverseN }
    }

    pub fn load(&self) -> Result<Problem> {
        let dataset = match &self.source {
            DataSource::File(path) => read_libsvm(path)?,
            DataSource::Synthetic { n, m, seed } => synth_logistic(*n, *m, *seed)?,
        };
        let rho = match self.rho {
            Rho::Value(r) => r,
            Rho::InverseN => 1.0 / dataset.len() as f64,
        };
        let model = LossModel::new(self.loss, rho)?;
        let curvature = model.curvature(&dataset)?;
        let reference = reference_minimizer(&model, &dataset, REFERENCE_TOL)?;
        Ok(Problem { dataset, model, curvature, reference })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    pub sampling: Sampling,
    pub step: StepSize,
    pub epochs: usize,
    pub seeds: Seeds,
    pub diagnostic: bool,
    pub phi_convention: PhiConvention,
    pub constants: ConstantsVariant,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, solver: SolverKind, sampling: Sampling, step: StepSize, epochs: usize) -> Self {
        ExperimentConfig {
            problem,
            solver,
            sampling,
            step,
            epochs,
            seeds: Seeds::Count { count: 1, base: 0 },
            diagnostic: false,
            phi_convention: PhiConvention::default(),
            constants: ConstantsVariant::default(),
        }
    }

    /// Theorem covering this solver/sampling pair, or the SAGA+RR bound used to scale `MuFrac`.
    pub fn bound_kind(&self) -> TheoremKind {
        TheoremKind::for_solver(self.solver, self.sampling).unwrap_or(TheoremKind::SagaRr)
    }

    pub fn resolve_mu(&self, curvature: CurvatureConstants, n: usize) -> Result<f64> {
        let mu = match self.step {
            StepSize::Mu(mu) => mu,
            StepSize::MuFrac(frac) => frac * self.bound_kind().mu_max(curvature, n),
        };
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Config(format!("step size must be > 0, got {mu}")));
        }
        Ok(mu)
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub mu: f64,
    pub seeds: Vec<u64>,
    /// Present when a rate theorem covers the solver/sampling pair.
    pub constants: Option<TheoremConstants>,
    pub per_seed: Vec<Vec<EpochTrace>>,
    pub averaged: Vec<EpochTrace>,
    pub metadata: Metadata,
}

/// Runs every seed (in parallel) and averages the traces in seed order, so the result
/// does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    let problem = config.problem.load()?;
    run_on(config, &problem)
}

/// [`run_experiment`] on an already loaded problem.
pub fn run_on(config: &ExperimentConfig, problem: &Problem) -> Result<Outcome> {
    let n = problem.dataset.len();
    let mu = config.resolve_mu(problem.curvature, n)?;
    let seeds = config.seeds.resolve();
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let base = RunConfig {
        solver: config.solver,
        sampling: config.sampling,
        mu,
        epochs: config.epochs,
        seed: 0,
        diagnostic: config.diagnostic,
        phi_convention: config.phi_convention,
        constants: config.constants,
    };
    base.validate()?;
    let per_seed = seeds
        .par_iter()
        .map(|&seed| run(&RunConfig { seed, ..base.clone() }, &problem.dataset, &problem.model, &problem.reference))
        .collect::<rrvr_core::Result<Vec<_>>>()?;
    let averaged = average_traces(&per_seed)?;
    let constants = match base.theorem() {
        Some(kind) => Some(theorem_constants(kind, mu, problem.curvature, n, config.constants)?),
        None => None,
    };
    let metadata = metadata(config, problem, mu, &seeds, constants.as_ref());
    Ok(Outcome { mu, seeds, constants, per_seed, averaged, metadata })
}

fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Sgd => "sgd",
        SolverKind::Saga => "saga",
        SolverKind::Svrg => "svrg",
        SolverKind::Avrg => "avrg",
    }
}

fn sampling_name(s: Sampling) -> &'static str {
    match s {
        Sampling::Reshuffle => "rr",
        Sampling::Uniform => "uniform",
    }
}

fn loss_name(l: LossKind) -> &'static str {
    match l {
        LossKind::LogisticL2 => "logistic-l2",
        LossKind::QuadraticL2 => "quadratic-l2",
    }
}

fn metadata(
    config: &ExperimentConfig,
    problem: &Problem,
    mu: f64,
    seeds: &[u64],
    constants: Option<&TheoremConstants>,
) -> Metadata {
    let mut m: Metadata = Vec::new();
    let mut put = |k: &str, v: String| m.push((k.to_string(), v));
    let source = match &config.problem.source {
        DataSource::File(p) => format!("file {}", p.display()),
        DataSource::Synthetic { n, m, seed } => format!("synthetic n={n} m={m} seed={seed}"),
    };
    put("dataset", source);
    put("n", problem.dataset.len().to_string());
    put("m", problem.dataset.dim().to_string());
    put("loss", loss_name(config.problem.loss).into());
    put("rho", format!("{:?}", problem.model.rho()));
    put("solver", solver_name(config.solver).into());
    put("sampling", sampling_name(config.sampling).into());
    if config.solver == SolverKind::Saga {
        let conv = match config.phi_convention {
            PhiConvention::PostStep => "post-step",
            PhiConvention::PreStep => "pre-step",
        };
        put("phi_convention", conv.into());
    }
    put("epochs", config.epochs.to_string());
    put("seeds", seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
    put("delta", format!("{:?}", problem.curvature.delta));
    put("nu", format!("{:?}", problem.curvature.nu));
    put("mu", format!("{mu:?}"));
    let bound = config.bound_kind();
    put("mu_max", format!("{:?}", bound.mu_max(problem.curvature, problem.dataset.len())));
    put(
        "mu_max_source",
        match (bound, constants.is_some()) {
            (TheoremKind::SagaRr, true) => "saga-rr theorem",
            (TheoremKind::Avrg, _) => "avrg theorem",
            (TheoremKind::SagaRr, false) => "saga-rr theorem bound (no theorem for this solver/sampling)",
        }
        .into(),
    );
    if let Some(c) = constants {
        put("alpha", format!("{:?}", c.alpha));
        put("gamma", format!("{:?}", c.gamma));
        put(
            "constants",
            match c.variant {
                ConstantsVariant::Derived => "derived",
                ConstantsVariant::AsPrinted => "as-printed",
            }
            .into(),
        );
        if c.exceeds_bound {
            put("warning", "mu exceeds mu_max; the rate theorem does not apply".into());
        }
    }
    put("w_star_grad_norm", format!("{:?}", problem.reference.grad_norm));
    put("w_star_norm_sq", format!("{:?}", problem.reference.w_star.norm_sq()));
    put("risk_star", format!("{:?}", problem.reference.risk_star));
    if config.solver == SolverKind::Svrg {
        put(
            "grad_evals_note",
            "svrg counts N snapshot evaluations plus 2 per inner step (3N per epoch); the 2.5N per-epoch figure quoted for svrg is not reproduced by this accounting".into(),
        );
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(solver: SolverKind, sampling: Sampling) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            ProblemSpec::synthetic(20, 3, 1, LossKind::LogisticL2),
            solver,
            sampling,
            StepSize::MuFrac(1.0),
            3,
        );
        c.seeds = Seeds::Count { count: 4, base: 9 };
        c
    }

    #[test]
    fn averaged_rows_and_metadata() {
        let out = run_experiment(&config(SolverKind::Svrg, Sampling::Uniform)).unwrap();
        assert_eq!(out.averaged.len(), 3);
        assert_eq!(out.per_seed.len(), 4);
        assert!(out.constants.is_none());
        assert!(out.metadata.iter().any(|(k, _)| k == "grad_evals_note"));
        assert!(out.averaged.iter().all(|r| r.grad_evals == 60));
    }

    #[test]
    fn avrg_uniform_rejected() {
        let err = run_experiment(&config(SolverKind::Avrg, Sampling::Uniform)).unwrap_err();
        assert_eq!(err.to_string(), "invalid configuration: AVRG requires random reshuffling");
    }

    #[test]
    fn mu_frac_uses_solver_bound() {
        let c = config(SolverKind::Avrg, Sampling::Reshuffle);
        let p = c.problem.load().unwrap();
        let mu = c.resolve_mu(p.curvature, 20).unwrap();
        assert_eq!(mu, TheoremKind::Avrg.mu_max(p.curvature, 20));
    }
}
