//! Verification sweeps shared by the `verify` subcommands and the acceptance suite.

use rrvr_core::analysis::TheoremKind;
use rrvr_core::sampling::run_seed;
use rrvr_core::solvers::{PhiConvention, Sampling, SolverKind};
use rrvr_core::verify::scenario::{toy_problem, toy_step};
use rrvr_core::verify::{bias_identity_check, decay_check, uniform_unbiasedness_check, DecayReport, MidEpochState};
use rrvr_core::{LossKind, RngStream};

use crate::error::{Error, Result};
use crate::experiment::{run_on, ExperimentConfig, Outcome, ProblemSpec, Seeds, StepSize};

/// Extremes over a batch of randomly reached mid-epoch SAGA states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasSweep {
    pub states: usize,
    /// Worst disagreement between enumeration and the closed form under reshuffling.
    pub max_rr_agreement: f64,
    /// Worst distance between the all-index average and `∇J(w_i)`, over reshuffled and
    /// uniformly reached states.
    pub max_uniform_agreement: f64,
    pub min_rr_bias: f64,
    pub max_rr_bias: f64,
}

/// Reaches `states` mid-epoch states on an `n`-sample toy, each after 1 to 3 full epochs
/// and a random number of inner steps, and checks both bias identities on each.
pub fn bias_sweep(n: usize, loss: LossKind, states: usize, seed: u64) -> Result<BiasSweep> {
    if n < 2 {
        return Err(Error::Config("bias sweep needs N >= 2".into()));
    }
    let (ds, model) = toy_problem(n, loss, seed)?;
    let mu = toy_step(&ds, &model)?;
    let mut rng = RngStream::new(seed);
    let mut sweep = BiasSweep {
        states,
        max_rr_agreement: 0.0,
        max_uniform_agreement: 0.0,
        min_rr_bias: f64::INFINITY,
        max_rr_bias: 0.0,
    };
    for k in 0..states {
        let epochs_before = 1 + rng.uniform_index(3);
        let i = 1 + rng.uniform_index(n - 1);
        let state_seed = run_seed(seed, k as u64);
        let rr = MidEpochState::reach(&ds, &model, mu, epochs_before, i, Sampling::Reshuffle, PhiConvention::PostStep, state_seed)?;
        let r = bias_identity_check(&rr.state, &rr.prefix, &ds, &model)?;
        sweep.max_rr_agreement = sweep.max_rr_agreement.max(r.agreement);
        sweep.min_rr_bias = sweep.min_rr_bias.min(r.bias_norm);
        sweep.max_rr_bias = sweep.max_rr_bias.max(r.bias_norm);

        let uni = MidEpochState::reach(&ds, &model, mu, epochs_before, i, Sampling::Uniform, PhiConvention::PostStep, state_seed)?;
        for state in [&rr.state, &uni.state] {
            let u = uniform_unbiasedness_check(state, &ds, &model)?;
            sweep.max_uniform_agreement = sweep.max_uniform_agreement.max(u.agreement);
        }
    }
    Ok(sweep)
}

/// Diagnostic multi-seed run at `mu_frac` of the theorem bound followed by the decay check.
pub fn decay_experiment(
    problem: &ProblemSpec,
    kind: TheoremKind,
    mu_frac: f64,
    seeds: Seeds,
    epochs: usize,
    ratio_slack: f64,
    envelope_slack: f64,
) -> Result<(Outcome, DecayReport)> {
    let solver = match kind {
        TheoremKind::SagaRr => SolverKind::Saga,
        TheoremKind::Avrg => SolverKind::Avrg,
    };
    let mut config = ExperimentConfig::new(problem.clone(), solver, Sampling::Reshuffle, StepSize::MuFrac(mu_frac), epochs);
    config.seeds = seeds;
    config.diagnostic = true;
    let loaded = problem.load()?;
    let outcome = run_on(&config, &loaded)?;
    let constants = outcome.constants.expect("reshuffled saga/avrg always has a theorem");
    let report = decay_check(&outcome.per_seed, &constants, loaded.reference.w_star.norm_sq(), ratio_slack, envelope_slack)?;
    Ok((outcome, report))
}
