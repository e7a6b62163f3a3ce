//! Replay-based checks of the history-table distribution, the second-moment identities,
//! the conditional bias of the SAGA direction under reshuffling, asymptotic unbiasedness
//! of the AVRG direction and the energy decay inequality.
//!
//! Conditioning on everything before an epoch is realized literally: a SAGA state is
//! frozen at an epoch boundary and every Monte Carlo trial replays the epoch from a
//! clone of it with a fresh permutation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::TheoremConstants;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, max_abs_diff, Weights};
use crate::model::LossModel;
use crate::sampling::{conditional_next_distribution, RngStream};
use crate::solvers::{AvrgState, EpochRecorder, EpochTrace, GradCounter, PhiConvention, SagaState, Sampling, Solver};
use crate::stats::{chi_square_test, ChiSquare};

/// A diagnostic SAGA state at the start of epoch `t ≥ 1` together with the iterates
/// `w_1, …, w_N` of epoch `t − 1`.
#[derive(Clone, Debug)]
pub struct FrozenEpochStart {
    state: SagaState,
    previous_iterates: Vec<Weights>,
    sampling: Sampling,
    mu: f64,
}

impl FrozenEpochStart {
    /// Runs `epochs ≥ 1` epochs of diagnostic post-step SAGA from zero and freezes the result.
    ///
    /// Under reshuffling the frozen history table must be a permutation of the previous
    /// epoch's iterates; this is checked exactly.
    pub fn capture(
        dataset: &Dataset,
        model: &LossModel,
        mu: f64,
        epochs: usize,
        sampling: Sampling,
        seed: u64,
    ) -> Result<Self> {
        if epochs == 0 {
            return Err(Error::invalid("freeze needs at least one completed epoch"));
        }
        let n = dataset.len();
        let mut state = SagaState::new(n, dataset.dim(), PhiConvention::PostStep, true);
        let mut rng = RngStream::new(seed);
        let mut recorder = EpochRecorder::default();
        for _ in 0..epochs {
            let order = match sampling {
                Sampling::Reshuffle => rng.random_permutation(n).into_vec(),
                Sampling::Uniform => rng.uniform_indices(n, n),
            };
            recorder.clear();
            state.run_epoch(dataset, model, &order, mu, &mut recorder)?;
        }
        let previous_iterates = recorder.iterates[1..].to_vec();
        let frozen = FrozenEpochStart { state, previous_iterates, sampling, mu };
        if sampling == Sampling::Reshuffle && !frozen.history_is_permutation_of_previous() {
            return Err(Error::invalid("history table is not a permutation of the previous epoch"));
        }
        Ok(frozen)
    }

    pub fn state(&self) -> &SagaState {
        &self.state
    }

    pub fn previous_iterates(&self) -> &[Weights] {
        &self.previous_iterates
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn history(&self) -> &[Option<Weights>] {
        self.state.history().expect("frozen states are diagnostic")
    }

    /// Multiset equality of `{φ_n}` and `{w_1^{t−1}, …, w_N^{t−1}}`, compared exactly.
    pub fn history_is_permutation_of_previous(&self) -> bool {
        let mut used = vec![false; self.previous_iterates.len()];
        self.history().iter().all(|cell| {
            let Some(phi) = cell else { return false };
            match (0..used.len()).find(|&k| !used[k] && self.previous_iterates[k] == *phi) {
                Some(k) => {
                    used[k] = true;
                    true
                }
                None => false,
            }
        })
    }

    fn require_reshuffled(&self) -> Result<()> {
        if self.sampling != Sampling::Reshuffle {
            return Err(Error::invalid("this check needs a state frozen under random reshuffling"));
        }
        Ok(())
    }

    fn require_distinct(&self) -> Result<()> {
        let prev = &self.previous_iterates;
        for a in 0..prev.len() {
            for b in a + 1..prev.len() {
                if prev[a] == prev[b] {
                    return Err(Error::invalid(format!(
                        "previous-epoch iterates {} and {} coincide; history cells cannot be identified",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn history_norm_sq(state: &SagaState) -> Result<f64> {
        let history = state.history().expect("frozen states are diagnostic");
        history
            .iter()
            .map(|c| c.as_ref().map(|w| w.norm_sq()))
            .sum::<Option<f64>>()
            .ok_or_else(|| Error::invalid("history table still holds unwritten rows"))
    }
}

/// Empirical law of the history cell about to be read, against the uniform `1/N` law.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Report {
    /// `counts[k]`: trials in which the cell held `w_{k+1}^{t−1}`.
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub chi_square: ChiSquare,
    pub trials: u64,
    /// Trials in which the cell differed from its epoch-start value (must be 0).
    pub observation3_violations: u64,
}

/// Replays `i` inner steps of the frozen epoch `trials` times and tallies which previous
/// iterate sits in the cell of the next reshuffled index `σ(i+1)`.
pub fn lemma1_check(
    frozen: &FrozenEpochStart,
    dataset: &Dataset,
    model: &LossModel,
    i: usize,
    trials: u64,
    rng: &mut RngStream,
) -> Result<Lemma1Report> {
    frozen.require_reshuffled()?;
    let n = dataset.len();
    if i >= n {
        return Err(Error::invalid(format!("inner index {i} must be below N = {n}")));
    }
    if trials < 1000 {
        return Err(Error::invalid("use at least 1000 trials"));
    }
    frozen.require_distinct()?;
    let start = frozen.history();
    let mut counts = vec![0u64; n];
    let mut violations = 0;
    let mut sink = GradCounter::default();
    for _ in 0..trials {
        let perm = rng.random_permutation(n);
        let order = perm.as_slice();
        let mut state = frozen.state.clone();
        for (k, &idx) in order[..i].iter().enumerate() {
            state.step(dataset, model, k, idx, frozen.mu, &mut sink)?;
        }
        let next = order[i];
        let cell = state.history().expect("diagnostic")[next].as_ref().expect("written");
        if Some(cell) != start[next].as_ref() {
            violations += 1;
        }
        let k = frozen
            .previous_iterates
            .iter()
            .position(|w| w == cell)
            .ok_or_else(|| Error::invalid("history cell matches no previous-epoch iterate"))?;
        counts[k] += 1;
    }
    let probs = vec![1.0 / n as f64; n];
    let chi_square = chi_square_test(&counts, &probs)?;
    let frequencies = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    Ok(Lemma1Report { counts, frequencies, chi_square, trials, observation3_violations: violations })
}

/// Monte Carlo comparison of the two sides of a second-moment identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|rhs|, ε)`
    pub rel_err: f64,
    /// Standard error of the mean per-trial difference `lhs_k − rhs_k`, relative to `|rhs|`.
    pub rel_std_err: f64,
    pub trials: u64,
}

impl MomentReport {
    fn from_sums(sum_lhs: f64, sum_rhs: f64, sum_d: f64, sum_d2: f64, trials: u64) -> Self {
        let t = trials as f64;
        let lhs = sum_lhs / t;
        let rhs = sum_rhs / t;
        let mean_d = sum_d / t;
        let var_d = if trials > 1 { ((sum_d2 / t - mean_d * mean_d) * t / (t - 1.0)).max(0.0) } else { 0.0 };
        let scale = rhs.abs().max(f64::EPSILON);
        MomentReport {
            lhs,
            rhs,
            rel_err: (lhs - rhs).abs() / scale,
            rel_std_err: libm::sqrt(var_d / t) / scale,
            trials,
        }
    }
}

/// `E Σ_n ‖φ_{i,n}‖²` against `Σ_{n'≤i} E‖w_{n'}‖² + (N−i)/N Σ ‖w_n^{t−1}‖²`, both sides
/// estimated over the same replayed permutations. `0 ≤ i ≤ N`.
pub fn lemma2_check(
    frozen: &FrozenEpochStart,
    dataset: &Dataset,
    model: &LossModel,
    i: usize,
    trials: u64,
    rng: &mut RngStream,
) -> Result<MomentReport> {
    frozen.require_reshuffled()?;
    let n = dataset.len();
    if i > n {
        return Err(Error::invalid(format!("inner index {i} exceeds N = {n}")));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let prev_sum: f64 = frozen.previous_iterates.iter().map(|w| w.norm_sq()).sum();
    let tail = (n - i) as f64 / n as f64 * prev_sum;
    let mut sums = [0.0; 4];
    let mut recorder = EpochRecorder::default();
    for _ in 0..trials {
        let perm = rng.random_permutation(n);
        let mut state = frozen.state.clone();
        recorder.clear();
        for (k, &idx) in perm.as_slice()[..i].iter().enumerate() {
            state.step(dataset, model, k, idx, frozen.mu, &mut recorder)?;
        }
        let lhs = FrozenEpochStart::history_norm_sq(&state)?;
        let current: f64 = recorder.iterates.iter().skip(1).map(|w| w.norm_sq()).sum();
        let rhs = current + tail;
        accumulate(&mut sums, lhs, rhs);
    }
    Ok(MomentReport::from_sums(sums[0], sums[1], sums[2], sums[3], trials))
}

/// One-step recursion under sampling with replacement:
/// `E Σ_n ‖φ_{i,n}‖² = E‖w_i‖² + (N−1)/N · E Σ_n ‖φ_{i−1,n}‖²`, for `1 ≤ i ≤ N`.
/// Every trial replays `i` uniform draws from the frozen state.
pub fn lemma2_with_replacement_check(
    frozen: &FrozenEpochStart,
    dataset: &Dataset,
    model: &LossModel,
    i: usize,
    trials: u64,
    rng: &mut RngStream,
) -> Result<MomentReport> {
    let n = dataset.len();
    if i == 0 || i > n {
        return Err(Error::invalid(format!("inner index {i} must lie in 1..=N")));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    FrozenEpochStart::history_norm_sq(&frozen.state)?;
    let keep = (n - 1) as f64 / n as f64;
    let mut sums = [0.0; 4];
    let mut sink = GradCounter::default();
    for _ in 0..trials {
        let mut state = frozen.state.clone();
        for k in 0..i - 1 {
            let idx = rng.uniform_index(n);
            state.step(dataset, model, k, idx, frozen.mu, &mut sink)?;
        }
        let before = FrozenEpochStart::history_norm_sq(&state)?;
        let idx = rng.uniform_index(n);
        state.step(dataset, model, i - 1, idx, frozen.mu, &mut sink)?;
        let lhs = FrozenEpochStart::history_norm_sq(&state)?;
        let rhs = state.weights().norm_sq() + keep * before;
        accumulate(&mut sums, lhs, rhs);
    }
    Ok(MomentReport::from_sums(sums[0], sums[1], sums[2], sums[3], trials))
}

fn accumulate(sums: &mut [f64; 4], lhs: f64, rhs: f64) {
    let d = lhs - rhs;
    sums[0] += lhs;
    sums[1] += rhs;
    sums[2] += d;
    sums[3] += d * d;
}

/// A diagnostic SAGA state `i` steps into an epoch, with the indices used so far.
#[derive(Clone, Debug)]
pub struct MidEpochState {
    pub state: SagaState,
    pub prefix: Vec<usize>,
}

impl MidEpochState {
    /// Runs `epochs_before` full epochs and then `i` steps of the next one.
    #[allow(clippy::too_many_arguments)]
    pub fn reach(
        dataset: &Dataset,
        model: &LossModel,
        mu: f64,
        epochs_before: usize,
        i: usize,
        sampling: Sampling,
        convention: PhiConvention,
        seed: u64,
    ) -> Result<Self> {
        let n = dataset.len();
        if i >= n {
            return Err(Error::invalid("mid-epoch index must be below N"));
        }
        let mut state = SagaState::new(n, dataset.dim(), convention, true);
        let mut rng = RngStream::new(seed);
        let mut sink = GradCounter::default();
        let draw = |rng: &mut RngStream| match sampling {
            Sampling::Reshuffle => rng.random_permutation(n).into_vec(),
            Sampling::Uniform => rng.uniform_indices(n, n),
        };
        for _ in 0..epochs_before {
            let order = draw(&mut rng);
            state.run_epoch(dataset, model, &order, mu, &mut sink)?;
        }
        let order = draw(&mut rng);
        for (k, &idx) in order[..i].iter().enumerate() {
            state.step(dataset, model, k, idx, mu, &mut sink)?;
        }
        Ok(MidEpochState { state, prefix: order[..i].to_vec() })
    }
}

/// Conditional mean of the SAGA direction by two routes, and its distance to `∇J(w_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasReport {
    /// Weighted sum of the direction over every admissible next index.
    pub enumerated_mean: Weights,
    /// Closed-form right-hand side evaluated from the history iterates.
    pub formula_value: Weights,
    pub full_gradient: Weights,
    /// Max coordinate difference between the two routes.
    pub agreement: f64,
    /// `‖enumerated_mean − ∇J(w_i)‖`
    pub bias_norm: f64,
}

/// Exact conditional expectation of the SAGA direction given the reshuffled prefix
/// `σ(1:i)`: enumerates every unused index with weight `1/(N−i)` and compares with
/// `1/(N−i) Σ_{n∉prefix} (∇Q(w_i;x_n) − ∇Q(φ_{i,n};x_n)) + (1/N) Σ_n ∇Q(φ_{i,n};x_n)`.
pub fn bias_identity_check(state: &SagaState, prefix: &[usize], dataset: &Dataset, model: &LossModel) -> Result<BiasReport> {
    let n = dataset.len();
    let probs = conditional_next_distribution(prefix, n)?;
    let history = history_gradients(state, dataset, model)?;
    let w = state.weights();
    let dim = dataset.dim();

    let mut enumerated = Weights::zeros(dim);
    for (idx, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            let est = state.gradient_estimate(model, dataset, w, idx)?;
            axpy(&mut enumerated, p, &est);
        }
    }

    let remaining = (n - prefix.len()) as f64;
    let mut formula = Weights::zeros(dim);
    let mut g = Weights::zeros(dim);
    for (idx, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            model.grad_into(w, dataset.sample(idx), &mut g);
            axpy(&mut g, -1.0, &history[idx]);
            axpy(&mut formula, 1.0 / remaining, &g);
        }
    }
    for h in &history {
        axpy(&mut formula, 1.0 / n as f64, h);
    }
    finish_bias_report(enumerated, formula, model.full_grad(w, dataset)?)
}

/// With-replacement counterpart: the direction averaged over all `N` indices with equal
/// weight must reproduce `∇J(w_i)` exactly.
pub fn uniform_unbiasedness_check(state: &SagaState, dataset: &Dataset, model: &LossModel) -> Result<BiasReport> {
    let n = dataset.len();
    let w = state.weights();
    let mut enumerated = Weights::zeros(dataset.dim());
    for idx in 0..n {
        let est = state.gradient_estimate(model, dataset, w, idx)?;
        axpy(&mut enumerated, 1.0 / n as f64, &est);
    }
    let full = model.full_grad(w, dataset)?;
    finish_bias_report(enumerated, full.clone(), full)
}

fn history_gradients(state: &SagaState, dataset: &Dataset, model: &LossModel) -> Result<Vec<Weights>> {
    (0..dataset.len())
        .map(|idx| {
            state
                .history_gradient(model, dataset, idx)
                .ok_or_else(|| Error::invalid("bias check needs a diagnostic SAGA state"))
        })
        .collect()
}

fn finish_bias_report(enumerated_mean: Weights, formula_value: Weights, full_gradient: Weights) -> Result<BiasReport> {
    let agreement = max_abs_diff(&enumerated_mean, &formula_value);
    let bias_norm = libm::sqrt(enumerated_mean.dist_sq(&full_gradient));
    Ok(BiasReport { enumerated_mean, formula_value, full_gradient, agreement, bias_norm })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The precondition never held, so nothing was checked.
    Inconclusive,
}

/// Start-of-epoch AVRG state and the epoch's iterates `w_0, …, w_N`.
#[derive(Clone, Debug)]
pub struct AvrgEpochRecord {
    pub snapshot: Weights,
    pub g_current: Weights,
    pub order: Vec<usize>,
    pub iterates: Vec<Weights>,
}

#[derive(Clone, Debug, Default)]
pub struct AvrgTranscript {
    pub epochs: Vec<AvrgEpochRecord>,
}

/// Runs AVRG from zero under reshuffling and records every epoch.
pub fn record_avrg(dataset: &Dataset, model: &LossModel, mu: f64, epochs: usize, seed: u64) -> Result<AvrgTranscript> {
    let n = dataset.len();
    let mut state = AvrgState::new(dataset.dim());
    let mut rng = RngStream::new(seed);
    let mut recorder = EpochRecorder::default();
    let mut out = AvrgTranscript::default();
    for _ in 0..epochs {
        let snapshot = state.snapshot().clone();
        let g_current = state.g_current().clone();
        let order = rng.random_permutation(n).into_vec();
        recorder.clear();
        state.run_epoch(dataset, model, &order, mu, &mut recorder)?;
        out.epochs.push(AvrgEpochRecord { snapshot, g_current, order, iterates: core::mem::take(&mut recorder.iterates) });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnbiasednessReport {
    pub status: CheckStatus,
    /// Inner steps whose neighbourhood precondition held.
    pub checked_steps: usize,
    /// `max ‖ĝ_n(w_i) − ∇J(w*)‖ / (3δε)` over all checked steps and indices.
    pub worst_ratio: f64,
}

/// For every inner step of epochs `t ≥ 1` where `w_i^t`, `w_0^t` and the previous epoch's
/// `w_0^{t−1}, …, w_{N−1}^{t−1}` all lie within `eps` of `w_star`, checks
/// `‖ĝ_n(w_i^t) − ∇J(w_star)‖ ≤ 3·delta·eps` for every sample `n`.
pub fn asymptotic_unbiasedness_check(
    transcript: &AvrgTranscript,
    dataset: &Dataset,
    model: &LossModel,
    w_star: &[f64],
    delta: f64,
    eps: f64,
) -> Result<UnbiasednessReport> {
    if !(eps > 0.0 && delta > 0.0) {
        return Err(Error::invalid("eps and delta must be positive"));
    }
    let n = dataset.len();
    let bound = 3.0 * delta * eps;
    let grad_star = model.full_grad(w_star, dataset)?;
    let near = |w: &Weights| libm::sqrt(w.dist_sq(w_star)) <= eps;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for pair in transcript.epochs.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if prev.iterates.len() != n + 1 || cur.iterates.len() != n + 1 {
            return Err(Error::invalid("transcript epoch has the wrong number of iterates"));
        }
        if !prev.iterates[..n].iter().all(near) || !near(&cur.iterates[0]) {
            continue;
        }
        let state = AvrgState::from_parts(cur.iterates[0].clone(), cur.snapshot.clone(), cur.g_current.clone(), 0)?;
        for w in cur.iterates[..n].iter().filter(|w| near(w)) {
            checked += 1;
            for idx in 0..n {
                let est = state.gradient_estimate(model, dataset, w, idx)?;
                worst = worst.max(libm::sqrt(est.dist_sq(&grad_star)) / bound);
            }
        }
    }
    let status = if checked == 0 {
        CheckStatus::Inconclusive
    } else if worst <= 1.0 {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(UnbiasednessReport { status, checked_steps: checked, worst_ratio: worst })
}

/// Minimum number of independent runs behind a decay check.
pub const MIN_DECAY_SEEDS: usize = 100;
/// Ratios are only judged while `V_t` exceeds this multiple of `ε·V_0`.
pub const ZERO_ENERGY_FLOOR: f64 = 1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub energies: Vec<f64>,
    /// Seed-averaged `E‖w_0^t − w*‖²`.
    pub mse: Vec<f64>,
    /// `V_{t+1}/V_t`, `None` below the zero-energy floor.
    pub ratios: Vec<Option<f64>>,
    pub max_ratio: f64,
    /// `max_t E‖w_0^t − w*‖² / (α^t V_0)` over epochs above the floor.
    pub envelope_max: f64,
    pub alpha: f64,
    pub ratio_slack: f64,
    pub envelope_slack: f64,
    /// `false` when the step size exceeds the theorem bound; no verdict is given then.
    pub in_hypothesis: bool,
    pub pass: Option<bool>,
}

/// Energy contraction `V_{t+1} ≤ α V_t` (up to `ratio_slack`) and the envelope
/// `E‖w̃_0^t‖² ≤ α^t V_0` (up to `envelope_slack`) on seed-averaged diagnostic traces.
pub fn decay_check(
    seeds: &[Vec<EpochTrace>],
    constants: &TheoremConstants,
    w_star_norm_sq: f64,
    ratio_slack: f64,
    envelope_slack: f64,
) -> Result<DecayReport> {
    if seeds.len() < MIN_DECAY_SEEDS {
        return Err(Error::invalid(format!(
            "decay check needs at least {MIN_DECAY_SEEDS} seeds, got {}",
            seeds.len()
        )));
    }
    let coefficient = constants.kind.energy_coefficient();
    let energies = crate::analysis::energy(seeds, constants.gamma, coefficient, w_star_norm_sq)?;
    let avg = crate::analysis::average_traces(seeds)?;
    let mse: Vec<f64> = avg.iter().map(|r| r.rel_mse * w_star_norm_sq).collect();
    let v0 = energies.first().copied().unwrap_or(0.0);
    let floor = ZERO_ENERGY_FLOOR * f64::EPSILON * v0;
    let alpha = constants.alpha;

    let ratios: Vec<Option<f64>> = energies
        .windows(2)
        .map(|v| (v[0] > floor).then(|| v[1] / v[0]))
        .collect();
    let max_ratio = ratios.iter().flatten().copied().fold(0.0, f64::max);
    let mut envelope_max: f64 = 0.0;
    let mut alpha_pow = 1.0;
    for (t, &m) in mse.iter().enumerate() {
        if energies[t] > floor && v0 > 0.0 {
            envelope_max = envelope_max.max(m / (alpha_pow * v0));
        }
        alpha_pow *= alpha;
    }
    let in_hypothesis = !constants.exceeds_bound;
    let pass = in_hypothesis.then_some(max_ratio <= alpha * ratio_slack && envelope_max <= envelope_slack);
    Ok(DecayReport {
        energies,
        mse,
        ratios,
        max_ratio,
        envelope_max,
        alpha,
        ratio_slack,
        envelope_slack,
        in_hypothesis,
        pass,
    })
}

/// Small fixed problems shared by the command line and the test suites.
pub mod scenario {
    use super::*;
    use crate::data::synth_logistic;
    use crate::model::LossKind;

    /// Feature dimension of the lemma toys.
    pub const TOY_DIM: usize = 3;
    /// Epochs completed before a lemma toy is frozen.
    pub const TOY_FREEZE_EPOCHS: usize = 2;

    /// Unit-normalized synthetic data of size `n` with `ρ = 1/n`.
    pub fn toy_problem(n: usize, kind: LossKind, data_seed: u64) -> Result<(Dataset, LossModel)> {
        let dataset = synth_logistic(n, TOY_DIM, data_seed)?;
        let model = LossModel::new(kind, 1.0 / n as f64)?;
        Ok((dataset, model))
    }

    /// Step size for lemma toys: `1/(4δ)`, large enough that iterates stay distinct.
    pub fn toy_step(dataset: &Dataset, model: &LossModel) -> Result<f64> {
        Ok(0.25 / model.curvature(dataset)?.delta)
    }

    /// Toy problem frozen at the start of epoch [`TOY_FREEZE_EPOCHS`].
    pub fn frozen_toy(n: usize, kind: LossKind, sampling: Sampling, seed: u64) -> Result<(Dataset, LossModel, FrozenEpochStart)> {
        let (dataset, model) = toy_problem(n, kind, seed)?;
        let mu = toy_step(&dataset, &model)?;
        let frozen = FrozenEpochStart::capture(&dataset, &model, mu, TOY_FREEZE_EPOCHS, sampling, seed)?;
        Ok((dataset, model, frozen))
    }
}
