//! Reference minimizer, convergence metrics, rate constants and the energy function.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, cholesky_solve, dot, Weights};
use crate::model::{CurvatureConstants, LossKind, LossModel};
use crate::solvers::{EpochTrace, Sampling, SolverKind};

/// Deterministically computed minimizer of `J`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub w_star: Weights,
    /// `J(w*)`
    pub risk_star: f64,
    /// Achieved `‖∇J(w*)‖`.
    pub grad_norm: f64,
    /// Requested gradient-norm tolerance.
    pub tol: f64,
}

const REFERENCE_MAX_ITER: usize = 200_000;

/// Minimizes `J` to `‖∇J‖ ≤ tol`.
///
/// Quadratic losses solve `(ρI + (1/N)Σ hhᵀ) w = (1/N)Σ γh` by Cholesky. Logistic losses
/// run full-gradient descent from zero with a backtracking step that never drops below
/// `1/δ`, the step guaranteed to decrease `J`.
pub fn reference_minimizer(model: &LossModel, dataset: &Dataset, tol: f64) -> Result<ReferenceSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tolerance must be > 0"));
    }
    let w_star = match model.kind() {
        LossKind::QuadraticL2 => solve_normal_equations(model, dataset)?,
        LossKind::LogisticL2 => gradient_descent(model, dataset, tol)?,
    };
    let grad_norm = model.full_grad(&w_star, dataset)?.norm();
    if grad_norm > tol {
        return Err(Error::ConvergenceFailure { iterations: 0, achieved: grad_norm });
    }
    let risk_star = model.full_risk(&w_star, dataset)?;
    Ok(ReferenceSolution { w_star, risk_star, grad_norm, tol })
}

fn solve_normal_equations(model: &LossModel, dataset: &Dataset) -> Result<Weights> {
    let m = dataset.dim();
    let inv_n = 1.0 / dataset.len() as f64;
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for s in dataset.samples() {
        let h = s.features();
        for i in 0..m {
            b[i] += inv_n * s.target() * h[i];
            for j in 0..m {
                a[i * m + j] += inv_n * h[i] * h[j];
            }
        }
    }
    for i in 0..m {
        a[i * m + i] += model.rho();
    }
    Ok(Weights::from_vec(cholesky_solve(&a, &b, m)?))
}

fn gradient_descent(model: &LossModel, dataset: &Dataset, tol: f64) -> Result<Weights> {
    let curvature = model.curvature(dataset)?;
    let safe_step = 1.0 / curvature.delta;
    let mut w = Weights::zeros(dataset.dim());
    let mut step = safe_step;
    let mut risk = model.full_risk(&w, dataset)?;
    for _ in 0..REFERENCE_MAX_ITER {
        let g = model.full_grad(&w, dataset)?;
        let g_sq = g.norm_sq();
        if libm::sqrt(g_sq) <= tol {
            return Ok(w);
        }
        step = (2.0 * step).min(64.0 * safe_step);
        loop {
            let mut trial = w.clone();
            trial.axpy(-step, &g);
            let trial_risk = model.full_risk(&trial, dataset)?;
            if trial_risk <= risk - 0.5 * step * g_sq || step <= safe_step {
                w = trial;
                risk = trial_risk;
                break;
            }
            step = (0.5 * step).max(safe_step);
        }
    }
    let achieved = model.full_grad(&w, dataset)?.norm();
    Err(Error::ConvergenceFailure { iterations: REFERENCE_MAX_ITER, achieved })
}

/// `‖w − w*‖² / ‖w*‖²`
pub fn relative_mse(w: &[f64], reference: &ReferenceSolution) -> Result<f64> {
    let denom = reference.w_star.norm_sq();
    if denom == 0.0 {
        return Err(Error::invalid("relative error is undefined for w* = 0"));
    }
    if w.len() != reference.w_star.len() {
        return Err(Error::invalid("weight dimension does not match reference"));
    }
    Ok(reference.w_star.dist_sq(w) / denom)
}

/// `J(w) − J(w*)`, reported as exactly 0 when within `10·tol·(1 + |J(w*)|)` of zero.
pub fn excess_risk(model: &LossModel, dataset: &Dataset, w: &[f64], reference: &ReferenceSolution) -> Result<f64> {
    let value = model.full_risk(w, dataset)? - reference.risk_star;
    let floor = 10.0 * reference.tol * (1.0 + reference.risk_star.abs());
    Ok(if value.abs() <= floor { 0.0 } else { value })
}

/// Which linear-convergence theorem a configuration falls under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremKind {
    SagaRr,
    Avrg,
}

impl TheoremKind {
    pub fn for_solver(solver: SolverKind, sampling: Sampling) -> Option<Self> {
        match (solver, sampling) {
            (SolverKind::Saga, Sampling::Reshuffle) => Some(TheoremKind::SagaRr),
            (SolverKind::Avrg, Sampling::Reshuffle) => Some(TheoremKind::Avrg),
            _ => None,
        }
    }

    /// Weight on the inner-difference terms of the energy, in units of `γ`.
    pub fn energy_coefficient(self) -> f64 {
        match self {
            TheoremKind::SagaRr => 11.0 / 16.0,
            TheoremKind::Avrg => 13.0 / 16.0,
        }
    }

    /// Largest step size the theorem covers: `ν/(11δ²N)` or `ν/(9δ²N)`.
    pub fn mu_max(self, curvature: CurvatureConstants, n: usize) -> f64 {
        let denom = match self {
            TheoremKind::SagaRr => 11.0,
            TheoremKind::Avrg => 9.0,
        };
        curvature.nu / (denom * curvature.delta * curvature.delta * n as f64)
    }
}

/// Two readings of the rate constants exist. `Derived` uses `γ = cμNδ²/ν` and `δ⁴` in
/// both rate denominators, as the proof chain requires; `AsPrinted` uses `γ = cμδN` and
/// `δ³` in the AVRG denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ConstantsVariant {
    #[default]
    Derived,
    AsPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremConstants {
    pub kind: TheoremKind,
    pub variant: ConstantsVariant,
    pub mu: f64,
    pub mu_max: f64,
    pub gamma: f64,
    /// Per-epoch contraction factor of the energy.
    pub alpha: f64,
    /// `mu > mu_max`: constants are still reported but the theorem says nothing.
    pub exceeds_bound: bool,
}

pub fn theorem_constants(
    kind: TheoremKind,
    mu: f64,
    curvature: CurvatureConstants,
    n: usize,
    variant: ConstantsVariant,
) -> Result<TheoremConstants> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("step size must be > 0, got {mu}")));
    }
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let CurvatureConstants { delta, nu } = curvature;
    let nf = n as f64;
    let mu_max = kind.mu_max(curvature, n);
    let gamma_factor = match kind {
        TheoremKind::SagaRr => 9.0,
        TheoremKind::Avrg => 6.0,
    };
    let gamma = match variant {
        ConstantsVariant::Derived => gamma_factor * mu * nf * delta * delta / nu,
        ConstantsVariant::AsPrinted => gamma_factor * mu * delta * nf,
    };
    let (coeff, delta_pow) = match (kind, variant) {
        (TheoremKind::SagaRr, _) => (27.0, libm::pow(delta, 4.0)),
        (TheoremKind::Avrg, ConstantsVariant::Derived) => (18.0, libm::pow(delta, 4.0)),
        (TheoremKind::Avrg, ConstantsVariant::AsPrinted) => (18.0, libm::pow(delta, 3.0)),
    };
    let mu_n = mu * nf;
    let alpha = (1.0 - mu_n * nu / 4.0) / (1.0 - coeff * delta_pow * mu_n * mu_n * mu_n / nu);
    Ok(TheoremConstants { kind, variant, mu, mu_max, gamma, alpha, exceeds_bound: mu > mu_max })
}

/// Index range of the inner-difference sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DifferenceConvention {
    /// `i = 1, …, N−1` (SAGA analysis).
    Interior,
    /// `i = 0, …, N−1` (AVRG analysis).
    FullRange,
}

/// Forward and backward inner differences of one epoch transcript `w_0, …, w_N`:
/// `a² = (1/N) Σ ‖w_i − w_0‖²` and `b² = (1/N) Σ ‖w_N − w_i‖²`.
pub fn inner_differences(transcript: &[Weights], convention: DifferenceConvention) -> Result<(f64, f64)> {
    if transcript.len() < 2 {
        return Err(Error::invalid("transcript needs at least w_0 and w_1"));
    }
    let n = transcript.len() - 1;
    let first = &transcript[0];
    let last = &transcript[n];
    let start = match convention {
        DifferenceConvention::Interior => 1,
        DifferenceConvention::FullRange => 0,
    };
    let (mut a, mut b) = (0.0, 0.0);
    for w in &transcript[start..n] {
        a += w.dist_sq(first);
        b += w.dist_sq(last);
    }
    Ok((a / n as f64, b / n as f64))
}

/// Seed-averaged trace: every numeric column is the arithmetic mean across seeds, summed
/// in seed order. Optional columns stay `None` unless every seed carries them.
pub fn average_traces(seeds: &[Vec<EpochTrace>]) -> Result<Vec<EpochTrace>> {
    let first = seeds.first().ok_or_else(|| Error::invalid("no traces to average"))?;
    let len = first.len();
    if seeds.iter().any(|s| s.len() != len) {
        return Err(Error::invalid("traces differ in length"));
    }
    let count = seeds.len() as f64;
    let mean_opt = |t: usize, f: fn(&EpochTrace) -> Option<f64>| -> Option<f64> {
        let mut sum = 0.0;
        for s in seeds {
            sum += f(&s[t])?;
        }
        Some(sum / count)
    };
    Ok((0..len)
        .map(|t| EpochTrace {
            epoch: first[t].epoch,
            rel_mse: seeds.iter().map(|s| s[t].rel_mse).sum::<f64>() / count,
            excess_risk: seeds.iter().map(|s| s[t].excess_risk).sum::<f64>() / count,
            grad_evals: (seeds.iter().map(|s| u128::from(s[t].grad_evals)).sum::<u128>() / seeds.len() as u128) as u64,
            a_sq: mean_opt(t, |r| r.a_sq),
            b_sq: mean_opt(t, |r| r.b_sq),
            energy: mean_opt(t, |r| r.energy),
        })
        .collect())
}

/// Seed-averaged energy `V_t = E‖w_0^t − w*‖² + weight·(E a_t² + E b_{t−1}²)`, with
/// `weight = coefficient·γ` and `b_{−1}² = 0`. `E‖w_0^t − w*‖²` is recovered from the
/// relative error as `rel_mse·‖w*‖²`.
pub fn energy(seeds: &[Vec<EpochTrace>], gamma: f64, coefficient: f64, w_star_norm_sq: f64) -> Result<Vec<f64>> {
    if seeds.iter().flatten().any(|r| r.a_sq.is_none() || r.b_sq.is_none()) {
        return Err(Error::invalid("energy needs diagnostic traces with inner differences"));
    }
    let avg = average_traces(seeds)?;
    let weight = coefficient * gamma;
    let mut prev_b = 0.0;
    Ok(avg
        .iter()
        .map(|row| {
            let (a, b) = (row.a_sq.unwrap_or(0.0), row.b_sq.unwrap_or(0.0));
            let v = row.rel_mse * w_star_norm_sq + weight * (a + prev_b);
            prev_b = b;
            v
        })
        .collect())
}

/// `‖∇J(w)‖` helper used by tests and reports.
pub fn gradient_norm(model: &LossModel, dataset: &Dataset, w: &[f64]) -> Result<f64> {
    Ok(model.full_grad(w, dataset)?.norm())
}

/// Residual `‖(ρI + (1/N)Σhhᵀ) w − (1/N)Σγh‖` of the quadratic normal equations.
pub fn normal_equation_residual(model: &LossModel, dataset: &Dataset, w: &[f64]) -> f64 {
    let m = dataset.dim();
    let inv_n = 1.0 / dataset.len() as f64;
    let mut r = Weights::zeros(m);
    axpy(&mut r, model.rho(), w);
    for s in dataset.samples() {
        let h = s.features();
        let c = inv_n * (dot(h, w) - s.target());
        axpy(&mut r, c, h);
    }
    r.norm()
}
