//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rrvr::checks::{bias_sweep, decay_experiment};
use rrvr::experiment::{run_on, ExperimentConfig, ProblemSpec, Seeds, StepSize};
use rrvr::trace::write_trace;
use rrvr_core::analysis::{reference_minimizer, TheoremKind};
use rrvr_core::solvers::{AvrgState, GradCounter, PhiConvention, SagaState, Sampling, Solver, SolverKind};
use rrvr_core::verify::scenario::frozen_toy;
use rrvr_core::verify::{lemma1_check, lemma2_check};
use rrvr_core::{Dataset, LossKind, LossModel, RngStream, Sample, Weights};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn within(elapsed: Duration, limit_secs: u64, detail: String, ok: bool) -> Verdict {
    let detail = format!("{detail}; {:.1}s of {limit_secs}s", elapsed.as_secs_f64());
    if ok && elapsed <= Duration::from_secs(limit_secs) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lemma1_uniformity() -> Verdict {
    let t = Instant::now();
    let (ds, model, frozen) = frozen_toy(8, LossKind::LogisticL2, Sampling::Reshuffle, 7).map_err(|e| e.to_string())?;
    let r = lemma1_check(&frozen, &ds, &model, 3, 20_000, &mut RngStream::for_run(7, 0)).map_err(|e| e.to_string())?;
    let ok = r.chi_square.p_value > 0.001 && r.observation3_violations == 0;
    within(t.elapsed(), 30, format!("p = {:.4} (dof {})", r.chi_square.p_value, r.chi_square.dof), ok)
}

fn lemma2_identity() -> Verdict {
    let t = Instant::now();
    let (ds, model, frozen) = frozen_toy(8, LossKind::QuadraticL2, Sampling::Reshuffle, 7).map_err(|e| e.to_string())?;
    let mut rng = RngStream::for_run(7, 0);
    let mut parts = Vec::new();
    let mut ok = true;
    for i in [1, 4, 7] {
        let r = lemma2_check(&frozen, &ds, &model, i, 50_000, &mut rng).map_err(|e| e.to_string())?;
        ok &= r.rel_err <= 0.02;
        parts.push(format!("i={i}: {:.2e}", r.rel_err));
    }
    for i in [0, 8] {
        let r = lemma2_check(&frozen, &ds, &model, i, 1_000, &mut rng).map_err(|e| e.to_string())?;
        ok &= r.rel_err <= 1e-12;
        parts.push(format!("i={i}: {:.1e}", r.rel_err));
    }
    within(t.elapsed(), 60, format!("rel_err {}", parts.join(", ")), ok)
}

fn bias_formula() -> Verdict {
    let t = Instant::now();
    let s = bias_sweep(10, LossKind::LogisticL2, 50, 7).map_err(|e| e.to_string())?;
    let ok = s.max_rr_agreement <= 1e-12 && s.max_uniform_agreement <= 1e-12;
    let detail = format!(
        "{} states, formula gap {:.1e}, uniform gap {:.1e}, bias norm {:.2e}..{:.2e}",
        s.states, s.max_rr_agreement, s.max_uniform_agreement, s.min_rr_bias, s.max_rr_bias
    );
    within(t.elapsed(), 10, detail, ok)
}

fn decay(kind: TheoremKind) -> Verdict {
    let t = Instant::now();
    let problem = ProblemSpec::synthetic(50, 5, 0, LossKind::LogisticL2);
    let seeds = Seeds::Count { count: 100, base: 0 };
    let (_, r) = decay_experiment(&problem, kind, 1.0, seeds, 200, 1.05, 1.10).map_err(|e| e.to_string())?;
    let detail = format!(
        "alpha = {:.8}, max V ratio = {:.8} (bound {:.8}), envelope {:.4} (bound 1.10)",
        r.alpha,
        r.max_ratio,
        r.alpha * 1.05,
        r.envelope_max
    );
    within(t.elapsed(), 300, detail, r.pass == Some(true))
}

fn gradient_accounting() -> Verdict {
    let problem = ProblemSpec::synthetic(30, 4, 1, LossKind::LogisticL2).load().map_err(|e| e.to_string())?;
    let n = 30;
    let cases = [
        (SolverKind::Avrg, Sampling::Reshuffle, PhiConvention::PostStep, 2 * n),
        (SolverKind::Saga, Sampling::Reshuffle, PhiConvention::PreStep, n),
        (SolverKind::Saga, Sampling::Uniform, PhiConvention::PreStep, n),
        (SolverKind::Svrg, Sampling::Reshuffle, PhiConvention::PostStep, 3 * n),
        (SolverKind::Svrg, Sampling::Uniform, PhiConvention::PostStep, 3 * n),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (solver, sampling, conv, expect) in cases {
        let mut c = ExperimentConfig::new(ProblemSpec::synthetic(30, 4, 1, LossKind::LogisticL2), solver, sampling, StepSize::MuFrac(1.0), 5);
        c.phi_convention = conv;
        c.seeds = Seeds::Count { count: 3, base: 0 };
        let out = run_on(&c, &problem).map_err(|e| e.to_string())?;
        let exact = out.per_seed.iter().flatten().all(|r| r.grad_evals == expect);
        let noted = solver != SolverKind::Svrg || out.metadata.iter().any(|(k, v)| k == "grad_evals_note" && v.contains("3N"));
        ok &= exact && noted;
        parts.push(format!("{solver:?}/{sampling:?}={}", out.averaged[0].grad_evals));
    }
    let detail = format!("N = {n}: {}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rr_advantage() -> Verdict {
    let problem = ProblemSpec::synthetic(200, 10, 0, LossKind::LogisticL2).load().map_err(|e| e.to_string())?;
    let seeds: Vec<u64> = (0..20).collect();
    let tuned = |sampling: Sampling| -> Result<(f64, Vec<f64>), String> {
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for k in 0..=6 {
            let mut c = ExperimentConfig::new(
                ProblemSpec::synthetic(200, 10, 0, LossKind::LogisticL2),
                SolverKind::Saga,
                sampling,
                StepSize::MuFrac(f64::from(1u32 << k)),
                31,
            );
            c.seeds = Seeds::List(seeds.clone());
            let out = run_on(&c, &problem).map_err(|e| e.to_string())?;
            let finals: Vec<f64> = out.per_seed.iter().map(|t| t[30].rel_mse).collect();
            let mean = out.averaged[30].rel_mse;
            if best.as_ref().is_none_or(|b| mean < b.1) {
                best = Some((f64::from(1u32 << k), mean, finals));
            }
        }
        let (frac, _, finals) = best.unwrap();
        Ok((frac, finals))
    };
    let (rr_frac, rr) = tuned(Sampling::Reshuffle)?;
    let (uni_frac, uni) = tuned(Sampling::Uniform)?;
    let wins = rr.iter().zip(&uni).filter(|(a, b)| a < b).count();
    let detail = format!(
        "RR wins {wins}/20 pairs (mu = {rr_frac}x vs {uni_frac}x mu_max; median rel_mse {:.2e} vs {:.2e})",
        median(&rr),
        median(&uni)
    );
    if wins * 100 >= 80 * 20 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

fn degenerate_equivalences() -> Verdict {
    let ds = Dataset::new(vec![Sample::new(vec![0.6, -0.8], 1).unwrap()]).unwrap();
    let model = LossModel::new(LossKind::LogisticL2, 1.0).unwrap();
    let mu = 0.4;
    let mut saga = SagaState::new(1, 2, PhiConvention::PostStep, false);
    let mut avrg = AvrgState::new(2);
    let (mut exact, mut lagged, mut lag_grad) = (Weights::zeros(2), Weights::zeros(2), Weights::zeros(2));
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        saga.run_epoch(&ds, &model, &[0], mu, &mut GradCounter::default()).map_err(|e| e.to_string())?;
        avrg.run_epoch(&ds, &model, &[0], mu, &mut GradCounter::default()).map_err(|e| e.to_string())?;
        let g = model.sample_grad(&exact, ds.sample(0)).unwrap();
        exact.axpy(-mu, &g);
        let g_now = model.sample_grad(&lagged, ds.sample(0)).unwrap();
        lagged.axpy(-mu, &lag_grad);
        lag_grad = g_now;
        for k in 0..2 {
            worst = worst.max((saga.weights()[k] - exact[k]).abs()).max((avrg.weights()[k] - lagged[k]).abs());
        }
    }
    let detail = format!("max coordinate gap {worst:.1e} over 50 epochs");
    if worst <= 1e-15 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn newton(ds: &Dataset, rho: f64) -> DVector<f64> {
    let n = ds.len() as f64;
    let mut w = DVector::zeros(ds.dim());
    for _ in 0..100 {
        let mut g = &w * rho;
        let mut h = DMatrix::identity(ds.dim(), ds.dim()) * rho;
        for s in ds.samples() {
            let x = DVector::from_column_slice(s.features());
            let y = s.target();
            let p = 1.0 / (1.0 + (y * x.dot(&w)).exp());
            g -= &x * (y * p / n);
            h += &x * x.transpose() * (p * (1.0 - p) / n);
        }
        if g.norm() < 1e-15 {
            break;
        }
        w -= h.cholesky().unwrap().solve(&g);
    }
    w
}

fn numerical_hygiene() -> Verdict {
    let ds = rrvr_core::data::synth_logistic(50, 5, 0).unwrap();
    let mut rng = RngStream::new(3);
    let mut worst_fd: f64 = 0.0;
    for probe in 0..100 {
        let kind = if probe % 2 == 0 { LossKind::LogisticL2 } else { LossKind::QuadraticL2 };
        let model = LossModel::new(kind, 0.02).unwrap();
        let w: Vec<f64> = (0..5).map(|_| 4.0 * rng.next_f64() - 2.0).collect();
        let s = ds.sample(probe % 50);
        let g = model.sample_grad(&w, s).unwrap();
        let mut num = 0.0;
        let mut den: f64 = 0.0;
        for k in 0..5 {
            let (mut p, mut m) = (w.clone(), w.clone());
            p[k] += 1e-6;
            m[k] -= 1e-6;
            let fd = (model.sample_loss(&p, s).unwrap() - model.sample_loss(&m, s).unwrap()) / 2e-6;
            num += (fd - g[k]) * (fd - g[k]);
            den += fd * fd;
        }
        worst_fd = worst_fd.max(num.sqrt() / den.sqrt().max(1e-3));
    }

    let model = LossModel::new(LossKind::LogisticL2, 1.0 / 50.0).unwrap();
    let r = reference_minimizer(&model, &ds, 1e-12).map_err(|e| e.to_string())?;
    let oracle = newton(&ds, 1.0 / 50.0);
    let gap = r.w_star.iter().zip(oracle.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();

    let trace_bytes = || -> Result<Vec<u8>, String> {
        let mut c = ExperimentConfig::new(
            ProblemSpec::synthetic(50, 5, 0, LossKind::LogisticL2),
            SolverKind::Avrg,
            Sampling::Reshuffle,
            StepSize::MuFrac(1.0),
            50,
        );
        c.seeds = Seeds::Count { count: 8, base: 11 };
        c.diagnostic = true;
        let out = rrvr::experiment::run_experiment(&c).map_err(|e| e.to_string())?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let path = dir.path().join("trace.csv");
        write_trace(std::fs::File::create(&path).map_err(|e| e.to_string())?, &out.metadata, &out.averaged)
            .map_err(|e| e.to_string())?;
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let identical = trace_bytes()? == trace_bytes()?;
    let detail = format!("FD rel err {worst_fd:.1e}, |w* - newton| {gap:.1e}, identical traces {identical}");
    if worst_fd <= 1e-6 && gap <= 1e-8 && identical {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 lemma 1 uniformity", lemma1_uniformity),
        ("2 lemma 2 moment identity", lemma2_identity),
        ("3 bias formula exactness", bias_formula),
        ("4 saga+rr energy decay", || decay(TheoremKind::SagaRr)),
        ("5 avrg energy decay", || decay(TheoremKind::Avrg)),
        ("6 gradient accounting", gradient_accounting),
        ("7 rr advantage", rr_advantage),
        ("8 degenerate equivalences", degenerate_equivalences),
        ("9 numerical hygiene", numerical_hygiene),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
