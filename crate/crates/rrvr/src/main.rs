use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rrvr::checks::{bias_sweep, decay_experiment};
use rrvr::experiment::{run_experiment, DataSource, ExperimentConfig, ProblemSpec, Rho, Seeds, StepSize};
use rrvr::trace::write_trace;
use rrvr::Error;
use rrvr_core::analysis::{ConstantsVariant, TheoremKind};
use rrvr_core::solvers::{PhiConvention, Sampling, SolverKind};
use rrvr_core::verify::scenario::frozen_toy;
use rrvr_core::verify::{
    asymptotic_unbiasedness_check, lemma1_check, lemma2_check, lemma2_with_replacement_check, record_avrg,
    CheckStatus, MomentReport,
};
use rrvr_core::{LossKind, RngStream};

/// Significance threshold of the uniformity test.
const P_THRESHOLD: f64 = 0.001;
/// Agreement required of exact identities.
const EXACT_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "rrvr", version, about = "Variance-reduced stochastic solvers under random reshuffling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver over several seeds and write the seed-averaged trace as CSV.
    Run(RunArgs),
    /// Run one of the statistical or exact checks; exit status 3 on failure.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Compute and print the reference minimizer and curvature constants.
    Reference(ProblemArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Loss {
    #[value(name = "logistic-l2")]
    Logistic,
    #[value(name = "quadratic-l2")]
    Quadratic,
}

impl From<Loss> for LossKind {
    fn from(l: Loss) -> Self {
        match l {
            Loss::Logistic => LossKind::LogisticL2,
            Loss::Quadratic => LossKind::QuadraticL2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Sgd,
    Saga,
    Svrg,
    Avrg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Rr,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhiArg {
    PostStep,
    PreStep,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantsArg {
    Derived,
    AsPrinted,
}

impl From<ConstantsArg> for ConstantsVariant {
    fn from(c: ConstantsArg) -> Self {
        match c {
            ConstantsArg::Derived => ConstantsVariant::Derived,
            ConstantsArg::AsPrinted => ConstantsVariant::AsPrinted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    Saga,
    Avrg,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["synthetic", "data"])))]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "logistic-l2")]
    loss: Loss,
    /// Synthetic unit-norm logistic data with N samples in dimension M.
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    synthetic: Option<Vec<usize>>,
    /// Seed of the synthetic generator.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// LIBSVM file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Regularization strength, a number or "1/N".
    #[arg(long, default_value = "1/N")]
    rho: String,
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec, Error> {
        let source = match (&self.synthetic, &self.data) {
            (Some(nm), None) => DataSource::Synthetic { n: nm[0], m: nm[1], seed: self.data_seed },
            (None, Some(path)) => DataSource::File(path.clone()),
            _ => return Err(Error::Config("give exactly one of --synthetic or --data".into())),
        };
        let rho = match self.rho.trim() {
            "1/N" | "1/n" => Rho::InverseN,
            text => Rho::Value(
                text.parse()
                    .map_err(|_| Error::Config(format!("--rho must be a number or 1/N, got {text:?}")))?,
            ),
        };
        Ok(ProblemSpec { source, loss: self.loss.into(), rho })
    }
}

#[derive(Args)]
struct SeedArgs {
    /// Number of seeds; run k uses a stream derived from (base seed, k).
    #[arg(long, default_value_t = 1, conflicts_with = "seed_list")]
    seeds: u64,
    /// Explicit comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    #[arg(long, env = "RRVR_SEED", default_value_t = 0)]
    base_seed: u64,
}

impl SeedArgs {
    fn seeds(&self) -> Seeds {
        match &self.seed_list {
            Some(list) => Seeds::List(list.clone()),
            None => Seeds::Count { count: self.seeds, base: self.base_seed },
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("step").required(true).args(["mu", "mu_frac"])))]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    solver: SolverArg,
    #[arg(long, value_enum, default_value = "rr")]
    sampling: SamplingArg,
    /// Step size.
    #[arg(long)]
    mu: Option<f64>,
    /// Step size as a fraction of the solver's theorem bound.
    #[arg(long)]
    mu_frac: Option<f64>,
    #[arg(long)]
    epochs: usize,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Record inner iterates for inner differences and energy.
    #[arg(long)]
    diagnostic: bool,
    #[arg(long, value_enum, default_value = "post-step")]
    phi_convention: PhiArg,
    #[arg(long, value_enum, default_value = "derived")]
    constants: ConstantsArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Check {
    /// Law of the history cell about to be read, against 1/N.
    Lemma1 {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        i: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value = "logistic-l2")]
        loss: Loss,
    },
    /// Second-moment identity of the history table under reshuffling.
    Lemma2(MomentArgs),
    /// One-step second-moment recursion under sampling with replacement.
    #[command(name = "lemma2-wr")]
    Lemma2Wr(MomentArgs),
    /// Enumerated conditional mean of the SAGA direction against the closed form.
    Bias {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        states: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value = "logistic-l2")]
        loss: Loss,
    },
    /// AVRG directions near the minimizer stay within 3·δ·eps of the true gradient.
    Unbiased {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 400)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Energy contraction and envelope on seed-averaged diagnostic traces.
    Decay(DecayArgs),
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    i: usize,
    #[arg(long, default_value_t = 50_000)]
    trials: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value = "quadratic-l2")]
    loss: Loss,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
}

#[derive(Args)]
struct DecayArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "saga")]
    solver: TheoremArg,
    #[arg(long, default_value_t = 1.0)]
    mu_frac: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[command(flatten)]
    seeds: SeedArgs,
    #[arg(long, default_value_t = 1.05)]
    ratio_slack: f64,
    #[arg(long, default_value_t = 1.10)]
    envelope_slack: f64,
}

/// Outcome of a subcommand that completed without an error.
enum Verdict {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<Verdict, Error> {
    match command {
        Command::Run(args) => run(args),
        Command::Reference(args) => reference(args),
        Command::Verify { check } => verify(check),
    }
}

fn run(args: RunArgs) -> Result<Verdict, Error> {
    let step = match (args.mu, args.mu_frac) {
        (Some(mu), None) => StepSize::Mu(mu),
        (None, Some(frac)) => StepSize::MuFrac(frac),
        _ => return Err(Error::Config("give exactly one of --mu or --mu-frac".into())),
    };
    let solver = match args.solver {
        SolverArg::Sgd => SolverKind::Sgd,
        SolverArg::Saga => SolverKind::Saga,
        SolverArg::Svrg => SolverKind::Svrg,
        SolverArg::Avrg => SolverKind::Avrg,
    };
    let sampling = match args.sampling {
        SamplingArg::Rr => Sampling::Reshuffle,
        SamplingArg::Uniform => Sampling::Uniform,
    };
    let mut config = ExperimentConfig::new(args.problem.spec()?, solver, sampling, step, args.epochs);
    config.seeds = args.seeds.seeds();
    config.diagnostic = args.diagnostic;
    config.phi_convention = match args.phi_convention {
        PhiArg::PostStep => PhiConvention::PostStep,
        PhiArg::PreStep => PhiConvention::PreStep,
    };
    config.constants = args.constants.into();
    let outcome = run_experiment(&config)?;
    match args.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write_trace(&mut out, &outcome.metadata, &outcome.averaged)?;
            out.flush()?;
        }
        None => write_trace(io::stdout().lock(), &outcome.metadata, &outcome.averaged)?,
    }
    Ok(Verdict::Ok)
}

fn reference(args: ProblemArgs) -> Result<Verdict, Error> {
    let problem = args.spec()?.load()?;
    let n = problem.dataset.len();
    let r = &problem.reference;
    println!("n: {n}");
    println!("m: {}", problem.dataset.dim());
    println!("rho: {:?}", problem.model.rho());
    println!("delta: {:?}", problem.curvature.delta);
    println!("nu: {:?}", problem.curvature.nu);
    println!("mu_max_saga_rr: {:?}", TheoremKind::SagaRr.mu_max(problem.curvature, n));
    println!("mu_max_avrg: {:?}", TheoremKind::Avrg.mu_max(problem.curvature, n));
    println!("risk_star: {:?}", r.risk_star);
    println!("w_star_grad_norm: {:?}", r.grad_norm);
    println!("w_star_norm_sq: {:?}", r.w_star.norm_sq());
    let w: Vec<String> = r.w_star.iter().map(|x| format!("{x:?}")).collect();
    println!("w_star: {}", w.join(" "));
    Ok(Verdict::Ok)
}

fn verdict(pass: bool) -> Verdict {
    println!("status: {}", if pass { "pass" } else { "fail" });
    if pass {
        Verdict::Ok
    } else {
        Verdict::Failed
    }
}

fn print_moment(r: &MomentReport) {
    println!("trials: {}", r.trials);
    println!("lhs: {:?}", r.lhs);
    println!("rhs: {:?}", r.rhs);
    println!("rel_err: {:?}", r.rel_err);
    println!("rel_std_err: {:?}", r.rel_std_err);
}

fn verify(check: Check) -> Result<Verdict, Error> {
    match check {
        Check::Lemma1 { n, i, trials, seed, loss } => {
            let (ds, model, frozen) = frozen_toy(n, loss.into(), Sampling::Reshuffle, seed)?;
            let r = lemma1_check(&frozen, &ds, &model, i, trials, &mut RngStream::for_run(seed, 0))?;
            println!("check: lemma1");
            println!("n: {n}");
            println!("i: {i}");
            println!("trials: {trials}");
            let freq: Vec<String> = r.frequencies.iter().map(|f| format!("{f:.5}")).collect();
            println!("frequencies: {}", freq.join(" "));
            println!("chi_square: {:?}", r.chi_square.statistic);
            println!("dof: {}", r.chi_square.dof);
            println!("p_value: {:?}", r.chi_square.p_value);
            // with a single category the law is degenerate and the p-value is 1
            Ok(verdict(r.chi_square.p_value > P_THRESHOLD || r.chi_square.dof == 0))
        }
        Check::Lemma2(a) => {
            let (ds, model, frozen) = frozen_toy(a.n, a.loss.into(), Sampling::Reshuffle, a.seed)?;
            let r = lemma2_check(&frozen, &ds, &model, a.i, a.trials, &mut RngStream::for_run(a.seed, 0))?;
            println!("check: lemma2");
            print_moment(&r);
            Ok(verdict(r.rel_err <= a.tol))
        }
        Check::Lemma2Wr(a) => {
            let (ds, model, frozen) = frozen_toy(a.n, a.loss.into(), Sampling::Uniform, a.seed)?;
            let r = lemma2_with_replacement_check(&frozen, &ds, &model, a.i, a.trials, &mut RngStream::for_run(a.seed, 0))?;
            println!("check: lemma2-wr");
            print_moment(&r);
            Ok(verdict(r.rel_err <= a.tol))
        }
        Check::Bias { n, states, seed, loss } => {
            let s = bias_sweep(n, loss.into(), states, seed)?;
            println!("check: bias");
            println!("states: {}", s.states);
            println!("max_rr_agreement: {:?}", s.max_rr_agreement);
            println!("max_uniform_agreement: {:?}", s.max_uniform_agreement);
            println!("min_rr_bias: {:?}", s.min_rr_bias);
            println!("max_rr_bias: {:?}", s.max_rr_bias);
            Ok(verdict(s.max_rr_agreement <= EXACT_TOL && s.max_uniform_agreement <= EXACT_TOL))
        }
        Check::Unbiased { n, epochs, eps, seed } => {
            let spec = ProblemSpec::synthetic(n, rrvr_core::verify::scenario::TOY_DIM, seed, LossKind::LogisticL2);
            let problem = spec.load()?;
            let mu = rrvr_core::verify::scenario::toy_step(&problem.dataset, &problem.model)?;
            let tr = record_avrg(&problem.dataset, &problem.model, mu, epochs, seed)?;
            let r = asymptotic_unbiasedness_check(
                &tr,
                &problem.dataset,
                &problem.model,
                &problem.reference.w_star,
                problem.curvature.delta,
                eps,
            )?;
            println!("check: unbiased");
            println!("checked_steps: {}", r.checked_steps);
            println!("worst_ratio: {:?}", r.worst_ratio);
            match r.status {
                CheckStatus::Inconclusive => {
                    println!("status: inconclusive (no step met the neighbourhood precondition)");
                    Ok(Verdict::Ok)
                }
                status => Ok(verdict(status == CheckStatus::Pass)),
            }
        }
        Check::Decay(a) => {
            let kind = match a.solver {
                TheoremArg::Saga => TheoremKind::SagaRr,
                TheoremArg::Avrg => TheoremKind::Avrg,
            };
            let (outcome, r) = decay_experiment(
                &a.problem.spec()?,
                kind,
                a.mu_frac,
                a.seeds.seeds(),
                a.epochs,
                a.ratio_slack,
                a.envelope_slack,
            )?;
            println!("check: decay");
            println!("seeds: {}", outcome.seeds.len());
            println!("mu: {:?}", outcome.mu);
            println!("alpha: {:?}", r.alpha);
            println!("max_ratio: {:?}", r.max_ratio);
            println!("ratio_bound: {:?}", r.alpha * r.ratio_slack);
            println!("envelope_max: {:?}", r.envelope_max);
            println!("envelope_bound: {:?}", r.envelope_slack);
            match r.pass {
                Some(pass) => Ok(verdict(pass)),
                None => {
                    println!("status: no verdict (mu exceeds mu_max, the theorem does not apply)");
                    eprintln!("warning: mu exceeds mu_max; no pass/fail asserted");
                    Ok(Verdict::Ok)
                }
            }
        }
    }
}
