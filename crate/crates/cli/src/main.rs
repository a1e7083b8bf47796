use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quatlearn::harness::output::{self, Manifest};
use quatlearn::harness::{
    generate_instance, run_learning_curve, run_likelihood_experiment, run_trial, selftest,
    trial_rng, ExperimentConfig,
};
use quatlearn::learner::{
    fd_gradient_check, CircuitWeights, ExpectationMode, Metric, UpdateSchedule,
};
use quatlearn::{Error, QuatMatrix, Quaternion};
use rand::Rng;
use serde_json::json;

/// Quaternion qubit-circuit learning experiments.
#[derive(Parser)]
#[command(name = "quatlearn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one circuit on a random instance and write its cost trace.
    Train(TrainArgs),
    /// Learning-curve band over many independent trials.
    Fig3(Fig3Args),
    /// Likelihood recovery through a trained circuit.
    Fig4(Fig4Args),
    /// Compare analytic gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Run the built-in invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (default: out/<subcommand>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Training {
    /// Qubits per register.
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Step size (default: 0.9 / (3m)).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Training pairs per instance.
    #[arg(long)]
    samples: Option<usize>,
    /// Expectation mode: `exact` or `mc:K`.
    #[arg(long, default_value = "exact")]
    mode: ExpectationMode,
    /// Cost metric: `sqrt` or `squared`.
    #[arg(long, default_value = "sqrt")]
    metric: Metric,
    /// Use one sample per update instead of the full dataset.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    training: Training,
}

#[derive(Args)]
struct Fig3Args {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    training: Training,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Run 1000 trials (overrides --trials).
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct Fig4Args {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    training: Training,
    /// Per-qubit tolerance when reconstructing the trained output.
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
}

#[derive(Args)]
struct GradcheckArgs {
    #[command(flatten)]
    common: Common,
    /// Number of random instances, cycling m over 1, 2, 4.
    #[arg(long, default_value_t = 30)]
    instances: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-6)]
    step: f64,
    /// Failure threshold on the worst relative error.
    #[arg(long, default_value_t = 1e-5)]
    threshold: f64,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: Common,
}

fn experiment(
    common: &Common,
    training: &Training,
    base: ExperimentConfig,
    name: &str,
) -> ExperimentConfig {
    ExperimentConfig {
        m: training.m,
        iterations: training.iters,
        samples: training.samples.unwrap_or(base.samples),
        mu: training
            .mu
            .unwrap_or_else(|| ExperimentConfig::default_mu(training.m)),
        seed: common.seed,
        expectation: training.mode,
        metric: training.metric,
        schedule: if training.sequential {
            UpdateSchedule::Sequential
        } else {
            UpdateSchedule::Batch
        },
        output_dir: out_dir(common, name),
        ..base
    }
}

fn out_dir(common: &Common, name: &str) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| Path::new("out").join(name))
}

fn hypotheses_for(m: usize) -> Result<usize, Error> {
    if m >= usize::BITS as usize {
        return Err(Error::InvalidInput(format!("m = {m} is too large")));
    }
    Ok(1usize << m)
}

fn finish<C: serde::Serialize, S: serde::Serialize>(
    dir: &Path,
    mut manifest: Manifest<C, S>,
    files: &[(&str, String)],
) -> Result<(), Error> {
    for (name, contents) in files {
        output::write_file(dir, name, contents)?;
        manifest.outputs.push(name.to_string());
    }
    output::write_manifest(dir, &manifest)
}

fn cmd_train(args: &TrainArgs) -> Result<bool, Error> {
    let mut config = experiment(
        &args.common,
        &args.training,
        ExperimentConfig::learning_curve(),
        "train",
    );
    config.trials = 1;
    config.z = hypotheses_for(config.m)?;
    config.validate()?;
    let result = run_trial(&config, 0)?;
    if let Some(d) = result.divergence {
        return Err(Error::Diverged {
            iteration: d.iteration,
            cost: d.cost,
        });
    }
    let mut csv = String::from("iteration,cost,cost_db,grad_norm\n");
    for (t, r) in result.trace.records.iter().enumerate() {
        csv.push_str(&format!("{t},{},{},{}\n", r.cost, r.cost_db, r.grad_norm));
    }
    let first = result.trace.records.first().map_or(f64::NAN, |r| r.cost_db);
    let last = result.trace.records.last().map_or(f64::NAN, |r| r.cost_db);
    println!(
        "cost {first:.3} dB -> {last:.3} dB over {} iterations",
        config.iterations
    );
    let summary = json!({
        "initial_db": first,
        "final_db": last,
        "fingerprint": result.fingerprint.map(|f| format!("{f:016x}")),
        "recoverable": result.trace.recoverable,
    });
    let manifest = Manifest::new("train", config.seed, &config, summary);
    finish(&config.output_dir, manifest, &[("train.csv", csv)])?;
    Ok(true)
}

fn cmd_fig3(args: &Fig3Args) -> Result<bool, Error> {
    let mut config = experiment(
        &args.common,
        &args.training,
        ExperimentConfig::learning_curve(),
        "fig3",
    );
    config.trials = if args.full { 1000 } else { args.trials };
    config.z = hypotheses_for(config.m)?;
    let curve = run_learning_curve(&config)?;
    let band = &curve.per_qubit;
    let (first, last) = (band.mean.first().copied(), band.mean.last().copied());
    match (first, last) {
        (Some(a), Some(b)) => println!(
            "{} trials, {} divergent; mean cost {a:.3} dB -> {b:.3} dB (drop {:.3} dB)",
            config.trials,
            curve.divergent,
            a - b
        ),
        _ => println!("{} trials, all divergent", config.trials),
    }
    let summary = json!({
        "divergent": curve.divergent,
        "mean_db_first": first,
        "mean_db_last": last,
        "fingerprints": curve.trials.iter().map(|t| t.fingerprint.map(|f| format!("{f:016x}"))).collect::<Vec<_>>(),
        "per_qubit_csv": "fig3.csv (panel sum / m)",
        "per_direction_csv": "fig3_per_direction.csv (panel mean)",
    });
    let manifest = Manifest::new("fig3", config.seed, &config, summary);
    finish(
        &config.output_dir,
        manifest,
        &[
            ("fig3.csv", output::curve_csv(&curve.per_qubit)),
            (
                "fig3_per_direction.csv",
                output::curve_csv(&curve.per_direction),
            ),
            (
                "fig3.svg",
                output::curve_svg(&curve.per_qubit, "Learning curve (panel sum / m)"),
            ),
        ],
    )?;
    Ok(true)
}

fn cmd_fig4(args: &Fig4Args) -> Result<bool, Error> {
    let mut config = experiment(
        &args.common,
        &args.training,
        ExperimentConfig::likelihood(),
        "fig4",
    );
    config.z = config.m;
    config.reconstruct_tolerance = args.tolerance;
    let report = run_likelihood_experiment(&config)?;
    println!("L_inf error {:.6}", report.linf_error);
    for ((label, t), e) in report
        .labels
        .iter()
        .zip(&report.true_likelihood)
        .zip(&report.estimated_likelihood)
    {
        println!("{label}: true {t:.6} estimated {e:.6}");
    }
    let manifest = Manifest::new("fig4", config.seed, &config, &report);
    finish(
        &config.output_dir,
        manifest,
        &[
            ("fig4.csv", output::likelihood_csv(&report)),
            (
                "fig4.svg",
                output::likelihood_svg(&report, "Hypothesis likelihoods"),
            ),
        ],
    )?;
    Ok(true)
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Result<bool, Error> {
    if args.instances == 0 {
        return Err(Error::InvalidInput("need at least one instance".into()));
    }
    let mut rng = trial_rng(args.common.seed, 0);
    let mut worst: f64 = 0.0;
    for idx in 0..args.instances {
        let m = [1, 2, 4][idx % 3];
        let inst = generate_instance(m, 1, &mut rng)?;
        let mut w = QuatMatrix::identity(4 * m);
        for q in w.data_mut() {
            let noise: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.3..0.3));
            *q += Quaternion::from_array(noise);
        }
        let w = CircuitWeights::new(w)?;
        for metric in [Metric::SqrtDiff, Metric::SquaredDiff] {
            let err = fd_gradient_check(&w, &inst.dataset[0], &inst.panel, metric, args.step)?;
            worst = if err.is_nan() {
                f64::NAN
            } else {
                worst.max(err)
            };
        }
    }
    let passed = worst < args.threshold;
    println!(
        "worst relative error {worst:.3e} over {} instances ({})",
        args.instances,
        if passed { "ok" } else { "FAILED" }
    );
    let config =
        json!({ "instances": args.instances, "step": args.step, "threshold": args.threshold });
    let manifest = Manifest::new(
        "gradcheck",
        args.common.seed,
        config,
        json!({ "worst": worst, "passed": passed }),
    );
    finish(&out_dir(&args.common, "gradcheck"), manifest, &[])?;
    Ok(passed)
}

fn cmd_selftest(args: &SelftestArgs) -> Result<bool, Error> {
    let checks = selftest::run(args.common.seed);
    for c in &checks {
        println!(
            "[{}] {}: worst {:.3e} (tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.tolerance
        );
    }
    let passed = checks.iter().all(|c| c.passed);
    let manifest = Manifest::new("selftest", args.common.seed, json!({}), &checks);
    finish(&out_dir(&args.common, "selftest"), manifest, &[])?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Fig3(a) => cmd_fig3(a),
        Command::Fig4(a) => cmd_fig4(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
            );
            ExitCode::FAILURE
        }
    }
}
