//! Reference experiments: many-trial learning curves on random ground-truth
//! circuits, and likelihood recovery through a trained circuit.

mod instance;
pub mod output;
pub mod par;
pub mod selftest;

pub use instance::{generate_instance, Instance, QubitRotation};
pub use par::{map_trials, trial_rng, Execution};

use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{
    step_bound, train, Branch, CircuitWeights, ExpectationMode, Metric, TrainingConfig,
    TrainingTrace, UpdateSchedule,
};
use crate::measurement::{panel_functionals, reconstruct_register};
use crate::quat::augment;
use crate::qubit::{
    decode_distribution, encode_distribution, random_register_positive_orthant, HypothesisEncoding,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub trials: usize,
    pub iterations: usize,
    /// Training pairs per instance.
    pub samples: usize,
    pub mu: f64,
    pub z: usize,
    pub seed: u64,
    pub expectation: ExpectationMode,
    pub metric: Metric,
    pub schedule: UpdateSchedule,
    pub branch: Branch,
    /// Per-qubit tolerance when reconstructing a register from trained outputs.
    pub reconstruct_tolerance: f64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Learning-curve defaults: 8 qubits, 256 hypotheses, 1000 trials.
    pub fn learning_curve() -> Self {
        ExperimentConfig {
            m: 8,
            trials: 1000,
            iterations: 2000,
            samples: 32,
            mu: 0.9 / 24.0,
            z: 256,
            seed: 0,
            expectation: ExpectationMode::Exact,
            metric: Metric::SqrtDiff,
            schedule: UpdateSchedule::Batch,
            branch: Branch::Positive,
            reconstruct_tolerance: 0.05,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Likelihood-recovery defaults: one hypothesis per qubit on 8 qubits.
    /// The probe register is not drawn from the training distribution, so
    /// the circuit gets more training pairs than in the curve runs.
    pub fn likelihood() -> Self {
        ExperimentConfig {
            trials: 1,
            z: 8,
            samples: 128,
            ..ExperimentConfig::learning_curve()
        }
    }

    /// `0.9 · step_bound(2^m)`, the default step for an `m`-qubit panel.
    pub fn default_mu(m: usize) -> f64 {
        0.9 / (3 * m.max(1)) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.trials == 0 || self.iterations == 0 || self.samples == 0 {
            return Err(Error::InvalidInput(
                "m, trials, iterations and samples must all be at least 1".into(),
            ));
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        step_bound(self.z)?;
        if self.reconstruct_tolerance.is_nan() || self.reconstruct_tolerance <= 0.0 {
            return Err(Error::InvalidInput(
                "reconstruction tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn training_config(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            mu: self.mu,
            iterations: self.iterations,
            metric: self.metric,
            expectation: self.expectation,
            z: self.z,
            seed,
            schedule: self.schedule,
            branch: self.branch,
            ..TrainingConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    /// Seed of the training-time random stream (Monte-Carlo draws).
    pub seed: u64,
    /// Empty when the trial diverged.
    pub trace: TrainingTrace,
    pub fingerprint: Option<u64>,
    pub divergence: Option<Divergence>,
}

/// Where a trial hit the divergence detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub iteration: usize,
    pub cost: f64,
}

impl TrialResult {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }
}

/// Pointwise statistics of per-trial dB curves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Band {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    fn from_curves<'a>(curves: impl Iterator<Item = &'a [f64]> + Clone, offset: f64) -> Band {
        let len = curves.clone().map(|c| c.len()).min().unwrap_or(0);
        let count = curves.clone().count();
        let mut band = Band {
            mean: vec![0.0; len],
            min: vec![f64::INFINITY; len],
            max: vec![f64::NEG_INFINITY; len],
        };
        for curve in curves {
            for (t, &v) in curve[..len].iter().enumerate() {
                let v = v + offset;
                band.mean[t] += v;
                band.min[t] = band.min[t].min(v);
                band.max[t] = band.max[t].max(v);
            }
        }
        for v in &mut band.mean {
            *v /= count as f64;
        }
        // Averaging can drift outside [min, max] by an ulp.
        for t in 0..len {
            band.mean[t] = band.mean[t].clamp(band.min[t], band.max[t]);
        }
        band
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub trials: Vec<TrialResult>,
    /// `10 log₁₀` of the cost averaged over all panel directions.
    pub per_direction: Band,
    /// `10 log₁₀` of the panel-summed cost divided by the qubit count.
    pub per_qubit: Band,
    pub divergent: usize,
}

/// Runs one trial: draws an instance from the trial's stream and trains on it.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialResult> {
    let mut rng = trial_rng(config.seed, trial);
    let instance = generate_instance(config.m, config.samples, &mut rng)?;
    let seed: u64 = rng.random();
    match train(
        &instance.dataset,
        &instance.panel,
        &config.training_config(seed),
    ) {
        Ok((w, trace)) => Ok(TrialResult {
            trial,
            seed,
            trace,
            fingerprint: Some(w.fingerprint()),
            divergence: None,
        }),
        Err(Error::Diverged { iteration, cost }) => Ok(TrialResult {
            trial,
            seed,
            trace: TrainingTrace::default(),
            fingerprint: None,
            divergence: Some(Divergence { iteration, cost }),
        }),
        Err(e) => Err(e),
    }
}

pub fn run_learning_curve(config: &ExperimentConfig) -> Result<LearningCurve> {
    run_learning_curve_with(config, Execution::Parallel)
}

pub fn run_learning_curve_with(
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<LearningCurve> {
    config.validate()?;
    let trials = map_trials(config.trials, execution, |t| run_trial(config, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let curves: Vec<Vec<f64>> = trials
        .iter()
        .filter(|t| !t.diverged())
        .map(|t| t.trace.cost_db())
        .collect();
    let views = curves.iter().map(|c| c.as_slice());
    // panel sum / m = 3 × panel mean
    let per_qubit_offset = 10.0 * 3f64.log10();
    Ok(LearningCurve {
        per_direction: Band::from_curves(views.clone(), 0.0),
        per_qubit: Band::from_curves(views, per_qubit_offset),
        divergent: trials.iter().filter(|t| t.diverged()).count(),
        trials,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodReport {
    pub labels: Vec<String>,
    pub true_likelihood: Vec<f64>,
    pub estimated_likelihood: Vec<f64>,
    pub linf_error: f64,
    /// Final training cost in dB, absent for a supplied circuit.
    pub final_cost_db: Option<f64>,
}

/// Encodes `truth` as a target register, pushes it through the instance's
/// circuit, maps the result through `w`, and decodes the reconstruction.
pub fn likelihood_through(
    instance: &Instance,
    w: &CircuitWeights,
    truth: &[f64],
    tolerance: f64,
) -> Result<LikelihoodReport> {
    let encoding = HypothesisEncoding::per_qubit(instance.m())?;
    let y = encode_distribution(truth, &encoding)?;
    let x = instance.forward(&y)?;
    let v = w.matrix().mul_vec(augment(x.vector()).blocks())?;
    let d = panel_functionals(&instance.panel, &v)?;
    let reconstructed = reconstruct_register(&instance.panel, &d, tolerance)?;
    let estimated = decode_distribution(&reconstructed, &encoding)?;
    let linf_error = truth
        .iter()
        .zip(&estimated)
        .fold(0.0_f64, |a, (t, e)| a.max((t - e).abs()));
    Ok(LikelihoodReport {
        labels: (1..=truth.len()).map(|h| format!("H{h}")).collect(),
        true_likelihood: truth.to_vec(),
        estimated_likelihood: estimated,
        linf_error,
        final_cost_db: None,
    })
}

/// Trains on a fresh instance, then recovers a random likelihood vector
/// through the trained circuit.
pub fn run_likelihood_experiment(config: &ExperimentConfig) -> Result<LikelihoodReport> {
    config.validate()?;
    if config.z != config.m {
        return Err(Error::InvalidInput(format!(
            "likelihood recovery uses one hypothesis per qubit: z = {} but m = {}",
            config.z, config.m
        )));
    }
    let mut rng = trial_rng(config.seed, 0);
    let instance = generate_instance(config.m, config.samples, &mut rng)?;
    let seed: u64 = rng.random();
    let encoding = HypothesisEncoding::per_qubit(config.m)?;
    let truth = decode_distribution(
        &random_register_positive_orthant(config.m, &mut rng)?,
        &encoding,
    )?;
    let (w, trace) = train(
        &instance.dataset,
        &instance.panel,
        &config.training_config(seed),
    )?;
    let mut report = likelihood_through(&instance, &w, &truth, config.reconstruct_tolerance)?;
    report.final_cost_db = trace.records.last().map(|r| r.cost_db);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize, iterations: usize) -> ExperimentConfig {
        ExperimentConfig {
            m: 2,
            trials,
            iterations,
            samples: 8,
            mu: ExperimentConfig::default_mu(2),
            z: 4,
            seed: 3,
            ..ExperimentConfig::learning_curve()
        }
    }

    #[test]
    fn one_point_trace() {
        let curve = run_learning_curve(&small(1, 1)).unwrap();
        assert_eq!(curve.per_direction.len(), 1);
        assert_eq!(curve.trials[0].trace.len(), 1);
    }

    #[test]
    fn band_is_ordered_and_offset() {
        let curve = run_learning_curve(&small(4, 50)).unwrap();
        let b = &curve.per_direction;
        for t in 0..b.len() {
            assert!(b.min[t] <= b.mean[t] && b.mean[t] <= b.max[t]);
            let shift = curve.per_qubit.mean[t] - b.mean[t];
            assert!((shift - 10.0 * 3f64.log10()).abs() < 1e-9);
        }
        assert_eq!(curve.divergent, 0);
    }

    #[test]
    fn divergence_is_counted_not_fatal() {
        let cfg = ExperimentConfig {
            mu: 5.0 * step_bound(4).unwrap(),
            iterations: 400,
            ..small(3, 400)
        };
        let curve = run_learning_curve(&cfg).unwrap();
        assert_eq!(curve.divergent, 3);
        assert!(curve.per_direction.is_empty());
    }

    #[test]
    fn analytic_inverse_recovers_likelihoods() {
        let mut rng = trial_rng(1, 0);
        let inst = generate_instance(4, 1, &mut rng).unwrap();
        let truth = [0.1, 0.5, 0.9, 0.33];
        let report = likelihood_through(&inst, &inst.w_inverse, &truth, 1e-8).unwrap();
        assert!(report.linf_error < 1e-8, "{}", report.linf_error);
        assert!(report.estimated_likelihood.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn likelihood_needs_z_equal_m() {
        let cfg = ExperimentConfig {
            z: 16,
            ..ExperimentConfig::likelihood()
        };
        assert!(run_likelihood_experiment(&cfg).is_err());
    }
}
