use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gradient::sample_direction;
use super::{
    check_shapes, panel_cost_terms, required_directions, to_db, CircuitWeights, ExpectationMode,
    TraceRecord, TrainingConfig, TrainingSample, TrainingTrace, UpdateSchedule,
    DIVERGENCE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::measurement::{binomial_mean, MeasurementPanel};
use crate::quat::{accumulate_outer, QuatMatrix, Quaternion};

/// Multiplier applied to `∂J/∂W*` in each update.
///
/// The squared panel size undoes the `1/|panel|` averaging in the cost and
/// the per-direction `1/|panel|` normalization of a unit register, so the
/// update is the normalized-LMS step `μ·|panel|·Σ_s e_s conj(h_sᵃ) xᵃᴴ / ‖xᵃ‖²`.
/// Each direction's error then contracts by `1 − 2μ|panel|` per step, which
/// is stable exactly for `μ < 1/|panel|`, i.e. below `step_bound(z)` on the
/// canonical panel of `⌈log₂ z⌉` qubits.
pub fn update_gain(panel: &MeasurementPanel) -> f64 {
    let p = panel.len() as f64;
    p * p
}

/// Trains from the identity circuit.
pub fn train(
    dataset: &[TrainingSample],
    panel: &MeasurementPanel,
    config: &TrainingConfig,
) -> Result<(CircuitWeights, TrainingTrace)> {
    train_from(CircuitWeights::identity(panel.m()), dataset, panel, config)
}

/// Runs `config.iterations` updates starting from `w`. The trace records the
/// dataset cost of the weights each update starts from.
pub fn train_from(
    w: CircuitWeights,
    dataset: &[TrainingSample],
    panel: &MeasurementPanel,
    config: &TrainingConfig,
) -> Result<(CircuitWeights, TrainingTrace)> {
    config.validate()?;
    check_shapes(&w, panel)?;
    if dataset.is_empty() {
        return Err(Error::InvalidInput(
            "training needs at least one sample".into(),
        ));
    }
    if let Some(bad) = dataset
        .iter()
        .find(|s| s.x().m() != w.m() || s.d_targets().len() != panel.len())
    {
        return Err(Error::Shape {
            expected: w.m(),
            found: bad.x().m(),
        });
    }

    let mut trace = TrainingTrace {
        records: Vec::with_capacity(config.iterations),
        recoverable: panel.rank() >= required_directions(config.z),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = 4 * w.m();
    let n = dataset.len();
    let norm = 1.0 / (n * panel.len()) as f64;
    let step = config.mu * update_gain(panel);
    let mut w = w.into_matrix();
    let mut outputs = vec![Quaternion::ZERO; n * dim];
    let mut g = vec![Quaternion::ZERO; dim];
    let mut grad = QuatMatrix::zeros(dim, dim);

    for iteration in 0..config.iterations {
        let mut total = 0.0;
        for (sample, v) in dataset.iter().zip(outputs.chunks_exact_mut(dim)) {
            w.mul_slice_into(sample.x_aug().as_slice(), v);
            total += panel_cost_terms(v, sample, panel, config.metric);
        }
        let cost = total * norm;
        if !cost.is_finite() || cost > DIVERGENCE_THRESHOLD {
            return Err(Error::Diverged { iteration, cost });
        }

        grad.data_mut().fill(Quaternion::ZERO);
        let picked: Box<dyn Iterator<Item = usize>> = match config.schedule {
            UpdateSchedule::Batch => Box::new(0..n),
            UpdateSchedule::Sequential => Box::new(std::iter::once(iteration % n)),
        };
        let weight = match config.schedule {
            UpdateSchedule::Batch => 1.0 / n as f64,
            UpdateSchedule::Sequential => 1.0,
        };
        for idx in picked {
            let sample = &dataset[idx];
            let v = &outputs[idx * dim..(idx + 1) * dim];
            match config.expectation {
                ExpectationMode::Exact => sample_direction(
                    v,
                    sample,
                    panel,
                    config.metric,
                    config.epsilon_floor,
                    config.branch,
                    &mut g,
                    |d| d,
                ),
                ExpectationMode::MonteCarlo { draws } => sample_direction(
                    v,
                    sample,
                    panel,
                    config.metric,
                    config.epsilon_floor,
                    config.branch,
                    &mut g,
                    // p is clamped into [0, 1], so the draw cannot fail.
                    |d| binomial_mean(d.min(1.0), draws, &mut rng).unwrap_or(d),
                ),
            }
            accumulate_outer(&mut grad, &g, sample.x_aug().as_slice(), weight);
        }

        trace.records.push(TraceRecord {
            cost_db: to_db(cost),
            cost,
            grad_norm: grad.norm(),
        });
        w.add_scaled(&grad, -step)?;
    }
    Ok((CircuitWeights::new(w)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::{cost, step_bound, Branch, Metric};
    use crate::measurement::canonical_panel;
    use crate::qubit::{random_register_positive_orthant, QubitRegister};

    /// Target = input with the first two qubits swapped.
    fn swap_dataset(m: usize, n: usize, seed: u64) -> (Vec<TrainingSample>, MeasurementPanel) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let panel = canonical_panel(m).unwrap();
        let data = (0..n)
            .map(|_| {
                let x = random_register_positive_orthant(m, &mut rng).unwrap();
                let mut qubits = x.qubits();
                qubits.swap(0, 1);
                let y = QubitRegister::from_qubits(&qubits).unwrap();
                TrainingSample::new(x, y, &panel).unwrap()
            })
            .collect();
        (data, panel)
    }

    fn config(m: usize, mu_factor: f64, iterations: usize) -> TrainingConfig {
        let z = 1 << m;
        TrainingConfig {
            mu: mu_factor * step_bound(z).unwrap(),
            iterations,
            z,
            schedule: UpdateSchedule::Batch,
            ..TrainingConfig::default()
        }
    }

    #[test]
    fn batch_training_learns_a_swap() {
        let (data, panel) = swap_dataset(2, 16, 1);
        let (w, trace) = train(&data, &panel, &config(2, 0.9, 300)).unwrap();
        let first = trace.records[0].cost_db;
        let last = trace.records.last().unwrap().cost_db;
        assert!(first - last > 20.0, "{first} -> {last}");
        assert!(trace.recoverable);
        let final_cost = cost(&w, &data, &panel, Metric::SqrtDiff).unwrap();
        assert!(to_db(final_cost) <= last + 1e-9);
        let increases = trace
            .records
            .windows(2)
            .skip(10)
            .filter(|p| p[1].cost > p[0].cost)
            .count();
        assert_eq!(increases, 0);
    }

    #[test]
    fn diverges_far_above_the_bound() {
        let (data, panel) = swap_dataset(2, 8, 2);
        match train(&data, &panel, &config(2, 5.0, 500)) {
            Err(Error::Diverged { iteration, .. }) => assert!(iteration < 500),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let (data, panel) = swap_dataset(2, 4, 3);
        let cfg = TrainingConfig {
            expectation: ExpectationMode::MonteCarlo { draws: 50 },
            schedule: UpdateSchedule::Sequential,
            seed: 9,
            ..config(2, 0.5, 40)
        };
        let (a, ta) = train(&data, &panel, &cfg).unwrap();
        let (b, tb) = train(&data, &panel, &cfg).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(ta, tb);
        let (c, _) = train(&data, &panel, &TrainingConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn zero_step_keeps_identity() {
        let (data, panel) = swap_dataset(2, 4, 4);
        let (w, trace) = train(&data, &panel, &config(2, 0.0, 5)).unwrap();
        assert_eq!(w, CircuitWeights::identity(2));
        assert!(trace.records.windows(2).all(|p| p[0].cost == p[1].cost));
    }

    #[test]
    fn rejects_bad_configs() {
        let (data, panel) = swap_dataset(2, 2, 5);
        let over = TrainingConfig {
            enforce_bound: true,
            ..config(2, 1.5, 5)
        };
        assert!(train(&data, &panel, &over).is_err());
        assert!(train(&data, &panel, &config(2, -1.0, 5)).is_err());
        assert!(train(&data, &panel, &config(2, 0.5, 0)).is_err());
        assert!(train(&[], &panel, &config(2, 0.5, 5)).is_err());
        let other = canonical_panel(3).unwrap();
        assert!(train(&data, &other, &config(2, 0.5, 5)).is_err());
    }

    #[test]
    fn magnitude_branch_also_descends() {
        let (data, panel) = swap_dataset(2, 8, 6);
        let cfg = TrainingConfig {
            branch: Branch::Magnitude,
            ..config(2, 0.5, 100)
        };
        let (_, trace) = train(&data, &panel, &cfg).unwrap();
        assert!(trace.records.last().unwrap().cost < trace.records[0].cost);
    }
}
