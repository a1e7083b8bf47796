use super::{check_shapes, cost, Branch, CircuitWeights, Metric, TrainingSample};
use crate::error::{Error, Result};
use crate::measurement::MeasurementPanel;
use crate::quat::{accumulate_outer, real_expansion, QuatMatrix, QuatVector, Quaternion};

/// Writes into `g` the vector with `∂J/∂W* = g · xᵃᴴ` for one sample, given
/// the circuit output `v = W xᵃ`. `estimate` maps the exact `d̂` of each
/// direction to the value actually used (identity for exact expectations).
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn sample_direction(
    v: &[Quaternion],
    sample: &TrainingSample,
    panel: &MeasurementPanel,
    metric: Metric,
    epsilon_floor: f64,
    branch: Branch,
    g: &mut [Quaternion],
    mut estimate: impl FnMut(f64) -> f64,
) {
    g.fill(Quaternion::ZERO);
    let inv_p = 1.0 / panel.len() as f64;
    for ((h, &d), &root_d) in panel
        .directions()
        .iter()
        .zip(sample.d_targets())
        .zip(sample.sqrt_targets())
    {
        let re = h.project_real(v);
        let exact = 0.25 * re * re;
        let dhat = estimate(exact);
        let re_used = if dhat == exact {
            re
        } else {
            2.0 * dhat.sqrt().copysign(re)
        };
        let coef = match (branch, metric) {
            (Branch::Positive, Metric::SqrtDiff) => 0.25 * (0.5 * re_used - root_d),
            _ => 0.125 * re_used * metric.derivative(dhat, d, epsilon_floor),
        };
        if coef == 0.0 {
            continue;
        }
        let h_aug = h.augmented();
        for &i in h.support() {
            g[i] += h_aug[i].conj().scale(coef * inv_p);
        }
    }
}

/// Exact gradient `∂J/∂W*` of the single-sample cost.
pub fn gradient(
    w: &CircuitWeights,
    sample: &TrainingSample,
    panel: &MeasurementPanel,
    metric: Metric,
    epsilon_floor: f64,
) -> Result<QuatMatrix> {
    gradient_with_branch(w, sample, panel, metric, epsilon_floor, Branch::Magnitude)
}

/// [`gradient`] with a choice of square-root branch.
pub fn gradient_with_branch(
    w: &CircuitWeights,
    sample: &TrainingSample,
    panel: &MeasurementPanel,
    metric: Metric,
    epsilon_floor: f64,
    branch: Branch,
) -> Result<QuatMatrix> {
    check_shapes(w, panel)?;
    if sample.x().m() != w.m() || sample.d_targets().len() != panel.len() {
        return Err(Error::Shape {
            expected: w.m(),
            found: sample.x().m(),
        });
    }
    let dim = 4 * w.m();
    let mut v = vec![Quaternion::ZERO; dim];
    w.matrix().mul_slice_into(sample.x_aug().as_slice(), &mut v);
    let mut g = vec![Quaternion::ZERO; dim];
    sample_direction(
        &v,
        sample,
        panel,
        metric,
        epsilon_floor,
        branch,
        &mut g,
        |d| d,
    );
    let mut out = QuatMatrix::zeros(dim, dim);
    accumulate_outer(&mut out, &g, sample.x_aug().as_slice(), 1.0);
    Ok(out)
}

/// Real-coordinate gradient from an HR gradient: the component stack of all
/// entries (row-major), scaled by 4. Layout `[all r; all i; all j; all k]`.
pub fn hr_to_real(grad: &QuatMatrix) -> Vec<f64> {
    real_expansion(&QuatVector(grad.data().to_vec()))
        .into_iter()
        .map(|x| 4.0 * x)
        .collect()
}

/// Compares the analytic gradient with central differences of the cost over
/// every real coordinate of `W`. Returns the largest coordinate error divided
/// by the largest finite-difference coordinate, or the absolute error when
/// the gradient vanishes.
pub fn fd_gradient_check(
    w: &CircuitWeights,
    sample: &TrainingSample,
    panel: &MeasurementPanel,
    metric: Metric,
    step: f64,
) -> Result<f64> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidInput(
            "finite-difference step must be positive".into(),
        ));
    }
    let analytic = hr_to_real(&gradient(
        w,
        sample,
        panel,
        metric,
        super::DEFAULT_EPSILON_FLOOR,
    )?);
    let entries = w.matrix().data().len();
    let batch = std::slice::from_ref(sample);
    let mut fd = vec![0.0; 4 * entries];
    let mut probe = w.matrix().clone();
    for c in 0..4 {
        for e in 0..entries {
            let original = probe.data()[e];
            let mut shifted = |delta: f64| -> Result<f64> {
                let mut comps = original.to_array();
                comps[c] += delta;
                probe.data_mut()[e] = Quaternion::from_array(comps);
                let value = cost(&CircuitWeights::new(probe.clone())?, batch, panel, metric);
                probe.data_mut()[e] = original;
                value
            };
            let plus = shifted(step)?;
            let minus = shifted(-step)?;
            fd[c * entries + e] = (plus - minus) / (2.0 * step);
        }
    }
    let scale = fd.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let err = analytic
        .iter()
        .zip(&fd)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    Ok(if scale > 1e-8 { err / scale } else { err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::{sgd_step, DEFAULT_EPSILON_FLOOR};
    use crate::measurement::canonical_panel;
    use crate::qubit::random_register_positive_orthant;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn perturbed_identity(m: usize, scale: f64, rng: &mut ChaCha8Rng) -> CircuitWeights {
        let n = 4 * m;
        let mut w = QuatMatrix::identity(n);
        for q in w.data_mut() {
            let noise = Quaternion::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            *q += noise.scale(scale);
        }
        CircuitWeights::new(w).unwrap()
    }

    fn sample(m: usize, rng: &mut ChaCha8Rng) -> (TrainingSample, MeasurementPanel) {
        let panel = canonical_panel(m).unwrap();
        let x = random_register_positive_orthant(m, rng).unwrap();
        let y = random_register_positive_orthant(m, rng).unwrap();
        (TrainingSample::new(x, y, &panel).unwrap(), panel)
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [1, 2] {
            for metric in [Metric::SqrtDiff, Metric::SquaredDiff] {
                let (s, panel) = sample(m, &mut rng);
                let w = perturbed_identity(m, 0.2, &mut rng);
                let err = fd_gradient_check(&w, &s, &panel, metric, 1e-6).unwrap();
                assert!(err < 1e-6, "m={m} {metric:?}: {err}");
            }
        }
    }

    #[test]
    fn vanishes_at_perfect_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let panel = canonical_panel(2).unwrap();
        let y = random_register_positive_orthant(2, &mut rng).unwrap();
        let s = TrainingSample::new(y.clone(), y, &panel).unwrap();
        let w = CircuitWeights::identity(2);
        for metric in [Metric::SqrtDiff, Metric::SquaredDiff] {
            let g = gradient(&w, &s, &panel, metric, DEFAULT_EPSILON_FLOOR).unwrap();
            assert!(g.norm() < 1e-14);
            assert!(fd_gradient_check(&w, &s, &panel, metric, 1e-6).unwrap() < 1e-8);
        }
    }

    #[test]
    fn branches_agree_when_projections_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (s, panel) = sample(2, &mut rng);
        // Near identity every projection of a positive-orthant input is positive.
        let w = perturbed_identity(2, 0.01, &mut rng);
        let a = gradient_with_branch(&w, &s, &panel, Metric::SqrtDiff, 1e-12, Branch::Magnitude)
            .unwrap();
        let b = gradient_with_branch(&w, &s, &panel, Metric::SqrtDiff, 1e-12, Branch::Positive)
            .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn small_step_against_gradient_lowers_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (s, panel) = sample(2, &mut rng);
        let w = perturbed_identity(2, 0.3, &mut rng);
        let g = gradient(&w, &s, &panel, Metric::SqrtDiff, 1e-12).unwrap();
        let batch = std::slice::from_ref(&s);
        let before = cost(&w, batch, &panel, Metric::SqrtDiff).unwrap();
        let after = cost(
            &sgd_step(&w, &g, 1e-3).unwrap(),
            batch,
            &panel,
            Metric::SqrtDiff,
        )
        .unwrap();
        assert!(after < before);
    }

    #[test]
    fn real_layout_of_hr_gradient() {
        let g = QuatMatrix::from_rows(
            1,
            2,
            vec![Quaternion::new(1.0, 2.0, 3.0, 4.0), Quaternion::K],
        )
        .unwrap();
        assert_eq!(
            hr_to_real(&g),
            vec![4.0, 0.0, 8.0, 0.0, 12.0, 0.0, 16.0, 4.0]
        );
    }
}
