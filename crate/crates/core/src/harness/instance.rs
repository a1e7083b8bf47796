use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{CircuitWeights, TrainingSample};
use crate::measurement::{canonical_panel, MeasurementPanel};
use crate::quat::{deaugment, rotation_to_augmented_matrix, QuatMatrix, Quaternion};
use crate::qubit::{random_qubit, random_register_positive_orthant, QubitRegister};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitRotation {
    pub axis: Quaternion,
    pub angle: f64,
}

/// A ground-truth circuit with data generated through it.
///
/// The circuit rotates every qubit of `y` about its own random axis and then
/// moves qubit `s` to position `permutation[s]`, producing `x`. Training
/// pairs are `(x, y)`, so a learner recovers the inverse map.
#[derive(Clone, Debug)]
pub struct Instance {
    pub w_true: CircuitWeights,
    pub w_inverse: CircuitWeights,
    pub rotations: Vec<QubitRotation>,
    pub permutation: Vec<usize>,
    pub panel: MeasurementPanel,
    pub dataset: Vec<TrainingSample>,
}

impl Instance {
    pub fn m(&self) -> usize {
        self.permutation.len()
    }

    /// `x` produced by the ground-truth circuit from `y`.
    pub fn forward(&self, y: &QubitRegister) -> Result<QubitRegister> {
        let x = deaugment(&self.w_true.apply(y)?)?;
        QubitRegister::new(x)
    }
}

/// Samples a circuit and `samples` training pairs for an `m`-qubit register.
pub fn generate_instance<R: Rng + ?Sized>(
    m: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Instance> {
    if m == 0 || samples == 0 {
        return Err(Error::InvalidInput(
            "instance needs at least one qubit and one sample".into(),
        ));
    }
    let rotations: Vec<QubitRotation> = (0..m)
        .map(|_| QubitRotation {
            axis: random_qubit(rng).quaternion(),
            angle: rng.random_range(0.0..TAU),
        })
        .collect();
    let mut permutation: Vec<usize> = (0..m).collect();
    permutation.shuffle(rng);

    let n = 4 * m;
    let mut forward = QuatMatrix::zeros(n, n);
    let mut inverse = QuatMatrix::zeros(n, n);
    for (s, (rot, &target)) in rotations.iter().zip(&permutation).enumerate() {
        let z = rotation_to_augmented_matrix(rot.axis, rot.angle)?;
        let z_inv = rotation_to_augmented_matrix(rot.axis, -rot.angle)?;
        for b in 0..4 {
            for c in 0..4 {
                forward[(b * m + target, c * m + s)] = z[(b, c)];
                inverse[(b * m + s, c * m + target)] = z_inv[(b, c)];
            }
        }
    }

    let panel = canonical_panel(m)?;
    let mut instance = Instance {
        w_true: CircuitWeights::new(forward)?,
        w_inverse: CircuitWeights::new(inverse)?,
        rotations,
        permutation,
        panel,
        dataset: Vec::with_capacity(samples),
    };
    for _ in 0..samples {
        let y = random_register_positive_orthant(m, rng)?;
        let x = instance.forward(&y)?;
        instance
            .dataset
            .push(TrainingSample::new(x, y, &instance.panel)?);
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::{cost, Metric};
    use crate::quat::{augment, rotate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forward_moves_rotated_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = generate_instance(3, 2, &mut rng).unwrap();
        for sample in &inst.dataset {
            for (s, rot) in inst.rotations.iter().enumerate() {
                let expected =
                    rotate(sample.y().qubit(s).quaternion(), rot.axis, rot.angle).unwrap();
                let got = sample.x().qubit(inst.permutation[s]).quaternion();
                assert!((expected - got).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn augmented_norm_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = generate_instance(4, 3, &mut rng).unwrap();
        for sample in &inst.dataset {
            let ya = augment(sample.y().vector());
            let out = inst.w_true.apply(sample.y()).unwrap();
            assert!((out.norm() - ya.blocks().norm()).abs() < 1e-10);
            let targets: f64 = sample.d_targets().iter().sum();
            assert!((targets - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_inverse_fits_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inst = generate_instance(3, 8, &mut rng).unwrap();
        let product = inst
            .w_inverse
            .matrix()
            .matmul(inst.w_true.matrix())
            .unwrap();
        assert!(product.max_abs_diff(&QuatMatrix::identity(12)) < 1e-12);
        let c = cost(
            &inst.w_inverse,
            &inst.dataset,
            &inst.panel,
            Metric::SqrtDiff,
        )
        .unwrap();
        assert!(c < 1e-20);
    }

    #[test]
    fn same_seed_same_instance() {
        let a = generate_instance(2, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = generate_instance(2, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a.w_true, b.w_true);
        assert_eq!(a.dataset, b.dataset);
        assert!(generate_instance(0, 4, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
