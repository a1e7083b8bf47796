//! Quick invariant checks run by the command-line `selftest`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{generate_instance, likelihood_through};
use crate::learner::{fd_gradient_check, CircuitWeights, Metric};
use crate::measurement::{canonical_panel, reconstruct_register, register_functionals};
use crate::quat::{
    augment, real_contraction, real_expansion, rotate, rotation_to_augmented_matrix, Involution,
    QuatVector, Quaternion,
};
use crate::qubit::{
    amplitudes_from_qubit, decode_distribution, encode_distribution, qubit_from_amplitudes,
    random_qubit, random_register_positive_orthant, HypothesisEncoding,
};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest deviation observed.
    pub worst: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, worst: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: worst.is_finite() && worst <= tolerance,
        worst,
        tolerance,
    }
}

/// `max` that keeps a NaN from a failed step.
fn worse(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn random_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

fn algebra(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
    for (a, b) in [
        (i * j, k),
        (j * k, i),
        (k * i, j),
        (i * i, -Quaternion::ONE),
        (i * j * k, -Quaternion::ONE),
    ] {
        worst = worse(worst, (a - b).norm());
    }
    for _ in 0..200 {
        let (p, q) = (random_quaternion(rng), random_quaternion(rng));
        let sum: Quaternion = [
            q,
            q.involute(Involution::I),
            q.involute(Involution::J),
            q.involute(Involution::K),
        ]
        .into_iter()
        .sum();
        worst = worse(worst, (sum - Quaternion::real(4.0 * q.r)).norm());
        for mu in Involution::ALL {
            worst = worse(
                worst,
                ((p * q).involute(mu) - p.involute(mu) * q.involute(mu)).norm(),
            );
        }
    }
    check("quaternion algebra", worst, 1e-12)
}

fn rotations(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let axis = random_qubit(rng).quaternion();
        let angle: f64 = rng.random_range(-4.0..4.0);
        let q = random_quaternion(rng).imag();
        // Rodrigues on the vector part.
        let (u, v) = (axis.vector(), q.vector());
        let (c, s) = (angle.cos(), angle.sin());
        let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let cross = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        let r: Vec<f64> = (0..3)
            .map(|n| v[n] * c + cross[n] * s + u[n] * dot * (1.0 - c))
            .collect();
        let expected = Quaternion::new(q.r, r[0], r[1], r[2]);
        let got = rotate(q, axis, angle).unwrap_or(Quaternion::new(f64::NAN, 0.0, 0.0, 0.0));
        worst = worse(worst, (got - expected).norm());
        if let Ok(z) = rotation_to_augmented_matrix(axis, angle) {
            let single = QuatVector(vec![q]);
            let out = z
                .mul_vec(augment(&single).blocks())
                .map(|o| o.max_abs_diff(augment(&QuatVector(vec![got])).blocks()));
            worst = worse(worst, out.unwrap_or(f64::NAN));
        }
    }
    check("rotations and augmented rotation matrices", worst, 1e-10)
}

fn expansion(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let v = QuatVector((0..5).map(|_| random_quaternion(rng)).collect());
        let back = real_contraction(&real_expansion(&v)).map(|b| b.max_abs_diff(&v));
        worst = worse(worst, back.unwrap_or(f64::NAN));
    }
    check("real expansion round trip", worst, 1e-12)
}

fn encoding(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = Complex64::new(rng.random_range(0.1..1.0), rng.random_range(-1.0..1.0));
        let b = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..6.0));
        match (
            qubit_from_amplitudes(a, b),
            qubit_from_amplitudes(a * phase, b * phase),
        ) {
            (Ok(p), Ok(q)) => {
                worst = worse(worst, (p.quaternion() - q.quaternion()).norm());
                let (a2, b2) = amplitudes_from_qubit(p);
                worst = worse(
                    worst,
                    (qubit_from_amplitudes(a2, b2)
                        .map_or(f64::NAN, |r| (r.quaternion() - p.quaternion()).norm()))
                    .abs(),
                );
            }
            _ => worst = f64::NAN,
        }
    }
    for enc in [
        HypothesisEncoding::per_qubit(5),
        HypothesisEncoding::bitwise(8),
    ] {
        let Ok(enc) = enc else {
            return check("encoding", f64::NAN, 1e-12);
        };
        let p: Vec<f64> = match enc.scheme() {
            crate::qubit::EncodingScheme::PerQubitAmplitude => {
                (0..enc.z()).map(|_| rng.random_range(0.0..1.0)).collect()
            }
            crate::qubit::EncodingScheme::BitwiseMarginal => {
                // Product measure over three bits round-trips exactly.
                let bits: Vec<f64> = (0..enc.m()).map(|_| rng.random_range(0.0..1.0)).collect();
                (0..enc.z())
                    .map(|h| {
                        (0..enc.m())
                            .map(|b| {
                                if (h >> b) & 1 == 1 {
                                    bits[b]
                                } else {
                                    1.0 - bits[b]
                                }
                            })
                            .product()
                    })
                    .collect()
            }
        };
        let back = encode_distribution(&p, &enc).and_then(|r| decode_distribution(&r, &enc));
        match back {
            Ok(back) => {
                for (x, y) in p.iter().zip(&back) {
                    worst = worse(worst, (x - y).abs());
                }
            }
            Err(_) => worst = f64::NAN,
        }
    }
    check("qubit encodings", worst, 1e-10)
}

fn measurement(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    let Ok(panel) = canonical_panel(8) else {
        return check("measurement identities", f64::NAN, 1e-10);
    };
    for _ in 0..100 {
        let Ok(reg) = random_register_positive_orthant(8, rng) else {
            return check("measurement identities", f64::NAN, 1e-10);
        };
        let Ok(d) = register_functionals(&panel, &reg) else {
            return check("measurement identities", f64::NAN, 1e-10);
        };
        worst = worse(worst, (d.iter().sum::<f64>() - 4.0).abs());
        let rebuilt =
            reconstruct_register(&panel, &d, 1e-6).map(|r| r.vector().max_abs_diff(reg.vector()));
        worst = worse(worst, rebuilt.unwrap_or(f64::NAN));
    }
    check("measurement identities", worst, 1e-10)
}

fn gradient(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for metric in [Metric::SqrtDiff, Metric::SquaredDiff] {
        let result = generate_instance(2, 1, rng).and_then(|inst| {
            let mut w = CircuitWeights::identity(2).into_matrix();
            for q in w.data_mut() {
                *q += random_quaternion(rng).scale(0.2);
            }
            fd_gradient_check(
                &CircuitWeights::new(w)?,
                &inst.dataset[0],
                &inst.panel,
                metric,
                1e-6,
            )
        });
        worst = worse(worst, result.unwrap_or(f64::NAN));
    }
    check("gradient vs finite differences", worst, 1e-5)
}

fn inverse_pipeline(rng: &mut ChaCha8Rng) -> Check {
    let worst = generate_instance(4, 1, rng).and_then(|inst| {
        let truth: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        likelihood_through(&inst, &inst.w_inverse, &truth, 1e-8).map(|r| r.linf_error)
    });
    check(
        "likelihood recovery through the exact inverse",
        worst.unwrap_or(f64::NAN),
        1e-8,
    )
}

/// Runs every check from a fixed seed.
pub fn run(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        algebra(&mut rng),
        rotations(&mut rng),
        expansion(&mut rng),
        encoding(&mut rng),
        measurement(&mut rng),
        gradient(&mut rng),
        inverse_pipeline(&mut rng),
    ]
}
