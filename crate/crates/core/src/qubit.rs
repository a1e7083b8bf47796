//! Qubits as unit pure quaternions, registers of them, and the encodings of
//! hypothesis probabilities into registers.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{QuatVector, Quaternion};

/// Tolerance for the pure/unit invariants of a single qubit.
pub const QUBIT_TOLERANCE: f64 = 1e-12;
/// Tolerance for register-level norms.
pub const REGISTER_TOLERANCE: f64 = 1e-10;
/// Tolerance on the normalization `|α|² + |β|² = 1`.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-10;

/// A single qubit, i.e. a point on the unit sphere of pure quaternions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitState(Quaternion);

impl QubitState {
    pub fn new(q: Quaternion) -> Result<Self> {
        if !q.is_pure(QUBIT_TOLERANCE) || !q.is_unit(QUBIT_TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "qubit quaternion must be unit and pure, got {q}"
            )));
        }
        Ok(QubitState(q))
    }

    pub fn quaternion(self) -> Quaternion {
        self.0
    }

    /// Polar angle `θ = acos(k)` and azimuth `φ = atan2(j, i)`.
    pub fn angles(self) -> (f64, f64) {
        let q = self.0;
        (q.k.clamp(-1.0, 1.0).acos(), q.j.atan2(q.i))
    }
}

/// `i sinθ cosφ + j sinθ sinφ + k cosθ`.
pub fn bloch_from_angles(theta: f64, phi: f64) -> QubitState {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    QubitState(Quaternion::pure(st * cp, st * sp, ct))
}

/// Maps `α|0⟩ + β|1⟩` to a quaternion: the pair is first rotated by the
/// global phase that makes `α` real and nonnegative, then `α → k`,
/// `Re β → i`, `Im β → j`. When `α = 0` the phase of `β` is removed instead,
/// so every `|1⟩` representative lands on `i`.
pub fn qubit_from_amplitudes(alpha: Complex64, beta: Complex64) -> Result<QubitState> {
    let total = alpha.norm_sqr() + beta.norm_sqr();
    if !total.is_finite() || (total - 1.0).abs() > AMPLITUDE_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "amplitudes must satisfy |alpha|^2 + |beta|^2 = 1, got {total}"
        )));
    }
    let reference = if alpha == Complex64::new(0.0, 0.0) {
        beta
    } else {
        alpha
    };
    let phase = Complex64::from_polar(1.0, -reference.arg());
    let (a, b) = (alpha * phase, beta * phase);
    let q = Quaternion::pure(b.re, b.im, a.re);
    // Renormalize away the input's allowed slack.
    Ok(QubitState(q.scale(1.0 / q.norm())))
}

/// Inverse of [`qubit_from_amplitudes`] on its image: `α = k`, `β = i + i·j`.
pub fn amplitudes_from_qubit(s: QubitState) -> (Complex64, Complex64) {
    let q = s.0;
    (Complex64::new(q.k, 0.0), Complex64::new(q.i, q.j))
}

/// `m` qubits stored with the `1/√m` register scaling, so the register has unit norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitRegister {
    q: QuatVector,
}

impl QubitRegister {
    /// Wraps an already-scaled vector, checking the register invariants.
    pub fn new(q: QuatVector) -> Result<Self> {
        let m = q.len();
        if m == 0 {
            return Err(Error::InvalidInput(
                "register needs at least one qubit".into(),
            ));
        }
        let expected = 1.0 / (m as f64).sqrt();
        for (s, e) in q.iter().enumerate() {
            if !e.is_pure(QUBIT_TOLERANCE) || (e.norm() - expected).abs() > REGISTER_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "register element {s} must be pure with norm 1/sqrt({m}), got {e}"
                )));
            }
        }
        Ok(QubitRegister { q })
    }

    /// Builds a register from unscaled qubits.
    pub fn from_qubits(qubits: &[QubitState]) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::InvalidInput(
                "register needs at least one qubit".into(),
            ));
        }
        let scale = 1.0 / (qubits.len() as f64).sqrt();
        Ok(QubitRegister {
            q: QuatVector(qubits.iter().map(|s| s.0.scale(scale)).collect()),
        })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    pub fn vector(&self) -> &QuatVector {
        &self.q
    }

    /// Qubit `s` without the register scaling.
    pub fn qubit(&self, s: usize) -> QubitState {
        QubitState(self.q[s].scale((self.m() as f64).sqrt()))
    }

    pub fn qubits(&self) -> Vec<QubitState> {
        (0..self.m()).map(|s| self.qubit(s)).collect()
    }

    /// The 3m imaginary components, qubit-major.
    pub fn components(&self) -> Vec<f64> {
        self.q.iter().flat_map(|e| e.vector()).collect()
    }
}

/// Uniformly random qubit on the unit sphere.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> QubitState {
    loop {
        let v: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return QubitState(Quaternion::pure(v[0] / n, v[1] / n, v[2] / n));
        }
    }
}

/// Register of independent uniformly random qubits.
pub fn random_register<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<QubitRegister> {
    let qubits: Vec<_> = (0..m).map(|_| random_qubit(rng)).collect();
    QubitRegister::from_qubits(&qubits)
}

/// Random register with every imaginary component nonnegative.
///
/// Each qubit is drawn uniformly from the positive octant of the unit sphere
/// (three half-normal magnitudes, normalized), then the register is scaled by
/// `1/√m`. The result lies on the positive orthant of the unit 3m-sphere.
pub fn random_register_positive_orthant<R: Rng + ?Sized>(
    m: usize,
    rng: &mut R,
) -> Result<QubitRegister> {
    if m == 0 {
        return Err(Error::InvalidInput(
            "register needs at least one qubit".into(),
        ));
    }
    let qubits: Vec<_> = (0..m)
        .map(|_| {
            let q = random_qubit(rng).quaternion();
            QubitState(Quaternion::pure(q.i.abs(), q.j.abs(), q.k.abs()))
        })
        .collect();
    QubitRegister::from_qubits(&qubits)
}

/// How hypothesis probabilities are laid out over qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingScheme {
    /// One hypothesis per qubit; qubit `s` carries `p_s` as its `|1⟩` weight.
    PerQubitAmplitude,
    /// `⌈log₂ z⌉` qubits; qubit `b` carries the probability that bit `b` of
    /// the hypothesis index is set. Joint correlations are lost.
    BitwiseMarginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisEncoding {
    z: usize,
    scheme: EncodingScheme,
    m: usize,
}

/// `⌈log₂ z⌉` for `z ≥ 1`.
pub fn ceil_log2(z: usize) -> usize {
    assert!(z >= 1);
    (usize::BITS - (z - 1).leading_zeros()) as usize
}

impl HypothesisEncoding {
    pub fn per_qubit(z: usize) -> Result<Self> {
        if z == 0 {
            return Err(Error::InvalidInput("need at least one hypothesis".into()));
        }
        Ok(HypothesisEncoding {
            z,
            scheme: EncodingScheme::PerQubitAmplitude,
            m: z,
        })
    }

    pub fn bitwise(z: usize) -> Result<Self> {
        if z < 2 {
            return Err(Error::InvalidInput(
                "bitwise encoding needs at least two hypotheses".into(),
            ));
        }
        Ok(HypothesisEncoding {
            z,
            scheme: EncodingScheme::BitwiseMarginal,
            m: ceil_log2(z),
        })
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn scheme(&self) -> EncodingScheme {
        self.scheme
    }
}

/// Encodes hypothesis probabilities into a register.
pub fn encode_distribution(p: &[f64], enc: &HypothesisEncoding) -> Result<QubitRegister> {
    if p.len() != enc.z {
        return Err(Error::Shape {
            expected: enc.z,
            found: p.len(),
        });
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "probabilities must be nonnegative, got {bad}"
        )));
    }
    let weights: Vec<f64> = match enc.scheme {
        EncodingScheme::PerQubitAmplitude => {
            if let Some(bad) = p.iter().find(|v| **v > 1.0) {
                return Err(Error::InvalidInput(format!(
                    "per-qubit probability above one: {bad}"
                )));
            }
            p.to_vec()
        }
        EncodingScheme::BitwiseMarginal => {
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "distribution must sum to one, got {total}"
                )));
            }
            (0..enc.m)
                .map(|b| {
                    p.iter()
                        .enumerate()
                        .filter(|(h, _)| (h >> b) & 1 == 1)
                        .map(|(_, v)| v)
                        .sum()
                })
                .collect()
        }
    };
    // Built through the amplitude encoding so both share one convention.
    let qubits = weights
        .iter()
        .map(|&w| {
            let w = w.clamp(0.0, 1.0);
            qubit_from_amplitudes(
                Complex64::new((1.0 - w).sqrt(), 0.0),
                Complex64::new(w.sqrt(), 0.0),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    QubitRegister::from_qubits(&qubits)
}

/// Inverse of [`encode_distribution`]. Bitwise registers decode to the
/// product measure over their bit marginals.
pub fn decode_distribution(reg: &QubitRegister, enc: &HypothesisEncoding) -> Result<Vec<f64>> {
    if reg.m() != enc.m {
        return Err(Error::Shape {
            expected: enc.m,
            found: reg.m(),
        });
    }
    let m = reg.m() as f64;
    let weights: Vec<f64> = reg
        .vector()
        .iter()
        .map(|q| (m * (q.i * q.i + q.j * q.j)).clamp(0.0, 1.0))
        .collect();
    Ok(match enc.scheme {
        EncodingScheme::PerQubitAmplitude => weights,
        EncodingScheme::BitwiseMarginal => (0..enc.z)
            .map(|h| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(b, &w)| if (h >> b) & 1 == 1 { w } else { 1.0 - w })
                    .product()
            })
            .collect(),
    })
}
