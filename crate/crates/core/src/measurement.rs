//! Measurement of registers against probe directions.
//!
//! For a direction `h` and a length-4m vector `v` (normally an augmented
//! register `qᵃ`, or a circuit output `W xᵃ`) the scalar `u = hᵃᵀ v` yields the
//! functionals `p_eq = ¼ (Re u)²` and `p_neq = ¼ ‖Im u‖²`. For a true
//! augmented register `u` is real, so `p_neq` vanishes; on the canonical panel
//! the `p_eq` values add up to 4. Probability semantics are layered on top via
//! [`ProbabilityMode`].

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::quat::{augment, real_expansion, Involution, QuatVector, Quaternion};
use crate::qubit::{QubitRegister, QubitState};

/// Default tolerance on panel sums when reconstructing from exact functionals.
pub const EXACT_RECONSTRUCT_TOLERANCE: f64 = 1e-6;
/// Threshold used by the numerical rank test of a panel.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// A unit pure probe vector `h` with its cached augmented stack.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementDirection {
    h: QuatVector,
    h_aug: QuatVector,
    /// Indices of nonzero entries of `h_aug`.
    support: Vec<usize>,
}

impl MeasurementDirection {
    pub fn new(h: QuatVector) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidInput(
                "direction needs at least one entry".into(),
            ));
        }
        if h.iter().any(|q| !q.is_finite() || !q.is_pure(1e-12)) {
            return Err(Error::InvalidInput(
                "direction entries must be pure quaternions".into(),
            ));
        }
        if (h.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "direction must have unit norm, got {}",
                h.norm()
            )));
        }
        let h_aug = augment(&h).into_blocks();
        let support = h_aug
            .iter()
            .enumerate()
            .filter(|(_, q)| **q != Quaternion::ZERO)
            .map(|(i, _)| i)
            .collect();
        Ok(MeasurementDirection { h, h_aug, support })
    }

    /// `-μ e_s`: probes the `μ` component of qubit `s` in an `m`-qubit register.
    pub fn canonical(m: usize, s: usize, mu: Involution) -> Result<Self> {
        if s >= m {
            return Err(Error::InvalidInput(format!(
                "qubit {s} outside register of {m}"
            )));
        }
        let mut h = QuatVector::zeros(m);
        h[s] = -mu.unit();
        MeasurementDirection::new(h)
    }

    pub fn h(&self) -> &QuatVector {
        &self.h
    }

    pub fn augmented(&self) -> &QuatVector {
        &self.h_aug
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    pub(crate) fn support(&self) -> &[usize] {
        &self.support
    }

    /// `hᵃᵀ v` without shape checks.
    #[inline]
    pub(crate) fn project(&self, v: &[Quaternion]) -> Quaternion {
        let mut acc = Quaternion::ZERO;
        for &i in &self.support {
            acc += self.h_aug[i] * v[i];
        }
        acc
    }

    /// `Re{hᵃᵀ v}` without shape checks.
    #[inline]
    pub(crate) fn project_real(&self, v: &[Quaternion]) -> f64 {
        let mut acc = 0.0;
        for &i in &self.support {
            let (a, b) = (self.h_aug[i], v[i]);
            acc += a.r * b.r - a.i * b.i - a.j * b.j - a.k * b.k;
        }
        acc
    }
}

/// A set of probe directions on an `m`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPanel {
    directions: Vec<MeasurementDirection>,
    m: usize,
    canonical: bool,
}

/// The `i`, `j`, `k` probes of every qubit, qubit-major: direction `3s + c`
/// measures component `c` of qubit `s`.
pub fn canonical_panel(m: usize) -> Result<MeasurementPanel> {
    if m == 0 {
        return Err(Error::InvalidInput("panel needs at least one qubit".into()));
    }
    let mut directions = Vec::with_capacity(3 * m);
    for s in 0..m {
        for mu in Involution::ALL {
            directions.push(MeasurementDirection::canonical(m, s, mu)?);
        }
    }
    Ok(MeasurementPanel {
        directions,
        m,
        canonical: true,
    })
}

impl MeasurementPanel {
    /// Builds a panel from arbitrary directions; they must share a register
    /// size and be linearly independent.
    pub fn new(directions: Vec<MeasurementDirection>) -> Result<Self> {
        let m = directions
            .first()
            .map(|d| d.m())
            .ok_or_else(|| Error::InvalidInput("panel needs at least one direction".into()))?;
        if let Some(d) = directions.iter().find(|d| d.m() != m) {
            return Err(Error::Shape {
                expected: m,
                found: d.m(),
            });
        }
        let panel = MeasurementPanel {
            directions,
            m,
            canonical: false,
        };
        let rank = panel.rank();
        if rank != panel.len() {
            return Err(Error::InvalidInput(format!(
                "panel directions are linearly dependent (rank {rank} of {})",
                panel.len()
            )));
        }
        Ok(panel)
    }

    pub fn directions(&self) -> &[MeasurementDirection] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Numerical rank of the directions' real component stacks
    /// (modified Gram–Schmidt with [`RANK_THRESHOLD`]).
    pub fn rank(&self) -> usize {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for d in &self.directions {
            let mut v = real_expansion(d.h());
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > RANK_THRESHOLD {
                v.iter_mut().for_each(|x| *x /= n);
                basis.push(v);
            }
        }
        basis.len()
    }

    /// Same panel with its directions reordered; `order[i]` is the old index
    /// of new direction `i`.
    pub fn permuted(&self, order: &[usize]) -> Result<MeasurementPanel> {
        if order.len() != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                found: order.len(),
            });
        }
        Ok(MeasurementPanel {
            directions: order.iter().map(|&i| self.directions[i].clone()).collect(),
            m: self.m,
            canonical: self.canonical && order.iter().enumerate().all(|(i, &j)| i == j),
        })
    }
}

/// The two measurement functionals of one probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomePair {
    pub p_eq: f64,
    pub p_neq: f64,
}

fn check_len(h: &MeasurementDirection, v: &QuatVector) -> Result<()> {
    if v.len() != 4 * h.m() {
        return Err(Error::Shape {
            expected: 4 * h.m(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Literal functionals `¼ (Re u)²` and `¼ ‖Im u‖²` with `u = hᵃᵀ v`. No clamping.
pub fn functional(h: &MeasurementDirection, v: &QuatVector) -> Result<OutcomePair> {
    check_len(h, v)?;
    let u = h.project(v.as_slice());
    Ok(OutcomePair {
        p_eq: 0.25 * u.r * u.r,
        p_neq: 0.25 * u.imag().norm_sqr(),
    })
}

/// `p_eq` of every panel direction for the vector `v`.
pub fn panel_functionals(panel: &MeasurementPanel, v: &QuatVector) -> Result<Vec<f64>> {
    panel
        .directions()
        .iter()
        .map(|h| functional(h, v).map(|o| o.p_eq))
        .collect()
}

/// `p_eq` of every panel direction for an augmented register.
pub fn register_functionals(panel: &MeasurementPanel, reg: &QubitRegister) -> Result<Vec<f64>> {
    panel_functionals(panel, augment(reg.vector()).blocks())
}

/// How a functional is turned into an outcome probability.
#[derive(Clone, Copy, Debug)]
pub enum ProbabilityMode<'a> {
    /// `min(p_eq, 1)`.
    LiteralClamped,
    /// `p_eq` divided by the sum of `p_eq` over the panel.
    PanelNormalized(&'a MeasurementPanel),
}

/// Probability that measuring `v` along `h` yields outcome 1.
pub fn outcome_probability(
    h: &MeasurementDirection,
    v: &QuatVector,
    mode: ProbabilityMode<'_>,
) -> Result<f64> {
    let p_eq = functional(h, v)?.p_eq;
    match mode {
        ProbabilityMode::LiteralClamped => Ok(p_eq.min(1.0)),
        ProbabilityMode::PanelNormalized(panel) => {
            if panel.m() != h.m() {
                return Err(Error::Shape {
                    expected: panel.m(),
                    found: h.m(),
                });
            }
            let total: f64 = panel_functionals(panel, v)?.iter().sum();
            if total <= 0.0 || !total.is_finite() {
                return Err(Error::UndefinedProbability);
            }
            Ok((p_eq / total).min(1.0))
        }
    }
}

/// One Bernoulli measurement: `true` means the register collapsed onto `h`.
pub fn sample_outcome<R: Rng + ?Sized>(
    h: &MeasurementDirection,
    v: &QuatVector,
    mode: ProbabilityMode<'_>,
    rng: &mut R,
) -> Result<bool> {
    let p = outcome_probability(h, v, mode)?;
    Ok(rng.random_bool(p))
}

/// Mean of `k` independent [`sample_outcome`] draws.
pub fn estimate_expectation<R: Rng + ?Sized>(
    h: &MeasurementDirection,
    v: &QuatVector,
    mode: ProbabilityMode<'_>,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one draw".into()));
    }
    let p = outcome_probability(h, v, mode)?;
    let hits = (0..k).filter(|_| rng.random_bool(p)).count();
    Ok(hits as f64 / k as f64)
}

/// Same distribution as [`estimate_expectation`] for a known probability,
/// drawn as one binomial count instead of `k` Bernoulli trials.
pub fn binomial_mean<R: Rng + ?Sized>(p: f64, k: usize, rng: &mut R) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one draw".into()));
    }
    let dist = Binomial::new(k as u64, p.clamp(0.0, 1.0))
        .map_err(|e| Error::InvalidInput(format!("binomial parameters: {e}")))?;
    Ok(dist.sample(rng) as f64 / k as f64)
}

/// Rebuilds a register from its canonical-panel functionals.
///
/// Component `μ` of qubit `s` is set to `√d_{s,μ} / 2` (the nonnegative
/// branch). Each qubit's functionals must add up to `4/m` within `tolerance`;
/// the qubit is then rescaled to norm exactly `1/√m`.
pub fn reconstruct_register(
    panel: &MeasurementPanel,
    d: &[f64],
    tolerance: f64,
) -> Result<QubitRegister> {
    if !panel.is_canonical() {
        return Err(Error::InvalidInput(
            "reconstruction requires the canonical panel".into(),
        ));
    }
    let m = panel.m();
    if d.len() != 3 * m {
        return Err(Error::Shape {
            expected: 3 * m,
            found: d.len(),
        });
    }
    if let Some(bad) = d.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "functionals must be nonnegative, got {bad}"
        )));
    }
    let per_qubit = 4.0 / m as f64;
    let total: f64 = d.iter().sum();
    if (total - 4.0).abs() > tolerance * m as f64 {
        return Err(Error::InvalidInput(format!(
            "functionals sum to {total}, expected 4"
        )));
    }
    let mut qubits = Vec::with_capacity(m);
    for (s, chunk) in d.chunks_exact(3).enumerate() {
        let sum: f64 = chunk.iter().sum();
        if (sum - per_qubit).abs() > tolerance {
            return Err(Error::InvalidInput(format!(
                "qubit {s} functionals sum to {sum}, expected {per_qubit}"
            )));
        }
        let q = Quaternion::pure(chunk[0].sqrt(), chunk[1].sqrt(), chunk[2].sqrt()).scale(0.5);
        let n = q.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput(format!(
                "qubit {s} has no measured weight"
            )));
        }
        qubits.push(QubitState::new(q.scale(1.0 / n))?);
    }
    QubitRegister::from_qubits(&qubits)
}
