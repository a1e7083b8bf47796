//! Fitting a circuit matrix `W` (4m×4m quaternions acting on augmented
//! registers) so that the measurements of `W xᵃ` reproduce the measurements
//! of the target register `y`.
//!
//! The cost of a dataset is the mean over samples and panel directions of a
//! metric between the estimated functional `d̂ = ¼ (Re{hᵃᵀ W xᵃ})²` and the
//! target functional `d = ¼ (Re{hᵃᵀ yᵃ})²`.

mod gradient;
mod train;

pub use gradient::{fd_gradient_check, gradient, gradient_with_branch, hr_to_real};
pub use train::{train, train_from, update_gain};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    estimate_expectation, functional, register_functionals, MeasurementDirection, MeasurementPanel,
    ProbabilityMode,
};
use crate::quat::{augment, QuatMatrix, QuatVector, Quaternion};
use crate::qubit::{ceil_log2, QubitRegister};

/// Cost above which training is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;
/// Default floor on `√d̂` in the square-root metric derivative.
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-12;

/// The learnable 4m×4m circuit matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitWeights {
    w: QuatMatrix,
    m: usize,
}

impl CircuitWeights {
    pub fn new(w: QuatMatrix) -> Result<Self> {
        let (rows, cols) = w.shape();
        if rows != cols || rows == 0 || !rows.is_multiple_of(4) {
            return Err(Error::InvalidInput(format!(
                "circuit matrix must be 4m x 4m, got {rows} x {cols}"
            )));
        }
        if !w.is_finite() {
            return Err(Error::InvalidInput(
                "circuit matrix has non-finite entries".into(),
            ));
        }
        Ok(CircuitWeights { m: rows / 4, w })
    }

    /// The no-op circuit.
    pub fn identity(m: usize) -> Self {
        CircuitWeights {
            w: QuatMatrix::identity(4 * m),
            m,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &QuatMatrix {
        &self.w
    }

    pub fn into_matrix(self) -> QuatMatrix {
        self.w
    }

    /// `W xᵃ`.
    pub fn apply(&self, x: &QubitRegister) -> Result<QuatVector> {
        if x.m() != self.m {
            return Err(Error::Shape {
                expected: self.m,
                found: x.m(),
            });
        }
        self.w.mul_vec(augment(x.vector()).blocks())
    }

    /// FNV-1a hash over the bit patterns of all entries.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for q in self.w.data() {
            for c in q.to_array() {
                for byte in c.to_bits().to_le_bytes() {
                    hash ^= byte as u64;
                    hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
        hash
    }
}

/// An input/target register pair with cached target functionals.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSample {
    x: QubitRegister,
    y: QubitRegister,
    x_aug: QuatVector,
    d_targets: Vec<f64>,
    sqrt_targets: Vec<f64>,
}

impl TrainingSample {
    pub fn new(x: QubitRegister, y: QubitRegister, panel: &MeasurementPanel) -> Result<Self> {
        if x.m() != panel.m() || y.m() != panel.m() {
            return Err(Error::Shape {
                expected: panel.m(),
                found: x.m().max(y.m()),
            });
        }
        let d_targets = register_functionals(panel, &y)?;
        let sqrt_targets = d_targets.iter().map(|d| d.sqrt()).collect();
        let x_aug = augment(x.vector()).into_blocks();
        Ok(TrainingSample {
            x,
            y,
            x_aug,
            d_targets,
            sqrt_targets,
        })
    }

    pub fn x(&self) -> &QubitRegister {
        &self.x
    }

    pub fn y(&self) -> &QubitRegister {
        &self.y
    }

    pub fn x_aug(&self) -> &QuatVector {
        &self.x_aug
    }

    /// Target functionals `d_s`, one per panel direction.
    pub fn d_targets(&self) -> &[f64] {
        &self.d_targets
    }

    pub(crate) fn sqrt_targets(&self) -> &[f64] {
        &self.sqrt_targets
    }
}

/// Distance between an estimated and a target functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `(√d̂ − √d)²`
    SqrtDiff,
    /// `(d̂ − d)²`
    SquaredDiff,
}

impl Metric {
    #[inline]
    pub fn value(self, dhat: f64, d: f64) -> f64 {
        match self {
            Metric::SqrtDiff => {
                let e = dhat.sqrt() - d.sqrt();
                e * e
            }
            Metric::SquaredDiff => {
                let e = dhat - d;
                e * e
            }
        }
    }

    /// `∂ metric / ∂ d̂`, with `√d̂` floored at `epsilon_floor` in the
    /// square-root denominator.
    #[inline]
    pub fn derivative(self, dhat: f64, d: f64, epsilon_floor: f64) -> f64 {
        match self {
            Metric::SqrtDiff => {
                let root = dhat.sqrt();
                (root - d.sqrt()) / root.max(epsilon_floor)
            }
            Metric::SquaredDiff => 2.0 * (dhat - d),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" | "sqrt-diff" => Ok(Metric::SqrtDiff),
            "squared" | "squared-diff" => Ok(Metric::SquaredDiff),
            _ => Err(Error::InvalidInput(format!("unknown metric '{s}'"))),
        }
    }
}

/// How the expected measurement `d̂` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationMode {
    /// Closed form `¼ (Re{hᵃᵀ W xᵃ})²`.
    Exact,
    /// Average of `draws` simulated measurements (clamped probabilities).
    MonteCarlo { draws: usize },
}

impl std::str::FromStr for ExpectationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(ExpectationMode::Exact);
        }
        let draws = s
            .strip_prefix("mc:")
            .or_else(|| s.strip_prefix("monte-carlo:"))
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k > 0)
            .ok_or_else(|| {
                Error::InvalidInput(format!("unknown expectation mode '{s}' (exact | mc:K)"))
            })?;
        Ok(ExpectationMode::MonteCarlo { draws })
    }
}

/// Which square root of `d̂` the descent direction differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `√d̂ = ½ |Re{hᵃᵀ W xᵃ}|`: the exact gradient of the cost.
    Magnitude,
    /// `√d̂ = ½ Re{hᵃᵀ W xᵃ}`: the signed root, assuming the projection is
    /// positive as it is for every target. Coincides with `Magnitude`
    /// wherever that holds, and keeps the square-root metric convex in `W`.
    Positive,
}

/// Whether each iteration uses one sample or the whole dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateSchedule {
    /// Iteration `n` uses sample `n mod N`.
    Sequential,
    /// Iteration `n` uses the gradient averaged over all samples.
    Batch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub mu: f64,
    pub iterations: usize,
    pub metric: Metric,
    pub expectation: ExpectationMode,
    /// Number of hypotheses; sets the step bound and the recoverability check.
    pub z: usize,
    pub seed: u64,
    pub epsilon_floor: f64,
    pub schedule: UpdateSchedule,
    pub branch: Branch,
    /// Reject `mu ≥ step_bound(z)` up front.
    pub enforce_bound: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            mu: 0.9 / 24.0,
            iterations: 2000,
            metric: Metric::SqrtDiff,
            expectation: ExpectationMode::Exact,
            z: 256,
            seed: 0,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            schedule: UpdateSchedule::Sequential,
            branch: Branch::Positive,
            enforce_bound: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::InvalidInput(format!(
                "step size must be nonnegative, got {}",
                self.mu
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidInput("need at least one iteration".into()));
        }
        if self.epsilon_floor.is_nan() || self.epsilon_floor <= 0.0 {
            return Err(Error::InvalidInput("epsilon floor must be positive".into()));
        }
        if let ExpectationMode::MonteCarlo { draws: 0 } = self.expectation {
            return Err(Error::InvalidInput(
                "monte-carlo mode needs at least one draw".into(),
            ));
        }
        if self.enforce_bound {
            let bound = step_bound(self.z)?;
            if self.mu >= bound {
                return Err(Error::InvalidInput(format!(
                    "step size {} is not below the bound {bound}",
                    self.mu
                )));
            }
        }
        Ok(())
    }
}

/// One iteration of a training run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// `10 log₁₀` of `cost`.
    pub cost_db: f64,
    /// Dataset cost before the update.
    pub cost: f64,
    /// Frobenius norm of the gradient used in the update.
    pub grad_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
    /// Whether the panel rank met `3⌈log₂ z⌉`.
    pub recoverable: bool,
}

impl TrainingTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cost_db(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cost_db).collect()
    }
}

/// `1 / (3⌈log₂ z⌉)`.
pub fn step_bound(z: usize) -> Result<f64> {
    if z < 2 {
        return Err(Error::InvalidInput(format!(
            "step bound needs z >= 2, got {z}"
        )));
    }
    Ok(1.0 / (3 * ceil_log2(z)) as f64)
}

/// Number of independent directions needed to recover `z` hypotheses.
pub fn required_directions(z: usize) -> usize {
    3 * ceil_log2(z.max(1))
}

/// `W − μ·grad`.
pub fn sgd_step(w: &CircuitWeights, grad: &QuatMatrix, mu: f64) -> Result<CircuitWeights> {
    let mut next = w.w.clone();
    next.add_scaled(grad, -mu)?;
    Ok(CircuitWeights { w: next, m: w.m })
}

/// Expected measurement of `W xᵃ` along `h`.
pub fn estimate_dhat<R: Rng + ?Sized>(
    w: &CircuitWeights,
    x: &QubitRegister,
    h: &MeasurementDirection,
    mode: ExpectationMode,
    rng: &mut R,
) -> Result<f64> {
    let v = w.apply(x)?;
    match mode {
        ExpectationMode::Exact => Ok(functional(h, &v)?.p_eq),
        ExpectationMode::MonteCarlo { draws } => {
            estimate_expectation(h, &v, ProbabilityMode::LiteralClamped, draws, rng)
        }
    }
}

/// Per-sample metric terms summed over the panel, from a precomputed `W xᵃ`.
#[inline]
pub(crate) fn panel_cost_terms(
    v: &[Quaternion],
    sample: &TrainingSample,
    panel: &MeasurementPanel,
    metric: Metric,
) -> f64 {
    panel
        .directions()
        .iter()
        .zip(sample.d_targets())
        .map(|(h, &d)| {
            let re = h.project_real(v);
            metric.value(0.25 * re * re, d)
        })
        .sum()
}

/// Dataset cost: mean over samples of the mean over panel directions.
pub fn cost(
    w: &CircuitWeights,
    batch: &[TrainingSample],
    panel: &MeasurementPanel,
    metric: Metric,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("cost of an empty batch".into()));
    }
    check_shapes(w, panel)?;
    let mut v = vec![Quaternion::ZERO; 4 * w.m];
    let mut total = 0.0;
    for sample in batch {
        if sample.x.m() != w.m || sample.d_targets.len() != panel.len() {
            return Err(Error::Shape {
                expected: w.m,
                found: sample.x.m(),
            });
        }
        w.w.mul_slice_into(sample.x_aug.as_slice(), &mut v);
        total += panel_cost_terms(&v, sample, panel, metric);
    }
    Ok(total / (batch.len() * panel.len()) as f64)
}

pub(crate) fn check_shapes(w: &CircuitWeights, panel: &MeasurementPanel) -> Result<()> {
    if panel.m() != w.m {
        return Err(Error::Shape {
            expected: w.m,
            found: panel.m(),
        });
    }
    Ok(())
}

/// `10 log₁₀(cost)`.
pub fn to_db(cost: f64) -> f64 {
    10.0 * cost.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::canonical_panel;
    use crate::qubit::{random_register, random_register_positive_orthant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_bound_values() {
        assert_eq!(step_bound(256).unwrap(), 1.0 / 24.0);
        assert_eq!(step_bound(2).unwrap(), 1.0 / 3.0);
        assert_eq!(step_bound(5).unwrap(), 1.0 / 9.0);
        assert!(step_bound(1).is_err());
    }

    #[test]
    fn sqrt_metric_arithmetic() {
        assert_eq!(Metric::SqrtDiff.value(4.0, 1.0), 1.0);
        assert_eq!(Metric::SquaredDiff.value(4.0, 1.0), 9.0);
    }

    #[test]
    fn parse_modes() {
        assert_eq!(
            "exact".parse::<ExpectationMode>().unwrap(),
            ExpectationMode::Exact
        );
        assert_eq!(
            "mc:100".parse::<ExpectationMode>().unwrap(),
            ExpectationMode::MonteCarlo { draws: 100 }
        );
        assert!("mc:0".parse::<ExpectationMode>().is_err());
        assert_eq!("sqrt".parse::<Metric>().unwrap(), Metric::SqrtDiff);
        assert!("l1".parse::<Metric>().is_err());
    }

    #[test]
    fn identity_and_zero_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let panel = canonical_panel(3).unwrap();
        let x = random_register(3, &mut rng).unwrap();
        let xa = augment(x.vector()).into_blocks();
        let zero = CircuitWeights::new(QuatMatrix::zeros(12, 12)).unwrap();
        for h in panel.directions() {
            let direct = functional(h, &xa).unwrap().p_eq;
            let through = estimate_dhat(
                &CircuitWeights::identity(3),
                &x,
                h,
                ExpectationMode::Exact,
                &mut rng,
            )
            .unwrap();
            assert!((direct - through).abs() < 1e-15);
            assert_eq!(
                estimate_dhat(&zero, &x, h, ExpectationMode::Exact, &mut rng).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn cost_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let panel = canonical_panel(2).unwrap();
        let y = random_register_positive_orthant(2, &mut rng).unwrap();
        let perfect = TrainingSample::new(y.clone(), y, &panel).unwrap();
        let c = cost(
            &CircuitWeights::identity(2),
            &[perfect],
            &panel,
            Metric::SqrtDiff,
        )
        .unwrap();
        assert!(c < 1e-30);
        assert!(cost(&CircuitWeights::identity(2), &[], &panel, Metric::SqrtDiff).is_err());
    }

    #[test]
    fn sgd_step_linearity() {
        let w = CircuitWeights::identity(1);
        let g = QuatMatrix::from_fn(4, 4, |i, j| Quaternion::new(i as f64, j as f64, 0.5, -1.0));
        assert_eq!(sgd_step(&w, &QuatMatrix::zeros(4, 4), 0.3).unwrap(), w);
        assert_eq!(sgd_step(&w, &g, 0.0).unwrap(), w);
        let two = sgd_step(&sgd_step(&w, &g, 0.05).unwrap(), &g, 0.05).unwrap();
        let one = sgd_step(&w, &g, 0.1).unwrap();
        assert!(two.matrix().max_abs_diff(one.matrix()) < 1e-15);
    }

    #[test]
    fn weights_shape_checked() {
        assert!(CircuitWeights::new(QuatMatrix::zeros(4, 8)).is_err());
        assert!(CircuitWeights::new(QuatMatrix::zeros(6, 6)).is_err());
        let mut bad = QuatMatrix::identity(4);
        bad[(0, 0)] = Quaternion::real(f64::NAN);
        assert!(CircuitWeights::new(bad).is_err());
    }

    #[test]
    fn fingerprint_tracks_bits() {
        let a = CircuitWeights::identity(2);
        let mut m = a.matrix().clone();
        m[(1, 2)] = Quaternion::real(1e-300);
        let b = CircuitWeights::new(m).unwrap();
        assert_eq!(a.fingerprint(), CircuitWeights::identity(2).fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
