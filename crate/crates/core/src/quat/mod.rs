//! Quaternion scalars, dense quaternion linear algebra and the augmented
//! (widely-linear) representation.
//!
//! Products follow the Hamilton convention `ij = k`, `jk = i`, `ki = j`,
//! `i² = j² = k² = ijk = -1`.

mod augmented;
mod linalg;

pub use augmented::{
    augment, deaugment, expansion_matrix, real_contraction, real_expansion,
    rotation_to_augmented_matrix, AugmentedVector,
};
pub(crate) use linalg::accumulate_outer;
pub use linalg::{outer, QuatMatrix, QuatVector};

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that an argument is a unit or pure quaternion.
pub const UNIT_TOLERANCE: f64 = 1e-10;

/// A real quaternion `r + i·i + j·j + k·k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub r: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

/// The three elementary involutions `q ↦ μ q μ⁻¹` for `μ ∈ {i, j, k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Involution {
    I,
    J,
    K,
}

impl Involution {
    pub const ALL: [Involution; 3] = [Involution::I, Involution::J, Involution::K];

    /// The imaginary unit this involution conjugates by.
    pub fn unit(self) -> Quaternion {
        match self {
            Involution::I => Quaternion::I,
            Involution::J => Quaternion::J,
            Involution::K => Quaternion::K,
        }
    }

    /// Index into the augmented stack: block 1, 2 or 3.
    pub fn block(self) -> usize {
        match self {
            Involution::I => 1,
            Involution::J => 2,
            Involution::K => 3,
        }
    }
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(r: f64, i: f64, j: f64, k: f64) -> Self {
        Quaternion { r, i, j, k }
    }

    #[inline]
    pub const fn real(r: f64) -> Self {
        Quaternion::new(r, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub const fn pure(i: f64, j: f64, k: f64) -> Self {
        Quaternion::new(0.0, i, j, k)
    }

    #[inline]
    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.r, self.i, self.j, self.k]
    }

    /// Imaginary part as a pure quaternion.
    #[inline]
    pub fn imag(self) -> Quaternion {
        Quaternion::pure(self.i, self.j, self.k)
    }

    /// Imaginary part as a 3-vector `(i, j, k)`.
    #[inline]
    pub fn vector(self) -> [f64; 3] {
        [self.i, self.j, self.k]
    }

    /// Component along `i`, `j` or `k`.
    #[inline]
    pub fn imag_component(self, axis: Involution) -> f64 {
        match axis {
            Involution::I => self.i,
            Involution::J => self.j,
            Involution::K => self.k,
        }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Quaternion::new(self.r, -self.i, -self.j, -self.k)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.r * self.r + self.i * self.i + self.j * self.j + self.k * self.k
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn imag_norm(self) -> f64 {
        (self.i * self.i + self.j * self.j + self.k * self.k).sqrt()
    }

    /// Euclidean inner product of the component 4-vectors; equals `Re{p q*}`.
    #[inline]
    pub fn dot(self, other: Quaternion) -> f64 {
        self.r * other.r + self.i * other.i + self.j * other.j + self.k * other.k
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.r * s, self.i * s, self.j * s, self.k * s)
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.i.is_finite() && self.j.is_finite() && self.k.is_finite()
    }

    pub fn is_pure(self, tol: f64) -> bool {
        self.r.abs() <= tol
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// `q* / ‖q‖²`.
    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::Singular("inverse of a zero quaternion"));
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// Involution `ζ q ζ⁻¹` around an arbitrary nonzero `ζ`.
    pub fn involution(self, zeta: Quaternion) -> Result<Self> {
        let inv = zeta
            .inverse()
            .map_err(|_| Error::Singular("involution around a zero quaternion"))?;
        Ok(zeta * self * inv)
    }

    /// Elementary involution around `i`, `j` or `k`: keeps the real part and
    /// the chosen axis, flips the other two imaginary components.
    #[inline]
    pub fn involute(self, axis: Involution) -> Self {
        match axis {
            Involution::I => Quaternion::new(self.r, self.i, -self.j, -self.k),
            Involution::J => Quaternion::new(self.r, -self.i, self.j, -self.k),
            Involution::K => Quaternion::new(self.r, -self.i, -self.j, self.k),
        }
    }

    /// Polar form `‖q‖ (cos θ + ξ sin θ)` with `θ = atan2(‖Im q‖, Re q) ∈ [0, π]`.
    pub fn polar(self) -> Result<Polar> {
        let imag_norm = self.imag_norm();
        if imag_norm == 0.0 {
            return Err(Error::UndefinedAxis(
                "polar form of a purely real quaternion",
            ));
        }
        Ok(Polar {
            magnitude: self.norm(),
            axis: self.imag().scale(1.0 / imag_norm),
            angle: imag_norm.atan2(self.r),
        })
    }

    /// Total variant of [`Quaternion::polar`]: purely real inputs get the
    /// axis `i` and an angle of `0` or `π`.
    pub fn polar_or_i(self) -> Polar {
        self.polar().unwrap_or(Polar {
            magnitude: self.norm(),
            axis: Quaternion::I,
            angle: if self.r < 0.0 {
                std::f64::consts::PI
            } else {
                0.0
            },
        })
    }
}

/// Polar decomposition of a quaternion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polar {
    pub magnitude: f64,
    pub axis: Quaternion,
    pub angle: f64,
}

impl Polar {
    pub fn to_quaternion(self) -> Quaternion {
        qexp_pure_unchecked(self.axis, self.angle).scale(self.magnitude)
    }
}

fn check_unit_pure(axis: Quaternion, what: &'static str) -> Result<()> {
    if !axis.is_finite() || !axis.is_pure(UNIT_TOLERANCE) || !axis.is_unit(UNIT_TOLERANCE) {
        return Err(Error::Precondition(what));
    }
    Ok(())
}

#[inline]
fn qexp_pure_unchecked(axis: Quaternion, angle: f64) -> Quaternion {
    let (s, c) = angle.sin_cos();
    Quaternion::real(c) + axis.scale(s)
}

/// `e^{axis·angle} = cos(angle) + axis·sin(angle)` for a unit pure `axis`.
pub fn qexp_pure(axis: Quaternion, angle: f64) -> Result<Quaternion> {
    check_unit_pure(axis, "exponential axis must be a unit pure quaternion")?;
    Ok(qexp_pure_unchecked(axis, angle))
}

/// Right-hand rotation of the pure quaternion `q` about `axis` by `angle`,
/// computed as `ξ q ξ⁻¹` with `ξ = e^{axis·angle/2}`.
pub fn rotate(q: Quaternion, axis: Quaternion, angle: f64) -> Result<Quaternion> {
    if !q.is_pure(UNIT_TOLERANCE) {
        return Err(Error::Precondition("rotated quaternion must be pure"));
    }
    check_unit_pure(axis, "rotation axis must be a unit pure quaternion")?;
    Ok(rotate_unchecked(q, axis, angle))
}

/// Sandwich product without precondition checks. Works for any `q`; the real
/// part is left untouched.
#[inline]
pub(crate) fn rotate_unchecked(q: Quaternion, axis: Quaternion, angle: f64) -> Quaternion {
    let xi = qexp_pure_unchecked(axis, 0.5 * angle);
    xi * q * xi.conj()
}

/// Rotation that maps one qubit quaternion onto another.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateRotation {
    pub axis: Quaternion,
    pub angle: f64,
    /// Set when input and output coincide and the axis was picked arbitrarily.
    pub arbitrary_axis: bool,
}

/// Recovers the involution that carries `q_in` to `q_out` (both unit pure):
/// the axis is the normalized `Im{q_in q_out}` and the angle is the in-plane
/// angle between them.
pub fn gate_to_involution(q_in: Quaternion, q_out: Quaternion) -> Result<GateRotation> {
    check_unit_pure(q_in, "gate input must be a unit pure quaternion")?;
    check_unit_pure(q_out, "gate output must be a unit pure quaternion")?;
    let prod = q_in * q_out;
    let normal = prod.imag();
    let sin = normal.norm();
    // Re{pq} = -p·q for pure p, q.
    let cos = -prod.r;
    if sin <= 1e-12 {
        if cos > 0.0 {
            return Ok(GateRotation {
                axis: orthogonal_unit(q_in),
                angle: 0.0,
                arbitrary_axis: true,
            });
        }
        return Err(Error::DegeneratePlane);
    }
    Ok(GateRotation {
        axis: normal.scale(1.0 / sin),
        angle: sin.atan2(cos),
        arbitrary_axis: false,
    })
}

/// Some unit pure quaternion orthogonal to the pure quaternion `q`.
pub fn orthogonal_unit(q: Quaternion) -> Quaternion {
    let [x, y, z] = q.vector();
    let candidate = if x.abs() <= y.abs() && x.abs() <= z.abs() {
        Quaternion::pure(0.0, -z, y)
    } else if y.abs() <= z.abs() {
        Quaternion::pure(-z, 0.0, x)
    } else {
        Quaternion::pure(-y, x, 0.0)
    };
    let n = candidate.norm();
    if n == 0.0 {
        Quaternion::I
    } else {
        candidate.scale(1.0 / n)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r + o.r, self.i + o.i, self.j + o.j, self.k + o.k)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Quaternion) {
        self.r += o.r;
        self.i += o.i;
        self.j += o.j;
        self.k += o.k;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r - o.r, self.i - o.i, self.j - o.j, self.k - o.k)
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Quaternion) {
        self.r -= o.r;
        self.i -= o.i;
        self.j -= o.j;
        self.k -= o.k;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.r, -self.i, -self.j, -self.k)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.r * q.r - p.i * q.i - p.j * q.j - p.k * q.k,
            p.r * q.i + p.i * q.r + p.j * q.k - p.k * q.j,
            p.r * q.j - p.i * q.k + p.j * q.r + p.k * q.i,
            p.r * q.k + p.i * q.j - p.j * q.i + p.k * q.r,
        )
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, q: Quaternion) {
        *self = *self * q;
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.r, self.i, self.j, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn product_table() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
        assert_eq!(i * i, -Quaternion::ONE);
        assert_eq!(i * j * k, -Quaternion::ONE);
        let q = Quaternion::new(0.3, -1.2, 2.0, 0.7);
        assert_eq!(Quaternion::ONE * q, q);
    }

    #[test]
    fn conj_norm_inverse() {
        let q = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        assert_eq!(q.conj(), Quaternion::new(1.0, -1.0, 0.0, 0.0));
        assert!((q.norm() - SQRT_2).abs() < 1e-15);
        assert_eq!(Quaternion::K.inverse().unwrap(), -Quaternion::K);
        assert!(matches!(
            Quaternion::ZERO.inverse(),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn polar_examples() {
        let p = Quaternion::new(1.0, 1.0, 0.0, 0.0).polar().unwrap();
        assert!((p.magnitude - SQRT_2).abs() < 1e-15);
        assert_eq!(p.axis, Quaternion::I);
        assert!((p.angle - FRAC_PI_4).abs() < 1e-15);

        let p = Quaternion::K.polar().unwrap();
        assert_eq!((p.magnitude, p.axis), (1.0, Quaternion::K));
        assert!((p.angle - FRAC_PI_2).abs() < 1e-15);

        let q = Quaternion::new(1f64.cos(), 0.0, 1f64.sin(), 0.0).scale(2.0);
        let p = q.polar().unwrap();
        assert!((p.magnitude - 2.0).abs() < 1e-14);
        assert!(close(p.axis, Quaternion::J, 1e-15));
        assert!((p.angle - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polar_negative_real_part_reconstructs() {
        let q = Quaternion::new(-2.0, 0.5, -0.25, 1.0);
        let p = q.polar().unwrap();
        assert!(p.angle > FRAC_PI_2 && p.angle <= PI);
        assert!(close(p.to_quaternion(), q, 1e-12));
    }

    #[test]
    fn polar_of_real_needs_convention() {
        assert!(matches!(
            Quaternion::real(-3.0).polar(),
            Err(Error::UndefinedAxis(_))
        ));
        let p = Quaternion::real(-3.0).polar_or_i();
        assert_eq!(p.axis, Quaternion::I);
        assert!(close(p.to_quaternion(), Quaternion::real(-3.0), 1e-14));
    }

    #[test]
    fn exponential() {
        assert_eq!(qexp_pure(Quaternion::K, 0.0).unwrap(), Quaternion::ONE);
        assert!(close(
            qexp_pure(Quaternion::I, FRAC_PI_2).unwrap(),
            Quaternion::I,
            1e-16
        ));
        assert!(qexp_pure(Quaternion::new(0.1, 1.0, 0.0, 0.0), 1.0).is_err());
        assert!(qexp_pure(Quaternion::pure(2.0, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn involution_examples() {
        let i = Quaternion::I;
        assert!(close(i.involution(i).unwrap(), i, 1e-15));
        assert!(close(i.involution(Quaternion::J).unwrap(), -i, 1e-15));
        assert!(i.involution(Quaternion::ZERO).is_err());
        let q = Quaternion::new(0.4, -1.0, 2.5, 3.0);
        let z = Quaternion::new(1.5, 0.3, -0.7, 2.0);
        assert!((q.involution(z).unwrap().norm() - q.norm()).abs() < 1e-12);
        for mu in Involution::ALL {
            assert!(close(
                q.involution(mu.unit()).unwrap(),
                q.involute(mu),
                1e-14
            ));
        }
    }

    #[test]
    fn rotation_examples() {
        let r = rotate(Quaternion::I, Quaternion::K, FRAC_PI_2).unwrap();
        assert!(close(r, Quaternion::J, 1e-15));
        let q = Quaternion::pure(0.2, -0.4, 0.9);
        let axis = Quaternion::pure(1.0, 2.0, -2.0).scale(1.0 / 3.0);
        assert!(close(rotate(q, axis, 0.0).unwrap(), q, 1e-15));
        let back = rotate(rotate(q, axis, 1.3).unwrap(), axis, -1.3).unwrap();
        assert!(close(back, q, 1e-14));
        assert!(rotate(Quaternion::ONE, axis, 1.0).is_err());
    }

    #[test]
    fn gate_recovery() {
        let g = gate_to_involution(Quaternion::I, Quaternion::J).unwrap();
        assert!(close(g.axis, Quaternion::K, 1e-15));
        assert!((g.angle - FRAC_PI_2).abs() < 1e-15);
        let q = Quaternion::pure(0.6, 0.0, 0.8);
        let same = gate_to_involution(q, q).unwrap();
        assert_eq!(same.angle, 0.0);
        assert!(same.arbitrary_axis);
        assert!(matches!(
            gate_to_involution(q, -q),
            Err(Error::DegeneratePlane)
        ));
    }

    #[test]
    fn orthogonal_unit_is_orthogonal() {
        for q in [
            Quaternion::I,
            Quaternion::pure(0.3, -0.5, 0.8),
            Quaternion::pure(0.0, 0.0, 2.0),
        ] {
            let o = orthogonal_unit(q);
            assert!(o.dot(q).abs() < 1e-15);
            assert!(o.is_unit(1e-15) && o.is_pure(0.0));
        }
    }
}
