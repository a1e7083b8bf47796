//! Augmented quaternion vectors `[q; qᶦ; qʲ; qᵏ]` and their one-to-one linear
//! relation with the stacked real components `[q_r; q_i; q_j; q_k]`.
//!
//! With `A` the 4×4 block coefficient matrix returned by [`expansion_matrix`],
//! `qᵃ = A [q_r; q_i; q_j; q_k]` and, since `Aᴴ A = 4 I`, the inverse map is
//! `¼ Aᴴ qᵃ`. Any real-linear map `M` on the components therefore acts on
//! augmented vectors as `¼ A M Aᴴ`.

use super::{check_unit_pure, rotate_unchecked, Involution, QuatMatrix, QuatVector, Quaternion};
use crate::error::{Error, Result};

/// An augmented vector together with the vector it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedVector {
    base: QuatVector,
    blocks: QuatVector,
}

impl AugmentedVector {
    pub fn base(&self) -> &QuatVector {
        &self.base
    }

    /// The full length-4M stack.
    pub fn blocks(&self) -> &QuatVector {
        &self.blocks
    }

    pub fn into_blocks(self) -> QuatVector {
        self.blocks
    }

    /// Block `b` (0 = original, 1..=3 = i/j/k involution).
    pub fn block(&self, b: usize) -> &[Quaternion] {
        let m = self.base.len();
        &self.blocks.as_slice()[b * m..(b + 1) * m]
    }
}

/// Stacks `[v; vᶦ; vʲ; vᵏ]`.
pub fn augment(v: &QuatVector) -> AugmentedVector {
    let mut blocks = Vec::with_capacity(4 * v.len());
    blocks.extend_from_slice(v.as_slice());
    for mu in Involution::ALL {
        blocks.extend(v.iter().map(|q| q.involute(mu)));
    }
    AugmentedVector {
        base: v.clone(),
        blocks: QuatVector(blocks),
    }
}

/// Returns block 0 of a length-4M stack.
pub fn deaugment(a: &QuatVector) -> Result<QuatVector> {
    if !a.len().is_multiple_of(4) {
        return Err(Error::Shape {
            expected: 4 * (a.len() / 4 + 1),
            found: a.len(),
        });
    }
    Ok(QuatVector(a.as_slice()[..a.len() / 4].to_vec()))
}

/// Block coefficients `A` of the augmented expansion: row `b` gives the
/// multipliers of `[q_r, q_i, q_j, q_k]` producing block `b`.
pub fn expansion_matrix() -> [[Quaternion; 4]; 4] {
    let (one, i, j, k) = (Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K);
    [
        [one, i, j, k],
        [one, i, -j, -k],
        [one, -i, j, -k],
        [one, -i, -j, k],
    ]
}

/// Maps `v` (length M) to its real component stack `[v_r; v_i; v_j; v_k]`
/// (length 4M), going through the augmented vector and `¼ Aᴴ`.
pub fn real_expansion(v: &QuatVector) -> Vec<f64> {
    let m = v.len();
    let aug = augment(v);
    let a = expansion_matrix();
    let mut out = vec![0.0; 4 * m];
    for p in 0..m {
        for c in 0..4 {
            let mut acc = Quaternion::ZERO;
            for (b, row) in a.iter().enumerate() {
                acc += row[c].conj() * aug.blocks[b * m + p];
            }
            // `acc` is real for a genuine augmented stack.
            out[c * m + p] = 0.25 * acc.r;
        }
    }
    out
}

/// Inverse of [`real_expansion`]: builds the augmented stack `A r` and
/// returns its first block.
pub fn real_contraction(real: &[f64]) -> Result<QuatVector> {
    if !real.len().is_multiple_of(4) {
        return Err(Error::Shape {
            expected: 4 * (real.len() / 4 + 1),
            found: real.len(),
        });
    }
    let m = real.len() / 4;
    let a = expansion_matrix();
    let mut stack = QuatVector::zeros(4 * m);
    for (b, row) in a.iter().enumerate() {
        for p in 0..m {
            stack[b * m + p] = (0..4).map(|c| row[c] * real[c * m + p]).sum();
        }
    }
    deaugment(&stack)
}

/// The 4×4 quaternion matrix `Z` with `augment(rotate(q)) = Z · augment(q)`.
///
/// Built as `¼ A M Aᴴ` where `M = diag(1, R)` and the columns of the 3×3
/// rotation `R` are the rotated basis quaternions.
pub fn rotation_to_augmented_matrix(axis: Quaternion, angle: f64) -> Result<QuatMatrix> {
    check_unit_pure(axis, "rotation axis must be a unit pure quaternion")?;
    Ok(real_map_to_augmented(&rotation_components(axis, angle)))
}

/// Real 4×4 component matrix of the rotation (real part fixed).
fn rotation_components(axis: Quaternion, angle: f64) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    m[0][0] = 1.0;
    for (col, basis) in [Quaternion::I, Quaternion::J, Quaternion::K]
        .into_iter()
        .enumerate()
    {
        let image = rotate_unchecked(basis, axis, angle);
        for (row, v) in image.vector().into_iter().enumerate() {
            m[row + 1][col + 1] = v;
        }
    }
    m
}

/// `¼ A M Aᴴ` for a real 4×4 component map `M`.
pub(crate) fn real_map_to_augmented(m: &[[f64; 4]; 4]) -> QuatMatrix {
    let a = expansion_matrix();
    QuatMatrix::from_fn(4, 4, |row, col| {
        let mut acc = Quaternion::ZERO;
        for (p, mp) in m.iter().enumerate() {
            for (q, &mpq) in mp.iter().enumerate() {
                if mpq != 0.0 {
                    acc += a[row][p] * a[col][q].conj() * mpq;
                }
            }
        }
        acc.scale(0.25)
    })
}
