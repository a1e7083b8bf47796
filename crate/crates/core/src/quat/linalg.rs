use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::Quaternion;
use crate::error::{Error, Result};

/// Column vector of quaternions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuatVector(pub Vec<Quaternion>);

impl QuatVector {
    pub fn zeros(len: usize) -> Self {
        QuatVector(vec![Quaternion::ZERO; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.0.iter()
    }

    /// Sum of the element norms squared.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|q| q.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Elementwise conjugate; viewed as a row this is the conjugate transpose.
    pub fn conj(&self) -> Self {
        QuatVector(self.0.iter().map(|q| q.conj()).collect())
    }

    /// `uᵀ v = Σ uᵢ vᵢ`, left factors from `self`, no conjugation.
    pub fn transpose_dot(&self, v: &QuatVector) -> Result<Quaternion> {
        if self.len() != v.len() {
            return Err(Error::Shape {
                expected: self.len(),
                found: v.len(),
            });
        }
        Ok(self.0.iter().zip(&v.0).map(|(&a, &b)| a * b).sum())
    }

    /// `uᴴ v = Σ uᵢ* vᵢ`.
    pub fn hermitian_dot(&self, v: &QuatVector) -> Result<Quaternion> {
        self.conj().transpose_dot(v)
    }

    pub fn max_abs_diff(&self, other: &QuatVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<Quaternion>> for QuatVector {
    fn from(v: Vec<Quaternion>) -> Self {
        QuatVector(v)
    }
}

impl Index<usize> for QuatVector {
    type Output = Quaternion;
    fn index(&self, i: usize) -> &Quaternion {
        &self.0[i]
    }
}

impl IndexMut<usize> for QuatVector {
    fn index_mut(&mut self, i: usize) -> &mut Quaternion {
        &mut self.0[i]
    }
}

/// Dense row-major quaternion matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuatMatrix {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QuatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Quaternion,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QuatMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(QuatMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Quaternion] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Quaternion] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A v` with entry products taken in row·column order.
    pub fn mul_vec(&self, v: &QuatVector) -> Result<QuatVector> {
        if v.len() != self.cols {
            return Err(Error::Shape {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = vec![Quaternion::ZERO; self.rows];
        self.mul_slice_into(v.as_slice(), &mut out);
        Ok(QuatVector(out))
    }

    /// Unchecked kernel behind [`QuatMatrix::mul_vec`]; `out` is overwritten.
    #[inline]
    pub(crate) fn mul_slice_into(&self, v: &[Quaternion], out: &mut [Quaternion]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (row, o) in self.data.chunks_exact(self.cols).zip(out.iter_mut()) {
            let mut acc = Quaternion::ZERO;
            for (&a, &b) in row.iter().zip(v) {
                acc += a * b;
            }
            *o = acc;
        }
    }

    pub fn matmul(&self, other: &QuatMatrix) -> Result<QuatMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = QuatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Quaternion::ZERO {
                    continue;
                }
                let brow = other.row(l);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> QuatMatrix {
        QuatMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> QuatMatrix {
        QuatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|q| q.scale(s)).collect(),
        }
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, other: &QuatMatrix, s: f64) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(s);
        }
        Ok(())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    pub fn max_abs_diff(&self, other: &QuatMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for QuatMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QuatMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.data[i * self.cols + j]
    }
}

/// `u vᴴ`, i.e. `out[i][j] = u[i] · conj(v[j])`.
pub fn outer(u: &QuatVector, v: &QuatVector) -> QuatMatrix {
    let mut out = QuatMatrix::zeros(u.len(), v.len());
    accumulate_outer(&mut out, u.as_slice(), v.as_slice(), 1.0);
    out
}

/// `out += s · u vᴴ` without allocating.
#[inline]
pub(crate) fn accumulate_outer(out: &mut QuatMatrix, u: &[Quaternion], v: &[Quaternion], s: f64) {
    debug_assert_eq!(out.shape(), (u.len(), v.len()));
    let cols = out.cols;
    for (row, &ui) in out.data.chunks_exact_mut(cols).zip(u) {
        if ui == Quaternion::ZERO {
            continue;
        }
        let ui = ui.scale(s);
        for (o, &vj) in row.iter_mut().zip(v) {
            *o += ui * vj.conj();
        }
    }
}
