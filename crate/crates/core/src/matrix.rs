//! Small dense complex matrix kernel.
//!
//! Everything downstream of the interpreter works over these matrices:
//! products, Kronecker products, conjugate transposes, and max-norm
//! comparison. Dimensions stay desk-scale (the interpreter caps wire
//! counts), so the kernel is deliberately naive: row-major storage and
//! textbook loops.

use crate::error::{Error, Result};
use crate::num::{cis, Real, C};
use serde::Serialize;

/// A dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<S> {
    rows: usize,
    cols: usize,
    data: Vec<C<S>>,
}

/// Matrices produced by the interpreter are square and unitary; this alias
/// marks the places where that contract is expected to hold.
pub type DenseUnitary<S> = CMat<S>;

/// Comparison tolerance for semantic checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<S> {
    pub eps: S,
}

impl<S: Real> Tolerance<S> {
    /// `eps` must sit in `(0, 1e-3)`; anything looser is not a meaningful
    /// statement about unitaries with entries of modulus at most one.
    pub fn new(eps: S) -> Option<Self> {
        if eps > S::zero() && eps < S::from_f64(1e-3).unwrap() {
            Some(Tolerance { eps })
        } else {
            None
        }
    }
}

impl<S: Real> Default for Tolerance<S> {
    fn default() -> Self {
        Tolerance { eps: S::default_tol() }
    }
}

impl<S: Real> CMat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C::new(S::zero(), S::zero()); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = C::new(S::one(), S::zero());
        }
        m
    }

    /// 1x1 matrix holding the scalar e^{iθ}.
    pub fn phase_scalar(theta: S) -> Self {
        CMat { rows: 1, cols: 1, data: vec![cis(theta)] }
    }

    pub fn from_rows(rows: Vec<Vec<C<S>>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        CMat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> C<S> {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C<S>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn scale(&self, z: C<S>) -> Self {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * z).collect() }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    /// Block form `|0><0| ⊗ I + |1><1| ⊗ self` of the standard control.
    pub fn controlled(&self) -> Self {
        let n = self.dim();
        let mut out = CMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            out.set(i, i, C::new(S::one(), S::zero()));
            for j in 0..n {
                out.set(n + i, n + j, self.get(i, j));
            }
        }
        out
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, z| acc.max(z.norm()))
    }
}

/// Matrix product `A · B`.
pub fn matmul<S: Real>(a: &CMat<S>, b: &CMat<S>) -> Result<CMat<S>> {
    if a.cols != b.rows {
        return Err(Error::DimMismatch(a.rows, a.cols, b.rows, b.cols));
    }
    let mut out = CMat::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik.norm_sqr() == S::zero() {
                continue;
            }
            for j in 0..b.cols {
                let v = out.get(i, j) + aik * b.get(k, j);
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Kronecker product `A ⊗ B`; the left factor is the most significant block.
pub fn kron<S: Real>(a: &CMat<S>, b: &CMat<S>) -> CMat<S> {
    let mut out = CMat::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let v = a.get(ia, ja);
            if v.norm_sqr() == S::zero() {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out.set(ia * b.rows + ib, ja * b.cols + jb, v * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Entrywise max |A - B|.
pub fn max_abs_diff<S: Real>(a: &CMat<S>, b: &CMat<S>) -> Result<S> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimMismatch(a.rows, a.cols, b.rows, b.cols));
    }
    let mut worst = S::zero();
    for (x, y) in a.data.iter().zip(&b.data) {
        worst = worst.max((x - y).norm());
    }
    Ok(worst)
}

/// True iff `M · M†` is the identity within the tolerance.
pub fn is_unitary<S: Real>(m: &CMat<S>, tol: Tolerance<S>) -> bool {
    if m.rows != m.cols {
        return false;
    }
    let prod = matmul(m, &m.dagger()).expect("square product");
    max_abs_diff(&prod, &CMat::identity(m.rows)).expect("same dims") <= tol.eps
}

/// JSON image of a matrix: `{"dim": n, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Serialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl<S: Real> CMat<S> {
    pub fn to_json(&self) -> MatrixJson {
        let mut re = Vec::with_capacity(self.rows);
        let mut im = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row_re = Vec::with_capacity(self.cols);
            let mut row_im = Vec::with_capacity(self.cols);
            for j in 0..self.cols {
                let z = self.get(i, j);
                row_re.push(z.re.to_f64().unwrap());
                row_im.push(z.im.to_f64().unwrap());
            }
            re.push(row_re);
            im.push(row_im);
        }
        MatrixJson { dim: self.rows, re, im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn h() -> CMat<f64> {
        let s = FRAC_1_SQRT_2;
        CMat::from_rows(vec![
            vec![C::new(s, 0.0), C::new(s, 0.0)],
            vec![C::new(s, 0.0), C::new(-s, 0.0)],
        ])
    }

    #[test]
    fn h_squared_is_identity() {
        let hh = matmul(&h(), &h()).unwrap();
        assert!(max_abs_diff(&hh, &CMat::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn kron_with_scalar_phase() {
        let z = CMat::phase_scalar(0.7);
        let m = kron(&CMat::identity(2), &z);
        assert!(max_abs_diff(&m, &CMat::identity(2).scale(cis(0.7))).unwrap() < 1e-15);
        // scalar on the left too
        let m = kron(&z, &CMat::identity(2));
        assert!(max_abs_diff(&m, &CMat::identity(2).scale(cis(0.7))).unwrap() < 1e-15);
    }

    #[test]
    fn kron_z_pi_with_identity_is_diag_1_1_m1_m1() {
        let zpi = CMat::from_rows(vec![
            vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
            vec![C::new(0.0, 0.0), C::new(-1.0, 0.0)],
        ]);
        let m = kron(&zpi, &CMat::identity(2));
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((m.get(i, i) - C::new(*e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn unitarity_check_rejects_scaled_identity() {
        let two = CMat::identity(2).scale(C::new(2.0, 0.0));
        assert!(!is_unitary(&two, Tolerance::default()));
        assert!(is_unitary(&h(), Tolerance::default()));
    }

    #[test]
    fn matmul_rejects_bad_dims() {
        let a = CMat::<f64>::zeros(2, 3);
        let b = CMat::<f64>::zeros(2, 3);
        assert!(matches!(matmul(&a, &b), Err(Error::DimMismatch(..))));
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::new(1e-9f64).is_some());
        assert!(Tolerance::new(0.0f64).is_none());
        assert!(Tolerance::new(1e-2f64).is_none());
    }
}
