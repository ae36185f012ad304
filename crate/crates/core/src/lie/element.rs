use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex square matrix.
pub type CMat = DMatrix<Complex64>;

const MEMBERSHIP_TOL: f64 = 1e-12;

/// An anti-Hermitian, traceless complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    entries: CMat,
}

impl AlgebraElement {
    /// Wrap `entries`, checking the anti-Hermitian and traceless conditions.
    pub fn new(entries: CMat) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::NotInAlgebra(format!(
                "matrix is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let skew = (&entries + entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > MEMBERSHIP_TOL {
            return Err(Error::NotInAlgebra(format!("anti-Hermitian defect {skew:.3e}")));
        }
        let tr = entries.trace().norm();
        if tr > MEMBERSHIP_TOL {
            return Err(Error::NotInAlgebra(format!("trace {tr:.3e}")));
        }
        Ok(Self { entries })
    }

    /// Project an arbitrary square matrix onto the anti-Hermitian traceless part.
    pub fn project(m: &CMat) -> Self {
        let n = m.nrows();
        let mut a = (m - m.adjoint()) * Complex64::new(0.5, 0.0);
        let shift = a.trace() / Complex64::new(n as f64, 0.0);
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        Self { entries: a }
    }

    pub(crate) fn from_raw(entries: CMat) -> Self {
        Self { entries }
    }

    pub fn zero(n: usize) -> Self {
        Self { entries: CMat::zeros(n, n) }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { entries: &self.entries * Complex64::new(s, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { entries: &self.entries + &other.entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { entries: &self.entries - &other.entries }
    }

    /// `Σ coeffs[k] * elems[k]`; `n` is used when the list is empty.
    pub fn combination(n: usize, coeffs: &[f64], elems: &[AlgebraElement]) -> Self {
        let mut acc = CMat::zeros(n, n);
        for (c, e) in coeffs.iter().zip(elems) {
            if *c != 0.0 {
                acc += &e.entries * Complex64::new(*c, 0.0);
            }
        }
        Self { entries: acc }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Real Frobenius inner product `Re tr(A* B)`.
    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Real vectorization: row-major `[re, im]` pairs.
    pub fn to_real_vec(&self) -> Vec<f64> {
        let n = self.size();
        let mut out = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    /// Row-major `[re, im]` pairs, the JSON export layout.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        let n = self.size();
        (0..n)
            .map(|i| (0..n).map(|j| [self.entries[(i, j)].re, self.entries[(i, j)].im]).collect())
            .collect()
    }
}

/// The commutator `XY − YX`.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    if x.size() != y.size() {
        return Err(Error::SizeMismatch { left: x.size(), right: y.size() });
    }
    Ok(bracket_unchecked(x, y))
}

pub(crate) fn bracket_unchecked(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    AlgebraElement { entries: &x.entries * &y.entries - &y.entries * &x.entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_hermitian_and_traced() {
        let h = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(AlgebraElement::new(h).is_err());
        let t = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        assert!(AlgebraElement::new(t).is_err());
    }

    #[test]
    fn self_bracket_vanishes() {
        let x = AlgebraElement::new(CMat::from_row_slice(
            2,
            2,
            &[c(0.0, 0.3), c(1.0, 0.2), c(-1.0, 0.2), c(0.0, -0.3)],
        ))
        .unwrap();
        assert!(bracket(&x, &x).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        assert!(matches!(
            bracket(&AlgebraElement::zero(2), &AlgebraElement::zero(3)),
            Err(Error::SizeMismatch { .. })
        ));
    }
}
