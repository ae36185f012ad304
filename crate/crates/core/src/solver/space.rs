use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{Derivation, Monomial, PolyField};
use crate::haar::HaarMoments;
use crate::lie::{AlgebraElement, Frame};

/// Relative eigenvalue cutoff separating genuine trial directions from
/// constants and polynomial relations that vanish on the group.
const RANK_TOL: f64 = 1e-9;

/// Mean-zero polynomial trial functions of degree ≤ D, orthonormal for the
/// exact Dirichlet form of the full ε = 1 frame.
#[derive(Debug, Clone)]
pub struct TrialSpace {
    n: usize,
    degree: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// Column `k` holds the monomial coefficients of trial function `k`.
    basis: DMatrix<f64>,
    /// Exact `∫ m_j m_k`.
    gram: DMatrix<f64>,
    moments: Arc<HaarMoments>,
}

fn all_monomials(nvars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    let mut layer = vec![Vec::<u16>::new()];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &layer {
            let start = m.last().copied().unwrap_or(0);
            for v in start..nvars as u16 {
                let mut mm = m.clone();
                mm.push(v);
                next.push(mm);
            }
        }
        out.extend(next.iter().cloned().map(Monomial::from_vars));
        layer = next;
    }
    out
}

impl TrialSpace {
    pub fn new(frame: &Frame, degree: u32) -> Result<Self> {
        let n = frame.n();
        if degree == 0 {
            return Err(Error::OutOfRange("trial degree must be at least 1".into()));
        }
        let moments = Arc::new(HaarMoments::new(n));
        let monomials = all_monomials(2 * n * n, degree);
        let index: HashMap<Monomial, usize> =
            monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let big = monomials.len();
        let mut gram = DMatrix::zeros(big, big);
        for j in 0..big {
            for k in j..big {
                let v = moments.moment(&monomials[j].mul(&monomials[k]))?;
                gram[(j, k)] = v;
                gram[(k, j)] = v;
            }
        }
        let mut space = Self {
            n,
            degree,
            monomials,
            index,
            basis: DMatrix::zeros(big, 0),
            gram,
            moments,
        };
        let unit = frame.with_epsilon(1.0)?;
        let a = space.dirichlet_matrix(&unit.fields());
        let eig = a.symmetric_eigen();
        let lmax = eig.eigenvalues.max();
        let mut keep: Vec<usize> =
            (0..big).filter(|&i| eig.eigenvalues[i] > RANK_TOL * lmax).collect();
        keep.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));
        let mut basis = DMatrix::zeros(big, keep.len());
        for (col, &i) in keep.iter().enumerate() {
            let mut v = eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt();
            // Fix the sign by the largest entry, then remove the Haar mean.
            let imax = v.iamax();
            if v[imax] < 0.0 {
                v = -v;
            }
            let mean = (space.gram.row(0) * &v)[0];
            v[0] -= mean;
            basis.set_column(col, &v);
        }
        space.basis = basis;
        Ok(space)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of trial functions.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn moments(&self) -> &HaarMoments {
        &self.moments
    }

    /// Matrix of `m ↦ X m` on the monomial set (column `j` = image of `m_j`).
    pub fn derivative_matrix(&self, x: &AlgebraElement) -> DMatrix<f64> {
        let d = Derivation::new(x);
        let big = self.monomials.len();
        let mut out = DMatrix::zeros(big, big);
        let mut buf = Vec::new();
        for (j, m) in self.monomials.iter().enumerate() {
            buf.clear();
            d.apply_monomial(m, &mut buf);
            for (mm, c) in buf.drain(..) {
                out[(self.index[&mm], j)] += c;
            }
        }
        out
    }

    /// Exact `Σ_i ∫ X_i m_j X_i m_k` on the monomial set.
    pub fn dirichlet_matrix(&self, fields: &[AlgebraElement]) -> DMatrix<f64> {
        let big = self.monomials.len();
        let mut a = DMatrix::zeros(big, big);
        for x in fields {
            let b = self.derivative_matrix(x);
            a += b.transpose() * &self.gram * &b;
        }
        (&a + a.transpose()) * 0.5
    }

    /// Exact Dirichlet matrix in trial coordinates.
    pub fn stiffness(&self, fields: &[AlgebraElement]) -> DMatrix<f64> {
        let a = self.basis.transpose() * self.dirichlet_matrix(fields) * &self.basis;
        (&a + a.transpose()) * 0.5
    }

    /// Monomial coefficient vector of `u`, if every term lies in the set.
    pub fn monomial_vector(&self, u: &PolyField) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.monomials.len());
        for (m, c) in u.terms() {
            let i = self.index.get(m).ok_or_else(|| {
                Error::OutOfRange(format!("monomial of degree {} outside the trial set", m.degree()))
            })?;
            v[*i] += c;
        }
        Ok(v)
    }

    /// Field with the given trial coordinates.
    pub fn field(&self, coeffs: &[f64]) -> PolyField {
        let v = &self.basis * DVector::from_column_slice(coeffs);
        self.monomial_field(&v)
    }

    pub fn monomial_field(&self, v: &DVector<f64>) -> PolyField {
        let terms = self
            .monomials
            .iter()
            .zip(v.iter())
            .filter(|(_, c)| c.abs() > 1e-15)
            .map(|(m, &c)| (m.clone(), c));
        PolyField::from_terms(self.n, self.degree, terms.collect::<Vec<_>>())
            .expect("trial monomials respect the cap")
    }

    /// Exact L² projection of the mean-zero part of `u` onto the trial span.
    pub fn project(&self, u: &PolyField) -> Result<Vec<f64>> {
        let v = self.monomial_vector(u)?;
        let m = self.basis.transpose() * &self.gram * &self.basis;
        let rhs = self.basis.transpose() * &self.gram * v;
        let sol = m
            .cholesky()
            .ok_or(Error::SingularSystem { rank: 0, size: self.dim() })?
            .solve(&rhs);
        Ok(sol.iter().copied().collect())
    }

    /// Exact `∫ f φ_k` for every trial function.
    pub fn exact_load(&self, f: &PolyField) -> Result<DVector<f64>> {
        let mut b = DVector::zeros(self.dim());
        for k in 0..self.dim() {
            let phi = self.monomial_field(&self.basis.column(k).into_owned());
            b[k] = self.moments.integrate(&f.mul(&phi))?;
        }
        Ok(b)
    }
}
