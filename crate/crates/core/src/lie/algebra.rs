use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::element::{bracket_unchecked, AlgebraElement, CMat};
use crate::error::{Error, Result};

/// Ad-invariant inner product carried by a [`LieAlgebra`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    /// `⟨X, Y⟩ = −scale · Re tr(XY)`.
    Trace { scale: f64 },
    /// `⟨X, Y⟩ = −scale · tr(ad X ∘ ad Y)`.
    Killing { scale: f64 },
}

impl Metric {
    pub fn scale(&self) -> f64 {
        match *self {
            Metric::Trace { scale } | Metric::Killing { scale } => scale,
        }
    }
}

/// Real coordinates of matrices with respect to a fixed independent list,
/// via the Frobenius normal equations.
#[derive(Debug, Clone)]
pub(crate) struct Decomposer {
    vecs: Vec<DVector<f64>>,
    gram_inv: DMatrix<f64>,
}

impl Decomposer {
    pub(crate) fn new(elems: &[AlgebraElement]) -> Result<Self> {
        let vecs: Vec<DVector<f64>> =
            elems.iter().map(|e| DVector::from_vec(e.to_real_vec())).collect();
        let d = vecs.len();
        let gram = DMatrix::from_fn(d, d, |i, j| vecs[i].dot(&vecs[j]));
        let rank = numerical_rank(&gram, 1e-10);
        if rank < d {
            return Err(Error::Dependent { rank, expected: d });
        }
        let gram_inv = gram
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or(Error::Dependent { rank, expected: d })?;
        Ok(Self { vecs, gram_inv })
    }

    /// Coordinates and the Frobenius norm of the out-of-span residual.
    pub(crate) fn decompose(&self, x: &AlgebraElement) -> (Vec<f64>, f64) {
        let xv = DVector::from_vec(x.to_real_vec());
        let rhs = DVector::from_iterator(self.vecs.len(), self.vecs.iter().map(|v| v.dot(&xv)));
        let c = &self.gram_inv * rhs;
        let mut r = xv;
        for (ci, v) in c.iter().zip(&self.vecs) {
            r.axpy(-ci, v, 1.0);
        }
        (c.iter().copied().collect(), r.norm())
    }
}

pub(crate) fn numerical_rank(gram: &DMatrix<f64>, rel_tol: f64) -> usize {
    if gram.nrows() == 0 {
        return 0;
    }
    let eig = SymmetricEigen::new(gram.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if top == 0.0 {
        return 0;
    }
    eig.eigenvalues.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Structure constants `[E_i, E_j] = Σ_k c[i][j][k] E_k` of an ordered basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    data: Vec<f64>,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    /// Nonzero entries as `(i, j, k, value)`; entries below `tol` are dropped.
    pub fn triples(&self, tol: f64) -> Vec<(usize, usize, usize, f64)> {
        let d = self.dim;
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = self.get(i, j, k);
                    if v.abs() > tol {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad E_i` in the same basis: column `j` holds the coordinates of `[E_i, E_j]`.
    pub fn ad_matrix(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, j| self.get(i, j, k))
    }

    /// Killing form `B_ij = tr(ad E_i ∘ ad E_j)`.
    pub fn killing(&self) -> DMatrix<f64> {
        let ads: Vec<DMatrix<f64>> = (0..self.dim).map(|i| self.ad_matrix(i)).collect();
        DMatrix::from_fn(self.dim, self.dim, |i, j| (&ads[i] * &ads[j]).trace())
    }
}

/// Structure constants of an arbitrary independent list of algebra elements.
///
/// Fails with [`Error::NotClosed`] naming the first pair whose bracket leaves the span.
pub fn structure_constants_of(elems: &[AlgebraElement]) -> Result<StructureConstants> {
    let d = elems.len();
    if let Some(first) = elems.first() {
        for e in elems {
            if e.size() != first.size() {
                return Err(Error::SizeMismatch { left: first.size(), right: e.size() });
            }
        }
    }
    let dec = Decomposer::new(elems)?;
    let mut data = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            let b = bracket_unchecked(&elems[i], &elems[j]);
            let (c, resid) = dec.decompose(&b);
            let scale = 1.0 + b.frobenius_dot(&b).sqrt();
            if resid > 1e-10 * scale {
                return Err(Error::NotClosed { i, j, residual: resid });
            }
            for k in 0..d {
                data[(i * d + j) * d + k] = c[k];
            }
        }
    }
    Ok(StructureConstants { dim: d, data })
}

/// A real matrix Lie algebra with an orthonormal basis under an Ad-invariant product.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    n: usize,
    basis: Vec<AlgebraElement>,
    metric: Metric,
    decomposer: Decomposer,
}

/// Outcome of the Killing-form test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub compact_semisimple: bool,
    pub killing_eigenvalues: Vec<f64>,
}

impl LieAlgebra {
    /// Generalized Gell-Mann basis of `su(n)` with `⟨X,Y⟩ = −½ tr(XY)`.
    ///
    /// Order: the diagonal elements `T_1 … T_{n−1}`, then one pair per matrix
    /// position `(a, b)`, `a < b`, sorted by `b − a` and then `a`. Each pair is
    /// `(E_ab − E_ba, ±i(E_ab + E_ba))`, the sign chosen so that minus their
    /// bracket is a positive root with respect to `T_1 … T_{n−1}`. For `n = 3`
    /// this is `T1, T2, X1, …, X6` exactly.
    pub fn su(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("su(n) needs n >= 2, got {n}")));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut cartan = Vec::with_capacity(n - 1);
        for k in 1..n {
            let kf = k as f64;
            let c = (2.0 / (kf * (kf + 1.0))).sqrt();
            let mut m = CMat::from_element(n, n, zero);
            for i in 0..k {
                m[(i, i)] = Complex64::new(0.0, -c);
            }
            m[(k, k)] = Complex64::new(0.0, c * kf);
            cartan.push(AlgebraElement::from_raw(m));
        }
        let metric = Metric::Trace { scale: 0.5 };
        let mut positions: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        positions.sort_by_key(|&(a, b)| (b - a, a));
        let mut basis = cartan.clone();
        for (a, b) in positions {
            let mut anti = CMat::from_element(n, n, zero);
            anti[(a, b)] = Complex64::new(1.0, 0.0);
            anti[(b, a)] = Complex64::new(-1.0, 0.0);
            let mut sym = CMat::from_element(n, n, zero);
            sym[(a, b)] = Complex64::new(0.0, 1.0);
            sym[(b, a)] = Complex64::new(0.0, 1.0);
            let anti = AlgebraElement::from_raw(anti);
            let mut sym = AlgebraElement::from_raw(sym);
            let root = bracket_unchecked(&anti, &sym).scale(-1.0);
            let first = cartan
                .iter()
                .map(|t| trace_inner(0.5, &root, t))
                .find(|v| v.abs() > 1e-12)
                .unwrap_or(1.0);
            if first < 0.0 {
                sym = sym.scale(-1.0);
            }
            basis.push(anti);
            basis.push(sym);
        }
        let decomposer = Decomposer::new(&basis)?;
        Ok(Self { n, basis, metric, decomposer })
    }

    /// Build an algebra from a spanning list of anti-Hermitian traceless matrices.
    ///
    /// The list must be linearly independent and closed under the bracket. It is
    /// orthonormalized in order (modified Gram–Schmidt) under `metric`.
    pub fn from_matrices(mats: Vec<CMat>, metric: Metric) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidDimension("empty basis".into()));
        }
        if metric.scale() <= 0.0 {
            return Err(Error::OutOfRange(format!("metric scale {}", metric.scale())));
        }
        let raw: Vec<AlgebraElement> =
            mats.into_iter().map(AlgebraElement::new).collect::<Result<_>>()?;
        let n = raw[0].size();
        let sc = structure_constants_of(&raw)?;
        let d = raw.len();
        let gram = match metric {
            Metric::Trace { scale } => {
                DMatrix::from_fn(d, d, |i, j| trace_inner(scale, &raw[i], &raw[j]))
            }
            Metric::Killing { scale } => -sc.killing() * scale,
        };
        let eig = SymmetricEigen::new(gram.clone());
        if eig.eigenvalues.iter().any(|&v| v <= 1e-12) {
            return Err(Error::NotSemisimple(format!(
                "metric is not positive definite on the span (eigenvalues {:?})",
                eig.eigenvalues.as_slice()
            )));
        }
        // Gram–Schmidt in raw coordinates under `gram`.
        let mut q: Vec<DVector<f64>> = Vec::with_capacity(d);
        for i in 0..d {
            let mut v = DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
            for qj in &q {
                let proj = (qj.transpose() * &gram * &v)[(0, 0)];
                v.axpy(-proj, qj, 1.0);
            }
            let nrm = (v.transpose() * &gram * &v)[(0, 0)].sqrt();
            q.push(v / nrm);
        }
        let basis: Vec<AlgebraElement> = q
            .iter()
            .map(|v| AlgebraElement::combination(n, v.as_slice(), &raw))
            .collect();
        let decomposer = Decomposer::new(&basis)?;
        Ok(Self { n, basis, metric, decomposer })
    }

    /// Matrix size.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn metric_scale(&self) -> f64 {
        self.metric.scale()
    }

    /// Coordinates of `x` in the orthonormal basis, failing if `x` is outside the span.
    pub fn coordinates(&self, x: &AlgebraElement) -> Result<Vec<f64>> {
        self.check_size(x)?;
        let (c, resid) = self.decomposer.decompose(x);
        if resid > 1e-9 * (1.0 + x.max_abs()) {
            return Err(Error::NotInAlgebra(format!("out-of-span residual {resid:.3e}")));
        }
        Ok(c)
    }

    pub(crate) fn coordinates_unchecked(&self, x: &AlgebraElement) -> Vec<f64> {
        self.decomposer.decompose(x).0
    }

    pub fn element(&self, coords: &[f64]) -> AlgebraElement {
        AlgebraElement::combination(self.n, coords, &self.basis)
    }

    /// The Ad-invariant inner product.
    pub fn inner(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
        self.check_size(x)?;
        self.check_size(y)?;
        Ok(self.inner_unchecked(x, y))
    }

    pub(crate) fn inner_unchecked(&self, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
        match self.metric {
            Metric::Trace { scale } => trace_inner(scale, x, y),
            Metric::Killing { .. } => {
                let cx = self.coordinates_unchecked(x);
                let cy = self.coordinates_unchecked(y);
                cx.iter().zip(&cy).map(|(a, b)| a * b).sum()
            }
        }
    }

    pub fn norm(&self, x: &AlgebraElement) -> f64 {
        self.inner_unchecked(x, x).max(0.0).sqrt()
    }

    /// Gram matrix of the basis; the identity by construction.
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dimension();
        DMatrix::from_fn(d, d, |i, j| self.inner_unchecked(&self.basis[i], &self.basis[j]))
    }

    pub fn structure_constants(&self) -> Result<StructureConstants> {
        structure_constants_of(&self.basis)
    }

    /// True iff the Killing form is negative definite (all eigenvalues below −1e−10).
    pub fn is_compact_semisimple(&self) -> CompactnessReport {
        let killing = match self.structure_constants() {
            Ok(sc) => sc.killing(),
            Err(_) => {
                return CompactnessReport { compact_semisimple: false, killing_eigenvalues: vec![] }
            }
        };
        let mut ev: Vec<f64> = SymmetricEigen::new(killing).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        CompactnessReport {
            compact_semisimple: !ev.is_empty() && ev.iter().all(|&v| v < -1e-10),
            killing_eigenvalues: ev,
        }
    }

    fn check_size(&self, x: &AlgebraElement) -> Result<()> {
        if x.size() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: x.size() });
        }
        Ok(())
    }
}

/// `−scale · Re tr(XY)` without forming the product.
fn trace_inner(scale: f64, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
    let (a, b) = (x.entries(), y.entries());
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    -scale * acc
}

/// Orthonormal generalized Gell-Mann basis of `su(n)`.
pub fn su_basis(n: usize) -> Result<LieAlgebra> {
    LieAlgebra::su(n)
}

pub fn inner(x: &AlgebraElement, y: &AlgebraElement, algebra: &LieAlgebra) -> Result<f64> {
    algebra.inner(x, y)
}

pub fn structure_constants(algebra: &LieAlgebra) -> Result<StructureConstants> {
    algebra.structure_constants()
}

pub fn is_compact_semisimple(algebra: &LieAlgebra) -> CompactnessReport {
    algebra.is_compact_semisimple()
}
