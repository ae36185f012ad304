//! Group-level helpers: exponential, principal logarithm, manifold projection.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::element::{AlgebraElement, CMat};
use crate::error::{Error, Result};

pub type GroupElement = CMat;

pub fn identity(n: usize) -> GroupElement {
    CMat::identity(n, n)
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn exp(x: &AlgebraElement) -> GroupElement {
    x.entries().exp()
}

pub fn exp_matrix(m: &CMat) -> CMat {
    m.exp()
}

/// Distance of `g` from the unitary, unit-determinant manifold.
pub fn group_defect(g: &GroupElement) -> f64 {
    let n = g.nrows();
    let u = (g * g.adjoint() - CMat::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d = (g.determinant() - Complex64::new(1.0, 0.0)).norm();
    u.max(d)
}

/// Check that `g` lies in `SU(n)` within 1e−10.
pub fn check_group_element(g: &GroupElement) -> Result<()> {
    if !g.is_square() {
        return Err(Error::NotInGroup("matrix is not square".into()));
    }
    let defect = group_defect(g);
    if defect > 1e-10 {
        return Err(Error::NotInGroup(format!("unitarity/determinant defect {defect:.3e}")));
    }
    Ok(())
}

/// Nearest unitary matrix (polar factor) with the determinant phase removed.
pub fn reproject(g: &GroupElement) -> GroupElement {
    let n = g.nrows();
    let svd = g.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("svd u"), svd.v_t.expect("svd v_t"));
    let w = u * vt;
    let det = w.determinant();
    let phase = Complex64::from_polar(1.0, -det.arg() / n as f64);
    w * phase
}

/// Principal logarithm of a group element close enough to the identity that
/// no eigenvalue sits at −1, projected onto the traceless anti-Hermitian part.
pub fn log(g: &GroupElement) -> AlgebraElement {
    let n = g.nrows();
    let x = g - CMat::identity(n, n);
    if x.norm() < SERIES_RADIUS {
        return AlgebraElement::project(&log_series(&x));
    }
    let (q, eig) = unitary_eigen(g);
    // Principal angles can sum to 2πk; shift the k extreme ones by ∓2π so the
    // result is traceless and still exponentiates back to g.
    let mut angles: Vec<f64> = eig.iter().map(|z| z.arg()).collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let k = (angles.iter().sum::<f64>() / two_pi).round() as i64;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    if k > 0 {
        order.iter().rev().take(k as usize).for_each(|&i| angles[i] -= two_pi);
    } else {
        order.iter().take((-k) as usize).for_each(|&i| angles[i] += two_pi);
    }
    let mut d = CMat::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = Complex64::new(eig[i].norm().ln(), angles[i]);
    }
    AlgebraElement::project(&(&q * d * q.adjoint()))
}

const SERIES_RADIUS: f64 = 0.5;

/// `log(I + x)` by its power series; 60 terms reach 1e−20 at ‖x‖ = 0.5.
fn log_series(x: &CMat) -> CMat {
    let n = x.nrows();
    let mut acc = CMat::zeros(n, n);
    let mut pow = x.clone();
    for k in 1..=60 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc += &pow * Complex64::new(sign / k as f64, 0.0);
        pow = &pow * x;
    }
    acc
}

/// Unitary eigenvectors and eigenvalues of a (near-)unitary matrix.
///
/// Unbounded Francis iterations can stall on clustered spectra, so Schur runs
/// with a cap and falls back to diagonalizing a generic combination of the
/// commuting Hermitian parts `(g + g†)/2` and `(g − g†)/2i`.
fn unitary_eigen(g: &GroupElement) -> (CMat, Vec<Complex64>) {
    let n = g.nrows();
    if let Some(schur) = Schur::try_new(g.clone(), 1e-15, 500) {
        let (q, t) = schur.unpack();
        return (q, (0..n).map(|i| t[(i, i)]).collect());
    }
    let half = Complex64::new(0.5, 0.0);
    let herm = (g + g.adjoint()) * half;
    let skew = (g - g.adjoint()) * Complex64::new(0.0, -0.5);
    let q = (herm + skew * Complex64::new(0.618_033_988_749_895, 0.0)).symmetric_eigen().eigenvectors;
    let d = q.adjoint() * g * &q;
    (q, (0..n).map(|i| d[(i, i)]).collect())
}
