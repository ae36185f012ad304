//! Haar measure on SU(n): Monte-Carlo quadrature and exact low-degree moments.

mod moments;

pub use moments::HaarMoments;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::generator_values;
use crate::lie::GroupElement;
use crate::rng::{stream_rng, streams};

/// Haar-distributed element of SU(n): Ginibre QR with phase-fixed `R`
/// diagonal, then the determinant phase divided out.
pub fn sample_haar<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GroupElement {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    let det = q.determinant();
    let fix = Complex64::from_polar(1.0, -det.arg() / n as f64);
    q * fix
}

/// One quadrature node with cached generator values.
#[derive(Debug, Clone)]
pub struct QuadPoint {
    pub g: GroupElement,
    pub values: Vec<f64>,
    pub weight: f64,
}

/// Weighted point set on the group. Uniform Haar sets carry weight `1/N`.
#[derive(Debug, Clone)]
pub struct QuadratureSet {
    n: usize,
    seed: u64,
    points: Vec<QuadPoint>,
}

/// Persisted form: points are regenerated from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub n: usize,
    pub points: usize,
    pub seed: u64,
}

impl QuadratureSet {
    /// Arbitrary weighted nodes; group membership is checked.
    pub fn from_points(n: usize, seed: u64, nodes: Vec<(GroupElement, f64)>) -> Result<Self> {
        let mut points = Vec::with_capacity(nodes.len());
        for (k, (g, w)) in nodes.into_iter().enumerate() {
            if g.nrows() != n {
                return Err(Error::SizeMismatch { left: n, right: g.nrows() });
            }
            crate::lie::group::check_group_element(&g)
                .map_err(|e| Error::NotInGroup(format!("node {k}: {e}")))?;
            if !w.is_finite() {
                return Err(Error::NonFinite { index: k });
            }
            points.push(QuadPoint { values: generator_values(&g), g, weight: w });
        }
        Ok(Self { n, seed, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[QuadPoint] {
        &self.points
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.points.iter().map(|p| p.weight).collect::<Vec<_>>())
    }

    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec { n: self.n, points: self.points.len(), seed: self.seed }
    }

    /// First `m` points with weights renormalized to `1/m`.
    pub fn prefix(&self, m: usize) -> Self {
        let m = m.min(self.points.len());
        let w = 1.0 / m as f64;
        let points = self.points[..m]
            .iter()
            .map(|p| QuadPoint { weight: w, ..p.clone() })
            .collect();
        Self { n: self.n, seed: self.seed, points }
    }
}

/// `N` Haar points; point `k` draws from its own stream so the set does not
/// depend on the worker count.
pub fn haar_quadrature(n: usize, count: usize, seed: u64) -> Result<QuadratureSet> {
    if count == 0 {
        return Err(Error::OutOfRange("quadrature needs at least one point".into()));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(format!("SU({n})")));
    }
    let w = 1.0 / count as f64;
    let points = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, streams::HAAR, k as u64);
            let g = sample_haar(&mut rng, n);
            QuadPoint { values: generator_values(&g), g, weight: w }
        })
        .collect();
    Ok(QuadratureSet { n, seed, points })
}

impl QuadratureSpec {
    pub fn build(&self) -> Result<QuadratureSet> {
        haar_quadrature(self.n, self.points, self.seed)
    }
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `Σ w_k f(g_k)`. Values are produced in parallel and reduced in a fixed
/// order, so the result does not depend on the thread count.
pub fn integrate<F>(q: &QuadratureSet, f: F) -> Result<f64>
where
    F: Fn(&QuadPoint) -> f64 + Sync,
{
    let vals: Vec<f64> = q.points.par_iter().map(|p| p.weight * f(p)).collect();
    if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: k });
    }
    Ok(pairwise_sum(&vals))
}

/// Weighted mean and standard error of `f` under uniform weights.
pub fn mean_and_stderr<F>(q: &QuadratureSet, f: F) -> Result<(f64, f64)>
where
    F: Fn(&QuadPoint) -> f64 + Sync,
{
    let vals: Vec<f64> = q.points.par_iter().map(&f).collect();
    if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: k });
    }
    let n = vals.len() as f64;
    let mean = pairwise_sum(&vals) / n;
    let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if vals.len() > 1 { pairwise_sum(&sq) / (n - 1.0) } else { 0.0 };
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{apply_field, PolyField};
    use crate::lie::group::{check_group_element, identity};
    use crate::lie::su_frame;

    #[test]
    fn points_are_in_group_and_reproducible() {
        let q = haar_quadrature(3, 200, 11).unwrap();
        for p in q.points() {
            check_group_element(&p.g).unwrap();
        }
        let again = haar_quadrature(3, 200, 11).unwrap();
        assert!(q.points().iter().zip(again.points()).all(|(a, b)| a.g == b.g));
        let other = haar_quadrature(3, 200, 12).unwrap();
        assert!(q.points()[0].g != other.points()[0].g);
        assert!(haar_quadrature(3, 0, 1).is_err());
    }

    #[test]
    fn schur_orthogonality() {
        let q = haar_quadrature(3, 100_000, 2024).unwrap();
        let abs11 = PolyField::abs2_entry(3, 0, 0, 2).unwrap();
        let (m, se) = mean_and_stderr(&q, |p| abs11.evaluate_values(&p.values)).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 3.0 * se, "{m} ± {se}");
        let re11 = PolyField::re_entry(3, 0, 0, 1);
        let (m, se) = mean_and_stderr(&q, |p| re11.evaluate_values(&p.values)).unwrap();
        assert!(m.abs() < 4.0 * se);
        assert!((integrate(&q, |_| 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_reports_index() {
        let q = haar_quadrature(2, 10, 0).unwrap();
        let err = integrate(&q, |p| if p.g == q.points()[4].g { f64::NAN } else { 0.0 });
        assert_eq!(err, Err(Error::NonFinite { index: 4 }));
    }

    #[test]
    fn horizontal_casimir() {
        let f = su_frame(3).unwrap();
        let mut s = identity(3) * Complex64::new(0.0, 0.0);
        for x in f.horizontal() {
            s += x.entries() * x.entries();
        }
        assert!((s + identity(3) * Complex64::new(4.0, 0.0)).norm() < 1e-14);

        // Σ X_i² Re g_11 = -4 Re g_11, so ∫|∇_H Re g_11|² = 4 ∫ (Re g_11)² = 2/3.
        let re11 = PolyField::re_entry(3, 0, 0, 2);
        let mut lap = PolyField::zero(3, 2);
        for x in f.horizontal() {
            lap = lap.add(&apply_field(x, &apply_field(x, &re11).unwrap()).unwrap());
        }
        assert!(lap.add(&re11.scale(4.0)).max_coeff_diff(&PolyField::zero(3, 2)) < 1e-14);
        let exact = HaarMoments::new(3);
        let grad2 = crate::field::squared_norm(&crate::field::horizontal_gradient(&re11, &f).unwrap());
        assert!((exact.integrate(&grad2).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn determinism_across_thread_counts() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let q = haar_quadrature(3, 5000, 9).unwrap();
                let u = PolyField::abs2_entry(3, 1, 2, 2).unwrap();
                integrate(&q, |p| u.evaluate_values(&p.values)).unwrap()
            })
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }
}
