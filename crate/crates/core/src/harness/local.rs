use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::generator_values;
use crate::geometry::{group_volume, haar_density, orthonormal_complement, uniform_ball, unit_ball_volume};
use crate::haar::pairwise_sum;
use crate::lie::group::{check_group_element, exp};
use crate::lie::{AlgebraElement, Frame, GroupElement, LieAlgebra};
use crate::rng::{stream_rng, streams};

/// A node of a local quadrature, with its exponential coordinates around the center.
#[derive(Debug, Clone)]
pub struct LocalPoint {
    pub g: GroupElement,
    pub values: Vec<f64>,
    pub weight: f64,
    pub theta_h: f64,
    pub theta_t: f64,
}

impl LocalPoint {
    /// Surrogate gauge `max(‖θ_H‖, ‖θ_T‖^{1/2})` from the center.
    pub fn gauge(&self) -> f64 {
        self.theta_h.max(self.theta_t.sqrt())
    }
}

/// Haar-weighted points covering the surrogate ball of `radius` around `center`.
///
/// Exponential coordinates are drawn uniformly from the box (horizontal ball of
/// radius `R`, Cartan ball of radius `R²`) and weighted by the exact Haar
/// density, so weights sum to the Haar probability of the box.
#[derive(Debug, Clone)]
pub struct LocalQuadrature {
    center: GroupElement,
    radius: f64,
    seed: u64,
    points: Vec<LocalPoint>,
}

impl LocalQuadrature {
    pub fn new(frame: &Frame, algebra: &LieAlgebra, center: &GroupElement, radius: f64, count: usize, seed: u64) -> Result<Self> {
        check_group_element(center)?;
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::OutOfRange(format!("local radius {radius} not in (0, 1]")));
        }
        if count < 100 {
            return Err(Error::Insufficient(format!("{count} local points; need at least 100")));
        }
        let horizontal = frame.horizontal().to_vec();
        let cartan = orthonormal_complement(&horizontal, algebra);
        Ok(Self::from_directions(&horizontal, &cartan, algebra, center, radius, count, seed))
    }

    /// Sampling over given orthonormal horizontal and Cartan directions.
    pub(crate) fn from_directions(
        horizontal: &[AlgebraElement],
        cartan: &[AlgebraElement],
        algebra: &LieAlgebra,
        center: &GroupElement,
        radius: f64,
        count: usize,
        seed: u64,
    ) -> Self {
        let (m, v) = (horizontal.len(), cartan.len());
        let n = algebra.n();
        let volume = group_volume(algebra);
        let lebesgue = unit_ball_volume(m) * radius.powi(m as i32) * unit_ball_volume(v) * radius.powi(2 * v as i32);
        let points = (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(seed, streams::LOCAL_BALL, k as u64);
                let ch = uniform_ball(&mut rng, m, radius);
                let ct = uniform_ball(&mut rng, v, radius * radius);
                let theta = AlgebraElement::combination(n, &ch, horizontal)
                    .add(&AlgebraElement::combination(n, &ct, cartan));
                let g = center * exp(&theta);
                let norm = |c: &[f64]| c.iter().map(|x| x * x).sum::<f64>().sqrt();
                LocalPoint {
                    values: generator_values(&g),
                    g,
                    weight: lebesgue * haar_density(&theta, volume) / count as f64,
                    theta_h: norm(&ch),
                    theta_t: norm(&ct),
                }
            })
            .collect();
        Self { center: center.clone(), radius, seed, points }
    }

    pub fn center(&self) -> &GroupElement {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
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

    pub fn points(&self) -> &[LocalPoint] {
        &self.points
    }

    /// First `m` points, reweighted so the set still estimates the same measure.
    pub fn prefix(&self, m: usize) -> Self {
        let m = m.clamp(1, self.points.len());
        let s = self.points.len() as f64 / m as f64;
        let points = self.points[..m].iter().map(|p| LocalPoint { weight: p.weight * s, ..p.clone() }).collect();
        Self { center: self.center.clone(), radius: self.radius, seed: self.seed, points }
    }

    /// Haar probability of `{gauge ≤ r}` for `r` up to the quadrature radius.
    pub fn ball_measure(&self, r: f64) -> f64 {
        weighted_sum(&self.points, self.points.len(), |p| if p.gauge() <= r { 1.0 } else { 0.0 })
    }
}

/// Deterministic weighted sum over the first `m` points, rescaled to stand for all of them.
pub(crate) fn weighted_sum<F: Fn(&LocalPoint) -> f64>(points: &[LocalPoint], m: usize, f: F) -> f64 {
    let s = points.len() as f64 / m as f64;
    let terms: Vec<f64> = points[..m].iter().map(|p| p.weight * f(p)).collect();
    s * pairwise_sum(&terms)
}
