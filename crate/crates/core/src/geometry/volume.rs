use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::pairwise_sum;
use crate::lie::group::log;
use crate::lie::{AlgebraElement, Frame, GroupElement, LieAlgebra};
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// `max(‖θ_H‖, ‖θ_T‖^{1/2})`.
    SubRiemannian,
    /// `‖θ‖`, the ε = 1 Riemannian gauge.
    Riemannian,
}

/// Split `log g` into its horizontal and Cartan norms.
fn split_norms(theta: &AlgebraElement, frame: &Frame, algebra: &LieAlgebra) -> (f64, f64) {
    let mut h2 = 0.0;
    for x in frame.horizontal() {
        let c = algebra.inner_unchecked(x, theta);
        h2 += c * c;
    }
    let total = algebra.inner_unchecked(theta, theta);
    (h2.sqrt(), (total - h2).max(0.0).sqrt())
}

pub fn surrogate_gauge(g: &GroupElement, frame: &Frame, algebra: &LieAlgebra, gauge: Gauge) -> f64 {
    let theta = log(g);
    match gauge {
        Gauge::Riemannian => algebra.norm(&theta),
        Gauge::SubRiemannian => {
            let (h, t) = split_norms(&theta, frame, algebra);
            h.max(t.sqrt())
        }
    }
}

/// Riemannian volume of SU(n) under the algebra's metric.
pub fn group_volume(algebra: &LieAlgebra) -> f64 {
    let n = algebra.n();
    // Under ⟨X, Y⟩ = −tr(XY): √n (2π)^{(n²+n−2)/2} / Π_{k<n} k!.
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut fact = 1.0;
    let mut denom = 1.0;
    for k in 1..n {
        fact *= k as f64;
        denom *= fact;
    }
    let base = (n as f64).sqrt() * two_pi.powf((n * n + n - 2) as f64 / 2.0) / denom;
    let d = algebra.dimension();
    let basis = algebra.basis();
    let g = DMatrix::from_fn(d, d, |i, j| -(basis[i].entries() * basis[j].entries()).trace().re);
    base / g.determinant().sqrt()
}

/// Haar probability density in exponential coordinates:
/// `Π_{a<b} sinc²((t_a − t_b)/2) / vol(G)` from the eigenvalues `i t_a` of θ.
pub fn haar_density(theta: &AlgebraElement, volume: f64) -> f64 {
    let herm = theta.entries() * Complex64::new(0.0, -1.0);
    let herm = (&herm + herm.adjoint()) * Complex64::new(0.5, 0.0);
    let t = herm.symmetric_eigen().eigenvalues;
    let mut j = 1.0;
    for a in 0..t.len() {
        for b in a + 1..t.len() {
            let x = 0.5 * (t[a] - t[b]);
            let s = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            j *= s * s;
        }
    }
    j / volume
}

pub(crate) fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

pub(crate) fn uniform_ball<R: Rng>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / d as f64);
    v.iter_mut().for_each(|x| *x *= r / norm);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallVolumeReport {
    pub gauge: Gauge,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub loglog_slope: f64,
}

impl BallVolumeReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,volume,stderr\n");
        for i in 0..self.radii.len() {
            s.push_str(&format!("{:e},{:e},{:e}\n", self.radii[i], self.volumes[i], self.stderrs[i]));
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Haar measure of gauge balls `{d̂(I, g) ≤ r}`. Points are drawn uniformly
/// from the ball in exponential coordinates (horizontal radius `r`, Cartan
/// radius `r²` for the sub-Riemannian gauge) and weighted by the exact density.
pub fn ball_volume_estimate(
    frame: &Frame,
    algebra: &LieAlgebra,
    gauge: Gauge,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<BallVolumeReport> {
    if radii.len() < 2 {
        return Err(Error::Insufficient("need at least two radii for a slope".into()));
    }
    if samples < 100 {
        return Err(Error::Insufficient(format!("{samples} samples per radius; need at least 100")));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r <= 0.5)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("radii must be descending in (0, 0.5]".into()));
    }
    let volume = group_volume(algebra);
    let horizontal = frame.horizontal().to_vec();
    let dim = algebra.dimension();
    // Orthonormal Cartan directions: the complement of ℋ in the basis.
    let cartan = orthonormal_complement(&horizontal, algebra);
    let n = algebra.n();
    let mut volumes = Vec::with_capacity(radii.len());
    let mut stderrs = Vec::with_capacity(radii.len());
    for (ri, &r) in radii.iter().enumerate() {
        let lebesgue = match gauge {
            Gauge::Riemannian => unit_ball_volume(dim) * r.powi(dim as i32),
            Gauge::SubRiemannian => {
                unit_ball_volume(horizontal.len()) * r.powi(horizontal.len() as i32)
                    * unit_ball_volume(cartan.len()) * r.powi(2 * cartan.len() as i32)
            }
        };
        let vals: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(seed, streams::BALL_VOLUME, ((ri as u64) << 32) | k as u64);
                let theta = match gauge {
                    Gauge::Riemannian => {
                        let c = uniform_ball(&mut rng, dim, r);
                        algebra.element(&c)
                    }
                    Gauge::SubRiemannian => {
                        let ch = uniform_ball(&mut rng, horizontal.len(), r);
                        let ct = uniform_ball(&mut rng, cartan.len(), r * r);
                        AlgebraElement::combination(n, &ch, &horizontal)
                            .add(&AlgebraElement::combination(n, &ct, &cartan))
                    }
                };
                haar_density(&theta, volume)
            })
            .collect();
        let m = pairwise_sum(&vals) / samples as f64;
        let var: Vec<f64> = vals.iter().map(|v| (v - m) * (v - m)).collect();
        let sd = (pairwise_sum(&var) / (samples as f64 - 1.0)).sqrt();
        volumes.push(lebesgue * m);
        stderrs.push(lebesgue * sd / (samples as f64).sqrt());
    }
    let loglog_slope = loglog_slope(radii, &volumes);
    Ok(BallVolumeReport { gauge, radii: radii.to_vec(), volumes, stderrs, loglog_slope })
}

pub(crate) fn orthonormal_complement(span: &[AlgebraElement], algebra: &LieAlgebra) -> Vec<AlgebraElement> {
    let mut out: Vec<AlgebraElement> = Vec::new();
    for b in algebra.basis() {
        let mut v = b.clone();
        for q in span.iter().chain(out.iter()) {
            let c = algebra.inner_unchecked(q, &v) / algebra.inner_unchecked(q, q);
            v = v.sub(&q.scale(c));
        }
        let nv = algebra.norm(&v);
        if nv > 1e-8 {
            out.push(v.scale(1.0 / nv));
        }
    }
    out
}

