use nalgebra::{DMatrix, DVector};

use super::local::LocalQuadrature;
use crate::error::{Error, Result};
use crate::field::PolyField;
use crate::geometry::orthonormal_complement;
use crate::haar::haar_quadrature;
use crate::lie::group::{check_group_element, log};
use crate::lie::{AlgebraElement, CMat, Frame, GroupElement, LieAlgebra};
use crate::solver::TrialSpace;

/// Radii and profile of a cutoff around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSpec {
    pub center: GroupElement,
    pub r_inner: f64,
    pub r_outer: f64,
    /// 1 is the cubic smoothstep, 2 the quintic one.
    pub profile: u32,
}

impl CutoffSpec {
    pub fn new(center: GroupElement, r_inner: f64, r_outer: f64) -> Self {
        Self { center, r_inner, r_outer, profile: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        check_group_element(&self.center)?;
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer && self.r_outer <= 0.5) {
            return Err(Error::OutOfRange(format!(
                "cutoff radii ({}, {}) must satisfy 0 < r_inner < r_outer <= 0.5",
                self.r_inner, self.r_outer
            )));
        }
        if !(1..=2).contains(&self.profile) {
            return Err(Error::OutOfRange(format!("smoothstep profile {} not in {{1, 2}}", self.profile)));
        }
        Ok(())
    }
}

/// Smoothstep and its derivative on `[0, 1]`, clamped outside.
fn smoothstep(order: u32, t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    match order {
        1 => (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t)),
        _ => (t * t * t * (t * (6.0 * t - 15.0) + 10.0), 30.0 * t * t * (t - 1.0) * (t - 1.0)),
    }
}

// Taylor coefficients of z / (1 − e^{−z}).
const PSI: [f64; 21] = [
    1.0,
    0.5,
    1.0 / 12.0,
    0.0,
    -1.0 / 720.0,
    0.0,
    1.0 / 30240.0,
    0.0,
    -1.0 / 1209600.0,
    0.0,
    1.0 / 47900160.0,
    0.0,
    -691.0 / 1307674368000.0,
    0.0,
    1.0 / 74724249600.0,
    0.0,
    -3617.0 / 10670622842880000.0,
    0.0,
    43867.0 / 5109094217170944000.0,
    0.0,
    -174611.0 / 802857662698291200000.0,
];

/// `d/dt log(e^θ e^{tX})` at `t = 0`.
fn dlog(theta: &CMat, x: &CMat) -> CMat {
    let mut term = x.clone();
    let mut acc = x.clone();
    for c in PSI.iter().skip(1) {
        term = theta * &term - &term * theta;
        if *c != 0.0 {
            acc += &term * num_complex::Complex64::new(*c, 0.0);
        }
    }
    acc
}

/// The product cutoff `S(a)·S(b)` with `a`, `b` the rescaled horizontal and
/// Cartan parts of the gauge. It is 1 on the inner surrogate ball, vanishes
/// once either part reaches `r_outer`, and has closed-form derivatives.
#[derive(Debug, Clone)]
pub struct Cutoff {
    spec: CutoffSpec,
    center_inv: GroupElement,
    horizontal: Vec<AlgebraElement>,
    cartan: Vec<AlgebraElement>,
    gradient_fields: Vec<AlgebraElement>,
    algebra: LieAlgebra,
}

impl Cutoff {
    pub fn spec(&self) -> &CutoffSpec {
        &self.spec
    }

    /// Local quadrature on the inner ball, where the cutoff is identically 1.
    pub(crate) fn inner_quadrature(&self, count: usize, seed: u64) -> LocalQuadrature {
        let s = &self.spec;
        LocalQuadrature::from_directions(&self.horizontal, &self.cartan, &self.algebra, &s.center, s.r_inner, count, seed)
    }

    pub(crate) fn horizontal_len(&self) -> usize {
        self.horizontal.len()
    }

    pub fn value(&self, g: &GroupElement) -> f64 {
        self.value_and_gradient(g).0
    }

    /// `η(g)` and `(X_1 η, …, X_{2n} η, R_1 η, …, R_ν η)` with unscaled vertical fields.
    pub fn value_and_gradient(&self, g: &GroupElement) -> (f64, Vec<f64>) {
        let theta = log(&(&self.center_inv * g));
        let ch: Vec<f64> = self.horizontal.iter().map(|h| self.algebra.inner_unchecked(h, &theta)).collect();
        let ct: Vec<f64> = self.cartan.iter().map(|c| self.algebra.inner_unchecked(c, &theta)).collect();
        let nh = ch.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nt = ct.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (r0, r1) = (self.spec.r_inner, self.spec.r_outer);
        let width = r1 - r0;
        let (sa, dsa) = smoothstep(self.spec.profile, (r1 - nh) / width);
        let (sb, dsb) = smoothstep(self.spec.profile, (r1 - nt.sqrt()) / width);
        let eta = sa * sb;
        let k = self.gradient_fields.len();
        if dsa == 0.0 && dsb == 0.0 {
            return (eta, vec![0.0; k]);
        }
        let grad = self
            .gradient_fields
            .iter()
            .map(|x| {
                let d = AlgebraElement::project(&dlog(theta.entries(), x.entries()));
                let mut out = 0.0;
                if dsa != 0.0 {
                    let dn: f64 = self.horizontal.iter().zip(&ch).map(|(h, c)| c * self.algebra.inner_unchecked(h, &d)).sum::<f64>() / nh;
                    out += -dsa / width * dn * sb;
                }
                if dsb != 0.0 {
                    let dn: f64 = self.cartan.iter().zip(&ct).map(|(c, v)| v * self.algebra.inner_unchecked(c, &d)).sum::<f64>() / nt;
                    out += sa * (-dsb / width) * 0.5 * dn / nt.sqrt();
                }
                out
            })
            .collect();
        (eta, grad)
    }

    /// Sampled sup of `|∇_H η|` and `|∇_T η|` over the points of `q`.
    pub fn gradient_sup(&self, q: &LocalQuadrature) -> (f64, f64) {
        let m = self.horizontal.len();
        q.points().iter().fold((0.0f64, 0.0f64), |(a, b), p| {
            let (_, gr) = self.value_and_gradient(&p.g);
            let h = gr[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
            let t = gr[m..].iter().map(|x| x * x).sum::<f64>().sqrt();
            (a.max(h), b.max(t))
        })
    }
}

/// Build the cutoff and verify its invariants on 10³ points of the outer ball.
pub fn cutoff(spec: &CutoffSpec, frame: &Frame, algebra: &LieAlgebra) -> Result<Cutoff> {
    spec.validate()?;
    if frame.n() != spec.center.nrows() {
        return Err(Error::SizeMismatch { left: frame.n(), right: spec.center.nrows() });
    }
    let horizontal = frame.horizontal().to_vec();
    let cartan = orthonormal_complement(&horizontal, algebra);
    let gradient_fields = horizontal.iter().chain(frame.unscaled_vertical()).cloned().collect();
    let c = Cutoff {
        spec: spec.clone(),
        center_inv: spec.center.adjoint(),
        horizontal,
        cartan,
        gradient_fields,
        algebra: algebra.clone(),
    };
    let q = LocalQuadrature::new(frame, algebra, &spec.center, spec.r_outer, 1000, 0)?;
    let width = spec.r_outer - spec.r_inner;
    for p in q.points() {
        let eta = c.value(&p.g);
        if !(0.0..=1.0).contains(&eta) || (p.gauge() <= spec.r_inner * (1.0 - 1e-9) && eta != 1.0) {
            return Err(Error::Invariant(format!("cutoff value {eta} at gauge {}", p.gauge())));
        }
    }
    let (sh, st) = c.gradient_sup(&q);
    if sh > 2.5 / width || st > 10.0 / (width * width) {
        return Err(Error::Invariant(format!(
            "cutoff gradients |∇_H η| = {sh:.3}, |∇_T η| = {st:.3} exceed 2.5/Δ = {:.3}, 10/Δ² = {:.3}",
            2.5 / width,
            10.0 / (width * width)
        )));
    }
    Ok(c)
}

/// Least-squares projection of the cutoff onto the trial monomials, fitted on
/// Haar samples plus points of the outer ball. Errors when the sampled sup
/// error exceeds 5%.
pub fn project_cutoff(c: &Cutoff, frame: &Frame, space: &TrialSpace, samples: usize) -> Result<PolyField> {
    let algebra = &c.algebra;
    let global = haar_quadrature(frame.n(), samples, 0)?;
    let local = LocalQuadrature::new(frame, algebra, &c.spec.center, c.spec.r_outer, samples, 1)?;
    let nodes: Vec<(&[f64], f64)> = global
        .points()
        .iter()
        .map(|p| (p.values.as_slice(), c.value(&p.g)))
        .chain(local.points().iter().map(|p| (p.values.as_slice(), c.value(&p.g))))
        .collect();
    let mons = space.monomials();
    let a = DMatrix::from_fn(nodes.len(), mons.len(), |i, j| mons[j].eval(nodes[i].0));
    let b = DVector::from_iterator(nodes.len(), nodes.iter().map(|n| n.1));
    let x = a.clone().svd(true, true).solve(&b, 1e-10).map_err(|e| Error::Unsupported(e.into()))?;
    let err = (&a * &x - &b).amax();
    if err > 0.05 {
        return Err(Error::DegreeCap { error: err, degree_cap: space.degree() });
    }
    Ok(space.monomial_field(&x))
}
