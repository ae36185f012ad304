//! ε-regularized p-energy minimization over polynomial trial spaces.

mod flux;
mod space;

pub use flux::{ellipticity_check, flux, flux_jacobian, EllipticityReport, FluxSpec};
pub use space::TrialSpace;

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{apply_field, PolyField};
use crate::haar::{haar_quadrature, pairwise_sum, QuadratureSet};
use crate::lie::{su_frame, AlgebraElement, Frame};
use crate::rng::{stream_rng, streams};

const CHUNK: usize = 1024;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MEMORY: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Quadrature {
    /// Exact Haar moments; only the quadratic (p = 2) energy is supported.
    Exact,
    MonteCarlo { points: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub n: usize,
    pub flux: FluxSpec,
    /// Vertical scaling in [0, 1]; 0 keeps only the horizontal fields.
    pub epsilon: f64,
    pub degree_cap: u32,
    pub quadrature: Quadrature,
    pub source: PolyField,
    pub pin: bool,
    pub tol_grad: f64,
    pub max_iter: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfigJson {
    n: usize,
    flux: FluxSpec,
    epsilon: f64,
    degree_cap: u32,
    quadrature: Quadrature,
    source: serde_json::Value,
    #[serde(default = "default_pin")]
    pin: bool,
    tol_grad: f64,
    max_iter: usize,
}

fn default_pin() -> bool {
    true
}

impl SolveConfig {
    /// Defaults: SU(3), D = 2, N = 20000, tolerance by p.
    pub fn new(flux: FluxSpec, epsilon: f64, source: PolyField) -> Self {
        Self {
            n: source.n(),
            flux,
            epsilon,
            degree_cap: 2,
            quadrature: Quadrature::MonteCarlo { points: 20_000, seed: 0 },
            source,
            pin: true,
            tol_grad: if flux.p == 2.0 { 1e-8 } else { 1e-6 },
            max_iter: 5000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.flux.validate()?;
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::OutOfRange(format!("epsilon {} not in [0, 1]", self.epsilon)));
        }
        if !self.flux.is_smooth() {
            return Err(Error::Precondition("p < 2 requires delta > 0".into()));
        }
        if !(self.tol_grad > 0.0) || self.max_iter == 0 {
            return Err(Error::OutOfRange("tolerances must be positive".into()));
        }
        if !self.pin {
            return Err(Error::Precondition("mean-zero pinning must be active".into()));
        }
        if self.source.n() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: self.source.n() });
        }
        match self.quadrature {
            Quadrature::Exact if self.flux.p != 2.0 => {
                Err(Error::Unsupported("exact quadrature needs p = 2".into()))
            }
            Quadrature::MonteCarlo { points: 0, .. } => {
                Err(Error::OutOfRange("quadrature needs at least one point".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SolveConfigJson {
            n: self.n,
            flux: self.flux,
            epsilon: self.epsilon,
            degree_cap: self.degree_cap,
            quadrature: self.quadrature,
            source: self.source.to_json(),
            pin: self.pin,
            tol_grad: self.tol_grad,
            max_iter: self.max_iter,
        })
        .expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: SolveConfigJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = Self {
            n: j.n,
            flux: j.flux,
            epsilon: j.epsilon,
            degree_cap: j.degree_cap,
            quadrature: j.quadrature,
            source: PolyField::from_json(&j.source)?,
            pin: j.pin,
            tol_grad: j.tol_grad,
            max_iter: j.max_iter,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Subtract the mean of `f` under the given quadrature.
pub fn center_source(f: &PolyField, quadrature: &Quadrature) -> Result<PolyField> {
    let mean = match *quadrature {
        Quadrature::Exact => crate::haar::HaarMoments::new(f.n()).integrate(f)?,
        Quadrature::MonteCarlo { points, seed } => {
            let q = haar_quadrature(f.n(), points, seed)?;
            crate::haar::integrate(&q, |p| f.evaluate_values(&p.values))?
        }
    };
    Ok(f.sub(&PolyField::constant(f.n(), mean, 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub p: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub coefficients: serde_json::Value,
    pub trial_coefficients: Vec<f64>,
    pub energy_trace: Vec<f64>,
    pub gradient_trace: Vec<f64>,
    pub final_energy: f64,
    pub final_gradient_norm: f64,
    pub weak_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub line_search_failed: bool,
    pub omega_stats: OmegaStats,
    #[serde(skip)]
    pub solution: PolyField,
}

impl SolutionReport {
    /// Energy trace as CSV with columns `iter,energy,grad_norm`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iter,energy,grad_norm\n");
        for (i, (e, g)) in self.energy_trace.iter().zip(&self.gradient_trace).enumerate() {
            s.push_str(&format!("{i},{e:e},{g:e}\n"));
        }
        s
    }

    pub fn is_monotone(&self) -> bool {
        self.energy_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

struct Chunk {
    v: DMatrix<f64>,
    w: DVector<f64>,
    f: DVector<f64>,
}

enum Backend {
    Exact,
    Sampled { chunks: Vec<Chunk>, quadrature: QuadratureSet },
}

/// A configuration assembled against a trial space.
pub struct Problem {
    cfg: SolveConfig,
    space: Arc<TrialSpace>,
    fields: Vec<AlgebraElement>,
    /// `B_i C`: monomial coefficients of `X_i φ_k`.
    deriv: Vec<DMatrix<f64>>,
    backend: Backend,
    load: DVector<f64>,
    stiffness: DMatrix<f64>,
    precond: Cholesky<f64, Dyn>,
}

struct Eval {
    energy: f64,
    grad: DVector<f64>,
    xi: Vec<DMatrix<f64>>,
}

/// `(w0 + dw)^{p/2} - w0^{p/2}` without cancellation.
fn power_diff(w0: f64, dw: f64, half_p: f64) -> f64 {
    if w0 == 0.0 {
        return dw.powf(half_p);
    }
    w0.powf(half_p) * (half_p * (dw / w0).ln_1p()).exp_m1()
}

impl Problem {
    pub fn new(cfg: SolveConfig) -> Result<Self> {
        cfg.validate()?;
        let frame = su_frame(cfg.n)?;
        let space = Arc::new(TrialSpace::new(&frame, cfg.degree_cap)?);
        Self::with_space(cfg, space)
    }

    pub fn with_space(cfg: SolveConfig, space: Arc<TrialSpace>) -> Result<Self> {
        cfg.validate()?;
        if space.n() != cfg.n || space.degree() != cfg.degree_cap {
            return Err(Error::Precondition("trial space does not match the configuration".into()));
        }
        let frame = su_frame(cfg.n)?;
        let fields = frame_fields(&frame, cfg.epsilon)?;
        let deriv: Vec<DMatrix<f64>> =
            fields.iter().map(|x| space.derivative_matrix(x) * space.basis()).collect();
        let (backend, load, stiffness) = match cfg.quadrature {
            Quadrature::Exact => {
                let mean = space.moments().integrate(&cfg.source)?;
                if mean.abs() >= 1e-8 {
                    return Err(Error::Precondition(format!("source mean {mean:e} is not zero")));
                }
                let load = space.exact_load(&cfg.source)?;
                (Backend::Exact, load, space.stiffness(&fields))
            }
            Quadrature::MonteCarlo { points, seed } => {
                let q = haar_quadrature(cfg.n, points, seed)?;
                let chunks = build_chunks(&q, &space, &cfg.source);
                let mean = pairwise_sum(
                    &chunks.iter().map(|c| c.w.dot(&c.f)).collect::<Vec<_>>(),
                );
                if mean.abs() >= 1e-8 {
                    return Err(Error::Precondition(format!(
                        "source mean {mean:e} under the quadrature is not zero"
                    )));
                }
                let partial: Vec<(DVector<f64>, DMatrix<f64>)> = chunks
                    .par_iter()
                    .map(|c| {
                        let wf = c.w.component_mul(&c.f);
                        let vw = DMatrix::from_fn(c.v.nrows(), c.v.ncols(), |r, k| c.v[(r, k)] * c.w[r]);
                        (c.v.transpose() * wf, c.v.transpose() * vw)
                    })
                    .collect();
                let big = space.monomials().len();
                let mut mload = DVector::zeros(big);
                let mut gram = DMatrix::zeros(big, big);
                for (l, g) in partial {
                    mload += l;
                    gram += g;
                }
                let load = space.basis().transpose() * mload;
                let mut stiff = DMatrix::zeros(space.dim(), space.dim());
                for d in &deriv {
                    stiff += d.transpose() * &gram * d;
                }
                let stiff = (&stiff + stiff.transpose()) * 0.5;
                (Backend::Sampled { chunks, quadrature: q }, load, stiff)
            }
        };
        let precond = stiffness.clone().cholesky().ok_or_else(|| {
            let eig = stiffness.clone().symmetric_eigen().eigenvalues;
            let lmax = eig.amax();
            let rank = eig.iter().filter(|&&e| e > 1e-12 * lmax).count();
            Error::SingularSystem { rank, size: stiffness.nrows() }
        })?;
        Ok(Self { cfg, space, fields, deriv, backend, load, stiffness, precond })
    }

    pub fn config(&self) -> &SolveConfig {
        &self.cfg
    }

    pub fn space(&self) -> &Arc<TrialSpace> {
        &self.space
    }

    /// The gradient frame in use (horizontal, then ε-scaled vertical).
    pub fn fields(&self) -> &[AlgebraElement] {
        &self.fields
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Quadrature-assembled Dirichlet matrix in trial coordinates.
    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn load(&self) -> &DVector<f64> {
        &self.load
    }

    pub fn quadrature_set(&self) -> Option<&QuadratureSet> {
        match &self.backend {
            Backend::Sampled { quadrature, .. } => Some(quadrature),
            Backend::Exact => None,
        }
    }

    fn half_p(&self) -> f64 {
        self.cfg.flux.p / 2.0
    }

    fn directional_monomials(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let big = self.space.monomials().len();
        let mut y = DMatrix::zeros(big, self.deriv.len());
        for (i, d) in self.deriv.iter().enumerate() {
            y.set_column(i, &(d * c));
        }
        y
    }

    fn eval(&self, c: &DVector<f64>) -> Result<Eval> {
        let spec = self.cfg.flux;
        match &self.backend {
            Backend::Exact => {
                let ac = &self.stiffness * c;
                let energy = spec.delta / 2.0 + 0.5 * c.dot(&ac) - self.load.dot(c);
                Ok(Eval { energy, grad: ac - &self.load, xi: Vec::new() })
            }
            Backend::Sampled { chunks, .. } => {
                let y = self.directional_monomials(c);
                let hp = self.half_p();
                let parts: Vec<Result<(f64, DMatrix<f64>, DMatrix<f64>)>> = chunks
                    .par_iter()
                    .enumerate()
                    .map(|(ci, ch)| {
                        let xi = &ch.v * &y;
                        let mut a = xi.clone();
                        let mut e = 0.0;
                        for r in 0..xi.nrows() {
                            let w = spec.delta + xi.row(r).norm_squared();
                            let val = w.powf(hp) / spec.p;
                            let s = if spec.p == 2.0 { 1.0 } else { w.powf(hp - 1.0) };
                            if !val.is_finite() || !s.is_finite() {
                                return Err(Error::NonFinite { index: ci * CHUNK + r });
                            }
                            e += ch.w[r] * val;
                            for k in 0..a.ncols() {
                                a[(r, k)] *= s * ch.w[r];
                            }
                        }
                        Ok((e, ch.v.transpose() * a, xi))
                    })
                    .collect();
                let mut energy_parts = Vec::with_capacity(parts.len());
                let mut r = DMatrix::zeros(y.nrows(), y.ncols());
                let mut xis = Vec::with_capacity(parts.len());
                for part in parts {
                    let (e, rr, xi) = part?;
                    energy_parts.push(e);
                    r += rr;
                    xis.push(xi);
                }
                let mut grad = -&self.load;
                for (i, d) in self.deriv.iter().enumerate() {
                    grad += d.transpose() * r.column(i);
                }
                let energy = pairwise_sum(&energy_parts) - self.load.dot(c);
                Ok(Eval { energy, grad, xi: xis })
            }
        }
    }

    /// Energy change along `d` from the state `ev`, for each step in turn.
    fn line_delta(&self, ev: &Eval, d: &DVector<f64>) -> impl Fn(f64) -> f64 + '_ {
        let gd = ev.grad.dot(d);
        let ld = self.load.dot(d);
        let spec = self.cfg.flux;
        let hp = self.half_p();
        let (dad, eta, xi) = match &self.backend {
            Backend::Exact => (d.dot(&(&self.stiffness * d)), Vec::new(), Vec::new()),
            Backend::Sampled { chunks, .. } => {
                let y = self.directional_monomials(d);
                let eta: Vec<DMatrix<f64>> = chunks.par_iter().map(|ch| &ch.v * &y).collect();
                (0.0, eta, ev.xi.clone())
            }
        };
        let weights: Vec<&DVector<f64>> = match &self.backend {
            Backend::Sampled { chunks, .. } => chunks.iter().map(|c| &c.w).collect(),
            Backend::Exact => Vec::new(),
        };
        move |s: f64| {
            if eta.is_empty() {
                return s * gd + 0.5 * s * s * dad;
            }
            let parts: Vec<f64> = (0..eta.len())
                .into_par_iter()
                .map(|ci| {
                    let (x, e, w) = (&xi[ci], &eta[ci], weights[ci]);
                    let mut acc = 0.0;
                    for r in 0..x.nrows() {
                        let mut w0 = spec.delta;
                        let mut dw = 0.0;
                        for k in 0..x.ncols() {
                            let (a, b) = (x[(r, k)], e[(r, k)]);
                            w0 += a * a;
                            dw += s * b * (2.0 * a + s * b);
                        }
                        acc += w[r] * power_diff(w0, dw, hp) / spec.p;
                    }
                    acc
                })
                .collect();
            pairwise_sum(&parts) - s * ld
        }
    }

    /// Energy of the trial field with coordinates `c`.
    pub fn energy(&self, c: &[f64]) -> Result<f64> {
        Ok(self.eval(&DVector::from_column_slice(c))?.energy)
    }

    /// Gradient in trial coordinates; entry `k` is the weak-form residual
    /// against trial function `φ_k`.
    pub fn energy_gradient(&self, c: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(&DVector::from_column_slice(c))?.grad.iter().copied().collect())
    }

    /// Energy of an arbitrary field, evaluated pointwise without projection.
    pub fn energy_field(&self, u: &PolyField) -> Result<f64> {
        let grads: Vec<PolyField> =
            self.fields.iter().map(|x| apply_field(x, u)).collect::<Result<_>>()?;
        let spec = self.cfg.flux;
        match &self.backend {
            Backend::Exact => {
                let sq = crate::field::squared_norm(&grads);
                let m = self.space.moments();
                Ok(spec.delta / 2.0 + 0.5 * m.integrate(&sq)? - m.integrate(&self.cfg.source.mul(u))?)
            }
            Backend::Sampled { quadrature, .. } => crate::haar::integrate(quadrature, |pt| {
                let w = spec.delta + grads.iter().map(|g| g.evaluate_values(&pt.values).powi(2)).sum::<f64>();
                w.powf(spec.p / 2.0) / spec.p
                    - self.cfg.source.evaluate_values(&pt.values) * u.evaluate_values(&pt.values)
            }),
        }
    }

    pub fn field(&self, c: &[f64]) -> PolyField {
        self.space.field(c)
    }

    /// Trial coordinates drawn uniformly from `[-scale, scale]`.
    pub fn random_coefficients(&self, seed: u64, scale: f64) -> Vec<f64> {
        let mut rng = stream_rng(seed, streams::INIT, 0);
        (0..self.dim()).map(|_| rng.random_range(-scale..scale)).collect()
    }

    fn omega_stats(&self, c: &DVector<f64>, ev: &Eval) -> Result<OmegaStats> {
        let delta = self.cfg.flux.delta;
        let (ws, wts): (Vec<f64>, Vec<f64>) = match &self.backend {
            Backend::Sampled { chunks, .. } => ev
                .xi
                .iter()
                .zip(chunks)
                .flat_map(|(x, ch)| {
                    (0..x.nrows()).map(move |r| (delta + x.row(r).norm_squared(), ch.w[r]))
                })
                .unzip(),
            Backend::Exact => {
                // Diagnostic only: a fixed Haar sample.
                let q = haar_quadrature(self.cfg.n, 4096, 0)?;
                let chunks = build_chunks(&q, &self.space, &self.cfg.source);
                let y = self.directional_monomials(c);
                chunks
                    .iter()
                    .flat_map(|ch| {
                        let xi = &ch.v * &y;
                        (0..xi.nrows())
                            .map(|r| (delta + xi.row(r).norm_squared(), ch.w[r]))
                            .collect::<Vec<_>>()
                    })
                    .unzip()
            }
        };
        let min = ws.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ws.iter().copied().fold(0.0, f64::max);
        let num: Vec<f64> = ws.iter().zip(&wts).map(|(a, b)| a * b).collect();
        Ok(OmegaStats { min, max, mean: pairwise_sum(&num) / pairwise_sum(&wts) })
    }

    /// Preconditioned L-BFGS with Armijo halving. The energy trace is built
    /// from accurately computed decrements, so it never increases.
    pub fn minimize_from(&self, init: &[f64]) -> Result<SolutionReport> {
        if init.len() != self.dim() {
            return Err(Error::SizeMismatch { left: self.dim(), right: init.len() });
        }
        let mut c = DVector::from_column_slice(init);
        let mut ev = self.eval(&c)?;
        let mut energy = ev.energy;
        let mut energy_trace = vec![energy];
        let mut gradient_trace = vec![ev.grad.norm()];
        let mut memory: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
        let mut iterations = 0;
        let mut line_search_failed = false;
        while ev.grad.norm() > self.cfg.tol_grad && iterations < self.cfg.max_iter {
            let mut d = self.direction(&ev.grad, &memory);
            if ev.grad.dot(&d) >= 0.0 {
                memory.clear();
                d = -self.precond.solve(&ev.grad);
            }
            let mut accepted = self.search(&ev, &d);
            if accepted.is_none() && !memory.is_empty() {
                memory.clear();
                d = -self.precond.solve(&ev.grad);
                accepted = self.search(&ev, &d);
            }
            let Some((step, delta)) = accepted else {
                line_search_failed = true;
                break;
            };
            let s = &d * step;
            let c_new = &c + &s;
            let ev_new = self.eval(&c_new)?;
            let y = &ev_new.grad - &ev.grad;
            let sy = s.dot(&y);
            if sy > 1e-14 * s.norm() * y.norm() {
                if memory.len() == MEMORY {
                    memory.pop_front();
                }
                memory.push_back((s, y, 1.0 / sy));
            }
            energy += delta;
            c = c_new;
            ev = ev_new;
            iterations += 1;
            energy_trace.push(energy);
            gradient_trace.push(ev.grad.norm());
        }
        let final_gradient_norm = ev.grad.norm();
        let coeffs: Vec<f64> = c.iter().copied().collect();
        let solution = self.field(&coeffs);
        Ok(SolutionReport {
            p: self.cfg.flux.p,
            delta: self.cfg.flux.delta,
            epsilon: self.cfg.epsilon,
            coefficients: solution.to_json(),
            trial_coefficients: coeffs,
            energy_trace,
            gradient_trace,
            final_energy: ev.energy,
            final_gradient_norm,
            weak_residual: ev.grad.amax(),
            iterations,
            converged: final_gradient_norm <= self.cfg.tol_grad,
            line_search_failed,
            omega_stats: self.omega_stats(&c, &ev)?,
            solution,
        })
    }

    pub fn minimize(&self, init: &PolyField) -> Result<SolutionReport> {
        let c = self.space.project(init)?;
        self.minimize_from(&c)
    }

    fn direction(
        &self,
        g: &DVector<f64>,
        memory: &VecDeque<(DVector<f64>, DVector<f64>, f64)>,
    ) -> DVector<f64> {
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * s.dot(&q);
            q -= y * a;
            alphas.push(a);
        }
        let mut r = self.precond.solve(&q);
        if let Some((s, y, _)) = memory.back() {
            let py = self.precond.solve(y);
            let gamma = s.dot(y) / y.dot(&py);
            r *= gamma;
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
            let b = rho * y.dot(&r);
            r += s * (a - b);
        }
        -r
    }

    fn search(&self, ev: &Eval, d: &DVector<f64>) -> Option<(f64, f64)> {
        let gd = ev.grad.dot(d);
        if !(gd < 0.0) {
            return None;
        }
        let delta = self.line_delta(ev, d);
        let mut step = 1.0;
        for _ in 0..MAX_HALVINGS {
            let dl = delta(step);
            if dl.is_finite() && dl <= ARMIJO * step * gd && dl < 0.0 {
                return Some((step, dl));
            }
            step *= 0.5;
        }
        None
    }

    /// Direct solve of the quadratic (p = 2) Galerkin system.
    pub fn linear_solve_p2(&self) -> Result<Vec<f64>> {
        if self.cfg.flux.p != 2.0 {
            return Err(Error::Precondition("linear solve needs p = 2".into()));
        }
        Ok(self.precond.solve(&self.load).iter().copied().collect())
    }
}

fn frame_fields(frame: &Frame, epsilon: f64) -> Result<Vec<AlgebraElement>> {
    if epsilon == 0.0 {
        Ok(frame.horizontal().to_vec())
    } else {
        Ok(frame.with_epsilon(epsilon)?.fields())
    }
}

fn build_chunks(q: &QuadratureSet, space: &TrialSpace, f: &PolyField) -> Vec<Chunk> {
    q.points()
        .par_chunks(CHUNK)
        .map(|pts| {
            let mons = space.monomials();
            let v = DMatrix::from_fn(pts.len(), mons.len(), |r, k| mons[k].eval(&pts[r].values));
            let w = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.weight));
            let fv = DVector::from_iterator(pts.len(), pts.iter().map(|p| f.evaluate_values(&p.values)));
            Chunk { v, w, f: fv }
        })
        .collect()
}

/// Solve for each ε in a descending list, warm-starting from the previous one.
pub fn epsilon_sweep(cfg: &SolveConfig, eps_list: &[f64], space: Arc<TrialSpace>) -> Result<Vec<SolutionReport>> {
    if eps_list.is_empty() {
        return Err(Error::OutOfRange("empty epsilon list".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Precondition("epsilon list must be strictly descending in (0, 1]".into()));
    }
    let mut out: Vec<SolutionReport> = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let problem = Problem::with_space(SolveConfig { epsilon: eps, ..cfg.clone() }, space.clone())?;
        let init = out
            .last()
            .map(|r| r.trial_coefficients.clone())
            .unwrap_or_else(|| vec![0.0; problem.dim()]);
        out.push(problem.minimize_from(&init)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
