//! Carnot–Carathéodory and ε-Riemannian distance bounds, ball volumes.

mod volume;

pub(crate) use volume::{loglog_slope, orthonormal_complement, uniform_ball, unit_ball_volume};
pub use volume::{
    ball_volume_estimate, group_volume, haar_density, surrogate_gauge, BallVolumeReport, Gauge,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::group::{exp, log, reproject};
use crate::lie::{su_basis, AlgebraElement, CMat, Frame, GroupElement, LieAlgebra};
use crate::rng::{stream_rng, streams};

const REPROJECT_EVERY: usize = 50;
const STALL_WINDOW: usize = 25;

/// Piecewise-constant controls on `K` steps of length `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlPath {
    pub h: f64,
    pub controls: Vec<Vec<f64>>,
}

impl ControlPath {
    pub fn zero(steps: usize, m: usize, h: f64) -> Self {
        Self { h, controls: vec![vec![0.0; m]; steps] }
    }

    pub fn new(h: f64, controls: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self { h, controls };
        p.validate()?;
        Ok(p)
    }

    pub fn steps(&self) -> usize {
        self.controls.len()
    }

    pub fn duration(&self) -> f64 {
        self.h * self.steps() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(Error::OutOfRange(format!("step {} must be non-negative", self.h)));
        }
        let m = self.controls.first().map(|c| c.len()).unwrap_or(0);
        for (k, c) in self.controls.iter().enumerate() {
            if c.len() != m {
                return Err(Error::SizeMismatch { left: m, right: c.len() });
            }
            let s: f64 = c.iter().map(|a| a * a).sum();
            if !(s <= 1.0 + 1e-12) {
                return Err(Error::OutOfRange(format!("step {k} violates the subunit bound: {s}")));
            }
        }
        Ok(())
    }

    /// The path run backwards with negated controls.
    pub fn reversed(&self) -> Self {
        let controls = self.controls.iter().rev().map(|c| c.iter().map(|a| -a).collect()).collect();
        Self { h: self.h, controls }
    }
}

/// `g_{k+1} = g_k · exp(h Σ α_i X_i)`, re-projected every 50 products.
pub fn endpoint(path: &ControlPath, fields: &[AlgebraElement], start: &GroupElement) -> Result<GroupElement> {
    path.validate()?;
    if let Some(c) = path.controls.first() {
        if c.len() != fields.len() {
            return Err(Error::SizeMismatch { left: fields.len(), right: c.len() });
        }
    }
    Ok(endpoint_unchecked(path, fields, start))
}

fn step_generator(alpha: &[f64], fields: &[AlgebraElement], n: usize, h: f64) -> AlgebraElement {
    AlgebraElement::combination(n, alpha, fields).scale(h)
}

fn endpoint_unchecked(path: &ControlPath, fields: &[AlgebraElement], start: &GroupElement) -> GroupElement {
    let n = start.nrows();
    let mut g = start.clone();
    for (k, a) in path.controls.iter().enumerate() {
        g = &g * exp(&step_generator(a, fields, n, path.h));
        if (k + 1) % REPROJECT_EVERY == 0 {
            g = reproject(&g);
        }
    }
    g
}

/// Transcription settings shared by the distance bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcOptions {
    pub steps: usize,
    pub tol_end: f64,
    pub rel_width: f64,
    /// Total Levenberg–Marquardt iterations allowed per query.
    pub budget: usize,
    /// Iterations per feasibility attempt.
    pub max_iter: usize,
    /// Random restarts per trial duration.
    pub restarts: usize,
}

impl Default for CcOptions {
    fn default() -> Self {
        Self { steps: 64, tol_end: 1e-4, rel_width: 1e-2, budget: 20_000, max_iter: 150, restarts: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub endpoint_error: f64,
    pub feasible: bool,
    pub iterations: usize,
    pub path: ControlPath,
}

struct Transcription<'a> {
    fields: &'a [AlgebraElement],
    algebra: LieAlgebra,
    target: GroupElement,
    n: usize,
    opts: CcOptions,
    used: usize,
}

impl<'a> Transcription<'a> {
    fn residual(&self, path: &ControlPath) -> DVector<f64> {
        let g = endpoint_unchecked(path, self.fields, &CMat::identity(self.n, self.n));
        let r = log(&(g.adjoint() * &self.target));
        DVector::from_vec(self.algebra.coordinates_unchecked(&r))
    }

    fn jacobian(&self, path: &ControlPath) -> DMatrix<f64> {
        let (kk, m, h) = (path.steps(), self.fields.len(), path.h);
        let dim = self.algebra.dimension();
        let mut jac = DMatrix::zeros(dim, kk * m);
        let mut suffix = CMat::identity(self.n, self.n);
        for k in (0..kk).rev() {
            let a = step_generator(&path.controls[k], self.fields, self.n, h);
            let half = exp(&a.scale(0.5));
            let mk = &half * &suffix;
            let mk_inv = mk.adjoint();
            for (i, x) in self.fields.iter().enumerate() {
                let conj = AlgebraElement::project(&(&mk_inv * x.entries() * &mk));
                let c = self.algebra.coordinates_unchecked(&conj);
                for (d, v) in c.iter().enumerate() {
                    jac[(d, k * m + i)] = -h * v;
                }
            }
            suffix = exp(&a) * suffix;
        }
        jac
    }

    /// Projected Levenberg–Marquardt on the endpoint residual at fixed `T`.
    fn solve(&mut self, mut path: ControlPath) -> (ControlPath, f64) {
        let mut r = self.residual(&path);
        let mut err = r.norm();
        let mut lambda = 1e-3;
        let mut iters = 0;
        let mut checkpoint = err;
        while err > 0.5 * self.opts.tol_end && iters < self.opts.max_iter && self.used < self.opts.budget {
            // Give up on a start that has stopped making progress.
            if iters > 0 && iters % STALL_WINDOW == 0 {
                if err > 0.9 * checkpoint && err > 10.0 * self.opts.tol_end {
                    break;
                }
                checkpoint = err;
            }
            iters += 1;
            self.used += 1;
            let j = self.jacobian(&path);
            let jjt = &j * j.transpose();
            let mut improved = false;
            while lambda < 1e10 {
                let sys = &jjt + DMatrix::identity(jjt.nrows(), jjt.nrows()) * (lambda * (1.0 + jjt.diagonal().max()));
                let Some(ch) = sys.cholesky() else {
                    lambda *= 4.0;
                    continue;
                };
                let step = -(j.transpose() * ch.solve(&r));
                let mut trial = path.clone();
                let m = self.fields.len();
                for (k, c) in trial.controls.iter_mut().enumerate() {
                    for (i, a) in c.iter_mut().enumerate() {
                        *a += step[k * m + i];
                    }
                    project_unit(c);
                }
                let rt = self.residual(&trial);
                if rt.norm() < err {
                    path = trial;
                    r = rt;
                    err = r.norm();
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 4.0;
            }
            if !improved {
                break;
            }
        }
        (path, err)
    }
}

fn project_unit(c: &mut [f64]) {
    let s = c.iter().map(|a| a * a).sum::<f64>().sqrt();
    if s > 1.0 {
        c.iter_mut().for_each(|a| *a /= s);
    }
}

/// Minimum-norm frame coordinates of `theta` and the out-of-span residual.
fn frame_coordinates(theta: &AlgebraElement, fields: &[AlgebraElement], algebra: &LieAlgebra) -> (Vec<f64>, f64) {
    let cols: Vec<Vec<f64>> = fields.iter().map(|f| algebra.coordinates_unchecked(f)).collect();
    let dim = algebra.dimension();
    let a = DMatrix::from_fn(dim, fields.len(), |r, c| cols[c][r]);
    let t = DVector::from_vec(algebra.coordinates_unchecked(theta));
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&t, 1e-12).expect("svd solve");
    let resid = (&a * &x - t).norm();
    (x.iter().copied().collect(), resid)
}

fn max_speed(fields: &[AlgebraElement], algebra: &LieAlgebra) -> f64 {
    let m = fields.len();
    let g = DMatrix::from_fn(m, m, |i, j| algebra.inner_unchecked(&fields[i], &fields[j]));
    g.symmetric_eigen().eigenvalues.max().max(0.0).sqrt()
}

fn rescaled(path: &ControlPath, t: f64, steps: usize) -> ControlPath {
    let old_t = path.duration();
    let factor = if t > 0.0 { old_t / t } else { 0.0 };
    let mut p = ControlPath {
        h: t / steps as f64,
        controls: path.controls.iter().map(|c| c.iter().map(|a| a * factor).collect()).collect(),
    };
    p.controls.iter_mut().for_each(|c| project_unit(c));
    p
}

/// Shared bisection driver over a frame.
fn upper_bound(
    x: &GroupElement,
    y: &GroupElement,
    fields: &[AlgebraElement],
    opts: CcOptions,
    seed: u64,
    warm: Option<&ControlPath>,
) -> Result<DistanceReport> {
    crate::lie::group::check_group_element(x)?;
    crate::lie::group::check_group_element(y)?;
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::SizeMismatch { left: n, right: y.nrows() });
    }
    if opts.steps == 0 || !(opts.tol_end > 0.0) || !(opts.rel_width > 0.0) {
        return Err(Error::OutOfRange("invalid transcription options".into()));
    }
    let algebra = su_basis(n)?;
    let m = fields.len();
    let target = x.adjoint() * y;
    let theta = log(&target);
    let mut tr = Transcription { fields, algebra: algebra.clone(), target, n, opts, used: 0 };
    let zero = ControlPath::zero(opts.steps, m, 0.0);
    let err0 = tr.residual(&zero).norm();
    if err0 <= opts.tol_end {
        return Ok(DistanceReport { t: 0.0, k: opts.steps, endpoint_error: err0, feasible: true, iterations: 0, path: zero });
    }
    let lo_bound = algebra.norm(&theta) / max_speed(fields, &algebra);
    let (coords, span_resid) = frame_coordinates(&theta, fields, &algebra);
    let straight = |t: f64| ControlPath {
        h: t / opts.steps as f64,
        controls: vec![coords.iter().map(|c| c / t).collect(); opts.steps],
    };
    let mut rng = stream_rng(seed, streams::CC_DISTANCE, 0);

    let mut best: Option<(ControlPath, f64)> = None;
    let consider = |p: ControlPath, e: f64, best: &mut Option<(ControlPath, f64)>| {
        if e <= opts.tol_end && best.as_ref().is_none_or(|(b, _)| p.duration() < b.duration()) {
            *best = Some((p, e));
        }
    };

    // Candidates known to be feasible or nearly so.
    if span_resid < 1e-12 {
        let t = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        let p = straight(t);
        let e = tr.residual(&p).norm();
        consider(p, e, &mut best);
    }
    if let Some(w) = warm {
        if w.controls.first().map(|c| c.len()) == Some(m) {
            let e = tr.residual(w).norm();
            consider(w.clone(), e, &mut best);
        }
    }

    let attempt = |tr: &mut Transcription, t: f64, seedpath: Option<&ControlPath>, rng: &mut rand_chacha::ChaCha8Rng| -> (ControlPath, f64) {
        let mut starts: Vec<ControlPath> = Vec::new();
        if let Some(sp) = seedpath {
            starts.push(rescaled(sp, t, opts.steps));
        }
        let base = straight(t);
        // During bisection the rescaled incumbent is the informative start.
        let restarts = if seedpath.is_some() { opts.restarts.min(1) } else { opts.restarts };
        for r in 0..=restarts {
            let mut p = base.clone();
            let amp = if r == 0 && seedpath.is_none() { 0.05 } else { 0.6 };
            for c in p.controls.iter_mut() {
                for a in c.iter_mut() {
                    *a += amp * rng.random_range(-1.0..1.0);
                }
                project_unit(c);
            }
            starts.push(p);
        }
        let mut out: Option<(ControlPath, f64)> = None;
        for s in starts {
            let (p, e) = tr.solve(s);
            if out.as_ref().is_none_or(|(_, be)| e < *be) {
                out = Some((p, e));
            }
            if out.as_ref().unwrap().1 <= opts.tol_end || tr.used >= opts.budget {
                break;
            }
        }
        out.expect("at least one start")
    };

    // Bracket: grow from a heuristic guess until feasible.
    let mut lo = lo_bound;
    let mut closest: (ControlPath, f64) = (zero.clone(), err0);
    if best.is_none() {
        // A loop enclosing area a moves ~a along a bracket, so √(4π|θ|) is a natural scale.
        let guess = (4.0 * std::f64::consts::PI * algebra.norm(&theta)).sqrt();
        let mut t = lo_bound.max(guess).max(1e-6);
        while best.is_none() && tr.used < opts.budget {
            let (p, e) = attempt(&mut tr, t, None, &mut rng);
            if e < closest.1 {
                closest = (p.clone(), e);
            }
            if e <= opts.tol_end {
                best = Some((p, e));
            } else {
                lo = lo.max(t);
                t *= 2.0;
            }
        }
    }
    let Some((mut path, mut err)) = best else {
        let (p, e) = closest;
        return Ok(DistanceReport { t: p.duration(), k: opts.steps, endpoint_error: e, feasible: false, iterations: tr.used, path: p });
    };
    let mut hi = path.duration();
    lo = lo.min(hi);
    while hi - lo > opts.rel_width * hi && tr.used < opts.budget {
        let mid = 0.5 * (lo + hi);
        let (p, e) = attempt(&mut tr, mid, Some(&path), &mut rng);
        if e <= opts.tol_end {
            hi = p.duration();
            path = p;
            err = e;
        } else {
            lo = mid;
        }
    }
    Ok(DistanceReport { t: hi, k: opts.steps, endpoint_error: err, feasible: true, iterations: tr.used, path })
}

/// Upper bound for the CC distance over horizontal subunit paths.
pub fn cc_upper_bound(x: &GroupElement, y: &GroupElement, frame: &Frame, opts: CcOptions, seed: u64) -> Result<DistanceReport> {
    upper_bound(x, y, frame.horizontal(), opts, seed, None)
}

/// Upper bound for `d^ε` over the full ε-frame. A warm path over the
/// horizontal fields (such as a CC path) is padded with zero vertical controls.
pub fn riemannian_distance_eps(
    x: &GroupElement,
    y: &GroupElement,
    frame: &Frame,
    eps: f64,
    opts: CcOptions,
    seed: u64,
    warm: Option<&ControlPath>,
) -> Result<DistanceReport> {
    let fe = frame.with_epsilon(eps)?;
    let fields = fe.fields();
    let padded = warm.map(|w| ControlPath {
        h: w.h,
        controls: w
            .controls
            .iter()
            .map(|c| {
                let mut v = c.clone();
                v.resize(fields.len(), 0.0);
                v
            })
            .collect(),
    });
    upper_bound(x, y, &fields, opts, seed, padded.as_ref())
}
