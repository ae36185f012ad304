//! Caccioppoli-type inequalities, the sup-gradient bound and Hölder behaviour
//! of `∇_H u`, evaluated as empirical ratio reports on surrogate balls.

mod cutoff;
mod holder;
mod local;

pub use cutoff::{cutoff, project_cutoff, Cutoff, CutoffSpec};
pub use holder::{holder_exponent_estimate, HolderReport};
pub use local::{LocalPoint, LocalQuadrature};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{apply_field, PolyField};
use crate::haar::pairwise_sum;
use crate::lie::{Frame, GroupElement, LieAlgebra};
use crate::rng::{split, streams};
use crate::solver::{FluxSpec, SolutionReport};

/// Index offset for the inner-ball stratum within the local-ball stream.
const INNER_STREAM: u64 = 1 << 41;

/// Which inequality a ratio report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Which {
    C1,
    C2,
    C3,
    C4,
    C5,
    L32,
}

impl Which {
    pub const ALL: [Which; 6] = [Which::L32, Which::C1, Which::C2, Which::C3, Which::C4, Which::C5];

    pub fn id(self) -> &'static str {
        match self {
            Which::C1 => "C1",
            Which::C2 => "C2",
            Which::C3 => "C3",
            Which::C4 => "C4",
            Which::C5 => "C5",
            Which::L32 => "L32",
        }
    }

    /// Smallest admissible β.
    pub fn min_beta(self) -> f64 {
        match self {
            Which::C3 | Which::C4 => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub check_id: String,
    pub beta: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub eps: f64,
    pub lhs: f64,
    /// Each right-hand integral without its unknown constant.
    pub rhs_terms: Vec<f64>,
    pub rhs_sum: f64,
    pub ratio: f64,
    pub n_points: usize,
    /// `(points, ratio)` over nested prefixes of the quadrature.
    pub refinement_trace: Vec<(usize, f64)>,
}

impl RatioReport {
    pub const CSV_HEADER: &'static str = "check_id,beta,r_in,r_out,eps,lhs,rhs_sum,ratio,N";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{:e},{}",
            self.check_id, self.beta, self.r_in, self.r_out, self.eps, self.lhs, self.rhs_sum, self.ratio, self.n_points
        )
    }

    pub fn is_finite(&self) -> bool {
        self.ratio.is_finite() && self.lhs.is_finite() && self.rhs_terms.iter().all(|t| t.is_finite())
    }

    /// Largest over smallest ratio along the refinement trace (1 when all vanish).
    pub fn refinement_spread(&self) -> f64 {
        let rs: Vec<f64> = self.refinement_trace.iter().map(|t| t.1).collect();
        let hi = rs.iter().cloned().fold(0.0f64, f64::max);
        let lo = rs.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }
}

/// `lhs / rhs`, with `0/0 = 0` and `+∞` only for a positive left side over a zero right side.
pub fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        lhs / rhs
    }
}

/// `x^e` with `x^0 = 1` for every `x`, including 0.
fn pw(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// First and second left-invariant derivatives of a field over the
/// horizontal and unscaled vertical frame, composed exactly.
#[derive(Debug, Clone)]
pub struct Derivatives {
    first: Vec<PolyField>,
    second: Vec<PolyField>,
    m: usize,
}

impl Derivatives {
    pub fn new(u: &PolyField, frame: &Frame) -> Result<Self> {
        let fields: Vec<_> = frame.horizontal().iter().chain(frame.unscaled_vertical()).cloned().collect();
        let first: Vec<PolyField> = fields.iter().map(|x| apply_field(x, u)).collect::<Result<_>>()?;
        let mut second = Vec::with_capacity(fields.len() * fields.len());
        for x in &fields {
            for d in &first {
                second.push(apply_field(x, d)?);
            }
        }
        Ok(Self { first, second, m: frame.horizontal().len() })
    }
}

/// Derivatives evaluated at the points of a local quadrature.
/// `d2[i·k + j]` holds `X_i X_j u`.
#[derive(Debug, Clone)]
pub struct FieldSample {
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
    m: usize,
    k: usize,
    /// The same derivatives on the battery's inner-ball stratum.
    inner: Option<Box<FieldSample>>,
}

impl FieldSample {
    pub fn new(der: &Derivatives, q: &LocalQuadrature) -> Self {
        let k = der.first.len();
        let (d1, d2) = q
            .points()
            .par_iter()
            .map(|p| {
                let a: Vec<f64> = der.first.iter().map(|f| f.evaluate_values(&p.values)).collect();
                let b: Vec<f64> = der.second.iter().map(|f| f.evaluate_values(&p.values)).collect();
                (a, b)
            })
            .unzip();
        Self { d1, d2, m: der.m, k, inner: None }
    }

    fn h2(&self, i: usize) -> f64 {
        self.d1[i][..self.m].iter().map(|x| x * x).sum()
    }

    fn t2(&self, i: usize) -> f64 {
        self.d1[i][self.m..].iter().map(|x| x * x).sum()
    }

    /// `|∇_H∇_H u|²`.
    fn hh(&self, i: usize) -> f64 {
        let k = self.k;
        (0..self.m).flat_map(|a| (0..self.m).map(move |b| a * k + b)).map(|ix| self.d2[i][ix].powi(2)).sum()
    }

    /// `|∇_H∇_T u|²`.
    fn ht(&self, i: usize) -> f64 {
        let k = self.k;
        (0..self.m).flat_map(|a| (self.m..k).map(move |b| a * k + b)).map(|ix| self.d2[i][ix].powi(2)).sum()
    }

    /// `|∇^ε∇^ε_T u|²`.
    fn eps_t(&self, i: usize, eps: f64) -> f64 {
        let k = self.k;
        let s = |a: usize| if a < self.m { 1.0 } else { eps };
        let mut acc = 0.0;
        for a in 0..k {
            for b in self.m..k {
                acc += (s(a) * eps * self.d2[i][a * k + b]).powi(2);
            }
        }
        acc
    }
}

/// A cutoff evaluated on a local quadrature, shared by all checks on it.
pub struct Battery<'a> {
    q: &'a LocalQuadrature,
    /// Level-set left sides live on the inner ball, which holds only a
    /// `(r_in/r_out)^Q` share of `q`; they get their own stratum of equal size.
    inner: LocalQuadrature,
    cutoff: &'a Cutoff,
    eta: Vec<f64>,
    grad_h: Vec<f64>,
    grad_t: Vec<f64>,
}

/// Prefix sizes used for refinement traces: N/4, N/2, N.
fn prefixes(n: usize) -> Vec<usize> {
    [n / 4, n / 2, n].into_iter().filter(|&m| m > 0).collect()
}

impl<'a> Battery<'a> {
    pub fn new(cutoff: &'a Cutoff, q: &'a LocalQuadrature) -> Result<Self> {
        let spec = cutoff.spec();
        if q.radius() < spec.r_outer {
            return Err(Error::Precondition(format!(
                "quadrature radius {} does not cover the cutoff support {}",
                q.radius(),
                spec.r_outer
            )));
        }
        if (q.center() - &spec.center).camax() > 1e-12 {
            return Err(Error::Precondition("quadrature and cutoff centers differ".into()));
        }
        let vals: Vec<(f64, Vec<f64>)> = q.points().par_iter().map(|p| cutoff.value_and_gradient(&p.g)).collect();
        let m = cutoff.horizontal_len();
        let eta = vals.iter().map(|v| v.0).collect();
        let grad_h = vals.iter().map(|v| v.1[..m].iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let grad_t = vals.iter().map(|v| v.1[m..].iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let inner = cutoff.inner_quadrature(q.len(), split(q.seed(), streams::LOCAL_BALL, INNER_STREAM));
        Ok(Self { q, inner, cutoff, eta, grad_h, grad_t })
    }

    pub fn quadrature(&self) -> &LocalQuadrature {
        self.q
    }

    pub fn sample(&self, u: &PolyField, frame: &Frame) -> Result<FieldSample> {
        let der = Derivatives::new(u, frame)?;
        let mut s = FieldSample::new(&der, self.q);
        s.inner = Some(Box::new(FieldSample::new(&der, &self.inner)));
        Ok(s)
    }

    fn integrate(&self, m: usize, f: &[f64]) -> f64 {
        let pts = self.q.points();
        let s = pts.len() as f64 / m as f64;
        let terms: Vec<f64> = (0..m).map(|i| pts[i].weight * f[i]).collect();
        s * pairwise_sum(&terms)
    }

    fn sup(v: &[f64], m: usize) -> f64 {
        v[..m].iter().cloned().fold(0.0, f64::max)
    }

    /// One Caccioppoli-type inequality at exponent `beta`.
    /// `eps` is used by `L32` only and must be positive there.
    pub fn check(&self, s: &FieldSample, flux: FluxSpec, beta: f64, which: Which, eps: f64) -> Result<RatioReport> {
        flux.validate()?;
        if !(beta >= which.min_beta()) || !beta.is_finite() {
            return Err(Error::Precondition(format!("{} needs beta >= {}, got {beta}", which.id(), which.min_beta())));
        }
        if which == Which::L32 && !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Precondition(format!("L32 needs epsilon in (0, 1], got {eps}")));
        }
        let (p, delta) = (flux.p, flux.delta);
        let n = self.q.len();
        let b1 = beta + 1.0;
        // Per-point integrands: [lhs, rhs_1, rhs_2, ...].
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let eta = self.eta[i];
                let (gh, gt) = (self.grad_h[i], self.grad_t[i]);
                let h2 = s.h2(i);
                let t2 = s.t2(i);
                let w = delta + h2;
                match which {
                    Which::L32 => {
                        let om = delta + h2 + eps * eps * t2;
                        let te2 = eps * eps * t2;
                        let ge2 = gh * gh + eps * eps * gt * gt;
                        vec![
                            eta * eta * pw(om, (p - 2.0) / 2.0) * pw(te2, beta) * s.eps_t(i, eps),
                            ge2 * pw(om, (p - 2.0) / 2.0) * pw(te2, beta + 1.0),
                            eps * eps * b1 * b1 * eta * eta * pw(om, p / 2.0) * pw(te2, beta),
                        ]
                    }
                    Which::C1 => vec![
                        eta * eta * pw(w, (p - 2.0) / 2.0) * pw(t2, beta) * s.ht(i),
                        gh * gh * pw(w, (p - 2.0) / 2.0) * pw(t2, beta + 1.0),
                        b1 * b1 * eta * eta * pw(w, p / 2.0) * pw(t2, beta),
                    ],
                    Which::C2 => vec![
                        eta * eta * pw(w, (p - 2.0) / 2.0 + beta) * s.hh(i),
                        b1.powi(4) * eta * eta * pw(w, (p - 2.0) / 2.0 + beta) * t2,
                        b1 * b1 * (eta * eta + gh * gh + eta * gt) * pw(w, p / 2.0 + beta),
                    ],
                    Which::C3 => vec![
                        pw(eta, 2.0 * beta + 2.0) * pw(w, (p - 2.0) / 2.0) * pw(t2, beta) * s.hh(i),
                        pw(eta, 2.0 * beta) * pw(w, p / 2.0) * pw(t2, beta - 1.0) * s.hh(i),
                    ],
                    Which::C4 => vec![
                        pw(eta, 2.0 * beta + 2.0) * pw(w, (p - 2.0) / 2.0) * pw(t2, beta) * s.hh(i),
                        eta * eta * pw(w, (p - 2.0) / 2.0 + beta) * s.hh(i),
                    ],
                    Which::C5 => vec![
                        eta * eta * pw(w, (p - 2.0) / 2.0 + beta) * s.hh(i),
                        if eta > 0.0 { pw(w, p / 2.0 + beta) } else { 0.0 },
                    ],
                }
            })
            .collect();
        let cols = rows[0].len();
        let col = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
        let columns: Vec<Vec<f64>> = (0..cols).map(col).collect();
        let evaluate = |m: usize| -> (f64, Vec<f64>) {
            let ints: Vec<f64> = columns.iter().map(|c| self.integrate(m, c)).collect();
            let (sh, st) = (Self::sup(&self.grad_h, m), Self::sup(&self.grad_t, m));
            let rhs = match which {
                Which::C3 => vec![b1.powi(4) * sh * sh * ints[1]],
                Which::C4 => vec![b1.powf(4.0 * beta) * pw(sh, 2.0 * beta) * ints[1]],
                Which::C5 => vec![b1.powi(12) * (1.0 + sh * sh + st) * ints[1]],
                _ => ints[1..].to_vec(),
            };
            (ints[0], rhs)
        };
        let refinement_trace = prefixes(n)
            .into_iter()
            .map(|m| {
                let (l, r) = evaluate(m);
                (m, ratio_of(l, r.iter().sum()))
            })
            .collect();
        let (lhs, rhs_terms) = evaluate(n);
        let rhs_sum: f64 = rhs_terms.iter().sum();
        let spec = self.cutoff.spec();
        Ok(RatioReport {
            check_id: which.id().into(),
            beta,
            r_in: spec.r_inner,
            r_out: spec.r_outer,
            eps: if which == Which::L32 { eps } else { 0.0 },
            lhs,
            rhs_terms,
            rhs_sum,
            ratio: ratio_of(lhs, rhs_sum),
            n_points: n,
            refinement_trace,
        })
    }

    /// Level-set inequality for `(X_s u − k)⁺` with `s` counted from 1 over
    /// the horizontal fields. `m_sup` is the sampled sup of `|∇_T u|` on the doubled ball.
    pub fn level_set(&self, s: &FieldSample, flux: FluxSpec, dir: usize, k: f64, q_exp: f64, m_sup: f64) -> Result<RatioReport> {
        flux.validate()?;
        if flux.p < 2.0 {
            return Err(Error::Precondition(format!("level-set inequality needs p >= 2, got {}", flux.p)));
        }
        if !(q_exp >= 4.0) {
            return Err(Error::Precondition(format!("q must be at least 4, got {q_exp}")));
        }
        if dir == 0 || dir > s.m {
            return Err(Error::OutOfRange(format!("direction {dir} not in 1..={}", s.m)));
        }
        let spec = self.cutoff.spec();
        let (r0, r1) = (spec.r_inner, spec.r_outer);
        let (p, delta) = (flux.p, flux.delta);
        let j = dir - 1;
        let pts = self.q.points();
        let n = pts.len();
        let inner = s.inner.as_deref().ok_or_else(|| Error::Precondition("sample lacks the inner stratum".into()))?;
        let ipts = self.inner.points();
        if inner.d1.len() != ipts.len() || s.d1.len() != n {
            return Err(Error::Precondition("sample was not drawn on this battery".into()));
        }
        let w_at = |f: &FieldSample, i: usize| pw(delta + f.h2(i), (p - 2.0) / 2.0);
        let lhs_c: Vec<f64> = (0..ipts.len())
            .map(|i| {
                if inner.d1[i][j] - k <= 0.0 {
                    return 0.0;
                }
                w_at(inner, i) * (0..s.m).map(|a| inner.d2[i][a * s.k + j].powi(2)).sum::<f64>()
            })
            .collect();
        let mut rhs_c = vec![0.0; n];
        let mut ind_c = vec![0.0; n];
        for i in 0..n {
            let v = s.d1[i][j] - k;
            if v <= 0.0 || pts[i].gauge() > r1 {
                continue;
            }
            rhs_c[i] = w_at(s, i) * v * v;
            ind_c[i] = 1.0;
        }
        let evaluate = |m: usize| -> (f64, Vec<f64>) {
            let measure = self.integrate(m, &ind_c);
            let t2 = if measure > 0.0 { (delta + m_sup * m_sup).powf(p / 2.0) * measure.powf(1.0 - 2.0 / q_exp) } else { 0.0 };
            let mi = m.min(ipts.len());
            let scaled: Vec<f64> = (0..mi).map(|i| ipts[i].weight * lhs_c[i]).collect();
            let lhs = ipts.len() as f64 / mi as f64 * pairwise_sum(&scaled);
            (lhs, vec![self.integrate(m, &rhs_c) / ((r1 - r0) * (r1 - r0)), t2])
        };
        let refinement_trace = prefixes(n)
            .into_iter()
            .map(|m| {
                let (l, r) = evaluate(m);
                (m, ratio_of(l, r.iter().sum()))
            })
            .collect();
        let (lhs, rhs_terms) = evaluate(n);
        let rhs_sum: f64 = rhs_terms.iter().sum();
        Ok(RatioReport {
            check_id: format!("L42_s{dir}_k{k}"),
            beta: 0.0,
            r_in: r0,
            r_out: r1,
            eps: 0.0,
            lhs,
            rhs_terms,
            rhs_sum,
            ratio: ratio_of(lhs, rhs_sum),
            n_points: n,
            refinement_trace,
        })
    }
}

/// Flux parameters of a solved report.
fn flux_of(u: &SolutionReport) -> FluxSpec {
    FluxSpec { p: u.p, delta: u.delta }
}

/// Evaluate one inequality on a solved field. `L32` uses the report's ε.
pub fn caccioppoli_check(
    u: &SolutionReport,
    frame: &Frame,
    cutoff: &Cutoff,
    beta: f64,
    which: Which,
    q: &LocalQuadrature,
) -> Result<RatioReport> {
    let battery = Battery::new(cutoff, q)?;
    let s = battery.sample(&u.solution, frame)?;
    battery.check(&s, flux_of(u), beta, which, u.epsilon)
}

/// Sampled sup of `|∇_T u|` over the surrogate ball of `radius`.
pub fn vertical_gradient_sup(
    u: &PolyField,
    frame: &Frame,
    algebra: &LieAlgebra,
    center: &GroupElement,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let q = LocalQuadrature::new(frame, algebra, center, radius, samples, seed)?;
    let t: Vec<PolyField> = frame.unscaled_vertical().iter().map(|x| apply_field(x, u)).collect::<Result<_>>()?;
    Ok(q.points()
        .par_iter()
        .map(|p| t.iter().map(|f| f.evaluate_values(&p.values).powi(2)).sum::<f64>().sqrt())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max))
}

/// Level-set inequality on a solved field. `M` is sampled over the doubled
/// outer ball with as many points as `q`.
#[allow(clippy::too_many_arguments)]
pub fn level_set_caccioppoli(
    u: &SolutionReport,
    frame: &Frame,
    algebra: &LieAlgebra,
    cutoff: &Cutoff,
    dir: usize,
    k: f64,
    q_exp: f64,
    q: &LocalQuadrature,
) -> Result<RatioReport> {
    let battery = Battery::new(cutoff, q)?;
    let s = battery.sample(&u.solution, frame)?;
    let spec = cutoff.spec();
    let seed = split(q.seed(), streams::LOCAL_BALL, 1 << 40);
    let m_sup = vertical_gradient_sup(&u.solution, frame, algebra, &spec.center, 2.0 * spec.r_outer, q.len(), seed)?;
    battery.level_set(&s, flux_of(u), dir, k, q_exp, m_sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupAvgReport {
    pub ratio: f64,
    pub sup: f64,
    pub average: f64,
    pub r: f64,
    pub eps: f64,
    pub samples: usize,
    /// `(samples per ball, ratio)` for N and 2N.
    pub refinement_trace: Vec<(usize, f64)>,
}

/// `sup_{B_{r/2}} |∇u| / (⨍_{B_r} (δ + |∇u|²)^{p/2})^{1/p}` on surrogate balls.
/// `eps = 0` uses `∇_H`; `eps > 0` the full ε-gradient.
#[allow(clippy::too_many_arguments)]
pub fn sup_avg_ratio(
    u: &PolyField,
    flux: FluxSpec,
    frame: &Frame,
    algebra: &LieAlgebra,
    center: &GroupElement,
    r: f64,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<SupAvgReport> {
    flux.validate()?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("epsilon {eps} not in [0, 1]")));
    }
    if samples < 100 {
        return Err(Error::Insufficient(format!("{samples} ball samples; need at least 100")));
    }
    let fields = if eps == 0.0 { frame.horizontal().to_vec() } else { frame.with_epsilon(eps)?.fields() };
    let grad: Vec<PolyField> = fields.iter().map(|x| apply_field(x, u)).collect::<Result<_>>()?;
    let norms = |q: &LocalQuadrature| -> Vec<f64> {
        q.points()
            .par_iter()
            .map(|p| grad.iter().map(|f| f.evaluate_values(&p.values).powi(2)).sum::<f64>().sqrt())
            .collect()
    };
    let outer = LocalQuadrature::new(frame, algebra, center, r, 2 * samples, seed)?;
    let inner = LocalQuadrature::new(frame, algebra, center, 0.5 * r, 2 * samples, split(seed, streams::LOCAL_BALL, 1 << 40))?;
    let (gi, go) = (norms(&inner), norms(&outer));
    let at = |m: usize| -> (f64, f64, f64) {
        let sup = gi[..m].iter().cloned().fold(0.0, f64::max);
        let pts = &outer.points()[..m];
        let num: Vec<f64> = pts.iter().zip(&go).map(|(p, g)| p.weight * (flux.delta + g * g).powf(flux.p / 2.0)).collect();
        let den: Vec<f64> = pts.iter().map(|p| p.weight).collect();
        let avg = (pairwise_sum(&num) / pairwise_sum(&den)).powf(1.0 / flux.p);
        (ratio_of(sup, avg), sup, avg)
    };
    let (r1, _, _) = at(samples);
    let (ratio, sup, average) = at(2 * samples);
    Ok(SupAvgReport { ratio, sup, average, r, eps, samples: 2 * samples, refinement_trace: vec![(samples, r1), (2 * samples, ratio)] })
}

/// Settings for a full battery over solved fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatteryConfig {
    /// Algebra coordinates of the ball center (`exp` of this element).
    pub center: Vec<f64>,
    pub r_in: f64,
    pub r_out: f64,
    pub points: usize,
    pub seed: u64,
    pub betas: Vec<f64>,
    pub level_directions: Vec<usize>,
    pub level_ks: Vec<f64>,
    pub q_exp: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            center: vec![0.0; 8],
            r_in: 0.2,
            r_out: 0.4,
            points: 20_000,
            seed: 0,
            betas: vec![0.0, 1.0, 2.0],
            level_directions: vec![1],
            level_ks: vec![-0.1, 0.0, 0.1],
            q_exp: 4.0,
        }
    }
}

/// Every admissible check of the configuration on one solved field.
pub fn run_battery(
    u: &SolutionReport,
    frame: &Frame,
    algebra: &LieAlgebra,
    cutoff: &Cutoff,
    q: &LocalQuadrature,
    cfg: &BatteryConfig,
) -> Result<Vec<RatioReport>> {
    let battery = Battery::new(cutoff, q)?;
    let s = battery.sample(&u.solution, frame)?;
    let flux = flux_of(u);
    let mut out = Vec::new();
    for which in Which::ALL {
        if which == Which::L32 && u.epsilon == 0.0 {
            continue;
        }
        for &beta in &cfg.betas {
            if beta >= which.min_beta() {
                out.push(battery.check(&s, flux, beta, which, u.epsilon)?);
            }
        }
    }
    if !cfg.level_ks.is_empty() {
        let spec = cutoff.spec();
        let seed = split(q.seed(), streams::LOCAL_BALL, 1 << 40);
        let m_sup = vertical_gradient_sup(&u.solution, frame, algebra, &spec.center, 2.0 * spec.r_outer, q.len(), seed)?;
        for &dir in &cfg.level_directions {
            for &k in &cfg.level_ks {
                out.push(battery.level_set(&s, flux, dir, k, cfg.q_exp, m_sup)?);
            }
        }
    }
    Ok(out)
}
