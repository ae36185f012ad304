//! End-to-end acceptance run: one PASS/FAIL line per criterion, each checked
//! at its stated tolerance and wall-clock budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde_json::json;
use subelliptic::field::{apply_field, flow_derivative_check, Monomial, PolyField};
use subelliptic::geometry::{
    ball_volume_estimate, cc_upper_bound, riemannian_distance_eps, CcOptions, Gauge,
};
use subelliptic::haar::{haar_quadrature, mean_and_stderr, sample_haar};
use subelliptic::harness::{
    cutoff, holder_exponent_estimate, run_battery, sup_avg_ratio, BatteryConfig, CutoffSpec, LocalQuadrature,
    RatioReport, SupAvgReport,
};
use subelliptic::lie::group::{exp, identity};
use subelliptic::lie::{
    bracket, decompose, horizontal_frame, hormander_rank, structure_constants_of, su_basis, su_frame,
    AlgebraElement, GroupElement,
};
use subelliptic::rng::{stream_rng, streams};
use subelliptic::solver::{center_source, FluxSpec, Problem, Quadrature, SolutionReport, SolveConfig, TrialSpace};

type Check = Result<String, String>;

struct Runner {
    failures: Vec<String>,
}

impl Runner {
    fn run(&mut self, id: &str, budget_s: f64, f: impl FnOnce() -> Check) {
        let t0 = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        let (ok, detail) = match res {
            Ok(d) if secs <= budget_s => (true, d),
            Ok(d) => (false, format!("{d}; over budget")),
            Err(d) => (false, d),
        };
        println!("{} {id} [{secs:.1}s / {budget_s}s] {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(id.to_string());
        }
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn written_frame() -> Vec<AlgebraElement> {
    let f = su_frame(3).unwrap();
    f.horizontal().iter().chain(f.unscaled_vertical()).cloned().collect()
}

/// `[X_i, X_j]` rows; entries are `(k, c)` with 1-based `k`.
fn commutator_table() -> Vec<Vec<Vec<(usize, f64)>>> {
    let row = |r: [&[(usize, f64)]; 8]| r.iter().map(|e| e.to_vec()).collect::<Vec<_>>();
    vec![
        row([&[], &[(7, -1.)], &[(5, 1.)], &[(6, -1.)], &[(3, -1.)], &[(4, 1.)], &[(2, 4.)], &[(2, 2.)]]),
        row([&[(7, 1.)], &[], &[(6, 1.)], &[(5, 1.)], &[(4, -1.)], &[(3, -1.)], &[(1, -4.)], &[(1, -2.)]]),
        row([&[(5, -1.)], &[(6, -1.)], &[], &[(8, -1.)], &[(1, 1.)], &[(2, 1.)], &[(4, 2.)], &[(4, 4.)]]),
        row([&[(6, 1.)], &[(5, -1.)], &[(8, 1.)], &[], &[(2, 1.)], &[(1, -1.)], &[(3, -2.)], &[(3, -4.)]]),
        row([&[(3, 1.)], &[(4, 1.)], &[(1, -1.)], &[(2, -1.)], &[], &[(8, 1.), (7, -1.)], &[(6, 2.)], &[(6, -2.)]]),
        row([&[(4, -1.)], &[(3, 1.)], &[(2, -1.)], &[(1, 1.)], &[(7, 1.), (8, -1.)], &[], &[(5, -2.)], &[(5, 2.)]]),
        row([&[(2, -4.)], &[(1, 4.)], &[(4, -2.)], &[(3, 2.)], &[(6, -2.)], &[(5, 2.)], &[], &[]]),
        row([&[(2, -2.)], &[(1, 2.)], &[(4, -4.)], &[(3, 4.)], &[(6, 2.)], &[(5, -2.)], &[], &[]]),
    ]
}

fn c1_table() -> Check {
    let sc = structure_constants_of(&written_frame()).map_err(|e| e.to_string())?;
    let tab = commutator_table();
    let mut worst = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            let mut want = [0.0; 8];
            for &(k, c) in &tab[i][j] {
                want[k - 1] = c;
            }
            for (k, w) in want.iter().enumerate() {
                ensure([0.0, 1.0, 2.0, 4.0].contains(&w.abs()), "table entry outside {0, ±1, ±2, ±4}")?;
                worst = worst.max((sc.get(i, j, k) - w).abs());
            }
        }
    }
    ensure(worst < 1e-12, format!("residual {worst:.2e}"))?;
    Ok(format!("64 brackets, residual {worst:.2e}"))
}

fn c2_metric() -> Check {
    let alg = su_basis(3).map_err(|e| e.to_string())?;
    let gram_err = (alg.gram() - DMatrix::<f64>::identity(8, 8)).amax();
    let x = written_frame();
    let x77 = alg.inner(&x[6], &x[6]).map_err(|e| e.to_string())?;
    ensure(gram_err < 1e-12, format!("Gram error {gram_err:.2e}"))?;
    ensure((x77 - 4.0).abs() < 1e-12, format!("<X7,X7> = {x77}"))?;
    Ok(format!("Gram error {gram_err:.2e}, <X7,X7> = {x77}"))
}

/// Roots via a joint eigendecomposition of `i·ad T` over the Cartan basis.
fn roots_by_ad(n: usize) -> Vec<Vec<f64>> {
    let alg = su_basis(n).unwrap();
    let sc = alg.structure_constants().unwrap();
    let nu = n - 1;
    let herm = |w: &[f64]| {
        let mut m = DMatrix::<f64>::zeros(alg.dimension(), alg.dimension());
        for (t, &c) in w.iter().enumerate() {
            m += sc.ad_matrix(t) * c;
        }
        m.map(|v| Complex64::new(0.0, v))
    };
    let generic: Vec<f64> = (0..nu).map(|t| 1.0 + (t as f64 + 1.0).sqrt() * 0.37).collect();
    let eig = herm(&generic).symmetric_eigen();
    let singles: Vec<_> = (0..nu)
        .map(|t| {
            let mut e = vec![0.0; nu];
            e[t] = 1.0;
            herm(&e)
        })
        .collect();
    let mut out = Vec::new();
    for k in 0..alg.dimension() {
        if eig.eigenvalues[k].abs() < 1e-8 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let r: Vec<f64> = singles.iter().map(|h| (v.adjoint() * h * v)[(0, 0)].re).collect();
        if r.iter().find(|x| x.abs() > 1e-8).is_some_and(|&x| x > 0.0) {
            out.push(r);
        }
    }
    out
}

fn same_sets(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>, tol: f64) -> bool {
    let key = |v: &Vec<f64>| v.iter().map(|x| (x * 1e6).round() as i64).collect::<Vec<_>>();
    a.sort_by_key(key);
    b.sort_by_key(key);
    a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.iter().zip(y).all(|(p, q)| (p - q).abs() < tol))
}

fn c3_roots() -> Check {
    let s3 = 3f64.sqrt();
    let mut notes = Vec::new();
    for (n, q) in [(2usize, 4usize), (3, 10), (4, 18)] {
        let alg = su_basis(n).map_err(|e| e.to_string())?;
        let rd = decompose(&alg).map_err(|e| e.to_string())?;
        let got: Vec<Vec<f64>> = rd.positive_roots().iter().map(|r| r.coords.clone()).collect();
        ensure(got.len() == n * (n - 1) / 2, format!("su({n}): {} positive roots", got.len()))?;
        ensure(same_sets(got.clone(), roots_by_ad(n), 1e-8), format!("su({n}): roots differ from the ad oracle"))?;
        if n == 3 {
            let want = vec![vec![2.0, 0.0], vec![1.0, s3], vec![1.0, -s3]];
            ensure(same_sets(got, want, 1e-10), "su(3) root coordinates")?;
        }
        for r in rd.positive_roots() {
            let nn = alg.inner(&r.vector, &r.vector).unwrap();
            ensure((nn - 4.0).abs() < 1e-10, format!("su({n}): |R|^2 = {nn}"))?;
        }
        let res = rd.verify().max_residual();
        ensure(res < 1e-10, format!("su({n}): property residual {res:.2e}"))?;
        let qd = horizontal_frame(&rd).map_err(|e| e.to_string())?.homogeneous_dimension();
        ensure(qd == q, format!("su({n}): Q = {qd}"))?;
        notes.push(format!("su({n}) Q={qd} res={res:.1e}"));
    }
    Ok(notes.join(", "))
}

fn c4_hormander() -> Check {
    let rank = hormander_rank(&su_frame(3).map_err(|e| e.to_string())?);
    ensure(rank == 8, format!("bracket closure has dimension {rank}"))?;
    Ok("bracket closure of X1..X6 has dimension 8".into())
}

fn random_field(rng: &mut impl Rng, deg: u32, terms: usize) -> PolyField {
    let ts: Vec<(Monomial, f64)> = (0..terms)
        .map(|_| {
            let d = rng.random_range(1..=deg);
            (Monomial::from_vars((0..d).map(|_| rng.random_range(0..18u16)).collect()), rng.random_range(-1.0..1.0))
        })
        .collect();
    PolyField::from_terms(3, deg, ts).unwrap()
}

fn random_element(rng: &mut impl Rng, scale: f64) -> AlgebraElement {
    let alg = su_basis(3).unwrap();
    let c: Vec<f64> = (0..8).map(|_| rng.random_range(-scale..scale)).collect();
    alg.element(&c)
}

fn c5_calculus() -> Check {
    let mut rng = stream_rng(2024, streams::PROPERTY, 5);
    let mut comm = 0.0f64;
    for _ in 0..100 {
        let (x, y) = (random_element(&mut rng, 1.0), random_element(&mut rng, 1.0));
        let u = random_field(&mut rng, 3, 6);
        let xy = apply_field(&x, &apply_field(&y, &u).unwrap()).unwrap();
        let yx = apply_field(&y, &apply_field(&x, &u).unwrap()).unwrap();
        let b = apply_field(&bracket(&x, &y).unwrap(), &u).unwrap();
        comm = comm.max(xy.sub(&yx).max_coeff_diff(&b));
    }
    ensure(comm < 1e-9, format!("commutator residual {comm:.2e}"))?;

    // ∫ (Xu) v = −∫ u (Xv) under Haar measure.
    let q = haar_quadrature(3, 20_000, 11).unwrap();
    let mut worst_z = 0.0f64;
    for _ in 0..5 {
        let x = random_element(&mut rng, 1.0);
        let (u, v) = (random_field(&mut rng, 2, 5), random_field(&mut rng, 2, 5));
        let s = apply_field(&x, &u).unwrap().mul(&v).add(&u.mul(&apply_field(&x, &v).unwrap()));
        let (mean, se) = mean_and_stderr(&q, |p| s.evaluate_values(&p.values)).unwrap();
        worst_z = worst_z.max(mean.abs() / se);
    }
    ensure(worst_z < 3.0, format!("integration by parts at {worst_z:.2} standard errors"))?;

    let mut ratios = Vec::new();
    for _ in 0..10 {
        let x = random_element(&mut rng, 1.0);
        let u = random_field(&mut rng, 3, 6);
        let g = sample_haar(&mut rng, 3);
        let e1 = flow_derivative_check(&x, &u, &g, 0.02).unwrap().error;
        let e2 = flow_derivative_check(&x, &u, &g, 0.01).unwrap().error;
        ratios.push(e1 / e2);
    }
    let off = ratios.iter().map(|r| (r - 4.0).abs()).fold(0.0, f64::max);
    ensure(off < 0.5, format!("flow error ratios {ratios:.3?}"))?;
    Ok(format!("commutator {comm:.1e}, IBP max |z| {worst_z:.2}, FD ratio within {off:.3} of 4"))
}

fn re11() -> PolyField {
    PolyField::re_entry(3, 0, 0, 2)
}

fn space() -> Arc<TrialSpace> {
    Arc::new(TrialSpace::new(&su_frame(3).unwrap(), 2).unwrap())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c6_p2(space: &Arc<TrialSpace>) -> Check {
    let oracle = space.project(&re11()).unwrap();
    let mut notes = Vec::new();
    for eps in [0.0, 0.5] {
        let cfg = SolveConfig {
            quadrature: Quadrature::Exact,
            tol_grad: 1e-12,
            ..SolveConfig::new(FluxSpec::new(2.0, 0.0).unwrap(), eps, re11().scale(4.0 * (1.0 + eps * eps)))
        };
        let pr = Problem::with_space(cfg, space.clone()).unwrap();
        let direct = pr.linear_solve_p2().unwrap();
        let min = pr.minimize_from(&pr.random_coefficients(1, 0.5)).unwrap();
        let (a, b, c) = (max_diff(&direct, &min.trial_coefficients), max_diff(&direct, &oracle), max_diff(&min.trial_coefficients, &oracle));
        ensure(a < 1e-8 && b < 1e-8 && c < 1e-8, format!("eps {eps}: {a:.1e} {b:.1e} {c:.1e}"))?;
        notes.push(format!("exact eps={eps}: |min-lin| {a:.1e}, |u-Re g11| {c:.1e}"));
    }
    // Sampled energy: the two solvers still agree.
    let quadrature = Quadrature::MonteCarlo { points: 20_000, seed: 3 };
    let f = center_source(&re11().scale(4.0), &quadrature).unwrap();
    let cfg = SolveConfig { quadrature, tol_grad: 1e-12, ..SolveConfig::new(FluxSpec::new(2.0, 0.0).unwrap(), 0.5, f) };
    let pr = Problem::with_space(cfg, space.clone()).unwrap();
    let direct = pr.linear_solve_p2().unwrap();
    let min = pr.minimize_from(&pr.random_coefficients(2, 0.5)).unwrap();
    let a = max_diff(&direct, &min.trial_coefficients);
    ensure(a < 1e-8, format!("sampled |min-lin| {a:.1e}"))?;
    notes.push(format!("sampled |min-lin| {a:.1e}"));
    Ok(notes.join("; "))
}

struct Solved {
    report: SolutionReport,
    label: String,
}

fn c7_solves(space: &Arc<TrialSpace>, out: &mut Vec<Solved>) -> Check {
    let mut worst_res = 0.0f64;
    let mut worst_diff = 0.0f64;
    let mut problems = Vec::new();
    for p in [2.0, 3.0, 4.0] {
        for delta in [0.0, 1.0] {
            for eps in [1.0, 0.5, 0.25] {
                let quadrature = Quadrature::MonteCarlo { points: 20_000, seed: 0 };
                let f = center_source(&re11().scale(4.0), &quadrature).unwrap();
                let cfg = SolveConfig {
                    quadrature,
                    tol_grad: 1e-9,
                    ..SolveConfig::new(FluxSpec::new(p, delta).unwrap(), eps, f)
                };
                let pr = Problem::with_space(cfg, space.clone()).unwrap();
                let a = pr.minimize_from(&pr.random_coefficients(10, 0.5)).unwrap();
                let b = pr.minimize_from(&pr.random_coefficients(11, 0.5)).unwrap();
                let label = format!("p={p} delta={delta} eps={eps}");
                let diff = max_diff(&a.trial_coefficients, &b.trial_coefficients);
                worst_diff = worst_diff.max(diff);
                worst_res = worst_res.max(a.weak_residual).max(b.weak_residual);
                if !(a.is_monotone() && b.is_monotone()) {
                    problems.push(format!("{label}: non-monotone trace"));
                }
                if !(a.converged && b.converged) {
                    problems.push(format!("{label}: not converged"));
                }
                if a.weak_residual > 1e-6 || b.weak_residual > 1e-6 {
                    problems.push(format!("{label}: weak residual {:.1e}", a.weak_residual.max(b.weak_residual)));
                }
                if diff > 1e-6 {
                    problems.push(format!("{label}: inits differ by {diff:.1e}"));
                }
                out.push(Solved { report: a, label });
            }
        }
    }
    ensure(problems.is_empty(), problems.join("; "))?;
    Ok(format!("18 configs x 2 inits, max weak residual {worst_res:.1e}, max init spread {worst_diff:.1e}"))
}

/// Largest ratio change between consecutive quadrature doublings.
fn doubling_factor(r: &RatioReport) -> f64 {
    r.refinement_trace
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].1, w[1].1);
            if a == 0.0 && b == 0.0 {
                1.0
            } else {
                (a / b).max(b / a)
            }
        })
        .fold(1.0, f64::max)
}

fn c8_battery(solved: &[Solved]) -> Check {
    ensure(!solved.is_empty(), "no solved fields")?;
    let alg = su_basis(3).unwrap();
    let frame = su_frame(3).unwrap();
    let cfg = BatteryConfig { level_ks: vec![-0.1, 0.0, 0.1], q_exp: 4.0, ..BatteryConfig::default() };
    let center = identity(3);
    let cut = cutoff(&CutoffSpec::new(center.clone(), cfg.r_in, cfg.r_out), &frame, &alg).unwrap();
    let q = LocalQuadrature::new(&frame, &alg, &center, cfg.r_out, cfg.points, cfg.seed).unwrap();
    let mut problems = Vec::new();
    let mut n_reports = 0;
    let mut worst = 1.0f64;
    // L32 ratios per (p, delta, beta) across eps.
    let mut eps_groups: std::collections::BTreeMap<String, Vec<(f64, f64)>> = Default::default();
    for s in solved {
        let reports = run_battery(&s.report, &frame, &alg, &cut, &q, &cfg).unwrap();
        n_reports += reports.len();
        for r in &reports {
            let f = doubling_factor(r);
            worst = worst.max(f);
            if !r.is_finite() {
                problems.push(format!("{} {} beta={}: non-finite", s.label, r.check_id, r.beta));
            } else if f >= 2.0 {
                problems.push(format!("{} {} beta={}: doubling factor {f:.2}", s.label, r.check_id, r.beta));
            }
            if r.check_id == "L32" {
                let key = format!("p={} delta={} beta={}", s.report.p, s.report.delta, r.beta);
                eps_groups.entry(key).or_default().push((r.eps, r.ratio));
            }
        }
    }
    // ε-independence: the ratios at smaller ε stay within ×2 of the ε = 1 value.
    let mut eps_worst = 1.0f64;
    for (key, rows) in &eps_groups {
        let at1 = rows.iter().find(|r| r.0 == 1.0).map(|r| r.1).unwrap_or(f64::NAN);
        let hi = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let growth = if hi == 0.0 { 1.0 } else { hi / at1 };
        eps_worst = eps_worst.max(growth);
        if !(growth < 2.0) {
            problems.push(format!("L32 {key}: ratio grows x{growth:.2} as eps decreases ({rows:?})"));
        }
    }
    ensure(problems.is_empty(), problems.join("; "))?;
    Ok(format!(
        "{n_reports} reports finite, max doubling factor {worst:.3}, L32 eps growth <= x{eps_worst:.3}"
    ))
}

fn c9_sup(solved: &[Solved]) -> Check {
    ensure(!solved.is_empty(), "no solved fields")?;
    let alg = su_basis(3).unwrap();
    let frame = su_frame(3).unwrap();
    let mut worst = 1.0f64;
    let mut problems = Vec::new();
    for s in solved {
        let flux = FluxSpec::new(s.report.p, s.report.delta).unwrap();
        let r: SupAvgReport =
            sup_avg_ratio(&s.report.solution, flux, &frame, &alg, &identity(3), 0.4, s.report.epsilon, 10_000, 9).unwrap();
        let (a, b) = (r.refinement_trace[0].1, r.refinement_trace[1].1);
        let f = (a / b).max(b / a);
        worst = worst.max(f);
        if !r.ratio.is_finite() || !(f < 1.5) {
            problems.push(format!("{}: ratio {:.3} factor {f:.3}", s.label, r.ratio));
        }
    }
    ensure(problems.is_empty(), problems.join("; "))?;
    Ok(format!("{} fields, max doubling factor {worst:.4}", solved.len()))
}

fn random_point(seed: u64, scale: f64) -> GroupElement {
    let mut rng = stream_rng(seed, streams::PROPERTY, 0);
    exp(&random_element(&mut rng, scale))
}

fn c10_geometry() -> Check {
    let frame = su_frame(3).unwrap();
    let alg = su_basis(3).unwrap();
    let opts = CcOptions::default();
    let x = random_point(1, 1.0);
    let same = cc_upper_bound(&x, &x, &frame, opts, 0).unwrap();
    ensure(same.t == 0.0, format!("d(x,x) = {}", same.t))?;

    let mut worst_gap = f64::NEG_INFINITY;
    for i in 0..20u64 {
        let x = random_point(100 + i, 1.0);
        let y = &x * random_point(200 + i, 0.2);
        let d = cc_upper_bound(&x, &y, &frame, opts, i).unwrap();
        ensure(d.feasible, format!("pair {i}: no feasible horizontal path"))?;
        let de = riemannian_distance_eps(&x, &y, &frame, 0.5, opts, i, Some(&d.path)).unwrap();
        ensure(de.t <= d.t + opts.tol_end, format!("pair {i}: d^eps {} > d {}", de.t, d.t))?;
        worst_gap = worst_gap.max(de.t - d.t);
    }

    let mut ratios = Vec::new();
    for (i, s) in [0.04, 0.01, 0.0025].into_iter().enumerate() {
        let y = exp(&frame.vertical()[0].scale(s));
        let r = cc_upper_bound(&identity(3), &y, &frame, opts, i as u64).unwrap();
        ensure(r.feasible, format!("vertical s={s}: infeasible"))?;
        ratios.push(r.t * r.t / s);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    ensure(hi / lo < 2.0, format!("T^2/s = {ratios:.3?}"))?;

    let radii = [0.4, 0.3, 0.2, 0.1];
    let sr = ball_volume_estimate(&frame, &alg, Gauge::SubRiemannian, &radii, 20_000, 1).unwrap();
    let rm = ball_volume_estimate(&frame, &alg, Gauge::Riemannian, &radii, 20_000, 1).unwrap();
    ensure((sr.loglog_slope - 10.0).abs() <= 1.0, format!("sub-Riemannian slope {}", sr.loglog_slope))?;
    ensure((rm.loglog_slope - 8.0).abs() <= 0.5, format!("Riemannian slope {}", rm.loglog_slope))?;
    Ok(format!(
        "d(x,x)=0; 20 pairs max d^eps-d {worst_gap:.3}; T^2/s in [{lo:.2}, {hi:.2}]; slopes {:.3} / {:.3}",
        sr.loglog_slope, rm.loglog_slope
    ))
}

fn cli_solve(cfg: &Path, threads: &str, out: &Path) -> Result<(), String> {
    let r = Command::new(env!("CARGO_BIN_EXE_subelliptic"))
        .args(["solve", "--config", cfg.to_str().unwrap(), "--threads", threads, "--out", out.to_str().unwrap()])
        .env_remove("SUBELLIPTIC_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(r.status.success(), String::from_utf8_lossy(&r.stderr).to_string())
}

fn c11_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut e = vec![0u32; 18];
    e[0] = 1;
    let mut checked = 0;
    for (name, quadrature) in [
        ("exact", json!({ "kind": "exact" })),
        ("sampled", json!({ "kind": "monte_carlo", "points": 20000, "seed": 5 })),
    ] {
        let doc = json!({
            "schema_version": 1,
            "center_source": true,
            "solve": {
                "n": 3, "flux": { "p": 2.0, "delta": 0.0 }, "epsilon": 0.0, "degree_cap": 2,
                "quadrature": quadrature,
                "source": { "n": 3, "degree_cap": 2, "terms": [[e, 4.0]] },
                "tol_grad": 1e-12, "max_iter": 1000
            }
        });
        let cfg = dir.path().join(format!("{name}.json"));
        std::fs::write(&cfg, doc.to_string()).map_err(|e| e.to_string())?;
        let runs: Vec<_> = [("1", "a"), ("2", "b"), ("1", "c")]
            .iter()
            .map(|(t, tag)| {
                let o = dir.path().join(format!("{name}_{tag}"));
                cli_solve(&cfg, t, &o).map(|_| o)
            })
            .collect::<Result<_, _>>()?;
        for f in ["solution.json", "trace.csv"] {
            let first = std::fs::read(runs[0].join(f)).map_err(|e| e.to_string())?;
            for r in &runs[1..] {
                let other = std::fs::read(r.join(f)).map_err(|e| e.to_string())?;
                ensure(first == other, format!("{name}/{f} differs between runs"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} file comparisons byte-identical across 1/2 threads"))
}

fn holder_suite() -> Check {
    let alg = su_basis(3).unwrap();
    let frame = su_frame(3).unwrap();
    let radii = [0.4, 0.2, 0.1, 0.05];
    let fields = [re11(), PolyField::abs2_entry(3, 0, 1, 2).unwrap(), PolyField::im_entry(3, 1, 2, 2)];
    let mut notes = Vec::new();
    for (i, u) in fields.iter().enumerate() {
        let r = holder_exponent_estimate(u, &frame, &alg, &random_point(50 + i as u64, 1.0), &radii, 400, i as u64)
            .unwrap();
        let a = r.alpha_hat.ok_or("no resolved radii")?;
        let (lo, hi) = r.bootstrap_interval.ok_or("no bootstrap interval")?;
        ensure(a >= 0.9, format!("field {i}: alpha_hat {a:.3}"))?;
        ensure(a - lo <= 0.15 && hi - a <= 0.15, format!("field {i}: interval [{lo:.3}, {hi:.3}] around {a:.3}"))?;
        notes.push(format!("{a:.3} [{lo:.3}, {hi:.3}]"));
    }
    Ok(format!("alpha_hat {}", notes.join(", ")))
}

#[test]
fn acceptance() {
    let mut run = Runner { failures: Vec::new() };
    run.run("C1 commutator table", 1.0, c1_table);
    run.run("C2 metric", 1.0, c2_metric);
    run.run("C3 roots", 5.0, c3_roots);
    run.run("C4 Hormander", 1.0, c4_hormander);
    run.run("C5 operator calculus", 30.0, c5_calculus);
    let sp = space();
    run.run("C6 p=2 oracle", 30.0, || c6_p2(&sp));
    let mut solved = Vec::new();
    run.run("C7 p-energy solves", 600.0, || c7_solves(&sp, &mut solved));
    run.run("C8 inequality battery", 900.0, || c8_battery(&solved));
    run.run("C9 sup bound", 120.0, || c9_sup(&solved));
    run.run("C10 geometry", 600.0, c10_geometry);
    run.run("C11 determinism", 30.0, c11_determinism);
    run.run("Holder estimator", 120.0, holder_suite);
    assert!(run.failures.is_empty(), "failed: {:?}", run.failures);
}
