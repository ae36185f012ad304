use super::*;
use crate::field::PolyField;
use proptest::prelude::*;
use std::sync::OnceLock;

fn space() -> Arc<TrialSpace> {
    static SPACE: OnceLock<Arc<TrialSpace>> = OnceLock::new();
    SPACE
        .get_or_init(|| Arc::new(TrialSpace::new(&su_frame(3).unwrap(), 2).unwrap()))
        .clone()
}

fn re11() -> PolyField {
    PolyField::re_entry(3, 0, 0, 2)
}

fn config(p: f64, delta: f64, eps: f64, points: usize, source: &PolyField) -> SolveConfig {
    let quadrature = Quadrature::MonteCarlo { points, seed: 7 };
    let f = center_source(source, &quadrature).unwrap();
    SolveConfig { quadrature, tol_grad: 1e-10, ..SolveConfig::new(FluxSpec::new(p, delta).unwrap(), eps, f) }
}

#[test]
fn zero_source_gives_zero_field() {
    let cfg = config(3.0, 1.0, 1.0, 2000, &PolyField::zero(3, 2));
    let pr = Problem::with_space(cfg, space()).unwrap();
    let init = pr.random_coefficients(1, 0.2);
    let rep = pr.minimize_from(&init).unwrap();
    assert!(rep.converged, "{} {} {:?}", rep.iterations, rep.line_search_failed, rep.gradient_trace);
    assert!(rep.is_monotone());
    assert!(rep.trial_coefficients.iter().all(|c| c.abs() < 1e-9));
    assert!((rep.final_energy - 1.0 / 3.0).abs() < 1e-12);
    assert!((pr.energy(&vec![0.0; pr.dim()]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn exact_eigenfunction_oracle() {
    let f = re11().scale(4.0);
    let cfg = SolveConfig {
        quadrature: Quadrature::Exact,
        tol_grad: 1e-12,
        ..SolveConfig::new(FluxSpec::new(2.0, 1.0).unwrap(), 0.0, f)
    };
    let pr = Problem::with_space(cfg, space()).unwrap();
    let oracle = pr.space().project(&re11()).unwrap();
    let direct = pr.linear_solve_p2().unwrap();
    let rep = pr.minimize_from(&vec![0.0; pr.dim()]).unwrap();
    for k in 0..pr.dim() {
        assert!((direct[k] - oracle[k]).abs() < 1e-10);
        assert!((rep.trial_coefficients[k] - oracle[k]).abs() < 1e-10);
    }
    // With the vertical fields present the same source gives Re g_11 / (1 + ε²·1).
    let cfg1 = SolveConfig { epsilon: 1.0, ..pr.config().clone() };
    let pr1 = Problem::with_space(cfg1, space()).unwrap();
    let sol = pr1.linear_solve_p2().unwrap();
    assert!(sol.iter().zip(&oracle).all(|(a, b)| (a - b / 2.0).abs() < 1e-10));
}

#[test]
fn sampled_p2_agrees_with_linear_solve() {
    let cfg = config(2.0, 0.0, 0.5, 3000, &re11().scale(4.0));
    let pr = Problem::with_space(cfg, space()).unwrap();
    let direct = pr.linear_solve_p2().unwrap();
    let rep = pr.minimize_from(&pr.random_coefficients(3, 0.5)).unwrap();
    assert!(rep.converged);
    let err = direct.iter().zip(&rep.trial_coefficients).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
    // The quadratic energy is ½cᵀAc − bᵀc.
    let c = pr.random_coefficients(4, 1.0);
    let cv = DVector::from_column_slice(&c);
    let quad = 0.5 * cv.dot(&(pr.stiffness() * &cv)) - pr.load().dot(&cv);
    assert!((pr.energy(&c).unwrap() - quad).abs() < 1e-10 * quad.abs().max(1.0));
    assert!(pr.linear_solve_p2().is_ok());
}

#[test]
fn coefficient_energy_matches_pointwise_energy() {
    let cfg = config(3.0, 0.5, 0.25, 2000, &re11().scale(4.0));
    let pr = Problem::with_space(cfg, space()).unwrap();
    let c = pr.random_coefficients(9, 0.3);
    let u = pr.field(&c);
    let a = pr.energy(&c).unwrap();
    let b = pr.energy_field(&u).unwrap();
    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    let shifted = u.add(&PolyField::constant(3, 0.7, 0));
    assert!((pr.energy_field(&shifted).unwrap() - b).abs() < 1e-10);
}

#[test]
fn gradient_matches_finite_differences() {
    let cfg = config(4.0, 0.0, 0.5, 1500, &re11().scale(4.0));
    let pr = Problem::with_space(cfg, space()).unwrap();
    let c = pr.random_coefficients(2, 0.3);
    let g = pr.energy_gradient(&c).unwrap();
    let d = pr.random_coefficients(5, 1.0);
    let gd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
    let fd = |h: f64| {
        let plus: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a - h * b).collect();
        (pr.energy(&plus).unwrap() - pr.energy(&minus).unwrap()) / (2.0 * h)
    };
    let (e1, e2) = ((fd(1e-3) - gd).abs(), (fd(5e-4) - gd).abs());
    assert!(e1 < 1e-4 * gd.abs().max(1.0), "{e1} {gd}");
    assert!((e1 / e2 - 4.0).abs() < 0.5, "{e1} {e2}");
}

#[test]
fn p4_minimizer_beats_candidates_and_is_unique() {
    let cfg = config(4.0, 0.0, 1.0, 3000, &re11().scale(4.0));
    let pr = Problem::with_space(cfg, space()).unwrap();
    let a = pr.minimize_from(&pr.random_coefficients(10, 0.5)).unwrap();
    let b = pr.minimize_from(&pr.random_coefficients(11, 0.5)).unwrap();
    assert!(a.converged && b.converged && a.is_monotone() && b.is_monotone());
    assert!(a.weak_residual <= 1e-6);
    let diff = a.trial_coefficients.iter().zip(&b.trial_coefficients).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
    let cfg2 = config(2.0, 0.0, 1.0, 3000, &re11().scale(4.0));
    let p2 = Problem::with_space(cfg2, space()).unwrap().linear_solve_p2().unwrap();
    assert!(a.final_energy < pr.energy(&p2).unwrap());
    for s in 0..5 {
        let pert: Vec<f64> = a
            .trial_coefficients
            .iter()
            .zip(pr.random_coefficients(100 + s, 0.05))
            .map(|(x, y)| x + y)
            .collect();
        assert!(a.final_energy <= pr.energy(&pert).unwrap());
    }
    let csv = a.trace_csv();
    assert!(csv.starts_with("iter,energy,grad_norm\n"));
    assert_eq!(csv.lines().count(), a.energy_trace.len() + 1);
}

#[test]
fn sweep_validation_and_single_step() {
    let cfg = config(2.0, 1.0, 1.0, 1000, &re11().scale(4.0));
    assert!(epsilon_sweep(&cfg, &[0.5, 1.0], space()).is_err());
    assert!(epsilon_sweep(&cfg, &[], space()).is_err());
    let one = epsilon_sweep(&cfg, &[1.0], space()).unwrap();
    let direct = Problem::with_space(cfg, space()).unwrap().minimize_from(&vec![0.0; space().dim()]).unwrap();
    assert_eq!(one[0].trial_coefficients, direct.trial_coefficients);
}

#[test]
fn config_validation_and_json() {
    let cfg = config(3.0, 0.0, 0.5, 100, &re11());
    let back = SolveConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
    let mut bad = cfg.to_json();
    bad["extra"] = serde_json::json!(1);
    assert!(SolveConfig::from_json(&bad).is_err());
    let exact_p3 = SolveConfig { quadrature: Quadrature::Exact, ..cfg.clone() };
    assert!(exact_p3.validate().is_err());
    let singular = SolveConfig { flux: FluxSpec { p: 1.5, delta: 0.0 }, ..cfg.clone() };
    assert!(singular.validate().is_err());
    let uncentered = SolveConfig { source: re11(), ..cfg };
    assert!(matches!(Problem::with_space(uncentered, space()), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_is_convex(seed in any::<u64>(), p in 2.0f64..5.0, delta in 0.0f64..1.0) {
        let cfg = config(p, delta, 0.5, 500, &re11().scale(4.0));
        let pr = Problem::with_space(cfg, space()).unwrap();
        let u = pr.random_coefficients(seed, 1.0);
        let v = pr.random_coefficients(seed ^ 0x55, 1.0);
        let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
        let lhs = pr.energy(&mid).unwrap();
        let rhs = 0.5 * (pr.energy(&u).unwrap() + pr.energy(&v).unwrap());
        prop_assert!(lhs <= rhs + 1e-12 * rhs.abs());
    }
}
