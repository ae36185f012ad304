use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use subelliptic::geometry::{ball_volume_estimate, cc_upper_bound, riemannian_distance_eps};
use subelliptic::harness::{cutoff, run_battery, sup_avg_ratio, CutoffSpec, LocalQuadrature, RatioReport};
use subelliptic::lie::group::exp;
use subelliptic::lie::{
    decompose, horizontal_frame, hormander_rank, structure_constants_of, su_basis, su_frame, AlgebraElement,
    LieAlgebra, StructureConstants,
};
use subelliptic::solver::{epsilon_sweep, Problem, SolutionReport, TrialSpace};
use subelliptic::Error;

use crate::config::{self, BallvolFile, CcdistFile, SolveFile, SweepFile, VerifyFile};
use crate::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    /// Reports were written but flag a numerical failure.
    Failed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(s) | CliError::Failed(s) => f.write_str(s),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Failed(_) => 3,
            CliError::Core(e) => match e {
                Error::Config(_)
                | Error::OutOfRange(_)
                | Error::Precondition(_)
                | Error::InvalidDimension(_)
                | Error::SizeMismatch { .. }
                | Error::NotInAlgebra(_)
                | Error::NotInGroup(_)
                | Error::Unsupported(_)
                | Error::Insufficient(_)
                | Error::Dependent { .. }
                | Error::NotClosed { .. }
                | Error::NotSemisimple(_) => 2,
                Error::Degenerate { .. }
                | Error::Invariant(_)
                | Error::NonFinite { .. }
                | Error::Singular
                | Error::SingularSystem { .. }
                | Error::DegreeCap { .. } => 3,
            },
        }
    }
}

/// Named outputs of one command; the first is the one echoed without `--out`.
struct Outputs {
    files: Vec<(String, String)>,
    failure: Option<String>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new(), failure: None }
    }

    fn json(&mut self, name: &str, v: &impl Serialize) {
        let mut s = serde_json::to_string_pretty(v).expect("serializable report");
        s.push('\n');
        self.files.push((name.to_string(), s));
    }

    fn text(&mut self, name: &str, s: String) {
        self.files.push((name.to_string(), s));
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::OutOfRange("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let cfg = cli.config.as_deref();
    let out = match &cli.command {
        Command::Algebra { n } => algebra(*n)?,
        Command::Roots { n } => roots(*n)?,
        Command::Solve => solve(config::load(cfg)?, cli.seed)?,
        Command::Sweep => sweep(config::load(cfg)?, cli.seed)?,
        Command::Verify => verify(config::load(cfg)?, cli.seed)?,
        Command::Ccdist => ccdist(config::load(cfg)?, cli.seed)?,
        Command::Ballvol => ballvol(config::load(cfg)?, cli.seed)?,
    };
    emit(&out, cli.out.as_deref())?;
    match out.failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

fn emit(out: &Outputs, dir: Option<&Path>) -> Result<(), CliError> {
    let Some(dir) = dir else {
        if let Some((_, s)) = out.files.first() {
            print!("{s}");
        }
        return Ok(());
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, contents) in &out.files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(contents.as_bytes()).map_err(io)?;
        tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Triple {
    i: usize,
    j: usize,
    k: usize,
    c: f64,
}

/// Nonzero `c^k_{ij}` with 1-based indices, `i < j`.
fn triples(sc: &StructureConstants) -> Vec<Triple> {
    sc.triples(1e-12)
        .into_iter()
        .filter(|t| t.0 < t.1)
        .map(|(i, j, k, c)| Triple { i: i + 1, j: j + 1, k: k + 1, c: snap(c) })
        .collect()
}

/// Round values within 1e−12 of an integer so outputs are stable across platforms.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-12 {
        r + 0.0
    } else {
        x
    }
}

fn matrix(x: &AlgebraElement) -> Value {
    let pairs: Vec<Vec<[f64; 2]>> =
        x.to_pairs().into_iter().map(|row| row.into_iter().map(|[a, b]| [snap(a), snap(b)]).collect()).collect();
    json!(pairs)
}

fn algebra(n: usize) -> Result<Outputs, CliError> {
    let alg = su_basis(n)?;
    let frame = su_frame(n)?;
    let xs: Vec<AlgebraElement> = frame.horizontal().iter().chain(frame.unscaled_vertical()).cloned().collect();
    let doc = json!({
        "n": n,
        "dimension": alg.dimension(),
        "metric": "-1/2 tr",
        "basis": alg.basis().iter().map(matrix).collect::<Vec<_>>(),
        "structure_constants": triples(&alg.structure_constants()?),
        "frame": {
            "horizontal": frame.horizontal().len(),
            "basis": xs.iter().map(matrix).collect::<Vec<_>>(),
            "structure_constants": triples(&structure_constants_of(&xs)?),
        },
    });
    let mut out = Outputs::new();
    out.json("algebra.json", &doc);
    Ok(out)
}

fn roots(n: usize) -> Result<Outputs, CliError> {
    let alg = su_basis(n)?;
    let rd = decompose(&alg)?;
    let frame = horizontal_frame(&rd)?;
    let doc = json!({
        "n": n,
        "rank": rd.rank(),
        "cartan_basis": rd.cartan_basis().iter().map(matrix).collect::<Vec<_>>(),
        "positive_roots": rd.positive_roots().iter().map(|r| json!({
            "coords": r.coords.iter().map(|&c| snap(c)).collect::<Vec<_>>(),
            "norm_sq": snap(alg.inner(&r.vector, &r.vector).unwrap_or(f64::NAN)),
            "vector": matrix(&r.vector),
        })).collect::<Vec<_>>(),
        "pairs": rd.pairs().iter().map(|p| json!({
            "root_index": p.root_index,
            "odd": matrix(&p.odd),
            "even": matrix(&p.even),
        })).collect::<Vec<_>>(),
        "root_basis_indices": rd.root_basis_indices(),
        "homogeneous_dimension": frame.homogeneous_dimension(),
        "hormander_rank": hormander_rank(&frame),
        "properties": rd.verify(),
    });
    let mut out = Outputs::new();
    out.json("roots.json", &doc);
    Ok(out)
}

fn not_converged(reports: &[SolutionReport]) -> Option<String> {
    reports
        .iter()
        .find(|r| !r.converged)
        .map(|r| format!("solver did not converge at epsilon {} (gradient norm {:e})", r.epsilon, r.final_gradient_norm))
}

fn solve(file: SolveFile, seed: Option<u64>) -> Result<Outputs, CliError> {
    let cfg = config::solve_config(&file.solve, file.center_source, seed)?;
    let problem = Problem::new(cfg.clone())?;
    let report = problem.minimize_from(&vec![0.0; problem.dim()])?;
    let mut out = Outputs::new();
    out.json("solution.json", &json!({ "config": cfg.to_json(), "report": report }));
    out.text("trace.csv", report.trace_csv());
    out.failure = not_converged(std::slice::from_ref(&report));
    Ok(out)
}

fn sweep_reports(cfg: &subelliptic::solver::SolveConfig, eps: &[f64]) -> Result<Vec<SolutionReport>, Error> {
    let space = Arc::new(TrialSpace::new(&su_frame(cfg.n)?, cfg.degree_cap)?);
    epsilon_sweep(cfg, eps, space)
}

fn sweep(file: SweepFile, seed: Option<u64>) -> Result<Outputs, CliError> {
    let cfg = config::solve_config(&file.solve, file.center_source, seed)?;
    let reports = sweep_reports(&cfg, &file.eps_list)?;
    let mut summary = String::from("index,eps,final_energy,final_gradient_norm,weak_residual,iterations,converged\n");
    for (i, r) in reports.iter().enumerate() {
        summary.push_str(&format!(
            "{i},{},{:e},{:e},{:e},{},{}\n",
            r.epsilon, r.final_energy, r.final_gradient_norm, r.weak_residual, r.iterations, r.converged
        ));
    }
    let mut out = Outputs::new();
    out.text("sweep.csv", summary);
    out.json("sweep.json", &json!({ "config": cfg.to_json(), "eps_list": file.eps_list, "reports": reports }));
    for (i, r) in reports.iter().enumerate() {
        out.text(&format!("trace_{i}.csv"), r.trace_csv());
    }
    out.failure = not_converged(&reports);
    Ok(out)
}

fn verify(file: VerifyFile, seed: Option<u64>) -> Result<Outputs, CliError> {
    let cfg = config::solve_config(&file.solve, file.center_source, seed)?;
    let mut battery = file.battery;
    if let Some(s) = seed {
        battery.seed = s;
    }
    let reports = match &file.eps_list {
        Some(eps) => sweep_reports(&cfg, eps)?,
        None => {
            let problem = Problem::new(cfg.clone())?;
            vec![problem.minimize_from(&vec![0.0; problem.dim()])?]
        }
    };
    let alg = su_basis(cfg.n)?;
    let frame = su_frame(cfg.n)?;
    if battery.center.len() != alg.dimension() {
        return Err(Error::SizeMismatch { left: alg.dimension(), right: battery.center.len() }.into());
    }
    let center = exp(&alg.element(&battery.center));
    let cut = cutoff(&CutoffSpec::new(center.clone(), battery.r_in, battery.r_out), &frame, &alg)?;
    let q = LocalQuadrature::new(&frame, &alg, &center, battery.r_out, battery.points, battery.seed)?;
    let mut rows: Vec<RatioReport> = Vec::new();
    let mut sup = Vec::new();
    for r in &reports {
        rows.extend(run_battery(r, &frame, &alg, &cut, &q, &battery)?);
        let flux = subelliptic::solver::FluxSpec::new(r.p, r.delta)?;
        sup.push(sup_avg_ratio(
            &r.solution,
            flux,
            &frame,
            &alg,
            &center,
            file.sup_avg.r,
            r.epsilon,
            file.sup_avg.samples,
            battery.seed,
        )?);
    }
    let mut csv = format!("{}\n", RatioReport::CSV_HEADER);
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let bad: Vec<&str> = rows.iter().filter(|r| !r.is_finite()).map(|r| r.check_id.as_str()).collect();
    let worst_spread = rows.iter().map(|r| r.refinement_spread()).fold(1.0, f64::max);
    let mut out = Outputs::new();
    out.text("verify.csv", csv);
    out.json(
        "verify.json",
        &json!({
            "config": cfg.to_json(),
            "battery": battery,
            "sup_avg_config": file.sup_avg,
            "solutions": reports.iter().map(|r| json!({
                "eps": r.epsilon,
                "final_energy": r.final_energy,
                "weak_residual": r.weak_residual,
                "converged": r.converged,
            })).collect::<Vec<_>>(),
            "n_reports": rows.len(),
            "all_finite": bad.is_empty(),
            "max_refinement_spread": worst_spread,
            "sup_avg": sup,
            "reports": rows,
        }),
    );
    if !bad.is_empty() {
        out.failure = Some(format!("non-finite ratios: {}", bad.join(", ")));
    } else if sup.iter().any(|s| !s.ratio.is_finite()) {
        out.failure = Some("non-finite sup/average ratio".into());
    } else {
        out.failure = not_converged(&reports);
    }
    Ok(out)
}

fn point(alg: &LieAlgebra, coords: &[f64]) -> Result<subelliptic::lie::GroupElement, Error> {
    if coords.len() != alg.dimension() {
        return Err(Error::SizeMismatch { left: alg.dimension(), right: coords.len() });
    }
    Ok(exp(&alg.element(coords)))
}

fn ccdist(file: CcdistFile, seed: Option<u64>) -> Result<Outputs, CliError> {
    let alg = su_basis(file.n)?;
    let frame = su_frame(file.n)?;
    let seed = seed.unwrap_or(file.seed);
    let mut results = Vec::with_capacity(file.queries.len());
    for (i, q) in file.queries.iter().enumerate() {
        let (x, y) = (point(&alg, &q.x)?, point(&alg, &q.y)?);
        let s = subelliptic::rng::split(seed, subelliptic::rng::streams::CC_DISTANCE, i as u64);
        let d = match q.eps {
            None => cc_upper_bound(&x, &y, &frame, file.options, s)?,
            Some(eps) => riemannian_distance_eps(&x, &y, &frame, eps, file.options, s, None)?,
        };
        results.push(json!({ "index": i, "eps": q.eps, "report": d }));
    }
    let infeasible = results.iter().filter(|r| r["report"]["feasible"] == json!(false)).count();
    let mut out = Outputs::new();
    out.json("ccdist.json", &json!({ "n": file.n, "options": file.options, "seed": seed, "results": results }));
    if infeasible > 0 {
        out.failure = Some(format!("{infeasible} queries found no feasible path"));
    }
    Ok(out)
}

fn ballvol(file: BallvolFile, seed: Option<u64>) -> Result<Outputs, CliError> {
    let alg = su_basis(file.n)?;
    let frame = su_frame(file.n)?;
    let seed = seed.unwrap_or(file.seed);
    let report = ball_volume_estimate(&frame, &alg, file.gauge, &file.radii, file.samples, seed)?;
    let mut out = Outputs::new();
    out.json("ballvol.json", &json!({ "n": file.n, "samples": file.samples, "seed": seed, "report": report }));
    out.text("ballvol.csv", report.to_csv());
    Ok(out)
}
