use std::path::{Path, PathBuf};

use procrustes::simulate::{
    convergence_equivalence, counterexample_family, deformation_family, fourth_moment_check,
    generative_optimality, projection_error, projection_stability_experiment, Basis, RngSpec,
};
use procrustes::{
    fixed_point_residual, frechet_functional, geometry::geodesic_path, lift, mean_fixed_point,
    mean_procrustes_averaging, multicoupling, multicoupling_cost, procrustes_distance, reconstruct,
    tangent_pca, Covariance, Error as CoreError, MeanConfig, MeanResult,
};
use serde_json::{json, Value};

use crate::args::{Algorithm, BasisKind, Cli, Command, GlobalOpts, Simulate};
use crate::error::{exit, CliError, Context};
use crate::manifest::Family;
use crate::matrix_io::{read_covariance, write_matrix};
use crate::report::{float, floats, matrix, Report};

const OPTIMALITY_STEPS: [f64; 2] = [0.01, 0.1];

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self {
            report,
            code: exit::OK,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let o = &cli.opts;
    validate_opts(o)?;
    match &cli.command {
        Command::Distance { a, b } => distance(a, b).map(Outcome::ok),
        Command::Mean {
            manifest,
            algorithm,
            cross_check,
        } => mean(o, manifest, *algorithm, *cross_check),
        Command::Geodesic { a, b, steps } => geodesic(o, a, b, *steps).map(Outcome::ok),
        Command::Pca { manifest, k } => pca(o, manifest, *k).map(Outcome::ok),
        Command::Multicouple { manifest } => multicouple(o, manifest).map(Outcome::ok),
        Command::Simulate(sim) => simulate(o, sim).map(Outcome::ok),
    }
}

fn validate_opts(o: &GlobalOpts) -> Result<(), CliError> {
    if !(o.rel_tol > 0.0 && o.rel_tol.is_finite()) {
        return Err(CliError::Usage(format!("--rel-tol must be positive, got {}", o.rel_tol)));
    }
    if o.max_iter == 0 {
        return Err(CliError::Usage("--max-iter must be at least 1".into()));
    }
    if let Some(t) = o.rank_tol {
        if !(0.0..1.0).contains(&t) {
            return Err(CliError::Usage(format!("--rank-tol must lie in [0, 1), got {t}")));
        }
    }
    Ok(())
}

fn config(o: &GlobalOpts) -> MeanConfig {
    MeanConfig {
        max_iter: o.max_iter,
        rel_tol: o.rel_tol,
        rank_tol: o.rank_tol,
        ..MeanConfig::default()
    }
}

fn solver_inputs(o: &GlobalOpts) -> Value {
    json!({
        "rel_tol": float(o.rel_tol),
        "max_iter": o.max_iter,
        "rank_tol": o.rank_tol.map(float),
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn output_file(o: &GlobalOpts, name: &str) -> PathBuf {
    o.output.join(name)
}

/// Attaches the member label to family-indexed errors.
fn member_context(family: &Family) -> impl Fn(CoreError) -> CliError + '_ {
    move |e| {
        let context = match &e {
            CoreError::KernelCondition { index: Some(i), .. } => {
                format!("{}: member {} ({})", path_str(&family.manifest.path), i, family.label(*i))
            }
            _ => path_str(&family.manifest.path),
        };
        CliError::Core { context, source: e }
    }
}

fn solve(family: &Family, cfg: &MeanConfig, algorithm: Algorithm) -> Result<MeanResult, CoreError> {
    match algorithm {
        Algorithm::Descent => mean_fixed_point(&family.members, cfg),
        Algorithm::Gpa => mean_procrustes_averaging(&family.members, cfg),
    }
}

fn solve_strict(family: &Family, cfg: &MeanConfig) -> Result<Covariance, CliError> {
    solve(family, cfg, Algorithm::Descent)
        .map(|r| r.mean)
        .map_err(member_context(family))
}

fn distance(a: &Path, b: &Path) -> Result<Report, CliError> {
    let sa = read_covariance(a)?;
    let sb = read_covariance(b)?;
    let eq = convergence_equivalence(&sa, &sb).context(|| format!("{} vs {}", path_str(a), path_str(b)))?;
    let mut r = Report::new("distance", json!({ "a": path_str(a), "b": path_str(b) }));
    r.results = json!({
        "wasserstein": float(eq.wasserstein),
        "wasserstein_sq": float(eq.wasserstein * eq.wasserstein),
        "root_hs": float(eq.root_hs),
        "trace_dist": float(eq.trace_dist),
    });
    r.diagnostics = json!({
        "bound_constant": float(eq.bound_constant),
        "bound_applies": eq.bound_applies,
        "within_bound": eq.within_bound,
        "dimension": sa.dim(),
    });
    Ok(r)
}

fn mean_diagnostics(res: &MeanResult) -> Value {
    json!({
        "functional_trace": floats(&res.functional_trace),
        "residual_trace": floats(&res.residual_trace),
        "trace_of_iterates": floats(&res.trace_of_iterates),
        "min_eigenvalue_trace": floats(&res.min_eigenvalue_trace),
    })
}

fn mean(o: &GlobalOpts, manifest: &Path, algorithm: Algorithm, cross_check: bool) -> Result<Outcome, CliError> {
    let family = Family::read(manifest)?;
    let cfg = config(o);
    let (res, code) = match solve(&family, &cfg, algorithm) {
        Ok(r) => (r, exit::OK),
        Err(CoreError::MaxIterExceeded { best }) => (*best, exit::MAX_ITER),
        Err(e) => return Err(member_context(&family)(e)),
    };
    let out = output_file(o, "mean.csv");
    write_matrix(&out, res.mean.as_matrix())?;
    let residual = fixed_point_residual(&res.mean, &family.members).context(|| path_str(manifest))?;

    let mut inputs = solver_inputs(o);
    inputs["manifest"] = json!(path_str(manifest));
    inputs["algorithm"] = json!(match algorithm {
        Algorithm::Descent => "descent",
        Algorithm::Gpa => "gpa",
    });
    inputs["operators"] = json!(family.manifest.operators.iter().map(|p| path_str(p)).collect::<Vec<_>>());
    inputs["labels"] = json!(family.manifest.labels);
    let mut r = Report::new("mean", inputs);
    r.results = json!({
        "mean": matrix(res.mean.as_matrix()),
        "mean_file": path_str(&out),
        "trace": float(res.mean.trace()),
        "fixed_point_residual": float(residual),
        "functional": float(frechet_functional(&res.mean, &family.members).context(|| path_str(manifest))?),
        "iterations": res.iterations,
        "converged": code == exit::OK,
        "max_iter_exceeded": code == exit::MAX_ITER,
    });
    r.diagnostics = mean_diagnostics(&res);

    if cross_check {
        let other = match algorithm {
            Algorithm::Descent => Algorithm::Gpa,
            Algorithm::Gpa => Algorithm::Descent,
        };
        let alt = match solve(&family, &cfg, other) {
            Ok(r) => r.mean,
            Err(CoreError::MaxIterExceeded { best }) => best.mean,
            Err(e) => return Err(member_context(&family)(e)),
        };
        r.results["cross_algorithm_distance"] =
            float(procrustes_distance(&res.mean, &alt).context(|| path_str(manifest))?);
    }
    Ok(Outcome { report: r, code })
}

fn geodesic(o: &GlobalOpts, a: &Path, b: &Path, steps: usize) -> Result<Report, CliError> {
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    let s0 = read_covariance(a)?;
    let s1 = read_covariance(b)?;
    let ctx = || format!("{} -> {}", path_str(a), path_str(b));
    if s0.dim() != s1.dim() {
        return Err(CoreError::DimMismatch {
            expected: s0.dim(),
            found: s1.dim(),
        })
        .context(ctx);
    }
    let times: Vec<f64> = (0..steps).map(|j| j as f64 / (steps - 1) as f64).collect();
    let points = geodesic_path(&s0, &s1, &times, o.rank_tol).context(ctx)?;
    let total = procrustes_distance(&s0, &s1).context(ctx)?;

    let mut files = Vec::new();
    for (j, p) in points.iter().enumerate() {
        let f = output_file(o, &format!("geodesic_{j:03}.csv"));
        write_matrix(&f, p.as_matrix())?;
        files.push(path_str(&f));
    }
    let mut table = Vec::new();
    let mut max_dev = 0.0_f64;
    for i in 0..steps {
        for j in (i + 1)..steps {
            let d = procrustes_distance(&points[i], &points[j]).context(ctx)?;
            let expected = (times[j] - times[i]) * total;
            max_dev = max_dev.max((d - expected).abs());
            table.push(json!({
                "s": float(times[i]),
                "t": float(times[j]),
                "distance": float(d),
                "expected": float(expected),
                "deviation": float((d - expected).abs()),
            }));
        }
    }
    let mut inputs = json!({ "a": path_str(a), "b": path_str(b), "steps": steps });
    inputs["rank_tol"] = json!(o.rank_tol.map(float));
    let mut r = Report::new("geodesic", inputs);
    r.results = json!({
        "times": floats(&times),
        "points": points.iter().map(|p| matrix(p.as_matrix())).collect::<Vec<_>>(),
        "files": files,
        "distance": float(total),
    });
    r.diagnostics = json!({
        "speed_table": table,
        "max_speed_deviation": float(max_dev),
    });
    Ok(r)
}

fn pca(o: &GlobalOpts, manifest: &Path, k: usize) -> Result<Report, CliError> {
    let family = Family::read(manifest)?;
    let cfg = config(o);
    let mean = solve_strict(&family, &cfg)?;
    let lifted = lift(&family.members, &mean, o.rank_tol).map_err(member_context(&family))?;
    let res = tangent_pca(&lifted, &mean, k).context(|| path_str(manifest))?;

    let mut files = Vec::new();
    for (a, c) in res.components.iter().enumerate() {
        let f = output_file(o, &format!("component_{a:02}.csv"));
        write_matrix(&f, c.as_matrix())?;
        files.push(path_str(&f));
    }
    let mean_file = output_file(o, "mean.csv");
    write_matrix(&mean_file, mean.as_matrix())?;

    // errors[i][k'] = Π(reconstruction from k' components, member i)
    let m = res.effective_rank();
    let mut errors = Vec::new();
    for (i, s) in family.members.iter().enumerate() {
        let row: Vec<Value> = (0..=m)
            .map(|kk| match reconstruct(&mean, &res, i, kk) {
                Ok(rec) => procrustes_distance(&rec, s).map(float).unwrap_or(Value::Null),
                Err(_) => Value::Null,
            })
            .collect();
        errors.push(Value::Array(row));
    }

    let mut inputs = solver_inputs(o);
    inputs["manifest"] = json!(path_str(manifest));
    inputs["k"] = json!(k);
    let mut r = Report::new("pca", inputs);
    r.results = json!({
        "variances": floats(&res.variances),
        "scores": matrix(&res.scores),
        "component_files": files,
        "mean_file": path_str(&mean_file),
        "effective_rank": m,
        "total_variance": float(res.total_variance),
        "reconstruction_errors": errors,
    });
    r.diagnostics = json!({
        "lifted_mean_norm": float(res.lifted_mean_norm),
        "labels": family.manifest.labels,
    });
    Ok(r)
}

fn multicouple(o: &GlobalOpts, manifest: &Path) -> Result<Report, CliError> {
    let family = Family::read(manifest)?;
    let cfg = config(o);
    let mean = solve_strict(&family, &cfg)?;
    let joint = multicoupling(&mean, &family.members, o.rank_tol).map_err(member_context(&family))?;
    let g = multicoupling_cost(&joint);
    let f = frechet_functional(&mean, &family.members).context(|| path_str(manifest))?;
    let marginal_error = family
        .members
        .iter()
        .enumerate()
        .map(|(i, s)| (joint.block(i, i) - s.as_matrix()).amax())
        .fold(0.0, f64::max);
    let out = output_file(o, "coupling.csv");
    let full = joint.to_matrix();
    write_matrix(&out, full.as_matrix())?;

    let mut inputs = solver_inputs(o);
    inputs["manifest"] = json!(path_str(manifest));
    let mut r = Report::new("multicouple", inputs);
    r.results = json!({
        "coupling_file": path_str(&out),
        "g": float(g),
        "f": float(f),
        "difference": float(g - f),
        "members": joint.n,
        "dimension": joint.dim,
    });
    r.diagnostics = json!({
        "marginal_error": float(marginal_error),
        "min_eigenvalue": float(joint.min_eigenvalue()),
    });
    Ok(r)
}

fn simulate(o: &GlobalOpts, sim: &Simulate) -> Result<Report, CliError> {
    match sim {
        Simulate::Deform {
            template,
            n,
            eps,
            perturbations,
        } => deform(o, template, *n, *eps, *perturbations),
        Simulate::Project {
            manifest,
            ranks,
            basis,
        } => project(o, manifest, ranks, *basis),
        Simulate::Counterexample { m, ratio, b0 } => counterexample(o, *m, *ratio, *b0),
        Simulate::Moments { input, samples } => moments(o, input, *samples),
    }
}

fn deform(o: &GlobalOpts, template: &Path, n: usize, eps: f64, perturbations: usize) -> Result<Report, CliError> {
    let s = read_covariance(template)?;
    let ctx = || path_str(template);
    let rng = RngSpec::new(o.seed, "deform");
    let fam = deformation_family(&s, n, eps, &rng).context(ctx)?;
    let residual = fixed_point_residual(&s, &fam.deformed).context(ctx)?;
    let solved = mean_fixed_point(&fam.deformed, &config(o)).context(ctx)?;
    let recovery = procrustes_distance(&solved.mean, &s).context(ctx)?;
    let opt = generative_optimality(&s, &fam.deformed, &OPTIMALITY_STEPS, perturbations, &rng.substream("optimality"))
        .context(ctx)?;

    let mut deformed_files = Vec::new();
    let mut map_files = Vec::new();
    for (i, (d, t)) in fam.deformed.iter().zip(&fam.maps).enumerate() {
        let f = output_file(o, &format!("deformed_{i:02}.csv"));
        write_matrix(&f, d.as_matrix())?;
        deformed_files.push(path_str(&f));
        let f = output_file(o, &format!("map_{i:02}.csv"));
        write_matrix(&f, t.as_matrix())?;
        map_files.push(path_str(&f));
    }
    let mut inputs = solver_inputs(o);
    inputs["template"] = json!(path_str(template));
    inputs["n"] = json!(n);
    inputs["eps"] = float(eps);
    inputs["seed"] = json!(o.seed);
    inputs["perturbations"] = json!(perturbations);
    inputs["perturbation_steps"] = floats(&OPTIMALITY_STEPS);
    let mut r = Report::new("simulate deform", inputs);
    r.results = json!({
        "deformed": fam.deformed.iter().map(|d| matrix(d.as_matrix())).collect::<Vec<_>>(),
        "deformed_files": deformed_files,
        "map_files": map_files,
        "template_residual": float(residual),
        "recovery_distance": float(recovery),
        "template_functional": float(opt.template_value),
        "min_perturbed_functional": float(opt.min_perturbed_value),
        "optimality_violations": opt.violations,
    });
    r.diagnostics = json!({
        "solver": mean_diagnostics(&solved),
        "perturbations_evaluated": opt.perturbations,
    });
    Ok(r)
}

fn project(o: &GlobalOpts, manifest: &Path, ranks: &[usize], basis: BasisKind) -> Result<Report, CliError> {
    let family = Family::read(manifest)?;
    let dim = family.members[0].dim();
    let ranks: Vec<usize> = if ranks.is_empty() {
        (1..=dim).collect()
    } else {
        ranks.to_vec()
    };
    let cfg = config(o);
    let ctx = || path_str(manifest);
    let basis = match basis {
        BasisKind::Standard => Basis::Standard,
        // eigenbasis of the full-family mean
        BasisKind::Eigen => Basis::Eigen(solve_strict(&family, &cfg)?),
    };
    let report = projection_stability_experiment(&family.members, &ranks, &basis, &cfg)
        .map_err(member_context(&family))?;
    let mut errors = Vec::new();
    for s in &family.members {
        let row = ranks
            .iter()
            .map(|&r| projection_error(s, r, &basis).map(float))
            .collect::<Result<Vec<_>, _>>()
            .context(ctx)?;
        errors.push(Value::Array(row));
    }
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|row| {
            json!({
                "rank": row.rank,
                "mean_trace_distance": row.mean_trace_distance.map(float),
                "pairwise_discrepancy": float(row.pairwise_discrepancy),
                "max_tail": float(row.max_tail),
                "error": row.error,
            })
        })
        .collect();

    let mut inputs = solver_inputs(o);
    inputs["manifest"] = json!(path_str(manifest));
    inputs["ranks"] = json!(ranks);
    inputs["basis"] = json!(match basis {
        Basis::Standard => "standard",
        Basis::Eigen(_) => "eigen",
    });
    let mut r = Report::new("simulate project", inputs);
    r.results = json!({
        "ranks": rows,
        "projection_errors": errors,
    });
    r.diagnostics = json!({ "labels": family.manifest.labels, "dimension": dim });
    Ok(r)
}

fn counterexample(o: &GlobalOpts, m: usize, ratio: f64, b0: f64) -> Result<Report, CliError> {
    let c = counterexample_family(m, ratio, b0, &config(o)).context(|| "counterexample".into())?;
    for (name, s) in [("counterexample_mean.csv", &c.mean), ("counterexample_s1.csv", &c.s1), ("counterexample_s2.csv", &c.s2)] {
        write_matrix(&output_file(o, name), s.as_matrix())?;
    }
    let mut inputs = solver_inputs(o);
    inputs["m"] = json!(m);
    inputs["ratio"] = float(ratio);
    inputs["b0"] = float(b0);
    let mut r = Report::new("simulate counterexample", inputs);
    r.results = json!({
        "thresholds": floats(&c.thresholds),
        "min_threshold": float(c.min_threshold()),
        "recovery_distance": float(c.recovery.distance),
        "dimension": c.mean.dim(),
    });
    r.diagnostics = json!({
        "iterations": c.recovery.iterations,
        "converged": c.recovery.converged,
        "mean_min_eigenvalue": float(c.mean.min_eigenvalue()),
    });
    Ok(r)
}

fn moments(o: &GlobalOpts, input: &Path, samples: usize) -> Result<Report, CliError> {
    let s = read_covariance(input)?;
    let rep = fourth_moment_check(&s, samples, &RngSpec::new(o.seed, "moments")).context(|| path_str(input))?;
    let mut r = Report::new(
        "simulate moments",
        json!({ "input": path_str(input), "samples": samples, "seed": o.seed }),
    );
    r.results = json!({
        "exact": float(rep.exact),
        "estimate": float(rep.estimate),
        "bound": float(rep.bound),
        "equality": rep.equality,
        "rank": rep.rank,
    });
    r.diagnostics = json!({
        "std_error": float(rep.std_error),
        "z_score": float(rep.z_score),
        "within_five_se": rep.within_five_se,
        "exact_within_bound": rep.exact_within_bound,
    });
    Ok(r)
}
