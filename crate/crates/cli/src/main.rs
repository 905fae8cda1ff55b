//! Command-line driver: variable counts, single solves, bifurcation
//! branches, turning points, stability sweeps, radial problems, and the
//! closed-form 1D profile. Every run that writes files also writes a JSON
//! manifest with parameters and output digests.
//!
//! Exit codes: 0 success, 2 usage error, 3 numeric non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bratu_core::io as core_io;
use bratu_core::*;

mod manifest;

#[derive(Parser)]
#[command(
    name = "bratu",
    version,
    about = "Symmetry-reduced finite difference solver for the Bratu equation"
)]
struct Cli {
    /// Worker threads for parallel sample solves (default: all cores;
    /// BRATU_THREADS is used when the flag is absent). Results are
    /// independent of the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the reduced and full-grid unknown counts and their ratio.
    Count(CountArgs),
    /// Solve one problem at a fixed parameter or fixed amplitude.
    Solve(SolveArgs),
    /// Trace a bifurcation branch by sweeping the amplitude.
    Branch(BranchArgs),
    /// Locate the first turning point through dense sampling and a spline.
    Turning(TurningArgs),
    /// Largest real Jacobian eigenvalue along a branch, reduced vs full.
    Stability(StabilityArgs),
    /// Trace a branch of the radial problem on the unit ball.
    Ball(BallArgs),
    /// Solve both cube discretizations and report their disagreement as JSON.
    Compare(CompareArgs),
    /// Evaluate the closed-form 1D solution as (x, u) CSV.
    Analytic1d(AnalyticArgs),
}

#[derive(Args)]
struct CountArgs {
    #[arg(long = "dim")]
    dim: usize,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "dim")]
    dim: usize,
    #[arg(long)]
    n: usize,
    /// Fixed parameter value (mutually exclusive with --a).
    #[arg(long, conflicts_with = "a")]
    lambda: Option<f64>,
    /// Fixed solution amplitude; the parameter becomes an unknown.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, value_parser = ["cube", "ball"], default_value = "cube")]
    domain: String,
    /// Use the full-grid discretization instead of the reduced one.
    #[arg(long, default_value_t = false)]
    full: bool,
    /// Output state file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the reconstructed full-grid field (cube domain only).
    #[arg(long)]
    field: Option<PathBuf>,
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long = "dim")]
    dim: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "a-start", default_value_t = 0.1)]
    a_start: f64,
    #[arg(long = "a-step", default_value_t = 0.1)]
    a_step: f64,
    #[arg(long = "a-end")]
    a_end: f64,
    #[arg(long, value_parser = ["cube", "ball"], default_value = "cube")]
    domain: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TurningArgs {
    #[arg(long = "dim")]
    dim: usize,
    #[arg(long)]
    n: usize,
    /// Window center; when absent a coarse scan picks it.
    #[arg(long = "a-center")]
    a_center: Option<f64>,
    #[arg(long = "a-halfwidth", default_value_t = 0.1)]
    a_halfwidth: f64,
    /// Upper end of the coarse scan used when --a-center is absent.
    #[arg(long = "a-scan-max", default_value_t = 5.0)]
    a_scan_max: f64,
    #[arg(long, default_value_t = 101)]
    samples: usize,
    #[arg(long, value_parser = ["cube", "ball"], default_value = "cube")]
    domain: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long = "dim")]
    dim: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "a-start", default_value_t = 0.2)]
    a_start: f64,
    #[arg(long = "a-step", default_value_t = 0.2)]
    a_step: f64,
    #[arg(long = "a-end")]
    a_end: f64,
    /// Which discretization's Jacobian to analyze.
    #[arg(long, value_parser = ["sfdm", "fdm", "both"], default_value = "both")]
    kind: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BallArgs {
    #[arg(long = "dim")]
    dim: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "a-start", default_value_t = 0.1)]
    a_start: f64,
    #[arg(long = "a-step", default_value_t = 0.1)]
    a_step: f64,
    #[arg(long = "a-end", default_value_t = 20.0)]
    a_end: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long = "dim")]
    dim: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "a")]
    lambda: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_parser = ["lower", "upper"], default_value = "lower")]
    branch: String,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_NONCONVERGENCE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("BRATU_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        // Sample-level parallelism only; numeric results do not depend on it.
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    let started = Instant::now();
    let result = match cli.command {
        Command::Count(args) => run_count(args),
        Command::Solve(args) => run_solve(args, started),
        Command::Branch(args) => run_branch(args, started),
        Command::Turning(args) => run_turning(args, started),
        Command::Stability(args) => run_stability(args, started),
        Command::Ball(args) => run_ball(args, started),
        Command::Compare(args) => run_compare(args, started),
        Command::Analytic1d(args) => run_analytic(args, started),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::UnconvergedSample { .. } | Error::EigenNoConvergence { .. } => {
                    ExitCode::from(EXIT_NONCONVERGENCE)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run_count(args: CountArgs) -> Result<ExitCode> {
    let m = variable_count(args.dim, args.n)?;
    let full = (args.n as u64 - 1).pow(args.dim as u32);
    println!("m={m}");
    println!("fdm={full}");
    println!("ratio={:.2}", full as f64 / m as f64);
    Ok(ExitCode::SUCCESS)
}

fn cube_problem(dim: usize, n: usize, full: bool) -> BratuProblem {
    if full {
        BratuProblem::CubeFull { d: dim, n }
    } else {
        BratuProblem::Cube { d: dim, n }
    }
}

fn run_solve(args: SolveArgs, started: Instant) -> Result<ExitCode> {
    let formulation = match (args.lambda, args.a) {
        (Some(l), None) => Formulation::FixedLambda(l),
        (None, Some(a)) => Formulation::FixedAmplitude(a),
        _ => {
            eprintln!("error: exactly one of --lambda or --a is required");
            return Ok(ExitCode::from(2));
        }
    };
    let problem = match args.domain.as_str() {
        "cube" => cube_problem(args.dim, args.n, args.full),
        _ => BratuProblem::Ball {
            d: args.dim,
            n: args.n,
        },
    };
    let system = problem.system(formulation)?;
    let state = newton_solve(&system, &system.zero_state(), &NewtonConfig::default())?;
    let lambda = system.lambda_value(&state.unknowns);
    let values = system.field_values(&state.unknowns);
    let max_u = SolutionState::sup_norm(&values);

    println!(
        "converged={} iterations={} residual={:.3e} lambda={} max_u={}",
        state.converged,
        state.iterations,
        state.residual_norm,
        core_io::format_lambda(lambda),
        core_io::format_lambda(max_u),
    );
    if !state.converged {
        if let Some(reason) = &state.failure {
            eprintln!("not converged: {reason}");
        }
        return Ok(ExitCode::from(EXIT_NONCONVERGENCE));
    }

    let mut written = Vec::new();
    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        match &system {
            SystemInstance::Cube(sys) => core_io::write_cube_state(sys, lambda, &values, &mut buf)?,
            SystemInstance::Ball(sys) => core_io::write_ball_state(sys, lambda, &values, &mut buf)?,
        }
        std::fs::write(path, &buf)?;
        written.push(path.clone());
    }
    if let Some(path) = &args.field {
        let sys = system.as_cube().ok_or_else(|| {
            Error::InvalidParameter("--field applies to the cube domain only".into())
        })?;
        if !sys.is_reduced() {
            return Err(Error::InvalidParameter(
                "--field applies to the reduced discretization".into(),
            ));
        }
        let field = reconstruct_full(&values, sys.index_map())?;
        let mut buf = Vec::new();
        core_io::write_field(&field, &mut buf)?;
        std::fs::write(path, &buf)?;
        written.push(path.clone());
    }
    manifest::write_for(
        "solve",
        serde_json::json!({
            "dim": args.dim, "n": args.n, "domain": args.domain, "full": args.full,
            "lambda": args.lambda, "a": args.a,
        }),
        &written,
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_branch(args: BranchArgs, started: Instant) -> Result<ExitCode> {
    let problem = match args.domain.as_str() {
        "cube" => BratuProblem::Cube {
            d: args.dim,
            n: args.n,
        },
        _ => BratuProblem::Ball {
            d: args.dim,
            n: args.n,
        },
    };
    trace_and_emit(
        problem,
        args.a_start,
        args.a_step,
        args.a_end,
        args.out,
        started,
    )
}

fn run_ball(args: BallArgs, started: Instant) -> Result<ExitCode> {
    let problem = BratuProblem::Ball {
        d: args.dim,
        n: args.n,
    };
    trace_and_emit(
        problem,
        args.a_start,
        args.a_step,
        args.a_end,
        args.out,
        started,
    )
}

fn trace_and_emit(
    problem: BratuProblem,
    a_start: f64,
    a_step: f64,
    a_end: f64,
    out: Option<PathBuf>,
    started: Instant,
) -> Result<ExitCode> {
    let branch = trace_branch(&problem, a_start, a_step, a_end, &NewtonConfig::default())?;
    let csv = core_io::branch_csv_string(&branch);
    let mut written = Vec::new();
    match &out {
        Some(path) => {
            std::fs::write(path, csv.as_bytes())?;
            written.push(path.clone());
        }
        None => print!("{csv}"),
    }
    let unconverged = branch.points.iter().filter(|p| !p.converged).count();
    eprintln!(
        "{}: {} points, {} unconverged, {} fold(s)",
        problem.label(),
        branch.points.len(),
        unconverged,
        branch.fold_count()
    );
    manifest::write_for(
        "branch",
        serde_json::json!({
            "problem": problem, "a_start": a_start, "a_step": a_step, "a_end": a_end,
        }),
        &written,
        started,
    )?;
    if unconverged > 0 {
        return Ok(ExitCode::from(EXIT_NONCONVERGENCE));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_turning(args: TurningArgs, started: Instant) -> Result<ExitCode> {
    let problem = match args.domain.as_str() {
        "cube" => BratuProblem::Cube {
            d: args.dim,
            n: args.n,
        },
        _ => BratuProblem::Ball {
            d: args.dim,
            n: args.n,
        },
    };
    let config = NewtonConfig::default();
    let estimate = match args.a_center {
        Some(center) => {
            locate_turning_point(&problem, center, args.a_halfwidth, args.samples, &config)?
        }
        None => first_turning_point(&problem, args.a_scan_max, args.samples, &config)?,
    };
    let record = core_io::TurningPointRecord::new(&problem, &estimate);
    let json = core_io::to_json_pretty(&record)?;
    let mut written = Vec::new();
    match &args.out {
        Some(path) => {
            std::fs::write(path, json.as_bytes())?;
            written.push(path.clone());
        }
        None => println!("{json}"),
    }
    eprintln!(
        "lambda_star={} at A_star={:.6}",
        core_io::format_lambda(estimate.lambda_star),
        estimate.a_star
    );
    manifest::write_for(
        "turning",
        serde_json::json!({
            "problem": problem, "a_center": args.a_center, "a_halfwidth": args.a_halfwidth,
            "a_scan_max": args.a_scan_max, "samples": args.samples,
        }),
        &written,
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_stability(args: StabilityArgs, started: Instant) -> Result<ExitCode> {
    let problem = BratuProblem::Cube {
        d: args.dim,
        n: args.n,
    };
    let config = NewtonConfig::default();
    let branch = trace_branch(&problem, args.a_start, args.a_step, args.a_end, &config)?;
    let kinds: Vec<SystemKind> = match args.kind.as_str() {
        "sfdm" => vec![SystemKind::Sfdm],
        "fdm" => vec![SystemKind::Fdm],
        _ => vec![SystemKind::Sfdm, SystemKind::Fdm],
    };
    let mut csv = String::new();
    for (i, kind) in kinds.iter().enumerate() {
        let result = branch_stability(&branch, *kind, &config)?;
        let s = core_io::stability_csv_string(&result);
        if i == 0 {
            csv.push_str(&s);
        } else {
            // Append without repeating the header.
            csv.push_str(s.split_once('\n').map(|(_, rest)| rest).unwrap_or(""));
        }
    }
    let mut written = Vec::new();
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv.as_bytes())?;
            written.push(path.clone());
        }
        None => print!("{csv}"),
    }
    manifest::write_for(
        "stability",
        serde_json::json!({
            "problem": problem, "a_start": args.a_start, "a_step": args.a_step,
            "a_end": args.a_end, "kind": args.kind,
        }),
        &written,
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_compare(args: CompareArgs, started: Instant) -> Result<ExitCode> {
    let formulation = match (args.lambda, args.a) {
        (Some(l), None) => Formulation::FixedLambda(l),
        (None, Some(a)) => Formulation::FixedAmplitude(a),
        _ => {
            eprintln!("error: exactly one of --lambda or --a is required");
            return Ok(ExitCode::from(2));
        }
    };
    let report = compare_sfdm_fdm(args.dim, args.n, formulation, &NewtonConfig::default())?;
    let json = core_io::to_json_pretty(&report)?;
    let mut written = Vec::new();
    match &args.out {
        Some(path) => {
            std::fs::write(path, json.as_bytes())?;
            written.push(path.clone());
        }
        None => println!("{json}"),
    }
    manifest::write_for(
        "compare",
        serde_json::json!({
            "dim": args.dim, "n": args.n, "lambda": args.lambda, "a": args.a,
        }),
        &written,
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_analytic(args: AnalyticArgs, started: Instant) -> Result<ExitCode> {
    let branch = match args.branch.as_str() {
        "upper" => BranchKind::Upper,
        _ => BranchKind::Lower,
    };
    if args.points < 2 {
        return Err(Error::InvalidParameter(
            "--points must be at least 2".into(),
        ));
    }
    let sol = analytic_1d(args.lambda, branch)?;
    let mut csv = String::from("x,u\n");
    for i in 0..args.points {
        let x = i as f64 / (args.points - 1) as f64;
        csv.push_str(&format!("{x:.6},{:.16e}\n", sol.eval(x)));
    }
    let mut written = Vec::new();
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv.as_bytes())?;
            written.push(path.clone());
        }
        None => print!("{csv}"),
    }
    manifest::write_for(
        "analytic1d",
        serde_json::json!({
            "lambda": args.lambda, "branch": args.branch, "points": args.points,
        }),
        &written,
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}
