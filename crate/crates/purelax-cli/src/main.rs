//! Command-line front end for the purelax library.
//!
//! `generate` builds instance files from scenario specs, `purify` rounds a
//! randomized decision against the instance's block partition, `solve` runs
//! the relax-then-purify pipeline, `verify` recomputes a saved purification
//! report from its raw inputs, and `refine-study` tracks residuals and
//! bounds while the grid is split in half repeatedly.
//!
//! All artifacts are JSON except study tables, which are CSV. Exit codes:
//! 0 success, 2 infeasible constraints, 3 usage or input problems,
//! 4 internal failures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use purelax::caratheodory::{decompose_decision, CaratheodoryCertificate};
use purelax::measure::{blocks_from_densities, Cell, DensityFamily, DiscreteSpace};
use purelax::purify::{
    purify, purify_report, DecisionInstance, InstanceFile, PureDecision, PurifyError,
    PurifyReport, RandomizedDecision,
};
use purelax::rvp::{
    evaluate, evaluate_pure, solve_crvp, solve_rvp, RvpError, RvpOptions, RvpProblem,
};
use purelax::scenarios::{generate, random_decision, ScenarioError, ScenarioSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Agreement tolerance between a saved report and its recomputation.
const VERIFY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 3,
            CliError::Infeasible(_) => 2,
            CliError::Internal(_) => 4,
        }
    }
}

fn map_purify(err: PurifyError) -> CliError {
    match err {
        PurifyError::InvalidInstance(_)
        | PurifyError::InvalidDecision(_)
        | PurifyError::Measure(_) => CliError::Validation(err.to_string()),
        PurifyError::InternalInfeasible { .. } | PurifyError::Caratheodory(_) => {
            CliError::Internal(err.to_string())
        }
    }
}

fn map_rvp(err: RvpError) -> CliError {
    match err {
        RvpError::InfeasibleConstraints => CliError::Infeasible(err.to_string()),
        RvpError::InvalidProblem(_) | RvpError::TooLarge { .. } | RvpError::Measure(_) => {
            CliError::Validation(err.to_string())
        }
        RvpError::Purify(inner) => map_purify(inner),
        RvpError::UnboundedRelaxation | RvpError::Lp(_) => CliError::Internal(err.to_string()),
    }
}

fn map_scenario(err: ScenarioError) -> CliError {
    match err {
        ScenarioError::MisalignedParameter { .. }
        | ScenarioError::InvalidDensity(_)
        | ScenarioError::InvalidSpec(_)
        | ScenarioError::Measure(_) => CliError::Validation(err.to_string()),
        ScenarioError::Purify(inner) => map_purify(inner),
        ScenarioError::Rvp(inner) => map_rvp(inner),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{what} {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn ensure_distinct(paths: &[&Path]) -> Result<(), CliError> {
    for (i, a) in paths.iter().enumerate() {
        for b in &paths[i + 1..] {
            if a == b {
                return Err(CliError::Usage(format!(
                    "paths must be distinct, {} repeats",
                    a.display()
                )));
            }
        }
    }
    Ok(())
}

#[derive(Parser, Debug)]
#[command(
    name = "purelax",
    version,
    about = "Purify randomized decisions on finite grids and solve robust instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance file from a scenario spec.
    Generate {
        /// Scenario spec JSON.
        #[arg(long)]
        input: PathBuf,
        /// Instance JSON to write.
        #[arg(long)]
        output: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write a seeded randomized decision for the instance.
        #[arg(long)]
        phi_out: Option<PathBuf>,
    },
    /// Purify a randomized decision against the instance's block partition.
    Purify {
        /// Instance JSON.
        #[arg(long)]
        input: PathBuf,
        /// Decision JSON: {"phi": [[..]]}, or {"f": [..]} for an already
        /// pure decision.
        #[arg(long)]
        phi: PathBuf,
        /// Pure decision plus report, as JSON.
        #[arg(long)]
        output: PathBuf,
        /// Embed the per-cell convex decomposition in the output.
        #[arg(long)]
        dump_certificate: bool,
    },
    /// Solve a robust instance: relax, solve the epigraph program, purify.
    Solve {
        /// Instance JSON with budgets and densities.
        #[arg(long)]
        input: PathBuf,
        /// Solution JSON to write.
        #[arg(long)]
        output: PathBuf,
        /// Re-solve with budgets tightened by the first pass's epsilon.
        #[arg(long)]
        strict: bool,
        /// Tolerance for grouping density rows into blocks.
        #[arg(long)]
        tol_group: Option<f64>,
        /// Tolerance for density columns integrating to one.
        #[arg(long)]
        tol_density: Option<f64>,
    },
    /// Recompute a purification report and compare it with a saved one.
    Verify {
        /// Instance JSON.
        #[arg(long)]
        input: PathBuf,
        /// The randomized decision that was purified.
        #[arg(long)]
        phi: PathBuf,
        /// Output file written by `purify`.
        #[arg(long)]
        result: PathBuf,
    },
    /// Solve once, then re-purify under repeated uniform cell splitting.
    RefineStudy {
        /// Instance JSON with budgets and densities.
        #[arg(long)]
        input: PathBuf,
        /// Number of table rows; level 0 is the input grid.
        #[arg(long)]
        levels: usize,
        /// CSV table to write.
        #[arg(long)]
        output: PathBuf,
    },
}

/// Decision wire format: randomized rows or a pure choice vector.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DecisionFile {
    Randomized(RandomizedDecision),
    Pure(PureDecision),
}

/// Output of `purify`: the pure decision beside its report, optionally
/// with the certificate it was rounded from.
#[derive(Debug, Serialize, Deserialize)]
struct PurifyOutputFile {
    #[serde(flatten)]
    pure: PureDecision,
    report: PurifyReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<CaratheodoryCertificate>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("purelax: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            input,
            output,
            seed,
            phi_out,
        } => cmd_generate(&input, &output, seed, phi_out.as_deref()),
        Command::Purify {
            input,
            phi,
            output,
            dump_certificate,
        } => cmd_purify(&input, &phi, &output, dump_certificate),
        Command::Solve {
            input,
            output,
            strict,
            tol_group,
            tol_density,
        } => cmd_solve(&input, &output, strict, tol_group, tol_density),
        Command::Verify { input, phi, result } => cmd_verify(&input, &phi, &result),
        Command::RefineStudy {
            input,
            levels,
            output,
        } => cmd_refine_study(&input, levels, &output),
    }
}

fn cmd_generate(
    input: &Path,
    output: &Path,
    seed: Option<u64>,
    phi_out: Option<&Path>,
) -> Result<(), CliError> {
    let mut paths = vec![input, output];
    if let Some(p) = phi_out {
        paths.push(p);
    }
    ensure_distinct(&paths)?;
    let mut spec: ScenarioSpec = parse_json(input, "scenario spec")?;
    if let Some(seed) = seed {
        spec = spec.with_seed(seed);
    }
    let problem = generate(&spec).map_err(map_scenario)?;
    write_json(output, &problem.to_file())?;
    if let Some(phi_path) = phi_out {
        let phi = random_decision(spec.seed(), &problem.instance);
        write_json(phi_path, &phi)?;
    }
    println!(
        "generate: {} cells, {} budgets, {} parameters -> {}",
        problem.instance.space().len(),
        problem.num_costs(),
        problem.num_params(),
        output.display()
    );
    Ok(())
}

fn load_phi(path: &Path, instance: &DecisionInstance) -> Result<RandomizedDecision, CliError> {
    let file: DecisionFile = parse_json(path, "decision")?;
    let phi = match file {
        DecisionFile::Randomized(phi) => phi,
        DecisionFile::Pure(pure) => {
            pure.validate_for(instance).map_err(map_purify)?;
            RandomizedDecision::from_pure(instance, &pure)
        }
    };
    phi.validate_for(instance).map_err(map_purify)?;
    Ok(phi)
}

fn cmd_purify(
    input: &Path,
    phi_path: &Path,
    output: &Path,
    dump_certificate: bool,
) -> Result<(), CliError> {
    ensure_distinct(&[input, phi_path, output])?;
    let file: InstanceFile = parse_json(input, "instance")?;
    let instance = file.into_decision_instance().map_err(map_purify)?;
    let phi = load_phi(phi_path, &instance)?;
    let blocks = instance.space().blocks().to_vec();
    let (pure, report) = purify(&instance, &phi, &blocks).map_err(map_purify)?;
    let certificate = if dump_certificate {
        Some(decompose_decision(&instance, &phi).map_err(|e| CliError::Internal(e.to_string()))?)
    } else {
        None
    };
    let worst = report
        .blocks
        .iter()
        .fold(0.0f64, |m, b| m.max(b.residual_norm));
    let within = report.blocks.iter().all(|b| b.residual_norm <= b.bound);
    write_json(
        output,
        &PurifyOutputFile {
            pure,
            report,
            certificate,
        },
    )?;
    println!(
        "purify: {} blocks, worst residual {worst:.3e} -> {}",
        blocks.len(),
        output.display()
    );
    if !within {
        return Err(CliError::Internal(
            "a block residual exceeds its bound; see the report".into(),
        ));
    }
    Ok(())
}

fn cmd_solve(
    input: &Path,
    output: &Path,
    strict: bool,
    tol_group: Option<f64>,
    tol_density: Option<f64>,
) -> Result<(), CliError> {
    ensure_distinct(&[input, output])?;
    let mut opts = RvpOptions {
        strict,
        ..RvpOptions::default()
    };
    if let Some(t) = tol_group {
        if !(t > 0.0) {
            return Err(CliError::Usage("--tol-group must be positive".into()));
        }
        opts.group_tol = t;
    }
    if let Some(t) = tol_density {
        if !(t > 0.0) {
            return Err(CliError::Usage("--tol-density must be positive".into()));
        }
        opts.density_tol = t;
    }
    let file: InstanceFile = parse_json(input, "instance")?;
    let problem = RvpProblem::from_file(file).map_err(map_rvp)?;
    let solution = solve_rvp(&problem, &opts).map_err(map_rvp)?;
    write_json(output, &solution)?;
    println!(
        "solve: relaxed {:.6}, pure {:.6}, epsilon {:.3e}{} -> {}",
        solution.relaxed_value,
        solution.pure_value,
        solution.epsilon,
        if solution.strict { ", strict" } else { "" },
        output.display()
    );
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VERIFY_TOL
}

/// Lists every field where the saved report disagrees with the
/// recomputation. The per-block fractional-cell count is a rounding
/// diagnostic a recomputation cannot reproduce, so it is not compared.
fn compare_reports(saved: &PurifyReport, fresh: &PurifyReport) -> Vec<String> {
    let mut out = Vec::new();
    if saved.n != fresh.n {
        out.push(format!("integrand dimension {} vs {}", saved.n, fresh.n));
        return out;
    }
    if saved.blocks.len() != fresh.blocks.len() {
        out.push(format!(
            "{} blocks vs {}",
            saved.blocks.len(),
            fresh.blocks.len()
        ));
        return out;
    }
    for (s, f) in saved.blocks.iter().zip(&fresh.blocks) {
        if s.cells != f.cells {
            out.push(format!("block {} cell list differs", s.block));
            continue;
        }
        for (label, a, b) in [
            ("weight", s.weight, f.weight),
            ("max_cell_weight", s.max_cell_weight, f.max_cell_weight),
            ("max_spread", s.max_spread, f.max_spread),
            ("residual_norm", s.residual_norm, f.residual_norm),
            ("bound", s.bound, f.bound),
        ] {
            if !close(a, b) {
                out.push(format!("block {} {label}: {a} vs {b}", s.block));
            }
        }
        if s.residual.len() != f.residual.len()
            || s.residual.iter().zip(&f.residual).any(|(a, b)| !close(*a, *b))
        {
            out.push(format!("block {} residual vector differs", s.block));
        }
    }
    for (label, a, b) in [
        (
            "global_residual_norm",
            saved.global_residual_norm,
            fresh.global_residual_norm,
        ),
        ("global_bound", saved.global_bound, fresh.global_bound),
    ] {
        if !close(a, b) {
            out.push(format!("{label}: {a} vs {b}"));
        }
    }
    if saved.global_residual.len() != fresh.global_residual.len()
        || saved
            .global_residual
            .iter()
            .zip(&fresh.global_residual)
            .any(|(a, b)| !close(*a, *b))
    {
        out.push("global residual vector differs".into());
    }
    out
}

fn cmd_verify(input: &Path, phi_path: &Path, result: &Path) -> Result<(), CliError> {
    ensure_distinct(&[input, phi_path, result])?;
    let file: InstanceFile = parse_json(input, "instance")?;
    let instance = file.into_decision_instance().map_err(map_purify)?;
    let phi = load_phi(phi_path, &instance)?;
    let saved: PurifyOutputFile = parse_json(result, "purify output")?;
    let blocks = instance.space().blocks().to_vec();
    let fresh = purify_report(&instance, &phi, &saved.pure, &blocks).map_err(map_purify)?;
    let mismatches = compare_reports(&saved.report, &fresh);
    if mismatches.is_empty() {
        println!(
            "verify: OK, {} blocks agree to {VERIFY_TOL:.0e}",
            fresh.blocks.len()
        );
        Ok(())
    } else {
        for m in &mismatches {
            eprintln!("verify: {m}");
        }
        Err(CliError::Validation(format!(
            "saved report disagrees with the recomputation in {} places",
            mismatches.len()
        )))
    }
}

/// Splits every cell into two halves of equal weight in the same block,
/// duplicating integrand rows, densities, and decision rows, so the finer
/// problem carries the same decision rule.
fn refine(
    problem: &RvpProblem,
    phi: &RandomizedDecision,
) -> Result<(RvpProblem, RandomizedDecision), RvpError> {
    let space = problem.instance.space();
    let count = space.len();
    let mut cells = Vec::with_capacity(count * 2);
    let mut actions = Vec::with_capacity(count * 2);
    let mut g = Vec::with_capacity(count * 2);
    let mut rows = Vec::with_capacity(count * 2);
    let mut probs = Vec::with_capacity(count * 2);
    for (id, cell) in space.cells().iter().enumerate() {
        let child = Cell {
            weight: cell.weight * 0.5,
            block: cell.block,
        };
        for _ in 0..2 {
            cells.push(child);
            actions.push(problem.instance.actions()[id].clone());
            g.push(problem.instance.g_table()[id].clone());
            rows.push(problem.densities.values[id].clone());
            probs.push(phi.probs[id].clone());
        }
    }
    let instance = DecisionInstance::new(
        DiscreteSpace::new(cells),
        actions,
        g,
        problem.instance.n(),
    )?;
    let densities = DensityFamily::new(problem.densities.params.clone(), rows)?;
    let refined = RvpProblem::new(instance, problem.budgets.clone(), densities)?;
    Ok((refined, RandomizedDecision { probs }))
}

fn cmd_refine_study(input: &Path, levels: usize, output: &Path) -> Result<(), CliError> {
    ensure_distinct(&[input, output])?;
    if levels < 2 {
        return Err(CliError::Usage("--levels must be at least 2".into()));
    }
    let file: InstanceFile = parse_json(input, "instance")?;
    let mut problem = RvpProblem::from_file(file).map_err(map_rvp)?;
    let opts = RvpOptions::default();
    let validation = problem
        .densities
        .validate_with(problem.instance.space(), opts.density_tol);
    if !validation.pass {
        return Err(CliError::Validation(validation.violations.join("; ")));
    }
    // The decision under study is fixed at the coarsest level; each
    // refinement re-purifies its lift, so residuals and bounds shrink
    // while the decision rule itself stays put.
    let (mut phi, _) = solve_crvp(&problem).map_err(map_rvp)?;
    let mut csv = String::from("level,max_cell_weight,max_block_residual,bound,gap\n");
    for level in 0..levels {
        if level > 0 {
            let (finer, lifted) = refine(&problem, &phi).map_err(map_rvp)?;
            problem = finer;
            phi = lifted;
        }
        let relaxed_eval = evaluate(&problem, &phi).map_err(map_rvp)?;
        let blocks = blocks_from_densities(
            problem.instance.space(),
            &problem.densities,
            opts.group_tol,
        );
        let (pure, report) = purify(&problem.instance, &phi, &blocks).map_err(map_purify)?;
        let pure_eval = evaluate_pure(&problem, &pure).map_err(map_rvp)?;
        let max_cell_weight = problem
            .instance
            .space()
            .cells()
            .iter()
            .fold(0.0f64, |m, c| m.max(c.weight));
        let max_block_residual = report
            .blocks
            .iter()
            .fold(0.0f64, |m, b| m.max(b.residual_norm));
        let gap = relaxed_eval.objective_value - pure_eval.objective_value;
        let _ = writeln!(
            csv,
            "{level},{max_cell_weight},{max_block_residual},{},{gap}",
            report.global_bound
        );
    }
    fs::write(output, csv)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", output.display())))?;
    println!("refine-study: {levels} levels -> {}", output.display());
    Ok(())
}
