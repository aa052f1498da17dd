//! `lieflow` command-line driver.
//!
//! Subcommands cover the computational surface of the library: symbol
//! tabulation, generator application, spectral semigroup evolution, Monte
//! Carlo path simulation, PMP verification, characteristic extraction,
//! coefficient decay profiles and dual zeta sums. All commands read a JSON
//! config (schema `lieflow/1`), write CSV for tabular data and JSON for
//! reports, stamp every artifact with the effective-parameter hash, and
//! exit 0 on success, 1 on computational errors, 2 on config validation
//! failures.

mod config;
mod output;

use clap::{Parser, Subcommand};
use config::CliError;
use lieflow::fourier::{decay_profile, sugiura_zeta};
use lieflow::generator::{apply_generator, apply_generator_many};
use lieflow::group::{haar_quadrature, AlgebraVector, GroupElement, GroupId};
use lieflow::pmp::{extract_characteristics, pmp_check, standard_corpus};
use lieflow::simulate::{empirical_semigroup, simulate_paths, survival_fraction, PathConfig};
use lieflow::symbol::{build_symbol, evolve_semigroup};
use output::{config_hash, csv_artifact, fmt_float, json_artifact, write_artifact};
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lieflow",
    version,
    about = "Lévy-type generators, pseudo-differential symbols and semigroup evolution on T^d and SU(2)"
)]
struct Cli {
    /// Cap the worker thread count (outputs are identical for any cap).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the operator symbol j_A(σ, λ) as CSV.
    Symbol {
        #[arg(long)]
        config: PathBuf,
        /// σ-grid resolution for variable characteristics (constant
        /// operators evaluate once at the identity).
        #[arg(long, default_value_t = 8)]
        sigma_resolution: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Apply the configured generator to every configured function on a σ grid.
    Apply {
        #[arg(long)]
        config: PathBuf,
        /// Per-axis evaluation grid resolution (default 16 on tori, 4 on SU(2)).
        #[arg(long)]
        eval_resolution: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evolve the configured functions under the semigroup e^{tA}; emits
    /// round-trippable coefficient JSON.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo simulation of the process driven by the configured
    /// characteristics; reports the empirical semigroup value.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Start point in exponential coordinates, e.g. "0.5" or "0.1,0.2,0".
        #[arg(long)]
        start: Option<String>,
        /// Index into the config's `functions` list.
        #[arg(long, default_value_t = 0)]
        function: usize,
        /// Optional CSV dump of path endpoints.
        #[arg(long)]
        endpoints: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the positive maximum principle on a random band-limited corpus.
    VerifyPmp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        corpus_seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        corpus_size: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Per-axis argmax search grid resolution (default 64 on tori, 7 on SU(2)).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recover constant characteristics (c, b, a, jump mass) from the
    /// configured operator treated as a black box.
    Extract {
        #[arg(long)]
        config: PathBuf,
        /// Separation radius δ: jump support must stay > δ from the identity.
        #[arg(long)]
        delta: f64,
        /// Probe transform resolution (default 225 on T^d, 51 on SU(2)).
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Coefficient decay profile (|λ|, ‖f̂(λ)‖_HS) per configured function.
    Decay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Partial sum of the dual zeta function Σ_{λ≠0} |λ|^{−2s}.
    Zeta {
        /// Group: "torus" or "su2".
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        max_norm: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Capping workers must never change results; ignore a second
        // initialization (e.g. under test harnesses).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Symbol {
            config,
            sigma_resolution,
            output,
        } => cmd_symbol(&config, sigma_resolution, output.as_deref()),
        Command::Apply {
            config,
            eval_resolution,
            output,
        } => cmd_apply(&config, eval_resolution, output.as_deref()),
        Command::Evolve { config, t, output } => cmd_evolve(&config, t, output.as_deref()),
        Command::Simulate {
            config,
            t,
            steps,
            paths,
            seed,
            start,
            function,
            endpoints,
            output,
        } => cmd_simulate(
            &config,
            t,
            steps,
            paths,
            seed,
            start.as_deref(),
            function,
            endpoints.as_deref(),
            output.as_deref(),
        ),
        Command::VerifyPmp {
            config,
            corpus_seed,
            corpus_size,
            tol,
            grid,
            output,
        } => cmd_verify_pmp(&config, corpus_seed, corpus_size, tol, grid, output.as_deref()),
        Command::Extract {
            config,
            delta,
            resolution,
            output,
        } => cmd_extract(&config, delta, resolution, output.as_deref()),
        Command::Decay { config, output } => cmd_decay(&config, output.as_deref()),
        Command::Zeta {
            group,
            dim,
            s,
            max_norm,
            output,
        } => cmd_zeta(&group, dim, s, max_norm, output.as_deref()),
    }
}

/// Exponential-coordinate column (semicolon-separated, CSV-safe).
fn coord_cell(g: &GroupElement) -> String {
    g.log()
        .coeffs
        .iter()
        .map(|v| fmt_float(*v))
        .collect::<Vec<_>>()
        .join(";")
}

fn grid_points(group: GroupId, resolution: usize) -> Vec<GroupElement> {
    haar_quadrature(group, resolution)
        .into_iter()
        .map(|n| n.point)
        .collect()
}

fn cmd_symbol(
    config_path: &std::path::Path,
    sigma_resolution: usize,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (config, raw) = config::load_config(config_path)?;
    let chars = config.characteristics(true)?;
    let sym = build_symbol(&chars, config.max_weight_norm, sigma_resolution)?;
    let hash = config_hash(&json!({
        "command": "symbol",
        "config": raw,
        "sigma_resolution": sigma_resolution,
    }));
    let mut rows = Vec::new();
    for (sigma_index, entry) in sym.entries.iter().enumerate() {
        for (weight, matrix) in entry {
            for r in 0..matrix.nrows() {
                for c in 0..matrix.ncols() {
                    rows.push(format!(
                        "{},{},{},{},{},{},{}",
                        sym.group,
                        sigma_index,
                        weight,
                        r,
                        c,
                        fmt_float(matrix[(r, c)].re),
                        fmt_float(matrix[(r, c)].im)
                    ));
                }
            }
        }
    }
    let body = csv_artifact(&hash, "group,sigma_index,weight_label,row,col,re,im", &rows);
    write_artifact(output, &body)?;
    Ok(())
}

fn cmd_apply(
    config_path: &std::path::Path,
    eval_resolution: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (config, raw) = config::load_config(config_path)?;
    let chars = config.characteristics(true)?;
    let group = config.group_id();
    let seed = config.effective_seed(None)?;
    let resolution = eval_resolution.unwrap_or(match group {
        GroupId::Torus { .. } => 16,
        GroupId::Su2 => 4,
    });
    if config.functions.is_empty() {
        return Err(CliError::Config(
            "`apply` requires at least one entry in `functions`".to_string(),
        ));
    }
    let points = grid_points(group, resolution);
    let hash = config_hash(&json!({
        "command": "apply",
        "config": raw,
        "eval_resolution": resolution,
        "seed": seed,
    }));
    let mut rows = Vec::new();
    for (fn_index, spec) in config.functions.iter().enumerate() {
        let f = config.build_function(spec, seed)?;
        let values = apply_generator_many(&chars, &f, &points)?;
        for (sigma_index, (point, value)) in points.iter().zip(&values).enumerate() {
            rows.push(format!(
                "{},{},{},{}",
                fn_index,
                sigma_index,
                coord_cell(point),
                fmt_float(*value)
            ));
        }
    }
    let body = csv_artifact(&hash, "function_index,sigma_index,x,value", &rows);
    write_artifact(output, &body)?;
    Ok(())
}

#[derive(Serialize)]
struct EvolveReport {
    config_hash: String,
    schema: &'static str,
    t: f64,
    functions: Vec<config::InlineFunction>,
}

fn cmd_evolve(
    config_path: &std::path::Path,
    t: f64,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (config, raw) = config::load_config(config_path)?;
    let chars = config.characteristics(true)?;
    let seed = config.effective_seed(None)?;
    if config.functions.is_empty() {
        return Err(CliError::Config(
            "`evolve` requires at least one entry in `functions`".to_string(),
        ));
    }
    let sym = build_symbol(&chars, config.max_weight_norm, 1)?;
    let mut evolved = Vec::with_capacity(config.functions.len());
    for spec in &config.functions {
        let f = config.build_function(spec, seed)?;
        evolved.push(config::coefficients_to_json(&evolve_semigroup(&sym, &f, t)?));
    }
    let hash = config_hash(&json!({
        "command": "evolve",
        "config": raw,
        "t": t,
        "seed": seed,
    }));
    let report = EvolveReport {
        config_hash: hash,
        schema: config::SCHEMA,
        t,
        functions: evolved,
    };
    write_artifact(output, &json_artifact(&report))?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport {
    config_hash: String,
    schema: &'static str,
    group: String,
    t: f64,
    steps: usize,
    paths: usize,
    seed: u64,
    start: Vec<f64>,
    function_index: usize,
    estimate: f64,
    std_error: f64,
    surviving_fraction: f64,
    survival_std_error: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    config_path: &std::path::Path,
    t: f64,
    steps: usize,
    paths: usize,
    seed_flag: Option<u64>,
    start: Option<&str>,
    function: usize,
    endpoints: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (config, raw) = config::load_config(config_path)?;
    let chars = config.characteristics(true)?;
    let group = config.group_id();
    let seed = config.effective_seed(seed_flag)?;
    let start_coords: Vec<f64> = match start {
        None => vec![0.0; group.algebra_dim()],
        Some(text) => {
            let parsed: Result<Vec<f64>, _> =
                text.split(',').map(|p| p.trim().parse::<f64>()).collect();
            parsed.map_err(|_| {
                CliError::Config(format!("--start must be comma-separated reals, got {text:?}"))
            })?
        }
    };
    if start_coords.len() != group.algebra_dim() {
        return Err(CliError::Config(format!(
            "--start needs {} coordinates for {}, got {}",
            group.algebra_dim(),
            group,
            start_coords.len()
        )));
    }
    let spec = config.functions.get(function).ok_or_else(|| {
        CliError::Config(format!(
            "--function {function} out of range: config defines {} functions",
            config.functions.len()
        ))
    })?;
    let f = config.build_function(spec, seed)?;
    let start_point = GroupElement::exp(&AlgebraVector::new(group, start_coords.clone())?);
    let ensemble = simulate_paths(
        &chars,
        &PathConfig {
            t_end: t,
            steps,
            n_paths: paths,
            seed,
        },
        &start_point,
    )?;
    let (estimate, std_error) = empirical_semigroup(&f, &ensemble);
    let (surviving_fraction, survival_std_error) = survival_fraction(&ensemble);
    let hash = config_hash(&json!({
        "command": "simulate",
        "config": raw,
        "t": t,
        "steps": steps,
        "paths": paths,
        "seed": seed,
        "start": start_coords,
        "function": function,
    }));
    if let Some(path) = endpoints {
        let rows: Vec<String> = ensemble
            .endpoints
            .iter()
            .zip(&ensemble.alive)
            .enumerate()
            .map(|(i, (g, alive))| format!("{},{},{}", i, u8::from(*alive), coord_cell(g)))
            .collect();
        let body = csv_artifact(&hash, "path_index,alive,x", &rows);
        write_artifact(Some(path), &body)?;
    }
    let report = SimulateReport {
        config_hash: hash,
        schema: config::SCHEMA,
        group: group.to_string(),
        t,
        steps,
        paths,
        seed,
        start: start_coords,
        function_index: function,
        estimate,
        std_error,
        surviving_fraction,
        survival_std_error,
    };
    write_artifact(output, &json_artifact(&report))?;
    Ok(())
}

#[derive(Serialize)]
struct ViolationJson {
    fn_id: usize,
    argmax: Vec<f64>,
    f_max: f64,
    af_max: f64,
}

#[derive(Serialize)]
struct PmpJsonReport {
    config_hash: String,
    schema: &'static str,
    n_tested: usize,
    tol: f64,
    corpus_seed: u64,
    grid_resolution: usize,
    passed: bool,
    violations: Vec<ViolationJson>,
}

fn cmd_verify_pmp(
    config_path: &std::path::Path,
    corpus_seed: Option<u64>,
    corpus_size: usize,
    tol: f64,
    grid: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (config, raw) = config::load_config(config_path)?;
    // The verifier's purpose is to test possibly inadmissible operators, so
    // admissibility validation is deliberately skipped here.
    let chars = config.characteristics(false)?;
    let group = config.group_id();
    let seed = config.effective_seed(corpus_seed)?;
    let grid_resolution = grid.unwrap_or(match group {
        GroupId::Torus { .. } => 64,
        GroupId::Su2 => 7,
    });
    let corpus = standard_corpus(group, corpus_size, config.max_weight_norm, seed);
    let points = grid_points(group, grid_resolution);
    let op = |f: &lieflow::fourier::FourierCoefficients, sigma: &GroupElement| {
        apply_generator(&chars, f, sigma)
    };
    let report = pmp_check(&op, &corpus, &points, tol)?;
    let hash = config_hash(&json!({
        "command": "verify-pmp",
        "config": raw,
        "corpus_seed": seed,
        "corpus_size": corpus_size,
        "tol": tol,
        "grid": grid_resolution,
    }));
    let json_report = PmpJsonReport {
        config_hash: hash,
        schema: config::SCHEMA,
        n_tested: report.n_tested,
        tol: report.tol,
        corpus_seed: seed,
        grid_resolution,
        passed: report.passed(),
        violations: report
            .violations
            .iter()
            .map(|v| ViolationJson {
                fn_id: v.fn_id,
                argmax: v.argmax.log().coeffs,
                f_max: v.f_max,
                af_max: v.af_max,
            })
            .collect(),
    };
    write_artifact(output, &json_artifact(&json_report))?;
    Ok(())
}

#[derive(Serialize)]
struct ResidualsJson {
    c: f64,
    b: Vec<f64>,
    a: Vec<Vec<f64>>,
    jump_mass: f64,
}

#[derive(Serialize)]
struct ExtractReport {
    config_hash: String,
    schema: &'static str,
    delta: f64,
    resolution: usize,
    c: f64,
    b: Vec<f64>,
    a: Vec<Vec<f64>>,
    jump_mass_outside: f64,
    residuals: ResidualsJson,
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

fn cmd_extract(
    config_path: &std::path::Path,
    delta: f64,
    resolution: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (config, raw) = config::load_config(config_path)?;
    let chars = config.characteristics(true)?;
    let group = config.group_id();
    let chart = config.chart()?;
    let resolution = resolution.unwrap_or(match group {
        GroupId::Torus { .. } => 225,
        GroupId::Su2 => 51,
    });
    let op = |f: &lieflow::fourier::FourierCoefficients, sigma: &GroupElement| {
        apply_generator(&chars, f, sigma)
    };
    let extracted = extract_characteristics(&op, group, &chart, delta, resolution)?;
    let hash = config_hash(&json!({
        "command": "extract",
        "config": raw,
        "delta": delta,
        "resolution": resolution,
    }));
    let report = ExtractReport {
        config_hash: hash,
        schema: config::SCHEMA,
        delta,
        resolution,
        c: extracted.c,
        b: extracted.b.clone(),
        a: matrix_rows(&extracted.a),
        jump_mass_outside: extracted.jump_mass_outside,
        residuals: ResidualsJson {
            c: extracted.residuals.c,
            b: extracted.residuals.b.clone(),
            a: matrix_rows(&extracted.residuals.a),
            jump_mass: extracted.residuals.jump_mass,
        },
    };
    write_artifact(output, &json_artifact(&report))?;
    Ok(())
}

fn cmd_decay(
    config_path: &std::path::Path,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (config, raw) = config::load_config(config_path)?;
    let seed = config.effective_seed(None)?;
    if config.functions.is_empty() {
        return Err(CliError::Config(
            "`decay` requires at least one entry in `functions`".to_string(),
        ));
    }
    let hash = config_hash(&json!({
        "command": "decay",
        "config": raw,
        "seed": seed,
    }));
    let mut rows = Vec::new();
    for (fn_index, spec) in config.functions.iter().enumerate() {
        let f = config.build_function(spec, seed)?;
        for (norm, hs) in decay_profile(&f) {
            rows.push(format!(
                "{},{},{}",
                fn_index,
                fmt_float(norm),
                fmt_float(hs)
            ));
        }
    }
    let body = csv_artifact(&hash, "function_index,lambda_norm,coeff_norm", &rows);
    write_artifact(output, &body)?;
    Ok(())
}

#[derive(Serialize)]
struct ZetaReport {
    config_hash: String,
    schema: &'static str,
    group: String,
    s: f64,
    max_norm: f64,
    partial_sum: f64,
    convergent: bool,
    terms: usize,
}

fn cmd_zeta(
    group: &str,
    dim: usize,
    s: f64,
    max_norm: f64,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let group_id = match group {
        "torus" => {
            if !(1..=3).contains(&dim) {
                return Err(CliError::Config(format!(
                    "--dim {dim} outside supported torus range 1..=3"
                )));
            }
            GroupId::Torus { dim }
        }
        "su2" => GroupId::Su2,
        other => {
            return Err(CliError::Config(format!(
                "--group must be \"torus\" or \"su2\", got {other:?}"
            )))
        }
    };
    if !(max_norm >= 1.0) {
        return Err(CliError::Config(
            "--max-norm must be at least 1".to_string(),
        ));
    }
    let sum = sugiura_zeta(group_id, s, max_norm);
    let hash = config_hash(&json!({
        "command": "zeta",
        "group": group,
        "dim": dim,
        "s": s,
        "max_norm": max_norm,
    }));
    let report = ZetaReport {
        config_hash: hash,
        schema: config::SCHEMA,
        group: group_id.to_string(),
        s,
        max_norm,
        partial_sum: sum.partial_sum,
        convergent: sum.convergent,
        terms: sum.terms,
    };
    write_artifact(output, &json_artifact(&report))?;
    Ok(())
}
