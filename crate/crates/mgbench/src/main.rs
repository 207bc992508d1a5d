use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use amli::experiment::{
    emit_table, level_of_size, parse_list, read_config_file, run_experiment, setup_row, ExperimentConfig,
};
use amli::hierarchy::{
    build_geometric, build_ua_amg, GeometricProblem, DEFAULT_MAX_LEVELS, DEFAULT_MIN_COARSE, DEFAULT_THETA,
};
use amli::linalg::mm::{write_matrix_file, write_vector_file, Symmetry};
use amli::problems::{assemble_poisson, DEFAULT_LOW_COEFFICIENT};
use amli::smoothers::SmootherSpec;
use amli::verify::{run_suite, CheckReport, Suite, DEFAULT_SAMPLES};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Nonlinear AMLI-cycle multigrid experiments and checks.
#[derive(Parser)]
#[command(name = "mgbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iteration-count table: rows are levels (or sizes), columns are cycles.
    Run(RunArgs),
    /// Numerical checks of the convergence theory, one CSV line per check.
    Verify(VerifyArgs),
    /// Print the level structure of a hierarchy.
    Hierarchy(HierarchyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// poisson, jump or ua_poisson.
    #[arg(long)]
    problem: Option<String>,
    /// Mesh levels, e.g. `5..9` or `5,7`.
    #[arg(long)]
    levels: Option<String>,
    /// Problem sizes for ua_poisson, e.g. `3969,16129`.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma list of v, backslash, amli, amli-ns.
    #[arg(long)]
    cycle: Option<String>,
    /// Nonlinear PCG step counts for the AMLI columns.
    #[arg(long)]
    npcg: Option<String>,
    /// full, sd, or a window length m.
    #[arg(long)]
    truncate: Option<String>,
    /// gs, jacobi or richardson.
    #[arg(long)]
    smoother: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// rel_residual or energy_error.
    #[arg(long)]
    tol_kind: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// csv or markdown.
    #[arg(long)]
    format: Option<String>,
    /// Low coefficient of the jump problem.
    #[arg(long)]
    low: Option<String>,
    /// Strength threshold of the aggregation.
    #[arg(long)]
    theta: Option<String>,
    /// Write each row's matrix, load and initial guess in MatrixMarket format.
    #[arg(long)]
    export_dir: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("problem", &self.problem),
            ("levels", &self.levels),
            ("sizes", &self.sizes),
            ("cycle", &self.cycle),
            ("npcg", &self.npcg),
            ("truncate", &self.truncate),
            ("smoother", &self.smoother),
            ("tol", &self.tol),
            ("tol_kind", &self.tol_kind),
            ("max_iter", &self.max_iter),
            ("seed", &self.seed),
            ("format", &self.format),
            ("low", &self.low),
            ("theta", &self.theta),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// all, constants, representation, two-grid, comparison, pcg or uniform.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value = "2..5")]
    levels: String,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = amli::rng::DEFAULT_SEED)]
    seed: u64,
    /// Append the named values of each check.
    #[arg(long)]
    values: bool,
}

#[derive(Args)]
struct HierarchyArgs {
    /// poisson, jump or ua_poisson.
    #[arg(long, default_value = "ua_poisson")]
    problem: String,
    /// Fine-grid size `(2^k - 1)^2`.
    #[arg(long, conflicts_with = "level")]
    size: Option<usize>,
    /// Fine mesh level `k`.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Per-level dimensions, nonzeros and operator complexity.
    #[arg(long)]
    report: bool,
}

fn run(args: &RunArgs) -> Result<bool> {
    let mut map = match &args.config {
        Some(p) => read_config_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => BTreeMap::new(),
    };
    let overrides = args.overrides();
    if overrides.contains_key("levels") || overrides.contains_key("sizes") {
        map.remove("levels");
        map.remove("sizes");
    }
    map.extend(overrides);
    let config = ExperimentConfig::from_map(&map)?;

    if let Some(dir) = &args.export_dir {
        std::fs::create_dir_all(dir)?;
        for &row in &config.rows {
            let s = setup_row(&config, row)?;
            let stem = dir.join(format!("row{row}"));
            write_matrix_file(s.a(), Symmetry::Symmetric, stem.with_extension("A.mtx"))?;
            write_vector_file(&s.f, stem.with_extension("f.txt"))?;
            write_vector_file(&s.u0, stem.with_extension("u0.txt"))?;
        }
    }

    let table = run_experiment(&config)?;
    print!("{}", emit_table(&table, config.format));
    Ok(table.all_converged())
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let suite: Suite = args.suite.parse()?;
    let levels = parse_list("levels", &args.levels)?;
    let reports = run_suite(suite, &levels, args.samples, args.seed)?;
    println!("{}", CheckReport::CSV_HEADER);
    for r in &reports {
        if args.values {
            let extra: Vec<String> = r.values.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
            println!("{},{}", r.csv_line(), extra.join(";"));
        } else {
            println!("{}", r.csv_line());
        }
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn hierarchy(args: &HierarchyArgs) -> Result<bool> {
    let k = match (args.size, args.level) {
        (Some(s), None) => level_of_size(s)?,
        (None, Some(k)) => k,
        (None, None) => bail!("give --size or --level"),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    let smoother = SmootherSpec::default();
    let h = match args.problem.as_str() {
        "ua_poisson" | "ua-poisson" => {
            let (a, _) = assemble_poisson(k)?;
            build_ua_amg(&a, args.theta, DEFAULT_MIN_COARSE, DEFAULT_MAX_LEVELS, smoother)?
        }
        "poisson" => build_geometric(GeometricProblem::Poisson, k, smoother)?,
        "jump" => build_geometric(
            GeometricProblem::Jump {
                low: DEFAULT_LOW_COEFFICIENT,
            },
            k,
            smoother,
        )?,
        other => bail!("unknown problem '{other}'"),
    };
    if args.report {
        print!("{}", h.summary());
        println!("galerkin_defect,{:e}", h.galerkin_defect()?);
    } else {
        let dims: Vec<String> = h.dims().iter().map(|d| d.to_string()).collect();
        println!("{}", dims.join(","));
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => run(a),
        Command::Verify(a) => verify(a),
        Command::Hierarchy(a) => hierarchy(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
