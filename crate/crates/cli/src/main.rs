use clap::{Args, Parser, Subcommand};
use fluxls_cli::{
    export_mesh, load_file_config, parse_refinement, problem_names, run, RunConfig, RunError,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fluxls", version, about = "Least-squares finite element solver for linear transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write convergence.csv (plus optional VTK exports)
    Run(RunArgs),
    /// List the benchmark problems
    Problems,
    /// Export a problem's initial mesh as text and/or VTK
    Mesh(MeshArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark problem name (see `fluxls problems`)
    #[arg(long)]
    problem: Option<String>,
    /// lsfem | lsfem-b1 | lsfem-b2 | c-lsfem
    #[arg(long)]
    method: Option<String>,
    /// Polynomial order k (0 or 1)
    #[arg(long)]
    order: Option<usize>,
    /// uniform | adaptive
    #[arg(long)]
    refinement: Option<String>,
    /// Doerfler bulk-marking fraction
    #[arg(long)]
    theta: Option<f64>,
    /// Boundary weight constant for lsfem-b2
    #[arg(long)]
    alpha_f: Option<f64>,
    /// Adaptive stop: total number of mesh nodes
    #[arg(long)]
    node_budget: Option<usize>,
    /// Number of uniform refinement levels
    #[arg(long)]
    levels: Option<usize>,
    /// Relative linear-solver tolerance
    #[arg(long)]
    solver_tol: Option<f64>,
    /// Output directory for convergence.csv and exports
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Write per-iteration VTK solution files
    #[arg(long)]
    export_solutions: bool,
    /// Suppress wall-clock times (byte-reproducible CSV)
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct MeshArgs {
    /// Benchmark problem supplying the initial mesh
    #[arg(long)]
    problem: String,
    /// Uniform refinement passes before export
    #[arg(long, default_value_t = 0)]
    refine: usize,
    /// Plain-text mesh output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Legacy-VTK output path
    #[arg(long)]
    vtk: Option<PathBuf>,
}

fn build_config(args: RunArgs) -> Result<RunConfig, RunError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(load_file_config(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(v) = args.problem {
        config.problem = v;
    }
    if let Some(v) = args.method {
        config.method = v;
    }
    if let Some(v) = args.order {
        config.order = v;
    }
    if let Some(v) = args.refinement {
        config.refinement = parse_refinement(&v)?;
    }
    if let Some(v) = args.theta {
        config.theta = v;
    }
    if let Some(v) = args.alpha_f {
        config.alpha_f = v;
    }
    if let Some(v) = args.node_budget {
        config.node_budget = v;
    }
    if let Some(v) = args.levels {
        config.levels = v;
    }
    if let Some(v) = args.solver_tol {
        config.solver_tol = v;
    }
    if let Some(v) = args.output_dir {
        config.output_dir = v;
    }
    if args.export_solutions {
        config.export_solutions = true;
    }
    if args.no_timing {
        config.timing = false;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), RunError> = match cli.command {
        Command::Run(args) => build_config(args).and_then(|config| {
            let summary = run(&config)?;
            let last = summary.records.last();
            println!(
                "{} rows written to {} (final estimator {})",
                summary.records.len(),
                summary.csv_path.display(),
                last.map(|r| r.estimator.to_string()).unwrap_or_default()
            );
            Ok(())
        }),
        Command::Problems => {
            for name in problem_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Mesh(args) => {
            if args.out.is_none() && args.vtk.is_none() {
                Err(RunError::Config("mesh: pass --out and/or --vtk".into()))
            } else {
                export_mesh(&args.problem, args.refine, args.out.as_deref(), args.vtk.as_deref())
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
