use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hexstiff::integrate::Mode;
use hexstiff::mesh::{self, StructuredGridSpec};
use hexstiff::pipeline::{self, Assembler, BuildConfig};
use hexstiff::sparseio;
use hexstiff::Error;

/// Overrides `--budget-mb` when set.
const BUDGET_ENV: &str = "HEXSTIFF_BUDGET_MB";

#[derive(Parser)]
#[command(name = "hexstiff", version, about = "Global stiffness matrices for hexahedral Poisson meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a structured cube mesh.
    MeshGen {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the global matrix and report sizes and timings.
    Build(BuildArgs),
    /// Print memory and timing tables for a series of cube sizes.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    nx: usize,
    /// Defaults to `--nx`.
    #[arg(long)]
    ny: Option<usize>,
    /// Defaults to `--nx`.
    #[arg(long)]
    nz: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

impl GridArgs {
    fn spec(&self) -> StructuredGridSpec {
        StructuredGridSpec {
            nx: self.nx,
            ny: self.ny.unwrap_or(self.nx),
            nz: self.nz.unwrap_or(self.nx),
            h: self.h,
            c0: self.c,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Working-memory budget for one integration group, in MB.
    #[arg(long)]
    budget_mb: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "sequential")]
    mode: Mode,
    #[arg(long, default_value = "triplet")]
    assembler: Assembler,
}

impl RunArgs {
    fn config(&self) -> Result<BuildConfig, Error> {
        let mut config = BuildConfig {
            mode: self.mode,
            assembler: self.assembler,
            ..Default::default()
        };
        if let Some(w) = self.workers {
            config.workers = w;
        }
        let budget = match std::env::var(BUDGET_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("{BUDGET_ENV}=`{v}` is not a number")))?,
            ),
            Err(_) => self.budget_mb,
        };
        if let Some(mb) = budget {
            config = config.with_budget_mb(mb)?;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Mesh file; otherwise a cube is generated from `--nx ...`.
    #[arg(long, conflicts_with_all = ["nx", "ny", "nz", "h", "c"])]
    mesh: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    nz: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
    /// Matrix Market output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report output; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::MeshGen { grid, out } => {
            let m = mesh::generate_cube_mesh(&grid.spec())?;
            mesh::save_mesh(&m, &out)?;
            eprintln!("wrote {} nodes, {} elements to {}", m.n_nodes(), m.n_elements(), out.display());
        }
        Command::Build(args) => {
            let m = match (&args.mesh, args.nx) {
                (Some(path), _) => mesh::load_mesh(path)?,
                (None, Some(nx)) => mesh::generate_cube_mesh(&StructuredGridSpec {
                    nx,
                    ny: args.ny.unwrap_or(nx),
                    nz: args.nz.unwrap_or(nx),
                    h: args.h.unwrap_or(1.0),
                    c0: args.c.unwrap_or(1.0),
                })?,
                (None, None) => return Err(Error::Config("either --mesh or --nx is required".into())),
            };
            let config = args.run.config()?;
            let (matrix, report) = pipeline::build_matrix(&m, &config)?;
            if let Some(out) = &args.out {
                sparseio::export_matrix_market(&matrix, out)?;
            }
            let json = report.to_json();
            match &args.report {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
        }
        Command::Bench { sizes, repeat, run } => {
            let rows = pipeline::run_bench(&sizes, repeat, &run.config()?)?;
            print!("{}", pipeline::format_bench_table(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
