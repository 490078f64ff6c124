use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use supereig::experiment::export_matrices;
use supereig::meshio::write_mesh;
use supereig::report::{write_report, Format};
use supereig::{run_experiment, CliError, CliResult, ExperimentConfig, Source};
use supereig_core::pipeline::PostSelection;
use supereig_core::{Domain, ElementKind, Triangulation};

/// Laplace eigenvalues with CR, ECR and P1 elements, gradient recovery
/// and post-processed eigenvalue approximations.
#[derive(Parser)]
#[command(name = "supereig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-level experiment and write convergence tables.
    Run(RunArgs),
    /// Write a benchmark mesh in the plain-text format.
    Mesh(MeshArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Benchmark example (1 to 4).
    #[arg(long, conflicts_with = "domain", required_unless_present = "domain")]
    example: Option<u8>,
    /// Benchmark domain with Dirichlet conditions, instead of an example.
    #[arg(long, value_parser = parse_domain)]
    domain: Option<Domain>,
    /// Segment tags made Neumann on a custom domain, comma separated.
    #[arg(long, value_delimiter = ',', requires = "domain")]
    neumann: Vec<u8>,
    /// Element kinds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "cr")]
    element: Vec<Kind>,
    /// Last level `n` (levels 2..=n) or a range `a..b`.
    #[arg(long, value_parser = parse_levels)]
    levels: LevelRange,
    /// Number of eigenpairs.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Post-processing: any of rea, cea, exp, or all / none.
    #[arg(long, default_value = "rea,exp", value_parser = parse_post)]
    post: PostSelection,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Add eigenfunctions and recovered gradients to the JSON report.
    #[arg(long)]
    fields: bool,
    /// Also write stiffness and mass matrices of the last level as `i j value` lines.
    #[arg(long)]
    export_matrices: bool,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, value_parser = parse_domain)]
    domain: Domain,
    #[arg(long, default_value_t = 1)]
    level: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cr,
    Ecr,
    P1,
}

impl From<Kind> for ElementKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Cr => ElementKind::Cr,
            Kind::Ecr => ElementKind::Ecr,
            Kind::P1 => ElementKind::P1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy)]
struct LevelRange(u32, u32);

fn parse_domain(s: &str) -> Result<Domain, String> {
    s.parse().map_err(|e: supereig_core::Error| e.to_string())
}

fn parse_post(s: &str) -> Result<PostSelection, String> {
    s.parse().map_err(|e: supereig_core::Error| e.to_string())
}

fn parse_levels(s: &str) -> Result<LevelRange, String> {
    let num = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("bad level `{x}`"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => (2.min(num(s)?), num(s)?),
    };
    if a == 0 || a > b {
        return Err(format!("empty level range `{s}`"));
    }
    Ok(LevelRange(a, b))
}

fn run(args: RunArgs) -> CliResult<()> {
    let source = match (args.example, args.domain) {
        (Some(id), _) => Source::Example(id),
        (None, Some(domain)) => Source::Custom { domain, neumann: args.neumann },
        (None, None) => return Err(CliError::Usage("one of --example or --domain is required".into())),
    };
    let cfg = ExperimentConfig {
        source,
        elements: args.element.into_iter().map(ElementKind::from).collect(),
        levels: args.levels.0..=args.levels.1,
        k: args.k,
        post: args.post,
        fields: args.fields,
    };
    let report = run_experiment(&cfg)?;
    let format = match args.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let mut files = write_report(&report, format, &args.out)?;
    if args.export_matrices {
        let last = report.runs.iter().flat_map(|r| r.levels.last()).map(|l| l.level).max();
        if let Some(level) = last {
            files.extend(export_matrices(&cfg, level, &args.out)?);
        }
    }
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn mesh(args: MeshArgs) -> CliResult<()> {
    if args.level == 0 {
        return Err(CliError::Usage("level must be at least 1".into()));
    }
    let m = Triangulation::build(args.domain, args.level)?;
    write_mesh(&m, BufWriter::new(File::create(&args.out)?))?;
    println!("{}", args.out.display());
    Ok(())
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let msg: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            return fail(&CliError::Usage(msg.join(" ").trim_start_matches("error: ").to_owned()));
        }
    };
    let r = match cli.command {
        Command::Run(a) => run(a),
        Command::Mesh(a) => mesh(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
