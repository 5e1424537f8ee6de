use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sullivan::cache::{Cache, CACHE_DIR_ENV};
use sullivan::commands::{execute, Command};
use sullivan::report::Format;

#[derive(Parser)]
#[command(name = "sullivan", version, about = "Exact computations with Sullivan models of sphere mapping spaces")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Human, global = true)]
    format: OutputFormat,

    /// Directory for cached reports.
    #[arg(long, env = CACHE_DIR_ENV, global = true)]
    cache_dir: Option<PathBuf>,

    /// Ignore the cache for this run.
    #[arg(long, global = true)]
    no_cache: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Human,
    Structured,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check d² = 0, purity, ellipticity and any recorded expectations.
    Validate { model: PathBuf },
    /// Cohomology dimensions and representatives.
    Cohomology {
        model: PathBuf,
        #[arg(long, default_value_t = 12)]
        max_degree: u32,
    },
    /// Euler characteristic, after certifying finite cohomology.
    Euler { model: PathBuf },
    /// The diagonal class and its pullback along multiplication.
    DiagonalClass { model: PathBuf },
    /// det(∂dy_j/∂x_i) as a multiple of the orientation class.
    Jacobian { model: PathBuf },
    /// Build and check the shriek map for the k-sphere.
    Shriek {
        model: PathBuf,
        #[arg(long)]
        k: u32,
        /// Degree through which the cocycle identity is checked (default 2m + 2k).
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Check that χ·ev*ω⌣α vanishes on the sphere-space model.
    Vanishing {
        model: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 12)]
        max_degree: u32,
    },
    /// Compare the shriek-map coproduct with the closed formula.
    Compare {
        model: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        max_degree: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (path, cmd) = match cli.command {
        Cmd::Validate { model } => (model, Command::Validate),
        Cmd::Cohomology { model, max_degree } => (model, Command::Cohomology { max_degree }),
        Cmd::Euler { model } => (model, Command::Euler),
        Cmd::DiagonalClass { model } => (model, Command::DiagonalClass),
        Cmd::Jacobian { model } => (model, Command::Jacobian),
        Cmd::Shriek { model, k, max_degree } => (model, Command::Shriek { k, max_degree }),
        Cmd::Vanishing { model, k, max_degree } => (model, Command::Vanishing { k, max_degree }),
        Cmd::Compare { model, k, max_degree } => (model, Command::Compare { k, max_degree }),
    };
    let format = match cli.format {
        OutputFormat::Human => Format::Human,
        OutputFormat::Structured => Format::Structured,
    };
    let cache = cli.cache_dir.filter(|_| !cli.no_cache).map(Cache::new);
    let out = execute(&path, &cmd, format, cache.as_ref());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
