//! `magscat`: run forward solves, data assembly, CGO checks, reconstructions and sweeps.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magscat::io::sha256_hex;

use artifacts::{RunDir, DEFAULT_OUT, OUT_ENV};
use commands::Ctx;
use config::RunConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "magscat", version, about = "Magnetic Schrödinger scattering laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run descriptor; defaults apply to every missing field
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output root; each run gets a fresh subdirectory
    #[arg(long, global = true, env = OUT_ENV, default_value = DEFAULT_OUT)]
    out: PathBuf,
    /// worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve for each incident field and write the far field
    Forward,
    /// Assemble the near-field matrix on the sphere
    Nearfield,
    /// Far-field coefficients and 𝓕-norm
    Farfield,
    /// CGO identity suite
    CgoCheck,
    /// Recover curl(A₂ − A₁) and q₂ − q₁
    Reconstruct,
    /// Stability tables over a family of pairs
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Forward => "forward",
            Self::Nearfield => "nearfield",
            Self::Farfield => "farfield",
            Self::CgoCheck => "cgo-check",
            Self::Reconstruct => "reconstruct",
            Self::Sweep => "sweep",
        }
    }
}

fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let setup = cfg.setup()?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::config("config", "--jobs must be at least 1").with_parameter("jobs"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::config("config", e.to_string()).with_parameter("jobs"))?;
    }
    let resolved = serde_json::to_vec_pretty(&cfg).map_err(|e| CliError::config("config", e.to_string()))?;
    let mut hashed = resolved.clone();
    hashed.extend_from_slice(format!("\nseed={}", cli.seed).as_bytes());
    let hash = sha256_hex(&hashed);
    let name = cli.command.name();
    let mut dir = RunDir::create(&cli.out, name, &hash, cli.seed, cli.jobs)?;
    dir.write("config.json", &resolved)?;
    dir.note("Helmholtz projection solved on the enclosing cube with homogeneous Dirichlet data");
    let ctx = Ctx {
        cfg: &cfg,
        setup: &setup,
        seed: cli.seed,
        verbose: cli.verbose,
    };
    let res = match cli.command {
        Command::Forward => commands::forward(&ctx, &mut dir),
        Command::Nearfield => commands::nearfield(&ctx, &mut dir),
        Command::Farfield => commands::farfield(&ctx, &mut dir),
        Command::CgoCheck => commands::cgo_check(&ctx, &mut dir),
        Command::Reconstruct => commands::reconstruct(&ctx, &mut dir),
        Command::Sweep => commands::sweep(&ctx, &mut dir),
    };
    match res {
        Ok(()) => dir.finish("ok"),
        Err(e) => {
            let _ = dir.write_json("error.json", &e);
            let _ = dir.finish("failed");
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(dir) => {
            println!("{}", serde_json::json!({ "status": "ok", "run_dir": dir }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
