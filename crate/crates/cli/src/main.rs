//! `ncindex`: runs the scenario pipelines and writes their reports.

mod commands;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use commands::{Ctx, Outcome};
use scenario::Scenario;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Identities,
    Chern,
    Index,
    Jlo,
    Localize,
}

#[derive(Parser, Debug)]
#[command(name = "ncindex", about = "Equivariant index computations on finite models")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the scenario's `out` or `out/<id>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of random algebras for `identities`.
    #[arg(long)]
    count: Option<usize>,
}

fn write_atomic(dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    let mut f = tempfile::NamedTempFile::new_in(dir)?;
    f.write_all(content.as_bytes())?;
    f.as_file().sync_all()?;
    f.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

fn threads() -> usize {
    std::env::var("NCINDEX_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&n| n > 0).unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    })
}

fn run(cli: &Cli) -> Result<(Outcome, PathBuf), String> {
    let scenario = match &cli.scenario {
        Some(p) => Some(Scenario::load(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => None,
    };
    let sid = scenario.as_ref().map(|s| s.id.clone()).unwrap_or_else(|| "identities".into());
    let seed = match (cli.seed, &scenario) {
        (Some(k), _) => k,
        (None, Some(s)) => s.number("seed", 0).map_err(|e| format!("scenario {sid}: {e}"))?,
        (None, None) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads()).build().map_err(|e| e.to_string())?;
    let ctx = Ctx { scenario: scenario.as_ref(), seed, pool: &pool };
    let outcome = match cli.command {
        Command::Identities => commands::cmd_identities(&ctx, cli.count),
        Command::Chern => commands::cmd_chern(&ctx),
        Command::Index => commands::cmd_index(&ctx),
        Command::Jlo => commands::cmd_jlo(&ctx),
        Command::Localize => commands::cmd_localize(&ctx),
    }
    .map_err(|e| format!("scenario {sid}: {e}"))?;
    let out = cli
        .out
        .clone()
        .or_else(|| scenario.as_ref().and_then(|s| s.get("out").map(|o| s.dir.join(o))))
        .unwrap_or_else(|| PathBuf::from("out").join(&sid));
    Ok((outcome, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, dir) = match run(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    for (name, content) in &outcome.files {
        if let Err(e) = write_atomic(&dir, name, content) {
            eprintln!("error: writing {}: {e}", dir.join(name).display());
            return ExitCode::from(2);
        }
    }
    println!("{} [{}] -> {}", outcome.summary, if outcome.pass { "pass" } else { "FAIL" }, dir.display());
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
