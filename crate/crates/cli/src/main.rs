use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rhythmkit_cli::config::{self, ConfigError};
use rhythmkit_cli::presets::{NETWORK_KINDS, PRESETS};
use rhythmkit_cli::{run_preset, sweep, RunError};

#[derive(Parser)]
#[command(name = "rhythmkit", version, about = "Neuronal rhythm experiments: presets and parameter sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one preset (or the `ing` / `ping` network kinds).
    Run {
        #[arg(long)]
        preset: String,
        /// Optional TOML config; --set values take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a parameter, e.g. `--set ing.tau_decay=20`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cartesian product of the axes over a base config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axes: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List available presets.
    ListPresets,
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())).into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListPresets => {
            for (name, about) in PRESETS.iter().chain(NETWORK_KINDS) {
                println!("{name:<20} {about}");
            }
            Ok(())
        }
        Command::Run {
            preset,
            config,
            set,
            seed,
            out,
        } => (|| {
            let text = config.as_ref().map(read).transpose()?.unwrap_or_default();
            let out_dir = match out {
                Some(o) => o,
                None => PathBuf::from(config::load(&text, &set)?.config.out_dir),
            };
            let (_, output) = run_preset(&preset, &text, &set, seed, &out_dir, &argv)?;
            for c in &output.claims {
                println!("[{}] {}: {}", if c.holds { "ok" } else { "FAIL" }, c.name, c.detail);
            }
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", out_dir.display());
            Ok(())
        })(),
        Command::Sweep {
            config: config_path,
            axes,
            seed,
            jobs,
            out,
        } => (|| {
            let text = read(&config_path)?;
            let axes = config::parse_axes(&read(&axes)?)?;
            let out_dir = match out {
                Some(o) => o,
                None => PathBuf::from(config::parse_config(&text)?.out_dir),
            };
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let report = sweep::sweep(&text, &axes, seed, jobs, &out_dir, &argv)?;
            let failed = report.failures();
            println!("{} runs, {failed} failed; wrote {}", report.children.len(), out_dir.display());
            if failed > 0 {
                return Err(RunError::PartialSweep {
                    failed,
                    total: report.children.len(),
                });
            }
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
