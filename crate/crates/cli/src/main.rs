use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use polariton_cli::config::{ConfigError, ScenarioConfig};
use polariton_cli::output::{render_params_csv, render_series_csv, write_file};
use polariton_cli::presets;
use polariton_cli::scenario::{run_scenario, ScenarioError};
use polariton_cli::load_config_text;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "polariton", version, about = "Coupled-cavity polariton Bose-Hubbard simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config (a file path or a preset name)
    Run {
        config: String,
        /// Override the RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides run.out_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Additional key.path=value config overrides
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Derive and print the effective parameters and validity report
    Derive {
        config: String,
        /// Also write params.csv to this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preset management
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List the embedded preset scenarios
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out, overrides } => cmd_run(&config, seed, out, overrides),
        Command::Derive { config, out } => cmd_derive(&config, out),
        Command::Presets { action: PresetsAction::List } => {
            for p in presets::PRESETS {
                println!("{:<16} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
    }
}

fn config_failure(e: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn cmd_run(
    spec: &str,
    seed: Option<u64>,
    out: Option<PathBuf>,
    mut overrides: Vec<String>,
) -> ExitCode {
    if let Some(s) = seed {
        overrides.push(format!("run.seed={s}"));
    }
    let text = match load_config_text(spec) {
        Ok(t) => t,
        Err(e) => return config_failure(&e),
    };
    let (cfg, resolved) = match ScenarioConfig::parse_with_overrides(&text, &overrides) {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let out_dir = out
        .or_else(|| cfg.run.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(spec_stem(spec)));

    let started = Instant::now();
    let result = run_scenario(&cfg);
    let wall = started.elapsed().as_secs_f64();

    match result {
        Ok(output) => {
            if !output.columns.is_empty() {
                let series = render_series_csv(&output.times, &output.columns);
                if let Err(e) = write_file(&out_dir, "series.csv", &series) {
                    eprintln!("error: cannot write series.csv: {e}");
                    return ExitCode::from(EXIT_RUNTIME);
                }
            }
            let params = render_params_csv(&output.params_rows);
            if let Err(e) = write_file(&out_dir, "params.csv", &params) {
                eprintln!("error: cannot write params.csv: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
            let meta = render_meta(spec, cfg.run.seed, "ok", wall, &resolved);
            if let Err(e) = write_file(&out_dir, "meta", &meta) {
                eprintln!("error: cannot write meta: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
            println!("wrote {}", out_dir.display());
            ExitCode::SUCCESS
        }
        Err(ScenarioError::Config(e)) => config_failure(&e),
        Err(ScenarioError::Runtime(msg)) => {
            // flag the failure in the metadata next to any partial outputs
            let meta = render_meta(spec, cfg.run.seed, &format!("error: {msg}"), wall, &resolved);
            let _ = write_file(&out_dir, "meta", &meta);
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_derive(spec: &str, out: Option<PathBuf>) -> ExitCode {
    let text = match load_config_text(spec) {
        Ok(t) => t,
        Err(e) => return config_failure(&e),
    };
    let cfg = match ScenarioConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if !cfg.microscopic() {
        return config_failure(&ConfigError::Invalid(
            "derive needs the microscopic [atom_cavity] parameter path".into(),
        ));
    }
    let rows = match polariton_cli::scenario::derive_rows(&cfg) {
        Ok(r) => r,
        Err(ScenarioError::Config(e)) => return config_failure(&e),
        Err(ScenarioError::Runtime(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let ramped = rows.iter().any(|(_, a, b)| a != b);
    println!("{:<32} {:>20} {:>20}", "parameter", "value(t=0)", "value(t=end)");
    for (name, v0, v1) in &rows {
        if ramped {
            println!("{name:<32} {v0:>20.6e} {v1:>20.6e}");
        } else {
            println!("{name:<32} {v0:>20.6e}");
        }
    }
    let csv = render_params_csv(&rows);
    if let Some(dir) = out {
        if let Err(e) = write_file(&dir, "params.csv", &csv) {
            eprintln!("error: cannot write params.csv: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
        println!("wrote {}", dir.join("params.csv").display());
    } else {
        println!();
        print!("{csv}");
    }
    ExitCode::SUCCESS
}

fn spec_stem(spec: &str) -> String {
    std::path::Path::new(spec)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string())
}

fn render_meta(spec: &str, seed: u64, status: &str, wall: f64, resolved: &str) -> String {
    format!(
        "tool: polariton {}\nconfig: {spec}\nseed: {seed}\nstatus: {status}\nwall_time_s: {wall:.3}\n--- resolved config ---\n{resolved}",
        env!("CARGO_PKG_VERSION")
    )
}
