use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coherent_core::experiment::{self, emit_plotdata, parse_layer, Config, ExperimentKind, Preset, OUTPUT_ENV};

/// Coherent sets of aperiodically driven systems.
#[derive(Parser, Debug)]
#[command(name = "coherent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write its result bundle.
    ///
    /// Exits with status 1 when an internal consistency check fails and 2
    /// on any other error.
    Run {
        /// single-map, periodic3, aperiodic4 or wave2d
        experiment: ExperimentKind,
        /// TOML configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bundle directory. Falls back to the configuration, then to
        /// $COHERENT_OUTPUT_DIR/<experiment>, then to results/<experiment>.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Test points per box
        #[arg(long)]
        q: Option<usize>,
        /// Length of the long product
        #[arg(long)]
        m: Option<usize>,
        /// Push-forward length to the reference time
        #[arg(long)]
        n_push: Option<usize>,
        /// desk or full (wave2d)
        #[arg(long)]
        preset: Option<Preset>,
        /// Extra `key=value` settings in TOML syntax, e.g. `svd.tol=1e-8`
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Resolve and print the configuration without computing anything
        #[arg(long)]
        dry_run: bool,
    },
    /// Write plot data for one figure into <bundle>/plot/.
    EmitPlotdata {
        bundle: PathBuf,
        /// delta-n, rho-mean, mode2-field or threshold-curve
        figure: String,
    },
    /// Check a configuration file and print it fully resolved.
    ValidateConfig { file: PathBuf },
}

fn read_layer(path: &Path) -> Result<toml::Table, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_layer(&text, &path.display().to_string()).map_err(|e| e.to_string())
}

fn output_dir(flag: Option<PathBuf>, config: &Config) -> PathBuf {
    flag.or_else(|| config.output.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(|d| PathBuf::from(d).join(config.experiment.name())))
        .unwrap_or_else(|| Path::new("results").join(config.experiment.name()))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            output,
            workers,
            q,
            m,
            n_push,
            preset,
            sets,
            dry_run,
        } => {
            let mut layers = Vec::new();
            if let Some(path) = &config {
                layers.push(read_layer(path)?);
            }
            for s in &sets {
                layers.push(parse_layer(s, "--set").map_err(|e| e.to_string())?);
            }
            let mut flags = toml::Table::new();
            for (key, value) in [("q", q), ("m", m), ("n_push", n_push), ("workers", workers)] {
                if let Some(v) = value {
                    let v = i64::try_from(v).map_err(|_| format!("--{key} is too large"))?;
                    flags.insert(key.into(), v.into());
                }
            }
            layers.push(flags);
            let config = Config::resolve(Some(experiment), preset, &layers).map_err(|e| e.to_string())?;
            let dir = output_dir(output, &config);
            if dry_run {
                print!("{}", config.to_toml().map_err(|e| e.to_string())?);
                eprintln!("dry run: configuration is valid; would write to {}", dir.display());
                return Ok(ExitCode::SUCCESS);
            }
            let report = experiment::run(&config).map_err(|e| e.to_string())?;
            let written = report.write_bundle(&dir).map_err(|e| e.to_string())?;
            eprintln!("wrote {} files to {}", written.len(), dir.display());
            let mut failed = false;
            for c in report.failures() {
                failed = true;
                eprintln!("check failed: {} {}", c.name, c.detail);
            }
            Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::EmitPlotdata { bundle, figure } => {
            let path = emit_plotdata(&bundle, &figure).map_err(|e| e.to_string())?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateConfig { file } => {
            let layer = read_layer(&file)?;
            let config = Config::resolve(None, None, &[layer]).map_err(|e| e.to_string())?;
            print!("{}", config.to_toml().map_err(|e| e.to_string())?);
            eprintln!("{}: valid {} configuration", file.display(), config.experiment);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
