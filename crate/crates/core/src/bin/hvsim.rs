use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hvsim::cli::{
    emit, load_config, run, suite_configs, summary_lines, ConfigError, Experiment, ExperimentConfig, Format,
    OutputSpec, ParamValue, Status, EXIT_CONFIG_ERROR,
};

#[derive(Parser)]
#[command(name = "hvsim", version, about = "Hidden-variable spin model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from flags, a config file, or both (flags win).
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        experiment: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Experiment parameter as name=value; lists are comma-separated.
        #[arg(short = 'p', long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Read angle parameters in degrees instead of radians.
        #[arg(long)]
        degrees: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
        /// Include wall-clock time in JSON output.
        #[arg(long)]
        timing: bool,
        /// Print the resolved config as JSON and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Run every *.json config in a directory.
    Suite {
        dir: PathBuf,
        /// Write one result file per config here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: Format,
    },
    /// List experiments and their parameters.
    List,
}

fn resolve(
    config: Option<PathBuf>,
    experiment: Option<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    params: Vec<String>,
    degrees: bool,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&config, &experiment) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => ExperimentConfig::new(name, 100_000, 0),
        (None, None) => return Err(ConfigError::bad("experiment", "pass --experiment or --config")),
    };
    if let Some(name) = experiment {
        cfg.experiment = name;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let mut flag_params = ExperimentConfig::new(&cfg.experiment, 1, 0);
    for raw in params {
        let (name, value) = raw
            .split_once('=')
            .ok_or_else(|| ConfigError::bad(&raw, "expected NAME=VALUE"))?;
        flag_params
            .parameters
            .insert(name.trim().to_string(), ParamValue::parse_cli(value));
    }
    if degrees {
        flag_params.convert_degrees();
    }
    cfg.parameters.extend(flag_params.parameters);
    if let Some(path) = out {
        let format = format
            .or(cfg.output.as_ref().map(|o| o.format))
            .unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
                Some("csv") => Format::Csv,
                _ => Format::Json,
            });
        cfg.output = Some(OutputSpec { path, format });
    } else if let (Some(f), Some(o)) = (format, cfg.output.as_mut()) {
        o.format = f;
    }
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig, timing: bool) -> Result<Status, ConfigError> {
    let record = run(cfg)?;
    for line in summary_lines(&record) {
        println!("{line}");
    }
    for note in &record.notes {
        println!("note: {note}");
    }
    if let Some(out) = &cfg.output {
        emit(&record, out.format, &out.path, timing)?;
    }
    eprintln!(
        "{}: {:?} in {:.1} ms (seed {}, trials {})",
        cfg.experiment,
        record.status,
        record.wall_clock_ms.unwrap_or(0.0),
        cfg.seed,
        cfg.trials
    );
    Ok(record.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            experiment,
            seed,
            trials,
            params,
            degrees,
            out,
            format,
            timing,
            dump_config,
        } => resolve(config, experiment, seed, trials, params, degrees, out, format).and_then(|cfg| {
            if dump_config {
                println!("{}", cfg.to_json());
                Ok(Status::Pass)
            } else {
                execute(&cfg, timing)
            }
        }),
        Command::Suite { dir, out_dir, format } => suite_configs(&dir).and_then(|configs| {
            let mut worst = Status::Pass;
            for (path, mut cfg) in configs {
                if let Some(dir) = &out_dir {
                    let stem = path.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
                    let mut file = dir.join(stem);
                    file.set_extension(format.to_string());
                    cfg.output = Some(OutputSpec { path: file, format });
                }
                println!("== {}", path.display());
                let status = execute(&cfg, false)?;
                if status.exit_code() > worst.exit_code() {
                    worst = status;
                }
            }
            Ok(worst)
        }),
        Command::List => {
            for e in Experiment::ALL {
                println!("{:24} {}", e.name(), e.parameters().join(", "));
            }
            Ok(Status::Pass)
        }
    };
    match result {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG_ERROR as u8)
        }
    }
}
