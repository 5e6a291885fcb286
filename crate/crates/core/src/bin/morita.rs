use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cstar_morita::scenario::{
    default_campaign, generate_instance, run_scenario, InstanceSource, Kind, Report, Scenario, DEFAULT_SEED,
    DEFAULT_TRIALS,
};
use cstar_morita::Error;

/// Verification harness for finite-dimensional correspondences and their
/// Morita transforms.
#[derive(Parser)]
#[command(name = "morita", version)]
struct Cli {
    /// Directory for reports and instances when --out is not given.
    #[arg(long, env = "MORITA_OUT_DIR", global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign for one kind, or `all` for the default suite.
    Verify {
        kind: String,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_u64)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// Fock truncation level.
        #[arg(long)]
        nmax: Option<usize>,
        /// Tolerance override, `name=value`; repeatable.
        #[arg(long = "tol", value_parser = parse_tol)]
        tols: Vec<(String, f64)>,
        /// Fixed instance: a JSON file or one of scalar-trivial, column, diagonal.
        #[arg(long)]
        instance: Option<String>,
        /// Write the machine report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        /// Print per-trial residual tables.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Write a reproducible random instance for a kind.
    Generate {
        kind: String,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_u64)]
        seed: u64,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a saved machine report; the exit status follows its verdict.
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        #[arg(long, short)]
        verbose: bool,
    },
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("'{s}': {e}"))
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("tolerance '{name}': {e}"))?;
    if value.is_nan() || value < 0.0 {
        return Err(format!("tolerance '{name}' must be a non-negative number"));
    }
    Ok((name.trim().to_string(), value))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Verify { kind, seed, trials, nmax, tols, instance, out, format, verbose } => {
            let scenarios = if kind == "all" {
                if instance.is_some() || !tols.is_empty() {
                    return Err(Error::Argument("--instance and --tol need a single kind".into()));
                }
                default_campaign(seed, trials).into_iter().map(|s| Scenario { nmax, ..s }).collect()
            } else {
                let kind: Kind = kind.parse()?;
                let instance = instance.map(|name| {
                    if Path::new(&name).exists() {
                        InstanceSource::File(PathBuf::from(name))
                    } else {
                        InstanceSource::Builtin(name)
                    }
                });
                let tolerances: BTreeMap<String, f64> = tols.into_iter().collect();
                vec![Scenario { kind, instance, trials, seed, tolerances, nmax }]
            };
            let mut reports = Vec::with_capacity(scenarios.len());
            for s in &scenarios {
                let report = run_scenario(s)?;
                if let Format::Human = format {
                    print!("{}", report.to_human(verbose));
                }
                reports.push(report);
            }
            let machine = machine_text(&reports);
            if let Format::Machine = format {
                println!("{machine}");
            }
            let target = out.or_else(|| cli.out_dir.map(|d| d.join(format!("report-{kind}.json"))));
            if let Some(path) = target {
                write_file(&path, &machine)?;
                eprintln!("report written to {}", path.display());
            }
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Generate { kind, seed, nmax, out } => {
            let kind: Kind = kind.parse()?;
            let inst = generate_instance(kind, seed, nmax)?;
            let text = serde_json::to_string_pretty(&inst).expect("instance serialises");
            match out.or_else(|| cli.out_dir.map(|d| d.join(format!("{kind}-{seed:#x}.json")))) {
                Some(path) => {
                    write_file(&path, &text)?;
                    eprintln!("instance written to {}", path.display());
                }
                None => println!("{text}"),
            }
            Ok(true)
        }
        Command::Report { file, format, verbose } => {
            let text = std::fs::read_to_string(&file)?;
            let location = file.display().to_string();
            let reports = if text.trim_start().starts_with('[') {
                serde_json::from_str::<Vec<Report>>(&text).map_err(|e| Error::Parse {
                    location: format!("{location}:{}:{}", e.line(), e.column()),
                    message: e.to_string(),
                })?
            } else {
                vec![Report::from_machine(&text, &location)?]
            };
            match format {
                Format::Human => reports.iter().for_each(|r| print!("{}", r.to_human(verbose))),
                Format::Machine => println!("{}", machine_text(&reports)),
            }
            Ok(reports.iter().all(|r| r.pass))
        }
    }
}

/// One report as an object, several as an array.
fn machine_text(reports: &[Report]) -> String {
    match reports {
        [one] => one.to_machine(),
        many => serde_json::to_string_pretty(many).expect("reports serialise"),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
