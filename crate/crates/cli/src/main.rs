use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use spectral_fisher_rao::distance::batch_reports;
use spectral_fisher_rao::experiments::{
    inspect, parse_model_spec, run_acceptance_suite, run_figure_case, ExperimentConfig,
    InspectSubject, Scale, CASE_NAMES,
};

#[derive(Parser)]
#[command(
    name = "fisher-rao",
    version,
    about = "Fisher-Rao distances between noisy spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance-ratio sweep over B*dtau for a reference case (case1..case4)
    /// or a JSON experiment config.
    Figure {
        case: String,
        /// Write the CSV here instead of the config's output_path or stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance criteria and print a JSON verdict.
    Accept {
        #[arg(long, default_value = "smoke")]
        scale: Scale,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dump the metric, Christoffel symbols or geodesic of a model spec.
    Inspect {
        subject: InspectSubject,
        model: PathBuf,
    },
    /// Distance reports for every endpoint pair in a long-format CSV.
    Distance {
        pairs: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load_config(case: &str) -> Result<ExperimentConfig> {
    if let Some(c) = ExperimentConfig::named(case) {
        return Ok(c);
    }
    let path = Path::new(case);
    if !path.exists() {
        bail!(
            "`{case}` is neither a case name ({}) nor a file",
            CASE_NAMES.join(", ")
        );
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Figure { case, output } => {
            let config = load_config(&case)?;
            let data = run_figure_case(&config)?;
            let target = output.or(config.output_path);
            data.write_csv(sink(target.as_deref())?)?;
        }
        Command::Accept { scale, seed } => {
            let verdict = run_acceptance_suite(seed, scale);
            for c in &verdict.criteria {
                eprintln!("{c}");
            }
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &verdict)?;
            writeln!(out)?;
            if !verdict.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Inspect { subject, model } => {
            let text = fs::read_to_string(&model)
                .with_context(|| format!("reading {}", model.display()))?;
            let spec =
                parse_model_spec(&text).with_context(|| format!("in {}", model.display()))?;
            let value = inspect(subject, &spec)?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &value)?;
            writeln!(out)?;
        }
        Command::Distance { pairs, output } => {
            let input =
                File::open(&pairs).with_context(|| format!("opening {}", pairs.display()))?;
            batch_reports(BufReader::new(input), sink(output.as_deref())?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
