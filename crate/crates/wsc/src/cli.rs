//! The `wsc` command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wsc_core::bootstrap::{self, BootstrapConfig, Statistic, DEFAULT_BIN_WIDTH, DEFAULT_RESAMPLES};
use wsc_core::ingest::{self, Aggregation};
use wsc_core::schema::GeneralisedWinogradSchema;
use wsc_core::DEFAULT_SIGNALLING_TOL;

use crate::formats::{self, to_json, write_text, AnySchema, ScenarioFile};
use crate::parallel;
use crate::report::{self, BootstrapSummary};
use crate::responses::{self, ParsedResponses};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Violation,
    Cnt1,
    Cf,
}

impl From<StatisticArg> for Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::Violation => Statistic::Violation,
            StatisticArg::Cnt1 => Statistic::Cnt1,
            StatisticArg::Cf => Statistic::ContextualFraction,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wsc", version, about = "Contextuality analysis of Winograd-style measurement scenarios")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Signalling tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_SIGNALLING_TOL)]
    pub tol: f64,
    /// Seed for bootstrap resampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario, model, schema or response file.
    Validate {
        path: PathBuf,
        /// Schema used to read the word columns of a response file.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Report signalling, Bell-CHSH, CbD and contextual-fraction measures.
    Analyze {
        /// Model file.
        #[arg(required_unless_present = "responses", conflicts_with = "responses")]
        model: Option<PathBuf>,
        /// Response file, aggregated with --schema.
        #[arg(long, requires = "schema")]
        responses: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Also write the aggregated model to this file.
        #[arg(long, requires = "responses")]
        emit_model: Option<PathBuf>,
    },
    /// Resample respondents and summarise a statistic.
    Bootstrap {
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = StatisticArg::Violation)]
        statistic: StatisticArg,
        #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
        bin_width: f64,
        /// Histogram output (`bin_center,density`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Raw samples, one per line in resample order.
        #[arg(long)]
        samples_out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compile a schema to its scenario, or fill in its template.
    Schema {
        path: PathBuf,
        #[arg(long, conflicts_with = "instantiate", required_unless_present = "instantiate")]
        compile: bool,
        /// Words (or `special` / `alternate`) for each slot.
        #[arg(long, num_args = 1..=2, value_names = ["WORD1", "WORD2"])]
        instantiate: Option<Vec<String>>,
        /// Write the compiled scenario here instead of stdout.
        #[arg(long, requires = "compile")]
        out: Option<PathBuf>,
    },
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a parsed command; the returned code is the process exit status.
pub fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Validate { path, schema } => validate(cli, path, schema.as_deref()),
        Command::Analyze { model, responses, schema, emit_model } => {
            analyze(cli, model.as_deref(), responses.as_deref(), schema.as_deref(), emit_model.as_deref())
        }
        Command::Bootstrap { responses, schema, samples, statistic, bin_width, out, samples_out, threads } => {
            let config = BootstrapConfig {
                n_resamples: *samples,
                seed: cli.seed,
                statistic: (*statistic).into(),
                bin_width: *bin_width,
            };
            run_bootstrap(cli, responses, schema, &config, out.as_deref(), samples_out.as_deref(), *threads)
        }
        Command::Schema { path, compile, instantiate, out } => {
            let schema = formats::load_schema(path)?;
            if *compile {
                let text = to_json(&ScenarioFile::from_scenario(&schema.scenario()?)?);
                match out {
                    Some(p) => write_text(p, &text)?,
                    None => print!("{text}"),
                }
            } else if let Some(words) = instantiate {
                let text = schema.instantiate(words)?;
                match cli.format {
                    Format::Text => println!("{text}"),
                    Format::Json => print!("{}", to_json(&serde_json::json!({ "words": words, "text": text }))),
                }
            }
            Ok(0)
        }
    }
}

#[derive(Debug, Serialize)]
struct ValidateReport {
    path: String,
    kind: &'static str,
    valid: bool,
    problems: Vec<String>,
    notices: Vec<String>,
}

fn emit<T: Serialize>(cli: &Cli, value: &T, text: impl FnOnce() -> String) {
    match cli.format {
        Format::Text => print!("{}", text()),
        Format::Json => print!("{}", to_json(value)),
    }
}

fn sniff(path: &Path) -> Result<&'static str, Error> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok("responses");
    }
    let value: serde_json::Value = formats::parse_json(&formats::read_text(path)?, path)?;
    let has = |k: &str| value.get(k).is_some();
    if has("distributions") {
        Ok("model")
    } else if has("noun_phrases") {
        Ok("schema")
    } else if has("observables") {
        Ok("scenario")
    } else {
        Err(Error::Parse(format!(
            "{}: not a scenario, model, schema or response file",
            path.display()
        )))
    }
}

fn load_generalised(path: &Path) -> Result<GeneralisedWinogradSchema, Error> {
    formats::load_schema(path)?.generalised()
}

fn malformed_error(parsed: &ParsedResponses) -> Option<Error> {
    if parsed.malformed.is_empty() {
        return None;
    }
    let lines: Vec<String> = parsed.malformed.iter().map(|m| format!("  line {}: {}", m.line, m.reason)).collect();
    Some(Error::Invalid(format!("{} malformed line(s):\n{}", lines.len(), lines.join("\n"))))
}

fn aggregate_responses(responses: &Path, schema: &Path) -> Result<(Aggregation, Vec<String>), Error> {
    let schema = load_generalised(schema)?;
    let parsed = responses::read_responses(responses, &schema)?;
    if let Some(e) = malformed_error(&parsed) {
        return Err(e);
    }
    let mut notices = parsed.warnings;
    let agg = ingest::aggregate(&parsed.records, &schema).map_err(Error::invalid)?;
    if !agg.duplicate_ids.is_empty() {
        notices.push(format!("repeated respondent id(s): {}", agg.duplicate_ids.join(", ")));
    }
    Ok((agg, notices))
}

fn validate(cli: &Cli, path: &Path, schema: Option<&Path>) -> Result<u8, Error> {
    let kind = sniff(path)?;
    let mut notices = Vec::new();
    let outcome: Result<String, Error> = match kind {
        "scenario" => formats::load_scenario(path).map(|s| {
            format!("{} observables, {} outcomes", s.observables().len(), s.outcomes().len())
        }),
        "model" => formats::load_model(path).map(|m| {
            notices = m.notices;
            let sig = m.value.signalling(cli.tol);
            if !sig.non_signalling {
                notices.push(format!("model signals: max discrepancy {:.6}", sig.max_discrepancy));
            }
            format!("{} contexts", m.value.contexts().len())
        }),
        "schema" => formats::load_schema(path).map(|s| match s {
            AnySchema::Original(_) => "original schema".to_owned(),
            AnySchema::Generalised(_) => "generalised schema".to_owned(),
        }),
        _ => {
            let Some(schema) = schema else {
                return Err(Error::Parse("validating a response file needs --schema".into()));
            };
            let schema = load_generalised(schema)?;
            let parsed = responses::read_responses(path, &schema)?;
            notices.extend(parsed.warnings.iter().cloned());
            match malformed_error(&parsed) {
                Some(e) => Err(e),
                None => ingest::aggregate(&parsed.records, &schema).map_err(Error::invalid).map(|agg| {
                    if !agg.duplicate_ids.is_empty() {
                        notices.push(format!("repeated respondent id(s): {}", agg.duplicate_ids.join(", ")));
                    }
                    let valid: usize = agg.tallies.iter().map(|t| t.n_valid).sum();
                    format!("{} responses, {} valid", parsed.records.len(), valid)
                }),
            }
        }
    };
    let (valid, summary, problems) = match outcome {
        Ok(summary) => (true, summary, Vec::new()),
        Err(Error::Invalid(msg)) => (false, String::new(), msg.lines().map(str::to_owned).collect()),
        Err(e) => return Err(e),
    };
    let report = ValidateReport { path: path.display().to_string(), kind, valid, problems, notices };
    emit(cli, &report, || {
        let mut s = if valid {
            format!("valid {kind}: {summary}\n")
        } else {
            format!("invalid {kind}\n")
        };
        for p in &report.problems {
            s.push_str(&format!("  {}\n", p.trim_start()));
        }
        for n in &report.notices {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    });
    Ok(if valid { 0 } else { 1 })
}

fn analyze(
    cli: &Cli,
    model: Option<&Path>,
    responses: Option<&Path>,
    schema: Option<&Path>,
    emit_model: Option<&Path>,
) -> Result<u8, Error> {
    let report = match (model, responses, schema) {
        (Some(path), _, _) => {
            let loaded = formats::load_model(path)?;
            report::analyze(&loaded.value, cli.tol, None, loaded.notices)
        }
        (None, Some(r), Some(s)) => {
            let (agg, notices) = aggregate_responses(r, s)?;
            if let Some(out) = emit_model {
                write_text(out, &to_json(&formats::model_to_file(&agg.model)?))?;
            }
            report::analyze(&agg.model, cli.tol, Some(&agg.tallies), notices)
        }
        _ => return Err(Error::Parse("give a model file, or --responses with --schema".into())),
    };
    emit(cli, &report, || report.to_text());
    Ok(0)
}

fn run_bootstrap(
    cli: &Cli,
    responses: &Path,
    schema: &Path,
    config: &BootstrapConfig,
    out: Option<&Path>,
    samples_out: Option<&Path>,
    threads: Option<usize>,
) -> Result<u8, Error> {
    if !(config.bin_width.is_finite() && config.bin_width > 0.0) {
        return Err(Error::invalid(format!("bin width must be positive, got {}", config.bin_width)));
    }
    let (agg, notices) = aggregate_responses(responses, schema)?;
    let scenario = agg.model.scenario();
    let point = bootstrap::statistic_of(scenario, &agg.tallies, config.statistic).map_err(Error::invalid)?;
    let result = parallel::run(scenario, &agg.tallies, config, threads)?;
    if let Some(p) = out {
        write_text(p, &report::histogram_csv(&result))?;
    }
    if let Some(p) = samples_out {
        let mut s = String::with_capacity(result.samples.len() * 20);
        for x in &result.samples {
            s.push_str(&format!("{x}\n"));
        }
        write_text(p, &s)?;
    }
    let summary = BootstrapSummary::new(&result, config, point, notices);
    emit(cli, &summary, || summary.to_text());
    Ok(0)
}
