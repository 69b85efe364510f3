//! Command-line front end: inspect a table, print trace variants, or run a
//! filter stack and export the result. `--serve` starts the HTTP API
//! instead.
//!
//! Data goes to stdout, diagnostics (step statistics, warnings) to stderr.
//! Exit codes: 0 success, 1 data error, 2 usage or schema error.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use evlog::{
    apply_stack, attribute_names, export_xes, extract_log, inspect, parse_csv, simple_log, write_log_csv,
    Classifier, CsvProfile, EventTable, FilterStack, StructuredEventLog, TimeFormat,
};

pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "evlog", version, about = "Extract and pre-process event logs from CSV event tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Start the HTTP API instead of running a command.
    #[arg(long)]
    pub serve: bool,

    /// Port for --serve.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, clap::Args)]
pub struct InputArgs {
    /// CSV event table.
    #[arg(long)]
    pub input: PathBuf,

    /// Timestamp format: `iso8601`, a strftime pattern (`%d/%m/%Y %H:%M`) or
    /// tokens (`DD/MM/YYYY HH:mm`). Defaults try day-first and ISO 8601.
    #[arg(long)]
    pub time_format: Option<String>,

    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// Column holding the timestamp.
    #[arg(long, default_value = "time")]
    pub time_column: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-attribute counts and case identifier candidates.
    Inspect {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Trace variants for a case identifier and classifier.
    Variants {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        case_id: String,
        /// Attributes joined by `+`, e.g. `action+life-cycle`.
        #[arg(long)]
        classifier: String,
    },
    /// Apply a filter stack and write the result.
    Filter {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        case_id: String,
        /// JSON filter stack; without it the log is exported unfiltered.
        #[arg(long)]
        stack: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Variants)]
        format: Format,
        /// Required for `--format variants`.
        #[arg(long)]
        classifier: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Variants,
    Csv,
    Xes,
    Stats,
}

#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            exit_code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            exit_code: EXIT_DATA,
            message: message.into(),
        }
    }
}

/// Choices and stacks the user wrote are usage errors; problems in the data
/// are data errors.
impl From<evlog::Error> for CliError {
    fn from(e: evlog::Error) -> Self {
        use evlog::Error as E;
        match &e {
            E::UnknownAttribute(_)
            | E::TimeAsCaseId
            | E::InvalidClassifier(_)
            | E::InvalidProfile(_)
            | E::PredicateArity { .. }
            | E::StackSchema { .. }
            | E::MissingTimeColumn(_) => CliError::usage(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Result of a command: bytes for stdout and lines for stderr.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub data: Vec<u8>,
    pub diagnostics: Vec<String>,
}

impl InputArgs {
    pub fn profile(&self) -> CliResult<CsvProfile> {
        let mut profile = CsvProfile {
            delimiter: self.delimiter,
            time_column: self.time_column.clone(),
            ..CsvProfile::default()
        };
        if let Some(f) = &self.time_format {
            profile.timestamp_formats = vec![f.parse::<TimeFormat>()?];
        }
        Ok(profile)
    }

    pub fn load(&self) -> CliResult<EventTable> {
        load_table(&self.input, &self.profile()?)
    }
}

pub fn load_table(path: &Path, profile: &CsvProfile) -> CliResult<EventTable> {
    let file = File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(parse_csv(io::BufReader::new(file), profile)?)
}

pub fn parse_classifier(text: &str, table: &EventTable) -> CliResult<Classifier> {
    let cl: Classifier = text.parse()?;
    let names = attribute_names(table);
    if let Some(missing) = cl.attrs().iter().find(|a| !names.contains(a)) {
        return Err(evlog::Error::UnknownAttribute(missing.clone()).into());
    }
    Ok(cl)
}

fn extract(table: &EventTable, case_id: &str, diagnostics: &mut Vec<String>) -> CliResult<StructuredEventLog> {
    let log = extract_log(table, case_id)?;
    diagnostics.extend(inspect(table).case_id_warnings(case_id));
    Ok(log)
}

pub fn cmd_inspect(table: &EventTable) -> Output {
    Output {
        data: inspect(table).to_text().into_bytes(),
        diagnostics: Vec::new(),
    }
}

pub fn cmd_variants(table: &EventTable, case_id: &str, classifier: &str) -> CliResult<Output> {
    let mut diagnostics = Vec::new();
    let cl = parse_classifier(classifier, table)?;
    let log = extract(table, case_id, &mut diagnostics)?;
    let text = simple_log(&log, &cl).to_text(cl.separator());
    Ok(Output {
        data: text.into_bytes(),
        diagnostics,
    })
}

pub fn cmd_filter(
    table: &EventTable,
    case_id: &str,
    stack: &FilterStack,
    format: Format,
    classifier: Option<&str>,
) -> CliResult<Output> {
    let cl = match (format, classifier) {
        (Format::Variants, None) => return Err(CliError::usage("--format variants needs --classifier")),
        (_, Some(text)) => Some(parse_classifier(text, table)?),
        (_, None) => None,
    };
    let mut diagnostics = Vec::new();
    let log = extract(table, case_id, &mut diagnostics)?;
    let outcome = apply_stack(&log, stack)?;
    for s in &outcome.stats {
        diagnostics.push(format!(
            "step {} {}: cases {} -> {}, events {} -> {}",
            s.step, s.op, s.cases_in, s.cases_out, s.events_in, s.events_out
        ));
    }
    let data = match format {
        Format::Variants => {
            let cl = cl.expect("checked above");
            simple_log(&outcome.log, &cl).to_text(cl.separator()).into_bytes()
        }
        Format::Csv => write_log_csv(&outcome.log, b',')?,
        Format::Xes => export_xes(&outcome.log, false),
        Format::Stats => {
            let value = serde_json::json!({
                "cases": outcome.log.num_cases(),
                "events": outcome.log.num_events(),
                "uncorrelated": outcome.log.uncorrelated(),
                "steps": outcome.stats,
            });
            let mut text = serde_json::to_string_pretty(&value).expect("stats serialize");
            text.push('\n');
            text.into_bytes()
        }
    };
    Ok(Output { data, diagnostics })
}

pub fn read_stack(path: &Path) -> CliResult<FilterStack> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(FilterStack::from_json(&text)?)
}

fn execute(command: &Command) -> CliResult<Output> {
    match command {
        Command::Inspect { input } => Ok(cmd_inspect(&input.load()?)),
        Command::Variants {
            input,
            case_id,
            classifier,
        } => cmd_variants(&input.load()?, case_id, classifier),
        Command::Filter {
            input,
            case_id,
            stack,
            format,
            classifier,
        } => {
            let stack = match stack {
                Some(path) => read_stack(path)?,
                None => FilterStack::default(),
            };
            cmd_filter(&input.load()?, case_id, &stack, *format, classifier.as_deref())
        }
    }
}

/// Runs a parsed command line; returns the exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if cli.serve {
        return serve(cli.port, stderr);
    }
    let Some(command) = cli.command else {
        let _ = writeln!(stderr, "error: no command given (try --help)");
        return EXIT_USAGE;
    };
    match execute(&command) {
        Ok(out) => {
            for line in &out.diagnostics {
                let _ = writeln!(stderr, "{line}");
            }
            if let Err(e) = stdout.write_all(&out.data).and_then(|_| stdout.flush()) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_DATA;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.exit_code
        }
    }
}

fn serve(port: u16, stderr: &mut dyn Write) -> i32 {
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_DATA;
        }
    };
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    let _ = writeln!(stderr, "listening on http://{addr}/v1");
    match runtime.block_on(evlog_server::serve(addr, evlog_server::Config::default())) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}
