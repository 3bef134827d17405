use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tabexec_cli::commands::load_endpoint;
use tabexec_cli::{
    cmd_correlate, cmd_eval, cmd_exec, cmd_gen, cmd_report, cmd_validate, CliError, EvalRequest, GenConfig, GenRequest,
};
use tabexec_core::{SerializerStyle, SetName, TaskStyle};

#[derive(Parser)]
#[command(name = "tabexec", version, about = "Synthetic SQL-execution benchmark tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Style {
    Markdown,
    Flatten,
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Sql,
    Multistep,
    Cot,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and its manifest.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Template set, overriding the config.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, value_enum)]
        style: Option<Style>,
        #[arg(long, value_enum)]
        task: Option<Task>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        /// Mixture of every template set over prompt lengths from 2K to 36K tokens.
        #[arg(long)]
        standard: bool,
        #[arg(long)]
        inline_tables: bool,
        #[arg(long)]
        force: bool,
    },
    /// Execute one query against a table file.
    Exec {
        sql: String,
        #[arg(long)]
        table: PathBuf,
    },
    /// Re-derive every line of a dataset and check it.
    Validate {
        dataset: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Score a dataset against a model endpoint.
    Eval {
        dataset: PathBuf,
        /// Endpoint JSON file, or `mock://gold` / `mock://empty`.
        #[arg(long)]
        endpoint: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fresh: bool,
    },
    /// Summarize a records file.
    Report {
        records: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Pearson and Kendall coefficients between two score files.
    Correlate { a: PathBuf, b: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { config, count, seed, out, set, style, task, shots, budget, standard, inline_tables, force } => {
            let mut cfg = match &config {
                Some(p) => GenConfig::load(p)?,
                None => GenConfig::default(),
            };
            if let Some(s) = set {
                cfg.template_set = s.parse::<SetName>().map_err(|e| CliError::Usage(e.to_string()))?;
            }
            if let Some(s) = style {
                cfg.style = match s {
                    Style::Markdown => SerializerStyle::Markdown,
                    Style::Flatten => SerializerStyle::Flatten,
                };
            }
            if let Some(t) = task {
                cfg.task = match t {
                    Task::Sql => TaskStyle::SqlText,
                    Task::Multistep => TaskStyle::MultiStepInstruction,
                    Task::Cot => TaskStyle::ChainOfThought,
                };
            }
            if let Some(n) = shots {
                cfg.shots = n;
            }
            if budget.is_some() {
                cfg.budget = budget;
            }
            for w in &cfg.warnings {
                eprintln!("warning: {w}");
            }
            let m = cmd_gen(&GenRequest { config: cfg, count, seed, out: out.clone(), standard, inline_tables, force })?;
            println!("wrote {} examples to {}", m.count, out.display());
            println!("acceptance rate: {:.4} ({} attempts)", m.stats.acceptance_rate, m.stats.attempts);
            if !m.stats.rejections.is_empty() {
                println!("rejections:");
                for (k, v) in &m.stats.rejections {
                    println!("  {k:<20} {v}");
                }
            }
        }
        Command::Exec { sql, table } => println!("{}", cmd_exec(&sql, &table)?),
        Command::Validate { dataset, manifest } => {
            let r = cmd_validate(&dataset, manifest.as_deref())?;
            for (id, why) in &r.failures {
                eprintln!("{id}: {why}");
            }
            if !r.ok() {
                return Err(CliError::ValidationFailed { failed: r.failures.len(), total: r.total });
            }
            println!("{} lines valid", r.total);
        }
        Command::Eval { dataset, endpoint, out, fresh } => {
            let endpoint = load_endpoint(&endpoint)?;
            let records = cmd_eval(&EvalRequest { dataset, endpoint, out: out.clone(), fresh })?;
            let correct: usize = records.iter().map(|r| r.em as usize).sum();
            println!("{} records written to {} ({correct} correct)", records.len(), out.display());
        }
        Command::Report { records, json } => {
            let (_, text, path) = cmd_report(&records, json.as_deref())?;
            print!("{text}");
            eprintln!("json report: {}", path.display());
        }
        Command::Correlate { a, b } => {
            let c = cmd_correlate(&a, &b)?;
            println!("models: {}", c.models.len());
            println!("pearson r: {:.6}", c.pearson);
            println!("kendall tau: {:.6}", c.kendall_tau);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
