//! The `perfumes` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand};

use crate::corpus::{analyze_corpus, correlate, join_results, render_summary};
use crate::report::{analyze_file, render, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "perfumes",
    version,
    about = "Find code perfumes in Scratch 3 projects"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one project (.sb3 or project.json) and print feedback.
    Lint {
        /// Project to analyze.
        file: PathBuf,
        /// text, json or csv.
        #[arg(long, default_value = "text")]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Analyze every .sb3/.json file in a directory and summarize.
    Corpus {
        /// Directory of projects; not searched recursively.
        dir: PathBuf,
        /// csv, json or text.
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// CSV with header `project_id,passed_tests` to correlate against.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Worker threads [default: available cores].
        #[arg(long)]
        jobs: Option<NonZeroUsize>,
    },
}

/// Runs the CLI with process stdio. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let mut rendered = e.render().to_string();
            if e.use_stderr() && !rendered.contains("Usage:") {
                rendered.push_str(&format!("\n{}\n", Cli::command().render_usage()));
            }
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), String> {
    match command {
        Command::Lint {
            file,
            format,
            output,
        } => {
            let report = analyze_file(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            for d in &report.diagnostics {
                let _ = writeln!(stderr, "{}: {d}", report.project_id);
            }
            emit(&render(&report, format), output.as_deref(), stdout)
        }
        Command::Corpus {
            dir,
            format,
            output,
            results,
            jobs,
        } => {
            let jobs = jobs
                .or_else(|| std::thread::available_parallelism().ok())
                .map_or(1, NonZeroUsize::get);
            let analysis = analyze_corpus(&dir, jobs).map_err(|e| e.to_string())?;
            for (path, err) in &analysis.failures {
                let _ = writeln!(stderr, "skipped {}: {err}", path.display());
            }
            for report in &analysis.reports {
                for d in &report.diagnostics {
                    let _ = writeln!(stderr, "{}: {d}", report.project_id);
                }
            }

            let correlations = match results {
                None => Vec::new(),
                Some(path) => {
                    let file = File::open(&path)
                        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                    let joined = join_results(&analysis.reports, file)
                        .map_err(|e| format!("{}: {e}", path.display()))?;
                    for w in &joined.warnings {
                        let _ = writeln!(stderr, "warning: {w}");
                    }
                    let correlations = correlate(&joined.rows);
                    for (name, res) in &correlations {
                        if let Err(e) = res {
                            let _ = writeln!(stderr, "warning: {name}: {e}");
                        }
                    }
                    correlations
                }
            };
            emit(
                &render_summary(&analysis.summary, &correlations, format),
                output.as_deref(),
                stdout,
            )
        }
    }
}

fn emit(bytes: &[u8], output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), String> {
    match output {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => stdout
            .write_all(bytes)
            .and_then(|_| stdout.flush())
            .map_err(|e| format!("writing output: {e}")),
    }
}
