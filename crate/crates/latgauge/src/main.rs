use clap::{Parser, Subcommand, ValueEnum};
use latgauge::verify::{self, Report, REGISTRY, SUITES};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "latgauge", version, about = "Check the laws of truncated lattice gauge algebras on a scenario")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the checks of a scenario file.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Restrict to a suite; repeat for several.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the suites and their checks.
    ListSuites,
    /// Run the shipped S3, U(1) and SU(2) scenarios.
    Demo {
        /// Overrides the seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(lines: &[String]) -> ExitCode {
    for l in lines {
        eprintln!("error: {l}");
    }
    ExitCode::from(2)
}

/// Writes the output and maps the verdict to the exit code.
fn emit(text: &str, out: Option<&Path>, ok: bool) -> ExitCode {
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                return fail(&[format!("cannot write {}: {e}", path.display())]);
            }
            eprintln!("report written to {}", path.display());
        }
        None => {
            use std::io::Write;
            // a closed pipe (`| head`) is not an error worth a panic
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::ListSuites => {
            let mut text = String::new();
            for suite in SUITES {
                text.push_str(suite);
                text.push('\n');
                for c in REGISTRY.iter().filter(|c| c.suite == suite) {
                    let tag = if c.expected_fail { " [expected fail]" } else { "" };
                    text.push_str(&format!("  {}{tag}: {}\n", c.name, c.law));
                }
            }
            emit(&text, None, true)
        }
        Cmd::Demo { seed, format, out } => {
            let reports = match verify::demo(seed) {
                Ok(r) => r,
                Err(e) => return fail(&[e.to_string()]),
            };
            let text = match format {
                Format::Json => verify::reports_to_json(&reports),
                Format::Text => reports.iter().map(Report::to_text).collect::<Vec<_>>().join("\n"),
            };
            emit(&text, out.as_deref(), reports.iter().all(Report::ok))
        }
        Cmd::Verify { scenario, suites, seed, format, out } => {
            let mut sc = match verify::load_scenario(&scenario) {
                Ok(sc) => sc,
                Err(errs) => return fail(&errs),
            };
            if let Some(s) = seed {
                sc.file.seed = s;
            }
            let suites = if suites.is_empty() { sc.suites() } else { suites };
            let report = match verify::run(&sc, &suites) {
                Ok(r) => r,
                Err(e) => return fail(&[e.to_string()]),
            };
            let text = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            emit(&text, out.as_deref(), report.ok())
        }
    }
}
