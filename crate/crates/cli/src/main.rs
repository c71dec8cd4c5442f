use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use colombeau_cli::replay::{replay_report, REPLAY_TOL};
use colombeau_cli::{
    bundled, run_in, CliError, Format, Overrides, Report, Scenario, World, BUNDLED,
};

#[derive(Parser)]
#[command(
    name = "colombeau",
    version,
    about = "Run generalized-function scenarios and emit reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a bundled scenario by name.
    Run {
        scenario: String,
        /// Output directory; else the scenario's `output.dir`, else `reports`.
        #[arg(long, short, env = "COLOMBEAU_OUT")]
        out: Option<PathBuf>,
        /// Comma-separated formats: json, csv, text; else the scenario's
        /// `output.formats`, else all three.
        #[arg(long, short, value_delimiter = ',')]
        format: Vec<String>,
        /// Run tasks in parallel.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        grid_start: Option<u32>,
        #[arg(long)]
        grid_end: Option<u32>,
        #[arg(long)]
        q_max: Option<u32>,
        /// Also print the text summary.
        #[arg(long)]
        print: bool,
    },
    /// List bundled scenarios.
    List,
    /// Re-evaluate every witness of a json report.
    Replay {
        scenario: String,
        report: PathBuf,
        #[arg(long, default_value_t = REPLAY_TOL)]
        tol: f64,
    },
}

fn load(name: &str) -> Result<Scenario, CliError> {
    let path = Path::new(name);
    if path.exists() {
        return Scenario::load(path);
    }
    bundled(name).unwrap_or_else(|| {
        Err(CliError::Io {
            path: name.to_string(),
            message: "no such file or bundled scenario".into(),
        })
    })
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

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            format,
            parallel,
            grid_start,
            grid_end,
            q_max,
            print,
        } => {
            let mut s = load(&scenario)?;
            s.apply(&Overrides {
                grid_start,
                grid_end,
                q_max,
            })?;
            let out = out
                .or_else(|| s.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("reports"));
            let format = if !format.is_empty() {
                format
            } else if !s.output.formats.is_empty() {
                s.output.formats.clone()
            } else {
                vec!["json".into(), "csv".into(), "text".into()]
            };
            let formats = format
                .iter()
                .map(|f| Format::parse(f))
                .collect::<Result<Vec<_>, _>>()?;
            let world = World::build(&s)?;
            let report = run_in(&world, &s, parallel);
            for p in report.emit(&out, &formats)? {
                eprintln!("wrote {}", p.display());
            }
            if print {
                print!("{}", report.to_text());
            }
            Ok(if report.has_errors() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::List => {
            for (name, text) in BUNDLED {
                let desc = Scenario::parse(text, name)
                    .map(|s| s.description)
                    .unwrap_or_default();
                println!("{name:<24} {desc}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay {
            scenario,
            report,
            tol,
        } => {
            let s = load(&scenario)?;
            let text = std::fs::read_to_string(&report).map_err(|e| CliError::Io {
                path: report.display().to_string(),
                message: e.to_string(),
            })?;
            let r = Report::from_json(&text)?;
            let world = World::build(&s)?;
            let lines = replay_report(&world, &s, &r, tol);
            let mut ok = true;
            for l in &lines {
                ok &= l.ok;
                let replayed = l
                    .replayed
                    .map(|x| format!("{x:e}"))
                    .unwrap_or_else(|| l.error.clone().unwrap_or_default());
                println!(
                    "{} {}{} recorded={:e} replayed={replayed}",
                    if l.ok { "OK  " } else { "FAIL" },
                    l.task,
                    if l.path.is_empty() {
                        String::new()
                    } else {
                        format!("/{}", l.path)
                    },
                    l.recorded
                );
            }
            println!(
                "{} witnesses, {}",
                lines.len(),
                if ok { "all replay" } else { "mismatches found" }
            );
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
