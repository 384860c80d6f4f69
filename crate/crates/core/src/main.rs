//! Command-line front end: certify presentation series, apply cuts,
//! compute word depths through the Magnus embedding, evaluate rank
//! profiles, certify root-discriminant bounds from fixtures, emit greedy
//! cut schedules, print the records table, and replay the embedded
//! casebook.
//!
//! Exit codes: 0 on success, 1 when a certification fails or a replay
//! mismatches, 2 on usage errors (bad flags, unreadable or invalid
//! inputs). All rational output is exact (`p/q`); certified reals print
//! as a rounded-up decimal tagged `(certified)`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gstower::casebook;
use gstower::cft::{h1_rank, r_upper_bound, wild_relation_count, RankProfile};
use gstower::magnus::{self, DepthResult, FreeWord};
use gstower::rat::{parse_rat, rat_str, Rat};
use gstower::rdbound;
use gstower::series::GSSeries;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "gstower",
    version,
    about = "Certificates of infinitude for pro-p towers of number fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a series for a negativity witness and print the verdict.
    Certify {
        /// Series document (JSON: {"d": .., "relations": [..], "tails": [..]}).
        #[arg(long, value_name = "FILE")]
        series: PathBuf,
        /// Maximum dyadic search depth.
        #[arg(long, value_name = "N", default_value_t = 12)]
        max_depth: u32,
        /// Emit the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Add relations to a series and print the result.
    Cut {
        #[arg(long, value_name = "FILE")]
        series: PathBuf,
        /// Relation depth (>= 2).
        #[arg(long, value_name = "K")]
        depth: u32,
        /// Number of relations of that depth.
        #[arg(long, value_name = "C")]
        count: u64,
        /// Emit the cut series as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Zassenhaus depth of a free-group word over F_p.
    Depth {
        /// Word in the generators, e.g. "x0 x1 x0^-1 x1^-1".
        #[arg(long, value_name = "WORD")]
        word: String,
        /// The prime p.
        #[arg(long, value_name = "P")]
        p: u32,
        /// Truncation degree of the Magnus embedding.
        #[arg(long, value_name = "N")]
        trunc: u32,
        /// Emit the depth as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Generator rank and relation bound from a rank profile.
    Ranks {
        /// Rank profile document (JSON).
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
        /// Emit the ranks as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Certified root-discriminant bound declared by a fixture.
    Rdbound {
        /// Fixture document (JSON).
        #[arg(long, value_name = "FILE")]
        fixture: PathBuf,
        /// Interval precision (rational or decimal, in ]0,1[); defaults
        /// to GS_TOWER_PRECISION or 1e-8.
        #[arg(long, value_name = "EPS")]
        precision: Option<String>,
        /// Significant digits for the displayed bound.
        #[arg(long, value_name = "D", default_value_t = 7)]
        digits: u32,
        /// Emit the bound as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Greedy cut schedule at a strict witness.
    Schedule {
        #[arg(long, value_name = "FILE")]
        series: PathBuf,
        /// Witness point with P(t0) < 0.
        #[arg(long, value_name = "P/Q")]
        t0: String,
        /// Fraction of the margin the schedule may spend, in ]0,1[.
        #[arg(long, value_name = "P/Q")]
        budget: String,
        /// Number of depths to emit.
        #[arg(long, value_name = "L")]
        length: usize,
        /// Emit the schedule as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Root-discriminant records table with recomputed distances.
    Records {
        /// Output format.
        #[arg(long, value_enum, default_value_t = RecordsFormat::Text)]
        format: RecordsFormat,
    },
    /// Replay the embedded fixture casebook.
    Replay {
        /// Only fixtures whose id matches this glob (`*`, `?`).
        #[arg(long, value_name = "GLOB")]
        filter: Option<String>,
        /// Emit the reports as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RecordsFormat {
    Text,
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_series(path: &Path) -> Result<GSSeries, String> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| format!("invalid series in {}: {e}", path.display()))
}

fn parse_rat_arg(text: &str, what: &str) -> Result<Rat, String> {
    parse_rat(text).map_err(|e| format!("invalid {what} {text:?}: {e}"))
}

/// Precision for certified bounds: the flag wins, then the
/// GS_TOWER_PRECISION environment variable, then the library default.
fn resolve_precision(flag: Option<&str>) -> Result<Rat, String> {
    match flag.map(str::to_owned).or_else(|| std::env::var("GS_TOWER_PRECISION").ok()) {
        Some(text) => parse_rat_arg(&text, "precision"),
        None => Ok(rdbound::default_precision()),
    }
}

/// Writes to stdout, ending quietly when the reader has gone away (e.g.
/// piping into `head`) instead of panicking.
fn write_out(text: &str) -> Result<(), String> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(format!("cannot write output: {e}")),
    }
}

fn write_line(text: &str) -> Result<(), String> {
    write_out(&format!("{text}\n"))
}

fn emit_json(value: &impl serde::Serialize) -> Result<(), String> {
    write_line(&serde_json::to_string(value).map_err(|e| e.to_string())?)
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Certify { series, max_depth, json } => {
            let s = load_series(&series)?;
            let verdict = s.find_witness(max_depth);
            if json {
                emit_json(&verdict)?;
            } else {
                write_line(&verdict.to_string())?;
            }
            Ok(if verdict.certifies_infinite() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MISMATCH)
            })
        }
        Command::Cut { series, depth, count, json } => {
            let s = load_series(&series)?.cut(depth, count).map_err(|e| e.to_string())?;
            if json {
                emit_json(&s)?;
            } else {
                write_line(&s.to_string())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Depth { word, p, trunc, json } => {
            let w = FreeWord::parse(&word).map_err(|e| e.to_string())?;
            let result = magnus::depth(&w, p, trunc).map_err(|e| e.to_string())?;
            if json {
                let payload = match result {
                    DepthResult::Exact(n) => json!({"kind": "exact", "value": n}),
                    DepthResult::AtLeast(n) => json!({"kind": "at_least", "value": n}),
                    DepthResult::Infinity => json!({"kind": "infinity"}),
                };
                emit_json(&payload)?;
            } else {
                write_line(&result.to_string())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ranks { profile, json } => {
            let rp: RankProfile = serde_json::from_str(&read_file(&profile)?)
                .map_err(|e| format!("invalid profile in {}: {e}", profile.display()))?;
            let d = h1_rank(&rp).map_err(|e| e.to_string())?;
            let (bound, mode) = if rp.has_wild_places() {
                let d = u32::try_from(d)
                    .map_err(|_| format!("generator rank {d} is not a valid generator count"))?;
                (wild_relation_count(d, rp.r2).map_err(|e| e.to_string())?, "wild")
            } else {
                (r_upper_bound(&rp).map_err(|e| e.to_string())?, "tame")
            };
            if json {
                emit_json(&json!({"d": d, "relation_bound": bound, "mode": mode}))?;
            } else {
                write_line(&format!("d = {d}"))?;
                write_line(&format!("r <= {bound} ({mode})"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rdbound { fixture, precision, digits, json } => {
            let cf = casebook::load_fixture(&read_file(&fixture)?).map_err(|e| e.to_string())?;
            let eps = resolve_precision(precision.as_deref())?;
            let bound = casebook::fixture_bound(&cf, &eps)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| {
                    format!("fixture {} declares no root-discriminant bound", cf.id)
                })?;
            if json {
                emit_json(&json!({"bound": bound, "display": bound.display_upper(digits)}))?;
            } else {
                write_line(&bound.display_upper(digits))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Schedule { series, t0, budget, length, json } => {
            let s = load_series(&series)?;
            let t0r = parse_rat_arg(&t0, "t0")?;
            let budgetr = parse_rat_arg(&budget, "budget")?;
            let depths: Vec<u32> = s
                .frobenius_schedule(&t0r, &budgetr)
                .map_err(|e| e.to_string())?
                .take(length)
                .collect();
            if json {
                emit_json(&json!({
                    "t0": rat_str(&t0r),
                    "budget": rat_str(&budgetr),
                    "depths": depths,
                }))?;
            } else {
                let line: Vec<String> = depths.iter().map(u32::to_string).collect();
                write_line(&line.join(" "))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Records { format } => {
            let rows =
                rdbound::records_table(&rdbound::default_precision()).map_err(|e| e.to_string())?;
            match format {
                RecordsFormat::Text => write_out(&rdbound::records_table_text(&rows))?,
                RecordsFormat::Csv => write_out(&rdbound::records_table_csv(&rows))?,
                RecordsFormat::Json => emit_json(&rows)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { filter, json } => {
            let summary = casebook::replay_all(filter.as_deref()).map_err(|e| e.to_string())?;
            if json {
                emit_json(&summary)?;
            } else {
                write_line(&summary.to_string())?;
            }
            Ok(if summary.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MISMATCH)
            })
        }
    }
}
