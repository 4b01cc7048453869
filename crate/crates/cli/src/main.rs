//! `gam` — build and interrogate explicit amalgam actions on the integers.
//!
//! Exit codes: 0 on success, 1 when a state fails verification (or a result
//! falls short, e.g. transitivity misses classes), 2 on usage errors such as
//! malformed words, 3 when a state file cannot be parsed at all.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gam_core::amalgam::AmalgamWord;
use gam_core::engine::{self, ConstructionState};
use gam_core::statefile::{self, ParsedState};
use gam_core::verify;
use gam_core::words::Word;

#[derive(Parser)]
#[command(name = "gam", version, about = "explicit amalgam actions on the integers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the staged construction and write the state file.
    Build {
        /// Base word over a, b, A, B (normalized before building).
        #[arg(long)]
        c: String,
        /// Number of schedule stages to run.
        #[arg(long)]
        stages: u32,
        /// Where to write the state.
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a word over both factors (a b A B / x y X Y) to a point.
    Act {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, allow_negative_numbers = true)]
        point: i64,
    },
    /// Re-check a state's certificates.
    Verify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Full)]
        level: Level,
    },
    /// List Følner blocks with re-computed boundary sizes.
    Folner {
        #[arg(long)]
        state: PathBuf,
    },
    /// List fixed-point witness triples, optionally for one word.
    Witnesses {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        word: Option<String>,
    },
    /// Report which residue classes alpha^n and beta^m reach from 0.
    Transitivity {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        m: i64,
    },
    /// Normalize a word to a special weakly cyclically reduced core.
    Specialize { word: String },
    /// Write the ball around a point as a DOT graph.
    ExportDot {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        center: i64,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Quick,
    Full,
}

const OK: u8 = 0;
const INVARIANT_FAILURE: u8 = 1;
const USAGE: u8 = 2;
const UNPARSEABLE_STATE: u8 = 3;

fn load_state(path: &PathBuf) -> Result<ParsedState, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        UNPARSEABLE_STATE
    })?;
    statefile::parse(&text).map_err(|e| {
        eprintln!("cannot parse {}: {e}", path.display());
        UNPARSEABLE_STATE
    })
}

fn parse_base_word(text: &str) -> Result<Word, u8> {
    Word::parse(text).map_err(|e| {
        eprintln!("bad word '{text}': {e}");
        USAGE
    })
}

fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Build { c, stages, out } => {
            let base = match parse_base_word(&c) {
                Ok(w) => w,
                Err(code) => return code,
            };
            let state = match engine::run(&base, stages) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("build failed: {e}");
                    return INVARIANT_FAILURE;
                }
            };
            if let Err(e) = fs::write(&out, statefile::serialize(&state)) {
                eprintln!("cannot write {}: {e}", out.display());
                return INVARIANT_FAILURE;
            }
            println!(
                "built c={} stages={stages} extent={} log={} -> {}",
                state.c,
                state.alpha.used_extent,
                state.log.len(),
                out.display()
            );
            OK
        }
        Command::Act { state, word, point } => {
            let parsed = match load_state(&state) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let word = match AmalgamWord::parse(&word) {
                Ok(w) => w,
                Err(e) => {
                    eprintln!("bad word: {e}");
                    return USAGE;
                }
            };
            println!("{}", gam_core::amalgam::act(&parsed.state, &word, point));
            OK
        }
        Command::Verify { state, level } => {
            let parsed = match load_state(&state) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let level = match level {
                Level::Quick => verify::Level::Quick,
                Level::Full => verify::Level::Full,
            };
            let report = verify::run_checks(&parsed.state, &parsed.defects, level);
            print!("{}", report.render());
            if report.ok() {
                OK
            } else {
                INVARIANT_FAILURE
            }
        }
        Command::Folner { state } => {
            let parsed = match load_state(&state) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let s: &ConstructionState = &parsed.state;
            for b in &s.folner_blocks {
                let a: std::collections::BTreeSet<i64> = b.points().collect();
                let alpha_a: std::collections::BTreeSet<i64> =
                    b.points().map(|p| s.alpha.eval_closed(p)).collect();
                let diff = a.symmetric_difference(&alpha_a).count();
                println!(
                    "{}\t{}\t{}\t{}/{}\t{}\t{}",
                    b.lo,
                    b.hi,
                    b.len(),
                    b.eps_num,
                    b.eps_den,
                    diff,
                    if b.reserved { "reserved" } else { "open" }
                );
            }
            OK
        }
        Command::Witnesses { state, word } => {
            let parsed = match load_state(&state) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let filter = match word.as_deref().map(parse_base_word) {
                Some(Ok(w)) => Some(w),
                Some(Err(code)) => return code,
                None => None,
            };
            for (word, triples) in &parsed.state.witness_pool {
                if filter.as_ref().is_some_and(|f| f != word) {
                    continue;
                }
                for t in triples {
                    println!("{word}\t{}\t{}", t.x, t.wx);
                }
            }
            OK
        }
        Command::Transitivity { state, n, m } => {
            if n < 1 || m < 1 {
                eprintln!("n and m must be at least 1");
                return USAGE;
            }
            let parsed = match load_state(&state) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let classes = engine::transitivity_bfs(&parsed.state, n, m, 0);
            let listed: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
            println!("{} of {m} classes: {}", classes.len(), listed.join(" "));
            if classes.len() as i64 == m {
                OK
            } else {
                INVARIANT_FAILURE
            }
        }
        Command::Specialize { word } => {
            let parsed = match parse_base_word(&word) {
                Ok(w) => w,
                Err(code) => return code,
            };
            match gam_core::autos::specialize(&parsed) {
                Ok((auto, core)) => {
                    let moves: Vec<String> =
                        auto.moves.iter().map(|m| m.to_string()).collect();
                    if moves.is_empty() {
                        println!("moves: (none)");
                    } else {
                        println!("moves: {}", moves.join(" "));
                    }
                    println!("matrix: {}", auto.matrix());
                    println!("special: {core}");
                    OK
                }
                Err(e) => {
                    eprintln!("cannot specialize '{word}': {e}");
                    USAGE
                }
            }
        }
        Command::ExportDot {
            state,
            center,
            radius,
            out,
        } => {
            let parsed = match load_state(&state) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let dot = engine::ball_dot(&parsed.state, center, radius);
            if let Err(e) = fs::write(&out, &dot) {
                eprintln!("cannot write {}: {e}", out.display());
                return INVARIANT_FAILURE;
            }
            println!("wrote {}", out.display());
            OK
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
