//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage/input error, 2 timeout, 3 infeasible,
//! 4 schedule violations, 5 instance above the oracle cap, 6 benchmark
//! makespan differs from the supplied optimum.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::heuristics::HeuristicKind;
use crate::instance::RcpspInstance;
use crate::mip::TimeIndexedModel;
use crate::net::TtpnrNet;
use crate::oracle::{self, OracleError, Schedule, ScheduleError};
use crate::psplib::{self, OptimumTable};
use crate::search::{solve, Budget, SolveOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VIOLATIONS: i32 = 4;
pub const EXIT_TOO_LARGE: i32 = 5;
pub const EXIT_MISMATCH: i32 = 6;

pub const DEFAULT_TIMEOUT_SECS: f64 = 300.0;

#[derive(Debug, Parser)]
#[command(
    name = "rcpsp",
    version,
    about = "Exact RCPSP solver over timed Petri net reachability graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one `.sm` instance to optimality.
    Solve {
        path: PathBuf,
        /// Wall-clock limit in seconds.
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
        timeout: f64,
        /// cp, res, max or zero.
        #[arg(long, default_value = "max")]
        heuristic: HeuristicKind,
        /// Write the schedule as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every `.sm` file in a directory and write one CSV row per instance.
    ///
    /// The summary reports the success rate (solved / total x 100) and the
    /// mean wall time over solved instances only.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
        timeout: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// PSPLIB optimum listing; solved makespans are checked against it.
        #[arg(long)]
        optima: Option<PathBuf>,
        #[arg(long, default_value = "max")]
        heuristic: HeuristicKind,
        /// Instances solved in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write the time-indexed MIP model in LP format.
    ExportMip {
        path: PathBuf,
        #[arg(long, default_value = "model.lp")]
        out: PathBuf,
    },
    /// Check a schedule JSON file against an instance.
    Validate { path: PathBuf, schedule: PathBuf },
    /// Exhaustive optimum for small instances.
    Oracle {
        path: PathBuf,
        #[arg(long, default_value_t = oracle::DEFAULT_ORACLE_CAP)]
        cap: usize,
    },
    /// Print the net in Graphviz format.
    Dot { path: PathBuf },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Solve {
            path,
            timeout,
            heuristic,
            out,
        } => cmd_solve(&path, timeout, heuristic, out.as_deref()),
        Command::Bench {
            dir,
            timeout,
            csv,
            optima,
            heuristic,
            jobs,
        } => cmd_bench(
            &dir,
            timeout,
            csv.as_deref(),
            optima.as_deref(),
            heuristic,
            jobs,
        ),
        Command::ExportMip { path, out } => cmd_export_mip(&path, &out),
        Command::Validate { path, schedule } => cmd_validate(&path, &schedule),
        Command::Oracle { path, cap } => cmd_oracle(&path, cap),
        Command::Dot { path } => match load_instance(&path) {
            Ok(inst) => {
                print!("{}", TtpnrNet::build_unchecked(&inst).to_dot());
                EXIT_OK
            }
            Err(e) => fail(&e),
        },
    }
}

fn fail(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

/// Reads and parses a `.sm` file; errors carry the path and line.
pub fn load_instance(path: &Path) -> Result<RcpspInstance, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    psplib::parse_sm(&text).map_err(|e| format!("{}:{e}", path.display()))
}

fn timeout_budget(secs: f64) -> Result<Budget, String> {
    if !(secs.is_finite() && secs > 0.0) {
        return Err(format!(
            "timeout must be a positive number of seconds, got {secs}"
        ));
    }
    Ok(Budget::with_timeout(Duration::from_secs_f64(secs)))
}

pub fn cmd_solve(path: &Path, timeout: f64, heuristic: HeuristicKind, out: Option<&Path>) -> i32 {
    let budget = match timeout_budget(timeout) {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let inst = match load_instance(path) {
        Ok(i) => i,
        Err(e) => return fail(&e),
    };
    let net = TtpnrNet::build(&inst).expect("parsed instances are valid");
    let outcome = solve(&net, &inst, heuristic, &budget);
    let stats = outcome.stats().to_json();
    match &outcome {
        SolveOutcome::Solved {
            schedule, makespan, ..
        } => {
            println!("makespan {makespan}");
            println!("stats {stats}");
            if let Some(out) = out {
                if let Err(e) = fs::write(out, schedule.to_json()) {
                    return fail(&format!("{}: {e}", out.display()));
                }
            }
            EXIT_OK
        }
        SolveOutcome::TimedOut { .. } => {
            println!("timeout");
            println!("stats {stats}");
            EXIT_TIMEOUT
        }
        SolveOutcome::Infeasible { .. } => {
            println!("infeasible");
            println!("stats {stats}");
            EXIT_INFEASIBLE
        }
    }
}

/// One CSV row of a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    /// `solved`, `timeout`, `infeasible` or `error`.
    pub outcome: String,
    pub makespan: Option<u32>,
    pub wall_time_s: f64,
    pub expanded: u64,
    pub generated: u64,
    pub duplicates: u64,
    pub cache_hits: u64,
    pub heuristic: String,
}

impl BenchRecord {
    pub fn is_solved(&self) -> bool {
        self.outcome == "solved"
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSummary {
    pub total: usize,
    pub solved: usize,
    pub success_rate: f64,
    /// Mean over solved instances; `None` when nothing was solved.
    pub mean_time_s: Option<f64>,
}

pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let total = records.len();
    let solved: Vec<_> = records.iter().filter(|r| r.is_solved()).collect();
    let success_rate = if total == 0 {
        0.0
    } else {
        solved.len() as f64 / total as f64 * 100.0
    };
    let mean_time_s = (!solved.is_empty())
        .then(|| solved.iter().map(|r| r.wall_time_s).sum::<f64>() / solved.len() as f64);
    BenchSummary {
        total,
        solved: solved.len(),
        success_rate,
        mean_time_s,
    }
}

/// `.sm` files of `dir`, in natural name order (`j301_2` before `j301_10`).
pub fn list_instances(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("sm")))
        .collect();
    files.sort_by_cached_key(|p| natural_key(&instance_name(p)));
    Ok(files)
}

fn natural_key(s: &str) -> Vec<(String, u64)> {
    let mut out = Vec::new();
    let mut text = String::new();
    let mut digits = String::new();
    for c in s.chars() {
        if c.is_ascii_digit() {
            digits.push(c);
        } else {
            if !digits.is_empty() {
                out.push((
                    std::mem::take(&mut text),
                    digits.parse().unwrap_or(u64::MAX),
                ));
                digits.clear();
            }
            text.push(c);
        }
    }
    out.push((text, digits.parse().unwrap_or(0)));
    out
}

pub fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Solves each file independently; results come back in input order.
pub fn run_bench(
    files: &[PathBuf],
    budget: &Budget,
    heuristic: HeuristicKind,
    jobs: usize,
) -> Vec<BenchRecord> {
    let one = |path: &PathBuf| bench_one(path, budget, heuristic);
    if jobs <= 1 {
        return files.iter().map(one).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| files.par_iter().map(one).collect()),
        Err(_) => files.iter().map(one).collect(),
    }
}

fn bench_one(path: &Path, budget: &Budget, heuristic: HeuristicKind) -> BenchRecord {
    let mut rec = BenchRecord {
        instance: instance_name(path),
        outcome: "error".into(),
        makespan: None,
        wall_time_s: 0.0,
        expanded: 0,
        generated: 0,
        duplicates: 0,
        cache_hits: 0,
        heuristic: heuristic.to_string(),
    };
    let inst = match load_instance(path) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return rec;
        }
    };
    let net = TtpnrNet::build(&inst).expect("parsed instances are valid");
    let outcome = solve(&net, &inst, heuristic, budget);
    let stats = outcome.stats();
    rec.outcome = outcome.label().into();
    rec.makespan = outcome.makespan();
    rec.wall_time_s = stats.wall_time.as_secs_f64();
    rec.expanded = stats.expanded;
    rec.generated = stats.generated;
    rec.duplicates = stats.duplicates_pruned;
    rec.cache_hits = stats.zero_cost_cache_hits;
    rec
}

/// Solved records whose makespan differs from the table, as
/// `(instance, found, expected)`.
pub fn optimum_mismatches(
    records: &[BenchRecord],
    optima: &OptimumTable,
) -> Vec<(String, u32, u32)> {
    records
        .iter()
        .filter_map(|r| {
            let found = r.makespan?;
            let expected = optima.get(&r.instance)?;
            (found != expected).then(|| (r.instance.clone(), found, expected))
        })
        .collect()
}

pub fn write_csv(records: &[BenchRecord], out: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_bench(
    dir: &Path,
    timeout: f64,
    csv_out: Option<&Path>,
    optima: Option<&Path>,
    heuristic: HeuristicKind,
    jobs: usize,
) -> i32 {
    let budget = match timeout_budget(timeout) {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let files = match list_instances(dir) {
        Ok(f) => f,
        Err(e) => return fail(&format!("{}: {e}", dir.display())),
    };
    let optima = match optima.map(|p| {
        fs::read_to_string(p)
            .map_err(|e| format!("{}: {e}", p.display()))
            .and_then(|t| psplib::parse_optima(&t).map_err(|e| format!("{}:{e}", p.display())))
    }) {
        Some(Err(e)) => return fail(&e),
        Some(Ok(t)) => Some(t),
        None => None,
    };

    let records = run_bench(&files, &budget, heuristic, jobs.max(1));
    let written = match csv_out {
        Some(p) => fs::File::create(p)
            .map_err(csv::Error::from)
            .and_then(|f| write_csv(&records, f)),
        None => write_csv(&records, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        return fail(&format!("writing csv: {e}"));
    }

    let s = summarize(&records);
    let mean = s
        .mean_time_s
        .map_or_else(|| "n/a".to_string(), |m| format!("{m:.3}"));
    let mut summary = std::io::stderr().lock();
    let _ = writeln!(
        summary,
        "solved {}/{} success_rate {:.2}% mean_time_s {mean}",
        s.solved, s.total, s.success_rate
    );

    if let Some(table) = optima {
        let bad = optimum_mismatches(&records, &table);
        for (name, found, expected) in &bad {
            let _ = writeln!(
                summary,
                "mismatch {name}: found {found}, optimum {expected}"
            );
        }
        if !bad.is_empty() {
            return EXIT_MISMATCH;
        }
    }
    EXIT_OK
}

pub fn cmd_export_mip(path: &Path, out: &Path) -> i32 {
    let inst = match load_instance(path) {
        Ok(i) => i,
        Err(e) => return fail(&e),
    };
    let lp = TimeIndexedModel::build(&inst).write_lp();
    match fs::write(out, lp) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(&format!("{}: {e}", out.display())),
    }
}

pub fn cmd_validate(path: &Path, schedule: &Path) -> i32 {
    let inst = match load_instance(path) {
        Ok(i) => i,
        Err(e) => return fail(&e),
    };
    let sched = match fs::read_to_string(schedule)
        .map_err(|e| e.to_string())
        .and_then(|t| Schedule::from_json(&t).map_err(|e| e.to_string()))
    {
        Ok(s) => s,
        Err(e) => return fail(&format!("{}: {e}", schedule.display())),
    };
    match oracle::validate_schedule(&inst, &sched) {
        Ok(v) if v.is_empty() => {
            println!("feasible");
            EXIT_OK
        }
        Ok(v) => {
            for violation in v {
                println!("{violation}");
            }
            EXIT_VIOLATIONS
        }
        Err(e @ (ScheduleError::MissingStart(_) | ScheduleError::UnknownActivity(_))) => {
            fail(&e.to_string())
        }
    }
}

pub fn cmd_oracle(path: &Path, cap: usize) -> i32 {
    let inst = match load_instance(path) {
        Ok(i) => i,
        Err(e) => return fail(&e),
    };
    match oracle::brute_force_optimum_capped(&inst, cap) {
        Ok((makespan, witness)) => {
            println!("optimum {makespan}");
            println!(
                "{}",
                serde_json::to_string(&witness).expect("schedule serializes")
            );
            EXIT_OK
        }
        Err(e @ OracleError::TooLarge { .. }) => {
            eprintln!("refused: {e}");
            EXIT_TOO_LARGE
        }
        Err(e) => fail(&e.to_string()),
    }
}
