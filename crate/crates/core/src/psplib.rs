//! PSPLIB single-mode `.sm` files and optimum tables.
//!
//! Jobs are renumbered from PSPLIB's 1-based ids to 0-based activity ids, so
//! the supersource becomes activity 0 and the supersink activity `n + 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{Activity, RcpspInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    /// 1-based; 0 when the problem is not tied to a single line.
    pub line: usize,
    pub reason: String,
}

fn err(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError {
        line,
        reason: reason.into(),
    }
}

fn ints(line: &str, lineno: usize) -> Result<Vec<u64>, ParseError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| err(lineno, format!("expected an integer, found `{tok}`")))
        })
        .collect()
}

/// Integer after the colon of a `key : value` header line.
fn header_value(line: &str, lineno: usize) -> Result<u64, ParseError> {
    let (_, rest) = line
        .split_once(':')
        .ok_or_else(|| err(lineno, "expected `key : value`"))?;
    rest.split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| err(lineno, "missing numeric value"))
}

fn is_rule(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && (t.chars().all(|c| c == '*') || t.chars().all(|c| c == '-'))
}

/// `(1-based line number, text)`.
type Line<'a> = (usize, &'a str);

fn starts_with_ci(line: &str, prefix: &str) -> bool {
    let t = line.trim_start();
    t.len() >= prefix.len() && t.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

/// Lines of the section whose title starts with `title`, up to the next rule
/// line, skipping the column header and any dashed separator.
fn section<'a>(lines: &[Line<'a>], title: &str) -> Result<(usize, Vec<Line<'a>>), ParseError> {
    let pos = lines
        .iter()
        .position(|(_, l)| starts_with_ci(l, title))
        .ok_or_else(|| err(0, format!("missing section `{title}`")))?;
    let body = lines[pos + 1..]
        .iter()
        .skip(1)
        .take_while(|(_, l)| !l.trim_start().starts_with('*'))
        .filter(|(_, l)| !l.trim().is_empty() && !is_rule(l))
        .copied()
        .collect();
    Ok((lines[pos].0, body))
}

/// Parses a single-mode PSPLIB file.
pub fn parse_sm(text: &str) -> Result<RcpspInstance, ParseError> {
    let lines: Vec<Line> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let find = |prefix: &str| {
        lines
            .iter()
            .find(|(_, l)| starts_with_ci(l, prefix))
            .copied()
    };

    let (jl, jobs_line) =
        find("jobs").ok_or_else(|| err(0, "missing `jobs (incl. supersource/sink)` line"))?;
    let jobs = header_value(jobs_line, jl)? as usize;
    if jobs < 2 {
        return Err(err(jl, "need at least the supersource and supersink"));
    }
    let (rl, ren_line) =
        find("- renewable").ok_or_else(|| err(0, "missing renewable resource count"))?;
    let k = header_value(ren_line, rl)? as usize;
    for prefix in ["- nonrenewable", "- doubly constrained"] {
        if let Some((l, line)) = find(prefix) {
            if header_value(line, l)? != 0 {
                return Err(err(l, "only renewable resources are supported"));
            }
        }
    }

    let (_, prec) = section(&lines, "PRECEDENCE RELATIONS")?;
    if prec.len() != jobs {
        return Err(err(
            prec.last().map_or(0, |p| p.0),
            format!("expected {jobs} precedence rows, found {}", prec.len()),
        ));
    }
    let mut arcs = Vec::new();
    for (idx, &(l, row)) in prec.iter().enumerate() {
        let v = ints(row, l)?;
        if v.len() < 3 {
            return Err(err(l, "precedence row needs job, #modes and #successors"));
        }
        if v[0] as usize != idx + 1 {
            return Err(err(l, format!("expected job {}, found {}", idx + 1, v[0])));
        }
        if v[1] != 1 {
            return Err(err(l, "multi-mode unsupported"));
        }
        let nsucc = v[2] as usize;
        if v.len() != 3 + nsucc {
            return Err(err(
                l,
                format!("declares {nsucc} successors but lists {}", v.len() - 3),
            ));
        }
        for &s in &v[3..] {
            if s == 0 || s as usize > jobs {
                return Err(err(l, format!("successor {s} out of range")));
            }
            arcs.push((idx, s as usize - 1));
        }
    }

    let (_, req) = section(&lines, "REQUESTS/DURATIONS")?;
    if req.len() != jobs {
        return Err(err(
            req.last().map_or(0, |p| p.0),
            format!("expected {jobs} request rows, found {}", req.len()),
        ));
    }
    let mut activities = Vec::with_capacity(jobs);
    for (idx, &(l, row)) in req.iter().enumerate() {
        let v = ints(row, l)?;
        if v.len() != 3 + k {
            return Err(err(
                l,
                format!("expected job, mode, duration and {k} demands"),
            ));
        }
        if v[0] as usize != idx + 1 {
            return Err(err(l, format!("expected job {}, found {}", idx + 1, v[0])));
        }
        if v[1] != 1 {
            return Err(err(l, "multi-mode unsupported"));
        }
        let to_u32 = |x: u64| u32::try_from(x).map_err(|_| err(l, "value out of range"));
        let demands = v[3..]
            .iter()
            .map(|&x| to_u32(x))
            .collect::<Result<_, _>>()?;
        activities.push(Activity::new(idx, to_u32(v[2])?, demands));
    }

    let (al, avail) = section(&lines, "RESOURCEAVAILABILITIES")?;
    let &(l, row) = avail
        .first()
        .ok_or_else(|| err(al, "missing availability row"))?;
    let caps = ints(row, l)?;
    if caps.len() != k {
        return Err(err(
            l,
            format!("expected {k} capacities, found {}", caps.len()),
        ));
    }
    let capacities = caps
        .into_iter()
        .map(|c| u32::try_from(c).map_err(|_| err(l, "capacity out of range")))
        .collect::<Result<_, _>>()?;

    let inst = RcpspInstance::new(activities, arcs, capacities);
    if let Err(v) = inst.validate() {
        let reasons: Vec<String> = v.iter().map(ToString::to_string).collect();
        return Err(err(0, format!("invalid instance: {}", reasons.join("; "))));
    }
    Ok(inst)
}

/// Writes an instance in the PSPLIB single-mode layout.
pub fn write_sm(inst: &RcpspInstance) -> String {
    let rule = "*".repeat(72);
    let n = inst.num_activities();
    let k = inst.num_resources();
    let horizon = inst.total_duration();
    let mut s = String::new();
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(s, "file with basedata            : generated");
    let _ = writeln!(s, "initial value random generator: 0");
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(s, "projects                      :  1");
    let _ = writeln!(s, "jobs (incl. supersource/sink ):  {n}");
    let _ = writeln!(s, "horizon                       :  {horizon}");
    let _ = writeln!(s, "RESOURCES");
    let _ = writeln!(s, "  - renewable                 :  {k}   R");
    let _ = writeln!(s, "  - nonrenewable              :  0   N");
    let _ = writeln!(s, "  - doubly constrained        :  0   D");
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(s, "PROJECT INFORMATION:");
    let _ = writeln!(s, "pronr.  #jobs rel.date duedate tardcost  MPM-Time");
    let _ = writeln!(
        s,
        "    1  {:5}      0  {:6}        0  {:6}",
        inst.num_real(),
        horizon,
        horizon
    );
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(s, "PRECEDENCE RELATIONS:");
    let _ = writeln!(s, "jobnr.    #modes  #successors   successors");
    for j in 0..n {
        let succs = inst.succs(j);
        let _ = write!(s, "{:4}        1      {:5}       ", j + 1, succs.len());
        for &x in succs {
            let _ = write!(s, "{:4}", x + 1);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(s, "REQUESTS/DURATIONS:");
    let _ = write!(s, "jobnr. mode duration");
    for r in 0..k {
        let _ = write!(s, "  R{:2}", r + 1);
    }
    s.push('\n');
    let _ = writeln!(s, "{}", "-".repeat(72));
    for a in inst.activities() {
        let _ = write!(s, "{:4}      1  {:6}", a.id + 1, a.duration);
        for &u in &a.demands {
            let _ = write!(s, "  {:4}", u);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(s, "RESOURCEAVAILABILITIES:");
    for r in 0..k {
        let _ = write!(s, "  R{:2}", r + 1);
    }
    s.push('\n');
    for &c in inst.capacities() {
        let _ = write!(s, "  {:4}", c);
    }
    s.push('\n');
    let _ = writeln!(s, "{rule}");
    s
}

/// Published optimal makespans keyed by instance name, e.g. `j301_1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OptimumTable {
    entries: BTreeMap<String, u32>,
}

impl OptimumTable {
    pub fn get(&self, name: &str) -> Option<u32> {
        self.entries.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Parses a J30-style optimum listing. See [`parse_optima_for`].
pub fn parse_optima(text: &str) -> Result<OptimumTable, ParseError> {
    parse_optima_for(text, "j30")
}

/// Parses rows of `parameter-group instance makespan [extra columns]`;
/// lines that do not start with an integer are treated as header text.
/// Keys are `{set}{group}_{instance}`.
pub fn parse_optima_for(text: &str, set: &str) -> Result<OptimumTable, ParseError> {
    let mut entries = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut toks = line.split_whitespace();
        let Some(first) = toks.next() else { continue };
        let Ok(group) = first.parse::<u32>() else {
            continue;
        };
        let mut next_int = |what: &str| {
            toks.next()
                .and_then(|t| t.parse::<u32>().ok())
                .ok_or_else(|| err(lineno, format!("malformed row: missing {what}")))
        };
        let number = next_int("instance number")?;
        let makespan = next_int("makespan")?;
        if makespan == 0 {
            return Err(err(lineno, "makespan must be positive"));
        }
        let key = format!("{set}{group}_{number}");
        if entries.insert(key.clone(), makespan).is_some() {
            return Err(err(lineno, format!("duplicate entry {key}")));
        }
    }
    Ok(OptimumTable { entries })
}
