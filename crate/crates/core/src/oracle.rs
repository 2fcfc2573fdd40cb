//! Ground truth independent of the search: a schedule validator, an
//! exhaustive optimum for small instances, and a seeded instance generator.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Activity, ActivityId, InstanceError, RcpspInstance};

/// Start time per activity. Serialized as
/// `{"makespan": M, "starts": {"<activity id>": S_j, ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub makespan: u32,
    pub starts: BTreeMap<ActivityId, u32>,
}

impl Schedule {
    /// Schedule from dense start times; the makespan is the last entry.
    pub fn from_starts(starts: &[u32]) -> Self {
        Self {
            makespan: starts.last().copied().unwrap_or(0),
            starts: starts.iter().copied().enumerate().collect(),
        }
    }

    pub fn start(&self, j: ActivityId) -> Option<u32> {
        self.starts.get(&j).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    Precedence {
        pred: ActivityId,
        succ: ActivityId,
        pred_finish: u32,
        succ_start: u32,
    },
    Resource {
        time: u32,
        resource: usize,
        usage: u64,
        capacity: u32,
    },
    MakespanMismatch {
        stated: u32,
        finish_start: u32,
    },
    StartNotZero(u32),
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::Precedence { pred, succ, pred_finish, succ_start } => write!(
                f,
                "precedence: {succ} starts at {succ_start} before {pred} finishes at {pred_finish}"
            ),
            ScheduleViolation::Resource { time, resource, usage, capacity } => write!(
                f,
                "resource: usage {usage} of resource {resource} exceeds capacity {capacity} at t={time}"
            ),
            ScheduleViolation::MakespanMismatch { stated, finish_start } => write!(
                f,
                "makespan {stated} differs from the dummy finish start {finish_start}"
            ),
            ScheduleViolation::StartNotZero(s) => write!(f, "dummy start begins at {s}, expected 0"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("no start time for activity {0}")]
    MissingStart(ActivityId),
    #[error("start time given for unknown activity {0}")]
    UnknownActivity(ActivityId),
}

/// Checks precedence and, at every integer time, resource usage against
/// capacity. Returns every violation found; an empty list means feasible.
pub fn validate_schedule(
    inst: &RcpspInstance,
    sched: &Schedule,
) -> Result<Vec<ScheduleViolation>, ScheduleError> {
    let n = inst.num_activities();
    if let Some(&j) = sched.starts.keys().find(|&&j| j >= n) {
        return Err(ScheduleError::UnknownActivity(j));
    }
    let starts: Vec<u32> = (0..n)
        .map(|j| sched.start(j).ok_or(ScheduleError::MissingStart(j)))
        .collect::<Result<_, _>>()?;
    let finish_of = |j: ActivityId| starts[j] as u64 + inst.duration(j) as u64;

    let mut out = Vec::new();
    if starts[0] != 0 {
        out.push(ScheduleViolation::StartNotZero(starts[0]));
    }
    let finish_start = starts[inst.finish()];
    if sched.makespan != finish_start {
        out.push(ScheduleViolation::MakespanMismatch {
            stated: sched.makespan,
            finish_start,
        });
    }
    for &(i, j) in inst.precedence() {
        if (starts[j] as u64) < finish_of(i) {
            out.push(ScheduleViolation::Precedence {
                pred: i,
                succ: j,
                pred_finish: finish_of(i) as u32,
                succ_start: starts[j],
            });
        }
    }

    let horizon = (0..n).map(finish_of).max().unwrap_or(0);
    for r in 0..inst.num_resources() {
        let mut usage = vec![0u64; horizon as usize];
        for j in 0..n {
            let u = inst.demand(j, r) as u64;
            if u > 0 {
                for slot in &mut usage[starts[j] as usize..finish_of(j) as usize] {
                    *slot += u;
                }
            }
        }
        let cap = inst.capacities()[r];
        for (t, &used) in usage.iter().enumerate() {
            if used > cap as u64 {
                out.push(ScheduleViolation::Resource {
                    time: t as u32,
                    resource: r,
                    usage: used,
                    capacity: cap,
                });
            }
        }
    }
    Ok(out)
}

pub const DEFAULT_ORACLE_CAP: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {real} real activities, above the oracle cap of {cap}")]
    TooLarge { real: usize, cap: usize },
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

/// Exact optimum with [`DEFAULT_ORACLE_CAP`].
pub fn brute_force_optimum(inst: &RcpspInstance) -> Result<(u32, Schedule), OracleError> {
    brute_force_optimum_capped(inst, DEFAULT_ORACLE_CAP)
}

/// Enumerates every precedence-feasible activity list, decodes each with the
/// serial generation scheme (earliest precedence- and resource-feasible
/// start), and keeps the shortest. Lists whose partial makespan already
/// reaches the incumbent are cut.
pub fn brute_force_optimum_capped(
    inst: &RcpspInstance,
    cap: usize,
) -> Result<(u32, Schedule), OracleError> {
    if inst.num_real() > cap {
        return Err(OracleError::TooLarge {
            real: inst.num_real(),
            cap,
        });
    }
    inst.validate()
        .map_err(|v| OracleError::Invalid(InstanceError::Invalid(v)))?;

    let n = inst.num_activities();
    let horizon = inst.total_duration() as usize;
    let mut sgs = Sgs {
        inst,
        placed: vec![false; n],
        starts: vec![0; n],
        usage: vec![vec![0; horizon + 1]; inst.num_resources()],
        best: u32::MAX,
        best_starts: Vec::new(),
    };
    sgs.search(0, 0);
    let makespan = sgs.best;
    Ok((makespan, Schedule::from_starts(&sgs.best_starts)))
}

struct Sgs<'a> {
    inst: &'a RcpspInstance,
    placed: Vec<bool>,
    starts: Vec<u32>,
    usage: Vec<Vec<u32>>,
    best: u32,
    best_starts: Vec<u32>,
}

impl Sgs<'_> {
    fn search(&mut self, depth: usize, partial: u32) {
        let n = self.inst.num_activities();
        if depth == n {
            if partial < self.best {
                self.best = partial;
                self.best_starts = self.starts.clone();
            }
            return;
        }
        for j in 0..n {
            if self.placed[j] || !self.inst.preds(j).iter().all(|&i| self.placed[i]) {
                continue;
            }
            let start = self.earliest_start(j);
            let finish = start + self.inst.duration(j);
            let partial = partial.max(finish);
            if partial >= self.best {
                continue;
            }
            self.book(j, start, true);
            self.search(depth + 1, partial);
            self.book(j, start, false);
        }
    }

    fn earliest_start(&self, j: ActivityId) -> u32 {
        let inst = self.inst;
        let mut t = inst
            .preds(j)
            .iter()
            .map(|&i| self.starts[i] + inst.duration(i))
            .max()
            .unwrap_or(0);
        let dur = inst.duration(j);
        'shift: loop {
            for r in 0..inst.num_resources() {
                let u = inst.demand(j, r);
                if u == 0 {
                    continue;
                }
                let cap = inst.capacities()[r];
                if let Some(q) = (t..t + dur).find(|&q| self.usage[r][q as usize] + u > cap) {
                    t = q + 1;
                    continue 'shift;
                }
            }
            return t;
        }
    }

    fn book(&mut self, j: ActivityId, start: u32, place: bool) {
        self.placed[j] = place;
        self.starts[j] = if place { start } else { 0 };
        for r in 0..self.inst.num_resources() {
            let u = self.inst.demand(j, r);
            for q in start..start + self.inst.duration(j) {
                if place {
                    self.usage[r][q as usize] += u;
                } else {
                    self.usage[r][q as usize] -= u;
                }
            }
        }
    }
}

const EDGE_PROBABILITY: f64 = 0.3;
const MAX_DEMAND: u32 = 4;

/// Seeded random instance: a DAG over `n_activities` real activities (arcs
/// only from lower to higher id) closed with dummies, durations in
/// `0..=max_duration`, and each demand positive with probability
/// `demand_density`. Capacities are at least the largest single demand.
pub fn random_instance(
    seed: u64,
    n_activities: usize,
    n_resources: usize,
    max_duration: u32,
    demand_density: f64,
) -> RcpspInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n_activities + 2;
    let mut acts = Vec::with_capacity(total);
    acts.push(Activity::new(0, 0, vec![0; n_resources]));
    for j in 1..=n_activities {
        let duration = rng.gen_range(0..=max_duration);
        let demands = (0..n_resources)
            .map(|_| {
                if rng.gen_bool(demand_density.clamp(0.0, 1.0)) {
                    rng.gen_range(1..=MAX_DEMAND)
                } else {
                    0
                }
            })
            .collect();
        acts.push(Activity::new(j, duration, demands));
    }
    acts.push(Activity::new(total - 1, 0, vec![0; n_resources]));

    let mut arcs = Vec::new();
    for i in 1..=n_activities {
        for j in i + 1..=n_activities {
            if rng.gen_bool(EDGE_PROBABILITY) {
                arcs.push((i, j));
            }
        }
    }
    let capacities = (0..n_resources)
        .map(|r| {
            let peak = acts.iter().map(|a| a.demands[r]).max().unwrap_or(0).max(1);
            peak + rng.gen_range(0..=MAX_DEMAND)
        })
        .collect();
    RcpspInstance::new(acts, arcs, capacities).close_dummies()
}
