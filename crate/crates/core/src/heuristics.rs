//! Lower bounds on the remaining makespan of a timed state.

use std::fmt;
use std::str::FromStr;

use crate::instance::{ActivityId, InstanceError, RcpspInstance};
use crate::state::{Status, TimedState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HeuristicKind {
    CriticalPath,
    ResourceLoad,
    #[default]
    MaxOfBoth,
    /// Constant 0: turns A* into uniform-cost search.
    Zero,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 4] = [
        HeuristicKind::Zero,
        HeuristicKind::CriticalPath,
        HeuristicKind::ResourceLoad,
        HeuristicKind::MaxOfBoth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicKind::CriticalPath => "cp",
            HeuristicKind::ResourceLoad => "res",
            HeuristicKind::MaxOfBoth => "max",
            HeuristicKind::Zero => "zero",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cp" => Ok(HeuristicKind::CriticalPath),
            "res" => Ok(HeuristicKind::ResourceLoad),
            "max" => Ok(HeuristicKind::MaxOfBoth),
            "zero" => Ok(HeuristicKind::Zero),
            other => Err(format!(
                "unknown heuristic `{other}` (expected cp, res, max or zero)"
            )),
        }
    }
}

/// Longest residual precedence path to the dummy finish, propagating
/// residual earliest finish times along `topo`.
pub fn h_cp(inst: &RcpspInstance, topo: &[ActivityId], s: &TimedState) -> u32 {
    let mut scratch = vec![0u32; inst.num_activities()];
    h_cp_with(inst, topo, s, &mut scratch)
}

fn h_cp_with(inst: &RcpspInstance, topo: &[ActivityId], s: &TimedState, refs: &mut [u32]) -> u32 {
    for &j in topo {
        refs[j] = match s.status(j) {
            Status::Done => 0,
            Status::Executing(theta) => theta,
            Status::Unstarted => {
                let longest = inst.preds(j).iter().map(|&i| refs[i]).max().unwrap_or(0);
                longest + inst.duration(j)
            }
        };
    }
    refs[inst.finish()]
}

/// Remaining workload on the busiest resource divided by its capacity,
/// rounded up. Precedence is ignored.
pub fn h_res(inst: &RcpspInstance, s: &TimedState) -> u32 {
    let mut best = 0u64;
    for (r, &cap) in inst.capacities().iter().enumerate() {
        let mut load = 0u64;
        for (j, status) in s.statuses().enumerate() {
            let u = inst.demand(j, r) as u64;
            if u == 0 {
                continue;
            }
            load += u * match status {
                Status::Done => 0,
                Status::Executing(theta) => theta as u64,
                Status::Unstarted => inst.duration(j) as u64,
            };
        }
        if load > 0 {
            best = best.max(load.div_ceil(cap as u64));
        }
    }
    best as u32
}

pub fn h_max(inst: &RcpspInstance, topo: &[ActivityId], s: &TimedState) -> u32 {
    h_cp(inst, topo, s).max(h_res(inst, s))
}

/// Reuses the parent's value on zero-cost edges; `recompute` only runs when
/// time actually advanced.
pub fn cached_child_h(parent_h: u32, delta: u32, recompute: impl FnOnce() -> u32) -> u32 {
    if delta == 0 {
        parent_h
    } else {
        recompute()
    }
}

/// Like [`cached_child_h`] but always recomputes, returning
/// `Err(recomputed)` when a zero-cost edge would have reused a stale value.
pub fn cached_child_h_checked(
    parent_h: u32,
    delta: u32,
    recompute: impl FnOnce() -> u32,
) -> Result<u32, u32> {
    let fresh = recompute();
    if delta == 0 && fresh != parent_h {
        Err(fresh)
    } else {
        Ok(fresh)
    }
}

/// A heuristic bound to one instance, with its topological order computed once.
#[derive(Debug, Clone)]
pub struct Heuristic<'a> {
    inst: &'a RcpspInstance,
    topo: Vec<ActivityId>,
    kind: HeuristicKind,
}

impl<'a> Heuristic<'a> {
    pub fn new(inst: &'a RcpspInstance, kind: HeuristicKind) -> Result<Self, InstanceError> {
        Ok(Self {
            inst,
            topo: inst.topological_order()?,
            kind,
        })
    }

    pub fn kind(&self) -> HeuristicKind {
        self.kind
    }

    pub fn topo(&self) -> &[ActivityId] {
        &self.topo
    }

    pub fn eval(&self, s: &TimedState) -> u32 {
        match self.kind {
            HeuristicKind::Zero => 0,
            HeuristicKind::CriticalPath => h_cp(self.inst, &self.topo, s),
            HeuristicKind::ResourceLoad => h_res(self.inst, s),
            HeuristicKind::MaxOfBoth => h_max(self.inst, &self.topo, s),
        }
    }

    /// Evaluation reusing a caller-owned buffer of length `|A|`.
    pub fn eval_with(&self, s: &TimedState, scratch: &mut Vec<u32>) -> u32 {
        scratch.resize(self.inst.num_activities(), 0);
        match self.kind {
            HeuristicKind::Zero => 0,
            HeuristicKind::CriticalPath => h_cp_with(self.inst, &self.topo, s, scratch),
            HeuristicKind::ResourceLoad => h_res(self.inst, s),
            HeuristicKind::MaxOfBoth => {
                h_cp_with(self.inst, &self.topo, s, scratch).max(h_res(self.inst, s))
            }
        }
    }
}
