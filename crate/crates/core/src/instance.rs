//! RCPSP instance model.
//!
//! Activities are densely indexed `0..=n+1`; `0` is the dummy start and
//! `n + 1` the dummy finish. Precedence arcs are stored as an ordered set of
//! `(pred, succ)` pairs, so two instances with the same arcs compare equal
//! regardless of the order the arcs were supplied in.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub type ActivityId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub id: ActivityId,
    pub duration: u32,
    /// One entry per renewable resource type.
    pub demands: Vec<u32>,
}

impl Activity {
    pub fn new(id: ActivityId, duration: u32, demands: Vec<u32>) -> Self {
        Self {
            id,
            duration,
            demands,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcpspInstance {
    activities: Vec<Activity>,
    precedence: BTreeSet<(ActivityId, ActivityId)>,
    capacities: Vec<u32>,
    preds: Vec<Vec<ActivityId>>,
    succs: Vec<Vec<ActivityId>>,
}

/// A violated structural invariant, as reported by [`RcpspInstance::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooFewActivities(usize),
    IdMismatch {
        position: usize,
        id: ActivityId,
    },
    DemandLength {
        activity: ActivityId,
        expected: usize,
        found: usize,
    },
    DummyNotEmpty(ActivityId),
    NonPositiveCapacity(usize),
    DemandExceedsCapacity {
        activity: ActivityId,
        resource: usize,
        demand: u32,
        capacity: u32,
    },
    UnknownActivity(ActivityId, ActivityId),
    SelfLoop(ActivityId),
    EdgeIntoStart(ActivityId),
    EdgeOutOfFinish(ActivityId),
    Cycle(Vec<ActivityId>),
    UnreachableFromStart(ActivityId),
    CannotReachFinish(ActivityId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewActivities(n) => {
                write!(f, "instance needs dummy start and finish, found {n} activities")
            }
            Violation::IdMismatch { position, id } => {
                write!(f, "activity at position {position} carries id {id}")
            }
            Violation::DemandLength { activity, expected, found } => write!(
                f,
                "activity {activity} lists {found} demands, expected {expected}"
            ),
            Violation::DummyNotEmpty(j) => {
                write!(f, "dummy activity {j} has nonzero duration or demand")
            }
            Violation::NonPositiveCapacity(r) => write!(f, "resource {r} has zero capacity"),
            Violation::DemandExceedsCapacity { activity, resource, demand, capacity } => write!(
                f,
                "demand exceeds capacity: activity {activity} needs {demand} of resource {resource} (capacity {capacity})"
            ),
            Violation::UnknownActivity(i, j) => write!(f, "arc ({i}, {j}) references an unknown activity"),
            Violation::SelfLoop(j) => write!(f, "self-loop at {j}"),
            Violation::EdgeIntoStart(i) => write!(f, "arc ({i}, 0) enters the dummy start"),
            Violation::EdgeOutOfFinish(j) => write!(f, "arc leaves the dummy finish towards {j}"),
            Violation::Cycle(c) => write!(f, "precedence cycle {c:?}"),
            Violation::UnreachableFromStart(j) => {
                write!(f, "activity {j} is not reachable from the dummy start")
            }
            Violation::CannotReachFinish(j) => {
                write!(f, "activity {j} does not reach the dummy finish")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("precedence graph contains a cycle through {0:?}")]
    Cycle(Vec<ActivityId>),
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl RcpspInstance {
    /// Assembles an instance without checking it. Arcs referencing activities
    /// outside the id range are kept (and reported by [`validate`](Self::validate))
    /// but left out of the adjacency lists.
    pub fn new(
        activities: Vec<Activity>,
        precedence: impl IntoIterator<Item = (ActivityId, ActivityId)>,
        capacities: Vec<u32>,
    ) -> Self {
        let precedence: BTreeSet<_> = precedence.into_iter().collect();
        let n = activities.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(i, j) in &precedence {
            if i < n && j < n {
                succs[i].push(j);
                preds[j].push(i);
            }
        }
        for p in &mut preds {
            p.sort_unstable();
        }
        Self {
            activities,
            precedence,
            capacities,
            preds,
            succs,
        }
    }

    /// Builds and validates in one step.
    pub fn try_new(
        activities: Vec<Activity>,
        precedence: impl IntoIterator<Item = (ActivityId, ActivityId)>,
        capacities: Vec<u32>,
    ) -> Result<Self, InstanceError> {
        let inst = Self::new(activities, precedence, capacities);
        inst.validate().map_err(InstanceError::Invalid)?;
        Ok(inst)
    }

    pub fn activities(&self) -> &[Activity] {
        &self.activities
    }

    pub fn activity(&self, j: ActivityId) -> &Activity {
        &self.activities[j]
    }

    pub fn precedence(&self) -> &BTreeSet<(ActivityId, ActivityId)> {
        &self.precedence
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn num_activities(&self) -> usize {
        self.activities.len()
    }

    /// Number of real (non-dummy) activities.
    pub fn num_real(&self) -> usize {
        self.activities.len().saturating_sub(2)
    }

    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn start(&self) -> ActivityId {
        0
    }

    pub fn finish(&self) -> ActivityId {
        self.activities.len() - 1
    }

    pub fn duration(&self, j: ActivityId) -> u32 {
        self.activities[j].duration
    }

    pub fn demand(&self, j: ActivityId, r: usize) -> u32 {
        self.activities[j].demands[r]
    }

    /// Immediate predecessors, ascending.
    pub fn preds(&self, j: ActivityId) -> &[ActivityId] {
        &self.preds[j]
    }

    /// Immediate successors, ascending.
    pub fn succs(&self, j: ActivityId) -> &[ActivityId] {
        &self.succs[j]
    }

    pub fn total_duration(&self) -> u64 {
        self.activities.iter().map(|a| a.duration as u64).sum()
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let n = self.activities.len();
        if n < 2 {
            out.push(Violation::TooFewActivities(n));
            return Err(out);
        }
        let k = self.capacities.len();
        let finish = n - 1;

        for (pos, a) in self.activities.iter().enumerate() {
            if a.id != pos {
                out.push(Violation::IdMismatch {
                    position: pos,
                    id: a.id,
                });
            }
            if a.demands.len() != k {
                out.push(Violation::DemandLength {
                    activity: pos,
                    expected: k,
                    found: a.demands.len(),
                });
            }
        }
        for j in [0, finish] {
            let a = &self.activities[j];
            if a.duration != 0 || a.demands.iter().any(|&u| u != 0) {
                out.push(Violation::DummyNotEmpty(j));
            }
        }
        for (r, &c) in self.capacities.iter().enumerate() {
            if c == 0 {
                out.push(Violation::NonPositiveCapacity(r));
            }
        }
        for a in &self.activities {
            for (r, (&u, &c)) in a.demands.iter().zip(&self.capacities).enumerate() {
                if u > c {
                    out.push(Violation::DemandExceedsCapacity {
                        activity: a.id,
                        resource: r,
                        demand: u,
                        capacity: c,
                    });
                }
            }
        }

        for &(i, j) in &self.precedence {
            if i >= n || j >= n {
                out.push(Violation::UnknownActivity(i, j));
            } else if i == j {
                out.push(Violation::SelfLoop(i));
            } else {
                if j == 0 {
                    out.push(Violation::EdgeIntoStart(i));
                }
                if i == finish {
                    out.push(Violation::EdgeOutOfFinish(j));
                }
            }
        }

        if let Err(InstanceError::Cycle(c)) = self.topological_order() {
            out.push(Violation::Cycle(c));
        }

        let from_start = self.reachable(0, |j| self.succs(j));
        let to_finish = self.reachable(finish, |j| self.preds(j));
        out.extend(
            (1..n)
                .filter(|&j| !from_start[j])
                .map(Violation::UnreachableFromStart),
        );
        out.extend(
            (0..finish)
                .filter(|&j| !to_finish[j])
                .map(Violation::CannotReachFinish),
        );

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn reachable<'a>(
        &'a self,
        from: ActivityId,
        next: impl Fn(ActivityId) -> &'a [ActivityId],
    ) -> Vec<bool> {
        let mut seen = vec![false; self.activities.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(j) = stack.pop() {
            for &k in next(j) {
                if k != j && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen
    }

    /// Connects sourceless activities to the dummy start and sinkless ones to
    /// the dummy finish. Idempotent.
    pub fn close_dummies(&self) -> Self {
        let n = self.activities.len();
        if n < 2 {
            return self.clone();
        }
        let finish = n - 1;
        let mut arcs = self.precedence.clone();
        for j in 1..finish {
            if self.preds[j].iter().all(|&i| i == j) {
                arcs.insert((0, j));
            }
            if self.succs[j].iter().all(|&k| k == j) {
                arcs.insert((j, finish));
            }
        }
        if !arcs.iter().any(|&(_, j)| j == finish) {
            arcs.insert((0, finish));
        }
        Self::new(self.activities.clone(), arcs, self.capacities.clone())
    }

    /// Kahn's algorithm with a FIFO queue: sources are seeded in ascending id
    /// order and successors are released in ascending id order.
    pub fn topological_order(&self) -> Result<Vec<ActivityId>, InstanceError> {
        let n = self.activities.len();
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut queue: VecDeque<ActivityId> = (0..n).filter(|&j| indeg[j] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(j) = queue.pop_front() {
            order.push(j);
            for &k in &self.succs[j] {
                indeg[k] -= 1;
                if indeg[k] == 0 {
                    queue.push_back(k);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(InstanceError::Cycle(self.find_cycle(&indeg)))
        }
    }

    /// Walks predecessors among the nodes Kahn could not release; every such
    /// node has a remaining predecessor, so the walk must revisit a node.
    fn find_cycle(&self, indeg: &[usize]) -> Vec<ActivityId> {
        let Some(mut j) = (0..indeg.len()).find(|&j| indeg[j] > 0) else {
            return Vec::new();
        };
        let mut pos = vec![usize::MAX; indeg.len()];
        let mut walk = Vec::new();
        while pos[j] == usize::MAX {
            pos[j] = walk.len();
            walk.push(j);
            j = *self.preds[j]
                .iter()
                .find(|&&i| indeg[i] > 0)
                .expect("unreleased node keeps an unreleased predecessor");
        }
        let mut cycle = walk.split_off(pos[j]);
        cycle.reverse();
        cycle
    }
}
