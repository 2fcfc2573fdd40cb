//! A* over the reachability graph of the net.
//!
//! Open nodes are ordered by minimal `f = g + h`, then maximal `g`, then most
//! finished activities, then most executing activities, then insertion order.
//! Every state has at most one live node: a cheaper path to a state that is
//! still open replaces the old node (which is left in the heap and skipped on
//! pop), and a path to an already expanded state is dropped.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::hash::BuildHasher;
use std::time::{Duration, Instant};

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;

use crate::heuristics::{cached_child_h, cached_child_h_checked, Heuristic, HeuristicKind};
use crate::instance::RcpspInstance;
use crate::net::{TransitionId, TtpnrNet};
use crate::oracle::Schedule;
use crate::state::TimedState;

pub type NodeId = u32;

/// Expansions between two wall-clock checks.
const CLOCK_CHECK_INTERVAL: u64 = 1024;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Budget {
    pub timeout: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn with_timeout(timeout: Duration) -> Self {
        Self {
            timeout: Some(timeout),
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub budget: Budget,
    /// Recompute the heuristic on zero-cost edges too and count disagreements
    /// with the cached parent value in [`SearchStats::cache_mismatches`].
    pub verify_cache: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub duplicates_pruned: u64,
    pub zero_cost_cache_hits: u64,
    pub peak_open: u64,
    pub peak_closed: u64,
    /// Paths reaching an already expanded state with strictly lower `g`.
    /// Stays zero under a consistent heuristic.
    pub reopen_violations: u64,
    pub cache_mismatches: u64,
    pub wall_time: Duration,
}

impl SearchStats {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "expanded": self.expanded,
            "generated": self.generated,
            "duplicates_pruned": self.duplicates_pruned,
            "zero_cost_cache_hits": self.zero_cost_cache_hits,
            "peak_open": self.peak_open,
            "peak_closed": self.peak_closed,
            "reopen_violations": self.reopen_violations,
            "cache_mismatches": self.cache_mismatches,
            "wall_time_s": self.wall_time.as_secs_f64(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved {
        schedule: Schedule,
        makespan: u32,
        stats: SearchStats,
    },
    TimedOut {
        stats: SearchStats,
    },
    Infeasible {
        stats: SearchStats,
    },
}

impl SolveOutcome {
    pub fn stats(&self) -> &SearchStats {
        match self {
            SolveOutcome::Solved { stats, .. }
            | SolveOutcome::TimedOut { stats }
            | SolveOutcome::Infeasible { stats } => stats,
        }
    }

    pub fn makespan(&self) -> Option<u32> {
        match self {
            SolveOutcome::Solved { makespan, .. } => Some(*makespan),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Solved { .. } => "solved",
            SolveOutcome::TimedOut { .. } => "timeout",
            SolveOutcome::Infeasible { .. } => "infeasible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state: TimedState,
    pub g: u32,
    pub h: u32,
    pub fired: Option<TransitionId>,
    pub parent: Option<NodeId>,
    pub finished_count: u32,
    pub active_count: u32,
    pub seq: u64,
    hash: u64,
    closed: bool,
    stale: bool,
}

impl SearchNode {
    pub fn f(&self) -> u32 {
        self.g + self.h
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct OpenEntry {
    f: u32,
    g: u32,
    finished: u32,
    active: u32,
    seq: u64,
    id: NodeId,
}

impl OpenEntry {
    fn priority(&self) -> (Reverse<u32>, u32, u32, u32, Reverse<u64>) {
        (
            Reverse(self.f),
            self.g,
            self.finished,
            self.active,
            Reverse(self.seq),
        )
    }
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority().cmp(&other.priority())
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of one [`Search::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Expanded(NodeId),
    Goal(NodeId),
    Exhausted,
}

/// Incremental A* driver; [`solve`] and [`expand_trace`] wrap it.
pub struct Search<'a> {
    net: &'a TtpnrNet,
    heuristic: Heuristic<'a>,
    verify_cache: bool,
    nodes: Vec<SearchNode>,
    open: BinaryHeap<OpenEntry>,
    live_open: u64,
    seen: HashTable<NodeId>,
    hasher: FxBuildHasher,
    scratch: Vec<u32>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    /// Fails only when the precedence graph has a cycle.
    pub fn new(
        net: &'a TtpnrNet,
        inst: &'a RcpspInstance,
        kind: HeuristicKind,
        verify_cache: bool,
    ) -> Result<Self, crate::instance::InstanceError> {
        let heuristic = Heuristic::new(inst, kind)?;
        let mut search = Self {
            net,
            heuristic,
            verify_cache,
            nodes: Vec::new(),
            open: BinaryHeap::new(),
            live_open: 0,
            seen: HashTable::new(),
            hasher: FxBuildHasher,
            scratch: Vec::new(),
            stats: SearchStats::default(),
        };
        let root = TimedState::initial(net);
        let h = search.heuristic.eval_with(&root, &mut search.scratch);
        search.push(root, 0, h, None, None);
        Ok(search)
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id as usize]
    }

    fn push(
        &mut self,
        state: TimedState,
        g: u32,
        h: u32,
        fired: Option<TransitionId>,
        parent: Option<NodeId>,
    ) {
        let hash = self.hasher.hash_one(&state);
        let nodes = &mut self.nodes;
        let existing = self
            .seen
            .find(hash, |&id| nodes[id as usize].state == state)
            .copied();
        if let Some(existing) = existing {
            let old = &nodes[existing as usize];
            self.stats.duplicates_pruned += 1;
            if old.closed {
                if g < old.g {
                    self.stats.reopen_violations += 1;
                }
                return;
            }
            if g >= old.g {
                return;
            }
        }

        let id = NodeId::try_from(nodes.len()).expect("node arena exceeds u32 ids");
        let seq = nodes.len() as u64;
        let entry = OpenEntry {
            f: g + h,
            g,
            finished: state.finished_count() as u32,
            active: state.active_count() as u32,
            seq,
            id,
        };
        nodes.push(SearchNode {
            state,
            g,
            h,
            fired,
            parent,
            finished_count: entry.finished,
            active_count: entry.active,
            seq,
            hash,
            closed: false,
            stale: false,
        });
        match existing {
            Some(old) => {
                let slot = self
                    .seen
                    .find_mut(hash, |&i| i == old)
                    .expect("live node is indexed");
                *slot = id;
                let old = &mut nodes[old as usize];
                old.stale = true;
                old.state = TimedState::from_statuses(&[]);
                self.live_open -= 1;
            }
            None => {
                self.seen
                    .insert_unique(hash, id, |&i| nodes[i as usize].hash);
            }
        }
        self.open.push(entry);
        self.live_open += 1;
        self.stats.peak_open = self.stats.peak_open.max(self.live_open);
    }

    /// Pops the best live node and expands it, or reports the goal without
    /// expanding when the popped node is one.
    pub fn step(&mut self) -> Step {
        let id = loop {
            let Some(entry) = self.open.pop() else {
                return Step::Exhausted;
            };
            let node = &self.nodes[entry.id as usize];
            if !node.stale && !node.closed {
                break entry.id;
            }
        };
        self.live_open -= 1;
        let node = &mut self.nodes[id as usize];
        node.closed = true;
        self.stats.peak_closed += 1;
        if node.state.is_goal(self.net) {
            return Step::Goal(id);
        }
        self.stats.expanded += 1;

        let (state, g, h) = (node.state.clone(), node.g, node.h);
        for t in state.enabled_transitions(self.net) {
            let fired = state.fire(self.net, t).expect("enabled transition fires");
            self.stats.generated += 1;
            let child = fired.next;
            let delta = fired.delta;
            if delta == 0 {
                self.stats.zero_cost_cache_hits += 1;
            }
            let child_h = if self.verify_cache {
                let (heur, scratch) = (&self.heuristic, &mut self.scratch);
                cached_child_h_checked(h, delta, || heur.eval_with(&child, scratch)).unwrap_or_else(
                    |fresh| {
                        self.stats.cache_mismatches += 1;
                        fresh
                    },
                )
            } else {
                let (heur, scratch) = (&self.heuristic, &mut self.scratch);
                cached_child_h(h, delta, || heur.eval_with(&child, scratch))
            };
            self.push(child, g + delta, child_h, Some(t), Some(id));
        }
        Step::Expanded(id)
    }

    /// Start times read off the path to `goal`: each activity starts at the
    /// `g` of the node created by firing its transition.
    pub fn extract_schedule(&self, goal: NodeId) -> Schedule {
        let n = self.net.num_activities();
        let mut starts = vec![None; n];
        let mut cur = Some(goal);
        while let Some(id) = cur {
            let node = self.node(id);
            if let Some(t) = node.fired {
                starts[self.net.transition(t).activity] = Some(node.g);
            }
            cur = node.parent;
        }
        let starts: Vec<u32> = starts
            .into_iter()
            .map(|s| s.expect("goal path fires every transition"))
            .collect();
        let mut schedule = Schedule::from_starts(&starts);
        schedule.makespan = self.node(goal).g;
        schedule
    }
}

/// Runs A* to completion or until the budget runs out.
pub fn solve(
    net: &TtpnrNet,
    inst: &RcpspInstance,
    heuristic: HeuristicKind,
    budget: &Budget,
) -> SolveOutcome {
    solve_with(
        net,
        inst,
        heuristic,
        &SolveOptions {
            budget: budget.clone(),
            verify_cache: false,
        },
    )
}

pub fn solve_with(
    net: &TtpnrNet,
    inst: &RcpspInstance,
    heuristic: HeuristicKind,
    opts: &SolveOptions,
) -> SolveOutcome {
    let clock = Instant::now();
    let Ok(mut search) = Search::new(net, inst, heuristic, opts.verify_cache) else {
        return SolveOutcome::Infeasible {
            stats: SearchStats {
                wall_time: clock.elapsed(),
                ..Default::default()
            },
        };
    };
    loop {
        let expanded = search.stats.expanded;
        if opts
            .budget
            .node_limit
            .is_some_and(|limit| expanded >= limit)
        {
            search.stats.wall_time = clock.elapsed();
            return SolveOutcome::TimedOut {
                stats: search.stats,
            };
        }
        if expanded % CLOCK_CHECK_INTERVAL == 0
            && opts.budget.timeout.is_some_and(|t| clock.elapsed() >= t)
        {
            search.stats.wall_time = clock.elapsed();
            return SolveOutcome::TimedOut {
                stats: search.stats,
            };
        }
        match search.step() {
            Step::Expanded(_) => {}
            Step::Goal(id) => {
                let schedule = search.extract_schedule(id);
                search.stats.wall_time = clock.elapsed();
                return SolveOutcome::Solved {
                    makespan: schedule.makespan,
                    schedule,
                    stats: search.stats,
                };
            }
            Step::Exhausted => {
                search.stats.wall_time = clock.elapsed();
                return SolveOutcome::Infeasible {
                    stats: search.stats,
                };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub key: Vec<u8>,
    pub g: u32,
    pub h: u32,
    pub f: u32,
}

/// The first `limit` nodes taken off the open list, goal included.
pub fn expand_trace(
    net: &TtpnrNet,
    inst: &RcpspInstance,
    heuristic: HeuristicKind,
    limit: usize,
) -> Vec<TraceEntry> {
    let mut out = Vec::new();
    let Ok(mut search) = Search::new(net, inst, heuristic, false) else {
        return out;
    };
    while out.len() < limit {
        let id = match search.step() {
            Step::Expanded(id) => id,
            Step::Goal(id) => {
                out.push(trace_entry(search.node(id)));
                break;
            }
            Step::Exhausted => break,
        };
        out.push(trace_entry(search.node(id)));
    }
    out
}

fn trace_entry(node: &SearchNode) -> TraceEntry {
    TraceEntry {
        key: node.state.canonical_key(),
        g: node.g,
        h: node.h,
        f: node.f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::example1;
    use crate::instance::Activity;
    use crate::oracle::validate_schedule;

    #[test]
    fn example1_solves_to_five() {
        let inst = example1();
        let net = TtpnrNet::build(&inst).unwrap();
        let out = solve(&net, &inst, HeuristicKind::MaxOfBoth, &Budget::unlimited());
        let SolveOutcome::Solved {
            schedule,
            makespan,
            stats,
        } = out
        else {
            panic!("{out:?}")
        };
        assert_eq!(makespan, 5);
        assert_eq!(schedule.makespan, schedule.start(5).unwrap());
        assert_eq!(validate_schedule(&inst, &schedule), Ok(vec![]));
        assert_eq!(stats.reopen_violations, 0);
    }

    #[test]
    fn uniform_cost_expands_at_least_as_much() {
        let inst = example1();
        let net = TtpnrNet::build(&inst).unwrap();
        let guided = solve(&net, &inst, HeuristicKind::MaxOfBoth, &Budget::unlimited());
        let blind = solve(&net, &inst, HeuristicKind::Zero, &Budget::unlimited());
        assert_eq!(blind.makespan(), Some(5));
        assert!(blind.stats().expanded >= guided.stats().expanded);
    }

    #[test]
    fn starved_net_is_infeasible() {
        let base = example1();
        let mut acts = base.activities().to_vec();
        acts[4].demands[0] = 3;
        let inst = RcpspInstance::new(acts, base.precedence().clone(), vec![2]);
        let net = TtpnrNet::build_unchecked(&inst);
        let out = solve(&net, &inst, HeuristicKind::MaxOfBoth, &Budget::unlimited());
        assert!(matches!(out, SolveOutcome::Infeasible { .. }), "{out:?}");
    }

    #[test]
    fn dummy_only_instance() {
        let acts = vec![Activity::new(0, 0, vec![]), Activity::new(1, 0, vec![])];
        let inst = RcpspInstance::new(acts, [(0, 1)], vec![]);
        let net = TtpnrNet::build(&inst).unwrap();
        let out = solve(&net, &inst, HeuristicKind::MaxOfBoth, &Budget::unlimited());
        let SolveOutcome::Solved {
            schedule, makespan, ..
        } = out
        else {
            panic!()
        };
        assert_eq!(makespan, 0);
        assert_eq!(schedule.start(0), Some(0));
    }

    #[test]
    fn trace_starts_at_root() {
        let inst = example1();
        let net = TtpnrNet::build(&inst).unwrap();
        let trace = expand_trace(&net, &inst, HeuristicKind::MaxOfBoth, 100);
        assert_eq!((trace[0].g, trace[0].h, trace[0].f), (0, 5, 5));
        assert!(trace.windows(2).all(|w| w[0].f <= w[1].f));
        assert_eq!(trace.last().unwrap().g, 5);
        assert_eq!(
            expand_trace(&net, &inst, HeuristicKind::MaxOfBoth, 1).len(),
            1
        );
    }

    #[test]
    fn node_limit_stops_search() {
        let inst = example1();
        let net = TtpnrNet::build(&inst).unwrap();
        let budget = Budget {
            timeout: None,
            node_limit: Some(1),
        };
        assert!(matches!(
            solve(&net, &inst, HeuristicKind::Zero, &budget),
            SolveOutcome::TimedOut { .. }
        ));
    }

    #[test]
    fn open_order_is_total() {
        let a = OpenEntry {
            f: 5,
            g: 3,
            finished: 2,
            active: 1,
            seq: 9,
            id: 0,
        };
        let lower_f = OpenEntry {
            f: 4,
            g: 0,
            finished: 0,
            active: 0,
            seq: 10,
            id: 1,
        };
        let higher_g = OpenEntry { g: 4, ..a };
        let more_done = OpenEntry { finished: 3, ..a };
        let more_active = OpenEntry { active: 2, ..a };
        let earlier = OpenEntry { seq: 8, ..a };
        for better in [lower_f, higher_g, more_done, more_active, earlier] {
            assert!(better > a, "{better:?}");
        }
    }
}
