#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::path::PathBuf;

use rcpsp_ttpnr::{Activity, RcpspInstance, TimedState, TransitionId, TtpnrNet};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn example1() -> RcpspInstance {
    let acts = vec![
        Activity::new(0, 0, vec![0]),
        Activity::new(1, 3, vec![1]),
        Activity::new(2, 1, vec![1]),
        Activity::new(3, 3, vec![1]),
        Activity::new(4, 2, vec![1]),
        Activity::new(5, 0, vec![0]),
    ];
    RcpspInstance::new(
        acts,
        [(0, 1), (0, 3), (1, 2), (3, 4), (2, 5), (4, 5)],
        vec![2],
    )
}

pub struct Edge {
    pub from: usize,
    pub transition: TransitionId,
    pub to: usize,
    pub delta: u32,
}

/// Every state reachable from the initial marking and every firing between them.
pub struct ReachabilityGraph {
    pub states: Vec<TimedState>,
    pub edges: Vec<Edge>,
}

pub fn reachability_graph(net: &TtpnrNet) -> ReachabilityGraph {
    let root = TimedState::initial(net);
    let mut index = HashMap::from([(root.clone(), 0usize)]);
    let mut states = vec![root];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        for t in s.enabled_transitions(net) {
            let r = s.fire(net, t).expect("enabled transitions fire");
            let to = *index.entry(r.next.clone()).or_insert_with(|| {
                states.push(r.next.clone());
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            edges.push(Edge {
                from: i,
                transition: t,
                to,
                delta: r.delta,
            });
        }
    }
    ReachabilityGraph { states, edges }
}

/// Plain token-multiset semantics of the net, independent of the
/// status-vector encoding: one sorted delay list per place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowMarking(pub Vec<Vec<u32>>);

impl ShadowMarking {
    pub fn initial(net: &TtpnrNet) -> Self {
        Self(
            net.initial_marking()
                .iter()
                .map(|&c| vec![0; c as usize])
                .collect(),
        )
    }

    pub fn enabled(&self, net: &TtpnrNet) -> Vec<TransitionId> {
        net.transitions()
            .iter()
            .filter(|t| t.inputs.iter().all(|&(p, w)| self.0[p].len() >= w as usize))
            .map(|t| t.id)
            .collect()
    }

    /// Consumes the smallest-delay tokens, jumps by the largest consumed
    /// delay, ages everything else, and deposits outputs with the
    /// transition's duration.
    pub fn fire(&self, net: &TtpnrNet, t: TransitionId) -> (Self, u32) {
        let tr = net.transition(t);
        let mut places = self.0.clone();
        let mut delta = 0;
        for &(p, w) in &tr.inputs {
            places[p].sort_unstable();
            let taken: Vec<u32> = places[p].drain(..w as usize).collect();
            delta = delta.max(taken.into_iter().max().unwrap_or(0));
        }
        for toks in &mut places {
            for d in toks.iter_mut() {
                *d = d.saturating_sub(delta);
            }
        }
        for &(p, w) in &tr.outputs {
            places[p].extend(std::iter::repeat_n(tr.duration, w as usize));
        }
        for toks in &mut places {
            toks.sort_unstable();
        }
        (Self(places), delta)
    }

    /// Same shape as `TimedState::marking`: `(delay, count)` pairs per place.
    pub fn grouped(&self) -> Vec<Vec<(u32, u32)>> {
        self.0
            .iter()
            .map(|toks| {
                let mut out: Vec<(u32, u32)> = Vec::new();
                for &d in toks {
                    match out.last_mut() {
                        Some((ld, c)) if *ld == d => *c += 1,
                        _ => out.push((d, 1)),
                    }
                }
                out
            })
            .collect()
    }
}
