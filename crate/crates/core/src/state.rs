//! Timed markings and the firing rule.
//!
//! Under the net built by [`TtpnrNet::build`] the delayed marking is fully
//! determined by the status of each activity, so [`TimedState`] stores only
//! that status vector and derives token multisets on demand:
//!
//! * precedence place `p_ij` holds one token iff `i` has fired and `j` has
//!   not, delayed by the residual of `i`;
//! * the source place holds a token iff the dummy start has not fired, the
//!   sink iff the dummy finish has;
//! * resource place `r` holds `u_jr` tokens delayed by `θ_j` for every
//!   executing `j`, and the remaining `c_r - Σ u_jr` tokens with delay 0.

use std::fmt;

use thiserror::Error;

use crate::instance::ActivityId;
use crate::net::{PlaceId, PlaceKind, TransitionId, TtpnrNet};

const DONE: u32 = 0;
const UNSTARTED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Unstarted,
    /// Residual time until completion, always positive.
    Executing(u32),
    Done,
}

/// Search state: one status slot per activity.
///
/// Slots encode `Done` as 0, `Unstarted` as `u32::MAX` and `Executing(θ)` as
/// `θ`. Equality and hashing work on the slots, which is the same relation as
/// equality of [`canonical_key`](TimedState::canonical_key).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TimedState {
    slots: Box<[u32]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FireResult {
    pub next: TimedState,
    /// Time jump: the largest delay among consumed tokens.
    pub delta: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FireError {
    #[error("transition {0} does not exist")]
    UnknownTransition(TransitionId),
    #[error("transition {0} has already fired")]
    AlreadyFired(TransitionId),
    #[error("transition {0} is not enabled")]
    NotEnabled(TransitionId),
}

impl TimedState {
    /// Start state: every activity unstarted, marking equal to M0.
    pub fn initial(net: &TtpnrNet) -> Self {
        Self {
            slots: vec![UNSTARTED; net.num_activities()].into_boxed_slice(),
        }
    }

    /// Builds a state from explicit statuses; mostly useful in tests.
    pub fn from_statuses(statuses: &[Status]) -> Self {
        let slots = statuses
            .iter()
            .map(|s| match *s {
                Status::Unstarted => UNSTARTED,
                Status::Done => DONE,
                Status::Executing(theta) => {
                    assert!(theta > 0 && theta < UNSTARTED, "residual out of range");
                    theta
                }
            })
            .collect();
        Self { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn status(&self, j: ActivityId) -> Status {
        match self.slots[j] {
            DONE => Status::Done,
            UNSTARTED => Status::Unstarted,
            theta => Status::Executing(theta),
        }
    }

    pub fn statuses(&self) -> impl Iterator<Item = Status> + '_ {
        (0..self.slots.len()).map(|j| self.status(j))
    }

    pub fn is_unstarted(&self, j: ActivityId) -> bool {
        self.slots[j] == UNSTARTED
    }

    pub fn is_done(&self, j: ActivityId) -> bool {
        self.slots[j] == DONE
    }

    /// Residual delay of `j`: 0 when done, `θ` when executing, `None` when
    /// not yet started.
    pub fn residual(&self, j: ActivityId) -> Option<u32> {
        match self.slots[j] {
            UNSTARTED => None,
            theta => Some(theta),
        }
    }

    pub fn finished_count(&self) -> usize {
        self.slots.iter().filter(|&&s| s == DONE).count()
    }

    pub fn active_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|&&s| s != DONE && s != UNSTARTED)
            .count()
    }

    /// Activity-ordered serialization: tag `0` unstarted, `1` done, `2`
    /// executing followed by the residual as little-endian `u32`.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut key = Vec::with_capacity(self.slots.len() * 2);
        for &s in self.slots.iter() {
            match s {
                UNSTARTED => key.push(0),
                DONE => key.push(1),
                theta => {
                    key.push(2);
                    key.extend_from_slice(&theta.to_le_bytes());
                }
            }
        }
        key
    }

    fn has_fired(&self, t: TransitionId) -> bool {
        self.slots[t] != UNSTARTED
    }

    /// Delays of the tokens in place `p`, as `(delay, count)` pairs sorted by
    /// ascending delay with positive counts only.
    pub fn tokens(&self, net: &TtpnrNet, p: PlaceId) -> Vec<(u32, u32)> {
        match net.place(p).kind {
            PlaceKind::Source => {
                if self.has_fired(net.start_transition()) {
                    vec![]
                } else {
                    vec![(0, 1)]
                }
            }
            PlaceKind::Sink => {
                let f = net.finish_transition();
                match self.residual(f) {
                    Some(theta) => vec![(theta, 1)],
                    None => vec![],
                }
            }
            PlaceKind::Precedence { from, to } => match self.residual(from) {
                Some(theta) if !self.has_fired(to) => vec![(theta, 1)],
                _ => vec![],
            },
            PlaceKind::Resource(r) => {
                let mut free = net.capacities()[r];
                let mut held: Vec<(u32, u32)> = Vec::new();
                for &(t, w) in net.resource_users(r) {
                    match self.slots[t] {
                        DONE | UNSTARTED => {}
                        theta => {
                            free = free.saturating_sub(w);
                            held.push((theta, w));
                        }
                    }
                }
                if free > 0 {
                    held.push((0, free));
                }
                held.sort_unstable();
                let mut out: Vec<(u32, u32)> = Vec::with_capacity(held.len());
                for (d, c) in held {
                    match out.last_mut() {
                        Some((ld, lc)) if *ld == d => *lc += c,
                        _ => out.push((d, c)),
                    }
                }
                out
            }
        }
    }

    /// Token count of place `p`, ignoring delays.
    pub fn token_count(&self, net: &TtpnrNet, p: PlaceId) -> u32 {
        match net.place(p).kind {
            PlaceKind::Source => u32::from(!self.has_fired(net.start_transition())),
            PlaceKind::Sink => u32::from(self.has_fired(net.finish_transition())),
            PlaceKind::Precedence { from, to } => {
                u32::from(self.has_fired(from) && !self.has_fired(to))
            }
            PlaceKind::Resource(r) => net.capacities()[r],
        }
    }

    /// The full derived marking, one token multiset per place.
    pub fn marking(&self, net: &TtpnrNet) -> Vec<Vec<(u32, u32)>> {
        (0..net.places().len())
            .map(|p| self.tokens(net, p))
            .collect()
    }

    /// Largest delay among the `w` smallest-delay tokens of `p`, or `None`
    /// when the place holds fewer than `w` tokens.
    fn consumed_delay(&self, net: &TtpnrNet, p: PlaceId, w: u32) -> Option<u32> {
        match net.place(p).kind {
            PlaceKind::Resource(r) => {
                let cap = net.capacities()[r];
                if w > cap {
                    return None;
                }
                let mut held = 0u32;
                let mut busy: Vec<(u32, u32)> = Vec::new();
                for &(t, u) in net.resource_users(r) {
                    let s = self.slots[t];
                    if s != DONE && s != UNSTARTED {
                        held += u;
                        busy.push((s, u));
                    }
                }
                let free = cap.saturating_sub(held);
                if w <= free {
                    return Some(0);
                }
                busy.sort_unstable();
                let mut got = free;
                for (theta, u) in busy {
                    got += u;
                    if got >= w {
                        return Some(theta);
                    }
                }
                None
            }
            _ => {
                let toks = self.tokens(net, p);
                let count: u32 = toks.iter().map(|&(_, c)| c).sum();
                if count < w {
                    return None;
                }
                let mut got = 0;
                toks.into_iter().find_map(|(d, c)| {
                    got += c;
                    (got >= w).then_some(d)
                })
            }
        }
    }

    /// A transition is enabled when each input place holds at least the arc
    /// weight in tokens, whatever their delays.
    pub fn is_enabled(&self, net: &TtpnrNet, t: TransitionId) -> bool {
        !self.has_fired(t)
            && net
                .transition(t)
                .inputs
                .iter()
                .all(|&(p, w)| self.token_count(net, p) >= w)
    }

    /// Enabled transitions in ascending id order.
    pub fn enabled_transitions(&self, net: &TtpnrNet) -> Vec<TransitionId> {
        (0..net.num_activities())
            .filter(|&t| self.is_enabled(net, t))
            .collect()
    }

    /// Fires `t`: consumes the smallest-delay tokens on every input arc,
    /// advances time by the largest consumed delay, and starts `λ(t)` with
    /// residual `τ(t)`.
    pub fn fire(&self, net: &TtpnrNet, t: TransitionId) -> Result<FireResult, FireError> {
        if t >= net.num_activities() {
            return Err(FireError::UnknownTransition(t));
        }
        if self.has_fired(t) {
            return Err(FireError::AlreadyFired(t));
        }
        let mut delta = 0;
        for &(p, w) in &net.transition(t).inputs {
            let d = self
                .consumed_delay(net, p, w)
                .ok_or(FireError::NotEnabled(t))?;
            delta = delta.max(d);
        }
        let mut slots = self.slots.clone();
        if delta > 0 {
            for s in slots.iter_mut() {
                if *s != UNSTARTED {
                    *s = s.saturating_sub(delta);
                }
            }
        }
        let tau = net.transition(t).duration;
        debug_assert!(tau < UNSTARTED);
        slots[net.transition(t).activity] = tau;
        Ok(FireResult {
            next: Self { slots },
            delta,
        })
    }

    /// True once the dummy finish has fired.
    pub fn is_goal(&self, net: &TtpnrNet) -> bool {
        self.is_done(net.finish_transition())
    }
}

impl fmt::Debug for TimedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (j, s) in self.statuses().enumerate() {
            if j > 0 {
                f.write_str(" ")?;
            }
            match s {
                Status::Unstarted => write!(f, "{j}:-")?,
                Status::Done => write!(f, "{j}:*")?,
                Status::Executing(theta) => write!(f, "{j}:{theta}")?,
            }
        }
        f.write_str("]")
    }
}
