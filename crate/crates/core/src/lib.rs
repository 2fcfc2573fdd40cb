//! Exact solver for the resource-constrained project scheduling problem.
//!
//! An instance is encoded as a timed transition Petri net with resources
//! ([`net`]); search states are markings with relative token delays
//! ([`state`]); A* ([`search`]) explores the reachability graph under
//! consistent critical-path and resource-load bounds ([`heuristics`]).
//! [`oracle`] holds the independent checks, [`mip`] writes the time-indexed
//! MIP model, and [`psplib`] reads and writes benchmark files.

pub mod cli;
pub mod heuristics;
pub mod instance;
pub mod mip;
pub mod net;
pub mod oracle;
pub mod psplib;
pub mod search;
pub mod state;

pub use heuristics::{h_cp, h_max, h_res, HeuristicKind};
pub use instance::{Activity, ActivityId, InstanceError, RcpspInstance, Violation};
pub use mip::TimeIndexedModel;
pub use net::{PlaceKind, TransitionId, TtpnrNet};
pub use oracle::{brute_force_optimum, random_instance, validate_schedule, Schedule};
pub use psplib::{parse_optima, parse_sm, write_sm, OptimumTable};
pub use search::{
    expand_trace, solve, solve_with, Budget, SearchStats, SolveOptions, SolveOutcome,
};
pub use state::{FireResult, Status, TimedState};
