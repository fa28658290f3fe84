//! Analysis and simulation of slotted collision channels shared between
//! centrally scheduled adaptive users and fixed-assignment legacy
//! transmitters that never report their queue backlogs.
//!
//! The scheduler's only window into a legacy queue is the per-slot ternary
//! feedback (success / collision / idle) on its channel. This crate provides:
//!
//! * [`bounds`] — closed-form and numerical bounds on the throughput an
//!   adaptive user can extract from one such channel, with independent
//!   oracles (linear Bellman solve, value iteration, steady-state chain
//!   analysis) validating every closed form;
//! * [`policies`] — the per-channel back-off access gate and the
//!   multi-user schedulers (randomized, longest-queue-first, fixed
//!   priority) built on top of it;
//! * [`stability`] — bipartite max-flow feasibility checks for the
//!   sufficient and necessary stability conditions, plus region sweeps;
//! * [`sim`] — a deterministic slot-level simulator producing throughput
//!   and backlog metrics;
//! * [`assignment`] — the NP-complete legacy-user-to-channel assignment
//!   problem: exact search, a greedy heuristic, and a set-cover reduction.

pub mod assignment;
pub mod bounds;
pub mod model;
pub mod policies;
pub mod sim;
pub mod stability;

pub use model::{
    feedback_for, validate_config, Action, ArrivalKind, ModelError, NetworkConfig,
    NetworkTopology, Rate, SlotOutcome, TernaryFeedback,
};
