//! The per-channel access gate and the multi-user schedulers layered on it.
//!
//! The gate runs independently on every channel: after a collision it holds
//! the channel silent for exactly one slot, otherwise it opens the channel
//! with probability `p` (optimally [`optimal_transmit_prob`] of the channel's
//! legacy rate). Whenever a gate opens, a scheduler picks which adaptive
//! user transmits there; the chosen user sends a dummy packet if its queue
//! cannot cover all of its assignments.
//!
//! [`optimal_transmit_prob`]: crate::bounds::optimal_transmit_prob

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::model::{Action, NetworkConfig, NetworkTopology, TernaryFeedback};
use crate::stability::{self, StabilityError};

/// Scheduler selection, by the names used in configs and on the command
/// line: `pi_lb`, `randomized`, `lqf`, `priority`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Gate only; every open channel goes to its lowest-indexed eligible
    /// user. Intended for single-user and saturated-probe runs.
    PiLb,
    /// Samples the transmitting user proportionally to a feasible rate
    /// split.
    Randomized,
    /// Longest queue first.
    Lqf,
    /// Fixed user-priority order, skipping users with nothing left to send.
    Priority,
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pi_lb" => Ok(PolicyKind::PiLb),
            "randomized" => Ok(PolicyKind::Randomized),
            "lqf" => Ok(PolicyKind::Lqf),
            "priority" => Ok(PolicyKind::Priority),
            other => Err(format!(
                "unknown policy '{other}' (expected pi_lb, randomized, lqf, or priority)"
            )),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::PiLb => "pi_lb",
            PolicyKind::Randomized => "randomized",
            PolicyKind::Lqf => "lqf",
            PolicyKind::Priority => "priority",
        })
    }
}

/// State of one channel's access gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGateState {
    /// Probability of opening the channel in a non-back-off slot.
    pub transmit_prob: f64,
    /// True iff the last observed feedback on this channel was a collision;
    /// forces the next decision to be no-transmit.
    pub backing_off: bool,
}

impl ChannelGateState {
    pub fn new(transmit_prob: f64) -> ChannelGateState {
        ChannelGateState {
            transmit_prob,
            backing_off: false,
        }
    }
}

/// One gate decision. A collision in the previous slot forces a silent slot
/// (no randomness consumed); otherwise the channel opens with probability
/// `state.transmit_prob` (one uniform draw). The returned state records the
/// observed feedback.
pub fn gate_decide<R: Rng + ?Sized>(
    state: &ChannelGateState,
    last_feedback: TernaryFeedback,
    rng: &mut R,
) -> (Action, ChannelGateState) {
    let backing_off = last_feedback == TernaryFeedback::Collision;
    let action = if backing_off {
        Action::NoTransmit
    } else if rng.random::<f64>() < state.transmit_prob {
        Action::Transmit
    } else {
        Action::NoTransmit
    };
    (
        action,
        ChannelGateState {
            transmit_prob: state.transmit_prob,
            backing_off,
        },
    )
}

/// Per-channel choice of transmitting adaptive user for one slot.
/// `channel_user[j] = Some(i)` schedules user `i` on channel `j` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScheduleAssignment {
    pub channel_user: Vec<Option<usize>>,
}

/// A rate split `rho[(i, j)]` of adaptive demand over channels. Entries are
/// zero wherever user `i` may not use channel `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoMatrix {
    num_users: usize,
    num_channels: usize,
    values: Vec<f64>,
}

impl RhoMatrix {
    pub fn zeros(num_users: usize, num_channels: usize) -> RhoMatrix {
        RhoMatrix {
            num_users,
            num_channels,
            values: vec![0.0; num_users * num_channels],
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn get(&self, user: usize, channel: usize) -> f64 {
        self.values[user * self.num_channels + channel]
    }

    pub fn set(&mut self, user: usize, channel: usize, value: f64) {
        self.values[user * self.num_channels + channel] = value;
    }

    /// Total rate user `user` pushes across its channels.
    pub fn row_sum(&self, user: usize) -> f64 {
        (0..self.num_channels).map(|j| self.get(user, j)).sum()
    }

    /// Total rate channel `channel` carries across users.
    pub fn channel_sum(&self, channel: usize) -> f64 {
        (0..self.num_users).map(|i| self.get(i, channel)).sum()
    }
}

/// Computes a feasible rate split for the config, or `None` when the
/// sufficient stability conditions cannot be met. Delegates to the max-flow
/// feasibility check with each channel capped at its guaranteed throughput.
pub fn compute_rho(config: &NetworkConfig) -> Result<Option<RhoMatrix>, StabilityError> {
    let verdict = stability::check_sufficient(config)?;
    Ok(verdict.rho)
}

/// Randomized scheduler: each open channel picks an eligible user with
/// probability proportional to its `rho` entry; channels whose entries sum
/// to zero are left unscheduled. One uniform draw per open channel, channels
/// processed in ascending index.
pub fn schedule_randomized<R: Rng + ?Sized>(
    rho: &RhoMatrix,
    gates_open: &[bool],
    rng: &mut R,
) -> ScheduleAssignment {
    let mut channel_user = vec![None; gates_open.len()];
    for (j, &open) in gates_open.iter().enumerate() {
        if !open {
            continue;
        }
        let total: f64 = rho.channel_sum(j);
        if total <= 0.0 {
            continue;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for i in 0..rho.num_users() {
            let w = rho.get(i, j);
            if w <= 0.0 {
                continue;
            }
            acc += w;
            chosen = Some(i);
            if target < acc {
                break;
            }
        }
        channel_user[j] = chosen;
    }
    ScheduleAssignment { channel_user }
}

/// Longest-queue-first scheduler: each open channel goes to the eligible
/// user with the largest backlog at the start of the slot, ties broken by
/// lowest user index. Backlogs are not adjusted for same-slot assignments on
/// other channels, so a user may be scheduled beyond its backlog and send
/// dummies.
pub fn schedule_lqf(
    adaptive_queues: &[u64],
    topology: &NetworkTopology,
    gates_open: &[bool],
) -> ScheduleAssignment {
    let mut channel_user = vec![None; gates_open.len()];
    for (j, &open) in gates_open.iter().enumerate() {
        if !open {
            continue;
        }
        let mut best: Option<usize> = None;
        for i in topology.eligible_users(j) {
            match best {
                None => best = Some(i),
                Some(b) if adaptive_queues[i] > adaptive_queues[b] => best = Some(i),
                _ => {}
            }
        }
        channel_user[j] = best;
    }
    ScheduleAssignment { channel_user }
}

/// Fixed-priority scheduler: channels in ascending index each go to the
/// lowest-indexed eligible user that still has an uncommitted packet this
/// slot, so no channel is spent on an empty queue. Channels with no such
/// user stay unscheduled.
pub fn schedule_priority(
    adaptive_queues: &[u64],
    topology: &NetworkTopology,
    gates_open: &[bool],
) -> ScheduleAssignment {
    let mut remaining = adaptive_queues.to_vec();
    let mut channel_user = vec![None; gates_open.len()];
    for (j, &open) in gates_open.iter().enumerate() {
        if !open {
            continue;
        }
        for i in topology.eligible_users(j) {
            if remaining[i] > 0 {
                remaining[i] -= 1;
                channel_user[j] = Some(i);
                break;
            }
        }
    }
    ScheduleAssignment { channel_user }
}
