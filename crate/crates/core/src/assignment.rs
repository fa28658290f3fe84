//! Assigning legacy transmitters to channel resources.
//!
//! Each legacy user carries a fixed arrival rate and a set of candidate
//! channels; at most one user may sit on a channel and a channel left empty
//! behaves like a rate-0 user. The question is whether some injective
//! placement leaves enough guaranteed capacity for the adaptive demand
//! (the sufficient stability condition). Deciding this is NP-complete — the
//! set-covering reduction in [`reduce_set_cover`] is both the hardness
//! witness and a test oracle — so the exact solver is a pruned enumeration
//! guarded by a channel-count cap, with a greedy heuristic alongside.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds;
use crate::model::{ArrivalKind, NetworkConfig, NetworkTopology, Rate};
use crate::stability::{self, FlowNetwork, StabilityError, FEASIBILITY_TOL};

/// Default cap on the number of channels the exact solver will enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignmentError {
    #[error("invalid assignment problem: {}", .0.join("; "))]
    InvalidProblem(Vec<String>),
    #[error("{got} channels exceed the enumeration cap {cap}; raise the cap to force the search")]
    TooManyChannels { got: usize, cap: usize },
    #[error("invalid set-cover instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// A legacy user waiting to be placed: its arrival rate and the channels
/// (1-based, as in config files) it may be assigned to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncoopUser {
    pub rate: Rate,
    pub candidates: Vec<usize>,
}

/// A channel-assignment problem: the adaptive side of a network plus the
/// list of legacy users to place. Serialized as TOML:
///
/// ```toml
/// adaptive_rates = [0.5, 0.5]
///
/// [topology]
/// num_adaptive = 2
/// num_channels = 3
/// access_sets = [[1, 3], [2, 3]]
///
/// [[uncoop_users]]
/// rate = 1.0
/// candidates = [1, 2, 3]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentProblem {
    pub adaptive_rates: Vec<Rate>,
    pub topology: NetworkTopology,
    pub uncoop_users: Vec<UncoopUser>,
}

impl AssignmentProblem {
    pub fn from_toml_str(s: &str) -> Result<AssignmentProblem, AssignmentError> {
        toml::from_str(s).map_err(|e| AssignmentError::InvalidProblem(vec![e.to_string()]))
    }

    pub fn to_toml_string(&self) -> Result<String, AssignmentError> {
        toml::to_string(self).map_err(|e| AssignmentError::InvalidProblem(vec![e.to_string()]))
    }

    /// Every structural violation of the problem, empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let m = self.topology.num_channels;
        if self.uncoop_users.len() > m {
            violations.push(format!(
                "{} uncooperative users cannot be assigned injectively to {} channels",
                self.uncoop_users.len(),
                m
            ));
        }
        for (j, user) in self.uncoop_users.iter().enumerate() {
            if user.candidates.is_empty() {
                violations.push(format!("candidate set empty for uncooperative user {}", j + 1));
            }
            for &c in &user.candidates {
                if c == 0 || c > m {
                    violations.push(format!(
                        "channel {} out of range 1..={} in candidates of uncooperative user {}",
                        c,
                        m,
                        j + 1
                    ));
                }
            }
            if !user.rate.is_valid() {
                violations.push(format!(
                    "rate out of [0,1] for uncooperative user {}: {}",
                    j + 1,
                    user.rate.value()
                ));
            }
        }
        // The adaptive side reuses the network validation with the legacy
        // rates zeroed out.
        violations.extend(crate::model::validate_config(&self.base_config(&[])));
        violations
    }

    /// The network induced by placing `assignment[j]` (0-based channels);
    /// channels without a user keep rate 0.
    fn base_config(&self, assignment: &[usize]) -> NetworkConfig {
        let mut uncoop_rates = vec![Rate::ZERO; self.topology.num_channels];
        for (user, &channel) in assignment.iter().enumerate() {
            uncoop_rates[channel] = self.uncoop_users[user].rate;
        }
        NetworkConfig {
            adaptive_rates: self.adaptive_rates.clone(),
            uncoop_rates,
            horizon: 1,
            seed: 0,
            adaptive_arrival_kind: ArrivalKind::Bernoulli,
            topology: self.topology.clone(),
        }
    }

    /// The full network config induced by a complete assignment.
    pub fn config_for(&self, assignment: &Assignment) -> NetworkConfig {
        self.base_config(&assignment.channel_of)
    }
}

/// An injective placement: `channel_of[j]` is the 0-based channel of
/// uncooperative user `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub channel_of: Vec<usize>,
}

/// Options for the exact search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Refuse problems with more channels than this.
    pub max_channels: usize,
    /// Cut branches whose optimistic capacity already falls short.
    pub prune: bool,
    /// Explore everything and count feasible assignments instead of
    /// stopping at the first.
    pub count_all: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            max_channels: DEFAULT_ENUMERATION_CAP,
            prune: true,
            count_all: false,
        }
    }
}

/// Result of the exact search.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactReport {
    /// First feasible assignment found, if any.
    pub assignment: Option<Assignment>,
    /// Search-tree nodes visited.
    pub nodes_explored: u64,
    /// Number of feasible assignments, when `count_all` was requested.
    pub feasible_count: Option<u64>,
}

/// Depth-first enumeration of injective placements with default options:
/// returns the first assignment satisfying the sufficient stability
/// condition, or none. Branches are cut when even the most optimistic
/// completion (every remaining channel at full capacity) cannot carry the
/// adaptive demand.
pub fn solve_exact(problem: &AssignmentProblem) -> Result<ExactReport, AssignmentError> {
    solve_exact_with(problem, &ExactOptions::default())
}

/// [`solve_exact`] with explicit search options.
pub fn solve_exact_with(
    problem: &AssignmentProblem,
    options: &ExactOptions,
) -> Result<ExactReport, AssignmentError> {
    let violations = problem.validate();
    if !violations.is_empty() {
        return Err(AssignmentError::InvalidProblem(violations));
    }
    if problem.topology.num_channels > options.max_channels {
        return Err(AssignmentError::TooManyChannels {
            got: problem.topology.num_channels,
            cap: options.max_channels,
        });
    }

    let mut search = Search {
        problem,
        options,
        used: vec![false; problem.topology.num_channels],
        partial: Vec::with_capacity(problem.uncoop_users.len()),
        report: ExactReport {
            assignment: None,
            nodes_explored: 0,
            feasible_count: options.count_all.then_some(0),
        },
        demand: problem.adaptive_rates.iter().map(|r| r.value()).sum(),
    };
    search.dfs();
    Ok(search.report)
}

struct Search<'a> {
    problem: &'a AssignmentProblem,
    options: &'a ExactOptions,
    used: Vec<bool>,
    partial: Vec<usize>,
    report: ExactReport,
    demand: f64,
}

impl Search<'_> {
    /// Returns true once a feasible assignment is found and the search may
    /// stop.
    fn dfs(&mut self) -> bool {
        self.report.nodes_explored += 1;
        let depth = self.partial.len();

        if self.options.prune && !self.optimistically_feasible() {
            return false;
        }

        if depth == self.problem.uncoop_users.len() {
            if self.complete_assignment_feasible() {
                if self.report.assignment.is_none() {
                    self.report.assignment = Some(Assignment {
                        channel_of: self.partial.clone(),
                    });
                }
                if let Some(count) = &mut self.report.feasible_count {
                    *count += 1;
                    return false;
                }
                return true;
            }
            return false;
        }

        let mut candidates: Vec<usize> = self.problem.uncoop_users[depth]
            .candidates
            .iter()
            .map(|&c| c - 1)
            .collect();
        candidates.sort_unstable();
        for channel in candidates {
            if self.used[channel] {
                continue;
            }
            self.used[channel] = true;
            self.partial.push(channel);
            let done = self.dfs();
            self.partial.pop();
            self.used[channel] = false;
            if done {
                return true;
            }
        }
        false
    }

    /// Max-flow check with every not-yet-assigned channel at the best
    /// capacity it could still end up with (an empty channel carries 1).
    /// A branch failing this cannot be completed feasibly.
    fn optimistically_feasible(&self) -> bool {
        let topo = &self.problem.topology;
        let mut caps = vec![1.0f64; topo.num_channels];
        for (user, &channel) in self.partial.iter().enumerate() {
            caps[channel] = bounds::lower_bound_throughput(self.problem.uncoop_users[user].rate);
        }
        let mut edges = Vec::new();
        for i in 0..topo.num_adaptive {
            for j in topo.channels_of(i) {
                edges.push((i, j));
            }
        }
        let network = FlowNetwork {
            num_users: topo.num_adaptive,
            num_channels: topo.num_channels,
            user_caps: self.problem.adaptive_rates.iter().map(|r| r.value()).collect(),
            channel_caps: caps,
            edges,
        };
        stability::max_flow(&network).value >= self.demand - FEASIBILITY_TOL
    }

    fn complete_assignment_feasible(&self) -> bool {
        let config = self.problem.base_config(&self.partial);
        stability::check_sufficient(&config)
            .map(|v| v.feasible)
            .unwrap_or(false)
    }
}

/// Result of the greedy heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyReport {
    /// The produced placement; absent when the heuristic wedged itself into
    /// a corner with no candidate channel left for some user.
    pub assignment: Option<Assignment>,
    /// Verdict of the sufficient condition on the final placement. The
    /// heuristic may report infeasible on instances the exact solver can
    /// satisfy.
    pub feasible: bool,
    /// Feasibility slack of the final placement (negative infinity when no
    /// placement was completed).
    pub slack: f64,
}

/// Greedy placement: users in descending rate order each take the candidate
/// channel that keeps the feasibility slack of the partially-built network
/// largest, ties broken by lowest channel index. The final placement is
/// verified with the sufficient condition, so a feasible answer is always
/// sound.
pub fn solve_greedy(problem: &AssignmentProblem) -> Result<GreedyReport, AssignmentError> {
    let violations = problem.validate();
    if !violations.is_empty() {
        return Err(AssignmentError::InvalidProblem(violations));
    }

    let mut order: Vec<usize> = (0..problem.uncoop_users.len()).collect();
    order.sort_by(|&a, &b| {
        problem.uncoop_users[b]
            .rate
            .value()
            .partial_cmp(&problem.uncoop_users[a].rate.value())
            .expect("rates are finite")
            .then(a.cmp(&b))
    });

    let m = problem.topology.num_channels;
    let mut used = vec![false; m];
    let mut placed: Vec<Option<usize>> = vec![None; problem.uncoop_users.len()];
    for &user in &order {
        let mut best: Option<(usize, f64)> = None;
        for &c in &problem.uncoop_users[user].candidates {
            let channel = c - 1;
            if used[channel] {
                continue;
            }
            let mut trial: Vec<usize> = Vec::new();
            let mut trial_users: Vec<usize> = Vec::new();
            for (u, p) in placed.iter().enumerate() {
                if let Some(ch) = p {
                    trial_users.push(u);
                    trial.push(*ch);
                }
            }
            trial_users.push(user);
            trial.push(channel);
            let slack = partial_slack(problem, &trial_users, &trial)?;
            match best {
                None => best = Some((channel, slack)),
                Some((_, s)) if slack > s => best = Some((channel, slack)),
                _ => {}
            }
        }
        match best {
            Some((channel, _)) => {
                used[channel] = true;
                placed[user] = Some(channel);
            }
            None => {
                return Ok(GreedyReport {
                    assignment: None,
                    feasible: false,
                    slack: f64::NEG_INFINITY,
                })
            }
        }
    }

    let assignment = Assignment {
        channel_of: placed.into_iter().map(|p| p.expect("all placed")).collect(),
    };
    let verdict = stability::check_sufficient(&problem.config_for(&assignment))?;
    Ok(GreedyReport {
        assignment: Some(assignment),
        feasible: verdict.feasible,
        slack: verdict.slack,
    })
}

fn partial_slack(
    problem: &AssignmentProblem,
    users: &[usize],
    channels: &[usize],
) -> Result<f64, AssignmentError> {
    let mut uncoop_rates = vec![Rate::ZERO; problem.topology.num_channels];
    for (&u, &c) in users.iter().zip(channels) {
        uncoop_rates[c] = problem.uncoop_users[u].rate;
    }
    let mut config = problem.base_config(&[]);
    config.uncoop_rates = uncoop_rates;
    Ok(stability::check_sufficient(&config)?.slack)
}

/// A set-covering decision instance: elements `1..=elements`, a family of
/// subsets, and a budget `k`. Asks whether some `<= k` subsets cover all
/// elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetCoverInstance {
    pub elements: usize,
    pub subsets: Vec<Vec<usize>>,
    pub budget: usize,
}

impl SetCoverInstance {
    pub fn from_toml_str(s: &str) -> Result<SetCoverInstance, AssignmentError> {
        toml::from_str(s).map_err(|e| AssignmentError::InvalidInstance(vec![e.to_string()]))
    }

    pub fn to_toml_string(&self) -> Result<String, AssignmentError> {
        toml::to_string(self).map_err(|e| AssignmentError::InvalidInstance(vec![e.to_string()]))
    }

    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.budget > self.subsets.len() {
            violations.push(format!(
                "budget {} exceeds the {} available subsets",
                self.budget,
                self.subsets.len()
            ));
        }
        let mut covered = vec![false; self.elements + 1];
        for (s, subset) in self.subsets.iter().enumerate() {
            for &e in subset {
                if e == 0 || e > self.elements {
                    violations.push(format!(
                        "element {} out of range 1..={} in subset {}",
                        e,
                        self.elements,
                        s + 1
                    ));
                } else {
                    covered[e] = true;
                }
            }
        }
        for e in 1..=self.elements {
            if !covered[e] {
                violations.push(format!("element {e} is not covered by any subset"));
            }
        }
        violations
    }
}

/// Builds the channel-assignment problem equivalent to a set-covering
/// decision instance: one adaptive user per element at rate `1/|E|`, one
/// channel per subset reachable exactly by the users of its elements, and
/// `|S| - k` rate-1 plus `k` rate-0 legacy users free to take any channel.
/// The construction is an if-and-only-if: the assignment is feasible exactly
/// when a cover of size at most `k` exists, because a rate-1 user drives its
/// channel's guaranteed capacity to 0 and a rate-0 user leaves it at 1.
pub fn reduce_set_cover(instance: &SetCoverInstance) -> Result<AssignmentProblem, AssignmentError> {
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(AssignmentError::InvalidInstance(violations));
    }
    let num_elements = instance.elements;
    let num_subsets = instance.subsets.len();
    let rate = Rate::new(1.0 / num_elements as f64)
        .map_err(|e| AssignmentError::InvalidInstance(vec![e.to_string()]))?;

    let access_sets: Vec<Vec<usize>> = (1..=num_elements)
        .map(|e| {
            (0..num_subsets)
                .filter(|&s| instance.subsets[s].contains(&e))
                .map(|s| s + 1)
                .collect()
        })
        .collect();

    let all_channels: Vec<usize> = (1..=num_subsets).collect();
    let mut uncoop_users = Vec::with_capacity(num_subsets);
    for _ in 0..num_subsets - instance.budget {
        uncoop_users.push(UncoopUser {
            rate: Rate::ONE,
            candidates: all_channels.clone(),
        });
    }
    for _ in 0..instance.budget {
        uncoop_users.push(UncoopUser {
            rate: Rate::ZERO,
            candidates: all_channels.clone(),
        });
    }

    Ok(AssignmentProblem {
        adaptive_rates: vec![rate; num_elements],
        topology: NetworkTopology {
            num_adaptive: num_elements,
            num_channels: num_subsets,
            access_sets,
        },
        uncoop_users,
    })
}
