//! Domain types shared by the analysis and simulation code: arrival rates,
//! channel feedback, network topology, and full problem instances.
//!
//! All types here are immutable values and can be freely shared across
//! threads. Configuration files are TOML documents; see [`NetworkConfig`]
//! for the exact layout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced when constructing or consuming domain values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("rate {0} outside [0, 1]")]
    InvalidRate(f64),
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config serialize error: {0}")]
    Serialize(String),
}

/// A packet arrival or service rate in packets per slot, guaranteed in [0, 1].
///
/// Deserialization does not enforce the bound so that invalid files can be
/// reported through [`validate_config`] instead of failing the parse; any
/// config read from disk must be validated before use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);
    pub const ONE: Rate = Rate(1.0);

    pub fn new(value: f64) -> Result<Rate, ModelError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Rate(value))
        } else {
            Err(ModelError::InvalidRate(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_valid(self) -> bool {
        self.0.is_finite() && (0.0..=1.0).contains(&self.0)
    }
}

/// End-of-slot observation for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TernaryFeedback {
    Success,
    Collision,
    Idle,
}

/// A per-channel transmission decision for the adaptive side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Transmit,
    NoTransmit,
}

/// The channel feedback emitted for a given hidden legacy-queue state and
/// adaptive-side action. A legacy transmitter sends whenever its queue is
/// nonempty, so exactly one of the four cases applies per slot:
///
/// * queue empty, adaptive transmits -> the adaptive transmission succeeds;
/// * queue nonempty, adaptive silent -> the legacy transmission succeeds;
/// * queue nonempty, adaptive transmits -> collision, both fail;
/// * queue empty, adaptive silent -> idle slot.
pub fn feedback_for(uncoop_nonempty: bool, action: Action) -> TernaryFeedback {
    match (uncoop_nonempty, action) {
        (false, Action::Transmit) => TernaryFeedback::Success,
        (true, Action::NoTransmit) => TernaryFeedback::Success,
        (true, Action::Transmit) => TernaryFeedback::Collision,
        (false, Action::NoTransmit) => TernaryFeedback::Idle,
    }
}

/// Which adaptive users may transmit on which channels.
///
/// `access_sets[i]` lists the channels user `i` may use, written 1-based as
/// in config files. Internal code should go through [`channels_of`] and
/// [`eligible_users`], which use contiguous 0-based indices.
///
/// [`channels_of`]: NetworkTopology::channels_of
/// [`eligible_users`]: NetworkTopology::eligible_users
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkTopology {
    pub num_adaptive: usize,
    pub num_channels: usize,
    pub access_sets: Vec<Vec<usize>>,
}

impl NetworkTopology {
    /// Channels (0-based) that adaptive user `user` (0-based) may use.
    pub fn channels_of(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        self.access_sets[user].iter().map(|&c| c - 1)
    }

    /// Adaptive users (0-based) allowed on channel `channel` (0-based).
    pub fn eligible_users(&self, channel: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_adaptive).filter(move |&i| self.allows(i, channel))
    }

    /// Whether user `user` may transmit on channel `channel` (both 0-based).
    pub fn allows(&self, user: usize, channel: usize) -> bool {
        self.access_sets[user].contains(&(channel + 1))
    }
}

/// Adaptive-user arrival process. Bernoulli draws at each user's own rate;
/// the binomial mode exercises batch arrivals (up to `n` per slot), with the
/// shared mean `n * q` required to match every declared adaptive rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalKind {
    #[default]
    Bernoulli,
    Binomial {
        n: u32,
        q: f64,
    },
}

impl ArrivalKind {
    /// Largest possible number of arrivals in one slot.
    pub fn a_max(&self) -> u32 {
        match self {
            ArrivalKind::Bernoulli => 1,
            ArrivalKind::Binomial { n, .. } => *n,
        }
    }
}

/// A full problem instance.
///
/// TOML layout (all field names are literal):
///
/// ```toml
/// adaptive_rates = [0.28, 0.28, 0.28, 0.28]
/// uncoop_rates = [0.2, 0.2]          # 0 means an empty channel
/// horizon = 2000000
/// seed = 1
/// adaptive_arrival_kind = "bernoulli"
///
/// [topology]
/// num_adaptive = 4
/// num_channels = 2
/// access_sets = [[1, 2], [1, 2], [1, 2], [2]]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub adaptive_rates: Vec<Rate>,
    pub uncoop_rates: Vec<Rate>,
    pub horizon: u64,
    pub seed: u64,
    #[serde(default)]
    pub adaptive_arrival_kind: ArrivalKind,
    pub topology: NetworkTopology,
}

impl NetworkConfig {
    pub fn from_toml_str(s: &str) -> Result<NetworkConfig, ModelError> {
        toml::from_str(s).map_err(|e| ModelError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, ModelError> {
        toml::to_string(self).map_err(|e| ModelError::Serialize(e.to_string()))
    }

    /// Validates and returns `self`, or the full violation list.
    pub fn validated(&self) -> Result<&Self, ModelError> {
        let violations = validate_config(self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::InvalidConfig(violations))
        }
    }
}

/// Checks every structural invariant of a [`NetworkConfig`] and returns a
/// human-readable description of each violation. An empty list means the
/// config is valid. Violations are data, not failures: an out-of-range rate
/// parses fine and is reported here.
pub fn validate_config(config: &NetworkConfig) -> Vec<String> {
    let mut violations = Vec::new();
    let topo = &config.topology;

    if topo.access_sets.len() != topo.num_adaptive {
        violations.push(format!(
            "access_sets has {} entries but num_adaptive is {}",
            topo.access_sets.len(),
            topo.num_adaptive
        ));
    }
    for (i, set) in topo.access_sets.iter().enumerate() {
        if set.is_empty() {
            violations.push(format!("access set empty for user {}", i + 1));
        }
        let mut seen = vec![false; topo.num_channels + 1];
        for &c in set {
            if c == 0 || c > topo.num_channels {
                violations.push(format!(
                    "channel {} out of range 1..={} in access set of user {}",
                    c,
                    topo.num_channels,
                    i + 1
                ));
            } else if seen[c] {
                violations.push(format!(
                    "duplicate channel {} in access set of user {}",
                    c,
                    i + 1
                ));
            } else {
                seen[c] = true;
            }
        }
    }

    if config.adaptive_rates.len() != topo.num_adaptive {
        violations.push(format!(
            "adaptive_rates has {} entries but num_adaptive is {}",
            config.adaptive_rates.len(),
            topo.num_adaptive
        ));
    }
    if config.uncoop_rates.len() != topo.num_channels {
        violations.push(format!(
            "uncoop_rates has {} entries but num_channels is {}",
            config.uncoop_rates.len(),
            topo.num_channels
        ));
    }
    for (i, r) in config.adaptive_rates.iter().enumerate() {
        if !r.is_valid() {
            violations.push(format!(
                "adaptive rate out of [0,1] for user {}: {}",
                i + 1,
                r.value()
            ));
        }
    }
    for (j, r) in config.uncoop_rates.iter().enumerate() {
        if !r.is_valid() {
            violations.push(format!(
                "uncooperative rate out of [0,1] for channel {}: {}",
                j + 1,
                r.value()
            ));
        }
    }

    if let ArrivalKind::Binomial { n, q } = config.adaptive_arrival_kind {
        if n == 0 {
            violations.push("binomial arrival batch size n must be >= 1".to_string());
        }
        if !(0.0..=1.0).contains(&q) || !q.is_finite() {
            violations.push(format!("binomial arrival probability out of [0,1]: {q}"));
        } else if n > 0 {
            let mean = f64::from(n) * q;
            for (i, r) in config.adaptive_rates.iter().enumerate() {
                if (r.value() - mean).abs() > 1e-12 {
                    violations.push(format!(
                        "adaptive rate {} for user {} does not equal binomial mean n*q = {}",
                        r.value(),
                        i + 1,
                        mean
                    ));
                }
            }
        }
    }

    if config.horizon == 0 {
        violations.push("horizon must be >= 1".to_string());
    }

    violations
}

/// Result of resolving one channel for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelOutcome {
    pub feedback: TernaryFeedback,
    /// The adaptive user whose transmission succeeded, if any.
    pub successful_adaptive_user: Option<usize>,
    /// True when the successful adaptive transmission carried no queued
    /// packet.
    pub dummy: bool,
}

/// Result of resolving all channels for one slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlotOutcome {
    pub channels: Vec<ChannelOutcome>,
    /// Queued packets that departed each adaptive user's queue this slot.
    pub adaptive_real_departures: Vec<u64>,
    /// Whether a legacy packet departed on each channel this slot.
    pub uncoop_departures: Vec<bool>,
}
