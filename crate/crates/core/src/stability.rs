//! Feasibility checks for the network stability conditions.
//!
//! A rate vector is supportable when the adaptive demand can be split over
//! the channels: each user's split must cover its arrival rate, each entry
//! stays in [0, 1], and each channel's total stays under its capacity. With
//! capacity set to the guaranteed per-channel throughput this is the
//! sufficient condition (a randomized scheduler achieves it); with the upper
//! bound it is the necessary condition. Both are bipartite transportation
//! feasibility problems, solved exactly by max-flow.

use thiserror::Error;

use crate::bounds::{self, BoundsError};
use crate::model::{NetworkConfig, Rate};
use crate::policies::RhoMatrix;

/// Tolerance on `|max-flow - total demand|` when declaring feasibility.
/// Boundary equality counts as feasible, matching the non-strict
/// inequalities of the stability conditions.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Residual capacities below this are treated as exhausted.
const FLOW_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("sweep step {0} outside (0, 0.5]")]
    InvalidStep(f64),
    #[error("sweep bound {0} outside [0, 1]")]
    InvalidMax(f64),
    #[error("sweep axis: {0}")]
    InvalidAxis(String),
}

/// The transportation network behind the feasibility checks: a source feeds
/// each adaptive user at its arrival rate, user-channel edges of capacity 1
/// mirror the access sets, and each channel drains into the sink at its
/// throughput capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    pub num_users: usize,
    pub num_channels: usize,
    /// Source -> user capacities (the arrival rates).
    pub user_caps: Vec<f64>,
    /// Channel -> sink capacities (the per-channel throughputs).
    pub channel_caps: Vec<f64>,
    /// User-channel edges, capacity 1 each; mirrors the access sets exactly.
    pub edges: Vec<(usize, usize)>,
}

impl FlowNetwork {
    /// Nodes: source, each user, each channel, sink.
    pub fn node_count(&self) -> usize {
        self.num_users + self.num_channels + 2
    }
}

/// A maximum flow together with the per-edge flows on the user-channel
/// edges, aligned with [`FlowNetwork::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlowResult {
    pub value: f64,
    pub edge_flows: Vec<f64>,
}

/// Exact max-flow by shortest augmenting paths (BFS). Capacities are
/// nonnegative reals; flows satisfy conservation and capacity within
/// 1e-12.
pub fn max_flow(network: &FlowNetwork) -> MaxFlowResult {
    let n_users = network.num_users;
    let n_channels = network.num_channels;
    let source = 0usize;
    let sink = 1 + n_users + n_channels;
    let node_count = network.node_count();

    // Directed edges stored as pairs (edge, reverse-edge) with residual
    // capacities; `user_edge_ids[k]` is the forward id of `edges[k]`.
    let mut heads: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    let mut to: Vec<usize> = Vec::new();
    let mut residual: Vec<f64> = Vec::new();
    let push_edge = |heads: &mut Vec<Vec<usize>>,
                         to: &mut Vec<usize>,
                         residual: &mut Vec<f64>,
                         u: usize,
                         v: usize,
                         cap: f64| {
        debug_assert!(cap >= 0.0 && cap.is_finite());
        let id = to.len();
        heads[u].push(id);
        to.push(v);
        residual.push(cap);
        heads[v].push(id + 1);
        to.push(u);
        residual.push(0.0);
        id
    };

    for (i, &cap) in network.user_caps.iter().enumerate() {
        push_edge(&mut heads, &mut to, &mut residual, source, 1 + i, cap);
    }
    let mut user_edge_ids = Vec::with_capacity(network.edges.len());
    for &(i, j) in &network.edges {
        debug_assert!(i < n_users && j < n_channels);
        let id = push_edge(
            &mut heads,
            &mut to,
            &mut residual,
            1 + i,
            1 + n_users + j,
            1.0,
        );
        user_edge_ids.push(id);
    }
    for (j, &cap) in network.channel_caps.iter().enumerate() {
        push_edge(
            &mut heads,
            &mut to,
            &mut residual,
            1 + n_users + j,
            sink,
            cap,
        );
    }

    let mut value = 0.0;
    let mut parent_edge: Vec<Option<usize>> = vec![None; node_count];
    loop {
        parent_edge.fill(None);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(source);
        let mut reached = false;
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in &heads[u] {
                let v = to[e];
                if v != source && parent_edge[v].is_none() && residual[e] > FLOW_EPS {
                    parent_edge[v] = Some(e);
                    if v == sink {
                        reached = true;
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if !reached {
            break;
        }

        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let e = parent_edge[v].expect("path edge");
            bottleneck = bottleneck.min(residual[e]);
            v = to[e ^ 1];
        }
        let mut v = sink;
        while v != source {
            let e = parent_edge[v].expect("path edge");
            residual[e] -= bottleneck;
            residual[e ^ 1] += bottleneck;
            v = to[e ^ 1];
        }
        value += bottleneck;
    }

    let edge_flows = user_edge_ids.iter().map(|&e| residual[e ^ 1]).collect();
    MaxFlowResult { value, edge_flows }
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// A rate split witnessing feasibility, present iff `feasible`.
    pub rho: Option<RhoMatrix>,
    /// Max-flow minus total adaptive demand; nonpositive, and above
    /// `-`[`FEASIBILITY_TOL`] exactly when feasible.
    pub slack: f64,
}

fn check_with_caps(
    config: &NetworkConfig,
    channel_caps: Vec<f64>,
) -> Result<FeasibilityVerdict, StabilityError> {
    let topo = &config.topology;
    let user_caps: Vec<f64> = config.adaptive_rates.iter().map(|r| r.value()).collect();
    let mut edges = Vec::new();
    for i in 0..topo.num_adaptive {
        for j in topo.channels_of(i) {
            edges.push((i, j));
        }
    }
    let network = FlowNetwork {
        num_users: topo.num_adaptive,
        num_channels: topo.num_channels,
        user_caps: user_caps.clone(),
        channel_caps,
        edges: edges.clone(),
    };
    let result = max_flow(&network);
    let demand: f64 = user_caps.iter().sum();
    let slack = result.value - demand;
    let feasible = slack >= -FEASIBILITY_TOL;
    let rho = feasible.then(|| {
        let mut rho = RhoMatrix::zeros(topo.num_adaptive, topo.num_channels);
        for (k, &(i, j)) in edges.iter().enumerate() {
            rho.set(i, j, result.edge_flows[k]);
        }
        rho
    });
    Ok(FeasibilityVerdict {
        feasible,
        rho,
        slack,
    })
}

/// Sufficient stability condition: channel capacities are the guaranteed
/// throughputs [`bounds::lower_bound_throughput`] of each channel's legacy
/// rate. A feasible verdict carries a rate split realizing the demand.
pub fn check_sufficient(config: &NetworkConfig) -> Result<FeasibilityVerdict, StabilityError> {
    let config = config
        .validated()
        .map_err(|_| StabilityError::InvalidConfig(crate::model::validate_config(config)))?;
    let caps = config
        .uncoop_rates
        .iter()
        .map(|&r| bounds::lower_bound_throughput(r))
        .collect();
    check_with_caps(config, caps)
}

/// Necessary stability condition: identical to [`check_sufficient`] but with
/// capacities set to [`bounds::upper_bound_throughput`].
pub fn check_necessary(config: &NetworkConfig) -> Result<FeasibilityVerdict, StabilityError> {
    let config = config
        .validated()
        .map_err(|_| StabilityError::InvalidConfig(crate::model::validate_config(config)))?;
    let caps = config
        .uncoop_rates
        .iter()
        .map(|&r| bounds::upper_bound_throughput(r))
        .collect::<Result<Vec<_>, _>>()?;
    check_with_caps(config, caps)
}

/// One grid point of a region sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Full adaptive rate vector evaluated at this grid point.
    pub rates: Vec<f64>,
    pub sufficient: bool,
    pub necessary: bool,
}

/// Sweeps the arrival rates of the `axis` users (0-based) over the grid
/// `0, step, 2*step, ..., <= max`, evaluating both feasibility checks at
/// each point. Consecutive rows bracket the stability boundaries.
pub fn sweep_region(
    template: &NetworkConfig,
    axis: &[usize],
    step: f64,
    max: f64,
) -> Result<Vec<SweepRow>, StabilityError> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(StabilityError::InvalidStep(step));
    }
    if !(0.0..=1.0).contains(&max) {
        return Err(StabilityError::InvalidMax(max));
    }
    if axis.is_empty() {
        return Err(StabilityError::InvalidAxis("no users given".into()));
    }
    for &u in axis {
        if u >= template.topology.num_adaptive {
            return Err(StabilityError::InvalidAxis(format!(
                "user {} out of range 1..={}",
                u + 1,
                template.topology.num_adaptive
            )));
        }
    }
    template
        .validated()
        .map_err(|_| StabilityError::InvalidConfig(crate::model::validate_config(template)))?;

    let mut rows = Vec::new();
    let mut k = 0u32;
    loop {
        let rate = f64::from(k) * step;
        if rate > max + 1e-12 {
            break;
        }
        let mut config = template.clone();
        for &u in axis {
            config.adaptive_rates[u] = Rate::new(rate.min(1.0)).expect("grid rate in [0,1]");
        }
        let sufficient = check_sufficient(&config)?.feasible;
        let necessary = check_necessary(&config)?.feasible;
        rows.push(SweepRow {
            rates: config.adaptive_rates.iter().map(|r| r.value()).collect(),
            sufficient,
            necessary,
        });
        k += 1;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArrivalKind, NetworkTopology};

    fn fig_config(lambda_a: f64, lambda_u: f64) -> NetworkConfig {
        NetworkConfig {
            adaptive_rates: vec![Rate::new(lambda_a).unwrap(); 4],
            uncoop_rates: vec![Rate::new(lambda_u).unwrap(); 2],
            horizon: 1,
            seed: 0,
            adaptive_arrival_kind: ArrivalKind::Bernoulli,
            topology: NetworkTopology {
                num_adaptive: 4,
                num_channels: 2,
                access_sets: vec![vec![1, 2], vec![1, 2], vec![1, 2], vec![2]],
            },
        }
    }

    fn two_user_config(lambda_a: f64, lambda_u: f64) -> NetworkConfig {
        NetworkConfig {
            adaptive_rates: vec![Rate::new(lambda_a).unwrap()],
            uncoop_rates: vec![Rate::new(lambda_u).unwrap()],
            horizon: 1,
            seed: 0,
            adaptive_arrival_kind: ArrivalKind::Bernoulli,
            topology: NetworkTopology {
                num_adaptive: 1,
                num_channels: 1,
                access_sets: vec![vec![1]],
            },
        }
    }

    #[test]
    fn single_edge_flow() {
        let network = FlowNetwork {
            num_users: 1,
            num_channels: 1,
            user_caps: vec![0.4],
            channel_caps: vec![0.6],
            edges: vec![(0, 0)],
        };
        let result = max_flow(&network);
        assert!((result.value - 0.4).abs() < 1e-12);
        assert!((result.edge_flows[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn boundary_instance_saturates() {
        // Four users at 0.3 over two channels of capacity 0.6 fills both.
        let network = FlowNetwork {
            num_users: 4,
            num_channels: 2,
            user_caps: vec![0.3; 4],
            channel_caps: vec![0.6; 2],
            edges: vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1), (3, 1)],
        };
        let result = max_flow(&network);
        assert!((result.value - 1.2).abs() < 1e-12);
    }

    #[test]
    fn sufficient_boundary_and_beyond() {
        assert!(check_sufficient(&fig_config(0.300, 0.2)).unwrap().feasible);
        assert!(!check_sufficient(&fig_config(0.305, 0.2)).unwrap().feasible);
    }

    #[test]
    fn zero_demand_is_feasible_with_zero_rho() {
        let verdict = check_sufficient(&fig_config(0.0, 0.2)).unwrap();
        assert!(verdict.feasible);
        let rho = verdict.rho.unwrap();
        for i in 0..4 {
            assert_eq!(rho.row_sum(i), 0.0);
        }
    }

    #[test]
    fn feasible_rho_satisfies_both_conditions() {
        let verdict = check_sufficient(&fig_config(0.25, 0.2)).unwrap();
        assert!(verdict.feasible);
        let rho = verdict.rho.unwrap();
        for i in 0..4 {
            assert!(rho.row_sum(i) >= 0.25 - 1e-9, "row {i}: {}", rho.row_sum(i));
        }
        for j in 0..2 {
            assert!(rho.channel_sum(j) <= 0.6 + 1e-9);
        }
        for i in 0..4 {
            for j in 0..2 {
                let v = rho.get(i, j);
                assert!((0.0..=1.0 + 1e-12).contains(&v));
                if v > 0.0 {
                    assert!(fig_config(0.25, 0.2).topology.allows(i, j));
                }
            }
        }
    }

    #[test]
    fn equality_boundary_single_user() {
        let mu = bounds::lower_bound_throughput(Rate::new(0.2).unwrap());
        let verdict = check_sufficient(&two_user_config(mu, 0.2)).unwrap();
        assert!(verdict.feasible);
        let rho = verdict.rho.unwrap();
        assert!((rho.get(0, 0) - mu).abs() < 1e-9);
    }

    #[test]
    fn necessary_weaker_than_sufficient() {
        // mu_ub(0.5) = 0.2: 0.19 fits, 0.21 does not.
        assert!(check_necessary(&two_user_config(0.19, 0.5)).unwrap().feasible);
        assert!(!check_necessary(&two_user_config(0.21, 0.5)).unwrap().feasible);
        // 0.19 > mu_lb(0.5) = 0.125, so the sufficient check rejects it.
        assert!(!check_sufficient(&two_user_config(0.19, 0.5)).unwrap().feasible);
    }

    #[test]
    fn sweep_brackets_fig_boundary() {
        let rows = sweep_region(&fig_config(0.0, 0.2), &[0, 1, 2, 3], 0.05, 1.0).unwrap();
        // Sufficient flips between 0.30 and 0.35.
        let at = |r: f64| {
            rows.iter()
                .find(|row| (row.rates[0] - r).abs() < 1e-9)
                .unwrap()
        };
        assert!(at(0.30).sufficient);
        assert!(!at(0.35).sufficient);
        for row in &rows {
            assert!(!row.sufficient || row.necessary);
        }
    }

    #[test]
    fn degenerate_sweep_has_single_zero_row() {
        let rows = sweep_region(&fig_config(0.9, 0.2), &[0, 1, 2, 3], 0.05, 0.0).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].rates, vec![0.0; 4]);
        assert!(rows[0].sufficient);
    }

    #[test]
    fn sweep_rejects_bad_step() {
        assert!(matches!(
            sweep_region(&fig_config(0.1, 0.2), &[0], 0.6, 1.0),
            Err(StabilityError::InvalidStep(_))
        ));
        assert!(matches!(
            sweep_region(&fig_config(0.1, 0.2), &[9], 0.1, 1.0),
            Err(StabilityError::InvalidAxis(_))
        ));
    }
}
