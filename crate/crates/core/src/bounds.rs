//! Throughput bounds for one adaptive user sharing a collision channel with
//! a legacy transmitter of arrival rate `lambda`.
//!
//! The lower bound is the exact long-run success rate of the back-off access
//! gate (transmit with probability `p` unless the previous slot collided),
//! optimized over `p`. The upper bound comes from a total-cost Markov
//! decision process over the number of slots whose legacy arrivals are still
//! unresolved: `sigma_star` is the maximal (negative) expected slot count
//! between adaptive successes, and the bound is `1 / (1 - sigma_star)`.
//!
//! Every closed form has an independent numerical oracle in this module:
//! the threshold-policy cost-to-go [`v1_closed_form`] against the linear
//! Bellman solve [`solve_bellman_linear`], the searched optimum
//! [`sigma_star`] against [`value_iteration_oracle`], and the lower bound
//! against the steady-state chain analysis [`pi_lb_steady_state`].

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{Action, Rate};

/// Default cap for the threshold search in [`sigma_star`].
pub const DEFAULT_Y_CAP: u32 = 10_000;

/// Width of the band around `lambda = 1/2` inside which the dedicated
/// closed-form branch is used (the general branch degenerates to 0/0 there).
pub const HALF_BRANCH_EPS: f64 = 1e-9;

/// Stationary tail mass above which [`pi_lb_steady_state`] flags its
/// truncation as questionable.
pub const TAIL_MASS_WARN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("lambda {0} outside the open interval (0, 1)")]
    LambdaNotInterior(f64),
    #[error("threshold Y must be >= 2, got {0}")]
    ThresholdTooSmall(u32),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("truncation must be >= {min}, got {got}")]
    TruncationTooSmall { got: usize, min: usize },
    #[error("no decrease of V(1) observed up to Y = {y_cap} at lambda = {lambda}; search inconclusive")]
    SearchCapReached { lambda: f64, y_cap: u32 },
    #[error("linear system is singular")]
    SingularSystem,
    #[error("value iteration did not meet tolerance {tol} within {sweeps} sweeps")]
    IterationLimit { tol: f64, sweeps: usize },
    #[error("value iteration result still moves with the truncation point; last estimate {sigma}")]
    TruncationNotConverged { sigma: f64 },
}

/// Largest throughput the back-off gate class guarantees for the adaptive
/// user: `1 - 2*lambda` up to `lambda = 1/3`, then `(1-lambda)^2 / (4*lambda)`.
/// Returns 1 at `lambda = 0` (the legacy user never transmits) and 0 at
/// `lambda = 1`.
pub fn lower_bound_throughput(lambda: Rate) -> f64 {
    let l = lambda.value();
    if l == 0.0 {
        1.0
    } else if l == 1.0 {
        0.0
    } else if l <= 1.0 / 3.0 {
        1.0 - 2.0 * l
    } else {
        (1.0 - l) * (1.0 - l) / (4.0 * l)
    }
}

/// The transmit probability attaining [`lower_bound_throughput`]:
/// 1 up to `lambda = 1/3`, then `(1-lambda) / (2*lambda)`.
pub fn optimal_transmit_prob(lambda: Rate) -> f64 {
    let l = lambda.value();
    if l <= 1.0 / 3.0 {
        1.0
    } else {
        (1.0 - l) / (2.0 * l)
    }
}

/// Cost-to-go of the first decision state under the threshold policy that
/// transmits in states `1..Y-1` and holds off in state `Y`. The value is the
/// negative expected number of slots until the next adaptive success.
///
/// The general closed form has a removable singularity at `lambda = 1/2`;
/// inputs within [`HALF_BRANCH_EPS`] of it are routed to the dedicated
/// branch.
pub fn v1_closed_form(lambda: Rate, y: u32) -> Result<f64, BoundsError> {
    let l = lambda.value();
    if l <= 0.0 || l >= 1.0 {
        return Err(BoundsError::LambdaNotInterior(l));
    }
    if y < 2 {
        return Err(BoundsError::ThresholdTooSmall(y));
    }
    let ym1 = (y - 1) as i32;
    if (l - 0.5).abs() < HALF_BRANCH_EPS {
        let num = 0.5f64.powi(ym1) + f64::from(y) - 1.5;
        let den = 0.5f64.powi(ym1 + 1) - 0.5;
        Ok(num / den)
    } else {
        let q = 1.0 - l;
        let num = (2.0 - 4.0 * l) * (l * q).powi(ym1) + 2.0 * l * q.powi(ym1) - l.powi(ym1);
        let den = (1.0 - 2.0 * l) * (l.powi(ym1) - 1.0) * q.powi(ym1);
        Ok(num / den)
    }
}

/// Solves the `(Y+1)`-state linear Bellman system of the same threshold
/// policy and returns `V(0..=Y)`. `V(0) = 0` is the absorbing success state;
/// states `1..Y-1` transmit, state `Y` does not. Independent oracle for
/// [`v1_closed_form`].
pub fn solve_bellman_linear(lambda: Rate, y: u32) -> Result<Vec<f64>, BoundsError> {
    let l = lambda.value();
    if l <= 0.0 || l >= 1.0 {
        return Err(BoundsError::LambdaNotInterior(l));
    }
    if y < 2 {
        return Err(BoundsError::ThresholdTooSmall(y));
    }
    let q = 1.0 - l;
    let y = y as usize;
    let n = y + 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);

    a[(0, 0)] = 1.0;

    // Transmit states: V(x) = sum_{w=1..x} l*q^(x-w) * (V(w+1) - 2).
    for x in 1..y {
        a[(x, x)] += 1.0;
        for w in 1..=x {
            a[(x, w + 1)] -= l * q.powi((x - w) as i32);
        }
        b[x] = -2.0 * (1.0 - q.powi(x as i32));
    }

    // Hold-off state: V(Y) = q^Y*(V(1)-1) + sum_{w=1..Y} l*q^(Y-w)*(V(w)-1).
    a[(y, y)] += 1.0;
    a[(y, 1)] -= q.powi(y as i32);
    for w in 1..=y {
        a[(y, w)] -= l * q.powi((y - w) as i32);
    }
    b[y] = -1.0;

    let lu = a.clone().lu();
    let mut solution = lu.solve(&b).ok_or(BoundsError::SingularSystem)?;
    // Iterative refinement: the system turns near-singular as the policy's
    // absorption time explodes (lambda > 1/2 with large Y), and plain LU
    // loses digits there.
    for _ in 0..2 {
        let residual = &b - &a * &solution;
        match lu.solve(&residual) {
            Some(correction) => solution += correction,
            None => break,
        }
    }
    Ok(solution.iter().copied().collect())
}

/// Optimal inter-success cost and the threshold attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaStar {
    /// Maximal value of the cost-to-go; always <= 0.
    pub sigma: f64,
    /// Smallest state at which the optimal threshold policy holds off.
    pub y_star: u32,
}

/// Maximizes [`v1_closed_form`] over thresholds `Y = 2, 3, ...`. The value
/// sequence rises to a single peak and then falls, so the search stops at
/// the first strict decrease; `y_cap` bounds the search when no decrease
/// appears (rates extremely close to 0 push the peak out arbitrarily far).
pub fn sigma_star(lambda: Rate, y_cap: u32) -> Result<SigmaStar, BoundsError> {
    assert!(y_cap >= 3, "y_cap must be >= 3");
    let mut prev = v1_closed_form(lambda, 2)?;
    for y in 3..=y_cap {
        let v = v1_closed_form(lambda, y)?;
        if v < prev {
            return Ok(SigmaStar {
                sigma: prev,
                y_star: y - 1,
            });
        }
        prev = v;
    }
    Err(BoundsError::SearchCapReached {
        lambda: lambda.value(),
        y_cap,
    })
}

/// Largest throughput any scheduler can extract from the channel:
/// `1 / (1 - sigma_star)`, with the boundary constants 1 at `lambda = 0`
/// and 0 at `lambda = 1`.
pub fn upper_bound_throughput(lambda: Rate) -> Result<f64, BoundsError> {
    let l = lambda.value();
    if l == 0.0 {
        Ok(1.0)
    } else if l == 1.0 {
        Ok(0.0)
    } else {
        let s = sigma_star(lambda, DEFAULT_Y_CAP)?;
        Ok(1.0 / (1.0 - s.sigma))
    }
}

/// Steady-state performance of the back-off gate on one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiLbSteadyState {
    /// Long-run rate of adaptive successes (including dummy packets).
    pub throughput: f64,
    /// Stationary mean of the legacy queue backlog.
    pub expected_backlog: f64,
    /// Stationary probability mass sitting at the truncation boundary.
    pub tail_mass: f64,
    /// True when `tail_mass` exceeds [`TAIL_MASS_WARN`].
    pub tail_warning: bool,
}

/// Solves the stationary distribution of the two-user chain under the
/// back-off gate: states are (legacy backlog `0..=truncation`, backing-off
/// flag). Each slot: a Bernoulli(`lambda`) arrival, then the gate transmits
/// with probability `p` unless the previous slot collided, then the channel
/// resolves. Arrivals beyond the truncation are lumped onto the boundary
/// state; `tail_mass` reports how much probability ends up there.
///
/// Independent oracle for [`lower_bound_throughput`] when `p` is
/// [`optimal_transmit_prob`].
pub fn pi_lb_steady_state(
    lambda: Rate,
    p: f64,
    truncation: usize,
) -> Result<PiLbSteadyState, BoundsError> {
    let l = lambda.value();
    if l <= 0.0 || l >= 1.0 {
        return Err(BoundsError::LambdaNotInterior(l));
    }
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(BoundsError::InvalidProbability(p));
    }
    if truncation < 10 {
        return Err(BoundsError::TruncationTooSmall {
            got: truncation,
            min: 10,
        });
    }

    let k = truncation;
    let n = 2 * (k + 1);
    let idx = |q: usize, backoff: bool| 2 * q + usize::from(backoff);

    // a = P^T - I, with the final balance equation replaced by normalization.
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut add = |from: usize, to: usize, prob: f64| {
        if prob != 0.0 {
            a[(to, from)] += prob;
        }
    };

    for q in 0..=k {
        // Open state: gate may transmit.
        let s = idx(q, false);
        for (arrival, w) in [(0usize, 1.0 - l), (1usize, l)] {
            let q_after = (q + arrival).min(k);
            if q_after == 0 {
                // Empty queue: transmission succeeds or the slot idles.
                add(s, idx(0, false), w);
            } else {
                // Nonempty queue: transmitting collides, holding back lets
                // the legacy packet through.
                add(s, idx(q_after, true), w * p);
                add(s, idx(q_after - 1, false), w * (1.0 - p));
            }
        }
        // Backing-off state: transmission suppressed for one slot.
        let s = idx(q, true);
        for (arrival, w) in [(0usize, 1.0 - l), (1usize, l)] {
            let q_after = (q + arrival).min(k);
            if q_after == 0 {
                add(s, idx(0, false), w);
            } else {
                add(s, idx(q_after - 1, false), w);
            }
        }
    }

    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;

    let pi = a.lu().solve(&b).ok_or(BoundsError::SingularSystem)?;

    let throughput = pi[idx(0, false)] * (1.0 - l) * p;
    let expected_backlog: f64 = (0..=k)
        .map(|q| (pi[idx(q, false)] + pi[idx(q, true)]) * q as f64)
        .sum();
    let tail_mass = pi[idx(k, false)] + pi[idx(k, true)];
    Ok(PiLbSteadyState {
        throughput,
        expected_backlog,
        tail_mass,
        tail_warning: tail_mass > TAIL_MASS_WARN,
    })
}

/// Exact one-step transition distribution from state `x >= 1` of the
/// inter-success decision process, before any truncation. The state is the
/// number of slots whose legacy arrivals are still unresolved.
///
/// Transmitting either succeeds (probability `(1-lambda)^x`, absorbing state
/// 0) or collides and costs the back-off slot as well; holding off always
/// advances one slot. Every row sums to 1.
pub fn transition_kernel(lambda: Rate, x: usize, action: Action) -> Vec<(usize, f64)> {
    assert!(x >= 1, "state must be >= 1");
    let l = lambda.value();
    let q = 1.0 - l;
    match action {
        Action::Transmit => {
            let mut rows = Vec::with_capacity(x + 1);
            rows.push((0, q.powi(x as i32)));
            for y in 2..=x + 1 {
                rows.push((y, l * q.powi((x + 1 - y) as i32)));
            }
            rows
        }
        Action::NoTransmit => {
            let mut rows = Vec::with_capacity(x);
            rows.push((1, q.powi(x as i32 - 1)));
            for y in 2..=x {
                rows.push((y, l * q.powi((x - y) as i32)));
            }
            rows
        }
    }
}

/// The inter-success decision process truncated at `x_max`, with transition
/// mass beyond the boundary lumped onto `x_max` so rows still sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SspModel {
    pub lambda: Rate,
    pub x_max: usize,
}

impl SspModel {
    pub fn new(lambda: Rate, x_max: usize) -> SspModel {
        SspModel { lambda, x_max }
    }

    /// Truncated transition distribution from state `1 <= x <= x_max`.
    pub fn transitions(&self, x: usize, action: Action) -> Vec<(usize, f64)> {
        assert!(x >= 1 && x <= self.x_max, "state out of range");
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (y, prob) in transition_kernel(self.lambda, x, action) {
            let y = y.min(self.x_max);
            match out.iter_mut().find(|(s, _)| *s == y) {
                Some((_, acc)) => *acc += prob,
                None => out.push((y, prob)),
            }
        }
        out
    }

    /// Slot cost of the step: an accepted collision burns the slot plus the
    /// forced back-off slot; holding off burns one slot; success is free.
    pub fn reward(action: Action, next_state: usize) -> f64 {
        match action {
            Action::Transmit => {
                if next_state == 0 {
                    0.0
                } else {
                    -2.0
                }
            }
            Action::NoTransmit => -1.0,
        }
    }
}

/// Value iteration on the truncated [`SspModel`], maximizing total expected
/// reward from state 1. Independent oracle for [`sigma_star`].
///
/// Sweeps stop once the extrapolated remaining error drops below `tol`
/// (estimated from the observed geometric decay of successive sweep
/// differences). The run is then repeated with the truncation point doubled;
/// if the root value moves by more than a few multiples of `tol` the
/// doubling continues.
pub fn value_iteration_oracle(lambda: Rate, x_max: usize, tol: f64) -> Result<f64, BoundsError> {
    let l = lambda.value();
    if l <= 0.0 || l >= 1.0 {
        return Err(BoundsError::LambdaNotInterior(l));
    }
    if x_max < 50 {
        return Err(BoundsError::TruncationTooSmall { got: x_max, min: 50 });
    }
    assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");

    const MAX_DOUBLINGS: usize = 4;
    let slack = (4.0 * tol).max(1e-12);
    let mut x_cur = x_max;
    let mut v1 = vi_truncated(lambda, x_cur, tol)?;
    for _ in 0..MAX_DOUBLINGS {
        let v1_refined = vi_truncated(lambda, 2 * x_cur, tol)?;
        if (v1_refined - v1).abs() <= slack {
            return Ok(v1_refined);
        }
        x_cur *= 2;
        v1 = v1_refined;
    }
    Err(BoundsError::TruncationNotConverged { sigma: v1 })
}

fn vi_truncated(lambda: Rate, x_max: usize, tol: f64) -> Result<f64, BoundsError> {
    const MAX_SWEEPS: usize = 500_000;
    let model = SspModel::new(lambda, x_max);

    // Transition tables are fixed; precompute rows for both actions.
    let tr_rows: Vec<Vec<(usize, f64)>> = (1..=x_max)
        .map(|x| model.transitions(x, Action::Transmit))
        .collect();
    let nt_rows: Vec<Vec<(usize, f64)>> = (1..=x_max)
        .map(|x| model.transitions(x, Action::NoTransmit))
        .collect();

    let mut v = vec![0.0f64; x_max + 1];
    let mut v_next = vec![0.0f64; x_max + 1];
    let mut prev_delta = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let mut delta = 0.0f64;
        for x in 1..=x_max {
            let q_tr: f64 = tr_rows[x - 1]
                .iter()
                .map(|&(y, p)| p * (SspModel::reward(Action::Transmit, y) + v[y]))
                .sum();
            let q_nt: f64 = nt_rows[x - 1]
                .iter()
                .map(|&(y, p)| p * (SspModel::reward(Action::NoTransmit, y) + v[y]))
                .sum();
            let val = q_tr.max(q_nt);
            delta = delta.max((val - v[x]).abs());
            v_next[x] = val;
        }
        std::mem::swap(&mut v, &mut v_next);

        if delta == 0.0 {
            return Ok(v[1]);
        }
        let rho = (delta / prev_delta).clamp(0.0, 0.9999);
        if delta <= tol && delta * rho / (1.0 - rho) <= tol {
            return Ok(v[1]);
        }
        prev_delta = delta;
    }
    Err(BoundsError::IterationLimit {
        tol,
        sweeps: MAX_SWEEPS,
    })
}

/// One row of the bounds table for a channel with legacy rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsResult {
    pub lambda: f64,
    pub mu_lb: f64,
    pub p_star: f64,
    pub sigma_star: f64,
    /// 0 at the boundary rates 0 and 1, where no threshold search runs.
    pub y_star: u32,
    pub mu_ub: f64,
}

/// Computes the full bounds row for one rate. At the boundary rates the
/// sentinel values `sigma_star = 0, y_star = 0` (rate 0) and
/// `sigma_star = -inf, y_star = 0` (rate 1) keep `mu_ub = 1/(1 - sigma_star)`
/// consistent.
pub fn compute_bounds(lambda: Rate, y_cap: u32) -> Result<BoundsResult, BoundsError> {
    let l = lambda.value();
    if l == 0.0 {
        return Ok(BoundsResult {
            lambda: l,
            mu_lb: 1.0,
            p_star: 1.0,
            sigma_star: 0.0,
            y_star: 0,
            mu_ub: 1.0,
        });
    }
    if l == 1.0 {
        return Ok(BoundsResult {
            lambda: l,
            mu_lb: 0.0,
            p_star: 0.0,
            sigma_star: f64::NEG_INFINITY,
            y_star: 0,
            mu_ub: 0.0,
        });
    }
    let s = sigma_star(lambda, y_cap)?;
    Ok(BoundsResult {
        lambda: l,
        mu_lb: lower_bound_throughput(lambda),
        p_star: optimal_transmit_prob(lambda),
        sigma_star: s.sigma,
        y_star: s.y_star,
        mu_ub: 1.0 / (1.0 - s.sigma),
    })
}
