//! Discrete-event simulation of the controlled system under a fixed
//! policy, accumulating the discounted money flows exactly.
//!
//! Both waiting times in play are exponential, so the simulator draws the
//! next event from competing exponentials: one arrival clock at rate
//! `lambda` plus one departure clock per active nonempty queue at its
//! `mu_i` (occupancy does not change a queue's total service rate).
//! Between events the continuous charge rate is constant and its
//! discounted integral is added in closed form — no time stepping, so the
//! only gap to the infinite-horizon functional is the truncated tail,
//! bounded by `value_bound * exp(-gamma * t)`.
//!
//! Randomness comes from ChaCha8 streams: replication `k` of seed `s`
//! uses `ChaCha8Rng::seed_from_u64(s)` with stream id `k`, so replications
//! are independent and any single replication is reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver::{self, ArrivalAction, DepartureAction, PolicyTable};
use crate::state::{StateSpace, SystemState};

/// Name of the generator scheme, echoed into summaries so a stored result
/// pins down the exact random sequence.
pub const RNG_SCHEME: &str = "chacha8; per-replication stream id = replication index";

/// Horizon and replication settings for simulation runs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub initial_state: SystemState,
    /// Stop once the remaining discounted mass bound falls below this;
    /// `None` picks `1e-6 * value_bound`.
    pub truncation_epsilon: Option<f64>,
    pub replications: u64,
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn new(initial_state: SystemState, replications: u64, rng_seed: u64) -> Self {
        Self { initial_state, truncation_epsilon: None, replications, rng_seed }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidSimulation("replications must be at least 1".into()));
        }
        if let Some(eps) = self.truncation_epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidSimulation(format!(
                    "truncation epsilon must be positive and finite, got {eps}"
                )));
            }
        }
        let space = params.state_space()?;
        if self.initial_state.queue_count() != space.queue_count() {
            return Err(Error::QueueCountMismatch {
                expected: space.queue_count(),
                got: self.initial_state.queue_count(),
            });
        }
        space.encode(&self.initial_state)?;
        Ok(())
    }

    /// Truncation threshold actually used for `params`.
    pub fn effective_epsilon(&self, params: &ModelParams) -> f64 {
        self.truncation_epsilon
            .unwrap_or_else(|| 1e-6 * solver::value_bound(params))
    }
}

/// Discounted money totals of one run (or means over runs), split by
/// component. Every component is a nonnegative magnitude; the signs live
/// in [`CostBreakdown::total`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub build: f64,
    pub destroy: f64,
    pub delay: f64,
    pub keepalive: f64,
    pub reward: f64,
    pub fine: f64,
}

impl CostBreakdown {
    /// Net discounted value: rewards minus every cost component.
    pub fn total(&self) -> f64 {
        -self.build - self.destroy - self.delay - self.keepalive + self.reward - self.fine
    }

    fn add_scaled(&mut self, other: &CostBreakdown, w: f64) {
        self.build += w * other.build;
        self.destroy += w * other.destroy;
        self.delay += w * other.delay;
        self.keepalive += w * other.keepalive;
        self.reward += w * other.reward;
        self.fine += w * other.fine;
    }
}

/// One log row: a money increment or a costless state change.
#[derive(Debug, Clone, Serialize)]
pub struct SimEvent {
    pub time: f64,
    /// "hold", "arrival", or "departure".
    pub kind: &'static str,
    pub queue: Option<usize>,
    pub state_after: usize,
    /// Discounted magnitude added to `component` (0 for costless events).
    pub discounted_increment: f64,
    /// "delay", "keepalive", "build", "destroy", "reward", "fine", "none".
    pub component: &'static str,
}

/// Aggregate over independent replications.
#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    /// Per-component means across replications.
    pub breakdown: CostBreakdown,
    pub replications: u64,
    pub seed: u64,
    pub truncation_epsilon: f64,
    /// Generator scheme used, for reproducibility.
    pub rng: String,
}

struct Run<'a> {
    params: &'a ModelParams,
    space: StateSpace,
    policy: &'a PolicyTable,
    horizon: f64,
    gamma: f64,
}

impl Run<'_> {
    /// Simulate one path; optionally append per-increment log rows.
    fn simulate(
        &self,
        initial: &SystemState,
        rng: &mut ChaCha8Rng,
        mut log: Option<&mut Vec<SimEvent>>,
    ) -> Result<CostBreakdown> {
        let p = self.params;
        let mut levels = initial.levels().to_vec();
        let mut idx = self.space.encode(initial)?;
        let mut out = CostBreakdown::default();
        let mut t = 0.0f64;
        while t < self.horizon {
            let mut rate = p.lambda;
            for (i, &level) in levels.iter().enumerate() {
                if level >= 1 {
                    rate += p.mu[i];
                }
            }
            let u: f64 = rng.random();
            let dt = -(1.0 - u).ln() / rate;
            let t_next = (t + dt).min(self.horizon);

            // Discounted holding over the sojourn, in closed form.
            let (delay_rate, keep_rate) = p.holding_rate_parts(&levels);
            let weight =
                ((-self.gamma * t).exp() - (-self.gamma * t_next).exp()) / self.gamma;
            out.delay += delay_rate * weight;
            out.keepalive += keep_rate * weight;
            if let Some(log) = log.as_deref_mut() {
                if delay_rate > 0.0 {
                    log.push(SimEvent {
                        time: t,
                        kind: "hold",
                        queue: None,
                        state_after: idx,
                        discounted_increment: delay_rate * weight,
                        component: "delay",
                    });
                }
                if keep_rate > 0.0 {
                    log.push(SimEvent {
                        time: t,
                        kind: "hold",
                        queue: None,
                        state_after: idx,
                        discounted_increment: keep_rate * weight,
                        component: "keepalive",
                    });
                }
            }
            if t + dt >= self.horizon {
                break;
            }
            t = t_next;
            let disc = (-self.gamma * t).exp();

            // Which clock fired.
            let draw: f64 = rng.random::<f64>() * rate;
            if draw < p.lambda {
                match self.policy.arrival(idx) {
                    ArrivalAction::Reject => {
                        out.fine += disc * p.f;
                        if let Some(log) = log.as_deref_mut() {
                            log.push(SimEvent {
                                time: t,
                                kind: "arrival",
                                queue: None,
                                state_after: idx,
                                discounted_increment: disc * p.f,
                                component: "fine",
                            });
                        }
                    }
                    ArrivalAction::Schedule(i) => {
                        debug_assert!(levels[i] >= 0 && levels[i] < self.space.buffer());
                        levels[i] += 1;
                        idx += self.space.weight(i);
                        out.reward += disc * p.r;
                        if let Some(log) = log.as_deref_mut() {
                            log.push(SimEvent {
                                time: t,
                                kind: "arrival",
                                queue: Some(i),
                                state_after: idx,
                                discounted_increment: disc * p.r,
                                component: "reward",
                            });
                        }
                    }
                    ArrivalAction::ActivateAndSchedule(i) => {
                        debug_assert_eq!(levels[i], crate::state::INACTIVE_LEVEL);
                        levels[i] = 1;
                        idx += 2 * self.space.weight(i);
                        out.reward += disc * p.r;
                        out.build += disc * p.beta;
                        if let Some(log) = log.as_deref_mut() {
                            log.push(SimEvent {
                                time: t,
                                kind: "arrival",
                                queue: Some(i),
                                state_after: idx,
                                discounted_increment: disc * p.r,
                                component: "reward",
                            });
                            log.push(SimEvent {
                                time: t,
                                kind: "arrival",
                                queue: Some(i),
                                state_after: idx,
                                discounted_increment: disc * p.beta,
                                component: "build",
                            });
                        }
                    }
                }
            } else {
                // Walk the departure clocks in queue order.
                let mut acc = p.lambda;
                let mut fired = None;
                for (i, &level) in levels.iter().enumerate() {
                    if level >= 1 {
                        acc += p.mu[i];
                        if draw < acc {
                            fired = Some(i);
                            break;
                        }
                    }
                }
                // Guard against draw == rate at the float boundary.
                let i = fired.unwrap_or_else(|| {
                    levels
                        .iter()
                        .rposition(|&l| l >= 1)
                        .expect("some departure clock is armed when draw >= lambda")
                });
                debug_assert!(levels[i] >= 1, "departures only from busy queues");
                if levels[i] >= 2 {
                    levels[i] -= 1;
                    idx -= self.space.weight(i);
                    if let Some(log) = log.as_deref_mut() {
                        log.push(SimEvent {
                            time: t,
                            kind: "departure",
                            queue: Some(i),
                            state_after: idx,
                            discounted_increment: 0.0,
                            component: "none",
                        });
                    }
                } else {
                    match self.policy.departure(idx, i) {
                        Some(DepartureAction::Keep) => {
                            levels[i] = 0;
                            idx -= self.space.weight(i);
                            if let Some(log) = log.as_deref_mut() {
                                log.push(SimEvent {
                                    time: t,
                                    kind: "departure",
                                    queue: Some(i),
                                    state_after: idx,
                                    discounted_increment: 0.0,
                                    component: "none",
                                });
                            }
                        }
                        Some(DepartureAction::Destroy) => {
                            levels[i] = crate::state::INACTIVE_LEVEL;
                            idx -= 2 * self.space.weight(i);
                            out.destroy += disc * p.psi;
                            if let Some(log) = log.as_deref_mut() {
                                log.push(SimEvent {
                                    time: t,
                                    kind: "departure",
                                    queue: Some(i),
                                    state_after: idx,
                                    discounted_increment: disc * p.psi,
                                    component: "destroy",
                                });
                            }
                        }
                        None => {
                            return Err(Error::InvalidSimulation(format!(
                                "policy lacks a departure decision at state {idx}, queue {i}"
                            )))
                        }
                    }
                }
            }
            debug_assert!(self.space.encode_levels(&levels).unwrap() == idx);
        }
        Ok(out)
    }
}

fn prepare<'a>(
    policy: &'a PolicyTable,
    params: &'a ModelParams,
    config: &SimConfig,
) -> Result<Run<'a>> {
    params.validate()?;
    config.validate(params)?;
    let space = params.state_space()?;
    if policy.state_count() != space.cardinality() || policy.queue_count() != space.queue_count()
    {
        return Err(Error::TableSizeMismatch {
            expected: space.cardinality(),
            got: policy.state_count(),
        });
    }
    let bound = solver::value_bound(params);
    let eps = config.effective_epsilon(params);
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidSimulation(format!(
            "truncation threshold resolves to {eps}; set it explicitly for zero-cost models"
        )));
    }
    // Beyond this time the whole remaining discounted stream is below eps.
    let horizon = if bound <= eps { 0.0 } else { (bound / eps).ln() / params.gamma };
    Ok(Run { params, space, policy, horizon, gamma: params.gamma })
}

/// Simulate a single path and return its discounted component totals.
/// `seed` is used with stream id 0.
pub fn simulate_once(
    policy: &PolicyTable,
    params: &ModelParams,
    config: &SimConfig,
    seed: u64,
) -> Result<CostBreakdown> {
    let run = prepare(policy, params, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    run.simulate(&config.initial_state, &mut rng, None)
}

/// As [`simulate_once`], also appending one row per event and per money
/// increment to `log`.
pub fn simulate_once_logged(
    policy: &PolicyTable,
    params: &ModelParams,
    config: &SimConfig,
    seed: u64,
    log: &mut Vec<SimEvent>,
) -> Result<CostBreakdown> {
    let run = prepare(policy, params, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    run.simulate(&config.initial_state, &mut rng, Some(log))
}

/// Mean and standard error of the discounted total over independent
/// replications, plus per-component means. Replication `k` runs on stream
/// `k` of `seed`. The three-sigma agreement contract against solved
/// values assumes at least 30 replications.
pub fn estimate_value(
    policy: &PolicyTable,
    params: &ModelParams,
    initial_state: &SystemState,
    replications: u64,
    seed: u64,
) -> Result<Estimate> {
    let config = SimConfig::new(initial_state.clone(), replications, seed);
    estimate_with_config(policy, params, &config)
}

/// [`estimate_value`] with explicit horizon control.
pub fn estimate_with_config(
    policy: &PolicyTable,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<Estimate> {
    let run = prepare(policy, params, config)?;
    let reps = config.replications;
    let mut totals = Vec::with_capacity(reps as usize);
    let mut breakdown = CostBreakdown::default();
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(rep);
        let one = run.simulate(&config.initial_state, &mut rng, None)?;
        breakdown.add_scaled(&one, 1.0 / reps as f64);
        totals.push(one.total());
    }
    let mean = totals.iter().sum::<f64>() / reps as f64;
    let std_error = if reps >= 2 {
        let var: f64 =
            totals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (reps - 1) as f64;
        (var / reps as f64).sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        std_error,
        breakdown,
        replications: reps,
        seed: config.rng_seed,
        truncation_epsilon: config.effective_epsilon(params),
        rng: RNG_SCHEME.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{Solver, SolverSettings};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reject_only_params() -> ModelParams {
        ModelParams {
            lambda: 4.0,
            mu: vec![1.0],
            buffer: 2,
            r: 0.0,
            f: 10.0,
            beta: 1e4,
            psi: 1.0,
            kappa: 1.0,
            h: 0.5,
            eta: vec![1.0, 1.5],
            gamma: 1.0,
        }
    }

    #[test]
    fn reject_all_estimate_matches_the_closed_form() {
        // Every arrival pays the fine; nothing else moves, so the expected
        // total is -lambda * f / gamma = -40.
        let params = reject_only_params();
        let space = params.state_space().unwrap();
        let policy = PolicyTable::reject_always(&space);
        let initial = SystemState::all_inactive(space.queue_count());
        let est = estimate_value(&policy, &params, &initial, 4000, 7).unwrap();
        assert!(est.std_error > 0.0);
        let slack = 3.0 * est.std_error + est.truncation_epsilon;
        assert!(
            (est.mean - (-40.0)).abs() <= slack,
            "mean {} is outside -40 +- {slack}",
            est.mean
        );
        assert_eq!(est.breakdown.build, 0.0);
        assert_eq!(est.breakdown.destroy, 0.0);
        assert_eq!(est.breakdown.delay, 0.0);
        assert_eq!(est.breakdown.keepalive, 0.0);
        assert_eq!(est.breakdown.reward, 0.0);
        assert!(est.breakdown.fine > 0.0);
    }

    #[test]
    fn zero_cost_model_needs_an_explicit_horizon_and_pays_nothing() {
        let params = ModelParams {
            lambda: 1.0,
            mu: vec![1.0],
            buffer: 2,
            r: 0.0,
            f: 0.0,
            beta: 0.0,
            psi: 0.0,
            kappa: 0.0,
            h: 0.0,
            eta: vec![1.0, 1.0],
            gamma: 1.0,
        };
        let space = params.state_space().unwrap();
        let policy = PolicyTable::admit_when_possible(&space);
        let initial = SystemState::all_inactive(1);
        // The default threshold is bound-relative and the bound is zero.
        let mut config = SimConfig::new(initial, 1, 3);
        assert!(simulate_once(&policy, &params, &config, 3).is_err());
        config.truncation_epsilon = Some(1e-9);
        let breakdown = simulate_once(&policy, &params, &config, 3).unwrap();
        assert_eq!(breakdown, CostBreakdown::default());
        assert_eq!(breakdown.total(), 0.0);
    }

    #[test]
    fn keep_always_policies_never_pay_teardown() {
        let params = ModelParams { beta: 0.5, ..reject_only_params() };
        let space = params.state_space().unwrap();
        let policy = PolicyTable::admit_when_possible(&space);
        let initial = SystemState::all_inactive(1);
        let config = SimConfig::new(initial, 1, 0);
        for seed in 0..20 {
            let b = simulate_once(&policy, &params, &config, seed).unwrap();
            assert_eq!(b.destroy, 0.0);
            assert!(b.build > 0.0, "the first admission deploys on seed {seed}");
        }
    }

    #[test]
    fn constant_charge_discounts_analytically() {
        // One queue pinned at active-empty under reject-always with no
        // fine: the only flow is the keep-alive rate, so the total must be
        // kappa * (1 - exp(-gamma * horizon)) / gamma up to float roundoff.
        let params = ModelParams {
            lambda: 4.0,
            mu: vec![1.0],
            buffer: 2,
            r: 0.0,
            f: 0.0,
            beta: 0.0,
            psi: 0.0,
            kappa: 1.0,
            h: 0.0,
            eta: vec![1.0, 1.0],
            gamma: 1.0,
        };
        let space = params.state_space().unwrap();
        let policy = PolicyTable::reject_always(&space);
        let initial = SystemState::new(vec![0], space.buffer()).unwrap();
        let config = SimConfig::new(initial, 1, 11);
        let bound = solver::value_bound(&params);
        let eps = config.effective_epsilon(&params);
        let horizon = (bound / eps).ln() / params.gamma;
        let expected = params.kappa * (1.0 - (-params.gamma * horizon).exp()) / params.gamma;
        let b = simulate_once(&policy, &params, &config, 11).unwrap();
        assert_abs_diff_eq!(b.keepalive, expected, epsilon = 1e-12);
        assert_eq!(b.fine, 0.0);
        assert_eq!(b.delay, 0.0);
        assert_abs_diff_eq!(b.total(), -expected, epsilon = 1e-12);
    }

    #[test]
    fn identical_seeds_reproduce_paths_bit_for_bit() {
        let params = reject_only_params();
        let space = params.state_space().unwrap();
        let policy = PolicyTable::admit_when_possible(&space);
        let initial = SystemState::all_inactive(1);
        let config = SimConfig::new(initial, 1, 99);
        let mut log_a = Vec::new();
        let mut log_b = Vec::new();
        let a = simulate_once_logged(&policy, &params, &config, 99, &mut log_a).unwrap();
        let b = simulate_once_logged(&policy, &params, &config, 99, &mut log_b).unwrap();
        assert_eq!(a, b);
        assert_eq!(log_a.len(), log_b.len());
        for (x, y) in log_a.iter().zip(&log_b) {
            assert_eq!(x.time.to_bits(), y.time.to_bits());
            assert_eq!(x.kind, y.kind);
            assert_eq!(x.queue, y.queue);
            assert_eq!(x.state_after, y.state_after);
            assert_eq!(
                x.discounted_increment.to_bits(),
                y.discounted_increment.to_bits()
            );
            assert_eq!(x.component, y.component);
        }
        // A different stream takes a different path.
        let est1 = estimate_value(&policy, &params, &SystemState::all_inactive(1), 2, 99).unwrap();
        assert!(est1.std_error > 0.0);
    }

    #[test]
    fn standard_error_shrinks_like_root_replications() {
        let params = reject_only_params();
        let space = params.state_space().unwrap();
        let policy = PolicyTable::admit_when_possible(&space);
        let initial = SystemState::all_inactive(1);
        let small = estimate_value(&policy, &params, &initial, 400, 5).unwrap();
        let large = estimate_value(&policy, &params, &initial, 800, 5).unwrap();
        let ratio = large.std_error / small.std_error;
        let target = 1.0 / 2.0f64.sqrt();
        assert!(
            (ratio - target).abs() <= 0.2 * target,
            "SE ratio {ratio} strays from {target}"
        );
    }

    #[test]
    fn estimate_tracks_the_solved_value() {
        let params = ModelParams {
            lambda: 1.0,
            mu: vec![1.0],
            buffer: 2,
            r: 1.0,
            f: 2.0,
            beta: 0.5,
            psi: 0.3,
            kappa: 0.2,
            h: 0.1,
            eta: vec![1.0, 1.5],
            gamma: 0.5,
        };
        let solver = Solver::new(params.clone()).unwrap();
        let result = solver
            .value_iteration(SolverSettings { tol: 1e-11, ..Default::default() })
            .unwrap();
        for levels in [vec![-1], vec![0], vec![2]] {
            let initial = SystemState::new(levels, params.buffer).unwrap();
            let idx = solver.space().encode(&initial).unwrap();
            let est =
                estimate_value(&result.policy, &params, &initial, 3000, 123).unwrap();
            let slack = 3.0 * est.std_error + est.truncation_epsilon;
            assert!(
                (est.mean - result.values.get(idx)).abs() <= slack,
                "state {idx}: mean {} vs solved {} (slack {slack})",
                est.mean,
                result.values.get(idx)
            );
        }
    }

    #[test]
    fn config_validation_catches_bad_inputs() {
        let params = reject_only_params();
        let space = params.state_space().unwrap();
        let policy = PolicyTable::reject_always(&space);
        let mut config = SimConfig::new(SystemState::all_inactive(1), 0, 1);
        assert!(simulate_once(&policy, &params, &config, 1).is_err());
        config.replications = 1;
        config.truncation_epsilon = Some(-1.0);
        assert!(simulate_once(&policy, &params, &config, 1).is_err());
        let config = SimConfig::new(SystemState::all_inactive(2), 1, 1);
        assert!(simulate_once(&policy, &params, &config, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Money components are nonnegative and finite on every path.
        #[test]
        fn component_totals_stay_nonnegative(seed in any::<u64>()) {
            let params = ModelParams {
                lambda: 2.0,
                mu: vec![1.0, 0.6],
                buffer: 3,
                r: 0.8,
                f: 3.0,
                beta: 0.7,
                psi: 0.4,
                kappa: 0.5,
                h: 0.3,
                eta: vec![1.0, 1.4, 2.0],
                gamma: 0.4,
            };
            let space = params.state_space().unwrap();
            let policy = PolicyTable::admit_when_possible(&space);
            let config = SimConfig::new(SystemState::all_inactive(2), 1, seed);
            let b = simulate_once(&policy, &params, &config, seed).unwrap();
            for part in [b.build, b.destroy, b.delay, b.keepalive, b.reward, b.fine] {
                prop_assert!(part.is_finite() && part >= 0.0);
            }
            prop_assert!(b.total().is_finite());
        }
    }
}
