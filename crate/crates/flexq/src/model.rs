//! Model parameters and the running-cost model.
//!
//! Tasks arrive in one Poisson stream of rate `lambda` and are routed, at
//! the moment of arrival, to one queue (possibly deploying it first) or
//! rejected. A deployed, nonempty queue `i` completes tasks at rate `mu_i`
//! regardless of how many it holds (the server is shared across the queue's
//! tasks). Continuous charges accrue per unit time: a keep-alive charge
//! `kappa` per deployed queue, plus a congestion charge per nonempty queue
//! that grows with its occupancy. Event charges: `beta` to deploy, `psi` to
//! tear down, `r` earned per admitted task, `f` paid per rejected task.
//! Future value is discounted at rate `gamma`.

use crate::error::{Error, Result};
use crate::state::{StateSpace, SystemState};

/// Full parameter set for one problem instance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ModelParams {
    /// Arrival rate of the single task stream.
    pub lambda: f64,
    /// Per-queue service rates, one entry per queue.
    pub mu: Vec<f64>,
    /// Buffer capacity per queue; levels run in `[-1, buffer]`.
    pub buffer: i32,
    /// Reward collected per admitted task.
    pub r: f64,
    /// Fine paid per rejected task.
    pub f: f64,
    /// One-off cost of deploying a queue.
    pub beta: f64,
    /// One-off cost of tearing a queue down.
    pub psi: f64,
    /// Keep-alive cost per deployed queue per unit time.
    pub kappa: f64,
    /// Congestion cost scale; see [`ModelParams::delay_rate`].
    pub h: f64,
    /// Congestion multipliers `eta[j-1]` for occupancy `j = 1..=buffer`;
    /// nondecreasing, each at least 1.
    pub eta: Vec<f64>,
    /// Discount rate; must be positive.
    pub gamma: f64,
}

impl ModelParams {
    /// Number of queues.
    pub fn queue_count(&self) -> usize {
        self.mu.len()
    }

    /// Sum of all service rates.
    pub fn total_mu(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// The state space this parameter set lives on.
    pub fn state_space(&self) -> Result<StateSpace> {
        StateSpace::new(self.queue_count(), self.buffer)
    }

    /// Check every structural invariant; call once after construction.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.buffer < 2 {
            return Err(Error::BufferTooSmall(self.buffer));
        }
        if self.mu.is_empty() {
            return fail("at least one queue is required".into());
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return fail(format!("lambda must be positive and finite, got {}", self.lambda));
        }
        for (i, &m) in self.mu.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return fail(format!("mu[{i}] must be positive and finite, got {m}"));
            }
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return fail(format!("gamma must be positive and finite, got {}", self.gamma));
        }
        for (name, v) in [
            ("r", self.r),
            ("f", self.f),
            ("beta", self.beta),
            ("psi", self.psi),
            ("kappa", self.kappa),
            ("h", self.h),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} must be nonnegative and finite, got {v}"));
            }
        }
        if self.eta.len() != self.buffer as usize {
            return fail(format!(
                "eta must have one entry per occupancy 1..={}, got {}",
                self.buffer,
                self.eta.len()
            ));
        }
        let mut prev = 1.0;
        for (j, &e) in self.eta.iter().enumerate() {
            if !e.is_finite() || e < 1.0 {
                return fail(format!("eta[{j}] must be >= 1 and finite, got {e}"));
            }
            if e < prev {
                return fail(format!("eta must be nondecreasing; eta[{j}] = {e} drops below {prev}"));
            }
            prev = e;
        }
        // The state space must be constructible (cardinality fits in usize).
        self.state_space()?;
        Ok(())
    }

    /// Congestion multiplier for a queue holding `level >= 1` tasks.
    pub fn eta_at(&self, level: i32) -> f64 {
        debug_assert!(level >= 1 && level <= self.buffer);
        self.eta[(level - 1) as usize]
    }

    /// Congestion cost per unit time of one queue at `level`:
    /// `level * eta(level) * h` for `level >= 1`, zero otherwise.
    pub fn delay_rate(&self, level: i32) -> f64 {
        if level >= 1 {
            level as f64 * self.eta_at(level) * self.h
        } else {
            0.0
        }
    }

    /// Total continuous charge per unit time in `state`: congestion plus
    /// keep-alive for every deployed queue.
    pub fn holding_rate(&self, state: &SystemState) -> f64 {
        self.holding_rate_levels(state.levels())
    }

    pub fn holding_rate_levels(&self, levels: &[i32]) -> f64 {
        debug_assert_eq!(levels.len(), self.queue_count());
        levels
            .iter()
            .map(|&l| self.delay_rate(l) + if l >= 0 { self.kappa } else { 0.0 })
            .sum()
    }

    /// Split of [`holding_rate_levels`](Self::holding_rate_levels) into
    /// (congestion, keep-alive) parts; the simulator accounts them separately.
    pub fn holding_rate_parts(&self, levels: &[i32]) -> (f64, f64) {
        let delay: f64 = levels.iter().map(|&l| self.delay_rate(l)).sum();
        let keep = self.kappa * levels.iter().filter(|&&l| l >= 0).count() as f64;
        (delay, keep)
    }

    /// Service rate actually delivered by queue `i` in `state`: `mu_i` when
    /// deployed and nonempty, zero otherwise. Occupancy does not change the
    /// rate beyond that threshold.
    pub fn effective_rate(&self, state: &SystemState, queue: usize) -> f64 {
        if state.level(queue) >= 1 {
            self.mu[queue]
        } else {
            0.0
        }
    }

    /// Largest possible continuous charge per unit time (every queue full).
    pub fn max_holding_rate(&self) -> f64 {
        self.queue_count() as f64 * (self.delay_rate(self.buffer) + self.kappa)
    }
}
