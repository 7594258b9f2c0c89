//! Exact solution of the discounted control problem.
//!
//! The continuous-time problem is reduced to a fixed-point equation by
//! uniformization: in state `q`, with `delta_q = 1 / (sum of active service
//! rates + lambda + gamma)`,
//!
//! ```text
//! V(q) = delta_q * [  sum over queues at level >= 2 of mu_i * V(q - e_i)
//!                   + sum over queues at level 1 of
//!                         mu_i * max(V(q - e_i), V(q - 2 e_i) - psi)
//!                   + lambda * max(best admission + r, V(q) - f)
//!                   - C(q) ]
//! ```
//!
//! where the best admission ranges over `V(q + e_i)` for deployed non-full
//! queues and `V(q + 2 e_i) - beta` for undeployed ones, and `C(q)` is the
//! continuous charge rate. The operator is a sup-norm contraction with
//! modulus at most `rho = (lambda + sum mu) / (lambda + sum mu + gamma)`,
//! so value iteration converges geometrically and a residual below `tol`
//! certifies a true error of at most `rho / (1 - rho) * tol`.
//!
//! Besides value iteration the module provides policy extraction with
//! deterministic tie-breaking, exact policy evaluation (direct linear solve
//! on small spaces, damped iteration on large ones), and an exhaustive
//! oracle that enumerates every stationary deterministic policy.

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::ModelParams;
use crate::state::{StateSpace, SystemState};

/// Absolute slack for action-value comparisons; differences within it are
/// ties and resolve to the preferred action.
pub const TIE_EPSILON: f64 = 1e-9;

/// Feasible-policy cap for [`Solver::brute_force_solve`]. Covers the
/// n <= 2, B <= 2 desk family (n = 2, B = 2 has ~3.2e8 policies); the next
/// size up (n = 2, B = 3) is over by four orders of magnitude and refused.
pub const ENUMERATION_CAP: u128 = 1_000_000_000;

/// Decision attached to an arriving task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrivalAction {
    /// Turn the task away and pay the fine.
    Reject,
    /// Admit into deployed queue `i` (must not be full).
    Schedule(usize),
    /// Deploy queue `i` (must be undeployed), pay the build cost, and admit
    /// the task into it.
    ActivateAndSchedule(usize),
}

/// Decision for a queue whose departing task leaves it empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepartureAction {
    Keep,
    /// Tear the queue down and pay the teardown cost.
    Destroy,
}

/// A value function on the full state space, indexed by state index.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(values: Vec<f64>, space: &StateSpace) -> Result<Self> {
        if values.len() != space.cardinality() {
            return Err(Error::TableSizeMismatch {
                expected: space.cardinality(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sup-norm distance to another table of the same length.
    pub fn sup_distance(&self, other: &ValueTable) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A stationary deterministic policy: one arrival decision per state, plus
/// a keep-or-destroy decision for every queue sitting at level 1.
///
/// Feasibility (schedule only into deployed non-full queues, activate only
/// undeployed ones, departure decisions exactly at level-1 queues) is
/// validated on construction and can be assumed afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    arrival: Vec<ArrivalAction>,
    /// Row-major `[state][queue]`; `Some` exactly where the queue level is 1.
    departure: Vec<Option<DepartureAction>>,
    n: usize,
}

impl PolicyTable {
    pub fn new(
        space: &StateSpace,
        arrival: Vec<ArrivalAction>,
        departure: Vec<Option<DepartureAction>>,
    ) -> Result<Self> {
        let s = space.cardinality();
        let n = space.queue_count();
        if arrival.len() != s {
            return Err(Error::TableSizeMismatch { expected: s, got: arrival.len() });
        }
        if departure.len() != s * n {
            return Err(Error::TableSizeMismatch { expected: s * n, got: departure.len() });
        }
        let mut levels = vec![0i32; n];
        for idx in 0..s {
            space.decode_into(idx, &mut levels)?;
            let feasible = match arrival[idx] {
                ArrivalAction::Reject => true,
                ArrivalAction::Schedule(i) => {
                    i < n && levels[i] >= 0 && levels[i] < space.buffer()
                }
                ArrivalAction::ActivateAndSchedule(i) => i < n && levels[i] == -1,
            };
            if !feasible {
                return Err(Error::InvalidParams(format!(
                    "arrival action {:?} infeasible in state {:?}",
                    arrival[idx], levels
                )));
            }
            for (i, &level) in levels.iter().enumerate() {
                let has = departure[idx * n + i].is_some();
                if has != (level == 1) {
                    return Err(Error::InvalidParams(format!(
                        "departure decision for queue {i} must be present exactly at \
                         level 1; state {levels:?}"
                    )));
                }
            }
        }
        Ok(Self { arrival, departure, n })
    }

    pub fn arrival(&self, index: usize) -> ArrivalAction {
        self.arrival[index]
    }

    pub fn departure(&self, index: usize, queue: usize) -> Option<DepartureAction> {
        self.departure[index * self.n + queue]
    }

    pub fn queue_count(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        self.arrival.len()
    }

    /// Reference policy: reject every arrival, keep every emptied queue.
    pub fn reject_always(space: &StateSpace) -> Self {
        let s = space.cardinality();
        let n = space.queue_count();
        let mut departure = vec![None; s * n];
        let mut levels = vec![0i32; n];
        for idx in 0..s {
            space.decode_into(idx, &mut levels).expect("index in range");
            for (i, &level) in levels.iter().enumerate() {
                if level == 1 {
                    departure[idx * n + i] = Some(DepartureAction::Keep);
                }
            }
        }
        Self { arrival: vec![ArrivalAction::Reject; s], departure, n }
    }

    /// Reference policy: admit whenever any queue can take the task
    /// (preferring deployed low-occupancy queues, then activation), keep
    /// every emptied queue.
    pub fn admit_when_possible(space: &StateSpace) -> Self {
        let s = space.cardinality();
        let n = space.queue_count();
        let mut arrival = Vec::with_capacity(s);
        let mut departure = vec![None; s * n];
        let mut levels = vec![0i32; n];
        for idx in 0..s {
            space.decode_into(idx, &mut levels).expect("index in range");
            let schedule = (0..n)
                .filter(|&i| levels[i] >= 0 && levels[i] < space.buffer())
                .min_by_key(|&i| (levels[i], i));
            let action = match schedule {
                Some(i) => ArrivalAction::Schedule(i),
                None => match (0..n).find(|&i| levels[i] == -1) {
                    Some(i) => ArrivalAction::ActivateAndSchedule(i),
                    None => ArrivalAction::Reject,
                },
            };
            arrival.push(action);
            for (i, &level) in levels.iter().enumerate() {
                if level == 1 {
                    departure[idx * n + i] = Some(DepartureAction::Keep);
                }
            }
        }
        Self { arrival, departure, n }
    }
}

/// Stopping rule for value iteration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolverSettings {
    /// Sup-norm residual below which a sweep counts as converged.
    pub tol: f64,
    pub max_iters: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-9, max_iters: 200_000 }
    }
}

/// Output of a converged [`Solver::value_iteration`] run.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub values: ValueTable,
    pub policy: PolicyTable,
    pub iterations: u64,
    /// Final sup-norm residual (below the requested tolerance).
    pub residual: f64,
    /// Global contraction modulus `(lambda + sum mu) / (lambda + sum mu + gamma)`.
    pub rho: f64,
    /// Certified sup-norm distance to the fixed point:
    /// `rho / (1 - rho) * residual`.
    pub error_bound: f64,
}

/// One admission option available in a given state.
#[derive(Debug, Clone, Copy)]
pub struct AdmitOption {
    pub queue: usize,
    /// Index of the state reached if the arrival is admitted here.
    pub target: usize,
    /// Build cost charged on top (zero unless the queue is deployed now).
    pub build_cost: f64,
    pub activates: bool,
}

impl AdmitOption {
    pub fn action(&self) -> ArrivalAction {
        if self.activates {
            ArrivalAction::ActivateAndSchedule(self.queue)
        } else {
            ArrivalAction::Schedule(self.queue)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct DepEntry {
    target: u32,
    mu: f64,
}

#[derive(Debug, Clone, Copy)]
struct OneEntry {
    keep: u32,
    destroy: u32,
    mu: f64,
    queue: u16,
}

/// Transition structure flattened per state for the solve loops.
struct Compiled {
    delta: Vec<f64>,
    cost: Vec<f64>,
    dep_start: Vec<u32>,
    dep: Vec<DepEntry>,
    one_start: Vec<u32>,
    one: Vec<OneEntry>,
    adm_start: Vec<u32>,
    /// Admission options in tie-preference order: deployed queues by
    /// (level, index), then undeployed queues by index.
    adm: Vec<AdmitOption>,
}

/// Holds one problem instance with its compiled transition structure.
pub struct Solver {
    params: ModelParams,
    space: StateSpace,
    compiled: Compiled,
}

impl Solver {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let space = params.state_space()?;
        let compiled = compile(&params, &space)?;
        Ok(Self { params, space, compiled })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    /// Admission options of a state, in tie-preference order.
    pub fn admit_options(&self, index: usize) -> &[AdmitOption] {
        let lo = self.compiled.adm_start[index] as usize;
        let hi = self.compiled.adm_start[index + 1] as usize;
        &self.compiled.adm[lo..hi]
    }

    /// Continuous charge rate of a state (cached).
    pub fn holding_rate(&self, index: usize) -> f64 {
        self.compiled.cost[index]
    }

    /// Coarse a-priori bound on the optimal values: every reward and charge
    /// stream, taken at its worst rate, discounted over an infinite horizon.
    pub fn value_bound(&self) -> f64 {
        value_bound(&self.params)
    }

    /// Global contraction modulus of the fixed-point operator.
    pub fn contraction_modulus(&self) -> f64 {
        let flow = self.params.lambda + self.params.total_mu();
        flow / (flow + self.params.gamma)
    }

    fn dep_entries(&self, index: usize) -> &[DepEntry] {
        let lo = self.compiled.dep_start[index] as usize;
        let hi = self.compiled.dep_start[index + 1] as usize;
        &self.compiled.dep[lo..hi]
    }

    fn one_entries(&self, index: usize) -> &[OneEntry] {
        let lo = self.compiled.one_start[index] as usize;
        let hi = self.compiled.one_start[index + 1] as usize;
        &self.compiled.one[lo..hi]
    }

    /// Right-hand side of the fixed-point equation at one state: the best
    /// achievable backed-up value given the current table `v`.
    pub fn backup_value(&self, v: &[f64], index: usize) -> f64 {
        let p = &self.params;
        let mut acc = -self.compiled.cost[index];
        for d in self.dep_entries(index) {
            acc += d.mu * v[d.target as usize];
        }
        for o in self.one_entries(index) {
            let keep = v[o.keep as usize];
            let destroy = v[o.destroy as usize] - p.psi;
            acc += o.mu * if destroy > keep { destroy } else { keep };
        }
        let reject = v[index] - p.f;
        let mut best = f64::NEG_INFINITY;
        for a in self.admit_options(index) {
            let val = v[a.target] - a.build_cost;
            if val > best {
                best = val;
            }
        }
        let arrival = if best == f64::NEG_INFINITY {
            reject
        } else {
            let admit = best + p.r;
            if admit > reject {
                admit
            } else {
                reject
            }
        };
        acc += p.lambda * arrival;
        acc * self.compiled.delta[index]
    }

    /// Backed-up value plus the maximizing decisions at one state. Ties
    /// resolve to: admit over reject; schedule over activate; lowest
    /// occupancy, then lowest queue index; keep over destroy.
    pub fn bellman_backup(
        &self,
        v: &ValueTable,
        state: &SystemState,
    ) -> Result<(f64, ArrivalAction, Vec<(usize, DepartureAction)>)> {
        if v.len() != self.space.cardinality() {
            return Err(Error::TableSizeMismatch {
                expected: self.space.cardinality(),
                got: v.len(),
            });
        }
        let index = self.space.encode(state)?;
        let value = self.backup_value(v.as_slice(), index);
        let arrival = self.best_arrival(v.as_slice(), index);
        let departures = self
            .one_entries(index)
            .iter()
            .map(|o| (o.queue as usize, self.best_departure(v.as_slice(), o)))
            .collect();
        Ok((value, arrival, departures))
    }

    fn best_arrival(&self, v: &[f64], index: usize) -> ArrivalAction {
        let p = &self.params;
        let options = self.admit_options(index);
        let mut best = f64::NEG_INFINITY;
        for a in options {
            let val = v[a.target] - a.build_cost;
            if val > best {
                best = val;
            }
        }
        let reject = v[index] - p.f;
        if best == f64::NEG_INFINITY || best + p.r < reject - TIE_EPSILON {
            return ArrivalAction::Reject;
        }
        for a in options {
            if v[a.target] - a.build_cost >= best - TIE_EPSILON {
                return a.action();
            }
        }
        unreachable!("a finite maximum is attained by some option");
    }

    fn best_departure(&self, v: &[f64], entry: &OneEntry) -> DepartureAction {
        let keep = v[entry.keep as usize];
        let destroy = v[entry.destroy as usize] - self.params.psi;
        if destroy > keep + TIE_EPSILON {
            DepartureAction::Destroy
        } else {
            DepartureAction::Keep
        }
    }

    /// Apply one synchronous sweep of the fixed-point operator, writing
    /// into `out`. Returns the sup-norm residual against `v`.
    pub fn sweep(&self, v: &[f64], out: &mut [f64]) -> f64 {
        debug_assert_eq!(v.len(), self.space.cardinality());
        debug_assert_eq!(out.len(), v.len());
        let mut residual = 0.0f64;
        for idx in 0..v.len() {
            let nv = self.backup_value(v, idx);
            let diff = (nv - v[idx]).abs();
            if diff > residual {
                residual = diff;
            }
            out[idx] = nv;
        }
        residual
    }

    /// Solve by synchronous value iteration from the zero table.
    pub fn value_iteration(&self, settings: SolverSettings) -> Result<SolveResult> {
        if !(settings.tol.is_finite() && settings.tol > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerance must be positive and finite, got {}",
                settings.tol
            )));
        }
        let s = self.space.cardinality();
        let mut v = vec![0.0f64; s];
        let mut next = vec![0.0f64; s];
        let mut tail: Vec<f64> = Vec::with_capacity(16);
        let mut residual = f64::INFINITY;
        let mut iterations = 0u64;
        while iterations < settings.max_iters {
            residual = self.sweep(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
            iterations += 1;
            if tail.len() == 16 {
                tail.remove(0);
            }
            tail.push(residual);
            if residual < settings.tol {
                let values = ValueTable { values: v };
                self.check_table(&values)?;
                let policy = self.extract_policy(&values)?;
                let rho = self.contraction_modulus();
                return Ok(SolveResult {
                    error_bound: rho / (1.0 - rho) * residual,
                    values,
                    policy,
                    iterations,
                    residual,
                    rho,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations,
            last_residual: residual,
            residual_tail: tail,
        })
    }

    fn check_table(&self, v: &ValueTable) -> Result<()> {
        let bound = self.value_bound();
        for (idx, &x) in v.as_slice().iter().enumerate() {
            if !x.is_finite() || x.abs() > bound * (1.0 + 1e-9) + 1e-9 {
                return Err(Error::Internal(format!(
                    "value {x} at state {idx} escapes the a-priori bound {bound}"
                )));
            }
        }
        Ok(())
    }

    /// Greedy policy of a value table, with deterministic tie-breaking.
    pub fn extract_policy(&self, v: &ValueTable) -> Result<PolicyTable> {
        if v.len() != self.space.cardinality() {
            return Err(Error::TableSizeMismatch {
                expected: self.space.cardinality(),
                got: v.len(),
            });
        }
        let s = self.space.cardinality();
        let n = self.space.queue_count();
        let mut arrival = Vec::with_capacity(s);
        let mut departure = vec![None; s * n];
        for idx in 0..s {
            arrival.push(self.best_arrival(v.as_slice(), idx));
            for o in self.one_entries(idx) {
                departure[idx * n + o.queue as usize] =
                    Some(self.best_departure(v.as_slice(), o));
            }
        }
        Ok(PolicyTable { arrival, departure, n })
    }

    /// Expected discounted value of following `policy` from every state,
    /// solved exactly: direct linear solve up to [`DIRECT_SOLVE_LIMIT`]
    /// states, damped fixed-point iteration beyond it.
    pub fn policy_evaluation(&self, policy: &PolicyTable) -> Result<ValueTable> {
        let s = self.space.cardinality();
        if s <= DIRECT_SOLVE_LIMIT {
            self.policy_evaluation_direct(policy)
        } else {
            self.policy_evaluation_iterative(policy, 1e-12)
        }
    }

    fn check_policy_shape(&self, policy: &PolicyTable) -> Result<()> {
        if policy.state_count() != self.space.cardinality()
            || policy.queue_count() != self.space.queue_count()
        {
            return Err(Error::TableSizeMismatch {
                expected: self.space.cardinality(),
                got: policy.state_count(),
            });
        }
        Ok(())
    }

    /// The policy's fixed-point equation as a dense linear system,
    /// eliminated in place.
    fn policy_evaluation_direct(&self, policy: &PolicyTable) -> Result<ValueTable> {
        self.check_policy_shape(policy)?;
        let s = self.space.cardinality();
        let mut m = vec![0.0f64; s * s];
        let mut c = vec![0.0f64; s];
        for idx in 0..s {
            let row = &mut m[idx * s..(idx + 1) * s];
            row[idx] = 1.0;
            let (entries, rhs) = self.policy_row(policy, idx);
            for (target, coef) in entries {
                row[target] -= coef;
            }
            c[idx] = rhs;
        }
        if !linalg::solve_in_place(&mut m, &mut c, s) {
            return Err(Error::Internal(
                "policy evaluation system is singular; cannot happen for gamma > 0".into(),
            ));
        }
        Ok(ValueTable { values: c })
    }

    /// Damped-iteration path: applies the policy's backup until the
    /// sup-norm change drops below `tol`. The backup contracts at the same
    /// modulus as the optimality operator, so this converges for gamma > 0.
    pub fn policy_evaluation_iterative(
        &self,
        policy: &PolicyTable,
        tol: f64,
    ) -> Result<ValueTable> {
        self.check_policy_shape(policy)?;
        let s = self.space.cardinality();
        let mut v = vec![0.0f64; s];
        let mut next = vec![0.0f64; s];
        // Enough sweeps to cross from the a-priori bound down to tol, with
        // slack for the modulus estimate.
        let rho = self.contraction_modulus();
        let worst = (self.value_bound().max(1.0) / tol).ln();
        let max_iters = (4.0 * (worst / -rho.ln()).ceil()) as u64 + 64;
        let mut residual = f64::INFINITY;
        for _ in 0..max_iters {
            residual = 0.0;
            for idx in 0..s {
                let (entries, rhs) = self.policy_row(policy, idx);
                let mut acc = rhs;
                for (target, coef) in entries {
                    acc += coef * v[target];
                }
                let diff = (acc - v[idx]).abs();
                if diff > residual {
                    residual = diff;
                }
                next[idx] = acc;
            }
            std::mem::swap(&mut v, &mut next);
            if residual < tol {
                return Ok(ValueTable { values: v });
            }
        }
        Err(Error::NoConvergence {
            iterations: max_iters,
            last_residual: residual,
            residual_tail: vec![residual],
        })
    }

    /// Sparse row of the policy's backup at one state: value coefficients
    /// and the constant term, both already scaled by `delta`.
    fn policy_row(&self, policy: &PolicyTable, idx: usize) -> (Vec<(usize, f64)>, f64) {
        let p = &self.params;
        let delta = self.compiled.delta[idx];
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(8);
        let mut rhs = -self.compiled.cost[idx];
        for d in self.dep_entries(idx) {
            entries.push((d.target as usize, delta * d.mu));
        }
        for o in self.one_entries(idx) {
            match policy.departure(idx, o.queue as usize) {
                Some(DepartureAction::Keep) => entries.push((o.keep as usize, delta * o.mu)),
                Some(DepartureAction::Destroy) => {
                    entries.push((o.destroy as usize, delta * o.mu));
                    rhs -= o.mu * p.psi;
                }
                None => unreachable!("validated policy has a decision at level-1 queues"),
            }
        }
        match policy.arrival(idx) {
            ArrivalAction::Reject => {
                entries.push((idx, delta * p.lambda));
                rhs -= p.lambda * p.f;
            }
            action => {
                let opt = self
                    .admit_options(idx)
                    .iter()
                    .find(|o| o.action() == action)
                    .expect("validated policy admits only along feasible options");
                entries.push((opt.target, delta * p.lambda));
                rhs += p.lambda * (p.r - opt.build_cost);
            }
        }
        (entries, delta * rhs)
    }

    /// Number of stationary deterministic feasible policies of this
    /// instance: the product over states of arrival choices times 2 per
    /// level-1 queue.
    pub fn count_feasible_policies(&self) -> u128 {
        let mut count: u128 = 1;
        for idx in 0..self.space.cardinality() {
            let choices = (1 + self.admit_options(idx).len()) as u128;
            let ones = self.one_entries(idx).len() as u32;
            count = count.saturating_mul(choices << ones);
        }
        count
    }

    /// Exhaustive oracle: enumerate every stationary deterministic feasible
    /// policy, evaluate each exactly, and return the pointwise maximum.
    ///
    /// Refuses instances with more than [`ENUMERATION_CAP`] policies. The
    /// enumeration shares Gaussian-elimination work across the policy tree
    /// and applies rank-one updates at the leaves, so the n = 2, B = 2 desk
    /// instance (3.2e8 policies) evaluates in seconds; see
    /// [`enumerate_policies`] for the scheme.
    pub fn brute_force_solve(&self) -> Result<ValueTable> {
        let count = self.count_feasible_policies();
        if count > ENUMERATION_CAP {
            return Err(Error::PolicyEnumerationTooLarge { count, cap: ENUMERATION_CAP });
        }
        let values = enumerate_policies(self)?;
        Ok(ValueTable { values })
    }
}

/// Largest state count solved by direct dense elimination in
/// [`Solver::policy_evaluation`]; larger instances iterate.
pub const DIRECT_SOLVE_LIMIT: usize = 4000;

/// Coarse a-priori bound on |V|: worst-case reward/charge flow rates
/// discounted over an infinite horizon.
pub fn value_bound(params: &ModelParams) -> f64 {
    let event_flow = params.lambda * params.r.max(params.f);
    let lifecycle_flow =
        (params.lambda + params.total_mu()) * params.beta.max(params.psi);
    (event_flow + params.max_holding_rate() + lifecycle_flow) / params.gamma
}

fn compile(params: &ModelParams, space: &StateSpace) -> Result<Compiled> {
    let s = space.cardinality();
    let n = space.queue_count();
    let mut delta = Vec::with_capacity(s);
    let mut cost = Vec::with_capacity(s);
    let mut dep_start = Vec::with_capacity(s + 1);
    let mut dep = Vec::new();
    let mut one_start = Vec::with_capacity(s + 1);
    let mut one = Vec::new();
    let mut adm_start = Vec::with_capacity(s + 1);
    let mut adm = Vec::new();
    let mut levels = vec![0i32; n];
    let mut adm_buf: Vec<AdmitOption> = Vec::with_capacity(n);
    for idx in 0..s {
        space.decode_into(idx, &mut levels)?;
        dep_start.push(dep.len() as u32);
        one_start.push(one.len() as u32);
        adm_start.push(adm.len() as u32);
        let mut active_mu = 0.0;
        adm_buf.clear();
        for (i, &level) in levels.iter().enumerate() {
            let w = space.weight(i);
            if level >= 1 {
                active_mu += params.mu[i];
                if level == 1 {
                    one.push(OneEntry {
                        keep: (idx - w) as u32,
                        destroy: (idx - 2 * w) as u32,
                        mu: params.mu[i],
                        queue: i as u16,
                    });
                } else {
                    dep.push(DepEntry { target: (idx - w) as u32, mu: params.mu[i] });
                }
            }
            if level == -1 {
                adm_buf.push(AdmitOption {
                    queue: i,
                    target: idx + 2 * w,
                    build_cost: params.beta,
                    activates: true,
                });
            } else if level < space.buffer() {
                adm_buf.push(AdmitOption {
                    queue: i,
                    target: idx + w,
                    build_cost: 0.0,
                    activates: false,
                });
            }
        }
        // Tie-preference order: schedule before activate, then by the
        // queue's current level, then by queue index. Sorting is stable and
        // adm_buf is already in index order.
        adm_buf.sort_by_key(|o| (o.activates, levels[o.queue]));
        adm.extend_from_slice(&adm_buf);
        delta.push(1.0 / (active_mu + params.lambda + params.gamma));
        cost.push(params.holding_rate_levels(&levels));
    }
    dep_start.push(dep.len() as u32);
    one_start.push(one.len() as u32);
    adm_start.push(adm.len() as u32);
    Ok(Compiled { delta, cost, dep_start, dep, one_start, one, adm_start, adm })
}

/// One selectable action bundle at one state: an arrival choice plus a
/// destroy subset over its level-1 queues, lowered to the sparse row it
/// induces in the policy's linear system (columns permuted, `I - A` form)
/// and the row's constant term.
struct ComboRow {
    entries: Vec<(u32, f64)>,
    rhs: f64,
    /// Sparse difference of this row against the state's first combo,
    /// in raw (uneliminated) form; drives the rank-one leaf updates.
    diff: Vec<(u32, f64)>,
    drhs: f64,
}

struct EnumState {
    combos: Vec<ComboRow>,
}

/// Exhaustive policy enumeration with shared elimination.
///
/// States are ordered by ascending combo count and the linear system is
/// eliminated row by row in that order. The policy tree is walked depth
/// first; entering depth `d` rewrites and re-eliminates only row `d`, so
/// all deeper work is shared across the siblings above. At the leaf the
/// remaining state is the one with the most combos: its first combo is
/// solved by back-substitution (together with the matching column of the
/// inverse), and every sibling combo differs from it in one row only, so
/// its solution follows from a Sherman-Morrison rank-one update at ~60
/// flops instead of a fresh elimination.
fn enumerate_policies(solver: &Solver) -> Result<Vec<f64>> {
    let s = solver.space.cardinality();
    debug_assert!(s >= 2);
    // Order states by combo count so the branchiest state sits at the leaf.
    let mut order: Vec<usize> = (0..s).collect();
    let combo_count = |idx: usize| {
        (1 + solver.admit_options(idx).len()) << solver.one_entries(idx).len()
    };
    order.sort_by_key(|&idx| (combo_count(idx), idx));
    let mut pos = vec![0u32; s];
    for (p, &idx) in order.iter().enumerate() {
        pos[idx] = p as u32;
    }
    let states: Vec<EnumState> = order
        .iter()
        .map(|&idx| EnumState { combos: build_combos(solver, idx, &pos) })
        .collect();

    let stride = s + 2;
    let mut walk = Walk {
        s,
        stride,
        states: &states,
        ws: vec![0.0; s * stride],
        ipiv: vec![0.0; s],
        x0: vec![0.0; s],
        wcol: vec![0.0; s],
        best: vec![f64::NEG_INFINITY; s],
    };
    walk.run(0);

    let mut out = vec![0.0f64; s];
    for idx in 0..s {
        let v = walk.best[pos[idx] as usize];
        if !v.is_finite() {
            return Err(Error::Internal(format!(
                "policy enumeration produced a non-finite value at state {idx}"
            )));
        }
        out[idx] = v;
    }
    Ok(out)
}

fn build_combos(solver: &Solver, idx: usize, pos: &[u32]) -> Vec<ComboRow> {
    let p = &solver.params;
    let delta = solver.compiled.delta[idx];
    let ones = solver.one_entries(idx);
    let admits = solver.admit_options(idx);
    let mut combos = Vec::with_capacity((1 + admits.len()) << ones.len());
    // Arrival choice None = reject; Some(k) = k-th admission option.
    let arrivals = std::iter::once(None).chain((0..admits.len()).map(Some));
    for arrival in arrivals {
        for mask in 0u32..(1u32 << ones.len()) {
            let mut entries: Vec<(u32, f64)> = Vec::with_capacity(8);
            let add = |col: u32, coef: f64, entries: &mut Vec<(u32, f64)>| {
                if let Some(e) = entries.iter_mut().find(|e| e.0 == col) {
                    e.1 += coef;
                } else {
                    entries.push((col, coef));
                }
            };
            add(pos[idx], 1.0, &mut entries);
            let mut rhs = -solver.compiled.cost[idx];
            for d in solver.dep_entries(idx) {
                add(pos[d.target as usize], -delta * d.mu, &mut entries);
            }
            for (k, o) in ones.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    add(pos[o.destroy as usize], -delta * o.mu, &mut entries);
                    rhs -= o.mu * p.psi;
                } else {
                    add(pos[o.keep as usize], -delta * o.mu, &mut entries);
                }
            }
            match arrival {
                None => {
                    add(pos[idx], -delta * p.lambda, &mut entries);
                    rhs -= p.lambda * p.f;
                }
                Some(k) => {
                    let o = &admits[k];
                    add(pos[o.target], -delta * p.lambda, &mut entries);
                    rhs += p.lambda * (p.r - o.build_cost);
                }
            }
            combos.push(ComboRow { entries, rhs: delta * rhs, diff: Vec::new(), drhs: 0.0 });
        }
    }
    // Raw-row differences against combo 0 for the leaf updates.
    let base_entries = combos[0].entries.clone();
    let base_rhs = combos[0].rhs;
    for cb in combos.iter_mut().skip(1) {
        let mut diff: Vec<(u32, f64)> = Vec::with_capacity(8);
        for &(col, coef) in &cb.entries {
            let base = base_entries
                .iter()
                .find(|e| e.0 == col)
                .map(|e| e.1)
                .unwrap_or(0.0);
            if coef != base {
                diff.push((col, coef - base));
            }
        }
        for &(col, coef) in &base_entries {
            if !cb.entries.iter().any(|e| e.0 == col) && coef != 0.0 {
                diff.push((col, -coef));
            }
        }
        cb.diff = diff;
        cb.drhs = cb.rhs - base_rhs;
    }
    combos
}

struct Walk<'a> {
    s: usize,
    stride: usize,
    states: &'a [EnumState],
    /// Row-major workspace; row d holds the eliminated form of depth d's
    /// current combo, with two extra columns: the constant term and the
    /// leaf unit vector.
    ws: Vec<f64>,
    ipiv: Vec<f64>,
    x0: Vec<f64>,
    wcol: Vec<f64>,
    best: Vec<f64>,
}

impl Walk<'_> {
    fn run(&mut self, d: usize) {
        let leaf = d == self.s - 1;
        let ncombos = self.states[d].combos.len();
        for c in 0..ncombos {
            self.fill_and_eliminate(d, c, leaf);
            if !leaf {
                self.run(d + 1);
            } else if c == 0 {
                self.backsub_base();
                self.merge(0.0);
            } else {
                self.leaf_update(c);
            }
        }
    }

    /// Write combo `c`'s raw row into workspace row `d` and eliminate it
    /// against rows above. Rows above are final for the current branch.
    fn fill_and_eliminate(&mut self, d: usize, c: usize, leaf: bool) {
        let stride = self.stride;
        let cb = &self.states[d].combos[c];
        // Sherman-Morrison covers leaf combos past the first; their rows
        // are never eliminated.
        if leaf && c > 0 {
            return;
        }
        let (head, tail) = self.ws.split_at_mut(d * stride);
        let row = &mut tail[..stride];
        row.fill(0.0);
        for &(col, coef) in &cb.entries {
            row[col as usize] += coef;
        }
        row[self.s] = cb.rhs;
        if leaf {
            row[self.s + 1] = 1.0;
        }
        for k in 0..d {
            let f = row[k];
            if f == 0.0 {
                continue;
            }
            let f = f * self.ipiv[k];
            row[k] = 0.0;
            let piv = &head[k * stride..(k + 1) * stride];
            for j in k + 1..stride {
                row[j] -= f * piv[j];
            }
        }
        debug_assert!(row[d] != 0.0, "strict diagonal dominance keeps pivots nonzero");
        self.ipiv[d] = 1.0 / row[d];
    }

    /// Back-substitute the constant column and the leaf unit column.
    fn backsub_base(&mut self) {
        let s = self.s;
        let stride = self.stride;
        for i in (0..s).rev() {
            let row = &self.ws[i * stride..(i + 1) * stride];
            let mut xc = row[s];
            let mut xw = row[s + 1];
            for j in i + 1..s {
                xc -= row[j] * self.x0[j];
                xw -= row[j] * self.wcol[j];
            }
            self.x0[i] = xc * self.ipiv[i];
            self.wcol[i] = xw * self.ipiv[i];
        }
    }

    /// Rank-one update for leaf combo `c`: its system differs from the
    /// base in the leaf row only.
    fn leaf_update(&mut self, c: usize) {
        let cb = &self.states[self.s - 1].combos[c];
        let mut dvx = 0.0;
        let mut dvw = 0.0;
        for &(col, dv) in &cb.diff {
            dvx += dv * self.x0[col as usize];
            dvw += dv * self.wcol[col as usize];
        }
        let denom = 1.0 + dvw;
        if denom.abs() < 1e-9 {
            // Numerically degenerate update; fall back to a fresh solve of
            // this combo. The base factorization rows stay intact.
            self.leaf_full_solve(c);
            return;
        }
        let scale = cb.drhs - (dvx + cb.drhs * dvw) / denom;
        self.merge(scale);
    }

    /// Pointwise-max merge of `x0 + scale * wcol` into the running best.
    fn merge(&mut self, scale: f64) {
        for i in 0..self.s {
            let v = self.x0[i] + scale * self.wcol[i];
            if v > self.best[i] {
                self.best[i] = v;
            }
        }
    }

    /// Rarely taken exact path for a leaf combo whose rank-one update is
    /// ill-conditioned: eliminate its row into a scratch copy and
    /// back-substitute just the constant column.
    fn leaf_full_solve(&mut self, c: usize) {
        let s = self.s;
        let stride = self.stride;
        let d = s - 1;
        let cb = &self.states[d].combos[c];
        let mut row = vec![0.0f64; stride];
        for &(col, coef) in &cb.entries {
            row[col as usize] += coef;
        }
        row[s] = cb.rhs;
        for k in 0..d {
            let f = row[k];
            if f == 0.0 {
                continue;
            }
            let f = f * self.ipiv[k];
            row[k] = 0.0;
            let piv = &self.ws[k * stride..(k + 1) * stride];
            for j in k + 1..stride {
                row[j] -= f * piv[j];
            }
        }
        let mut x = vec![0.0f64; s];
        x[d] = row[s] / row[d];
        for i in (0..d).rev() {
            let wrow = &self.ws[i * stride..(i + 1) * stride];
            let mut xc = wrow[s];
            for j in i + 1..s {
                xc -= wrow[j] * x[j];
            }
            x[i] = xc * self.ipiv[i];
        }
        for i in 0..s {
            if x[i] > self.best[i] {
                self.best[i] = x[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tiny_params() -> ModelParams {
        ModelParams {
            lambda: 1.3,
            mu: vec![0.7],
            buffer: 2,
            r: 0.6,
            f: 2.5,
            beta: 0.8,
            psi: 0.4,
            kappa: 0.3,
            h: 0.2,
            eta: vec![1.0, 1.4],
            gamma: 1.0,
        }
    }

    fn two_queue_params() -> ModelParams {
        ModelParams {
            lambda: 2.0,
            mu: vec![1.0, 1.0],
            buffer: 3,
            r: 0.5,
            f: 5.0,
            beta: 1.0,
            psi: 0.5,
            kappa: 0.5,
            h: 0.3,
            eta: vec![1.0, 1.5, 2.2],
            gamma: 0.2,
        }
    }

    #[test]
    fn reject_all_closed_form_at_the_idle_state() {
        // Deploying is priced out, so the idle state settles at -lambda*f/gamma.
        for (lambda, expected) in [(1.0, -10.0), (4.0, -40.0)] {
            let params = ModelParams {
                lambda,
                mu: vec![1.0],
                buffer: 2,
                r: 0.0,
                f: 10.0,
                beta: 1e4,
                psi: 1.0,
                kappa: 5.0,
                h: 1.0,
                eta: vec![1.0, 1.5],
                gamma: 1.0,
            };
            let solver = Solver::new(params).unwrap();
            let settings = SolverSettings { tol: 1e-12, ..Default::default() };
            let result = solver.value_iteration(settings).unwrap();
            let idle = solver.space().all_inactive_index();
            assert_abs_diff_eq!(result.values.get(idle), expected, epsilon = 1e-8);
            assert_eq!(result.policy.arrival(idle), ArrivalAction::Reject);
        }
    }

    #[test]
    fn value_iteration_matches_the_exhaustive_oracle_single_queue() {
        for buffer in [2, 3] {
            let mut params = tiny_params();
            params.buffer = buffer;
            params.eta = (0..buffer).map(|j| 1.0 + 0.4 * j as f64).collect();
            let solver = Solver::new(params).unwrap();
            let oracle = solver.brute_force_solve().unwrap();
            let settings = SolverSettings { tol: 1e-12, ..Default::default() };
            let result = solver.value_iteration(settings).unwrap();
            assert!(
                result.values.sup_distance(&oracle) < 1e-9,
                "B = {buffer}: sup distance {}",
                result.values.sup_distance(&oracle)
            );
        }
    }

    #[test]
    fn feasible_policy_count_matches_hand_computation() {
        // n = 1, B = 2: states -1, 0, 1, 2 give 2 * 2 * (2 * 2) * 1 = 16.
        let solver = Solver::new(tiny_params()).unwrap();
        assert_eq!(solver.count_feasible_policies(), 16);
        let solver = Solver::new(two_queue_params()).unwrap();
        assert_eq!(solver.count_feasible_policies(), 11_284_439_629_824);
    }

    #[test]
    fn oversized_enumeration_is_refused() {
        let solver = Solver::new(two_queue_params()).unwrap();
        assert!(matches!(
            solver.brute_force_solve(),
            Err(Error::PolicyEnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn oracle_dominates_reference_policies_pointwise() {
        let solver = Solver::new(tiny_params()).unwrap();
        let oracle = solver.brute_force_solve().unwrap();
        for policy in [
            PolicyTable::reject_always(solver.space()),
            PolicyTable::admit_when_possible(solver.space()),
        ] {
            let v = solver.policy_evaluation(&policy).unwrap();
            for idx in 0..v.len() {
                assert!(
                    oracle.get(idx) >= v.get(idx) - 1e-10,
                    "oracle must dominate at state {idx}"
                );
            }
        }
    }

    #[test]
    fn backup_reproduces_the_oracle_fixed_point() {
        let params = ModelParams {
            lambda: 1.0,
            mu: vec![1.0],
            buffer: 2,
            r: 1.0,
            f: 0.0,
            beta: 0.0,
            psi: 0.0,
            kappa: 0.0,
            h: 0.0,
            eta: vec![1.0, 1.0],
            gamma: 1.0,
        };
        let solver = Solver::new(params).unwrap();
        let oracle = solver.brute_force_solve().unwrap();
        for idx in 0..oracle.len() {
            let backed = solver.backup_value(oracle.as_slice(), idx);
            assert_abs_diff_eq!(backed, oracle.get(idx), epsilon = 1e-10);
        }
    }

    #[test]
    fn policy_evaluation_of_reject_always_hits_the_closed_form() {
        let mut params = tiny_params();
        params.lambda = 4.0;
        params.f = 10.0;
        params.gamma = 1.0;
        let solver = Solver::new(params).unwrap();
        let policy = PolicyTable::reject_always(solver.space());
        let v = solver.policy_evaluation(&policy).unwrap();
        let idle = solver.space().all_inactive_index();
        assert_abs_diff_eq!(v.get(idle), -40.0, epsilon = 1e-10);
    }

    #[test]
    fn policy_evaluation_agrees_with_value_iteration_on_the_optimal_policy() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let settings = SolverSettings { tol: 1e-11, ..Default::default() };
        let result = solver.value_iteration(settings).unwrap();
        let v = solver.policy_evaluation(&result.policy).unwrap();
        assert!(v.sup_distance(&result.values) < 1e-8);
    }

    #[test]
    fn iterative_and_direct_policy_evaluation_agree() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let policy = PolicyTable::admit_when_possible(solver.space());
        let direct = solver.policy_evaluation(&policy).unwrap();
        let iterative = solver.policy_evaluation_iterative(&policy, 1e-13).unwrap();
        assert!(direct.sup_distance(&iterative) < 1e-10);
    }

    #[test]
    fn non_convergence_reports_iterations_and_residuals() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let settings = SolverSettings { tol: 1e-12, max_iters: 3 };
        match solver.value_iteration(settings) {
            Err(Error::NoConvergence { iterations, last_residual, residual_tail }) => {
                assert_eq!(iterations, 3);
                assert!(last_residual > 1e-12);
                assert_eq!(residual_tail.len(), 3);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn solved_tables_respect_the_a_priori_bound() {
        for params in [tiny_params(), two_queue_params()] {
            let solver = Solver::new(params).unwrap();
            let result = solver.value_iteration(Default::default()).unwrap();
            let bound = solver.value_bound();
            for idx in 0..result.values.len() {
                assert!(result.values.get(idx).abs() <= bound);
            }
        }
    }

    #[test]
    fn full_states_must_reject() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let result = solver.value_iteration(Default::default()).unwrap();
        let full = solver.space().encode_levels(&[3, 3]).unwrap();
        assert_eq!(result.policy.arrival(full), ArrivalAction::Reject);
    }

    #[test]
    fn symmetric_ties_resolve_to_the_lowest_queue_index() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let result = solver.value_iteration(Default::default()).unwrap();
        let both_empty = solver.space().encode_levels(&[0, 0]).unwrap();
        // Identical queues, identical continuations: queue 0 wins the tie.
        assert_eq!(result.policy.arrival(both_empty), ArrivalAction::Schedule(0));
    }

    #[test]
    fn tie_breaking_on_crafted_tables() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let space = solver.space();
        let s = space.cardinality();

        // State (0, -1): make scheduling into queue 0 and activating
        // queue 1 exactly equal; schedule must win.
        let state = space.encode_levels(&[0, -1]).unwrap();
        let sched_target = space.encode_levels(&[1, -1]).unwrap();
        let act_target = space.encode_levels(&[0, 1]).unwrap();
        let mut v = vec![0.0f64; s];
        v[sched_target] = 5.0;
        v[act_target] = 5.0 + solver.params().beta;
        let v = ValueTable::new(v, space).unwrap();
        let decoded = space.decode(state).unwrap();
        let (_, arrival, _) = solver.bellman_backup(&v, &decoded).unwrap();
        assert_eq!(arrival, ArrivalAction::Schedule(0));

        // Same state: make rejecting exactly tie with the best admission;
        // admission must win.
        let mut v = vec![0.0f64; s];
        let admit_value = 5.0;
        v[sched_target] = admit_value;
        v[act_target] = 0.0;
        v[state] = admit_value + solver.params().r + solver.params().f;
        let v = ValueTable::new(v, space).unwrap();
        let (_, arrival, _) = solver.bellman_backup(&v, &decoded).unwrap();
        assert_eq!(arrival, ArrivalAction::Schedule(0));

        // State (1, -1): make keep and destroy exactly tie; keep must win.
        let one_state = space.encode_levels(&[1, -1]).unwrap();
        let keep_target = space.encode_levels(&[0, -1]).unwrap();
        let destroy_target = space.encode_levels(&[-1, -1]).unwrap();
        let mut v = vec![0.0f64; s];
        v[keep_target] = 1.0;
        v[destroy_target] = 1.0 + solver.params().psi;
        let v = ValueTable::new(v, space).unwrap();
        let decoded = space.decode(one_state).unwrap();
        let (_, _, departures) = solver.bellman_backup(&v, &decoded).unwrap();
        assert_eq!(departures, vec![(0, DepartureAction::Keep)]);
    }

    #[test]
    fn lower_occupancy_wins_arrival_ties() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let space = solver.space();
        let state = space.encode_levels(&[2, 1]).unwrap();
        let t0 = space.encode_levels(&[3, 1]).unwrap();
        let t1 = space.encode_levels(&[2, 2]).unwrap();
        let mut v = vec![0.0f64; space.cardinality()];
        v[t0] = 7.0;
        v[t1] = 7.0;
        let v = ValueTable::new(v, space).unwrap();
        let decoded = space.decode(state).unwrap();
        let (_, arrival, _) = solver.bellman_backup(&v, &decoded).unwrap();
        // Queue 1 holds fewer tasks, so it wins the exact tie.
        assert_eq!(arrival, ArrivalAction::Schedule(1));
    }

    #[test]
    fn policy_table_validation_rejects_infeasible_actions() {
        let solver = Solver::new(two_queue_params()).unwrap();
        let space = solver.space();
        let mut policy = PolicyTable::reject_always(space);
        let full = space.encode_levels(&[3, 3]).unwrap();
        policy.arrival[full] = ArrivalAction::Schedule(0);
        let arrival = policy.arrival.clone();
        let departure = policy.departure.clone();
        assert!(PolicyTable::new(space, arrival, departure).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// One sweep of the operator contracts sup-norm distances by at
        /// least the global modulus.
        #[test]
        fn operator_is_a_contraction(
            a in proptest::collection::vec(-100.0f64..100.0, 16),
            b in proptest::collection::vec(-100.0f64..100.0, 16),
        ) {
            let params = ModelParams {
                lambda: 1.5,
                mu: vec![1.0, 0.8],
                buffer: 2,
                r: 0.7,
                f: 3.0,
                beta: 1.2,
                psi: 0.6,
                kappa: 0.4,
                h: 0.5,
                eta: vec![1.0, 1.6],
                gamma: 0.5,
            };
            let solver = Solver::new(params).unwrap();
            let s = solver.space().cardinality();
            prop_assert_eq!(s, 16);
            let rho = solver.contraction_modulus();
            let mut ta = vec![0.0; s];
            let mut tb = vec![0.0; s];
            solver.sweep(&a, &mut ta);
            solver.sweep(&b, &mut tb);
            let dist: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let tdist: f64 =
                ta.iter().zip(&tb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(tdist <= rho * dist + 1e-9);
        }

        /// The operator is monotone: raising the table anywhere cannot
        /// lower any backed-up value.
        #[test]
        fn operator_is_monotone(
            a in proptest::collection::vec(-50.0f64..50.0, 16),
            bump in proptest::collection::vec(0.0f64..25.0, 16),
        ) {
            let params = ModelParams {
                lambda: 2.0,
                mu: vec![1.0, 1.3],
                buffer: 2,
                r: 0.2,
                f: 4.0,
                beta: 0.9,
                psi: 0.3,
                kappa: 0.6,
                h: 0.4,
                eta: vec![1.0, 2.0],
                gamma: 0.7,
            };
            let solver = Solver::new(params).unwrap();
            let s = solver.space().cardinality();
            let b: Vec<f64> = a.iter().zip(&bump).map(|(x, d)| x + d).collect();
            let mut ta = vec![0.0; s];
            let mut tb = vec![0.0; s];
            solver.sweep(&a, &mut ta);
            solver.sweep(&b, &mut tb);
            for i in 0..s {
                prop_assert!(ta[i] <= tb[i] + 1e-9);
            }
        }
    }
}
