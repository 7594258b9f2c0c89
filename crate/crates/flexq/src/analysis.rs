//! Structural checks on solved value tables and long-run metrics of the
//! closed-loop chain under a fixed policy.
//!
//! Two comparisons run over the partial order "same inactive set,
//! componentwise more tasks": solved values must not increase along it
//! ([`check_domination`]), and a strictly optimal deployment decision must
//! survive it ([`check_build_threshold`]). Both return reports rather than
//! panicking so callers decide what counts as a failure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{
    ArrivalAction, DepartureAction, PolicyTable, Solver, ValueTable, TIE_EPSILON,
};
use crate::state::{StateSpace, SystemState, INACTIVE_LEVEL};

/// One ordered pair where the value order contradicts the task order.
#[derive(Debug, Clone, Serialize)]
pub struct DominationViolation {
    /// State with componentwise more tasks.
    pub state_a: usize,
    /// State with componentwise fewer tasks (same inactive set).
    pub state_b: usize,
    pub value_a: f64,
    pub value_b: f64,
}

/// Result of [`check_domination`].
#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub checked_pairs: u64,
    pub violations: Vec<DominationViolation>,
}

impl DominationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One pair where a strictly optimal deployment fails to stay optimal
/// under extra load.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdViolation {
    /// State where deploying `queue` is strictly optimal.
    pub state_a: usize,
    /// Componentwise-larger state (same inactive set) where it is not even
    /// weakly optimal.
    pub state_b: usize,
    pub queue: usize,
}

/// Result of [`check_build_threshold`].
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub checked_pairs: u64,
    pub violations: Vec<ThresholdViolation>,
}

impl ThresholdReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Stationary distribution of the closed-loop chain under a fixed policy,
/// started from the all-idle state. Transient states carry probability 0.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
}

impl StationaryDistribution {
    /// Wrap an explicit distribution; entries must be nonnegative and sum
    /// to 1 within 1e-10.
    pub fn new(space: &StateSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.cardinality() {
            return Err(Error::TableSizeMismatch {
                expected: space.cardinality(),
                got: probs.len(),
            });
        }
        if probs.iter().any(|&p| !atom_ok(p)) {
            return Err(Error::InvalidParams(
                "distribution entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams(format!(
                "distribution sums to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// States carrying positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i, p))
    }
}

fn atom_ok(p: f64) -> bool {
    p.is_finite() && p >= 0.0
}

/// Pairwise monotonicity check of a solved table: over every ordered pair
/// with identical inactive sets and componentwise more tasks in `a`,
/// require `V(a) <= V(b) + eps` with `eps = 100 * tol`. Self-pairs are
/// enumerated and trivially pass.
pub fn check_domination(
    values: &ValueTable,
    space: &StateSpace,
    tol: f64,
) -> Result<DominationReport> {
    if values.len() != space.cardinality() {
        return Err(Error::TableSizeMismatch {
            expected: space.cardinality(),
            got: values.len(),
        });
    }
    let eps = 100.0 * tol;
    let mut report = DominationReport { checked_pairs: 0, violations: Vec::new() };
    let v = values.as_slice();
    // Walk the product over queues of per-queue comparable level pairs
    // (both idle, or 0 <= level_b <= level_a <= B), accumulating both
    // indices at once.
    let radix = (space.buffer() + 2) as usize;
    let buffer = space.buffer();
    fn rec(
        q: usize,
        ia: usize,
        ib: usize,
        n: usize,
        radix: usize,
        buffer: i32,
        v: &[f64],
        eps: f64,
        report: &mut DominationReport,
    ) {
        if q == n {
            report.checked_pairs += 1;
            if v[ia] > v[ib] + eps {
                report.violations.push(DominationViolation {
                    state_a: ia,
                    state_b: ib,
                    value_a: v[ia],
                    value_b: v[ib],
                });
            }
            return;
        }
        // Digit 0 encodes the idle level.
        rec(q + 1, ia * radix, ib * radix, n, radix, buffer, v, eps, report);
        for la in 0..=buffer as usize {
            for lb in 0..=la {
                rec(
                    q + 1,
                    ia * radix + la + 1,
                    ib * radix + lb + 1,
                    n,
                    radix,
                    buffer,
                    v,
                    eps,
                    report,
                );
            }
        }
    }
    rec(0, 0, 0, space.queue_count(), radix, buffer, v, eps, &mut report);
    Ok(report)
}

/// Number of ordered pairs [`check_domination`] visits: per queue, one
/// both-idle pair plus `(B+1)(B+2)/2` ordered active level pairs, raised
/// to the queue count.
pub fn domination_pair_count(space: &StateSpace) -> u64 {
    let b = space.buffer() as u64;
    let per_queue = 1 + (b + 1) * (b + 2) / 2;
    per_queue.pow(space.queue_count() as u32)
}

/// True when the two states have identical inactive sets and `b` carries
/// at least as many tasks as `a` in every queue.
pub fn dominates(a: &SystemState, b: &SystemState) -> bool {
    a.queue_count() == b.queue_count()
        && a.levels().iter().zip(b.levels()).all(|(&la, &lb)| {
            (la == INACTIVE_LEVEL) == (lb == INACTIVE_LEVEL) && lb >= la
        })
}

/// Value drop along one comparable pair: `V(a) - V(b)` for `b` carrying
/// componentwise at least as many tasks as `a` with the same inactive set.
/// Nonnegative on solved tables.
pub fn compute_alpha(
    values: &ValueTable,
    space: &StateSpace,
    a: &SystemState,
    b: &SystemState,
) -> Result<f64> {
    if !dominates(a, b) {
        return Err(Error::NotComparable(format!(
            "{:?} and {:?} are not ordered with identical inactive sets",
            a.levels(),
            b.levels()
        )));
    }
    let ia = space.encode(a)?;
    let ib = space.encode(b)?;
    if values.len() != space.cardinality() {
        return Err(Error::TableSizeMismatch {
            expected: space.cardinality(),
            got: values.len(),
        });
    }
    Ok(values.get(ia) - values.get(ib))
}

/// Persistence check for deployment decisions: wherever deploying queue
/// `i` is strictly optimal (its action value beats every alternative by
/// more than the tie slack), deploying `i` must stay weakly optimal in
/// every componentwise-larger state with the same inactive set. Action
/// values are recomputed from the converged table.
pub fn check_build_threshold(solver: &Solver, values: &ValueTable) -> Result<ThresholdReport> {
    let space = solver.space();
    if values.len() != space.cardinality() {
        return Err(Error::TableSizeMismatch {
            expected: space.cardinality(),
            got: values.len(),
        });
    }
    let v = values.as_slice();
    let p = solver.params();
    let n = space.queue_count();
    let mut report = ThresholdReport { checked_pairs: 0, violations: Vec::new() };
    let mut levels = vec![0i32; n];

    // Arrival action values share every other term of the backup, so the
    // comparison uses them directly: admit = V(target) - build + r,
    // reject = V(here) - f.
    let arrival_values = |idx: usize| -> (f64, Vec<(usize, bool, f64)>) {
        let reject = v[idx] - p.f;
        let opts = solver
            .admit_options(idx)
            .iter()
            .map(|o| (o.queue, o.activates, v[o.target] - o.build_cost + p.r))
            .collect();
        (reject, opts)
    };

    for idx in 0..space.cardinality() {
        space.decode_into(idx, &mut levels)?;
        let (reject, opts) = arrival_values(idx);
        // A strictly optimal deployment beats the reject value and every
        // other admission by more than the tie slack.
        let mut strict: Option<usize> = None;
        for &(queue, activates, val) in &opts {
            if !activates {
                continue;
            }
            let mut best_other = reject;
            for &(q2, act2, val2) in &opts {
                if q2 == queue && act2 == activates {
                    continue;
                }
                if val2 > best_other {
                    best_other = val2;
                }
            }
            if val > best_other + TIE_EPSILON {
                strict = Some(queue);
                break;
            }
        }
        let Some(queue) = strict else { continue };
        // Enumerate every state above `idx` in the partial order and
        // require the deployment to stay weakly optimal there.
        let mut upper = levels.clone();
        visit_upper(space, &levels, &mut upper, 0, &mut |jdx| {
            report.checked_pairs += 1;
            let (reject_b, opts_b) = arrival_values(jdx);
            let mut deploy_val = f64::NEG_INFINITY;
            let mut best_other = reject_b;
            for &(q2, act2, val2) in &opts_b {
                if q2 == queue && act2 {
                    deploy_val = val2;
                } else if val2 > best_other {
                    best_other = val2;
                }
            }
            if deploy_val < best_other - TIE_EPSILON {
                report.violations.push(ThresholdViolation {
                    state_a: idx,
                    state_b: jdx,
                    queue,
                });
            }
        })?;
    }
    Ok(report)
}

/// Call `f` with the index of every state whose levels dominate `base`
/// componentwise with the same inactive set (including `base` itself).
fn visit_upper(
    space: &StateSpace,
    base: &[i32],
    scratch: &mut [i32],
    q: usize,
    f: &mut impl FnMut(usize),
) -> Result<()> {
    if q == base.len() {
        f(space.encode_levels(scratch)?);
        return Ok(());
    }
    if base[q] == INACTIVE_LEVEL {
        scratch[q] = INACTIVE_LEVEL;
        visit_upper(space, base, scratch, q + 1, f)?;
    } else {
        for level in base[q]..=space.buffer() {
            scratch[q] = level;
            visit_upper(space, base, scratch, q + 1, f)?;
        }
    }
    Ok(())
}

/// Number of states whose arrival decision is to turn the task away.
pub fn count_rejecting_states(policy: &PolicyTable) -> usize {
    (0..policy.state_count())
        .filter(|&idx| policy.arrival(idx) == ArrivalAction::Reject)
        .count()
}

/// Stationary distribution of the closed-loop chain under `policy`,
/// started from the all-idle state.
///
/// The chain is uniformized at the constant rate `lambda + sum of mu`
/// (idle and empty queues contribute self-loops), restricted to the states
/// reachable from all-idle, and power-iterated from the point mass there
/// until the L1 change per sweep drops below 1e-10.
pub fn stationary_distribution(
    solver: &Solver,
    policy: &PolicyTable,
) -> Result<StationaryDistribution> {
    let space = solver.space();
    let s = space.cardinality();
    if policy.state_count() != s || policy.queue_count() != space.queue_count() {
        return Err(Error::TableSizeMismatch { expected: s, got: policy.state_count() });
    }
    let (starts, edges) = closed_loop_transitions(solver, policy)?;

    // Reachable set from the all-idle start; unreachable rows are never
    // touched by the iteration below.
    let mut reachable = Vec::new();
    let mut seen = vec![false; s];
    let start = space.all_inactive_index();
    seen[start] = true;
    reachable.push(start);
    let mut head = 0;
    while head < reachable.len() {
        let idx = reachable[head];
        head += 1;
        for &(target, _) in &edges[starts[idx] as usize..starts[idx + 1] as usize] {
            let t = target as usize;
            if !seen[t] {
                seen[t] = true;
                reachable.push(t);
            }
        }
    }
    reachable.sort_unstable();

    let mut p = vec![0.0f64; s];
    let mut next = vec![0.0f64; s];
    p[start] = 1.0;
    let max_iters: u64 = 1_000_000;
    let mut change = f64::INFINITY;
    for iter in 0..max_iters {
        for &idx in &reachable {
            next[idx] = 0.0;
        }
        for &idx in &reachable {
            let mass = p[idx];
            if mass == 0.0 {
                continue;
            }
            for &(target, prob) in &edges[starts[idx] as usize..starts[idx + 1] as usize] {
                next[target as usize] += mass * prob;
            }
        }
        change = reachable.iter().map(|&i| (next[i] - p[i]).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if change < 1e-10 {
            let total: f64 = reachable.iter().map(|&i| p[i]).sum();
            for &i in &reachable {
                p[i] /= total;
            }
            return StationaryDistribution::new(space, p);
        }
        let _ = iter;
    }
    Err(Error::StationaryNoConvergence { iterations: max_iters, last_change: change })
}

/// One uniformized step of the closed-loop chain: returns `p * P`.
/// Exposed so callers can verify the fixed-point property.
pub fn closed_loop_step(
    solver: &Solver,
    policy: &PolicyTable,
    p: &[f64],
) -> Result<Vec<f64>> {
    let s = solver.space().cardinality();
    if p.len() != s {
        return Err(Error::TableSizeMismatch { expected: s, got: p.len() });
    }
    let (starts, edges) = closed_loop_transitions(solver, policy)?;
    let mut next = vec![0.0f64; s];
    for idx in 0..s {
        let mass = p[idx];
        if mass == 0.0 {
            continue;
        }
        for &(target, prob) in &edges[starts[idx] as usize..starts[idx + 1] as usize] {
            next[target as usize] += mass * prob;
        }
    }
    Ok(next)
}

/// Row-compressed one-step transition probabilities of the closed-loop
/// uniformized chain.
fn closed_loop_transitions(
    solver: &Solver,
    policy: &PolicyTable,
) -> Result<(Vec<u32>, Vec<(u32, f64)>)> {
    let space = solver.space();
    let params = solver.params();
    let s = space.cardinality();
    let n = space.queue_count();
    let big_lambda = params.lambda + params.total_mu();
    let mut starts = Vec::with_capacity(s + 1);
    let mut edges: Vec<(u32, f64)> = Vec::with_capacity(s * (n + 2));
    let mut levels = vec![0i32; n];
    for idx in 0..s {
        starts.push(edges.len() as u32);
        space.decode_into(idx, &mut levels)?;
        let row_start = edges.len();
        let push = |target: usize, prob: f64, edges: &mut Vec<(u32, f64)>| {
            let t = target as u32;
            if let Some(e) = edges[row_start..].iter_mut().find(|e| e.0 == t) {
                e.1 += prob;
            } else {
                edges.push((t, prob));
            }
        };
        let mut moving_rate = 0.0;
        let arrival_target = match policy.arrival(idx) {
            ArrivalAction::Reject => idx,
            ArrivalAction::Schedule(i) => idx + space.weight(i),
            ArrivalAction::ActivateAndSchedule(i) => idx + 2 * space.weight(i),
        };
        push(arrival_target, params.lambda / big_lambda, &mut edges);
        moving_rate += params.lambda;
        for (i, &level) in levels.iter().enumerate() {
            if level >= 2 {
                push(idx - space.weight(i), params.mu[i] / big_lambda, &mut edges);
                moving_rate += params.mu[i];
            } else if level == 1 {
                let target = match policy.departure(idx, i) {
                    Some(DepartureAction::Keep) => idx - space.weight(i),
                    Some(DepartureAction::Destroy) => idx - 2 * space.weight(i),
                    None => unreachable!("validated policy decides level-1 departures"),
                };
                push(target, params.mu[i] / big_lambda, &mut edges);
                moving_rate += params.mu[i];
            }
        }
        let leftover = (big_lambda - moving_rate) / big_lambda;
        if leftover > 0.0 {
            push(idx, leftover, &mut edges);
        }
    }
    starts.push(edges.len() as u32);
    Ok((starts, edges))
}

/// Expected active queue count and expected total task count under a
/// distribution over states.
pub fn long_run_metrics(dist: &StationaryDistribution, space: &StateSpace) -> (f64, f64) {
    let mut avg_active = 0.0;
    let mut avg_tasks = 0.0;
    let n = space.queue_count();
    let mut levels = vec![0i32; n];
    for (idx, prob) in dist.support() {
        space.decode_into(idx, &mut levels).expect("support indices are in range");
        let active = levels.iter().filter(|&&l| l != INACTIVE_LEVEL).count();
        let tasks: i64 = levels.iter().filter(|&&l| l > 0).map(|&l| l as i64).sum();
        avg_active += prob * active as f64;
        avg_tasks += prob * tasks as f64;
    }
    (avg_active, avg_tasks)
}
