//! Parser for the per-state solution CSV emitted by `flexq solve`.
//!
//! The table is self-describing: one row per state in index order, the
//! queue levels spelled out, then the arrival decision (`R`, `S{i}`,
//! `A{i}`) and one departure decision per queue (`K`, `D`, or `-` when
//! the queue is not at level 1). Values in the `value` column are
//! ignored here; only the decisions are reconstructed.

use anyhow::{bail, ensure, Context, Result};
use flexq::solver::{ArrivalAction, DepartureAction, PolicyTable};
use flexq::state::StateSpace;

pub fn parse_solution_csv(text: &str, space: &StateSpace) -> Result<PolicyTable> {
    let n = space.queue_count();
    let states = space.cardinality();
    // index, q1..qn, value, arrival, dep1..depn
    let expected_cols = 1 + n + 1 + 1 + n;

    let mut lines = text.lines();
    let header = lines.next().context("policy file is empty")?;
    ensure!(
        header.starts_with("index,") && header.contains(",arrival"),
        "unrecognized policy file header: {header:?}"
    );

    let mut arrival: Vec<Option<ArrivalAction>> = vec![None; states];
    let mut departure: Vec<Option<DepartureAction>> = vec![None; states * n];
    let mut seen = 0usize;

    for (row, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        ensure!(
            cols.len() == expected_cols,
            "row {}: expected {} columns, found {}",
            row + 2,
            expected_cols,
            cols.len()
        );
        let index: usize = cols[0]
            .parse()
            .with_context(|| format!("row {}: bad state index {:?}", row + 2, cols[0]))?;
        ensure!(index < states, "row {}: state index {index} out of range", row + 2);
        ensure!(
            arrival[index].is_none(),
            "row {}: duplicate state index {index}",
            row + 2
        );

        // The level columns double as a consistency check against the
        // declared index; a mismatch means the file belongs to a
        // different model shape.
        let state = space.decode(index)?;
        for (queue, col) in cols[1..1 + n].iter().enumerate() {
            let level: i32 = col
                .parse()
                .with_context(|| format!("row {}: bad level {col:?}", row + 2))?;
            ensure!(
                level == state.level(queue),
                "row {}: level column {} disagrees with state index {index}",
                row + 2,
                queue + 1
            );
        }

        arrival[index] = Some(parse_arrival(cols[2 + n], n).with_context(|| {
            format!("row {}: bad arrival code {:?}", row + 2, cols[2 + n])
        })?);
        for queue in 0..n {
            let code = cols[3 + n + queue];
            departure[index * n + queue] = parse_departure(code)
                .with_context(|| format!("row {}: bad departure code {code:?}", row + 2))?;
        }
        seen += 1;
    }

    ensure!(seen == states, "policy file covers {seen} of {states} states");
    let arrival: Vec<ArrivalAction> = arrival.into_iter().map(|a| a.unwrap()).collect();
    Ok(PolicyTable::new(space, arrival, departure)?)
}

fn parse_arrival(code: &str, n: usize) -> Result<ArrivalAction> {
    if code == "R" {
        return Ok(ArrivalAction::Reject);
    }
    let (kind, digits) = code.split_at(1);
    let queue: usize = digits.parse().context("queue number")?;
    ensure!(queue >= 1 && queue <= n, "queue {queue} out of range");
    match kind {
        "S" => Ok(ArrivalAction::Schedule(queue - 1)),
        "A" => Ok(ArrivalAction::ActivateAndSchedule(queue - 1)),
        _ => bail!("unknown action kind {kind:?}"),
    }
}

fn parse_departure(code: &str) -> Result<Option<DepartureAction>> {
    match code {
        "-" => Ok(None),
        "K" => Ok(Some(DepartureAction::Keep)),
        "D" => Ok(Some(DepartureAction::Destroy)),
        other => bail!("unknown departure code {other:?}"),
    }
}
