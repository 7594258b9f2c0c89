//! Exploratory driver for the bundled sweep studies; prints per-point
//! metrics and timings. Usage:
//! `cargo run --example probe_studies -- keepalive|delay|threshold|blocks`

use std::time::Instant;

use flexq::analysis;
use flexq::experiments::{self, SweepSpec};
use flexq::model::ModelParams;
use flexq::solver::{Solver, SolverSettings};

fn run_spec(spec: &SweepSpec) {
    let t0 = Instant::now();
    let rows = experiments::run_sweep(spec).unwrap();
    println!("sweep finished in {:.1?}", t0.elapsed());
    for row in &rows {
        println!(
            "{:>8.3}  active {:>8.5}  tasks {:>9.5}  rejecting {:>6}  V(idle) {:>12.5}  iters {:>6}{}",
            row.value,
            row.avg_active_queues,
            row.avg_total_tasks,
            row.rejecting_states.map(|c| c.to_string()).unwrap_or_default(),
            row.value_at_reference,
            row.iterations,
            if row.converged { "" } else { "  NOT CONVERGED" },
        );
    }
}

fn threshold_probe() {
    // Desk instances for the persistence check at gamma = 0.05.
    let instances = vec![
        ("n1b4", ModelParams {
            lambda: 2.0,
            mu: vec![1.0],
            buffer: 4,
            r: 1.0,
            f: 8.0,
            beta: 0.5,
            psi: 0.2,
            kappa: 0.5,
            h: 0.2,
            eta: vec![1.0, 1.3, 1.7, 2.2],
            gamma: 0.05,
        }),
        ("n2b3", ModelParams {
            lambda: 2.5,
            mu: vec![1.0, 0.8],
            buffer: 3,
            r: 0.5,
            f: 6.0,
            beta: 1.0,
            psi: 0.5,
            kappa: 0.8,
            h: 0.3,
            eta: vec![1.0, 1.5, 2.2],
            gamma: 0.05,
        }),
        ("n3b2", ModelParams {
            lambda: 3.0,
            mu: vec![1.0, 1.0, 1.0],
            buffer: 2,
            r: 2.0,
            f: 4.0,
            beta: 2.0,
            psi: 1.0,
            kappa: 1.0,
            h: 0.2,
            eta: vec![1.0, 2.0],
            gamma: 0.05,
        }),
        ("n3b4", ModelParams {
            lambda: 4.0,
            mu: vec![1.0, 1.0, 1.0],
            buffer: 4,
            r: 1.0,
            f: 10.0,
            beta: 1.5,
            psi: 0.8,
            kappa: 1.2,
            h: 0.4,
            eta: vec![1.0, 1.4, 1.9, 2.6],
            gamma: 0.05,
        }),
    ];
    for (name, params) in instances {
        let t0 = Instant::now();
        let solver = Solver::new(params).unwrap();
        let result = solver
            .value_iteration(SolverSettings { tol: 1e-9, max_iters: 2_000_000 })
            .unwrap();
        let report = analysis::check_build_threshold(&solver, &result.values).unwrap();
        let dom = analysis::check_domination(&result.values, solver.space(), 1e-9).unwrap();
        println!(
            "{name}: iters {} ({:.1?}), threshold pairs {} violations {}, domination pairs {} violations {}",
            result.iterations,
            t0.elapsed(),
            report.checked_pairs,
            report.violations.len(),
            dom.checked_pairs,
            dom.violations.len(),
        );
    }
}

fn blocks_probe() {
    // Value-surface block structure on the B = 6 instance at h = 1.
    let preset = experiments::delay_sweep_study();
    let t0 = Instant::now();
    let solver = Solver::new(preset.spec.base.clone()).unwrap();
    let result = solver
        .value_iteration(SolverSettings { tol: 1e-9, max_iters: 2_000_000 })
        .unwrap();
    println!("solve: {} iters in {:.1?}", result.iterations, t0.elapsed());
    let space = solver.space();
    let block = space.cardinality() / (space.buffer() + 2) as usize;
    for b0 in 0..(space.buffer() + 2) as usize {
        let lo = b0 * block;
        let mean: f64 =
            (lo..lo + block).map(|i| result.values.get(i)).sum::<f64>() / block as f64;
        println!("q1 level {:>2}: block mean {:>12.5}", b0 as i32 - 1, mean);
    }
    let t1 = Instant::now();
    let dom = analysis::check_domination(&result.values, space, 1e-9).unwrap();
    println!(
        "domination: {} pairs, {} violations, {:.1?}",
        dom.checked_pairs,
        dom.violations.len(),
        t1.elapsed()
    );
}

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "keepalive".into());
    match mode.as_str() {
        "keepalive" => run_spec(&experiments::keepalive_sweep_study().spec),
        "delay" => run_spec(&experiments::delay_sweep_study().spec),
        "threshold" => threshold_probe(),
        "blocks" => blocks_probe(),
        other => eprintln!("unknown probe {other}"),
    }
}
