//! Timing probe for the exhaustive policy oracle on the two-queue desk
//! instance. Run with `cargo run --example probe_enum` (dev profile builds
//! with opt-level 3).

use std::time::Instant;

use flexq::model::ModelParams;
use flexq::solver::{Solver, SolverSettings};

fn main() {
    let params = ModelParams {
        lambda: 1.7,
        mu: vec![1.0, 0.8],
        buffer: 2,
        r: 0.9,
        f: 2.0,
        beta: 0.7,
        psi: 0.5,
        kappa: 0.4,
        h: 0.3,
        eta: vec![1.0, 1.5],
        gamma: 1.0,
    };
    let solver = Solver::new(params).unwrap();
    let count = solver.count_feasible_policies();
    println!("feasible policies: {count}");

    let t0 = Instant::now();
    let oracle = solver.brute_force_solve().unwrap();
    let dt = t0.elapsed();
    println!(
        "enumeration: {:.2?} total, {:.1} ns/policy",
        dt,
        dt.as_nanos() as f64 / count as f64
    );

    let t1 = Instant::now();
    let result = solver
        .value_iteration(SolverSettings { tol: 1e-12, ..Default::default() })
        .unwrap();
    println!(
        "value iteration: {:.2?}, {} iterations, residual {:.3e}",
        t1.elapsed(),
        result.iterations,
        result.residual
    );
    println!("sup distance oracle vs VI: {:.3e}", result.values.sup_distance(&oracle));
}
