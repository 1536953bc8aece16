//! Compares the two integrators on the cube scenario across step sizes:
//! how much centroid/scale drift each one accrues, and where explicit Euler
//! stops being usable.
//!
//! ```bash
//! cargo run --example integrators
//! ```

use se3form::scenario::builtin;
use se3form::sim::{invariant_report, simulate, Integrator};

fn main() {
    let base = builtin("cube8-bearing").expect("built-in catalog");
    println!(
        "{:<10} {:>8} {:>14} {:>12} {:>14} {:>14}",
        "integrator", "dt", "termination", "steps", "scale drift", "centroid drift"
    );
    for integrator in [Integrator::EulerExp, Integrator::Rk4Exp] {
        for dt in [4e-2, 1e-2, 1e-3] {
            let mut scenario = base.clone();
            scenario.sim.integrator = integrator;
            scenario.sim.dt = dt;
            let traj = simulate(
                &scenario.initial,
                &scenario.graph,
                &scenario.target,
                &scenario.control,
                &scenario.sim,
            );
            let report = invariant_report(&traj);
            println!(
                "{:<10} {:>8.0e} {:>14} {:>12} {:>14.3e} {:>14.3e}",
                format!("{integrator:?}"),
                dt,
                format!("{:?}", traj.termination),
                traj.len() - 1,
                report.max_scale_drift,
                report.max_centroid_drift
            );
        }
    }
    println!();
    println!("The continuous bearing-only flow conserves centroid and scale exactly, so");
    println!("the table shows pure integration error. Inputs are held in the body frame");
    println!("over each step: EulerExp moves every agent along velocities evaluated at");
    println!("the same instant, which keeps the centroid's pairwise cancellation exact");
    println!("to round-off, while Rk4Exp rotates the held velocity through the step and");
    println!("gives up that cancellation. Both drift O(dt) in scale because the hold,");
    println!("not the quadrature, dominates the closed-loop error.");
}
