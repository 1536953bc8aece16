//! Validates the analytic rigidity matrices and potential gradients against
//! central finite differences, and shows the second-order convergence of
//! the oracle as the step shrinks.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use se3form::control::{gradient_oracle, stacked_gradient, ControlLaw};
use se3form::graph::FormationGraph;
use se3form::lie::{so3_exp, Vec3};
use se3form::rigidity::{
    finite_difference_jacobian, mixed_rigidity_matrix, FdTarget, FrameworkState, TargetFormation,
};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 6;
    let positions: Vec<Vec3> = (0..n)
        .map(|i| {
            Vec3::new(
                1.7 * i as f64 + rng.gen_range(-0.3..0.3),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            )
        })
        .collect();
    let rotations = (0..n)
        .map(|_| {
            so3_exp(&Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ))
        })
        .collect();
    let state = FrameworkState::new(positions, rotations);
    let graph = FormationGraph::new(
        n,
        vec![
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 0),
            (0, 3),
            (2, 5),
        ],
        vec![(1, 4), (3, 0)],
    )
    .unwrap();
    let target = TargetFormation::from_reference_positions(
        &(0..n)
            .map(|i| Vec3::new(i as f64, (i % 2) as f64, 0.5 * (i / 2) as f64))
            .collect::<Vec<_>>(),
        &graph,
    )
    .unwrap();

    let analytic = mixed_rigidity_matrix(&state, &graph).unwrap().assembled();
    println!(
        "mixed rigidity matrix: {} x {} ({} distance rows, {} bearing rows)",
        analytic.nrows(),
        analytic.ncols(),
        graph.distance_count(),
        3 * graph.bearing_count()
    );
    println!("  h          |analytic - FD|_max");
    for h in [1e-3, 5e-4, 2.5e-4, 1e-6] {
        let fd = finite_difference_jacobian(&state, &graph, h, FdTarget::Mixed).unwrap();
        println!("  {h:8.1e}  {:12.3e}", (&analytic - fd).amax());
    }
    println!("(truncation error drops ~4x per halving until round-off takes over)");

    let grad = stacked_gradient(&state, &graph, &target, ControlLaw::Mixed).unwrap();
    println!();
    println!("potential gradient, {} entries", grad.len());
    println!("  h          |analytic - FD|_max");
    for h in [1e-3, 5e-4, 2.5e-4, 1e-6] {
        let fd = gradient_oracle(&state, &graph, &target, ControlLaw::Mixed, h).unwrap();
        println!("  {h:8.1e}  {:12.3e}", (&grad - fd).amax());
    }
}
