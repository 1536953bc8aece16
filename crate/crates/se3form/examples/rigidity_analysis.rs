//! Null-space analysis of rigidity matrices: which whole-formation motions
//! leave every measured constraint unchanged to first order?
//!
//! For a bearing-constrained cube with the complete sensing graph the
//! answer is seven-dimensional: three translations, one uniform scaling,
//! and three coordinated rotations. Adding a single distance edge removes
//! the scaling.
//!
//! ```bash
//! cargo run --example rigidity_analysis
//! ```

use se3form::graph::FormationGraph;
use se3form::lie::Vec3;
use se3form::rigidity::{
    bearing_rigidity_matrix, canonical_motions, infinitesimal_motion_space, mixed_rigidity_matrix,
    numerical_rank, out_of_span_residual, FrameworkState, DEFAULT_NULL_TOL,
};

fn cube_positions() -> Vec<Vec3> {
    (0..8u32)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -0.5 } else { 0.5 },
                if i & 2 == 0 { -0.5 } else { 0.5 },
                if i & 4 == 0 { -0.5 } else { 0.5 },
            )
        })
        .collect()
}

fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                edges.push((i, j));
            }
        }
    }
    edges
}

fn main() {
    let state = FrameworkState::from_positions(cube_positions());
    let n = state.n();

    let bearing_graph = FormationGraph::bearing_only(n, complete_edges(n)).unwrap();
    let m = bearing_rigidity_matrix(&state, &bearing_graph).unwrap();
    let basis = infinitesimal_motion_space(&m, DEFAULT_NULL_TOL);
    println!(
        "complete bearing graph on the cube: matrix {}x{}, rank {}, null-space dimension {}",
        m.nrows(),
        m.ncols(),
        numerical_rank(&m, DEFAULT_NULL_TOL),
        basis.ncols()
    );
    println!("admissibility of the canonical motions (out-of-span residual):");
    for motion in canonical_motions(&state) {
        let residual = out_of_span_residual(&basis, &motion.direction);
        println!(
            "  {:<24} {:9.3e}  {}",
            motion.label,
            residual,
            if residual < 1e-6 {
                "admissible"
            } else {
                "excluded"
            }
        );
    }

    // One distance edge fixes the scale and nothing else.
    let mixed_graph = FormationGraph::new(n, complete_edges(n), vec![(0, 7)]).unwrap();
    let m = mixed_rigidity_matrix(&state, &mixed_graph)
        .unwrap()
        .assembled();
    let basis = infinitesimal_motion_space(&m, DEFAULT_NULL_TOL);
    println!();
    println!(
        "same graph plus one distance edge: null-space dimension {}",
        basis.ncols()
    );
    for motion in canonical_motions(&state) {
        let residual = out_of_span_residual(&basis, &motion.direction);
        println!(
            "  {:<24} {:9.3e}  {}",
            motion.label,
            residual,
            if residual < 1e-6 {
                "admissible"
            } else {
                "excluded"
            }
        );
    }
}
