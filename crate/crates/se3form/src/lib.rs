//! Formation control for rigid-body networks on SE(3).
//!
//! A framework is a directed graph of agents, each carrying a position and a
//! rotation, with bearing and/or distance measurements along the edges. This
//! crate provides:
//!
//! * the rigidity functions of such frameworks and their analytic Jacobians
//!   ([`rigidity`]), cross-checked by a finite-difference oracle;
//! * null-space (infinitesimal-motion) analysis of the rigidity matrices;
//! * gradient-descent control laws driving the framework to a formation
//!   specified by desired bearings and distances ([`control`]);
//! * a deterministic closed-loop simulator with conservation monitors
//!   ([`sim`]);
//! * scenario files, a catalog of built-in scenarios, CSV trajectory export,
//!   and SVG plots ([`scenario`], [`output`], [`plot`]), wrapped in a small
//!   CLI ([`cli`]).
//!
//! The `examples/` directory has one runnable program per capability; start
//! with `cargo run --example cube_formation`.
//!
//! ```
//! use se3form::scenario::builtin;
//! use se3form::sim::{simulate, Termination};
//!
//! let s = builtin("quad4-5b1d").unwrap();
//! let traj = simulate(&s.initial, &s.graph, &s.target, &s.control, &s.sim);
//! assert_eq!(traj.termination, Termination::Converged);
//! assert!(traj.last().unwrap().phi <= s.sim.convergence_tol);
//! ```

pub mod cli;
pub mod control;
pub mod graph;
pub mod lie;
pub mod output;
pub mod plot;
pub mod rigidity;
pub mod scenario;
pub mod sim;

pub use control::{ControlConfig, ControlInput, ControlLaw, ControlMode};
pub use graph::{EdgeKind, FormationGraph, GraphError};
pub use lie::{Mat3, RotationMatrix, Vec3};
pub use rigidity::{
    BearingVector, FrameworkState, RigidityError, RigidityMatrices, TargetFormation,
};
pub use scenario::{Scenario, ScenarioError};
pub use sim::{Integrator, SimConfig, Termination, Trajectory};
