//! Scenario files: a complete problem description (graph, initial state,
//! targets, control and simulation settings) in a JSON schema, plus the
//! catalog of built-in scenarios.
//!
//! File schema, all keys required unless noted:
//!
//! ```json
//! {
//!   "name": "quad4-5b1d",
//!   "agents": [ { "p": [x, y, z], "R": [r11, r12, r13, r21, ..., r33] } ],
//!   "bearing_edges": [ [i, j] ],
//!   "distance_edges": [ [i, j] ],
//!   "target": { "bearings": [ [x, y, z] ], "distances": [ z ] },
//!   "control": { "gain": 1.0, "law": "Mixed", "mode": "FullGradient" },
//!   "sim": { "dt": 0.01, "max_steps": 200000, "tol": 1e-8, "integrator": "EulerExp" },
//!   "target_positions": [ [x, y, z] ]   // optional
//! }
//! ```
//!
//! `R` is row-major and must be orthonormal with determinant 1 (defect at
//! most 1e-9); desired bearings must be unit vectors. Validation failures
//! report the offending constraint. `target_positions` records the reference
//! configuration the targets were generated from, so plots can overlay the
//! target shape.

mod builtins;

pub use builtins::{builtin, builtin_names, generate_builtin, DEFAULT_SEED, SEED_ENV_VAR};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{ControlConfig, ControlLaw, ControlMode};
use crate::graph::FormationGraph;
use crate::lie::{Mat3, RotationMatrix, Vec3};
use crate::rigidity::{FrameworkState, TargetFormation};
use crate::sim::{Integrator, SimConfig};

/// A fully validated, runnable problem description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub graph: FormationGraph,
    pub initial: FrameworkState,
    pub target: TargetFormation,
    pub control: ControlConfig,
    pub sim: SimConfig,
    /// Reference positions the targets were computed from, when known.
    pub target_positions: Option<Vec<Vec3>>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed JSON or schema mismatch; the message carries the field and
    /// line/column from the parser.
    #[error("parse error in {origin}: {message}")]
    Parse { origin: String, message: String },
    /// Well-formed file whose contents violate a scenario invariant.
    #[error("invalid scenario {origin}: {message}")]
    Validation { origin: String, message: String },
    #[error("unknown scenario {name:?}; built-ins are: {available}")]
    UnknownScenario { name: String, available: String },
}

// ---------------------------------------------------------------------------
// File DTOs — the serialized shape, kept separate from the domain types so
// every load goes through full validation.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    agents: Vec<AgentDto>,
    bearing_edges: Vec<[usize; 2]>,
    distance_edges: Vec<[usize; 2]>,
    target: TargetDto,
    control: ControlDto,
    sim: SimDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_positions: Option<Vec<[f64; 3]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDto {
    p: [f64; 3],
    #[serde(rename = "R")]
    r: [f64; 9],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetDto {
    bearings: Vec<[f64; 3]>,
    distances: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlDto {
    gain: f64,
    law: LawDto,
    mode: ModeDto,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    normalized: bool,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum LawDto {
    BearingOnly,
    Mixed,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum ModeDto {
    Local,
    FullGradient,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimDto {
    dt: f64,
    max_steps: usize,
    tol: f64,
    integrator: IntegratorDto,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum IntegratorDto {
    EulerExp,
    #[serde(rename = "RK4Exp")]
    Rk4Exp,
}

// ---------------------------------------------------------------------------
// Load / save
// ---------------------------------------------------------------------------

/// Loads and fully validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

/// Parses and validates scenario JSON; `origin` names the source in errors.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    validate(file, origin)
}

/// Serializes a scenario to the documented JSON schema.
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let file = to_file_dto(scenario);
    let mut out = serde_json::to_string_pretty(&file).expect("scenario serialization");
    out.push('\n');
    out
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    fs::write(path, scenario_to_json(scenario)).map_err(|source| ScenarioError::WriteIo {
        path: path.to_path_buf(),
        source,
    })
}

fn to_file_dto(s: &Scenario) -> ScenarioFile {
    ScenarioFile {
        name: s.name.clone(),
        agents: s
            .initial
            .positions()
            .iter()
            .zip(s.initial.rotations())
            .map(|(p, r)| {
                let m = r.matrix();
                AgentDto {
                    p: [p.x, p.y, p.z],
                    r: [
                        m[(0, 0)],
                        m[(0, 1)],
                        m[(0, 2)],
                        m[(1, 0)],
                        m[(1, 1)],
                        m[(1, 2)],
                        m[(2, 0)],
                        m[(2, 1)],
                        m[(2, 2)],
                    ],
                }
            })
            .collect(),
        bearing_edges: s
            .graph
            .bearing_edges()
            .iter()
            .map(|&(i, j)| [i, j])
            .collect(),
        distance_edges: s
            .graph
            .distance_edges()
            .iter()
            .map(|&(i, j)| [i, j])
            .collect(),
        target: TargetDto {
            bearings: s
                .target
                .desired_bearings()
                .iter()
                .map(|b| [b.x, b.y, b.z])
                .collect(),
            distances: s.target.desired_distances().to_vec(),
        },
        control: ControlDto {
            gain: s.control.gain,
            law: match s.control.law {
                ControlLaw::BearingOnly => LawDto::BearingOnly,
                ControlLaw::Mixed => LawDto::Mixed,
            },
            mode: match s.control.mode {
                ControlMode::Local => ModeDto::Local,
                ControlMode::FullGradient => ModeDto::FullGradient,
            },
            normalized: s.control.normalized,
        },
        sim: SimDto {
            dt: s.sim.dt,
            max_steps: s.sim.max_steps,
            tol: s.sim.convergence_tol,
            integrator: match s.sim.integrator {
                Integrator::EulerExp => IntegratorDto::EulerExp,
                Integrator::Rk4Exp => IntegratorDto::Rk4Exp,
            },
        },
        target_positions: s
            .target_positions
            .as_ref()
            .map(|ps| ps.iter().map(|p| [p.x, p.y, p.z]).collect()),
    }
}

fn validate(file: ScenarioFile, origin: &str) -> Result<Scenario, ScenarioError> {
    let invalid = |message: String| ScenarioError::Validation {
        origin: origin.to_string(),
        message,
    };

    let n = file.agents.len();
    if n == 0 {
        return Err(invalid("scenario has no agents".to_string()));
    }
    let graph = FormationGraph::new(
        n,
        file.bearing_edges.iter().map(|&[i, j]| (i, j)).collect(),
        file.distance_edges.iter().map(|&[i, j]| (i, j)).collect(),
    )
    .map_err(|e| invalid(e.to_string()))?;
    if graph.bearing_count() == 0 {
        return Err(invalid(
            "scenario needs at least one bearing edge".to_string(),
        ));
    }

    let mut positions = Vec::with_capacity(n);
    let mut rotations = Vec::with_capacity(n);
    for (i, agent) in file.agents.iter().enumerate() {
        positions.push(Vec3::new(agent.p[0], agent.p[1], agent.p[2]));
        let m = Mat3::from_row_slice(&agent.r);
        let r =
            RotationMatrix::try_new(m).map_err(|e| invalid(format!("agent {i} rotation: {e}")))?;
        rotations.push(r);
    }
    let initial = FrameworkState::new(positions, rotations);

    for &(i, j) in graph.bearing_edges().iter().chain(graph.distance_edges()) {
        initial
            .relative(i, j)
            .map_err(|e| invalid(format!("initial state: {e}")))?;
    }

    let target = TargetFormation::new(
        file.target
            .bearings
            .iter()
            .map(|b| Vec3::new(b[0], b[1], b[2]))
            .collect(),
        file.target.distances.clone(),
    )
    .map_err(|e| invalid(e.to_string()))?;
    target
        .validate_counts(&graph)
        .map_err(|e| invalid(e.to_string()))?;

    if !(file.control.gain > 0.0 && file.control.gain.is_finite()) {
        return Err(invalid(format!(
            "control gain must be positive and finite, got {}",
            file.control.gain
        )));
    }
    let control = ControlConfig {
        gain: file.control.gain,
        law: match file.control.law {
            LawDto::BearingOnly => ControlLaw::BearingOnly,
            LawDto::Mixed => ControlLaw::Mixed,
        },
        mode: match file.control.mode {
            ModeDto::Local => ControlMode::Local,
            ModeDto::FullGradient => ControlMode::FullGradient,
        },
        normalized: file.control.normalized,
    };

    let sim = SimConfig {
        dt: file.sim.dt,
        max_steps: file.sim.max_steps,
        convergence_tol: file.sim.tol,
        integrator: match file.sim.integrator {
            IntegratorDto::EulerExp => Integrator::EulerExp,
            IntegratorDto::Rk4Exp => Integrator::Rk4Exp,
        },
        renorm_interval: 100,
    };
    sim.validate().map_err(|e| invalid(e.to_string()))?;

    let target_positions = match file.target_positions {
        None => None,
        Some(ps) => {
            if ps.len() != n {
                return Err(invalid(format!(
                    "target_positions has {} entries for {n} agents",
                    ps.len()
                )));
            }
            Some(ps.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect())
        }
    };

    Ok(Scenario {
        name: file.name,
        graph,
        initial,
        target,
        control,
        sim,
        target_positions,
    })
}
