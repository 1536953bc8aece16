//! Trajectory CSV export and read-back.
//!
//! One row per agent per recorded step. Floats are printed with 17
//! significant digits, which round-trips `f64` exactly, and the writer is
//! deterministic: identical trajectories produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::lie::Vec3;
use crate::sim::Trajectory;

/// The fixed column set.
pub const CSV_HEADER: &str = "t,agent,px,py,pz,r11,r12,r13,r21,r22,r23,r31,r32,r33,vx,vy,vz,wx,wy,wz,phi,centroid_x,centroid_y,centroid_z,scale";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    ReadIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn push_float(out: &mut String, x: f64) {
    // 17 significant digits: exact f64 round-trip.
    write!(out, ",{x:.16e}").expect("string write");
}

/// Renders the trajectory in the documented CSV schema.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 + traj.len() * 512);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for point in &traj.points {
        for agent in 0..point.state.n() {
            write!(out, "{:.16e},{agent}", point.t).expect("string write");
            let p = point.state.position(agent);
            for c in 0..3 {
                push_float(&mut out, p[c]);
            }
            let m = point.state.rotation(agent).matrix();
            for r in 0..3 {
                for c in 0..3 {
                    push_float(&mut out, m[(r, c)]);
                }
            }
            let u = &point.inputs[agent];
            for c in 0..3 {
                push_float(&mut out, u.v[c]);
            }
            for c in 0..3 {
                push_float(&mut out, u.w[c]);
            }
            push_float(&mut out, point.phi);
            for c in 0..3 {
                push_float(&mut out, point.centroid[c]);
            }
            push_float(&mut out, point.scale);
            out.push('\n');
        }
    }
    out
}

/// Writes the trajectory CSV to disk.
pub fn write_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    fs::write(path, trajectory_to_csv(traj)).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub agent: usize,
    pub position: Vec3,
    /// Row-major rotation entries.
    pub rotation: [f64; 9],
    pub v: Vec3,
    pub w: Vec3,
    pub phi: f64,
    pub centroid: Vec3,
    pub scale: f64,
}

/// Reads a trajectory CSV back into rows.
pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Vec<TrajectoryRow>, OutputError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| OutputError::ReadIo {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        other => {
            return Err(OutputError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("unexpected header {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        rows.push(parse_row(line).map_err(|message| OutputError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        })?);
    }
    Ok(rows)
}

fn parse_row(line: &str) -> Result<TrajectoryRow, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 25 {
        return Err(format!("expected 25 fields, found {}", fields.len()));
    }
    let float = |idx: usize| -> Result<f64, String> {
        fields[idx]
            .parse()
            .map_err(|e| format!("field {idx} ({:?}): {e}", fields[idx]))
    };
    let vec3 = |idx: usize| -> Result<Vec3, String> {
        Ok(Vec3::new(float(idx)?, float(idx + 1)?, float(idx + 2)?))
    };
    let mut rotation = [0.0; 9];
    for (k, r) in rotation.iter_mut().enumerate() {
        *r = float(5 + k)?;
    }
    Ok(TrajectoryRow {
        t: float(0)?,
        agent: fields[1]
            .parse()
            .map_err(|e| format!("field 1 ({:?}): {e}", fields[1]))?,
        position: vec3(2)?,
        rotation,
        v: vec3(14)?,
        w: vec3(17)?,
        phi: float(20)?,
        centroid: vec3(21)?,
        scale: float(24)?,
    })
}
