//! Self-contained SVG trajectory plots: one polyline per agent, a circle at
//! each start position, a square at each end position, and optionally the
//! target formation overlaid as diamonds.
//!
//! Output is deterministic (fixed float formatting, no timestamps), so plots
//! diff cleanly in review. Very long trajectories are stride-decimated to at
//! most [`MAX_POLYLINE_POINTS`] points per agent with start and end always
//! kept, and consecutive points that land on the same output pixel collapse
//! to one.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::lie::Vec3;
use crate::sim::Trajectory;

/// Upper bound on rendered polyline vertices per agent.
pub const MAX_POLYLINE_POINTS: usize = 2000;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 720.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("cannot plot an empty trajectory")]
    EmptyTrajectory,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Plane the 3D data is projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Xy,
    Xz,
    Yz,
    /// Isometric-style axonometric projection.
    Iso,
}

impl Projection {
    pub const ALL: [Projection; 4] = [
        Projection::Xy,
        Projection::Xz,
        Projection::Yz,
        Projection::Iso,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Projection::Xy => "xy",
            Projection::Xz => "xz",
            Projection::Yz => "yz",
            Projection::Iso => "iso",
        }
    }

    fn apply(&self, p: &Vec3) -> (f64, f64) {
        match self {
            Projection::Xy => (p.x, p.y),
            Projection::Xz => (p.x, p.z),
            Projection::Yz => (p.y, p.z),
            Projection::Iso => {
                let c30 = 3.0_f64.sqrt() * 0.5;
                ((p.x - p.y) * c30, (p.x + p.y) * 0.5 - p.z)
            }
        }
    }
}

impl FromStr for Projection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xy" => Ok(Projection::Xy),
            "xz" => Ok(Projection::Xz),
            "yz" => Ok(Projection::Yz),
            "iso" => Ok(Projection::Iso),
            other => Err(format!(
                "unknown projection {other:?} (expected xy, xz, yz, or iso)"
            )),
        }
    }
}

struct Mapper {
    min_u: f64,
    min_v: f64,
    scale: f64,
    offset_x: f64,
    offset_y: f64,
}

impl Mapper {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Mapper {
        let mut min_u = f64::INFINITY;
        let mut max_u = f64::NEG_INFINITY;
        let mut min_v = f64::INFINITY;
        let mut max_v = f64::NEG_INFINITY;
        for (u, v) in points {
            min_u = min_u.min(u);
            max_u = max_u.max(u);
            min_v = min_v.min(v);
            max_v = max_v.max(v);
        }
        // Degenerate spans (a static plot) still get a finite window.
        if !(max_u - min_u).is_finite() || max_u - min_u < 1e-9 {
            min_u -= 0.5;
            max_u += 0.5;
        }
        if max_v - min_v < 1e-9 {
            min_v -= 0.5;
            max_v += 0.5;
        }
        let span_u = max_u - min_u;
        let span_v = max_v - min_v;
        let scale = ((WIDTH - 2.0 * MARGIN) / span_u).min((HEIGHT - 2.0 * MARGIN) / span_v);
        Mapper {
            min_u,
            min_v,
            scale,
            offset_x: (WIDTH - span_u * scale) / 2.0,
            offset_y: (HEIGHT - span_v * scale) / 2.0,
        }
    }

    fn map(&self, (u, v): (f64, f64)) -> (f64, f64) {
        (
            self.offset_x + (u - self.min_u) * self.scale,
            // SVG y grows downward.
            HEIGHT - (self.offset_y + (v - self.min_v) * self.scale),
        )
    }
}

fn decimate(len: usize) -> impl Iterator<Item = usize> {
    let stride = len.div_ceil(MAX_POLYLINE_POINTS).max(1);
    (0..len)
        .step_by(stride)
        .chain((len > 0 && !(len - 1).is_multiple_of(stride)).then_some(len - 1))
}

/// Renders the plot as an SVG document string.
pub fn plot_to_svg(
    traj: &Trajectory,
    target_positions: Option<&[Vec3]>,
    projection: Projection,
) -> Result<String, PlotError> {
    if traj.is_empty() {
        return Err(PlotError::EmptyTrajectory);
    }
    let n = traj.first().unwrap().state.n();
    let projected: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|agent| {
            decimate(traj.len())
                .map(|k| projection.apply(traj.points[k].state.position(agent)))
                .collect()
        })
        .collect();
    let target_projected: Vec<(f64, f64)> = target_positions
        .unwrap_or(&[])
        .iter()
        .map(|p| projection.apply(p))
        .collect();

    let mapper = Mapper::fit(
        projected
            .iter()
            .flatten()
            .copied()
            .chain(target_projected.iter().copied()),
    );

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\">"
    )
    .unwrap();
    writeln!(
        svg,
        "  <title>agent trajectories ({})</title>",
        projection.name()
    )
    .unwrap();
    writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    )
    .unwrap();

    for (k, &(u, v)) in target_projected.iter().enumerate() {
        let (x, y) = mapper.map((u, v));
        let d = 7.0;
        writeln!(
            svg,
            "  <polygon class=\"target\" data-agent=\"{k}\" points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" \
             fill=\"none\" stroke=\"#444444\" stroke-dasharray=\"3 2\"/>",
            x, y - d, x + d, y, x, y + d, x - d, y
        )
        .unwrap();
    }

    for (agent, path) in projected.iter().enumerate() {
        let color = PALETTE[agent % PALETTE.len()];
        let mut points = String::new();
        let mut previous = String::new();
        for &(u, v) in path {
            let (x, y) = mapper.map((u, v));
            // Converged tails repeat the same pixel for thousands of steps;
            // skip consecutive duplicates at output precision.
            let formatted = format!("{x:.2},{y:.2}");
            if formatted == previous {
                continue;
            }
            write!(points, "{formatted} ").unwrap();
            previous = formatted;
        }
        writeln!(
            svg,
            "  <polyline class=\"path\" data-agent=\"{agent}\" points=\"{}\" \
             fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>",
            points.trim_end()
        )
        .unwrap();
    }

    for (agent, path) in projected.iter().enumerate() {
        let color = PALETTE[agent % PALETTE.len()];
        let (sx, sy) = mapper.map(path[0]);
        writeln!(
            svg,
            "  <circle class=\"start\" data-agent=\"{agent}\" cx=\"{sx:.2}\" cy=\"{sy:.2}\" \
             r=\"4\" fill=\"{color}\" fill-opacity=\"0.45\"/>"
        )
        .unwrap();
        let &(eu, ev) = path.last().unwrap();
        let (ex, ey) = mapper.map((eu, ev));
        writeln!(
            svg,
            "  <rect class=\"end\" data-agent=\"{agent}\" x=\"{:.2}\" y=\"{:.2}\" \
             width=\"8\" height=\"8\" fill=\"{color}\"/>",
            ex - 4.0,
            ey - 4.0
        )
        .unwrap();
    }

    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

/// Writes the trajectory plot without a target overlay.
pub fn emit_plot(
    traj: &Trajectory,
    path: impl AsRef<Path>,
    projection: Projection,
) -> Result<(), PlotError> {
    emit_plot_with_target(traj, None, path, projection)
}

/// Writes the trajectory plot, overlaying the target formation when its
/// reference positions are known.
pub fn emit_plot_with_target(
    traj: &Trajectory,
    target_positions: Option<&[Vec3]>,
    path: impl AsRef<Path>,
    projection: Projection,
) -> Result<(), PlotError> {
    let svg = plot_to_svg(traj, target_positions, projection)?;
    let path = path.as_ref();
    fs::write(path, svg).map_err(|source| PlotError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControlInput;
    use crate::rigidity::FrameworkState;
    use crate::sim::{centroid_and_scale, Termination, Trajectory, TrajectoryPoint};

    fn static_trajectory(n_points: usize) -> Trajectory {
        let state = FrameworkState::from_positions(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.5, 0.25),
        ]);
        let (centroid, scale) = centroid_and_scale(&state);
        let point = TrajectoryPoint {
            t: 0.0,
            state,
            inputs: vec![ControlInput::zero(); 2],
            phi: 0.0,
            centroid,
            scale,
        };
        Trajectory {
            points: (0..n_points)
                .map(|k| {
                    let mut p = point.clone();
                    p.t = k as f64;
                    p
                })
                .collect(),
            termination: Termination::StepLimit,
        }
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let traj = Trajectory {
            points: vec![],
            termination: Termination::NumericalFailure,
        };
        assert!(matches!(
            plot_to_svg(&traj, None, Projection::Xy),
            Err(PlotError::EmptyTrajectory)
        ));
    }

    #[test]
    fn static_trajectory_renders_markers() {
        let svg = plot_to_svg(&static_trajectory(3), None, Projection::Xy).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("class=\"start\"").count(), 2);
        assert_eq!(svg.matches("class=\"end\"").count(), 2);
        assert_eq!(svg.matches("class=\"target\"").count(), 0);
    }

    #[test]
    fn target_overlay_renders_diamonds() {
        let targets = vec![Vec3::zeros(), Vec3::new(2.0, 1.0, 0.0)];
        let svg = plot_to_svg(&static_trajectory(1), Some(&targets), Projection::Iso).unwrap();
        assert_eq!(svg.matches("class=\"target\"").count(), 2);
    }

    fn moving_trajectory(n_points: usize) -> Trajectory {
        let mut traj = static_trajectory(n_points);
        for (k, point) in traj.points.iter_mut().enumerate() {
            let offset = Vec3::new(k as f64 * 1e-2, (k as f64 * 1e-2).sin(), 0.0);
            let positions = point
                .state
                .positions()
                .iter()
                .map(|p| p + offset)
                .collect::<Vec<_>>();
            point.state = FrameworkState::from_positions(positions);
        }
        traj
    }

    #[test]
    fn long_trajectories_are_decimated() {
        let svg = plot_to_svg(&moving_trajectory(10_000), None, Projection::Xy).unwrap();
        let polyline = svg
            .lines()
            .find(|l| l.contains("<polyline"))
            .expect("has a polyline");
        let n_points = polyline.matches(',').count();
        assert!(n_points <= MAX_POLYLINE_POINTS + 1);
        assert!(n_points > 100);
    }

    #[test]
    fn consecutive_duplicate_points_collapse() {
        // A static path repeats one pixel; the polyline keeps a single point.
        let svg = plot_to_svg(&static_trajectory(500), None, Projection::Xy).unwrap();
        let polyline = svg
            .lines()
            .find(|l| l.contains("<polyline"))
            .expect("has a polyline");
        assert_eq!(polyline.matches(',').count(), 1);
    }

    #[test]
    fn projection_parsing() {
        assert_eq!("xy".parse::<Projection>().unwrap(), Projection::Xy);
        assert_eq!("iso".parse::<Projection>().unwrap(), Projection::Iso);
        assert!("foo".parse::<Projection>().is_err());
    }

    #[test]
    fn deterministic_output() {
        let traj = static_trajectory(5);
        let a = plot_to_svg(&traj, None, Projection::Xy).unwrap();
        let b = plot_to_svg(&traj, None, Projection::Xy).unwrap();
        assert_eq!(a, b);
    }
}
