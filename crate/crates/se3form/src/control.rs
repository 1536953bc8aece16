//! Potential functions and gradient-descent control inputs for the
//! bearing-only and mixed bearing-distance formation problems.
//!
//! The control input is the negated potential gradient, expressed in each
//! agent's body frame (the frame its velocities are commanded in): the
//! world-frame position gradient slice is mapped through `R_iᵀ`, and the
//! rotation gradient is taken directly in the body-frame tangent convention
//! shared with the rigidity matrices.
//!
//! Two routing modes exist. `FullGradient` is the exact stacked gradient:
//! an edge's position term acts on both endpoints. `Local` keeps only the
//! terms an agent can evaluate from its own outgoing measurements, which is
//! the sensing story the laws are designed around. Rotation terms only ever
//! touch the measuring agent, so the modes differ in `v` alone.

use nalgebra::DVector;

use crate::graph::FormationGraph;
use crate::lie::{project_apply, so3_exp, Vec3};
use crate::rigidity::{FrameworkState, RigidityError, TargetFormation};

/// Which constraint families drive the law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlLaw {
    BearingOnly,
    Mixed,
}

/// Gradient routing; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    Local,
    FullGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlConfig {
    /// Gain `k > 0` multiplying the negated gradient.
    pub gain: f64,
    pub law: ControlLaw,
    pub mode: ControlMode,
    /// Experimental variant that divides the bearing term by
    /// `‖b_𝒢 − b*_𝒢‖`, as some derivations of the law do. Off by default;
    /// the plain gradient is the reference behavior.
    pub normalized: bool,
}

impl ControlConfig {
    pub fn new(gain: f64, law: ControlLaw, mode: ControlMode) -> Self {
        assert!(gain > 0.0, "control gain must be positive");
        ControlConfig {
            gain,
            law,
            mode,
            normalized: false,
        }
    }

    pub fn bearing_only(gain: f64) -> Self {
        Self::new(gain, ControlLaw::BearingOnly, ControlMode::FullGradient)
    }

    pub fn mixed(gain: f64) -> Self {
        Self::new(gain, ControlLaw::Mixed, ControlMode::FullGradient)
    }
}

/// Body-frame velocity command for one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    /// Linear velocity, m/s.
    pub v: Vec3,
    /// Angular velocity, rad/s.
    pub w: Vec3,
}

impl ControlInput {
    pub fn zero() -> Self {
        ControlInput {
            v: Vec3::zeros(),
            w: Vec3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().all(|x| x.is_finite()) && self.w.iter().all(|x| x.is_finite())
    }
}

/// `φ = ½‖b_𝒢 − b*_𝒢‖²`, summed per edge in declaration order.
pub fn bearing_potential(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
) -> Result<f64, RigidityError> {
    let mut phi = 0.0;
    for (k, &(i, j)) in graph.bearing_edges().iter().enumerate() {
        let (e, dist) = state.relative(i, j)?;
        let b = state.rotation(i).inverse_rotate(&(e / dist));
        let r = b - *target.desired_bearings()[k];
        phi += 0.5 * r.norm_squared();
    }
    Ok(phi)
}

/// `φ = ½‖b_𝒢 − b*_𝒢‖² + ½‖d_𝒢 − d*_𝒢‖²` with distance entries in the
/// `½z²` form.
pub fn mixed_potential(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
) -> Result<f64, RigidityError> {
    let mut phi = bearing_potential(state, graph, target)?;
    for (k, &(i, j)) in graph.distance_edges().iter().enumerate() {
        let (_, dist) = state.relative(i, j)?;
        let z_star = target.desired_distances()[k];
        let r = 0.5 * dist * dist - 0.5 * z_star * z_star;
        phi += 0.5 * r * r;
    }
    Ok(phi)
}

/// The potential selected by `law`.
pub fn potential(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    law: ControlLaw,
) -> Result<f64, RigidityError> {
    match law {
        ControlLaw::BearingOnly => bearing_potential(state, graph, target),
        ControlLaw::Mixed => mixed_potential(state, graph, target),
    }
}

/// Per-agent gradient of the selected potential: world-frame position part
/// and body-frame rotation part, accumulated in edge declaration order.
fn per_agent_gradient(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    law: ControlLaw,
    mode: ControlMode,
    normalized: bool,
) -> Result<(Vec<Vec3>, Vec<Vec3>), RigidityError> {
    let n = state.n();
    let mut grad_p = vec![Vec3::zeros(); n];
    let mut grad_w = vec![Vec3::zeros(); n];

    // First pass: per-edge bearing quantities, plus the stacked residual
    // norm for the normalized variant.
    struct Term {
        tail: usize,
        head: usize,
        unit: Vec3,
        b: Vec3,
        r: Vec3,
        inv_len: f64,
    }
    let mut terms = Vec::with_capacity(graph.bearing_count());
    let mut residual_sq = 0.0;
    for (k, &(i, j)) in graph.bearing_edges().iter().enumerate() {
        let (e, dist) = state.relative(i, j)?;
        let unit = e / dist;
        let b = state.rotation(i).inverse_rotate(&unit);
        let r = b - *target.desired_bearings()[k];
        residual_sq += r.norm_squared();
        terms.push(Term {
            tail: i,
            head: j,
            unit,
            b,
            r,
            inv_len: 1.0 / dist,
        });
    }
    let bearing_scale = if normalized && residual_sq.sqrt() > 1e-12 {
        1.0 / residual_sq.sqrt()
    } else {
        1.0
    };

    for t in &terms {
        // (∂b/∂p_tail)ᵀ r = d · P(p̄) R_tail r, applied without forming P.
        let world_r = state.rotation(t.tail).rotate(&t.r);
        let g_world = project_apply(&t.unit, &world_r) * (t.inv_len * bearing_scale);
        grad_p[t.tail] += g_world;
        if mode == ControlMode::FullGradient {
            grad_p[t.head] -= g_world;
        }
        // (∂b/∂ω_tail)ᵀ r = hat(b)ᵀ r = r × b.
        grad_w[t.tail] += t.r.cross(&t.b) * bearing_scale;
    }

    if law == ControlLaw::Mixed {
        for (k, &(i, j)) in graph.distance_edges().iter().enumerate() {
            let (e, dist) = state.relative(i, j)?;
            let z_star = target.desired_distances()[k];
            let r = 0.5 * dist * dist - 0.5 * z_star * z_star;
            let g_world = e * r;
            grad_p[i] += g_world;
            if mode == ControlMode::FullGradient {
                grad_p[j] -= g_world;
            }
        }
    }
    Ok((grad_p, grad_w))
}

fn gradient_descent_inputs(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    cfg: &ControlConfig,
    law: ControlLaw,
) -> Result<Vec<ControlInput>, RigidityError> {
    let (grad_p, grad_w) = per_agent_gradient(state, graph, target, law, cfg.mode, cfg.normalized)?;
    let inputs = (0..state.n())
        .map(|i| ControlInput {
            v: state.rotation(i).inverse_rotate(&grad_p[i]) * (-cfg.gain),
            w: grad_w[i] * (-cfg.gain),
        })
        .collect();
    Ok(inputs)
}

/// Bearing-only gradient-descent law. At the target bearings every input is
/// zero: the position term contains `P(b)(b − b*)` and `P(b)b = 0`, and the
/// rotation term contains `(b − b*) × b`.
pub fn bearing_only_control(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    cfg: &ControlConfig,
) -> Result<Vec<ControlInput>, RigidityError> {
    debug_assert_eq!(cfg.law, ControlLaw::BearingOnly);
    gradient_descent_inputs(state, graph, target, cfg, ControlLaw::BearingOnly)
}

/// Mixed bearing-distance gradient-descent law. With no distance edges it
/// reduces term-for-term to [`bearing_only_control`].
pub fn mixed_control(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    cfg: &ControlConfig,
) -> Result<Vec<ControlInput>, RigidityError> {
    debug_assert_eq!(cfg.law, ControlLaw::Mixed);
    gradient_descent_inputs(state, graph, target, cfg, ControlLaw::Mixed)
}

/// Dispatches on `cfg.law`.
pub fn control_inputs(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    cfg: &ControlConfig,
) -> Result<Vec<ControlInput>, RigidityError> {
    gradient_descent_inputs(state, graph, target, cfg, cfg.law)
}

/// Analytic stacked gradient `∇φ ∈ ℝ^{6n}`: world-frame position entries
/// first, then body-frame rotation entries, agent-major.
pub fn stacked_gradient(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    law: ControlLaw,
) -> Result<DVector<f64>, RigidityError> {
    let n = state.n();
    let (grad_p, grad_w) =
        per_agent_gradient(state, graph, target, law, ControlMode::FullGradient, false)?;
    let mut out = DVector::zeros(6 * n);
    for i in 0..n {
        out.fixed_rows_mut::<3>(3 * i).copy_from(&grad_p[i]);
        out.fixed_rows_mut::<3>(3 * (n + i)).copy_from(&grad_w[i]);
    }
    Ok(out)
}

/// Central-difference gradient of the selected potential, in the same
/// stacking and tangent conventions as [`stacked_gradient`]. Step size must
/// be in `[1e-9, 1e-3]`.
pub fn gradient_oracle(
    state: &FrameworkState,
    graph: &FormationGraph,
    target: &TargetFormation,
    law: ControlLaw,
    h: f64,
) -> Result<DVector<f64>, RigidityError> {
    assert!(
        (1e-9..=1e-3).contains(&h),
        "finite-difference step {h} outside [1e-9, 1e-3]"
    );
    let n = state.n();
    let mut out = DVector::zeros(6 * n);
    let mut axis = Vec3::zeros();
    for agent in 0..n {
        for c in 0..3 {
            axis.fill(0.0);
            axis[c] = h;

            let mut plus = state.clone();
            plus.position_mut(agent)[c] += h;
            let mut minus = state.clone();
            minus.position_mut(agent)[c] -= h;
            out[3 * agent + c] = (potential(&plus, graph, target, law)?
                - potential(&minus, graph, target, law)?)
                / (2.0 * h);

            let mut plus = state.clone();
            plus.set_rotation(agent, state.rotation(agent).compose(&so3_exp(&axis)));
            let mut minus = state.clone();
            minus.set_rotation(agent, state.rotation(agent).compose(&so3_exp(&-axis)));
            out[3 * (n + agent) + c] = (potential(&plus, graph, target, law)?
                - potential(&minus, graph, target, law)?)
                / (2.0 * h);
        }
    }
    Ok(out)
}
