//! Rigidity functions and matrices for bearing- and distance-constrained
//! frameworks, plus the finite-difference oracle and null-space analysis.
//!
//! Conventions used throughout (and by every Jacobian in this crate):
//!
//! * Stacked coordinates are agent-major: all positions `p_1 … p_n`, then all
//!   rotations. Rotation coordinates are body-frame angular perturbations,
//!   i.e. column `a` of a rotation block differentiates along
//!   `R_i ← R_i · exp(h · ê_a)`.
//! * Edge rows follow declaration order, distance rows ahead of bearing rows.
//! * The incidence matrix has −1 at an edge's tail, so `Ēᵀp` stacks
//!   head-minus-tail differences; the compact bearing form therefore carries
//!   a leading minus to produce tail-frame bearings `R_iᵀ(p_i − p_j)/‖·‖`.

use nalgebra::{DMatrix, DVector, Unit};
use thiserror::Error;

use crate::graph::{kron_expand, EdgeKind, FormationGraph};
use crate::lie::{hat, so3_exp, Mat3, RotationMatrix, Vec3};

/// Agents closer than this are treated as coincident: `1/‖p_i − p_j‖`
/// overflows usefully below it, so it is an error rather than a clamp.
pub const COINCIDENT_TOL: f64 = 1e-9;
/// Default relative singular-value cutoff for [`infinitesimal_motion_space`].
pub const DEFAULT_NULL_TOL: f64 = 1e-8;
/// Unit-norm slack admitted for desired bearings.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A unit vector expressed in the measuring agent's body frame.
pub type BearingVector = Unit<Vec3>;

#[derive(Debug, Error, PartialEq)]
pub enum RigidityError {
    #[error("agents {i} and {j} are coincident (‖p_i − p_j‖ = {distance:.3e})")]
    CoincidentAgents { i: usize, j: usize, distance: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum TargetError {
    #[error("desired bearing {index} has norm {norm} (must be 1 within 1e-12)")]
    NonUnitBearing { index: usize, norm: f64 },
    #[error("desired distance {index} is {value} (must be > 0)")]
    NonPositiveDistance { index: usize, value: f64 },
    #[error("target has {got} desired bearings but the graph has {expected} bearing edges")]
    BearingCountMismatch { expected: usize, got: usize },
    #[error("target has {got} desired distances but the graph has {expected} distance edges")]
    DistanceCountMismatch { expected: usize, got: usize },
}

/// The full configuration of the framework: a position and a rotation per
/// agent.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameworkState {
    positions: Vec<Vec3>,
    rotations: Vec<RotationMatrix>,
}

impl FrameworkState {
    /// Positions and rotations must pair up one-to-one.
    pub fn new(positions: Vec<Vec3>, rotations: Vec<RotationMatrix>) -> Self {
        assert_eq!(
            positions.len(),
            rotations.len(),
            "one rotation per position"
        );
        FrameworkState {
            positions,
            rotations,
        }
    }

    /// All rotations at the identity.
    pub fn from_positions(positions: Vec<Vec3>) -> Self {
        let rotations = vec![RotationMatrix::identity(); positions.len()];
        FrameworkState::new(positions, rotations)
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, i: usize) -> &Vec3 {
        &self.positions[i]
    }

    pub fn rotation(&self, i: usize) -> &RotationMatrix {
        &self.rotations[i]
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn rotations(&self) -> &[RotationMatrix] {
        &self.rotations
    }

    pub(crate) fn position_mut(&mut self, i: usize) -> &mut Vec3 {
        &mut self.positions[i]
    }

    pub(crate) fn set_rotation(&mut self, i: usize, r: RotationMatrix) {
        self.rotations[i] = r;
    }

    /// Stacked position vector `p ∈ ℝ^{3n}`.
    pub fn stacked_positions(&self) -> DVector<f64> {
        let mut p = DVector::zeros(3 * self.n());
        for (i, pos) in self.positions.iter().enumerate() {
            p.fixed_rows_mut::<3>(3 * i).copy_from(pos);
        }
        p
    }

    pub fn is_finite(&self) -> bool {
        self.positions
            .iter()
            .all(|p| p.iter().all(|x| x.is_finite()))
            && self
                .rotations
                .iter()
                .all(|r| r.matrix().iter().all(|x| x.is_finite()))
    }

    /// Relative position `p_i − p_j` and its norm, with the coincidence
    /// guard applied.
    pub fn relative(&self, i: usize, j: usize) -> Result<(Vec3, f64), RigidityError> {
        let e = self.positions[i] - self.positions[j];
        let dist = e.norm();
        if dist <= COINCIDENT_TOL {
            return Err(RigidityError::CoincidentAgents {
                i,
                j,
                distance: dist,
            });
        }
        Ok((e, dist))
    }
}

/// Desired bearings (unit, one per bearing edge) and desired distances
/// (positive, one per distance edge). Distance constraints are compared in
/// the `½z²` form used by the stacked rigidity function.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFormation {
    bearings: Vec<BearingVector>,
    distances: Vec<f64>,
}

impl TargetFormation {
    pub fn new(bearings: Vec<Vec3>, distances: Vec<f64>) -> Result<Self, TargetError> {
        let mut checked = Vec::with_capacity(bearings.len());
        for (index, b) in bearings.into_iter().enumerate() {
            let norm = b.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(TargetError::NonUnitBearing { index, norm });
            }
            checked.push(Unit::new_unchecked(b));
        }
        for (index, &z) in distances.iter().enumerate() {
            if z.is_nan() || z <= 0.0 {
                return Err(TargetError::NonPositiveDistance { index, value: z });
            }
        }
        Ok(TargetFormation {
            bearings: checked,
            distances,
        })
    }

    /// Reads the desired constraints off a reference configuration: bearings
    /// as seen with every agent at the identity attitude, distances as the
    /// reference edge lengths.
    pub fn from_reference_positions(
        positions: &[Vec3],
        graph: &FormationGraph,
    ) -> Result<Self, RigidityError> {
        let state = FrameworkState::from_positions(positions.to_vec());
        let mut bearings = Vec::with_capacity(graph.bearing_count());
        for &(i, j) in graph.bearing_edges() {
            bearings.push(bearing(&state, (i, j))?);
        }
        let mut distances = Vec::with_capacity(graph.distance_count());
        for &(i, j) in graph.distance_edges() {
            let (_, dist) = state.relative(i, j)?;
            distances.push(dist);
        }
        Ok(TargetFormation {
            bearings,
            distances,
        })
    }

    pub fn validate_counts(&self, graph: &FormationGraph) -> Result<(), TargetError> {
        if self.bearings.len() != graph.bearing_count() {
            return Err(TargetError::BearingCountMismatch {
                expected: graph.bearing_count(),
                got: self.bearings.len(),
            });
        }
        if self.distances.len() != graph.distance_count() {
            return Err(TargetError::DistanceCountMismatch {
                expected: graph.distance_count(),
                got: self.distances.len(),
            });
        }
        Ok(())
    }

    pub fn desired_bearings(&self) -> &[BearingVector] {
        &self.bearings
    }

    /// Desired edge lengths `z*` in meters.
    pub fn desired_distances(&self) -> &[f64] {
        &self.distances
    }

    /// Desired stacked distance entries `½(z*)²`.
    pub fn desired_distance_values(&self) -> Vec<f64> {
        self.distances.iter().map(|z| 0.5 * z * z).collect()
    }
}

/// Body-frame bearing `b = R_iᵀ (p_i − p_j)/‖p_i − p_j‖` for one edge.
pub fn bearing(
    state: &FrameworkState,
    edge: (usize, usize),
) -> Result<BearingVector, RigidityError> {
    let (i, j) = edge;
    let (e, dist) = state.relative(i, j)?;
    Ok(Unit::new_unchecked(
        state.rotation(i).inverse_rotate(&(e / dist)),
    ))
}

/// Stacked bearing rigidity function `b_𝒢 ∈ ℝ^{3m_b}`, per-edge route.
pub fn bearing_rigidity_function(
    state: &FrameworkState,
    graph: &FormationGraph,
) -> Result<DVector<f64>, RigidityError> {
    let mut out = DVector::zeros(3 * graph.bearing_count());
    for (k, &edge) in graph.bearing_edges().iter().enumerate() {
        let b = bearing(state, edge)?;
        out.fixed_rows_mut::<3>(3 * k).copy_from(&*b);
    }
    Ok(out)
}

/// Stacked bearing rigidity function by the compact matrix route,
/// `b_𝒢 = −diag(d_ij R_iᵀ) Ēᵀ p`.
///
/// The leading minus pairs the tail-is-−1 incidence convention with
/// tail-minus-head bearings; see the module docs.
pub fn bearing_rigidity_function_compact(
    state: &FrameworkState,
    graph: &FormationGraph,
) -> Result<DVector<f64>, RigidityError> {
    let m_b = graph.bearing_count();
    let mut diag = DMatrix::zeros(3 * m_b, 3 * m_b);
    for (k, &(i, j)) in graph.bearing_edges().iter().enumerate() {
        let (_, dist) = state.relative(i, j)?;
        let block = state.rotation(i).matrix().transpose() / dist;
        diag.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(&block);
    }
    let ebar = kron_expand(&graph.incidence(EdgeKind::Bearing), 3);
    Ok(-(diag * (ebar.transpose() * state.stacked_positions())))
}

/// Stacked mixed rigidity function `[d_𝒢; b_𝒢] ∈ ℝ^{m_d + 3m_b}`: first the
/// `½z²` distance entries, then the bearings, each in declaration order.
pub fn mixed_rigidity_function(
    state: &FrameworkState,
    graph: &FormationGraph,
) -> Result<DVector<f64>, RigidityError> {
    let m_d = graph.distance_count();
    let mut out = DVector::zeros(m_d + 3 * graph.bearing_count());
    for (k, &(i, j)) in graph.distance_edges().iter().enumerate() {
        let (_, dist) = state.relative(i, j)?;
        out[k] = 0.5 * dist * dist;
    }
    for (k, &edge) in graph.bearing_edges().iter().enumerate() {
        let b = bearing(state, edge)?;
        out.fixed_rows_mut::<3>(m_d + 3 * k).copy_from(&*b);
    }
    Ok(out)
}

/// The analytic block matrices of the mixed rigidity Jacobian.
///
/// * `distance_block`: `m_d × 3n`, rows `∂(½z_k²)/∂p`.
/// * `bearing_position_block`: `3m_b × 3n`, `∂b_𝒢/∂p`.
/// * `bearing_rotation_block`: `3m_b × 3n`, `∂b_𝒢/∂ω` in the body-frame
///   convention; its only nonzero 3×3 blocks sit at each edge's tail agent
///   and equal `hat(b_k)`.
///
/// Distance constraints do not depend on attitudes, so the assembled matrix
/// `[[D, 0], [G, K]]` has an exactly zero top-right block.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityMatrices {
    n: usize,
    distance_block: DMatrix<f64>,
    bearing_position_block: DMatrix<f64>,
    bearing_rotation_block: DMatrix<f64>,
}

impl RigidityMatrices {
    pub fn distance_block(&self) -> &DMatrix<f64> {
        &self.distance_block
    }

    pub fn bearing_position_block(&self) -> &DMatrix<f64> {
        &self.bearing_position_block
    }

    pub fn bearing_rotation_block(&self) -> &DMatrix<f64> {
        &self.bearing_rotation_block
    }

    /// `(m_d + 3m_b) × 6n` assembly `[[D, 0], [G, K]]`.
    pub fn assembled(&self) -> DMatrix<f64> {
        let m_d = self.distance_block.nrows();
        let rows_b = self.bearing_position_block.nrows();
        let cols = 3 * self.n;
        let mut out = DMatrix::zeros(m_d + rows_b, 2 * cols);
        out.view_mut((0, 0), (m_d, cols))
            .copy_from(&self.distance_block);
        out.view_mut((m_d, 0), (rows_b, cols))
            .copy_from(&self.bearing_position_block);
        out.view_mut((m_d, cols), (rows_b, cols))
            .copy_from(&self.bearing_rotation_block);
        out
    }
}

fn bearing_blocks(
    state: &FrameworkState,
    graph: &FormationGraph,
) -> Result<(DMatrix<f64>, DMatrix<f64>), RigidityError> {
    let n = state.n();
    let m_b = graph.bearing_count();
    let mut g = DMatrix::zeros(3 * m_b, 3 * n);
    let mut k_blk = DMatrix::zeros(3 * m_b, 3 * n);
    for (k, &(i, j)) in graph.bearing_edges().iter().enumerate() {
        let (e, dist) = state.relative(i, j)?;
        let unit = e / dist;
        let proj: Mat3 = Mat3::identity() - unit * unit.transpose();
        let block = state.rotation(i).matrix().tr_mul(&proj) / dist;
        let mut row = g.fixed_view_mut::<3, 3>(3 * k, 3 * i);
        row += block;
        let mut row = g.fixed_view_mut::<3, 3>(3 * k, 3 * j);
        row -= block;
        let b = state.rotation(i).inverse_rotate(&unit);
        k_blk
            .fixed_view_mut::<3, 3>(3 * k, 3 * i)
            .copy_from(&hat(&b));
    }
    Ok((g, k_blk))
}

/// Analytic Jacobian `[G K] ∈ ℝ^{3m_b × 6n}` of the bearing rigidity
/// function, position columns first.
pub fn bearing_rigidity_matrix(
    state: &FrameworkState,
    graph: &FormationGraph,
) -> Result<DMatrix<f64>, RigidityError> {
    let n = state.n();
    let (g, k_blk) = bearing_blocks(state, graph)?;
    let mut out = DMatrix::zeros(3 * graph.bearing_count(), 6 * n);
    out.view_mut((0, 0), (g.nrows(), 3 * n)).copy_from(&g);
    out.view_mut((0, 3 * n), (k_blk.nrows(), 3 * n))
        .copy_from(&k_blk);
    Ok(out)
}

/// Analytic Jacobian blocks of the mixed rigidity function.
///
/// Distance row `k` for edge `(i, j)` holds `+e_kᵀ` in agent `i`'s position
/// columns and `−e_kᵀ` in agent `j`'s, with `e_k = p_i − p_j`: the gradient
/// of `½‖p_i − p_j‖²`.
pub fn mixed_rigidity_matrix(
    state: &FrameworkState,
    graph: &FormationGraph,
) -> Result<RigidityMatrices, RigidityError> {
    let n = state.n();
    let m_d = graph.distance_count();
    let mut d = DMatrix::zeros(m_d, 3 * n);
    for (k, &(i, j)) in graph.distance_edges().iter().enumerate() {
        let (e, _) = state.relative(i, j)?;
        d.fixed_view_mut::<1, 3>(k, 3 * i).copy_from(&e.transpose());
        d.fixed_view_mut::<1, 3>(k, 3 * j)
            .copy_from(&(-e).transpose());
    }
    let (g, k_blk) = bearing_blocks(state, graph)?;
    Ok(RigidityMatrices {
        n,
        distance_block: d,
        bearing_position_block: g,
        bearing_rotation_block: k_blk,
    })
}

/// Which stacked function [`finite_difference_jacobian`] differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdTarget {
    Bearing,
    Mixed,
}

/// Central-difference Jacobian of the selected rigidity function.
///
/// Position coordinates are perturbed additively; rotation coordinates
/// multiplicatively on the right, `R ← R · exp(±h ê_a)`, matching the
/// body-frame column convention of the analytic matrices. Step size must be
/// in `[1e-9, 1e-3]`.
pub fn finite_difference_jacobian(
    state: &FrameworkState,
    graph: &FormationGraph,
    h: f64,
    which: FdTarget,
) -> Result<DMatrix<f64>, RigidityError> {
    assert!(
        (1e-9..=1e-3).contains(&h),
        "finite-difference step {h} outside [1e-9, 1e-3]"
    );
    let eval = |s: &FrameworkState| -> Result<DVector<f64>, RigidityError> {
        match which {
            FdTarget::Bearing => bearing_rigidity_function(s, graph),
            FdTarget::Mixed => mixed_rigidity_function(s, graph),
        }
    };
    let n = state.n();
    let rows = match which {
        FdTarget::Bearing => 3 * graph.bearing_count(),
        FdTarget::Mixed => graph.distance_count() + 3 * graph.bearing_count(),
    };
    let mut jac = DMatrix::zeros(rows, 6 * n);
    let mut axis = Vec3::zeros();
    for agent in 0..n {
        for c in 0..3 {
            axis.fill(0.0);
            axis[c] = h;

            let mut plus = state.clone();
            plus.position_mut(agent)[c] += h;
            let mut minus = state.clone();
            minus.position_mut(agent)[c] -= h;
            let col = (eval(&plus)? - eval(&minus)?) / (2.0 * h);
            jac.column_mut(3 * agent + c).copy_from(&col);

            let mut plus = state.clone();
            plus.set_rotation(agent, state.rotation(agent).compose(&so3_exp(&axis)));
            let mut minus = state.clone();
            minus.set_rotation(agent, state.rotation(agent).compose(&so3_exp(&-axis)));
            let col = (eval(&plus)? - eval(&minus)?) / (2.0 * h);
            jac.column_mut(3 * n + 3 * agent + c).copy_from(&col);
        }
    }
    Ok(jac)
}

/// Orthonormal basis of the numerical null space of `m`: right singular
/// vectors whose singular values fall at or below `tol · σ_max`. Columns of
/// the result are the basis vectors.
pub fn infinitesimal_motion_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    // The thin SVD of a wide matrix drops null directions; padding with zero
    // rows makes V full size without touching the spectrum.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.max();
    let threshold = tol * sigma_max;
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    let mut basis = DMatrix::zeros(cols, null_rows.len());
    for (out_col, &row) in null_rows.iter().enumerate() {
        basis
            .column_mut(out_col)
            .copy_from(&v_t.row(row).transpose());
    }
    basis
}

/// Rank of `m` under the same relative tolerance as
/// [`infinitesimal_motion_space`].
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let svd = m.clone().svd(false, false);
    let sigma_max = svd.singular_values.max();
    let threshold = tol * sigma_max;
    (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > threshold)
        .count()
}

/// A named candidate motion of the whole framework, as a stacked tangent
/// vector in the column convention of the rigidity matrices.
#[derive(Debug, Clone)]
pub struct CanonicalMotion {
    pub label: String,
    pub direction: DVector<f64>,
}

/// The seven classical constraint-preserving motions of a bearing framework:
/// three translations, uniform scaling about the centroid, and three
/// coordinated rotations (positions and attitudes rotating together).
pub fn canonical_motions(state: &FrameworkState) -> Vec<CanonicalMotion> {
    let n = state.n();
    let dim = 6 * n;
    let mut out = Vec::with_capacity(7);
    for (c, label) in ["translation-x", "translation-y", "translation-z"]
        .iter()
        .enumerate()
    {
        let mut v = DVector::zeros(dim);
        for i in 0..n {
            v[3 * i + c] = 1.0;
        }
        out.push(CanonicalMotion {
            label: (*label).to_string(),
            direction: v,
        });
    }
    let centroid: Vec3 = state.positions().iter().sum::<Vec3>() / n as f64;
    let mut v = DVector::zeros(dim);
    for i in 0..n {
        v.fixed_rows_mut::<3>(3 * i)
            .copy_from(&(state.position(i) - centroid));
    }
    out.push(CanonicalMotion {
        label: "scaling".to_string(),
        direction: v,
    });
    for (c, label) in [
        "coordinated-rotation-x",
        "coordinated-rotation-y",
        "coordinated-rotation-z",
    ]
    .iter()
    .enumerate()
    {
        let mut w = Vec3::zeros();
        w[c] = 1.0;
        let mut v = DVector::zeros(dim);
        for i in 0..n {
            v.fixed_rows_mut::<3>(3 * i)
                .copy_from(&w.cross(state.position(i)));
            // Body-frame tangent of R_i ← exp(tŵ)R_i.
            v.fixed_rows_mut::<3>(3 * (n + i))
                .copy_from(&state.rotation(i).inverse_rotate(&w));
        }
        out.push(CanonicalMotion {
            label: (*label).to_string(),
            direction: v,
        });
    }
    out
}

/// How far `motion` sticks out of the span of `basis` (orthonormal columns):
/// `‖v̂ − B Bᵀ v̂‖` for the normalized motion. Zero means the motion lies in
/// the space.
pub fn out_of_span_residual(basis: &DMatrix<f64>, motion: &DVector<f64>) -> f64 {
    let v = motion / motion.norm();
    let coeffs = basis.tr_mul(&v);
    (&v - basis * coeffs).norm()
}
