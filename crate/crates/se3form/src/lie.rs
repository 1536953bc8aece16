//! SO(3) primitives: hat/vee maps, the orthogonal projection operator, the
//! rotation exponential, and orthonormality maintenance.
//!
//! Everything here is a pure function of its inputs. Rotations are stored as
//! plain 3×3 matrices wrapped in [`RotationMatrix`], which guarantees
//! orthonormality (Frobenius defect ≤ 1e-9) and positive determinant at
//! construction time.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// 3-vector of `f64` (positions in meters, angular rates in rad/s).
pub type Vec3 = Vector3<f64>;
/// 3×3 real matrix.
pub type Mat3 = Matrix3<f64>;

/// Skew-symmetry tolerance for [`vee`] (Frobenius norm of `Ω + Ωᵀ`).
pub const SKEW_TOL: f64 = 1e-9;
/// Vectors with norm at or below this are rejected by [`project`].
pub const ZERO_VECTOR_TOL: f64 = 1e-12;
/// Below this rotation angle [`so3_exp`] switches to its series expansion.
/// The truncation error of the second-order series is `O(θ³) < 1e-24` here,
/// well under one ulp.
pub const SMALL_ANGLE_TOL: f64 = 1e-8;
/// Orthonormality defect admitted by [`RotationMatrix::try_new`].
pub const ROTATION_DEFECT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LieError {
    /// Input to [`vee`] has a symmetric part above [`SKEW_TOL`].
    #[error("matrix is not skew-symmetric (‖Ω + Ωᵀ‖_F = {defect:.3e})")]
    NotSkew { defect: f64 },
    /// Input vector too short to define a direction.
    #[error("cannot project along a vector of norm {norm:.3e}")]
    ZeroVector { norm: f64 },
    /// Matrix is rank-deficient; no nearest rotation exists.
    #[error("matrix is numerically rank-deficient (σ_min = {sigma_min:.3e})")]
    Degenerate { sigma_min: f64 },
    /// Matrix is not orthonormal within [`ROTATION_DEFECT_TOL`].
    #[error("matrix is not a rotation (‖RᵀR − I‖_F = {defect:.3e}, det = {det})")]
    NotARotation { defect: f64, det: f64 },
}

/// An element of SO(3): orthonormal with determinant +1.
///
/// Held invariants: `‖RᵀR − I‖_F ≤ 1e-9` and `det R ∈ [1 − 1e-9, 1 + 1e-9]`.
/// Long integrations keep the defect in range by periodic
/// [`reorthonormalize`] calls (see the simulation runtime).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Mat3::identity())
    }

    /// Validates orthonormality and determinant before wrapping.
    pub fn try_new(m: Mat3) -> Result<Self, LieError> {
        let defect = orthonormality_defect(&m);
        let det = m.determinant();
        if defect > ROTATION_DEFECT_TOL || (det - 1.0).abs() > ROTATION_DEFECT_TOL {
            return Err(LieError::NotARotation { defect, det });
        }
        Ok(RotationMatrix(m))
    }

    /// Wraps without checking. For matrices that are rotations by
    /// construction (products of rotations, Rodrigues outputs).
    pub(crate) fn new_unchecked(m: Mat3) -> Self {
        RotationMatrix(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// `R · v` (body to world).
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// `Rᵀ · v` (world to body).
    pub fn inverse_rotate(&self, v: &Vec3) -> Vec3 {
        self.0.tr_mul(v)
    }

    /// Group composition `self · other`.
    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * other.0)
    }

    /// `‖RᵀR − I‖_F`, the drift measure used by the invariant monitors.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.0)
    }
}

impl AsRef<Mat3> for RotationMatrix {
    fn as_ref(&self) -> &Mat3 {
        &self.0
    }
}

fn orthonormality_defect(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// Skew-symmetric matrix of `ω`, so that `hat(ω) · x = ω × x`.
pub fn hat(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Inverse of [`hat`]. The symmetric part is discarded after the
/// skew-symmetry check, so `vee(hat(ω)) == ω` exactly.
pub fn vee(m: &Mat3) -> Result<Vec3, LieError> {
    let defect = (m + m.transpose()).norm();
    if defect > SKEW_TOL {
        return Err(LieError::NotSkew { defect });
    }
    Ok(Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ))
}

/// Orthogonal projector onto the complement of `v`:
/// `P(v) = I − (v/‖v‖)(v/‖v‖)ᵀ`.
///
/// Symmetric, idempotent, annihilates `v`, and invariant under positive
/// scaling of `v`. A vector of norm ≤ 1e-12 has no direction to project
/// along; in this codebase that means two agents are coincident, which is an
/// error upstream, so it is an error here too.
pub fn project(v: &Vec3) -> Result<Mat3, LieError> {
    let norm = v.norm();
    if norm <= ZERO_VECTOR_TOL {
        return Err(LieError::ZeroVector { norm });
    }
    let u = v / norm;
    Ok(Mat3::identity() - u * u.transpose())
}

/// Applies `P(v)` to `x` without forming the matrix.
pub(crate) fn project_apply(unit: &Vec3, x: &Vec3) -> Vec3 {
    x - unit * unit.dot(x)
}

/// Rotation exponential by the Rodrigues formula, with a second-order series
/// below [`SMALL_ANGLE_TOL`]. The rotation angle equals `‖ω‖`.
pub fn so3_exp(w: &Vec3) -> RotationMatrix {
    let theta = w.norm();
    let k = hat(w);
    let m = if theta < SMALL_ANGLE_TOL {
        Mat3::identity() + k + (k * k) * 0.5
    } else {
        let a = theta.sin() / theta;
        let b = (1.0 - theta.cos()) / (theta * theta);
        Mat3::identity() + k * a + (k * k) * b
    };
    RotationMatrix::new_unchecked(m)
}

/// Nearest rotation matrix in the Frobenius sense (polar projection via
/// SVD), with the determinant forced to +1.
pub fn reorthonormalize(m: &Mat3) -> Result<RotationMatrix, LieError> {
    let svd = m.svd(true, true);
    let sigma_min = svd.singular_values.min();
    if sigma_min < 1e-9 {
        return Err(LieError::Degenerate { sigma_min });
    }
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        // Flip the weakest direction to land on SO(3) rather than O(3).
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    Ok(RotationMatrix::new_unchecked(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    }

    #[test]
    fn hat_layout() {
        let m = hat(&Vec3::new(1.0, 2.0, 3.0));
        let expected = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn hat_of_zero_is_zero() {
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn hat_is_cross_product() {
        let w = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(hat(&w) * w, Vec3::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let w = random_vec(&mut rng, 5.0);
            let x = random_vec(&mut rng, 5.0);
            assert_abs_diff_eq!(hat(&w) * x, w.cross(&x), epsilon = 1e-14);
        }
    }

    #[test]
    fn vee_layout() {
        let m = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(vee(&m).unwrap(), Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(vee(&Mat3::zeros()).unwrap(), Vec3::zeros());
    }

    #[test]
    fn vee_hat_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let w = random_vec(&mut rng, 10.0);
            assert_eq!(vee(&hat(&w)).unwrap(), w);
        }
    }

    #[test]
    fn vee_rejects_non_skew() {
        let m = Mat3::new(0.0, -3.0, 2.0, 3.0, 1e-6, -1.0, -2.0, 1.0, 0.0);
        assert!(matches!(vee(&m), Err(LieError::NotSkew { .. })));
    }

    #[test]
    fn project_axis() {
        let p = project(&Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(p, Mat3::from_diagonal(&Vec3::new(0.0, 1.0, 1.0)));
        // Scale invariance.
        let p2 = project(&Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn project_annihilates_input() {
        let v = Vec3::new(1.0, 1.0, 0.0);
        let p = project(&v).unwrap();
        assert_abs_diff_eq!(p * v, Vec3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn project_rejects_zero() {
        assert!(matches!(
            project(&Vec3::zeros()),
            Err(LieError::ZeroVector { .. })
        ));
        assert!(matches!(
            project(&Vec3::new(1e-13, 0.0, 0.0)),
            Err(LieError::ZeroVector { .. })
        ));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(so3_exp(&Vec3::zeros()).matrix(), &Mat3::identity());
    }

    #[test]
    fn exp_quarter_turn_matches_power_series() {
        // Independent oracle: truncated matrix-exponential power series.
        let w = Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let k = hat(&w);
        let mut series = Mat3::identity();
        let mut term = Mat3::identity();
        for n in 1..=30 {
            term = term * k / n as f64;
            series += term;
        }
        let r = so3_exp(&w);
        assert_abs_diff_eq!(*r.matrix(), series, epsilon = 1e-15);
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(*r.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn exp_inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let w = random_vec(&mut rng, 3.0);
            let r = so3_exp(&w).compose(&so3_exp(&-w));
            assert_abs_diff_eq!(*r.matrix(), Mat3::identity(), epsilon = 1e-13);
        }
    }

    #[test]
    fn exp_small_angle_branch() {
        let w = Vec3::new(1e-9, -2e-9, 5e-10);
        let r = so3_exp(&w);
        assert!(r.orthonormality_defect() < 1e-15);
        // Angle of the result equals ‖ω‖: compare against hat(w) structure.
        assert_abs_diff_eq!(*r.matrix(), Mat3::identity() + hat(&w), epsilon = 1e-17);
    }

    #[test]
    fn reorthonormalize_fixed_points() {
        let i = reorthonormalize(&Mat3::identity()).unwrap();
        assert_eq!(i.matrix(), &Mat3::identity());
        let q = so3_exp(&Vec3::new(0.3, -0.7, 0.2));
        let r = reorthonormalize(q.matrix()).unwrap();
        assert_abs_diff_eq!(*r.matrix(), *q.matrix(), epsilon = 1e-14);
    }

    #[test]
    fn reorthonormalize_recovers_noisy_rotation() {
        // Oracle: polar projection of Q + E is within O(‖E‖) of Q.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let q = so3_exp(&random_vec(&mut rng, 3.0));
            let mut noisy = *q.matrix();
            for r in 0..3 {
                for c in 0..3 {
                    noisy[(r, c)] += rng.gen_range(-1e-6..1e-6);
                }
            }
            let fixed = reorthonormalize(&noisy).unwrap();
            assert!((fixed.matrix() - q.matrix()).norm() < 1e-5);
            assert!(fixed.orthonormality_defect() < 1e-14);
            assert_abs_diff_eq!(fixed.matrix().determinant(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn reorthonormalize_rejects_rank_deficient() {
        let m = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0);
        assert!(matches!(
            reorthonormalize(&m),
            Err(LieError::Degenerate { .. })
        ));
    }

    #[test]
    fn rotation_matrix_validation() {
        assert!(RotationMatrix::try_new(Mat3::identity()).is_ok());
        let skewed = Mat3::identity() + Mat3::new(0.0, 1e-6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            RotationMatrix::try_new(skewed),
            Err(LieError::NotARotation { .. })
        ));
        // Reflection: orthonormal but det = -1.
        let refl = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(matches!(
            RotationMatrix::try_new(refl),
            Err(LieError::NotARotation { .. })
        ));
    }
}
