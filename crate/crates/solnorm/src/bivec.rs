//! Exact linear algebra of Λ²(ℝ⁴): wedge products, the Hodge star, the
//! self-dual/anti-self-dual Hodge basis, decomposability, and the double
//! cover SO(4) → SO(3)×SO(3) acting on Λ⁺ ⊕ Λ⁻.
//!
//! Components of a bivector are stored in the fixed ordered basis
//! (e₁∧e₂, e₁∧e₃, e₁∧e₄, e₂∧e₃, e₂∧e₄, e₃∧e₄) with the inner product that
//! makes these six basis bivectors orthonormal. Orientation is always
//! e₁∧e₂∧e₃∧e₄.

use nalgebra::{Matrix3, Matrix4, Matrix6, Quaternion, Rotation3, UnitQuaternion, Vector4, Vector6};
use thiserror::Error;

/// Index pairs (i, j), i < j, of the six basis bivectors eᵢ∧eⱼ.
pub const BASIS_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Error)]
pub enum BivecError {
    #[error("frame is not orthonormal (Gram deviation {0:.3e})")]
    NonOrthonormalFrame(f64),
    #[error("matrix is not a rotation (deviation {0:.3e})")]
    NotARotation(f64),
    #[error("quaternion lift failed the round-trip check (residual {0:.3e})")]
    LiftMismatch(f64),
}

/// Element of Λ²(ℝ⁴) in the fixed ordered basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bivector(pub Vector6<f64>);

impl Bivector {
    pub fn zero() -> Self {
        Bivector(Vector6::zeros())
    }

    pub fn from_components(c: [f64; 6]) -> Self {
        Bivector(Vector6::from_row_slice(&c))
    }

    pub fn dot(&self, other: &Bivector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Plücker quadric p₁₂p₃₄ − p₁₃p₂₄ + p₁₄p₂₃; zero exactly on wedges
    /// of two vectors. Equals ⟨ω, *ω⟩ / 2.
    pub fn plucker(&self) -> f64 {
        let p = &self.0;
        p[0] * p[5] - p[1] * p[4] + p[2] * p[3]
    }

    pub fn is_decomposable(&self, tol: f64) -> bool {
        self.plucker().abs() <= tol
    }
}

impl std::ops::Add for Bivector {
    type Output = Bivector;
    fn add(self, rhs: Bivector) -> Bivector {
        Bivector(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Bivector {
    type Output = Bivector;
    fn sub(self, rhs: Bivector) -> Bivector {
        Bivector(self.0 - rhs.0)
    }
}

impl std::ops::Mul<Bivector> for f64 {
    type Output = Bivector;
    fn mul(self, rhs: Bivector) -> Bivector {
        Bivector(self * rhs.0)
    }
}

/// Antisymmetrized outer product x∧y, decomposable by construction.
pub fn wedge(x: &Vector4<f64>, y: &Vector4<f64>) -> Bivector {
    let mut c = Vector6::zeros();
    for (idx, &(i, j)) in BASIS_PAIRS.iter().enumerate() {
        c[idx] = x[i] * y[j] - x[j] * y[i];
    }
    Bivector(c)
}

/// The Hodge star as a constant signed permutation in the fixed ordering:
/// *(e₁∧e₂) = e₃∧e₄, *(e₁∧e₃) = e₄∧e₂ = −e₂∧e₄, *(e₁∧e₄) = e₂∧e₃.
pub fn star_matrix() -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    m[(0, 5)] = 1.0;
    m[(5, 0)] = 1.0;
    m[(1, 4)] = -1.0;
    m[(4, 1)] = -1.0;
    m[(2, 3)] = 1.0;
    m[(3, 2)] = 1.0;
    m
}

pub fn hodge_star(w: &Bivector) -> Bivector {
    let p = &w.0;
    Bivector(Vector6::new(p[5], -p[4], p[3], p[2], -p[1], p[0]))
}

/// Oriented orthonormal frame of ℝ⁴; rows of the matrix are the frame
/// vectors expressed in ambient coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Frame4 {
    rows: Matrix4<f64>,
}

impl Frame4 {
    pub const GRAM_TOL: f64 = 1e-10;

    pub fn standard() -> Self {
        Frame4 {
            rows: Matrix4::identity(),
        }
    }

    /// Builds a frame from its row matrix; rows must be orthonormal with
    /// determinant +1.
    pub fn new(rows: Matrix4<f64>) -> Result<Self, BivecError> {
        let gram = rows * rows.transpose();
        let dev = (gram - Matrix4::identity()).norm();
        if dev > Self::GRAM_TOL || rows.determinant() < 0.0 {
            return Err(BivecError::NonOrthonormalFrame(dev));
        }
        Ok(Frame4 { rows })
    }

    pub fn row(&self, i: usize) -> Vector4<f64> {
        self.rows.row(i).transpose()
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.rows
    }
}

/// The six bivectors ξ₁⁺, ξ₂⁺, ξ₃⁺, ξ₁⁻, ξ₂⁻, ξ₃⁻ induced by a frame:
/// ξ₁± = (e₁∧e₂ ± e₃∧e₄)/√2, ξ₂± = (e₁∧e₃ ± e₄∧e₂)/√2,
/// ξ₃± = (e₁∧e₄ ± e₂∧e₃)/√2, with *ξᵢ± = ±ξᵢ±.
#[derive(Debug, Clone, Copy)]
pub struct HodgeBasis {
    pub xi: [Bivector; 6],
}

/// Change-of-basis matrix for the standard frame: column k holds the
/// components of the k-th Hodge basis vector in the eᵢ∧eⱼ ordering.
pub fn hodge_matrix() -> Matrix6<f64> {
    let s = 1.0 / 2.0_f64.sqrt();
    #[rustfmt::skip]
    let m = Matrix6::new(
        s,   0.0, 0.0,  s,   0.0, 0.0,
        0.0, s,   0.0,  0.0, s,   0.0,
        0.0, 0.0, s,    0.0, 0.0, s,
        0.0, 0.0, s,    0.0, 0.0, -s,
        0.0, -s,  0.0,  0.0, s,   0.0,
        s,   0.0, 0.0,  -s,  0.0, 0.0,
    );
    m
}

pub fn hodge_basis(fr: &Frame4) -> HodgeBasis {
    let e: Vec<Vector4<f64>> = (0..4).map(|i| fr.row(i)).collect();
    let w = |i: usize, j: usize| wedge(&e[i], &e[j]);
    let s = 1.0 / 2.0_f64.sqrt();
    let xi = [
        s * (w(0, 1) + w(2, 3)),
        s * (w(0, 2) - w(1, 3)),
        s * (w(0, 3) + w(1, 2)),
        s * (w(0, 1) - w(2, 3)),
        s * (w(0, 2) + w(1, 3)),
        s * (w(0, 3) - w(1, 2)),
    ];
    HodgeBasis { xi }
}

/// The Λ² action of a 4×4 matrix: column (k,l) of the result is the wedge
/// of columns k and l of `r`.
pub fn lambda2(r: &Matrix4<f64>) -> Matrix6<f64> {
    let cols: Vec<Vector4<f64>> = (0..4).map(|i| r.column(i).into_owned()).collect();
    let mut m = Matrix6::zeros();
    for (idx, &(i, j)) in BASIS_PAIRS.iter().enumerate() {
        m.set_column(idx, &wedge(&cols[i], &cols[j]).0);
    }
    m
}

fn rotation_deviation(r: &Matrix4<f64>) -> f64 {
    let ortho = (r.transpose() * r - Matrix4::identity()).norm();
    let det = (r.determinant() - 1.0).abs();
    ortho.max(det)
}

/// Matrices of the induced Λ² map restricted to Λ⁺ and Λ⁻, in the Hodge
/// basis of the standard frame. Both lie in SO(3).
pub fn induced_rotation(r: &Matrix4<f64>) -> Result<(Matrix3<f64>, Matrix3<f64>), BivecError> {
    let dev = rotation_deviation(r);
    if dev > 1e-10 {
        return Err(BivecError::NotARotation(dev));
    }
    let xi = hodge_matrix();
    let q = xi.transpose() * lambda2(r) * xi;
    let qp = q.fixed_view::<3, 3>(0, 0).into_owned();
    let qm = q.fixed_view::<3, 3>(3, 3).into_owned();
    Ok((qp, qm))
}

fn quat_of(v: &Vector4<f64>) -> Quaternion<f64> {
    Quaternion::new(v[0], v[1], v[2], v[3])
}

fn vec_of(q: &Quaternion<f64>) -> Vector4<f64> {
    Vector4::new(q.w, q.i, q.j, q.k)
}

/// Normalizes the sign of a unit quaternion so its first nonzero
/// coefficient (in the order w, i, j, k) is positive.
fn sign_fix(q: Quaternion<f64>) -> Quaternion<f64> {
    for c in [q.w, q.i, q.j, q.k] {
        if c.abs() > 1e-12 {
            return if c < 0.0 { -q } else { q };
        }
    }
    q
}

fn unit_quat_of_so3(m: &Matrix3<f64>) -> Quaternion<f64> {
    let rot = Rotation3::from_matrix_unchecked(*m);
    sign_fix(UnitQuaternion::from_rotation_matrix(&rot).into_inner())
}

/// Inverse of [`induced_rotation`] via the quaternion double cover: ℝ⁴ is
/// identified with the quaternions (e₁ ↦ 1, e₂ ↦ i, e₃ ↦ j, e₄ ↦ k) and
/// the lift acts by v ↦ q v r̄. The ± quaternion ambiguity is resolved by
/// making the first nonzero coefficient of each factor positive.
pub fn lift_to_so4(qp: &Matrix3<f64>, qm: &Matrix3<f64>) -> Result<Matrix4<f64>, BivecError> {
    for m in [qp, qm] {
        let ortho = (m.transpose() * m - Matrix3::identity()).norm();
        let det = (m.determinant() - 1.0).abs();
        if ortho.max(det) > 1e-8 {
            return Err(BivecError::NotARotation(ortho.max(det)));
        }
    }
    let q = unit_quat_of_so3(qp);
    let rbar = unit_quat_of_so3(qm).conjugate();
    let mut r4 = Matrix4::zeros();
    for j in 0..4 {
        let mut e = Vector4::zeros();
        e[j] = 1.0;
        let col = q * quat_of(&e) * rbar;
        r4.set_column(j, &vec_of(&col));
    }
    // Internal convention check: the lift must invert induced_rotation.
    let (qp2, qm2) = induced_rotation(&r4)?;
    let resid = (qp2 - qp).norm().max((qm2 - qm).norm());
    if resid > 1e-8 {
        return Err(BivecError::LiftMismatch(resid));
    }
    Ok(r4)
}
