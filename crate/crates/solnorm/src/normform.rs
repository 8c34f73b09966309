//! Normal form of the Ŝ operator: a distinguished orthonormal frame in
//! whose Hodge basis Ŝ is diagonal with entries aᵢ ± bᵢ, plus purity and
//! criticality diagnostics, obstruction norms for sectional-curvature
//! criticality of the coordinate 2-planes, and kernel-slice verification.

use crate::bivec::{
    hodge_matrix, lambda2, lift_to_so4, star_matrix, BivecError, Bivector, Frame4, BASIS_PAIRS,
};
use crate::curv::{ricci_of, CurvOp, SignConvention, SymForm};
use crate::soliton::{commutation_residual, s_hat_unchecked, SolitonError, SolitonPoint};
use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};
use thiserror::Error;

/// Commutation threshold below which a normal form is meaningful.
pub const COMMUTATION_TOL: f64 = 1e-8;
/// Eigen-gap below which the frame is non-unique.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum NormformError {
    #[error("Ŝ does not commute with * under the given convention (residual {0:.3e}); no normal form")]
    CommutationTooLarge(f64),
    #[error(transparent)]
    Soliton(#[from] SolitonError),
    #[error(transparent)]
    Bivec(#[from] BivecError),
}

/// Normal form of Ŝ: frame (rows are the new frame vectors), diagonal
/// data aᵢ, bᵢ, the residual off-diagonal mass, and per-eigenvalue gaps
/// within each block as confidence data.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub frame: Frame4,
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub offdiag_residual: f64,
    pub eigen_gaps_plus: [f64; 3],
    pub eigen_gaps_minus: [f64; 3],
    /// Some eigen gap is below [`DEGENERACY_GAP`]: the frame is valid but
    /// non-unique (the norm for Kähler points, whose S₊ is 2+1 degenerate).
    pub degenerate: bool,
}

impl NormalForm {
    /// Rebuilds Ŝ (in the original frame) from (frame, a, b).
    pub fn reconstruct(&self) -> CurvOp {
        let mut d = Vector6::zeros();
        for i in 0..3 {
            d[i] = self.a[i] + self.b[i];
            d[i + 3] = self.a[i] - self.b[i];
        }
        let xi = hodge_matrix();
        let s_nf = xi * Matrix6::from_diagonal(&d) * xi.transpose();
        // rot columns are the frame vectors; Ŝ_original = Λ²(rot) Ŝ_nf Λ²(rot)ᵀ
        let b6 = lambda2(&self.frame.matrix().transpose());
        CurvOp(b6 * s_nf * b6.transpose())
    }

    /// Minimum over all eigen gaps.
    pub fn min_gap(&self) -> f64 {
        self.eigen_gaps_plus
            .iter()
            .chain(self.eigen_gaps_minus.iter())
            .fold(f64::INFINITY, |m, &g| m.min(g))
    }
}

/// Eigen-decomposition of a symmetric 3×3 with eigenvalues sorted
/// descending and eigenvector columns arranged into an SO(3) matrix: the
/// first two columns sign-fixed (first nonzero component positive), the
/// third their cross product.
fn sorted_so3_eigen(m: &Matrix3<f64>) -> ([f64; 3], Matrix3<f64>) {
    let (evals, evecs) = jacobi_eigen_3x3(&(0.5 * (m + m.transpose())));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| evals[j].partial_cmp(&evals[i]).unwrap());
    let vals = [evals[order[0]], evals[order[1]], evals[order[2]]];
    let fix = |v: Vector3<f64>| -> Vector3<f64> {
        for k in 0..3 {
            if v[k].abs() > 1e-12 {
                return if v[k] < 0.0 { -v } else { v };
            }
        }
        v
    };
    let c0 = fix(evecs.column(order[0]).into_owned());
    let c1 = fix(evecs.column(order[1]).into_owned());
    let c2 = c0.cross(&c1);
    (vals, Matrix3::from_columns(&[c0, c1, c2]))
}

/// Cyclic Jacobi diagonalization of a symmetric 3×3. Unlike the library
/// tridiagonalization-based solver, this stays accurate to machine
/// precision even for clustered eigenvalues, which the downstream
/// obstruction identities rely on.
fn jacobi_eigen_3x3(m: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let mut a = *m;
    let mut v = Matrix3::identity();
    for _ in 0..50 {
        let off = (a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2)).sqrt();
        if off <= f64::EPSILON * a.norm() {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut g = Matrix3::identity();
            g[(p, p)] = c;
            g[(q, q)] = c;
            g[(p, q)] = s;
            g[(q, p)] = -s;
            a = g.transpose() * a * g;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v *= g;
        }
    }
    (Vector3::new(a[(0, 0)], a[(1, 1)], a[(2, 2)]), v)
}

fn per_block_gaps(vals: &[f64; 3]) -> [f64; 3] {
    let mut g = [f64::INFINITY; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                g[i] = g[i].min((vals[i] - vals[j]).abs());
            }
        }
    }
    g
}

/// Computes the normal form of Ŝ under the given sign convention by
/// diagonalizing the Hodge blocks S₊, S₋ with SO(3) rotations and lifting
/// the pair to a frame rotation. Eigenvalues are paired by sorted index:
/// aᵢ = ½(λᵢ⁺ + λᵢ⁻), bᵢ = ½(λᵢ⁺ − λᵢ⁻).
pub fn normal_form(
    p: &SolitonPoint,
    convention: SignConvention,
) -> Result<NormalForm, NormformError> {
    p.validate(crate::soliton::CONSTRAINT_TOL)?;
    let comm = commutation_residual(p, convention);
    if comm > COMMUTATION_TOL {
        return Err(NormformError::CommutationTooLarge(comm));
    }
    let (sp, sm) = crate::soliton::s_blocks(p, convention);
    let (lp, qp) = sorted_so3_eigen(&sp);
    let (lm, qm) = sorted_so3_eigen(&sm);
    let rot = lift_to_so4(&qp, &qm)?;
    let frame = Frame4::new(rot.transpose())?;

    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    for i in 0..3 {
        a[i] = 0.5 * (lp[i] + lm[i]);
        b[i] = 0.5 * (lp[i] - lm[i]);
    }

    // Residual: Ŝ in the Hodge basis of the new frame, minus its diagonal.
    let b6 = lambda2(&rot);
    let s_nf = b6.transpose() * s_hat_unchecked(p, convention).0 * b6;
    let xi = hodge_matrix();
    let hodge_form = xi.transpose() * s_nf * xi;
    let offdiag_residual = (hodge_form - Matrix6::from_diagonal(&hodge_form.diagonal())).norm();

    let eigen_gaps_plus = per_block_gaps(&lp);
    let eigen_gaps_minus = per_block_gaps(&lm);
    let degenerate = eigen_gaps_plus
        .iter()
        .chain(eigen_gaps_minus.iter())
        .any(|&g| g < DEGENERACY_GAP);

    Ok(NormalForm {
        frame,
        a,
        b,
        offdiag_residual,
        eigen_gaps_plus,
        eigen_gaps_minus,
        degenerate,
    })
}

/// True iff max |bᵢ| ≤ tol; pure points contribute zero signature density.
pub fn is_pure(nf: &NormalForm, tol: f64) -> bool {
    nf.b.iter().all(|bi| bi.abs() <= tol)
}

/// Criticality obstructions of the three coordinate 2-planes of a
/// normal-form frame, both by the closed-form quadratic expressions in
/// the off-diagonal Hessian entries and by brute-force orthogonal
/// projection of R̂(Pᵢ) onto span{Pᵢ, *Pᵢ}⊥.
#[derive(Debug, Clone)]
pub struct Obstructions {
    /// |𝒪ᵢ|² from the closed-form expressions.
    pub o_sq: [f64; 3],
    /// Same quantities by brute-force projection.
    pub o_sq_projection: [f64; 3],
    /// fᵢⱼ (i<j) in the pair ordering (1,2),(1,3),(1,4),(2,3),(2,4),(3,4).
    pub offdiag_hess: [f64; 6],
    /// Ric(eᵢ,eⱼ) (i<j), same ordering; equals −fᵢⱼ on soliton points.
    pub offdiag_ric: [f64; 6],
}

impl Obstructions {
    /// Per-plane verdicts of the three equivalent criticality criteria:
    /// (obstruction norm vanishes, the four named fᵢⱼ vanish, the
    /// corresponding Ric off-diagonals vanish).
    pub fn equivalence_verdicts(&self, tol: f64) -> [(bool, bool, bool); 3] {
        let mut out = [(false, false, false); 3];
        for i in 0..3 {
            let f4 = obstructing_entries(i, &self.offdiag_hess);
            let r4 = obstructing_entries(i, &self.offdiag_ric);
            out[i] = (
                self.o_sq[i] <= tol,
                f4.iter().all(|x| x.abs() <= tol.sqrt()),
                r4.iter().all(|x| x.abs() <= tol.sqrt()),
            );
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.o_sq.iter().sum()
    }
}

/// The four off-diagonal entries (in the i<j pair ordering) that obstruct
/// plane Pᵢ: the entries mixing the plane's index pair with its
/// complement. P₁ = e₁∧e₂ is obstructed by f₁₃, f₁₄, f₂₃, f₂₄ and so on
/// cyclically.
fn obstructing_entries(plane: usize, f: &[f64; 6]) -> [f64; 4] {
    // pair ordering: 0:(1,2) 1:(1,3) 2:(1,4) 3:(2,3) 4:(2,4) 5:(3,4)
    match plane {
        0 => [f[1], f[2], f[3], f[4]],
        1 => [f[0], f[2], f[3], f[5]],
        2 => [f[0], f[1], f[4], f[5]],
        _ => panic!("plane index out of range"),
    }
}

fn offdiag_vector(m: &Matrix4<f64>) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, &(i, j)) in BASIS_PAIRS.iter().enumerate() {
        out[k] = m[(i, j)];
    }
    out
}

/// The i-th coordinate plane P₁ = e₁∧e₂, P₂ = e₁∧e₃, P₃ = e₁∧e₄ as a
/// unit bivector in the fixed ordering (these are the first three basis
/// slots).
fn coordinate_plane(i: usize) -> Vector6<f64> {
    let mut v = Vector6::zeros();
    v[i] = 1.0;
    v
}

/// Squared norm of the projection of op(w) onto span{w, *w}⊥ for a unit
/// decomposable w.
fn projection_obstruction(op: &Matrix6<f64>, w: &Vector6<f64>) -> f64 {
    let sw = star_matrix() * w;
    let img = op * w;
    let resid = img - (img.dot(w)) * w - (img.dot(&sw)) * sw;
    resid.norm_squared()
}

/// Transports a symmetric 2-tensor into a frame (rows of `frame` are the
/// frame vectors expressed in the original basis).
fn tensor_in_frame(h: &SymForm, frame: &Frame4) -> Matrix4<f64> {
    let m = frame.matrix();
    m * h.0 * m.transpose()
}

pub fn criticality_obstructions(p: &SolitonPoint, nf: &NormalForm) -> Obstructions {
    let hess_nf = tensor_in_frame(&p.hess, &nf.frame);
    let ric_nf = tensor_in_frame(&ricci_of(&p.curv), &nf.frame);
    let offdiag_hess = offdiag_vector(&hess_nf);
    let offdiag_ric = offdiag_vector(&ric_nf);

    let mut o_sq = [0.0; 3];
    for i in 0..3 {
        o_sq[i] = 0.25
            * obstructing_entries(i, &offdiag_hess)
                .iter()
                .map(|x| x * x)
                .sum::<f64>();
    }

    // Brute force: R̂ in the normal-form frame, projections of the three
    // coordinate planes.
    let rot = nf.frame.matrix().transpose();
    let b6 = lambda2(&rot);
    let curv_nf = b6.transpose() * p.curv.0 * b6;
    let mut o_sq_projection = [0.0; 3];
    for i in 0..3 {
        o_sq_projection[i] = projection_obstruction(&curv_nf, &coordinate_plane(i));
    }

    Obstructions {
        o_sq,
        o_sq_projection,
        offdiag_hess,
        offdiag_ric,
    }
}

/// Obstruction norms of a coordinate plane and its star partner, which
/// must coincide: the same Hessian entries obstruct both.
#[derive(Debug, Clone, Copy)]
pub struct StarPartnerReport {
    pub plane_obstruction_sq: f64,
    pub star_obstruction_sq: f64,
}

pub fn star_partner_criticality(p: &SolitonPoint, nf: &NormalForm, i: usize) -> StarPartnerReport {
    let rot = nf.frame.matrix().transpose();
    let b6 = lambda2(&rot);
    let curv_nf = b6.transpose() * p.curv.0 * b6;
    let w = coordinate_plane(i);
    let sw_raw = star_matrix() * w;
    let sw = sw_raw / sw_raw.norm();
    StarPartnerReport {
        plane_obstruction_sq: projection_obstruction(&curv_nf, &w),
        star_obstruction_sq: projection_obstruction(&curv_nf, &sw),
    }
}

/// Decomposable unit elements of ker(Ŝ − aᵢI − bᵢ*), computed in the
/// normal-form frame.
#[derive(Debug, Clone)]
pub struct KernelSlice {
    /// The unit decomposable kernel elements (±Pᵢ, ±*Pᵢ in the simple
    /// case), as bivectors in the normal-form frame.
    pub elements: Vec<Bivector>,
    pub kernel_dim: usize,
    /// False iff the eigenvalues aᵢ ± bᵢ are not simple in their blocks;
    /// `elements` then holds an orthonormal kernel basis instead.
    pub simple: bool,
}

const KERNEL_SV_TOL: f64 = 1e-9;

pub fn kernel_slice(
    p: &SolitonPoint,
    nf: &NormalForm,
    i: usize,
    convention: SignConvention,
) -> KernelSlice {
    assert!(i < 3, "plane index out of range");
    let rot = nf.frame.matrix().transpose();
    let b6 = lambda2(&rot);
    let s_nf = b6.transpose() * s_hat_unchecked(p, convention).0 * b6;
    let m = s_nf - nf.a[i] * Matrix6::identity() - nf.b[i] * star_matrix();

    let svd = m.svd(true, true);
    let v_t = svd.v_t.expect("requested");
    let mut kernel: Vec<Vector6<f64>> = Vec::new();
    for k in 0..6 {
        if svd.singular_values[k] <= KERNEL_SV_TOL {
            kernel.push(v_t.row(k).transpose());
        }
    }
    let kernel_dim = kernel.len();
    let simple = nf.eigen_gaps_plus[i] > DEGENERACY_GAP
        && nf.eigen_gaps_minus[i] > DEGENERACY_GAP
        && kernel_dim == 2;
    if !simple {
        return KernelSlice {
            elements: kernel.into_iter().map(Bivector).collect(),
            kernel_dim,
            simple: false,
        };
    }

    // Unit elements of the 2-plane are w(θ) = cosθ v₁ + sinθ v₂; the
    // Plücker form restricted to the plane is a quadratic form in
    // (cosθ, sinθ), so decomposables are its root directions. Coarse
    // sampling locates sign changes, Newton polishes them.
    let v1 = &kernel[0];
    let v2 = &kernel[1];
    let pl = |w: &Vector6<f64>| w[0] * w[5] - w[1] * w[4] + w[2] * w[3];
    let polar = 0.5 * (pl(&(v1 + v2)) - pl(v1) - pl(v2));
    let (aq, bq, cq) = (pl(v1), polar, pl(v2));
    let q = |th: f64| {
        let (s, c) = th.sin_cos();
        aq * c * c + 2.0 * bq * c * s + cq * s * s
    };
    let dq = |th: f64| (cq - aq) * (2.0 * th).sin() + 2.0 * bq * (2.0 * th).cos();

    // Sample the half-circle of directions; q is π-periodic, so bracket
    // sign changes with wraparound (a root can sit exactly on the θ = 0
    // seam, where float noise in sin(π) would otherwise hide it).
    let n = 10_000;
    let samples: Vec<f64> = (0..n)
        .map(|k| q(std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let mut roots: Vec<f64> = Vec::new();
    for k in 0..n {
        let q0 = samples[k];
        let q1 = samples[(k + 1) % n];
        if q0 == 0.0 || q0 * q1 < 0.0 {
            let mut th = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            for _ in 0..60 {
                let d = dq(th);
                if d.abs() < 1e-300 {
                    break;
                }
                let step = q(th) / d;
                th -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let th = th.rem_euclid(std::f64::consts::PI);
            if roots
                .iter()
                .all(|&r| (r - th).abs() > 1e-6 && (r - th).abs() < std::f64::consts::PI - 1e-6)
            {
                roots.push(th);
            }
        }
    }

    let mut elements = Vec::new();
    for th in roots {
        let (s, c) = th.sin_cos();
        let w = c * v1 + s * v2;
        let w = w / w.norm();
        elements.push(Bivector(w));
        elements.push(Bivector(-w));
    }
    KernelSlice {
        elements,
        kernel_dim,
        simple: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curv::{assemble_from_parts, random_symform};
    use crate::soliton::{random_soliton_point, s_hat};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const CONV: SignConvention = SignConvention::Commuting;

    fn rotate_point(p: &SolitonPoint, rot: &nalgebra::Matrix4<f64>) -> SolitonPoint {
        // rot columns are the new frame vectors in the old basis
        let b6 = lambda2(rot);
        SolitonPoint::new(
            CurvOp(b6.transpose() * p.curv.0 * b6),
            SymForm(rot.transpose() * p.hess.0 * rot),
            p.lambda,
        )
    }

    #[test]
    fn isotropic_operator_trivial_normal_form() {
        // round S⁴: Ŝ = R̂ = I, hess = 0
        let p = SolitonPoint::new(CurvOp::identity(), SymForm::zero(), 3.0);
        let nf = normal_form(&p, CONV).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(nf.a[i], 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(nf.b[i], 0.0, epsilon = 1e-12);
        }
        assert!(nf.degenerate);
        assert!(nf.offdiag_residual <= 1e-12);
        assert!(is_pure(&nf, 1e-10));
    }

    #[test]
    fn paper_sign_rejected_on_generic_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let p = random_soliton_point(&mut rng, 1.0);
        assert!(matches!(
            normal_form(&p, SignConvention::Paper),
            Err(NormformError::CommutationTooLarge(_))
        ));
    }

    #[test]
    fn bianchi_of_s_hat_is_b_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let p = random_soliton_point(&mut rng, 1.0);
            let nf = normal_form(&p, CONV).unwrap();
            let bsum: f64 = nf.b.iter().sum();
            assert!(bsum.abs() <= 1e-10, "b-sum {bsum}");
        }
    }

    #[test]
    fn reconstruction_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let p = random_soliton_point(&mut rng, 1.0);
            let nf = normal_form(&p, CONV).unwrap();
            let s = s_hat(&p, CONV).unwrap();
            assert!(
                (nf.reconstruct().0 - s.0).norm() <= 1e-9,
                "reconstruction residual {}",
                (nf.reconstruct().0 - s.0).norm()
            );
            assert!(nf.offdiag_residual <= 1e-9);
        }
    }

    #[test]
    fn frame_rotation_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut tested = 0;
        while tested < 100 {
            let p = random_soliton_point(&mut rng, 1.0);
            let nf = normal_form(&p, CONV).unwrap();
            if nf.min_gap() < 1e-3 {
                continue;
            }
            let rot = crate::bivec::tests::random_so4(&mut rng);
            let q = rotate_point(&p, &rot);
            let nf2 = normal_form(&q, CONV).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(nf.a[i], nf2.a[i], epsilon = 1e-9);
                assert_abs_diff_eq!(nf.b[i], nf2.b[i], epsilon = 1e-9);
            }
            tested += 1;
        }
    }

    #[test]
    fn scramble_and_recover_prescribed_diagonal() {
        // Build Ŝ-like data from a known normal form: W± diagonal, Hess f
        // diagonal, so the standard frame is already normal.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..50 {
            let wp = Matrix3::from_diagonal(&Vector3::new(0.9, 0.1, -1.0));
            let wm = Matrix3::from_diagonal(&Vector3::new(0.5, -0.2, -0.3));
            let lam = 1.2;
            let hess = SymForm::diagonal([0.3, 0.1, -0.2, 0.05]);
            let ric = SymForm(lam * Matrix4::identity() - hess.0);
            let p = SolitonPoint::new(assemble_from_parts(&wp, &wm, &ric), hess, lam);
            let nf0 = normal_form(&p, CONV).unwrap();
            let rot = crate::bivec::tests::random_so4(&mut rng);
            let q = rotate_point(&p, &rot);
            let nf1 = normal_form(&q, CONV).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(nf0.a[i], nf1.a[i], epsilon = 1e-9);
                assert_abs_diff_eq!(nf0.b[i], nf1.b[i], epsilon = 1e-9);
            }
            let s_scrambled = s_hat(&q, CONV).unwrap();
            assert!((nf1.reconstruct().0 - s_scrambled.0).norm() <= 1e-9);
        }
    }

    #[test]
    fn purity_examples() {
        let nf = NormalForm {
            frame: Frame4::standard(),
            a: [1.0, 2.0, 3.0],
            b: [0.0, 0.0, 0.0],
            offdiag_residual: 0.0,
            eigen_gaps_plus: [1.0; 3],
            eigen_gaps_minus: [1.0; 3],
            degenerate: false,
        };
        assert!(is_pure(&nf, 1e-10));
        let mut nf2 = nf.clone();
        nf2.b = [0.1, -0.1, 0.0];
        assert!(!is_pure(&nf2, 1e-6));
    }

    /// The Weyl blocks are taken diagonal so the standard frame is already
    /// a splitting eigenframe and the closed-form/projection comparison is
    /// valid there.
    fn point_with_hess(hess: SymForm, rng: &mut impl Rng) -> SolitonPoint {
        let lam = 1.0;
        let ric = SymForm(lam * Matrix4::identity() - hess.0);
        let wp = random_diag_tracefree3(rng);
        let wm = random_diag_tracefree3(rng);
        SolitonPoint::new(assemble_from_parts(&wp, &wm, &ric), hess, lam)
    }

    fn random_diag_tracefree3(rng: &mut impl Rng) -> Matrix3<f64> {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        Matrix3::from_diagonal(&Vector3::new(x, y, -x - y))
    }

    /// Obstructions evaluated in the *standard* frame, bypassing the
    /// normal-form eigenframe, so the Hessian entries are the prescribed
    /// ones.
    fn standard_frame_obstructions(p: &SolitonPoint) -> Obstructions {
        let nf = NormalForm {
            frame: Frame4::standard(),
            a: [0.0; 3],
            b: [0.0; 3],
            offdiag_residual: 0.0,
            eigen_gaps_plus: [1.0; 3],
            eigen_gaps_minus: [1.0; 3],
            degenerate: false,
        };
        criticality_obstructions(p, &nf)
    }

    #[test]
    fn diagonal_hessian_all_planes_critical() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let p = point_with_hess(SymForm::diagonal([0.4, 0.1, -0.3, 0.2]), &mut rng);
        let obs = standard_frame_obstructions(&p);
        for i in 0..3 {
            assert_abs_diff_eq!(obs.o_sq[i], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(obs.o_sq_projection[i], 0.0, epsilon = 1e-12);
        }
        for v in obs.equivalence_verdicts(1e-12) {
            assert_eq!(v, (true, true, true));
        }
    }

    #[test]
    fn single_f12_entry_obstruction_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let mut m = Matrix4::zeros();
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        let p = point_with_hess(SymForm(m), &mut rng);
        let obs = standard_frame_obstructions(&p);
        assert_abs_diff_eq!(obs.o_sq[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(obs.o_sq[1], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(obs.o_sq[2], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(obs.total(), 0.5, epsilon = 1e-14);
        for i in 0..3 {
            assert_abs_diff_eq!(obs.o_sq[i], obs.o_sq_projection[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn obstruction_sum_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..2000 {
            let p = point_with_hess(random_symform(&mut rng, 1.0), &mut rng);
            let obs = standard_frame_obstructions(&p);
            let half_sum: f64 = 0.5 * obs.offdiag_hess.iter().map(|x| x * x).sum::<f64>();
            assert_abs_diff_eq!(obs.total(), half_sum, epsilon = 1e-12);
            let half_ric: f64 = 0.5 * obs.offdiag_ric.iter().map(|x| x * x).sum::<f64>();
            assert_abs_diff_eq!(obs.total(), half_ric, epsilon = 1e-12);
            for i in 0..3 {
                assert_abs_diff_eq!(obs.o_sq[i], obs.o_sq_projection[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn equivalence_counterexamples() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        // f₁₃ = 1 obstructs P₁ and P₃ but not P₂ (1,3 is P₂'s own pair)
        let mut m = Matrix4::zeros();
        m[(0, 2)] = 1.0;
        m[(2, 0)] = 1.0;
        let p = point_with_hess(SymForm(m), &mut rng);
        let obs = standard_frame_obstructions(&p);
        let v = obs.equivalence_verdicts(1e-12);
        assert_eq!(v[0], (false, false, false));
        assert_eq!(v[1], (true, true, true));
        assert_eq!(v[2], (false, false, false));
        assert_abs_diff_eq!(obs.o_sq[0], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(obs.o_sq[1], 0.0, epsilon = 1e-14);
        // Ric off-diagonals are minus the Hessian's on soliton points
        assert_abs_diff_eq!(obs.offdiag_ric[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn star_partner_norms_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        // targeted case: f₁₃ = 1 obstructs both P₁ and *P₁ with norm ¼
        let mut m = Matrix4::zeros();
        m[(0, 2)] = 1.0;
        m[(2, 0)] = 1.0;
        let p = point_with_hess(SymForm(m), &mut rng);
        let nf = NormalForm {
            frame: Frame4::standard(),
            a: [0.0; 3],
            b: [0.0; 3],
            offdiag_residual: 0.0,
            eigen_gaps_plus: [1.0; 3],
            eigen_gaps_minus: [1.0; 3],
            degenerate: false,
        };
        let rep = star_partner_criticality(&p, &nf, 0);
        assert_abs_diff_eq!(rep.plane_obstruction_sq, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.star_obstruction_sq, 0.25, epsilon = 1e-12);

        // property over random points, in the true normal-form frame
        for _ in 0..1000 {
            let p = random_soliton_point(&mut rng, 1.0);
            let nf = normal_form(&p, CONV).unwrap();
            for i in 0..3 {
                let rep = star_partner_criticality(&p, &nf, i);
                assert_abs_diff_eq!(
                    rep.plane_obstruction_sq,
                    rep.star_obstruction_sq,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn kernel_slice_generic_four_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let mut tested = 0;
        while tested < 30 {
            let p = random_soliton_point(&mut rng, 1.0);
            let nf = normal_form(&p, CONV).unwrap();
            if nf.min_gap() < 1e-3 {
                continue;
            }
            for i in 0..3 {
                let ks = kernel_slice(&p, &nf, i, CONV);
                assert!(ks.simple, "kernel dim {}", ks.kernel_dim);
                assert_eq!(ks.elements.len(), 4);
                // expected: ±Pᵢ and ±*Pᵢ in the nf frame coordinates
                let pvec = coordinate_plane(i);
                let svec = star_matrix() * pvec;
                for el in &ks.elements {
                    let d_p = (el.0 - pvec).norm().min((el.0 + pvec).norm());
                    let d_s = (el.0 - svec).norm().min((el.0 + svec).norm());
                    assert!(
                        d_p <= 1e-8 || d_s <= 1e-8,
                        "stray kernel element at distance {:.3e}/{:.3e}",
                        d_p,
                        d_s
                    );
                    assert!(el.is_decomposable(1e-10));
                }
                // all four signs present
                for target in [pvec, -pvec, svec, -svec] {
                    assert!(
                        ks.elements.iter().any(|el| (el.0 - target).norm() <= 1e-8),
                        "missing kernel element"
                    );
                }
            }
            tested += 1;
        }
    }

    #[test]
    fn kernel_slice_isotropic_flagged() {
        let p = SolitonPoint::new(CurvOp::identity(), SymForm::zero(), 3.0);
        let nf = normal_form(&p, CONV).unwrap();
        let ks = kernel_slice(&p, &nf, 0, CONV);
        assert!(!ks.simple);
        assert_eq!(ks.kernel_dim, 6);
    }

    #[test]
    fn mixed_combination_not_decomposable() {
        // xP + y(*P) with xy ≠ 0 fails the Plücker test
        let p1 = Bivector::from_components([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let sp1 = hodge_star_of(&p1);
        let mix = Bivector(0.6 * p1.0 + 0.8 * sp1.0);
        assert!(!mix.is_decomposable(1e-10));
        assert!(p1.is_decomposable(1e-12));
        assert!(sp1.is_decomposable(1e-12));
    }

    fn hodge_star_of(w: &Bivector) -> Bivector {
        Bivector(star_matrix() * w.0)
    }
}
