//! Algebraic curvature operators on Λ²: the Kulkarni-Nomizu-type product
//! of a symmetric 2-tensor with the metric, Ricci and scalar extraction,
//! the standard Ricci decomposition, and the Hodge-basis block structure
//!
//! ```text
//! R̂ = [ Ŵ⁺ + (scal/12)I   K                ]
//!     [ Kᵗ                Ŵ⁻ + (scal/12)I  ]
//! ```
//!
//! in the basis {ξᵢ±}. Sign convention: ⟨R̂(x∧y), x∧y⟩ is the sectional
//! curvature of the plane x∧y for orthonormal x, y, so the round S⁴ of
//! curvature 1 has R̂ = identity and scal = 12.

use crate::bivec::{hodge_matrix, BASIS_PAIRS};
use nalgebra::{Matrix3, Matrix4, Matrix6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurvError {
    #[error("first Bianchi identity violated (residual {0:.3e})")]
    BianchiViolation(f64),
}

/// Sign convention for the product h ⊘ g behind [`kn_hat`]. PAPER is the
/// coordinate formula as usually printed; COMMUTING is its global
/// negative, named for the convention under which Ŝ = R̂ + ½Ĥ commutes
/// with the Hodge star on soliton data (see the convention audit in the
/// soliton module).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConvention {
    Paper,
    Commuting,
}

impl SignConvention {
    pub fn factor(self) -> f64 {
        match self {
            SignConvention::Paper => 1.0,
            SignConvention::Commuting => -1.0,
        }
    }
}

impl std::str::FromStr for SignConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(SignConvention::Paper),
            "commuting" => Ok(SignConvention::Commuting),
            other => Err(format!("unknown sign convention: {other}")),
        }
    }
}

/// Symmetric bilinear form on ℝ⁴ (the home of g, Ric and Hess f).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymForm(pub Matrix4<f64>);

impl SymForm {
    pub const SYM_TOL: f64 = 1e-14;

    pub fn new(m: Matrix4<f64>) -> Self {
        debug_assert!((m - m.transpose()).norm() <= Self::SYM_TOL * (1.0 + m.norm()));
        SymForm(0.5 * (m + m.transpose()))
    }

    pub fn zero() -> Self {
        SymForm(Matrix4::zeros())
    }

    pub fn metric() -> Self {
        SymForm(Matrix4::identity())
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        SymForm(Matrix4::from_diagonal(&d.into()))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Trace-free part h − (tr h / 4) g.
    pub fn traceless(&self) -> SymForm {
        SymForm(self.0 - Matrix4::identity() * (self.trace() / 4.0))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Self-adjoint operator on Λ² in the fixed eᵢ∧eⱼ ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvOp(pub Matrix6<f64>);

impl CurvOp {
    pub fn zero() -> Self {
        CurvOp(Matrix6::zeros())
    }

    pub fn identity() -> Self {
        CurvOp(Matrix6::identity())
    }

    /// Residual of the first Bianchi identity
    /// ⟨R̂(e₁∧e₂), e₃∧e₄⟩ − ⟨R̂(e₁∧e₃), e₂∧e₄⟩ + ⟨R̂(e₁∧e₄), e₂∧e₃⟩.
    pub fn bianchi_residual(&self) -> f64 {
        let m = &self.0;
        (m[(0, 5)] - m[(1, 4)] + m[(2, 3)]).abs()
    }

    pub fn self_adjoint_residual(&self) -> f64 {
        (self.0 - self.0.transpose()).norm()
    }
}

/// Hodge-basis blocks of a curvature operator: trace-free Weyl halves,
/// the mixed block K, and the scalar curvature.
#[derive(Debug, Clone, Copy)]
pub struct HodgeBlocks {
    pub wplus: Matrix3<f64>,
    pub wminus: Matrix3<f64>,
    pub offdiag: Matrix3<f64>,
    pub scal: f64,
}

impl HodgeBlocks {
    /// Rebuilds the operator in the eᵢ∧eⱼ basis.
    pub fn reassemble(&self) -> CurvOp {
        let xi = hodge_matrix();
        let mut b = Matrix6::zeros();
        let tp = self.wplus + Matrix3::identity() * (self.scal / 12.0);
        let tm = self.wminus + Matrix3::identity() * (self.scal / 12.0);
        b.fixed_view_mut::<3, 3>(0, 0).copy_from(&tp);
        b.fixed_view_mut::<3, 3>(3, 3).copy_from(&tm);
        b.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.offdiag);
        b.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&self.offdiag.transpose());
        CurvOp(xi * b * xi.transpose())
    }
}

/// The curvature-type operator Ĥ built from a symmetric 2-tensor h via
/// H_ijkl = h_il δ_jk + h_jk δ_il − h_ik δ_jl − h_jl δ_ik (PAPER sign);
/// COMMUTING is the global negative.
pub fn kn_hat(h: &SymForm, convention: SignConvention) -> CurvOp {
    let f = &h.0;
    let d: Matrix4<f64> = Matrix4::identity();
    let s = convention.factor();
    let mut m = Matrix6::zeros();
    for (row, &(i, j)) in BASIS_PAIRS.iter().enumerate() {
        for (col, &(k, l)) in BASIS_PAIRS.iter().enumerate() {
            m[(row, col)] = s
                * (f[(i, l)] * d[(j, k)] + f[(j, k)] * d[(i, l)]
                    - f[(i, k)] * d[(j, l)]
                    - f[(j, l)] * d[(i, k)]);
        }
    }
    CurvOp(m)
}

/// The 3×3 matrix C pairing the off-diagonal entries of a symmetric
/// 2-tensor; depends only on its trace-free part. Under the PAPER sign it
/// is exactly the mixed ξ⁺/ξ⁻ block of kn_hat.
pub fn c_matrix(hess: &SymForm) -> Matrix3<f64> {
    let f = &hess.0;
    #[rustfmt::skip]
    let c = Matrix3::new(
        0.5 * (-f[(0, 0)] - f[(1, 1)] + f[(2, 2)] + f[(3, 3)]),
        f[(0, 3)] - f[(1, 2)],
        -f[(0, 2)] - f[(1, 3)],
        -f[(0, 3)] - f[(1, 2)],
        0.5 * (-f[(0, 0)] + f[(1, 1)] - f[(2, 2)] + f[(3, 3)]),
        f[(0, 1)] - f[(2, 3)],
        f[(0, 2)] - f[(1, 3)],
        -f[(0, 1)] - f[(2, 3)],
        0.5 * (-f[(0, 0)] + f[(1, 1)] + f[(2, 2)] - f[(3, 3)]),
    );
    c
}

/// Splits a Bianchi-valid operator into its Hodge-basis blocks.
pub fn hodge_block_decompose(r: &CurvOp) -> Result<HodgeBlocks, CurvError> {
    let bres = r.bianchi_residual();
    if bres > 1e-8 {
        return Err(CurvError::BianchiViolation(bres));
    }
    let xi = hodge_matrix();
    let b = xi.transpose() * r.0 * xi;
    let scal = 2.0 * r.0.trace();
    let id = Matrix3::identity() * (scal / 12.0);
    Ok(HodgeBlocks {
        wplus: b.fixed_view::<3, 3>(0, 0).into_owned() - id,
        wminus: b.fixed_view::<3, 3>(3, 3).into_owned() - id,
        offdiag: b.fixed_view::<3, 3>(0, 3).into_owned(),
        scal,
    })
}

/// Ric(eᵢ, eⱼ) = Σₖ ⟨R̂(eₖ∧eᵢ), eₖ∧eⱼ⟩.
pub fn ricci_of(r: &CurvOp) -> SymForm {
    // index of the pair (min, max) in the fixed ordering, with sign for
    // the transposition.
    let pair_index = |a: usize, b: usize| -> (usize, f64) {
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let idx = BASIS_PAIRS.iter().position(|&p| p == (lo, hi)).unwrap();
        (idx, sign)
    };
    let mut ric = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                if k == i || k == j {
                    continue;
                }
                let (a, sa) = pair_index(k, i);
                let (b, sb) = pair_index(k, j);
                acc += sa * sb * r.0[(a, b)];
            }
            ric[(i, j)] = acc;
        }
    }
    SymForm(0.5 * (ric + ric.transpose()))
}

pub fn scal_of(r: &CurvOp) -> f64 {
    ricci_of(r).trace()
}

/// The unique Bianchi-valid operator with the given trace-free Weyl
/// halves and Ricci tensor. The Ricci-part and scalar-part coefficients
/// are fixed by the round-S⁴ and round-trip tests below.
pub fn assemble_from_parts(wplus: &Matrix3<f64>, wminus: &Matrix3<f64>, ric: &SymForm) -> CurvOp {
    let xi = hodge_matrix();
    let mut wb = Matrix6::zeros();
    wb.fixed_view_mut::<3, 3>(0, 0).copy_from(wplus);
    wb.fixed_view_mut::<3, 3>(3, 3).copy_from(wminus);
    let weyl = xi * wb * xi.transpose();
    let scal = ric.trace();
    let ric0 = ric.traceless();
    let m = weyl - 0.5 * kn_hat(&ric0, SignConvention::Paper).0
        - (scal / 24.0) * kn_hat(&SymForm::metric(), SignConvention::Paper).0;
    CurvOp(m)
}

/// Random trace-free symmetric 3×3 with entries of order `scale`.
pub fn random_tracefree3(rng: &mut impl rand::Rng, scale: f64) -> Matrix3<f64> {
    let mut m = Matrix3::from_fn(|_, _| rng.gen_range(-scale..scale));
    m = 0.5 * (m + m.transpose());
    m - Matrix3::identity() * (m.trace() / 3.0)
}

/// Random symmetric 4×4 with entries in [−scale, scale].
pub fn random_symform(rng: &mut impl rand::Rng, scale: f64) -> SymForm {
    let m = Matrix4::from_fn(|_, _| rng.gen_range(-scale..scale));
    SymForm(0.5 * (m + m.transpose()))
}
