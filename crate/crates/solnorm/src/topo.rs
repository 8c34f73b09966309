//! Pointwise Euler-characteristic and signature densities from
//! normal-form data, the combined identity linking them, and Simpson
//! quadrature over cohomogeneity-one profiles.
//!
//! Block formulas use the normal-form data (aᵢ, bᵢ) of Ŝ under the
//! star-commuting sign convention, for which the centering term is
//! aᵢ − Δf/4 (the convention audit records that the +Δf/4 variant belongs
//! to the opposite Ĥ sign). Every density also has a convention-free
//! tensor form used as a cross-check.

use crate::curv::{hodge_block_decompose, ricci_of};
use crate::kcao::{frame_curvature_at, CohomProfile, KcaoError};
use crate::normform::NormalForm;
use crate::soliton::{ab_pairs, SignConvention, SolitonPoint};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("quadrature grid too coarse: half-grid disagreement {disagreement:.3e} exceeds {tol:.3e}")]
    GridTooCoarse { estimate: f64, disagreement: f64, tol: f64 },
    #[error("grid size must be a multiple of 4 intervals for Richardson control")]
    BadGridSize,
    #[error(transparent)]
    Profile(#[from] KcaoError),
}

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Euler-density block formula
/// (1/4π²)[Σ(aᵢ − Δf/4)² + Σbᵢ² − ¼|H̊essf|²] from explicit (a, b) data.
pub fn chi_density_ab(p: &SolitonPoint, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let lap4 = p.hess.trace() / 4.0;
    let sum: f64 = (0..3).map(|i| (a[i] - lap4).powi(2) + b[i] * b[i]).sum();
    (sum - 0.25 * p.hess.traceless().norm().powi(2)) / (4.0 * PI2)
}

/// Signature-density block formula
/// (1/3π²)Σbᵢ(aᵢ − Δf/4 − scal/12) from explicit (a, b) data.
pub fn tau_density_ab(p: &SolitonPoint, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let lap4 = p.hess.trace() / 4.0;
    let scal = p.scal();
    let sum: f64 = (0..3).map(|i| b[i] * (a[i] - lap4 - scal / 12.0)).sum();
    sum / (3.0 * PI2)
}

pub fn chi_density(p: &SolitonPoint, nf: &NormalForm) -> f64 {
    chi_density_ab(p, &nf.a, &nf.b)
}

pub fn tau_density(p: &SolitonPoint, nf: &NormalForm) -> f64 {
    tau_density_ab(p, &nf.a, &nf.b)
}

/// Convention-free tensor form of the Euler density,
/// (1/8π²)(|Ŵ|² + scal²/24 − ½|R̊ic|²).
pub fn chi_density_tensor(p: &SolitonPoint) -> f64 {
    let blocks = hodge_block_decompose(&p.curv).expect("valid curvature operator");
    (blocks.wplus.norm_squared() + blocks.wminus.norm_squared()
        + blocks.scal * blocks.scal / 24.0
        - 0.5 * ricci_of(&p.curv).traceless().norm().powi(2))
        / (8.0 * PI2)
}

/// Convention-free tensor form of the signature density,
/// (1/12π²)(|Ŵ⁺|² − |Ŵ⁻|²).
pub fn tau_density_tensor(p: &SolitonPoint) -> f64 {
    let blocks = hodge_block_decompose(&p.curv).expect("valid curvature operator");
    (blocks.wplus.norm_squared() - blocks.wminus.norm_squared()) / (12.0 * PI2)
}

/// Pointwise density diagnostics: block-formula values plus the residuals
/// of the two identities guarding them.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub chi_density: f64,
    pub tau_density: f64,
    /// |(χ − 1.5τ)_block − (1/4π²)(|Ŵ⁻|² + scal²/48 − ¼|R̊ic|²)|.
    pub combined_residual: f64,
    /// |χ_block − χ_tensor| (Gauss–Bonnet integrand, Besse form).
    pub besse_cross_check: f64,
}

pub fn density_report(p: &SolitonPoint, nf: &NormalForm) -> DensityReport {
    let chi = chi_density(p, nf);
    let tau = tau_density(p, nf);
    let blocks = hodge_block_decompose(&p.curv).expect("valid curvature operator");
    let exact = (blocks.wminus.norm_squared() + blocks.scal * blocks.scal / 48.0
        - 0.25 * ricci_of(&p.curv).traceless().norm().powi(2))
        / (4.0 * PI2);
    DensityReport {
        chi_density: chi,
        tau_density: tau,
        combined_residual: (chi - 1.5 * tau - exact).abs(),
        besse_cross_check: (chi - chi_density_tensor(p)).abs(),
    }
}

/// Orbit volume factor of the cohomogeneity-one ansatz: the principal
/// orbit at time t is a Berger 3-sphere of volume 2π²·f·h² (constant
/// fixed by the round-S⁴ calibration test: ∫2π² sin³t dt = vol S⁴).
pub fn volume_factor(f: f64, h: f64) -> f64 {
    2.0 * PI2 * f * h * h
}

fn simpson(values: &[f64], dt: f64) -> f64 {
    let n = values.len() - 1; // intervals, must be even
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * dt / 3.0
}

/// Integrates `density(node_index)·volfactor` over the profile with
/// composite Simpson quadrature, comparing against the half-resolution
/// grid for a coarseness check. The density closure is only called at
/// interior nodes reachable by the curvature oracle; the orbit volume
/// vanishes at the collapsing ends, making the endpoint integrand zero.
pub fn integrate_profile(
    profile: &CohomProfile,
    density: impl Fn(usize) -> f64,
    tol: f64,
) -> Result<f64, TopoError> {
    let n = profile.len();
    let intervals = n - 1;
    if intervals % 4 != 0 {
        return Err(TopoError::BadGridSize);
    }
    let dt = profile.step()?;
    let mut integrand = vec![0.0; n];
    // Nodes 3..n−4 are the ones whose five-point curvature stencil stays
    // clear of the collapsed endpoints, where the frame is singular.
    for i in 3..=n - 4 {
        integrand[i] = density(i) * volume_factor(profile.f[i], profile.h[i]);
    }
    // constant extrapolation of the density into the oracle's blind spots
    // next to the ends (the volume factor there is its own)
    for i in [1, 2] {
        integrand[i] = density(3) * volume_factor(profile.f[i], profile.h[i]);
    }
    for i in [n - 3, n - 2] {
        integrand[i] = density(n - 4) * volume_factor(profile.f[i], profile.h[i]);
    }

    let full = simpson(&integrand, dt);
    let halved: Vec<f64> = integrand.iter().step_by(2).copied().collect();
    let half = simpson(&halved, 2.0 * dt);
    let disagreement = (full - half).abs();
    if disagreement > tol {
        return Err(TopoError::GridTooCoarse {
            estimate: full,
            disagreement,
            tol,
        });
    }
    Ok(full)
}

/// Total Euler characteristic of a profile by the block density under the
/// star-commuting convention.
pub fn chi_integral(profile: &CohomProfile, tol: f64) -> Result<f64, TopoError> {
    integrate_profile(
        profile,
        |i| {
            let p = frame_curvature_at(profile, i).expect("interior node");
            let (a, b) = ab_pairs(&p, SignConvention::Commuting);
            chi_density_ab(&p, &a, &b)
        },
        tol,
    )
}

/// Total signature of a profile by the block density.
pub fn tau_integral(profile: &CohomProfile, tol: f64) -> Result<f64, TopoError> {
    integrate_profile(
        profile,
        |i| {
            let p = frame_curvature_at(profile, i).expect("interior node");
            let (a, b) = ab_pairs(&p, SignConvention::Commuting);
            tau_density_ab(&p, &a, &b)
        },
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curv::{assemble_from_parts, random_tracefree3, CurvOp, SymForm};
    use crate::kcao::round_s4_profile;
    use crate::soliton::random_soliton_point;
    use approx::assert_abs_diff_eq;
    use nalgebra::{Matrix3, Matrix4};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_s4_pointwise_densities() {
        let p = SolitonPoint::new(CurvOp::identity(), SymForm::zero(), 3.0);
        let (a, b) = ab_pairs(&p, SignConvention::Commuting);
        assert_abs_diff_eq!(chi_density_ab(&p, &a, &b), 3.0 / (4.0 * PI2), epsilon = 1e-12);
        assert_abs_diff_eq!(tau_density_ab(&p, &a, &b), 0.0, epsilon = 1e-12);
        // total over vol(S⁴) = 8π²/3 gives χ = 2
        assert_abs_diff_eq!(
            chi_density_ab(&p, &a, &b) * 8.0 * PI2 / 3.0,
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dual_formula_cross_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for _ in 0..10_000 {
            let p = random_soliton_point(&mut rng, 1.0);
            let (a, b) = ab_pairs(&p, SignConvention::Commuting);
            let chi = chi_density_ab(&p, &a, &b);
            let tau = tau_density_ab(&p, &a, &b);
            assert_abs_diff_eq!(chi, chi_density_tensor(&p), epsilon = 1e-10);
            assert_abs_diff_eq!(tau, tau_density_tensor(&p), epsilon = 1e-10);
            // combined identity
            let blocks = hodge_block_decompose(&p.curv).unwrap();
            let exact = (blocks.wminus.norm_squared() + blocks.scal * blocks.scal / 48.0
                - 0.25 * ricci_of(&p.curv).traceless().norm().powi(2))
                / (4.0 * PI2);
            assert_abs_diff_eq!(chi - 1.5 * tau, exact, epsilon = 1e-10);
            // trace-free Hessian carries the trace-free Ricci norm
            assert_abs_diff_eq!(
                p.hess.traceless().norm(),
                ricci_of(&p.curv).traceless().norm(),
                epsilon = 1e-11
            );
            // signature density ties to the soliton module's operator form
            assert_abs_diff_eq!(
                crate::soliton::signature_density(&p),
                12.0 * PI2 * tau,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn density_report_residuals_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..200 {
            let p = random_soliton_point(&mut rng, 1.0);
            let nf = crate::normform::normal_form(&p, SignConvention::Commuting).unwrap();
            let rep = density_report(&p, &nf);
            assert!(rep.combined_residual <= 1e-10, "{}", rep.combined_residual);
            assert!(rep.besse_cross_check <= 1e-10, "{}", rep.besse_cross_check);
        }
    }

    #[test]
    fn orientation_reversal_flips_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..200 {
            let p = random_soliton_point(&mut rng, 1.0);
            let blocks = hodge_block_decompose(&p.curv).unwrap();
            let ric = ricci_of(&p.curv);
            let rev = SolitonPoint::new(
                assemble_from_parts(&blocks.wminus, &blocks.wplus, &ric),
                p.hess,
                p.lambda,
            );
            let (a, b) = ab_pairs(&p, SignConvention::Commuting);
            let (ar, br) = ab_pairs(&rev, SignConvention::Commuting);
            assert_abs_diff_eq!(
                tau_density_ab(&p, &a, &b),
                -tau_density_ab(&rev, &ar, &br),
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                chi_density_ab(&p, &a, &b),
                chi_density_ab(&rev, &ar, &br),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn self_dual_einstein_point_positive_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let wp = random_tracefree3(&mut rng, 1.0);
        let ric = SymForm(Matrix4::identity());
        let p = SolitonPoint::new(
            assemble_from_parts(&wp, &Matrix3::zeros(), &ric),
            SymForm::zero(),
            1.0,
        );
        let (a, b) = ab_pairs(&p, SignConvention::Commuting);
        assert!(tau_density_ab(&p, &a, &b) > 0.0);
    }

    #[test]
    fn s4_volume_and_quadrature_order() {
        // density ≡ 1 integrates the volume: vol(S⁴) = 8π²/3
        let exact = 8.0 * PI2 / 3.0;
        let coarse = integrate_profile(&round_s4_profile(100), |_| 1.0, 1.0).unwrap();
        let fine = integrate_profile(&round_s4_profile(200), |_| 1.0, 1.0).unwrap();
        let e_coarse = (coarse - exact).abs();
        let e_fine = (fine - exact).abs();
        assert!(e_coarse / e_fine >= 8.0, "order loss: {e_coarse:.3e} vs {e_fine:.3e}");
    }


    #[test]
    fn s4_chi_calibration() {
        let p = round_s4_profile(2000);
        let chi = chi_integral(&p, 1e-3).unwrap();
        assert!((chi - 2.0).abs() <= 0.01, "chi = {chi}");
        let tau = tau_integral(&p, 1e-3).unwrap();
        assert!(tau.abs() <= 1e-6, "tau = {tau}");
    }

    #[test]
    fn coarse_grid_detected() {
        let p = round_s4_profile(8);
        match integrate_profile(&p, |_| 1.0, 1e-10) {
            Err(TopoError::GridTooCoarse { .. }) => {}
            other => panic!("expected GridTooCoarse, got {other:?}"),
        }
        assert!(matches!(
            integrate_profile(&round_s4_profile(10), |_| 1.0, 1.0),
            Err(TopoError::BadGridSize)
        ));
    }
}
