//! Pointwise curvature algebra of gradient Ricci 4-solitons.
//!
//! The library implements the operator Ŝ = R̂ + ½Ĥ attached to a gradient
//! Ricci 4-soliton Ric + Hess f = λg, its Hodge-basis normal form,
//! criticality obstructions for sectional curvature, the pointwise
//! Gauss-Bonnet and signature densities, and a numerical construction of
//! the Koiso-Cao soliton on ℂP²#(−ℂP²) as a cohomogeneity-one profile.

pub mod bivec;
pub mod curv;
pub mod kcao;
pub mod normform;
pub mod soliton;
pub mod topo;

pub use bivec::{Bivector, Frame4, HodgeBasis};
pub use curv::{CurvOp, HodgeBlocks, SymForm};
pub use kcao::CohomProfile;
pub use normform::NormalForm;
pub use soliton::{SignConvention, SolitonPoint};
