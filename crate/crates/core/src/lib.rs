//! Numerical laboratory for Li–Yau and Hamilton Harnack inequalities and
//! W-entropy monotonicity of the Witten Laplacian `L = Δ − ∇φ·∇` on periodic
//! weighted manifolds, on fixed metrics and on conformal super Ricci flows.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod error;
mod spectral;

pub mod entropy;
pub mod geometry;
pub mod harnack;
pub mod heatflow;
pub mod operator;
pub mod ricciflow;

pub use error::{Error, Result};
pub use geometry::{build_manifold, ManifoldConfig, Model, PotentialConfig, PotentialFamily, WeightedManifold};
pub use heatflow::HeatState;
