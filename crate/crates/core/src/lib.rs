//! Period map and theta constants for cyclic 4-fold covers of the line branched at 8 real points.
//!
//! The crate goes from a branch configuration `x₁ < … < x₈` to the period matrix of
//! the curve `w⁴ = ∏(z − x_j)` on the `(−1)`-eigenspace of `ρ²`, normalizes it on a
//! family of good symplectic bases indexed by the 105 pairings of `{1..8}`, and
//! evaluates the squared theta-constant forms `𝒯ᵣ²`, which are compared with the
//! pairing polynomials `Pᵣ = ∏(x_a − x_b)`.
//!
//! Module layout, from the bottom up:
//! - [`f2geom`]: the quadratic space `V` over F₂, partitions and `𝔖₈ → O₆⁺(2)`.
//! - [`exact`], [`lattice`]: exact rational linear algebra on `H`, bases, reflections, cosets.
//! - [`periods`]: Gauss–Jacobi period integrals and normalized period matrices.
//! - [`theta`]: genus-6 theta functions with rational characteristics and their identities.
//! - [`forms`]: the forms `𝒯ᵣ²`, the Σ-trace coefficients and the transfer matrices.
//! - [`verify`]: the acceptance checks as structured reports.

pub mod characteristic;
pub mod config;
pub mod exact;
pub mod f2geom;
pub mod forms;
pub mod lattice;
pub mod periods;
pub mod theta;
pub mod verify;

pub use characteristic::Characteristic;
pub use config::{BranchConfig, Precision, Tolerances};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Usage(String),
    #[error("lattice check failed: {0}")]
    Lattice(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("period matrix check failed: {0}")]
    Periods(String),
    #[error("theta evaluation failed: {0}")]
    Theta(String),
    #[error("form evaluation failed: {0}")]
    Forms(String),
}

pub type Result<T> = std::result::Result<T, Error>;
