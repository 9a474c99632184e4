//! specwave — a numerical laboratory for non-selfadjoint matrix Schrödinger
//! operators arising from linearization of the nonlinear Schrödinger equation
//! around a standing wave e^{itα²}φ.
//!
//! The central object is the 2×2 matrix operator
//!
//! ```text
//!       ⎡ −Δ + μ − V₁      −V₂     ⎤
//!   ℋ = ⎢                          ⎥ ,   μ = α² > 0,
//!       ⎣    V₂          Δ − μ + V₁⎦
//! ```
//!
//! acting on pairs of radial functions on ℝ³. ℋ is not selfadjoint, but it is
//! σ₃-pseudo-selfadjoint (ℋ* = σ₃ℋσ₃) and σ₁-antisymmetric (σ₁ℋσ₁ = −ℋ), which
//! forces the spectral symmetries spec(ℋ) = −spec(ℋ) = conj(spec(ℋ)). Under the
//! standard positivity assumptions on (V₁, V₂) the spectrum is contained in
//! ℝ ∪ iℝ with essential spectrum (−∞,−μ] ∪ [μ,∞).
//!
//! The crate discretizes the radial sector on a finite ball, assembles ℋ and
//! its Birman–Schwinger companions, classifies the thresholds ±μ (regular /
//! resonance / eigenvalue), builds the spectral projections P_d, P_{±μ}, P_c,
//! P_s with verified algebra, propagates e^{itℋ}, and measures the L²-bound
//! and L¹→L∞ dispersive-decay laws, including the rank-≤2 resonance correction
//! F_t that restores t^{−3/2} decay at a threshold resonance.
//!
//! Module map:
//! - [`grid`]: radial nodes, quadrature, l=0 Laplacian.
//! - [`ground_state`]: NLS ground-state profile by shooting; linearization potentials.
//! - [`operator`]: assembly of ℋ, the factored potential, assumption checks.
//! - [`resolvent`]: free-resolvent kernels and limiting-absorption scans.
//! - [`threshold`]: Birman–Schwinger family, Jensen–Nenciu inversion, threshold
//!   classification, coupling tuners.
//! - [`projections`]: discrete spectrum, Riesz/threshold projections, P_c, P_s.
//! - [`evolution`]: propagators, operator norms, decay experiments, F_t.
//! - [`osc`]: oscillatory-integral utilities (Fresnel quadrature, cutoff
//!   functions, special-function norm checks).
//! - [`config`] / [`pipeline`]: reproducible runs, manifests, persistence.

pub mod error;
pub mod fit;
pub mod grid;
pub mod ground_state;
pub mod linalg;
pub mod operator;
pub mod resolvent;

pub use error::{Result, SpecError};
pub use fit::LineFit;
pub use grid::{RadialGrid, Spacing};
pub use ground_state::SolitonProfile;
pub use operator::{
    AssumptionReport, AssumptionTolerances, FactoredPotential, MatrixHamiltonian, PotentialPair,
};
