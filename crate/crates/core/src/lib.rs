//! Numerical machinery for anisotropic function spaces with variable exponents.
//!
//! The crate is organized around an expansive matrix `A` (all eigenvalues of
//! modulus greater than one). From it we build:
//!
//! * [`dilation`] — spectral analysis of `A`, the unit-volume ellipsoid
//!   `Δ`, the dilated balls `B_k = A^k Δ`, the step homogeneous quasi-norm
//!   `ρ_A` (equal to `b^k` on `B_{k+1} \ B_k`, with `b = |det A|`), the
//!   constant `σ` controlling the quasi-triangle inequality, and empirical
//!   comparison constants between `ρ_A` and the Euclidean norm.
//! * [`varexp`] — variable exponents `p(·)`, the modular
//!   `∫ |f|^{p(x)} dx`, and the Luxemburg quasi-norm computed by bracketing
//!   and bisection.
//! * [`atoms`] — construction and validation of atoms: profiles supported in
//!   a dilated ball, with an `L^q` size bound tied to the Luxemburg norm of
//!   the ball indicator and vanishing moments up to a prescribed degree.
//! * [`fourier`] — quadrature Fourier transforms of gridded functions,
//!   dilation operators, and empirical constants for the atomic Fourier
//!   decay bounds.
//! * [`hardy`] — finite atomic decompositions, their quasi-norm quantity,
//!   synthesis of `F = Σ λ_j â_j`, verification of the growth bound, the
//!   origin convergence, and the weighted integrability inequality, plus a
//!   truncated single-profile maximal function.
//!
//! Everything is `f64` and grid-based. Sampling takes explicit seeds and all
//! reductions use a fixed pairwise order, so results are reproducible and do
//! not depend on thread count.

pub mod atoms;
pub mod dilation;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod hardy;
pub mod sampling;
pub mod util;
pub mod varexp;

pub use error::{Error, Result};

// TEMP pub use atoms::{lq_norm, make_atom, minimal_s, validate_atom, Atom, AtomConfig, AtomReport};
pub use dilation::{
    comparison_constant, verify_containments, DilatedBall, Dilation, EllipsoidNorm,
    QuasiNormEvaluator, QuasiNormValue, SigmaConstant,
};
// TEMP pub use fourier::{
//     dilate, fourier_transform, lemma32_constant, lemma33_constant, log_radial_grid, spectrum,
//     transpose_evaluator, verify_commutation, SpectrumSample,
// };
pub use grid::{BoundingBox, GriddedFunction};
// TEMP pub use hardy::{
//     decomposition_quantity, l1_check, maximal_phi, synthesize_f, verify_thm31, verify_thm41,
//     verify_thm42, Decomposition, MaximalConfig,
// };
// TEMP pub use varexp::{
//     char_ball_norm, check_log_holder, luxemburg_norm, modular, verify_remark21, ExponentFunction,
// };
