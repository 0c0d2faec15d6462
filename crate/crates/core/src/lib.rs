//! Phase-space representations of one-dimensional quantum mechanics built
//! around a one-parameter family of distributions `P_α(q, p)` and the
//! operator-ordering rule that pairs with each member.
//!
//! * [`operator_algebra`]: exact polynomials in non-commuting `q̂`, `p̂`, the
//!   α-symbol map and its inverse.
//! * [`states_grids`]: uniform grids, reference states, density matrices and
//!   the position/momentum Fourier convention.
//! * [`distributions`]: `P_α` by two independent numerical routes, Wigner
//!   (α = −1/2) and standard (α = 0) slices, marginals.
//! * [`expectation`]: Hilbert-space traces against phase-space pairings.
//! * [`eps_dynamics`]: the extended-phase-space generator and its integrator.
//!
//! Units are natural (m = ω = 1) with a configurable `hbar`. The commutator
//! is `[q̂, p̂] = iħ`, `p̂ = −iħ ∂/∂q` in the position representation, and
//! every phase-space kernel uses `e^{+ipz/ħ}`.

pub mod distributions;
pub mod eps_dynamics;
mod error;
pub mod expectation;
mod fourier;
pub mod io;
pub mod operator_algebra;
pub mod states_grids;

pub use error::{Error, Result};
pub use num_complex::Complex64;
