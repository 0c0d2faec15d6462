//! Exact calculus for polynomials in the non-commuting pair `q̂`, `p̂`.
//!
//! Operators are stored in standard order (all `q̂` left of all `p̂`) with
//! `[q̂, p̂] = iħ`. Coefficients keep ħ symbolic as a power series so that
//! printed forms show `hbar` and equality is exact per power of ħ.
//!
//! The α-ordering rule maps `q̂^m p̂^n` to
//! `Σ_{r=0}^{min(m,n)} C(m,r) n!/(n−r)! (−iħα)^r q^{m−r} p^{n−r}`, which is
//! what the kernel transform `∫⟨q+αz|Ô|q+(α+1)z⟩ e^{ipz/ħ} dz` produces
//! under these conventions.

mod expr;
mod matrix;
mod parse;
mod series;
mod symbol;

pub use expr::{OperatorExpr, OperatorMonomial};
pub use matrix::matrix_representation;
pub use parse::{parse_operator, parse_symbol};
pub use series::HbarSeries;
pub use symbol::{alpha_quantize, alpha_symbol, PhaseSpaceSymbol};
