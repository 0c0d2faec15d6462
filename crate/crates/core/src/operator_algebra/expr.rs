use std::fmt;

use num_complex::Complex64 as C64;

use super::series::{render, HbarSeries, Terms};
use crate::{Error, Result};

const ONE: C64 = C64::new(1.0, 0.0);

/// Standard-ordered monomial `coeff · q̂^qpow p̂^ppow` (every `q̂` left of
/// every `p̂`).
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMonomial {
    pub coeff: HbarSeries,
    pub qpow: u32,
    pub ppow: u32,
}

/// Polynomial in non-commuting `q̂`, `p̂` with `[q̂, p̂] = iħ`, stored in
/// standard order with at most one coefficient per `(qpow, ppow)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorExpr {
    pub(crate) terms: Terms,
    hbar: f64,
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar.is_finite() && hbar > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("hbar must be positive and finite, got {hbar}")))
    }
}

impl OperatorExpr {
    pub fn zero(hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        Ok(Self { terms: Terms::default(), hbar })
    }

    pub fn identity(hbar: f64) -> Result<Self> {
        Self::monomial(ONE, 0, 0, hbar)
    }

    pub fn position(hbar: f64) -> Result<Self> {
        Self::monomial(ONE, 1, 0, hbar)
    }

    pub fn momentum(hbar: f64) -> Result<Self> {
        Self::monomial(ONE, 0, 1, hbar)
    }

    /// `coeff · q̂^qpow p̂^ppow`.
    pub fn monomial(coeff: C64, qpow: u32, ppow: u32, hbar: f64) -> Result<Self> {
        let mut out = Self::zero(hbar)?;
        out.terms.add_term((qpow, ppow), 0, coeff);
        Ok(out)
    }

    pub(crate) fn from_terms(terms: Terms, hbar: f64) -> Self {
        Self { terms, hbar }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest `qpow + ppow` among the terms (0 for the zero operator).
    pub fn degree(&self) -> u32 {
        self.terms.degree()
    }

    pub fn monomials(&self) -> Vec<OperatorMonomial> {
        self.terms
            .iter()
            .map(|((qpow, ppow), s)| OperatorMonomial { coeff: s.clone(), qpow, ppow })
            .collect()
    }

    /// Symbolic coefficient of `q̂^qpow p̂^ppow`.
    pub fn coefficient(&self, qpow: u32, ppow: u32) -> HbarSeries {
        self.terms.get((qpow, ppow)).cloned().unwrap_or_default()
    }

    /// Coefficient of `q̂^qpow p̂^ppow` with ħ substituted.
    pub fn numeric_coefficient(&self, qpow: u32, ppow: u32) -> C64 {
        self.terms.get((qpow, ppow)).map_or(C64::default(), |s| s.evaluate(self.hbar))
    }

    fn same_hbar(&self, other: &Self) -> Result<()> {
        if self.hbar == other.hbar {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "mismatched hbar values {} and {}",
                self.hbar, other.hbar
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_hbar(other)?;
        let mut terms = self.terms.clone();
        terms.add_all(&other.terms, ONE);
        Ok(Self::from_terms(terms, self.hbar))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_terms(self.terms.scaled(factor, 0), self.hbar)
    }

    /// Multiplies by `factor · ħ^hbar_power` keeping ħ symbolic.
    pub fn scale_symbolic(&self, factor: C64, hbar_power: u32) -> Self {
        Self::from_terms(self.terms.scaled(factor, hbar_power), self.hbar)
    }

    /// Canonically ordered product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_hbar(other)?;
        let mut out = Terms::default();
        for ((a, b), s1) in self.terms.iter() {
            for ((c, d), s2) in other.terms.iter() {
                let coeff = s1.product(s2);
                // q^a (p^b q^c) p^d
                for ((qk, pk), s) in reorder_p_before_q(b, c).iter() {
                    out.add_series((a + qk, pk + d), &coeff.product(s), ONE, 0);
                }
            }
        }
        Ok(Self::from_terms(out, self.hbar))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.hbar == other.hbar && self.terms.max_abs_diff(&other.terms) <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.terms.max_abs_diff(&other.terms)
    }

    /// Anti-standard view: coefficients `c` of `p̂^ppow q̂^qpow` such that the
    /// sum reproduces this operator. Storage always stays standard-ordered.
    pub fn anti_standard_terms(&self) -> Vec<OperatorMonomial> {
        let mut out = Terms::default();
        for ((m, n), s) in self.terms.iter() {
            for (key, t) in reorder_q_before_p(m, n).iter() {
                out.add_series(key, &s.product(t), ONE, 0);
            }
        }
        out.iter()
            .map(|((qpow, ppow), s)| OperatorMonomial { coeff: s.clone(), qpow, ppow })
            .collect()
    }
}

/// `p̂^b q̂^c` in standard order, by repeated use of
/// `p̂ q̂^c = q̂^c p̂ − iħ c q̂^{c−1}`.
fn reorder_p_before_q(b: u32, c: u32) -> Terms {
    let mut out = Terms::default();
    if b == 0 || c == 0 {
        out.add_term((c, b), 0, ONE);
        return out;
    }
    for ((qk, pk), s) in reorder_p_before_q(b - 1, c).iter() {
        out.add_series((qk, pk + 1), s, ONE, 0);
    }
    for (key, s) in reorder_p_before_q(b - 1, c - 1).iter() {
        out.add_series(key, s, C64::new(0.0, -(c as f64)), 1);
    }
    out
}

/// `q̂^m p̂^n` as anti-standard terms keyed `(qpow, ppow)` of `p̂^ppow q̂^qpow`,
/// using `q̂ p̂^n = p̂^n q̂ + iħ n p̂^{n−1}`.
fn reorder_q_before_p(m: u32, n: u32) -> Terms {
    let mut out = Terms::default();
    if m == 0 || n == 0 {
        out.add_term((m, n), 0, ONE);
        return out;
    }
    // q^m p^n = q^{m-1} (p^n q + iħ n p^{n-1}); q^{m-1} p^n q keeps the
    // trailing q on the right of every anti-standard term.
    for ((qk, pk), s) in reorder_q_before_p(m - 1, n).iter() {
        out.add_series((qk + 1, pk), s, ONE, 0);
    }
    for (key, s) in reorder_q_before_p(m - 1, n - 1).iter() {
        out.add_series(key, s, C64::new(0.0, n as f64), 1);
    }
    out
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.terms, true))
    }
}
