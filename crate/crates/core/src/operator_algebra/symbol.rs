use std::fmt;

use num_complex::Complex64 as C64;

use super::expr::OperatorExpr;
use super::series::{binomial, falling_factorial, render, HbarSeries, Terms};
use crate::{Error, Result};

const ONE: C64 = C64::new(1.0, 0.0);

/// Commuting polynomial `O(q, p)` with ħ-carrying complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceSymbol {
    pub(crate) terms: Terms,
    hbar: f64,
}

impl PhaseSpaceSymbol {
    pub fn zero(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidInput(format!("hbar must be positive and finite, got {hbar}")));
        }
        Ok(Self { terms: Terms::default(), hbar })
    }

    pub fn constant(c: C64, hbar: f64) -> Result<Self> {
        Self::monomial(c, 0, 0, hbar)
    }

    /// `coeff · q^qpow p^ppow`.
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

    pub fn degree(&self) -> u32 {
        self.terms.degree()
    }

    /// `(qpow, ppow, coefficient)` triples in storage order.
    pub fn terms(&self) -> Vec<(u32, u32, HbarSeries)> {
        self.terms.iter().map(|((q, p), s)| (q, p, s.clone())).collect()
    }

    /// Flattened `(qpow, ppow, hbar_power, coeff)` in print order.
    pub fn flat_terms(&self) -> Vec<(u32, u32, u32, C64)> {
        self.terms.print_order()
    }

    pub fn coefficient(&self, qpow: u32, ppow: u32) -> HbarSeries {
        self.terms.get((qpow, ppow)).cloned().unwrap_or_default()
    }

    pub fn evaluate(&self, q: f64, p: f64) -> C64 {
        self.terms
            .iter()
            .map(|((a, b), s)| s.evaluate(self.hbar) * q.powi(a as i32) * p.powi(b as i32))
            .sum()
    }

    fn same_hbar(&self, other: &Self) -> Result<()> {
        if self.hbar == other.hbar {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("mismatched hbar values {} and {}", self.hbar, other.hbar)))
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

    pub fn scale_symbolic(&self, factor: C64, hbar_power: u32) -> Self {
        Self::from_terms(self.terms.scaled(factor, hbar_power), self.hbar)
    }

    /// Ordinary (commuting) product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_hbar(other)?;
        let mut out = Terms::default();
        for ((a, b), s1) in self.terms.iter() {
            for ((c, d), s2) in other.terms.iter() {
                out.add_series((a + c, b + d), &s1.product(s2), ONE, 0);
            }
        }
        Ok(Self::from_terms(out, self.hbar))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.hbar == other.hbar && self.terms.max_abs_diff(&other.terms) <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.terms.max_abs_diff(&other.terms)
    }
}

impl fmt::Display for PhaseSpaceSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.terms, false))
    }
}

/// Symbol of `coeff · q̂^m p̂^n` under the α-ordering rule:
/// `Σ_{r ≤ min(m,n)} C(m,r) n!/(n−r)! (−iħα)^r q^{m−r} p^{n−r}`.
fn monomial_symbol(out: &mut Terms, coeff: &HbarSeries, m: u32, n: u32, alpha: f64) {
    let step = C64::new(0.0, -alpha);
    let mut power = ONE;
    for r in 0..=m.min(n) {
        let count = (binomial(m, r) * falling_factorial(n, r)) as f64;
        out.add_series((m - r, n - r), coeff, power * count, r);
        power *= step;
    }
}

/// Phase-space symbol of `op` under the ordering rule with parameter `alpha`
/// (α = 0 standard, α = −1/2 Weyl, α = −1 anti-standard).
pub fn alpha_symbol(op: &OperatorExpr, alpha: f64) -> PhaseSpaceSymbol {
    let mut out = Terms::default();
    for ((m, n), s) in op.terms.iter() {
        monomial_symbol(&mut out, s, m, n, alpha);
    }
    PhaseSpaceSymbol::from_terms(out, op.hbar())
}

/// Inverse of [`alpha_symbol`]. The map is unitriangular with respect to
/// total degree (every correction term drops the degree by two), so the
/// highest-degree term is peeled off repeatedly.
pub fn alpha_quantize(sym: &PhaseSpaceSymbol, alpha: f64) -> OperatorExpr {
    let mut remaining = sym.terms.clone();
    let mut result = Terms::default();
    while let Some((key, series)) = remaining
        .iter()
        .max_by_key(|&((q, p), _)| (q + p, q))
        .map(|(k, s)| (k, s.clone()))
    {
        result.add_series(key, &series, ONE, 0);
        let mut image = Terms::default();
        monomial_symbol(&mut image, &series, key.0, key.1, alpha);
        remaining.add_all(&image, -ONE);
    }
    OperatorExpr::from_terms(result, sym.hbar())
}
