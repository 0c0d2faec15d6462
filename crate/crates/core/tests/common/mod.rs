//! Independent oracles shared by the integration tests. Nothing here calls
//! the closed-form symbol map.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use phasespace::operator_algebra::{OperatorExpr, PhaseSpaceSymbol};

/// Position-space kernel of `p̂^n` with a smooth spectral cutoff
/// `χ(k) = exp(−(k/K)^16)`: `D_n(u) = (1/2πħ) ∫ k^n χ(k) e^{iku/ħ} dk`,
/// tabulated on a uniform z-grid by brute-force k-quadrature.
pub struct KernelTransform {
    hbar: f64,
    zs: Vec<f64>,
    dz: f64,
    /// `kernels[n][j] = D_n(−z_j)`
    kernels: Vec<Vec<C64>>,
}

impl KernelTransform {
    pub fn new(max_ppow: u32, hbar: f64) -> Self {
        let cutoff = 30.0 * hbar;
        let dz = 0.02 * hbar;
        let zs: Vec<f64> = (-500..=500).map(|j| j as f64 * dz).collect();
        let dk = 0.05;
        let ks: Vec<f64> = (-900..=900).map(|j| j as f64 * dk).collect();
        let window: Vec<f64> = ks.iter().map(|k| (-(k / cutoff).powi(16)).exp()).collect();
        let kernels = (0..=max_ppow)
            .map(|n| {
                zs.iter()
                    .map(|&z| {
                        let u = -z;
                        ks.iter()
                            .zip(&window)
                            .map(|(&k, &w)| C64::cis(k * u / hbar) * k.powi(n as i32) * w)
                            .sum::<C64>()
                            * (dk / (2.0 * PI * hbar))
                    })
                    .collect()
            })
            .collect();
        Self { hbar, zs, dz, kernels }
    }

    /// `∫ ⟨q+αz| q̂^m p̂^n |q+(α+1)z⟩ e^{ipz/ħ} dz` with
    /// `⟨x|q̂^m p̂^n|y⟩ = x^m D_n(x − y)`.
    pub fn symbol(&self, m: u32, n: u32, alpha: f64, q: f64, p: f64) -> C64 {
        self.zs
            .iter()
            .zip(&self.kernels[n as usize])
            .map(|(&z, &d)| (q + alpha * z).powi(m as i32) * d * C64::cis(p * z / self.hbar))
            .sum::<C64>()
            * self.dz
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weyl quantisation of `q^a p^b` as the symmetric sum
/// `2^{-a} Σ_k C(a,k) q̂^k p̂^b q̂^{a−k}`.
pub fn weyl_quantize_monomial(a: u32, b: u32, hbar: f64) -> OperatorExpr {
    let q = OperatorExpr::position(hbar).unwrap();
    let p = OperatorExpr::momentum(hbar).unwrap();
    let pow = |x: &OperatorExpr, k: u32| {
        (0..k).fold(OperatorExpr::identity(hbar).unwrap(), |acc, _| acc.multiply(x).unwrap())
    };
    let mut out = OperatorExpr::zero(hbar).unwrap();
    for k in 0..=a {
        let term = pow(&q, k).multiply(&pow(&p, b)).unwrap().multiply(&pow(&q, a - k)).unwrap();
        out = out.add(&term.scale(C64::new(binomial(a, k) / 2f64.powi(a as i32), 0.0))).unwrap();
    }
    out
}

/// Weyl symbol by peeling leading terms off against the symmetric-sum
/// quantisation. Returns numeric coefficients keyed `(qpow, ppow)`.
pub fn weyl_symbol(op: &OperatorExpr) -> Vec<((u32, u32), C64)> {
    let hbar = op.hbar();
    let mut remaining = op.clone();
    let mut out = Vec::new();
    while !remaining.is_zero() {
        let lead = remaining
            .monomials()
            .into_iter()
            .max_by_key(|m| (m.qpow + m.ppow, m.qpow))
            .unwrap();
        let c = lead.coeff.evaluate(hbar);
        out.push(((lead.qpow, lead.ppow), c));
        let sub = weyl_quantize_monomial(lead.qpow, lead.ppow, hbar).scale(c);
        // subtract numerically, then drop the leading key exactly
        remaining = remaining.sub(&sub).unwrap();
        let leftover = remaining.numeric_coefficient(lead.qpow, lead.ppow);
        assert!(leftover.norm() < 1e-12);
        let mut cleaned = OperatorExpr::zero(hbar).unwrap();
        for m in remaining.monomials() {
            if (m.qpow, m.ppow) != (lead.qpow, lead.ppow) {
                let v = m.coeff.evaluate(hbar);
                if v.norm() > 1e-14 {
                    cleaned = cleaned.add(&OperatorExpr::monomial(v, m.qpow, m.ppow, hbar).unwrap()).unwrap();
                }
            }
        }
        remaining = cleaned;
    }
    out
}

pub fn numeric_symbol_value(terms: &[((u32, u32), C64)], q: f64, p: f64) -> C64 {
    terms.iter().map(|((a, b), c)| c * q.powi(*a as i32) * p.powi(*b as i32)).sum()
}

pub fn evaluate(sym: &PhaseSpaceSymbol, q: f64, p: f64) -> C64 {
    sym.evaluate(q, p)
}
