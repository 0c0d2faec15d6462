//! Expectation values by Hilbert-space trace and by phase-space pairings.
//!
//! For hermitian ρ, `conj(P_α) = P_{−1−α}`, and
//! `∫∫ P_α O_β dq dp = Tr(ρÔ)` exactly when `β = −1−α`. Hence the
//! conjugate pairing with the same-α symbol and the plain pairing with the
//! dual symbol both reproduce the trace; the plain same-α pairing does so
//! only at the self-dual point α = −1/2.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::distributions::{compute_distribution, DistributionField};
use crate::fourier::{derivative_multipliers, spectral_tail, FftPair};
use crate::operator_algebra::{alpha_symbol, OperatorExpr, PhaseSpaceSymbol};
use crate::states_grids::{DensityMatrix, UniformGrid};
use crate::{Error, Result};

/// Spectral energy fraction above which `p̂` on the grid is unreliable.
const SPECTRAL_TAIL_LIMIT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// `∫∫ P_α O_α`
    Plain,
    /// `∫∫ conj(P_α) O_α`
    Conjugate,
    /// `∫∫ P_α O_{−1−α}`
    Dual,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::Conjugate, Pairing::Plain, Pairing::Dual];

    /// Ordering parameter at which the symbol must be generated.
    pub fn symbol_alpha(self, field_alpha: f64) -> f64 {
        match self {
            Pairing::Plain | Pairing::Conjugate => field_alpha,
            Pairing::Dual => -1.0 - field_alpha,
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::Plain => "plain",
            Pairing::Conjugate => "conjugate",
            Pairing::Dual => "dual",
        })
    }
}

/// `Tr(ρ Ô)` with `q̂` diagonal and `p̂ = −iħ∂` applied spectrally to the
/// first argument of ρ.
pub fn expect_hilbert(rho: &DensityMatrix, op: &OperatorExpr) -> Result<C64> {
    if rho.hbar() != op.hbar() {
        return Err(Error::InvalidInput(format!(
            "operator hbar {} differs from state hbar {}",
            op.hbar(),
            rho.hbar()
        )));
    }
    let grid = rho.grid();
    let n = grid.count;
    let hbar = rho.hbar();
    let max_ppow = op.monomials().iter().map(|m| m.ppow).max().unwrap_or(0);

    // diag[ppow][i] = (p̂^ppow ρ)(q_i, q_i)
    let mut diag = vec![vec![C64::default(); n]; max_ppow as usize + 1];
    for (i, v) in rho.entries().diag().iter().enumerate() {
        diag[0][i] = *v;
    }
    if max_ppow > 0 {
        let fft = FftPair::new(n);
        let multipliers: Vec<Vec<C64>> = (1..=max_ppow)
            .map(|k| {
                let scale = C64::new(0.0, -hbar).powu(k);
                derivative_multipliers(n, grid.step, k).into_iter().map(|d| d * scale).collect()
            })
            .collect();
        let (mut tail_energy, mut total_energy) = (0.0, 0.0);
        let mut column = vec![C64::default(); n];
        let roots: Vec<C64> = (0..n).map(|r| C64::cis(2.0 * std::f64::consts::PI * r as f64 / n as f64)).collect();
        for j in 0..n {
            column.iter_mut().zip(rho.entries().column(j)).for_each(|(d, s)| *d = *s);
            fft.forward.process(&mut column);
            let energy: f64 = column.iter().map(|z| z.norm_sqr()).sum();
            total_energy += energy;
            tail_energy += spectral_tail(&column) * energy;
            for (k, mult) in multipliers.iter().enumerate() {
                // inverse transform evaluated only at row j
                let value: C64 = column
                    .iter()
                    .zip(mult)
                    .enumerate()
                    .map(|(nu, (c, d))| c * d * roots[(nu * j) % n])
                    .sum();
                diag[k + 1][j] = value / n as f64;
            }
        }
        if total_energy > 0.0 && tail_energy / total_energy > SPECTRAL_TAIL_LIMIT {
            return Err(Error::Resolution(format!(
                "density matrix has spectral tail fraction {:.3e}; refine the grid",
                tail_energy / total_energy
            )));
        }
    }

    let mut total = C64::default();
    for mono in op.monomials() {
        let c = mono.coeff.evaluate(hbar);
        let sum: C64 = diag[mono.ppow as usize]
            .iter()
            .enumerate()
            .map(|(i, v)| v * grid.point(i).powi(mono.qpow as i32))
            .sum();
        total += c * sum * grid.step;
    }
    Ok(total)
}

/// `ΔqΔp ΣΣ f · O` with `f = P_α` (plain, dual) or `conj(P_α)`
/// (conjugate). The symbol must already be generated at
/// [`Pairing::symbol_alpha`].
pub fn expect_phase_space(field: &DistributionField, sym: &PhaseSpaceSymbol, pairing: Pairing) -> Result<C64> {
    if field.hbar != sym.hbar() {
        return Err(Error::GridMismatch(format!(
            "symbol hbar {} differs from field hbar {}",
            sym.hbar(),
            field.hbar
        )));
    }
    let qs = field.qgrid.points();
    let ps = field.pgrid.points();
    let terms: Vec<(i32, i32, C64)> = sym
        .terms()
        .into_iter()
        .map(|(a, b, s)| (a as i32, b as i32, s.evaluate(sym.hbar())))
        .collect();
    let mut total = C64::default();
    for ((i, j), v) in field.values.indexed_iter() {
        let o: C64 = terms.iter().map(|(a, b, c)| c * qs[i].powi(*a) * ps[j].powi(*b)).sum();
        let f = match pairing {
            Pairing::Conjugate => v.conj(),
            Pairing::Plain | Pairing::Dual => *v,
        };
        total += f * o;
    }
    Ok(total * field.cell_area())
}

/// Convenience: generates the appropriate symbol of `op` and pairs it.
pub fn pair_operator(field: &DistributionField, op: &OperatorExpr, pairing: Pairing) -> Result<C64> {
    let sym = alpha_symbol(op, pairing.symbol_alpha(field.alpha));
    expect_phase_space(field, &sym, pairing)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancies {
    pub conjugate: f64,
    pub plain: f64,
    pub dual: f64,
}

/// One operator on one state at one α, evaluated every way.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationReport {
    pub alpha: f64,
    pub operator: String,
    pub hilbert: C64,
    pub phase_conjugate: C64,
    pub phase_plain: C64,
    pub phase_dual: C64,
    pub discrepancies: Discrepancies,
}

impl ExpectationReport {
    pub fn value(&self, pairing: Pairing) -> C64 {
        match pairing {
            Pairing::Plain => self.phase_plain,
            Pairing::Conjugate => self.phase_conjugate,
            Pairing::Dual => self.phase_dual,
        }
    }

    pub fn discrepancy(&self, pairing: Pairing) -> f64 {
        match pairing {
            Pairing::Plain => self.discrepancies.plain,
            Pairing::Conjugate => self.discrepancies.conjugate,
            Pairing::Dual => self.discrepancies.dual,
        }
    }

    /// Pairings reproducing the trace within `tol`.
    pub fn certified(&self, tol: f64) -> Vec<Pairing> {
        Pairing::ALL.into_iter().filter(|p| self.discrepancy(*p) < tol).collect()
    }

    pub fn to_json(&self, tol: f64) -> Value {
        let pair = |z: C64| json!([z.re, z.im]);
        json!({
            "alpha": self.alpha,
            "operator": self.operator,
            "hilbert": pair(self.hilbert),
            "pairings": {
                "conjugate": pair(self.phase_conjugate),
                "plain": pair(self.phase_plain),
                "dual": pair(self.phase_dual),
            },
            "discrepancies": {
                "conjugate": self.discrepancies.conjugate,
                "plain": self.discrepancies.plain,
                "dual": self.discrepancies.dual,
            },
            "tolerance": tol,
            "certified": self.certified(tol),
        })
    }
}

/// Trace and all three pairings for `op` on `rho` at `alpha`.
pub fn expectation_report(
    rho: &DensityMatrix,
    op: &OperatorExpr,
    alpha: f64,
    pgrid: UniformGrid,
) -> Result<ExpectationReport> {
    let hilbert = expect_hilbert(rho, op)?;
    let field = compute_distribution(rho, alpha, pgrid)?;
    let phase_conjugate = pair_operator(&field, op, Pairing::Conjugate)?;
    let phase_plain = pair_operator(&field, op, Pairing::Plain)?;
    let phase_dual = pair_operator(&field, op, Pairing::Dual)?;
    Ok(ExpectationReport {
        alpha,
        operator: op.to_string(),
        hilbert,
        phase_conjugate,
        phase_plain,
        phase_dual,
        discrepancies: Discrepancies {
            conjugate: (phase_conjugate - hilbert).norm(),
            plain: (phase_plain - hilbert).norm(),
            dual: (phase_dual - hilbert).norm(),
        },
    })
}

/// Which pairings held for every report at one α.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingCertificate {
    pub alpha: f64,
    pub tolerance: f64,
    pub cases: usize,
    /// Pairings within tolerance on every case.
    pub certified: Vec<Pairing>,
    /// Worst discrepancy per pairing over all cases.
    pub worst: Discrepancies,
    /// Cases where no pairing reached the tolerance.
    pub uncovered: Vec<String>,
}

pub fn certify(alpha: f64, reports: &[ExpectationReport], tol: f64) -> PairingCertificate {
    let worst = |p: Pairing| reports.iter().map(|r| r.discrepancy(p)).fold(0.0, f64::max);
    let worst = Discrepancies {
        conjugate: worst(Pairing::Conjugate),
        plain: worst(Pairing::Plain),
        dual: worst(Pairing::Dual),
    };
    let certified = Pairing::ALL
        .into_iter()
        .filter(|p| reports.iter().all(|r| r.discrepancy(*p) < tol))
        .collect();
    let uncovered = reports
        .iter()
        .filter(|r| r.certified(tol).is_empty())
        .map(|r| r.operator.clone())
        .collect();
    PairingCertificate { alpha, tolerance: tol, cases: reports.len(), certified, worst, uncovered }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_algebra::parse_operator;
    use crate::states_grids::{coherent_state, density_from_pure, oscillator_eigenstate};

    fn grid() -> UniformGrid {
        UniformGrid::symmetric(128, 8.0).unwrap()
    }

    #[test]
    fn hilbert_identity_and_position() {
        let g = grid();
        let rho = density_from_pure(&coherent_state(1.0, 2.0, g, 1.0).unwrap()).unwrap();
        let one = expect_hilbert(&rho, &OperatorExpr::identity(1.0).unwrap()).unwrap();
        assert!((one - C64::new(1.0, 0.0)).norm() < 1e-10);
        let q = expect_hilbert(&rho, &parse_operator("q", 1.0).unwrap()).unwrap();
        assert!((q - C64::new(1.0, 0.0)).norm() < 1e-6);
        let p = expect_hilbert(&rho, &parse_operator("p", 1.0).unwrap()).unwrap();
        assert!((p - C64::new(2.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn hilbert_qp_on_ground_state() {
        let rho = density_from_pure(&oscillator_eigenstate(0, grid(), 1.0).unwrap()).unwrap();
        let v = expect_hilbert(&rho, &parse_operator("q p", 1.0).unwrap()).unwrap();
        assert!((v - C64::new(0.0, 0.5)).norm() < 1e-6);
    }

    #[test]
    fn under_resolved_state_is_rejected() {
        let g = UniformGrid::symmetric(32, 8.0).unwrap();
        let rho = density_from_pure(&coherent_state(0.0, 5.5, g, 1.0).unwrap()).unwrap();
        let p2 = parse_operator("p^2", 1.0).unwrap();
        assert!(matches!(expect_hilbert(&rho, &p2), Err(Error::Resolution(_))));
        assert!(expect_hilbert(&rho, &parse_operator("q^2", 1.0).unwrap()).is_ok());
    }

    #[test]
    fn hbar_mismatch() {
        let rho = density_from_pure(&oscillator_eigenstate(0, grid(), 1.0).unwrap()).unwrap();
        assert!(expect_hilbert(&rho, &parse_operator("q", 2.0).unwrap()).is_err());
    }

    #[test]
    fn dual_alpha() {
        assert_eq!(Pairing::Dual.symbol_alpha(0.0), -1.0);
        assert_eq!(Pairing::Dual.symbol_alpha(-0.5), -0.5);
        assert_eq!(Pairing::Conjugate.symbol_alpha(0.3), 0.3);
    }
}
