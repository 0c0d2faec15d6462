//! Uniform grids, reference states and density matrices.
//!
//! Quadrature is the uniform Riemann sum `step · Σ`. The position to
//! momentum transform is `φ(p) = (2πħ)^{-1/2} ∫ ψ(q) e^{−ipq/ħ} dq`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Amplitude below which a state counts as decayed at the grid edges.
pub const EDGE_TOLERANCE: f64 = 1e-10;

/// Points `minimum + k · step` for `k in 0..count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub count: usize,
    pub minimum: f64,
    pub step: f64,
}

impl UniformGrid {
    pub fn new(count: usize, minimum: f64, step: f64) -> Result<Self> {
        if count == 0 || !minimum.is_finite() || !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "invalid grid: count {count}, minimum {minimum}, step {step}"
            )));
        }
        Ok(Self { count, minimum, step })
    }

    /// `count` points covering `[-half_extent, half_extent)`.
    pub fn symmetric(count: usize, half_extent: f64) -> Result<Self> {
        Self::new(count, -half_extent, 2.0 * half_extent / count as f64)
    }

    /// Momentum grid conjugate to this position grid: same count, step
    /// `2πħ / (count · step)`, centred on zero. Its extent is `2πħ/step`, the
    /// widest range a `step`-spaced z-quadrature can resolve.
    pub fn reciprocal(&self, hbar: f64) -> Self {
        let step = 2.0 * PI * hbar / (self.count as f64 * self.step);
        Self { count: self.count, minimum: -((self.count / 2) as f64) * step, step }
    }

    pub fn point(&self, k: usize) -> f64 {
        self.minimum + k as f64 * self.step
    }

    pub fn points(&self) -> Array1<f64> {
        Array1::from_iter((0..self.count).map(|k| self.point(k)))
    }

    pub fn maximum(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.minimum.abs().max(self.maximum().abs())
    }

    /// Whether `other` has the same spacing and its points coincide with a
    /// whole-number shift of this grid's points.
    pub fn is_shift_of(&self, other: &UniformGrid) -> bool {
        let ratio = (other.minimum - self.minimum) / self.step;
        self.count == other.count && self.step == other.step && (ratio - ratio.round()).abs() < 1e-9
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar.is_finite() && hbar > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("hbar must be positive and finite, got {hbar}")))
    }
}

fn l2_norm(samples: &Array1<C64>, step: f64) -> f64 {
    (samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * step).sqrt()
}

fn check_edges(samples: &Array1<C64>, what: &str) -> Result<()> {
    let n = samples.len();
    let edge = samples[0].norm().max(samples[n - 1].norm());
    if edge >= EDGE_TOLERANCE {
        return Err(Error::DomainTruncation(format!(
            "{what} has amplitude {edge:.3e} at the grid edge (needs < {EDGE_TOLERANCE:e})"
        )));
    }
    Ok(())
}

/// Wavefunction `ψ(q)` sampled on a position grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionState {
    pub grid: UniformGrid,
    pub samples: Array1<C64>,
    pub hbar: f64,
}

/// Wavefunction `φ(p)` sampled on a momentum grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    pub grid: UniformGrid,
    pub samples: Array1<C64>,
    pub hbar: f64,
}

macro_rules! wavefunction_common {
    ($ty:ty) => {
        impl $ty {
            pub fn new(grid: UniformGrid, samples: Array1<C64>, hbar: f64) -> Result<Self> {
                check_hbar(hbar)?;
                if samples.len() != grid.count {
                    return Err(Error::GridMismatch(format!(
                        "{} samples for a grid of {} points",
                        samples.len(),
                        grid.count
                    )));
                }
                Ok(Self { grid, samples, hbar })
            }

            pub fn norm(&self) -> f64 {
                l2_norm(&self.samples, self.grid.step)
            }

            pub fn normalized(&self) -> Result<Self> {
                let n = self.norm();
                if n == 0.0 || !n.is_finite() {
                    return Err(Error::InvalidInput("cannot normalise a zero state".into()));
                }
                Ok(Self { samples: self.samples.mapv(|z| z / n), ..self.clone() })
            }

            /// `∫ x |ψ(x)|² dx` over this state's own grid variable.
            pub fn mean(&self) -> f64 {
                self.moment(1)
            }

            pub fn moment(&self, power: i32) -> f64 {
                self.samples
                    .iter()
                    .enumerate()
                    .map(|(k, z)| self.grid.point(k).powi(power) * z.norm_sqr())
                    .sum::<f64>()
                    * self.grid.step
            }

            /// `⟨self|other⟩` by quadrature.
            pub fn overlap(&self, other: &Self) -> Result<C64> {
                if self.grid != other.grid {
                    return Err(Error::GridMismatch("overlap of states on different grids".into()));
                }
                Ok(self.samples.iter().zip(other.samples.iter()).map(|(a, b)| a.conj() * b).sum::<C64>()
                    * self.grid.step)
            }
        }
    };
}

wavefunction_common!(PositionState);
wavefunction_common!(MomentumState);

/// Normalised Hermite functions `ψ_0..=ψ_n` at `x = q/√ħ` (without the
/// `ħ^{-1/4}` factor).
fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n >= 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for k in 1..n {
        let next = (2.0 / (k + 1) as f64).sqrt() * x * out[k] - (k as f64 / (k + 1) as f64).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Oscillator eigenstate `ψ_n` (m = ω = 1).
pub fn oscillator_eigenstate(n: usize, grid: UniformGrid, hbar: f64) -> Result<PositionState> {
    check_hbar(hbar)?;
    let scale = hbar.powf(-0.25);
    let samples = grid
        .points()
        .mapv(|q| C64::new(scale * hermite_functions(n, q / hbar.sqrt())[n], 0.0));
    check_edges(&samples, &format!("oscillator eigenstate {n}"))?;
    PositionState::new(grid, samples, hbar)?.normalized()
}

/// Coherent state `(πħ)^{-1/4} exp(−(q−q0)²/2ħ + i p0 q/ħ)`.
pub fn coherent_state(q0: f64, p0: f64, grid: UniformGrid, hbar: f64) -> Result<PositionState> {
    check_hbar(hbar)?;
    if !(q0.is_finite() && p0.is_finite()) {
        return Err(Error::InvalidInput("coherent state centre must be finite".into()));
    }
    let amp = (PI * hbar).powf(-0.25);
    let samples = grid.points().mapv(|q| {
        let d = q - q0;
        C64::from_polar(amp * (-d * d / (2.0 * hbar)).exp(), p0 * q / hbar)
    });
    check_edges(&samples, "coherent state")?;
    PositionState::new(grid, samples, hbar)?.normalized()
}

/// Relative mismatch between input and output norms above which a discrete
/// Fourier transform is reported as truncated or aliased.
const TAIL_TOLERANCE: f64 = 1e-6;

fn fourier_sum(
    samples: &Array1<C64>,
    from: &UniformGrid,
    to: &UniformGrid,
    sign: f64,
    hbar: f64,
) -> Array1<C64> {
    let prefactor = from.step / (2.0 * PI * hbar).sqrt();
    let xs = from.points();
    Array1::from_iter((0..to.count).map(|j| {
        let k = to.point(j);
        samples
            .iter()
            .zip(xs.iter())
            .map(|(s, &x)| s * C64::cis(sign * k * x / hbar))
            .sum::<C64>()
            * prefactor
    }))
}

fn check_unitarity(before: f64, after: f64, what: &str) -> Result<()> {
    let ratio = (after * after) / (before * before);
    if (1.0 - ratio).abs() > TAIL_TOLERANCE {
        return Err(Error::DomainTruncation(format!(
            "{what}: target grid keeps a fraction {ratio:.9} of the norm"
        )));
    }
    Ok(())
}

/// `φ(p) = (2πħ)^{-1/2} Σ_k ψ(q_k) e^{−ipq_k/ħ} Δq`.
pub fn to_momentum(psi: &PositionState, pgrid: UniformGrid) -> Result<MomentumState> {
    let samples = fourier_sum(&psi.samples, &psi.grid, &pgrid, -1.0, psi.hbar);
    let phi = MomentumState::new(pgrid, samples, psi.hbar)?;
    check_unitarity(psi.norm(), phi.norm(), "position to momentum")?;
    Ok(phi)
}

/// Inverse of [`to_momentum`].
pub fn to_position(phi: &MomentumState, qgrid: UniformGrid) -> Result<PositionState> {
    let samples = fourier_sum(&phi.samples, &phi.grid, &qgrid, 1.0, phi.hbar);
    let psi = PositionState::new(qgrid, samples, phi.hbar)?;
    check_unitarity(phi.norm(), psi.norm(), "momentum to position")?;
    Ok(psi)
}

/// `ρ(q_i, q_j)` on a uniform position grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub(crate) grid: UniformGrid,
    pub(crate) entries: Array2<C64>,
    pub(crate) hbar: f64,
}

impl DensityMatrix {
    /// Validates shape, hermiticity (1e-12) and unit trace (1e-8).
    pub fn new(grid: UniformGrid, entries: Array2<C64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if entries.dim() != (grid.count, grid.count) {
            return Err(Error::GridMismatch(format!(
                "density matrix of shape {:?} on a grid of {} points",
                entries.dim(),
                grid.count
            )));
        }
        let rho = Self { grid, entries, hbar };
        let asym = rho.hermiticity_defect();
        if asym > 1e-12 {
            return Err(Error::InvalidInput(format!("density matrix not hermitian (defect {asym:.3e})")));
        }
        let trace = rho.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvalidInput(format!("density matrix trace {trace} is not 1")));
        }
        Ok(rho)
    }

    pub fn grid(&self) -> UniformGrid {
        self.grid
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `Σ_k ρ_kk · step`.
    pub fn trace(&self) -> C64 {
        self.entries.diag().sum() * self.grid.step
    }

    /// `Tr ρ²` with quadrature weights.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.step * self.grid.step
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.grid.count;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Position density `ρ(q, q)`.
    pub fn diagonal(&self) -> Array1<f64> {
        self.entries.diag().mapv(|z| z.re)
    }

    /// `⟨a|ρ|b⟩` for two states on the same grid.
    pub fn matrix_element(&self, a: &PositionState, b: &PositionState) -> Result<C64> {
        if a.grid != self.grid || b.grid != self.grid {
            return Err(Error::GridMismatch("state grid differs from density grid".into()));
        }
        let w = self.grid.step * self.grid.step;
        let rb = self.entries.dot(&b.samples);
        Ok(a.samples.iter().zip(rb.iter()).map(|(x, y)| x.conj() * y).sum::<C64>() * w)
    }
}

/// `ρ = |ψ⟩⟨ψ|`, requiring `‖ψ‖ = 1` within 1e-8.
pub fn density_from_pure(psi: &PositionState) -> Result<DensityMatrix> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
    }
    let n = psi.grid.count;
    let entries = Array2::from_shape_fn((n, n), |(i, j)| psi.samples[i] * psi.samples[j].conj());
    DensityMatrix::new(psi.grid, entries, psi.hbar)
}

/// Convex combination `Σ w_k ρ_k`; weights must be non-negative and sum to 1
/// within 1e-12.
pub fn mix(states: &[(DensityMatrix, f64)]) -> Result<DensityMatrix> {
    let Some((first, _)) = states.first() else {
        return Err(Error::InvalidInput("mixture of zero states".into()));
    };
    let total: f64 = states.iter().map(|(_, w)| w).sum();
    if states.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("mixture weights must be non-negative and sum to 1 (sum {total})")));
    }
    if states.iter().any(|(r, _)| r.grid != first.grid || r.hbar != first.hbar) {
        return Err(Error::GridMismatch("mixture components on different grids or hbar".into()));
    }
    // a unit weight on one component reproduces it bit for bit
    if let Some((rho, _)) = states.iter().find(|(_, w)| *w == 1.0) {
        return Ok(rho.clone());
    }
    let mut entries = Array2::<C64>::zeros(first.entries.dim());
    for (rho, w) in states {
        entries.scaled_add(C64::new(*w, 0.0), &rho.entries);
    }
    DensityMatrix::new(first.grid, entries, first.hbar)
}
