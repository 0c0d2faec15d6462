//! The α-family of phase-space distributions
//!
//! `P_α(q, p) = (1/2πħ) ∫ ⟨q+αz|ρ|q+(α+1)z⟩ e^{ipz/ħ} dz`
//!
//! evaluated on `z_k = k·Δq`, `|k| < N`. Off-grid density-matrix values are
//! obtained by band-limited (FFT) interpolation with zero padding; both
//! routes below share that quadrature and differ only in how the shifted
//! matrix elements are produced.
//!
//! The field lives on the density matrix's own q-grid. For |α + ½| > ½
//! it extends beyond the state's support by (|α + ½| − ½) times the support
//! diameter, so the grid must leave that much room or the marginals lose
//! mass.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::fourier::{signed_index, FftPair};
use crate::states_grids::{DensityMatrix, MomentumState, PositionState, UniformGrid};
use crate::{Error, Result};

/// Samples of a distribution on a `(q, p)` grid; `values[[i, j]]` sits at
/// `(q_i, p_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionField {
    pub qgrid: UniformGrid,
    pub pgrid: UniformGrid,
    pub values: Array2<C64>,
    pub alpha: f64,
    pub hbar: f64,
}

/// Position and momentum densities of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    pub position: Array1<f64>,
    pub momentum: Array1<f64>,
    /// Largest imaginary part left over in either marginal.
    pub max_imag_residue: f64,
}

impl DistributionField {
    pub fn new(qgrid: UniformGrid, pgrid: UniformGrid, values: Array2<C64>, alpha: f64, hbar: f64) -> Result<Self> {
        if values.dim() != (qgrid.count, pgrid.count) {
            return Err(Error::GridMismatch(format!(
                "values of shape {:?} for grids {}x{}",
                values.dim(),
                qgrid.count,
                pgrid.count
            )));
        }
        Ok(Self { qgrid, pgrid, values, alpha, hbar })
    }

    pub fn cell_area(&self) -> f64 {
        self.qgrid.step * self.pgrid.step
    }

    /// `ΣΣ values · Δq Δp`.
    pub fn normalization(&self) -> C64 {
        self.values.sum() * self.cell_area()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Real part of `(⟨q⟩, ⟨p⟩)` under the plain pairing.
    pub fn centroid(&self) -> (f64, f64) {
        let mut q = C64::default();
        let mut p = C64::default();
        for ((i, j), v) in self.values.indexed_iter() {
            q += v * self.qgrid.point(i);
            p += v * self.pgrid.point(j);
        }
        ((q * self.cell_area()).re, (p * self.cell_area()).re)
    }

    /// `l2` norm `sqrt(ΣΣ |v|² ΔqΔp)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_area()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &DistributionField) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn marginals(&self) -> Marginals {
        marginals(self)
    }
}

/// Sums over `p` and over `q` with step weights.
pub fn marginals(field: &DistributionField) -> Marginals {
    let pos = field.values.sum_axis(ndarray::Axis(1)) * C64::new(field.pgrid.step, 0.0);
    let mom = field.values.sum_axis(ndarray::Axis(0)) * C64::new(field.qgrid.step, 0.0);
    let residue = pos.iter().chain(mom.iter()).map(|z| z.im.abs()).fold(0.0, f64::max);
    Marginals { position: pos.mapv(|z| z.re), momentum: mom.mapv(|z| z.re), max_imag_residue: residue }
}

/// Periodic length used for interpolation: large enough that every sample
/// shifted by up to `reach · k` outside the grid lands in the zero padding.
fn padded_length(n: usize, reach: f64) -> usize {
    let reach = (reach.abs() * (n as f64 - 1.0)).ceil() as usize;
    let m = n + reach + 8;
    m + m % 2
}

fn check_configuration(rho: &DensityMatrix, alpha: f64, pgrid: &UniformGrid) -> Result<()> {
    let grid = rho.grid();
    if grid.count < 8 {
        return Err(Error::Configuration(format!("grid of {} points is too small (need >= 8)", grid.count)));
    }
    if !alpha.is_finite() {
        return Err(Error::Configuration("alpha must be finite".into()));
    }
    let limit = PI * rho.hbar() / grid.step;
    if pgrid.max_abs() > limit * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "momentum grid reaches |p| = {} but z-spacing {} resolves only |p| <= {limit}",
            pgrid.max_abs(),
            grid.step
        )));
    }
    Ok(())
}

/// `(1/2πħ) Σ_k Δq · h_k(q_i) e^{i p_j z_k/ħ}` where row `k + N − 1` of
/// `shifted` holds `h_k(q_i) = ⟨q_i+αz_k|ρ|q_i+(α+1)z_k⟩`.
fn fourier_in_z(shifted: &Array2<C64>, qgrid: &UniformGrid, pgrid: &UniformGrid, hbar: f64) -> Array2<C64> {
    let n = qgrid.count as i64;
    let ks = 2 * n - 1;
    let phases = Array2::from_shape_fn((ks as usize, pgrid.count), |(kk, j)| {
        let z = (kk as i64 - (n - 1)) as f64 * qgrid.step;
        C64::cis(pgrid.point(j) * z / hbar)
    });
    let prefactor = C64::new(qgrid.step / (2.0 * PI * hbar), 0.0);
    shifted.t().dot(&phases) * prefactor
}

/// Direct route: for each `z_k` take the `k`-th diagonal `ρ(x, x+z_k)` and
/// shift it by `αz_k` with band-limited interpolation.
fn shifted_diagonals_direct(rho: &DensityMatrix, alpha: f64) -> Array2<C64> {
    let n = rho.grid().count;
    let m = padded_length(n, alpha);
    let fft = FftPair::new(m);
    let entries = rho.entries();
    let mut out = Array2::<C64>::zeros((2 * n - 1, n));
    let mut buf = vec![C64::default(); m];
    for kk in 0..2 * n - 1 {
        let k = kk as i64 - (n as i64 - 1);
        buf.iter_mut().for_each(|z| *z = C64::default());
        for j in 0..n as i64 {
            let col = j + k;
            if (0..n as i64).contains(&col) {
                buf[j as usize] = entries[[j as usize, col as usize]];
            }
        }
        let shift = alpha * k as f64;
        if shift.fract() == 0.0 {
            let s = shift as i64;
            for i in 0..n as i64 {
                let src = i + s;
                if (0..n as i64).contains(&src) {
                    out[[kk, i as usize]] = buf[src as usize];
                }
            }
            continue;
        }
        fft.forward.process(&mut buf);
        for (nu, z) in buf.iter_mut().enumerate() {
            let phase = if nu == m / 2 {
                // unpaired Nyquist bin: symmetric split keeps hermitian
                // structure of ρ exact
                C64::new((PI * shift).cos(), 0.0)
            } else {
                C64::cis(2.0 * PI * signed_index(nu, m) as f64 * shift / m as f64)
            };
            *z *= phase / m as f64;
        }
        fft.inverse.process(&mut buf);
        for i in 0..n {
            out[[kk, i]] = buf[i];
        }
    }
    out
}

/// Unitary route: the density matrix is moved to the momentum
/// representation, where `e^{ip̂αz/ħ} ρ̂ e^{−ip̂αz/ħ}` is a pure phase
/// (a common translation of both arguments by `αz`), and then read on the
/// diagonal `⟨q|·|q+z⟩`.
fn shifted_diagonals_unitary(rho: &DensityMatrix, alpha: f64) -> Array2<C64> {
    let n = rho.grid().count;
    // both arguments move: q + αz and q + (α+1)z
    let m = padded_length(n, alpha.abs().max((alpha + 1.0).abs()));
    let fft = FftPair::new(m);
    let mut spectrum = Array2::<C64>::zeros((m, m));
    for ((i, j), v) in rho.entries().indexed_iter() {
        spectrum[[i, j]] = *v;
    }
    let mut line = vec![C64::default(); m];
    for i in 0..m {
        line.copy_from_slice(spectrum.row(i).as_slice().expect("contiguous row"));
        fft.forward.process(&mut line);
        spectrum.row_mut(i).iter_mut().zip(&line).for_each(|(d, s)| *d = *s);
    }
    for j in 0..m {
        line.iter_mut().zip(spectrum.column(j)).for_each(|(d, s)| *d = *s);
        fft.forward.process(&mut line);
        spectrum.column_mut(j).iter_mut().zip(&line).for_each(|(d, s)| *d = *s);
    }
    if m.is_multiple_of(2) {
        // the Nyquist bins have no signed counterpart; they carry nothing
        // for states that decay at the edges
        spectrum.row_mut(m / 2).fill(C64::default());
        spectrum.column_mut(m / 2).fill(C64::default());
    }

    let signed: Vec<i64> = (0..m).map(|k| signed_index(k, m)).collect();
    let roots: Vec<C64> = (0..m).map(|r| C64::cis(2.0 * PI * r as f64 / m as f64)).collect();
    let sigma_span = 2 * m;
    let sigma_offset = m as i64;
    let norm = 1.0 / (m as f64 * m as f64);

    let mut out = Array2::<C64>::zeros((2 * n - 1, n));
    let mut combined = vec![C64::default(); sigma_span];
    for kk in 0..2 * n - 1 {
        let k = kk as i64 - (n as i64 - 1);
        let shift = alpha * k as f64;
        combined.iter_mut().for_each(|z| *z = C64::default());
        // combined(σ) = Σ_{ν1+ν2=σ} R(ν1, ν2) e^{2πi ν2 k / M}
        for (b, &nu2) in signed.iter().enumerate() {
            let w = roots[(nu2 * k).rem_euclid(m as i64) as usize];
            for (a, &nu1) in signed.iter().enumerate() {
                combined[(nu1 + nu2 + sigma_offset) as usize] += spectrum[[a, b]] * w;
            }
        }
        // translation by αz_k in both arguments: e^{2πi σ s / M}
        let translated: Vec<(i64, C64)> = combined
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != C64::default())
            .map(|(idx, z)| {
                let sigma = idx as i64 - sigma_offset;
                (sigma, z * C64::cis(2.0 * PI * sigma as f64 * shift / m as f64))
            })
            .collect();
        for i in 0..n {
            let value: C64 = translated
                .iter()
                .map(|(sigma, z)| z * roots[(sigma * i as i64).rem_euclid(m as i64) as usize])
                .sum();
            out[[kk, i]] = value * norm;
        }
    }
    out
}

/// `P_α` on `(rho.grid, pgrid)` by direct sampling of the shifted kernel.
pub fn compute_distribution(rho: &DensityMatrix, alpha: f64, pgrid: UniformGrid) -> Result<DistributionField> {
    check_configuration(rho, alpha, &pgrid)?;
    let shifted = shifted_diagonals_direct(rho, alpha);
    let values = fourier_in_z(&shifted, &rho.grid(), &pgrid, rho.hbar());
    DistributionField::new(rho.grid(), pgrid, values, alpha, rho.hbar())
}

/// `P_α` through the unitary form
/// `(1/2πħ) ∫ ⟨q|e^{ip̂αz/ħ} ρ̂ e^{−ip̂αz/ħ}|q+z⟩ e^{ipz/ħ} dz`, with
/// `e^{−ip̂a/ħ}|x⟩ = |x+a⟩`. Independent of [`compute_distribution`] apart
/// from the shared z-quadrature.
pub fn compute_distribution_shifted(
    rho: &DensityMatrix,
    alpha: f64,
    pgrid: UniformGrid,
) -> Result<DistributionField> {
    check_configuration(rho, alpha, &pgrid)?;
    let shifted = shifted_diagonals_unitary(rho, alpha);
    let values = fourier_in_z(&shifted, &rho.grid(), &pgrid, rho.hbar());
    DistributionField::new(rho.grid(), pgrid, values, alpha, rho.hbar())
}

/// Wigner function, the α = −1/2 member.
pub fn wigner(rho: &DensityMatrix, pgrid: UniformGrid) -> Result<DistributionField> {
    compute_distribution(rho, -0.5, pgrid)
}

/// Standard-order (SN) distribution `χ`, the α = 0 member.
pub fn sn_distribution(rho: &DensityMatrix, pgrid: UniformGrid) -> Result<DistributionField> {
    compute_distribution(rho, 0.0, pgrid)
}

/// Pair of position- and momentum-representation wavefunctions.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableSolution {
    pub psi: PositionState,
    pub phi: MomentumState,
    pub hbar: f64,
}

impl SeparableSolution {
    pub fn new(psi: PositionState, phi: MomentumState) -> Result<Self> {
        if psi.hbar != phi.hbar {
            return Err(Error::InvalidInput("psi and phi carry different hbar".into()));
        }
        let hbar = psi.hbar;
        Ok(Self { psi, phi, hbar })
    }
}

/// `χ(q_i, p_j) = ψ(q_i) φ*(p_j) e^{−ip_j q_i/ħ} (2πħ)^{-1/2}`, normalised
/// so that the field integrates to 1 when `φ` is the transform of `ψ`.
pub fn assemble_separable(sol: &SeparableSolution, qgrid: UniformGrid, pgrid: UniformGrid) -> Result<DistributionField> {
    if sol.psi.grid != qgrid || sol.phi.grid != pgrid {
        return Err(Error::GridMismatch("separable solution sampled on different grids".into()));
    }
    if sol.psi.hbar != sol.hbar || sol.phi.hbar != sol.hbar {
        return Err(Error::InvalidInput("inconsistent hbar in separable solution".into()));
    }
    for (what, norm) in [("psi", sol.psi.norm()), ("phi", sol.phi.norm())] {
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!("{what} has norm {norm}, expected 1")));
        }
    }
    let scale = (2.0 * PI * sol.hbar).sqrt().recip();
    let values = Array2::from_shape_fn((qgrid.count, pgrid.count), |(i, j)| {
        let (q, p) = (qgrid.point(i), pgrid.point(j));
        sol.psi.samples[i] * sol.phi.samples[j].conj() * C64::cis(-p * q / sol.hbar) * scale
    });
    DistributionField::new(qgrid, pgrid, values, 0.0, sol.hbar)
}
