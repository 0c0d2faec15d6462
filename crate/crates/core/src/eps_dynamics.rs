//! Extended-phase-space dynamics.
//!
//! With `π_q = −iħ∂_q` and `π_p = −iħ∂_p`, the extended Hamiltonian
//! `ℋ = H(p + π_q, q) − H(p, q + π_p)` of a polynomial `H` is the finite
//! Taylor series
//!
//! ```text
//! ℋ = Σ_{n≥1} (−iħ)ⁿ/n! [ ∂ⁿH/∂pⁿ ∂ⁿ/∂qⁿ − ∂ⁿH/∂qⁿ ∂ⁿ/∂pⁿ ]
//! ```
//!
//! and χ(q, p, t) obeys `iħ ∂χ/∂t = ℋχ`. Fields live on periodic grids and
//! must decay at the boundary; derivatives are spectral and time stepping is
//! classical RK4.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64 as C64;

use crate::distributions::{assemble_separable, DistributionField, SeparableSolution};
use crate::fourier::{derivative_multipliers, FftPair};
use crate::operator_algebra::PhaseSpaceSymbol;
use crate::states_grids::{to_momentum, MomentumState, PositionState, UniformGrid};
use crate::{Error, Result};

/// Relative amplitude allowed on the outermost grid lines.
pub const BOUNDARY_DECAY: f64 = 1e-8;

/// Norm growth factor treated as a blow-up.
const GROWTH_LIMIT: f64 = 10.0;

/// Stability limit of RK4 on the imaginary axis.
const RK4_IMAGINARY_LIMIT: f64 = 2.0 * SQRT_2;

/// Real polynomial in commuting `q`, `p`, keyed by `(qpow, ppow)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Polynomial {
    pub fn new(terms: impl IntoIterator<Item = (f64, u32, u32)>) -> Result<Self> {
        let mut poly = Polynomial::default();
        for (c, a, b) in terms {
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient {c}")));
            }
            *poly.terms.entry((a, b)).or_insert(0.0) += c;
        }
        poly.terms.retain(|_, c| *c != 0.0);
        Ok(poly)
    }

    /// `(coeff, qpow, ppow)` in ascending power order.
    pub fn terms(&self) -> impl Iterator<Item = (f64, u32, u32)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (c, a, b))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn evaluate(&self, q: f64, p: f64) -> f64 {
        self.terms().map(|(c, a, b)| c * q.powi(a as i32) * p.powi(b as i32)).sum()
    }

    fn derivative(&self, order: u32, wrt_p: bool) -> Polynomial {
        let mut out = Polynomial::default();
        for (c, a, b) in self.terms() {
            let power = if wrt_p { b } else { a };
            if power < order {
                continue;
            }
            let factor: f64 = (power - order + 1..=power).map(f64::from).product();
            let key = if wrt_p { (a, b - order) } else { (a - order, b) };
            out.terms.insert(key, c * factor);
        }
        out
    }

    /// `∂ⁿ/∂qⁿ`
    pub fn derivative_q(&self, order: u32) -> Polynomial {
        self.derivative(order, false)
    }

    /// `∂ⁿ/∂pⁿ`
    pub fn derivative_p(&self, order: u32) -> Polynomial {
        self.derivative(order, true)
    }

    fn on_grid(&self, qgrid: &UniformGrid, pgrid: &UniformGrid) -> Array2<f64> {
        let qs = qgrid.points();
        let ps = pgrid.points();
        Array2::from_shape_fn((qgrid.count, pgrid.count), |(i, j)| self.evaluate(qs[i], ps[j]))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&(a, b), c)| {
                let mut s = format!("{c}");
                for (name, pow) in [("p", b), ("q", a)] {
                    match pow {
                        0 => {}
                        1 => s.push_str(&format!(" {name}")),
                        _ => s.push_str(&format!(" {name}^{pow}")),
                    }
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// A c-number Hamiltonian `H(q, p)` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPolynomial {
    pub poly: Polynomial,
    pub hbar: f64,
}

impl HamiltonianPolynomial {
    pub fn new(terms: impl IntoIterator<Item = (f64, u32, u32)>, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { poly: Polynomial::new(terms)?, hbar })
    }

    /// `p²/2 + q²/2`
    pub fn oscillator(hbar: f64) -> Result<Self> {
        Self::new([(0.5, 0, 2), (0.5, 2, 0)], hbar)
    }

    /// `p²/2`
    pub fn free_particle(hbar: f64) -> Result<Self> {
        Self::new([(0.5, 0, 2)], hbar)
    }

    /// From a parsed phase-space function; coefficients are evaluated at
    /// the symbol's ħ and must be real.
    pub fn from_symbol(sym: &PhaseSpaceSymbol) -> Result<Self> {
        let mut terms = Vec::new();
        for (a, b, series) in sym.terms() {
            let c = series.evaluate(sym.hbar());
            if c.im.abs() > 1e-14 * c.re.abs().max(1.0) {
                return Err(Error::InvalidInput(format!("hamiltonian coefficient {c} of q^{a} p^{b} is not real")));
            }
            terms.push((c.re, a, b));
        }
        Self::new(terms, sym.hbar())
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn negated(&self) -> Self {
        Self {
            poly: Polynomial { terms: self.poly.terms.iter().map(|(k, c)| (*k, -c)).collect() },
            hbar: self.hbar,
        }
    }

    /// Splits `H = T(p) + V(q)`; the constant goes into `V`. `None` if a
    /// term mixes `q` and `p`.
    pub fn separable_parts(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let deg = self.degree() as usize;
        let mut kinetic = vec![0.0; deg + 1];
        let mut potential = vec![0.0; deg + 1];
        for (c, a, b) in self.poly.terms() {
            match (a, b) {
                (a, 0) => potential[a as usize] += c,
                (0, b) => kinetic[b as usize] += c,
                _ => return None,
            }
        }
        Some((kinetic, potential))
    }
}

/// `scalar · coefficient(q, p) · ∂^dq_order/∂qⁿ ∂^dp_order/∂pⁿ`
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorTerm {
    pub coefficient: Polynomial,
    pub dq_order: u32,
    pub dp_order: u32,
    pub scalar: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EPSGenerator {
    pub terms: Vec<GeneratorTerm>,
    pub hbar: f64,
}

impl EPSGenerator {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }
}

/// The terminating series for `ℋ`: `∂_q`-terms first, then `∂_p`-terms,
/// each by ascending order.
pub fn build_generator(h: &HamiltonianPolynomial) -> EPSGenerator {
    let mut terms = Vec::new();
    let mut factorial = 1.0;
    let mut scalars = Vec::new();
    for n in 1..=h.degree() {
        factorial *= n as f64;
        scalars.push(C64::new(0.0, -h.hbar).powu(n) / factorial);
    }
    for (idx, s) in scalars.iter().enumerate() {
        let n = idx as u32 + 1;
        let coefficient = h.poly.derivative_p(n);
        if !coefficient.is_zero() {
            terms.push(GeneratorTerm { coefficient, dq_order: n, dp_order: 0, scalar: *s });
        }
    }
    for (idx, s) in scalars.iter().enumerate() {
        let n = idx as u32 + 1;
        let coefficient = h.poly.derivative_q(n);
        if !coefficient.is_zero() {
            terms.push(GeneratorTerm { coefficient, dq_order: 0, dp_order: n, scalar: -*s });
        }
    }
    EPSGenerator { terms, hbar: h.hbar }
}

/// χ on the phase-space grid at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiField {
    pub field: DistributionField,
    pub time: f64,
}

impl ChiField {
    pub fn new(field: DistributionField, time: f64) -> Self {
        Self { field, time }
    }

    fn with_values(&self, values: Array2<C64>) -> ChiField {
        let mut out = self.clone();
        out.field.values = values;
        out
    }
}

/// `ℋ` bound to a pair of grids, with coefficient arrays precomputed.
pub struct DiscreteGenerator {
    qgrid: UniformGrid,
    pgrid: UniformGrid,
    hbar: f64,
    /// `(scalar · coefficient on grid, axis, order)`
    terms: Vec<(Array2<C64>, Axis, u32)>,
    q_fft: FftPair,
    p_fft: FftPair,
    q_multipliers: Vec<Vec<C64>>,
    p_multipliers: Vec<Vec<C64>>,
}

impl DiscreteGenerator {
    pub fn new(generator: &EPSGenerator, qgrid: UniformGrid, pgrid: UniformGrid) -> Self {
        let terms: Vec<(Array2<C64>, Axis, u32)> = generator
            .terms
            .iter()
            .map(|t| {
                let values = t.coefficient.on_grid(&qgrid, &pgrid).mapv(|c| t.scalar * c);
                if t.dq_order > 0 {
                    (values, Axis(0), t.dq_order)
                } else {
                    (values, Axis(1), t.dp_order)
                }
            })
            .collect();
        let max_order = |axis: Axis| terms.iter().filter(|t| t.1 == axis).map(|t| t.2).max().unwrap_or(0);
        let q_multipliers = (1..=max_order(Axis(0))).map(|k| derivative_multipliers(qgrid.count, qgrid.step, k)).collect();
        let p_multipliers = (1..=max_order(Axis(1))).map(|k| derivative_multipliers(pgrid.count, pgrid.step, k)).collect();
        Self {
            qgrid,
            pgrid,
            hbar: generator.hbar,
            terms,
            q_fft: FftPair::new(qgrid.count),
            p_fft: FftPair::new(pgrid.count),
            q_multipliers,
            p_multipliers,
        }
    }

    fn check_field(&self, chi: &ChiField) -> Result<()> {
        let f = &chi.field;
        if f.qgrid != self.qgrid || f.pgrid != self.pgrid {
            return Err(Error::GridMismatch("field grids differ from the generator grids".into()));
        }
        if f.hbar != self.hbar {
            return Err(Error::GridMismatch(format!("field hbar {} differs from hamiltonian hbar {}", f.hbar, self.hbar)));
        }
        Ok(())
    }

    /// All derivatives of `values` up to the needed orders along `axis`.
    fn derivatives(&self, values: &Array2<C64>, axis: Axis) -> Vec<Array2<C64>> {
        let (fft, multipliers) = match axis.index() {
            0 => (&self.q_fft, &self.q_multipliers),
            _ => (&self.p_fft, &self.p_multipliers),
        };
        let mut out = vec![Array2::<C64>::zeros(values.raw_dim()); multipliers.len()];
        if multipliers.is_empty() {
            return out;
        }
        let len = values.len_of(axis);
        let mut spectrum = vec![C64::default(); len];
        let mut buffer = vec![C64::default(); len];
        for (lane_idx, lane) in values.lanes(axis).into_iter().enumerate() {
            spectrum.iter_mut().zip(lane).for_each(|(d, s)| *d = *s);
            fft.forward.process(&mut spectrum);
            for (order_idx, mult) in multipliers.iter().enumerate() {
                for ((b, s), m) in buffer.iter_mut().zip(&spectrum).zip(mult) {
                    *b = s * m / len as f64;
                }
                fft.inverse.process(&mut buffer);
                let mut target = out[order_idx].index_axis_mut(Axis(1 - axis.index()), lane_idx);
                target.iter_mut().zip(&buffer).for_each(|(d, s)| *d = *s);
            }
        }
        out
    }

    /// `ℋχ` without the boundary check.
    fn apply_raw(&self, values: &Array2<C64>) -> Array2<C64> {
        let dq = self.derivatives(values, Axis(0));
        let dp = self.derivatives(values, Axis(1));
        let mut out = Array2::<C64>::zeros(values.raw_dim());
        for (coeff, axis, order) in &self.terms {
            let d = if axis.index() == 0 { &dq } else { &dp };
            out.zip_mut_with(&(coeff * &d[*order as usize - 1]), |o, v| *o += v);
        }
        out
    }

    /// `ℋχ`; fails if χ does not decay at the boundary.
    pub fn apply_hamiltonian(&self, chi: &ChiField) -> Result<ChiField> {
        self.check_field(chi)?;
        check_boundary_decay(&chi.field)?;
        Ok(chi.with_values(self.apply_raw(&chi.field.values)))
    }

    /// `dχ/dt = ℋχ/(iħ)`.
    pub fn time_derivative(&self, chi: &ChiField) -> Result<ChiField> {
        let mut out = self.apply_hamiltonian(chi)?;
        let factor = C64::new(0.0, -1.0 / self.hbar);
        out.field.values.mapv_inplace(|v| v * factor);
        Ok(out)
    }

    /// Frozen-coefficient bound on the spectral radius of `ℋ/(iħ)`: for
    /// each axis the maximum over grid points and wavenumbers of the
    /// symbol magnitude, summed over the two axes.
    pub fn spectral_radius(&self) -> f64 {
        let mut radius = 0.0;
        for (axis, multipliers) in [(Axis(0), &self.q_multipliers), (Axis(1), &self.p_multipliers)] {
            let terms: Vec<_> = self.terms.iter().filter(|t| t.1 == axis).collect();
            if terms.is_empty() {
                continue;
            }
            let mut worst: f64 = 0.0;
            for ((i, j), _) in terms[0].0.indexed_iter() {
                for (k, _) in multipliers[0].iter().enumerate() {
                    let s: C64 = terms.iter().map(|(c, _, order)| c[[i, j]] * multipliers[*order as usize - 1][k]).sum();
                    worst = worst.max(s.norm());
                }
            }
            radius += worst / self.hbar;
        }
        radius
    }

    /// Largest RK4-stable step according to [`Self::spectral_radius`].
    pub fn max_stable_dt(&self) -> f64 {
        let r = self.spectral_radius();
        if r == 0.0 {
            f64::INFINITY
        } else {
            RK4_IMAGINARY_LIMIT / r
        }
    }
}

/// Fails unless every boundary sample is below [`BOUNDARY_DECAY`] times
/// the field maximum.
pub fn check_boundary_decay(field: &DistributionField) -> Result<()> {
    let v = &field.values;
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let (n, m) = v.dim();
    let edge = [v.row(0), v.row(n - 1), v.column(0), v.column(m - 1)]
        .iter()
        .flat_map(|lane| lane.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    if edge > BOUNDARY_DECAY * peak {
        return Err(Error::DomainTruncation(format!(
            "field reaches {:.3e} of its peak at the grid boundary (limit {BOUNDARY_DECAY:e})",
            edge / peak
        )));
    }
    Ok(())
}

/// `dχ/dt = ℋχ/(iħ)` for a single application.
pub fn apply_generator(generator: &EPSGenerator, chi: &ChiField) -> Result<ChiField> {
    DiscreteGenerator::new(generator, chi.field.qgrid, chi.field.pgrid).time_derivative(chi)
}

/// One entry of the per-step normalization diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRecord {
    pub step: usize,
    pub time: f64,
    /// `ΔqΔp ΣΣ χ`
    pub normalization: C64,
    pub l2: f64,
}

impl NormRecord {
    fn of(step: usize, chi: &ChiField) -> Self {
        NormRecord { step, time: chi.time, normalization: chi.field.normalization(), l2: chi.field.l2_norm() }
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub chi: ChiField,
    /// One record per step, including step 0.
    pub norm_log: Vec<NormRecord>,
}

impl Evolution {
    /// Largest `|N(t) − N(0)|` of the normalization.
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.norm_log[0].normalization;
        self.norm_log.iter().map(|r| (r.normalization - n0).norm()).fold(0.0, f64::max)
    }
}

/// RK4 propagation for `steps` steps of size `dt`.
pub fn evolve(chi0: &ChiField, h: &HamiltonianPolynomial, dt: f64, steps: usize) -> Result<Evolution> {
    evolve_observed(chi0, h, dt, steps, |_, _| Ok(()))
}

/// As [`evolve`], calling `observer(step, χ)` after validation for step 0
/// and after every completed step.
pub fn evolve_observed(
    chi0: &ChiField,
    h: &HamiltonianPolynomial,
    dt: f64,
    steps: usize,
    mut observer: impl FnMut(usize, &ChiField) -> Result<()>,
) -> Result<Evolution> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let gen = DiscreteGenerator::new(&build_generator(h), chi0.field.qgrid, chi0.field.pgrid);
    gen.check_field(chi0)?;
    check_boundary_decay(&chi0.field)?;
    let limit = gen.max_stable_dt();
    if dt > limit {
        return Err(Error::Stability { dt, suggested: limit });
    }

    let factor = C64::new(0.0, -1.0 / gen.hbar);
    let rhs = |v: &Array2<C64>| gen.apply_raw(v).mapv(|z| z * factor);
    let mut chi = chi0.clone();
    let l2_0 = chi0.field.l2_norm();
    let mut log = Vec::with_capacity(steps + 1);
    log.push(NormRecord::of(0, &chi));
    observer(0, &chi)?;
    for step in 1..=steps {
        let y = &chi.field.values;
        let k1 = rhs(y);
        let k2 = rhs(&(y + &(&k1 * C64::from(dt / 2.0))));
        let k3 = rhs(&(y + &(&k2 * C64::from(dt / 2.0))));
        let k4 = rhs(&(y + &(&k3 * C64::from(dt))));
        let incr = (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(dt / 6.0);
        chi.field.values += &incr;
        chi.time = chi0.time + step as f64 * dt;
        let record = NormRecord::of(step, &chi);
        if !(record.l2.is_finite() && record.l2 <= GROWTH_LIMIT * l2_0) {
            return Err(Error::Stability { dt, suggested: (limit / 2.0).min(dt / 2.0) });
        }
        check_boundary_decay(&chi.field)?;
        log.push(record);
        observer(step, &chi)?;
    }
    Ok(Evolution { chi, norm_log: log })
}

/// Exact propagator `exp(−iHt/ħ)` of a grid Hamiltonian given as a
/// spectral multiplier plus a diagonal.
fn propagate(spectral: &[f64], diagonal: &[f64], samples: &Array1<C64>, time: f64, hbar: f64) -> Array1<C64> {
    let n = samples.len();
    let fft = FftPair::new(n);
    // Columns of the spectral operator F⁻¹ diag(s) F applied to unit vectors.
    let mut h = DMatrix::<C64>::zeros(n, n);
    let mut column = vec![C64::default(); n];
    for j in 0..n {
        column.iter_mut().for_each(|c| *c = C64::default());
        column[j] = C64::new(1.0, 0.0);
        fft.forward.process(&mut column);
        column.iter_mut().zip(spectral).for_each(|(c, s)| *c *= s / n as f64);
        fft.inverse.process(&mut column);
        for i in 0..n {
            h[(i, j)] = column[i];
        }
        h[(j, j)] += diagonal[j];
    }
    let h = (&h + h.adjoint()) * C64::from(0.5);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let x = nalgebra::DVector::from_iterator(n, samples.iter().copied());
    let mut coeffs = v.adjoint() * x;
    for (c, e) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= C64::cis(-e * time / hbar);
    }
    let y = v * coeffs;
    Array1::from_iter(y.iter().copied())
}

/// Evaluates `Σ c_k x^k` with `x = scale · (spectral derivative)` turned
/// into a multiplier on `grid`: `Σ c_k scale^k (iν)^k`.
fn operator_multiplier(coeffs: &[f64], grid: &UniformGrid, scale: C64) -> Vec<f64> {
    let mut total = vec![C64::default(); grid.count];
    for (k, c) in coeffs.iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        let d = derivative_multipliers(grid.count, grid.step, k as u32);
        let s = scale.powu(k as u32) * *c;
        total.iter_mut().zip(d).for_each(|(t, d)| *t += s * d);
    }
    total.into_iter().map(|z| z.re).collect()
}

fn polynomial_1d(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Independent q- and p-representation Schrödinger evolutions of `psi0`
/// for a separable `H = T(p) + V(q)`, to `t = steps·dt`.
///
/// In the q-representation `p̂ = −iħ∂_q`; in the p-representation
/// `q̂ = iħ∂_p`. Each propagator is exact for its grid Hamiltonian.
pub fn separable_evolution(
    psi0: &PositionState,
    pgrid: UniformGrid,
    h: &HamiltonianPolynomial,
    dt: f64,
    steps: usize,
) -> Result<SeparableSolution> {
    let (kinetic, potential) = h
        .separable_parts()
        .ok_or_else(|| Error::UnsupportedHamiltonian(format!("{} mixes q and p", h.poly)))?;
    if psi0.hbar != h.hbar {
        return Err(Error::GridMismatch(format!("state hbar {} differs from hamiltonian hbar {}", psi0.hbar, h.hbar)));
    }
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidInput(format!("dt must be non-negative, got {dt}")));
    }
    let time = dt * steps as f64;
    let phi0 = to_momentum(psi0, pgrid)?;

    let qgrid = psi0.grid;
    let q_spectral = operator_multiplier(&kinetic, &qgrid, C64::new(0.0, -h.hbar));
    let q_diagonal: Vec<f64> = qgrid.points().iter().map(|q| polynomial_1d(&potential, *q)).collect();
    let psi = propagate(&q_spectral, &q_diagonal, &psi0.samples, time, h.hbar);

    let p_spectral = operator_multiplier(&potential, &pgrid, C64::new(0.0, h.hbar));
    let p_diagonal: Vec<f64> = pgrid.points().iter().map(|p| polynomial_1d(&kinetic, *p)).collect();
    let phi = propagate(&p_spectral, &p_diagonal, &phi0.samples, time, h.hbar);

    SeparableSolution::new(
        PositionState::new(qgrid, psi, h.hbar)?,
        MomentumState::new(pgrid, phi, h.hbar)?,
    )
}

/// χ₀ assembled from `psi` and its own momentum transform.
pub fn separable_chi(psi: &PositionState, pgrid: UniformGrid) -> Result<ChiField> {
    let sol = SeparableSolution::new(psi.clone(), to_momentum(psi, pgrid)?)?;
    Ok(ChiField::new(assemble_separable(&sol, psi.grid, pgrid)?, 0.0))
}
