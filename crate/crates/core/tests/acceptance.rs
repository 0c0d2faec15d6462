//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::{numeric_symbol_value, weyl_symbol, KernelTransform};
use num_complex::Complex64 as C64;
use phasespace::distributions::{assemble_separable, compute_distribution, compute_distribution_shifted, wigner};
use phasespace::eps_dynamics::{
    apply_generator, build_generator, evolve, evolve_observed, separable_chi, separable_evolution, HamiltonianPolynomial,
};
use phasespace::expectation::{certify, expectation_report, Pairing};
use phasespace::io::to_json_string;
use phasespace::operator_algebra::{alpha_quantize, alpha_symbol, OperatorExpr};
use phasespace::states_grids::{
    coherent_state, density_from_pure, oscillator_eigenstate, to_momentum, DensityMatrix, UniformGrid,
};
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn monomial(m: u32, n: u32, hbar: f64) -> OperatorExpr {
    OperatorExpr::monomial(C64::new(1.0, 0.0), m, n, hbar).unwrap()
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

fn ordering_rule() -> Outcome {
    let hbar = 0.7;
    let kernel = KernelTransform::new(3, hbar);
    let points = [(0.7, -0.4), (-0.3, 1.1), (1.2, 0.9)];
    let (mut worst_rel, mut worst_weyl, mut standard_exact) = (0.0f64, 0.0f64, true);
    for m in 0..=3 {
        for n in 0..=3 {
            let op = monomial(m, n, hbar);
            for alpha in [-1.0, -0.5, 0.0, 0.5] {
                let sym = alpha_symbol(&op, alpha);
                for (q, p) in points {
                    let closed = sym.evaluate(q, p);
                    let scale: f64 = sym
                        .flat_terms()
                        .iter()
                        .map(|(a, b, h, c)| c.norm() * q.abs().powi(*a as i32) * p.abs().powi(*b as i32) * hbar.powi(*h as i32))
                        .sum();
                    worst_rel = worst_rel.max((closed - kernel.symbol(m, n, alpha, q, p)).norm() / scale);
                }
            }
            let weyl = weyl_symbol(&op);
            let sym = alpha_symbol(&op, -0.5);
            for (q, p) in points {
                worst_weyl = worst_weyl.max((sym.evaluate(q, p) - numeric_symbol_value(&weyl, q, p)).norm());
            }
            standard_exact &= alpha_symbol(&op, 0.0).flat_terms() == vec![(m, n, 0, C64::new(1.0, 0.0))];
        }
    }
    Outcome {
        pass: worst_rel < 1e-6 && worst_weyl < 1e-12 && standard_exact,
        detail: format!(
            "integral transform max rel err {worst_rel:.2e} (tol 1e-6), weyl max err {worst_weyl:.2e}, standard order exact: {standard_exact}"
        ),
    }
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let hbar = 1.0;
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..20 {
        let alpha: f64 = rng.random_range(-2.0..1.0);
        let mut ops: Vec<OperatorExpr> = Vec::new();
        for m in 0..=6u32 {
            for n in 0..=(6 - m) {
                ops.push(monomial(m, n, hbar));
            }
        }
        let mut mixed = OperatorExpr::zero(hbar).unwrap();
        for _ in 0..6 {
            let (m, n) = (rng.random_range(0..=3u32), rng.random_range(0..=3u32));
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            mixed = mixed.add(&OperatorExpr::monomial(c, m, n, hbar).unwrap()).unwrap();
        }
        ops.push(mixed);
        for op in &ops {
            worst = worst.max(alpha_quantize(&alpha_symbol(op, alpha), alpha).max_abs_diff(op));
            count += 1;
        }
    }
    Outcome { pass: worst < 1e-12, detail: format!("{count} cases over 20 alphas, max coefficient err {worst:.2e} (tol 1e-12)") }
}

fn family_identities() -> Outcome {
    let hbar = 1.0;
    let grid = UniformGrid::symmetric(256, 10.0).unwrap();
    let pgrid = grid.reciprocal(hbar);
    let states = [
        oscillator_eigenstate(0, grid, hbar).unwrap(),
        oscillator_eigenstate(1, grid, hbar).unwrap(),
        coherent_state(1.0, 2.0, grid, hbar).unwrap(),
    ];
    let (mut routes, mut marg, mut norm, mut reality, mut slowest) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for psi in &states {
        let phi = to_momentum(psi, pgrid).unwrap();
        let rho = density_from_pure(psi).unwrap();
        for alpha in [-1.0, -0.5, -0.25, 0.0, 0.5] {
            let start = Instant::now();
            let direct = compute_distribution(&rho, alpha, pgrid).unwrap();
            let unitary = compute_distribution_shifted(&rho, alpha, pgrid).unwrap();
            slowest = slowest.max(start.elapsed().as_secs_f64());
            routes = routes.max(direct.max_abs_diff(&unitary));
            norm = norm.max((direct.normalization() - C64::new(1.0, 0.0)).norm());
            let m = direct.marginals();
            marg = marg.max(max_abs(m.position.iter().zip(psi.samples.iter()).map(|(a, b)| (a - b.norm_sqr()).abs())));
            marg = marg.max(max_abs(m.momentum.iter().zip(phi.samples.iter()).map(|(a, b)| (a - b.norm_sqr()).abs())));
            if alpha == -0.5 {
                reality = reality.max(direct.max_imag());
            }
        }
    }
    let w1 = wigner(&density_from_pure(&states[1]).unwrap(), pgrid).unwrap();
    let origin = w1.values[[128, 128]].re;
    let neg = (origin + 1.0 / (PI * hbar)).abs();
    Outcome {
        pass: routes < 1e-8 && marg < 1e-6 && norm < 1e-6 && reality < 1e-8 && neg < 1e-4 && slowest < 30.0,
        detail: format!(
            "routes {routes:.1e} (1e-8), marginals {marg:.1e} (1e-6), normalization {norm:.1e} (1e-6), wigner |Im| {reality:.1e} (1e-8), psi1 origin err {neg:.1e} (1e-4), slowest alpha {slowest:.1}s (30s)"
        ),
    }
}

fn expectation_equivalence() -> Outcome {
    let hbar = 1.0;
    let grid = UniformGrid::symmetric(256, 8.0).unwrap();
    let pgrid = grid.reciprocal(hbar);
    let states: Vec<(&str, DensityMatrix)> = vec![
        ("psi0", density_from_pure(&oscillator_eigenstate(0, grid, hbar).unwrap()).unwrap()),
        ("psi1", density_from_pure(&oscillator_eigenstate(1, grid, hbar).unwrap()).unwrap()),
        ("coherent(1,2)", density_from_pure(&coherent_state(1.0, 2.0, grid, hbar).unwrap()).unwrap()),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for alpha in [-1.0, -0.5, 0.0] {
        let mut reports = Vec::new();
        for (_, rho) in &states {
            for total in 0..=4u32 {
                for m in 0..=total {
                    reports.push(expectation_report(rho, &monomial(m, total - m, hbar), alpha, pgrid).unwrap());
                }
            }
        }
        let cert = certify(alpha, &reports, 1e-5);
        pass &= cert.uncovered.is_empty();
        if alpha == -0.5 {
            pass &= cert.certified.contains(&Pairing::Plain);
        }
        lines.push(to_json_string(&cert).unwrap().trim_end().to_string());
    }
    let mut detail = "3 alphas x 3 states x 15 monomials, tol 1e-5; certificates:".to_string();
    for l in lines {
        detail.push_str("\n    ");
        detail.push_str(&l);
    }
    Outcome { pass, detail }
}

fn dynamics() -> (Outcome, f64) {
    let hbar = 1.0;
    let qg = UniformGrid::symmetric(128, 10.0).unwrap();
    let pg = qg;
    let osc = HamiltonianPolynomial::oscillator(hbar).unwrap();

    let gen = build_generator(&osc);
    let mut stationary = 0.0f64;
    for n in 0..3 {
        let chi = separable_chi(&oscillator_eigenstate(n, qg, hbar).unwrap(), pg).unwrap();
        let d = apply_generator(&gen, &chi).unwrap();
        stationary = stationary.max(d.field.l2_norm() / chi.field.l2_norm());
    }

    let psi = coherent_state(1.0, 0.0, qg, hbar).unwrap();
    let chi0 = separable_chi(&psi, pg).unwrap();
    let dt = 2.0 * PI / 2000.0;
    let (mut centroid_err, mut pointwise) = (0.0f64, 0.0f64);
    let start = Instant::now();
    let run = evolve_observed(&chi0, &osc, dt, 2000, |step, chi| {
        if step % 250 == 0 {
            let t = step as f64 * dt;
            let (q, p) = chi.field.centroid();
            centroid_err = centroid_err.max((q - t.cos()).abs()).max((p + t.sin()).abs());
            let sol = separable_evolution(&psi, pg, &osc, dt, step)?;
            pointwise = pointwise.max(chi.field.max_abs_diff(&assemble_separable(&sol, qg, pg)?));
        }
        Ok(())
    })
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let final_err = {
        let sol = separable_evolution(&psi, pg, &osc, dt, 2000).unwrap();
        run.chi.field.max_abs_diff(&assemble_separable(&sol, qg, pg).unwrap())
    };

    let free = HamiltonianPolynomial::free_particle(hbar).unwrap();
    let chi_free = separable_chi(&oscillator_eigenstate(0, qg, hbar).unwrap(), pg).unwrap();
    let mut spread = 0.0f64;
    evolve_observed(&chi_free, &free, 0.005, 200, |step, chi| {
        if step % 20 == 0 {
            let m = chi.field.marginals().position;
            let var: f64 = m.iter().enumerate().map(|(k, w)| w * qg.point(k).powi(2)).sum::<f64>() * qg.step;
            let mean: f64 = m.iter().enumerate().map(|(k, w)| w * qg.point(k)).sum::<f64>() * qg.step;
            spread = spread.max((var - mean * mean - (0.5 + chi.time * chi.time / 2.0)).abs());
        }
        Ok(())
    })
    .unwrap();

    let outcome = Outcome {
        pass: stationary < 1e-6 && centroid_err < 1e-3 && elapsed < 120.0 && pointwise < 1e-3 && spread < 1e-3,
        detail: format!(
            "(a) stationarity {stationary:.1e} (1e-6); (b) centroid err {centroid_err:.1e} (1e-3) in {elapsed:.1}s (120s); (c) pointwise vs separable {pointwise:.1e} (1e-3); (d) free variance err {spread:.1e} (1e-3)"
        ),
    };
    (outcome, final_err)
}

fn gaussian_wigner_error(count: usize) -> f64 {
    let grid = UniformGrid::symmetric(count, 8.0).unwrap();
    let pgrid = grid.reciprocal(1.0);
    let w = wigner(&density_from_pure(&oscillator_eigenstate(0, grid, 1.0).unwrap()).unwrap(), pgrid).unwrap();
    max_abs(w.values.indexed_iter().map(|((i, j), v)| {
        let (q, p) = (grid.point(i), pgrid.point(j));
        (v - C64::new((-(q * q + p * p)).exp() / PI, 0.0)).norm()
    }))
}

fn convergence(coarse_err: f64) -> Outcome {
    let qg = UniformGrid::symmetric(128, 10.0).unwrap();
    let osc = HamiltonianPolynomial::oscillator(1.0).unwrap();
    let psi = coherent_state(1.0, 0.0, qg, 1.0).unwrap();
    let chi0 = separable_chi(&psi, qg).unwrap();
    let dt = 2.0 * PI / 4000.0;
    let fine = evolve(&chi0, &osc, dt, 4000).unwrap();
    let sol = separable_evolution(&psi, qg, &osc, dt, 4000).unwrap();
    let fine_err = fine.chi.field.max_abs_diff(&assemble_separable(&sol, qg, qg).unwrap());
    let time_ratio = coarse_err / fine_err;

    let counts = [16, 32, 64, 128, 256];
    let errors: Vec<f64> = counts.iter().map(|&n| gaussian_wigner_error(n)).collect();
    let grid_ok = errors.windows(2).all(|w| w[0] / w[1] >= 10.0 || w[1] <= 1e-8);
    let series: Vec<String> = counts.iter().zip(&errors).map(|(n, e)| format!("N={n}: {e:.1e}")).collect();
    Outcome {
        pass: time_ratio >= 12.0 && grid_ok,
        detail: format!(
            "dt halving ratio {time_ratio:.1} ({coarse_err:.2e} -> {fine_err:.2e}, need >= 12); grid series {} (ratio >= 10 or <= 1e-8)",
            series.join(", ")
        ),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, name: &str, o: Outcome| {
        all &= o.pass;
        println!("[{}] criterion {n} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, "ordering rule", ordering_rule());
    report(2, "round-trip quantization", round_trip());
    report(3, "distribution family", family_identities());
    report(4, "expectation equivalence", expectation_equivalence());
    let (dyn_outcome, coarse_err) = dynamics();
    report(5, "eps dynamics", dyn_outcome);
    report(6, "convergence orders", convergence(coarse_err));
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
