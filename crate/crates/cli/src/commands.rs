use std::fs;
use std::path::Path;

use num_complex::Complex64;
use phasespace::distributions::{compute_distribution, DistributionField};
use phasespace::eps_dynamics::{
    build_generator, evolve_observed, separable_chi, DiscreteGenerator, HamiltonianPolynomial,
};
use phasespace::expectation::expectation_report;
use phasespace::io::{read_position_state, write_field, write_json};
use phasespace::operator_algebra::{alpha_symbol, parse_operator, parse_symbol};
use phasespace::states_grids::{
    coherent_state, density_from_pure, oscillator_eigenstate, to_momentum, PositionState, UniformGrid,
};
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, StateSpec};
use crate::CliError;

fn load_state(config: &RunConfig) -> Result<PositionState, CliError> {
    let psi = match &config.state {
        StateSpec::Oscillator(n) => oscillator_eigenstate(*n, config.qgrid.expect("q grid"), config.hbar)?,
        StateSpec::Coherent(q0, p0) => coherent_state(*q0, *p0, config.qgrid.expect("q grid"), config.hbar)?,
        StateSpec::File(path) => {
            let psi = read_position_state(path, config.hbar)?;
            if let Some(g) = config.qgrid {
                if !same_grid(&g, &psi.grid) {
                    return Err(CliError::Input(format!(
                        "{}: file grid differs from the configured q grid",
                        path.display()
                    )));
                }
            }
            psi
        }
    };
    if !psi.grid.count.is_power_of_two() {
        return Err(CliError::Input(format!("state grid has {} points, not a power of two", psi.grid.count)));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(CliError::Input(format!("state has norm {norm}, expected 1")));
    }
    Ok(psi)
}

fn same_grid(a: &UniformGrid, b: &UniformGrid) -> bool {
    a.count == b.count && (a.minimum - b.minimum).abs() <= 1e-9 * a.step && (a.step - b.step).abs() <= 1e-12 * a.step
}

fn operator_text(config: &RunConfig) -> Result<&str, CliError> {
    config.operator.as_deref().ok_or_else(|| CliError::Input("op: an operator is required".into()))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn symbol(config: &RunConfig) -> Result<(), CliError> {
    let op = parse_operator(operator_text(config)?, config.hbar)?;
    let sym = alpha_symbol(&op, config.alpha);
    let terms: Vec<Value> = sym
        .flat_terms()
        .into_iter()
        .map(|(q, p, h, c)| json!({"qpow": q, "ppow": p, "hbar_power": h, "coefficient": complex(c)}))
        .collect();
    println!("{sym}");
    prepare_out(&config.out)?;
    write_json(
        &config.out.join("symbol.json"),
        &json!({
            "alpha": config.alpha,
            "hbar": config.hbar,
            "operator": op.to_string(),
            "symbol": sym.to_string(),
            "terms": terms,
        }),
    )?;
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

fn marginal_error(actual: impl Iterator<Item = f64>, expected: impl Iterator<Item = f64>) -> f64 {
    actual.zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn distribution_checks(field: &DistributionField, psi: &PositionState, alpha: f64) -> Result<Vec<Check>, CliError> {
    let phi = to_momentum(psi, field.pgrid)?;
    let m = field.marginals();
    let mut checks = vec![
        Check { name: "normalization", value: (field.normalization() - Complex64::new(1.0, 0.0)).norm(), limit: 1e-6 },
        Check {
            name: "position marginal",
            value: marginal_error(m.position.iter().copied(), psi.samples.iter().map(|z| z.norm_sqr())),
            limit: 1e-6,
        },
        Check {
            name: "momentum marginal",
            value: marginal_error(m.momentum.iter().copied(), phi.samples.iter().map(|z| z.norm_sqr())),
            limit: 1e-6,
        },
    ];
    if alpha == -0.5 {
        checks.push(Check { name: "wigner reality", value: field.max_imag(), limit: 1e-8 });
    }
    Ok(checks)
}

pub fn distribution(config: &RunConfig) -> Result<(), CliError> {
    let psi = load_state(config)?;
    let pgrid = config.pgrid.unwrap_or_else(|| psi.grid.reciprocal(config.hbar));
    let rho = density_from_pure(&psi)?;
    let field = compute_distribution(&rho, config.alpha, pgrid)?;
    let checks = distribution_checks(&field, &psi, config.alpha)?;

    let norm = field.normalization();
    println!("normalization      {:.12} {:+.3e}i", norm.re, norm.im);
    println!("max |Im|           {:.6e}", field.max_imag());
    println!("min Re             {:.12}", field.min_real());
    for c in &checks {
        let status = if c.value <= c.limit { "ok" } else { "FAILED" };
        println!("{:<18} {:.3e} (limit {:.0e}) {status}", c.name, c.value, c.limit);
    }

    let mut extra = Map::new();
    extra.insert("config".into(), config.echo());
    extra.insert(
        "diagnostics".into(),
        json!({
            "normalization": complex(norm),
            "max_imag": field.max_imag(),
            "min_real": field.min_real(),
            "checks": checks.iter().map(|c| (c.name.to_string(), json!(c.value))).collect::<Map<_, _>>(),
        }),
    );
    prepare_out(&config.out)?;
    write_field(&config.out.join("distribution.csv"), &field, Some(&extra))?;

    let failed: Vec<&str> = checks.iter().filter(|c| c.value > c.limit).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("failed: {}", failed.join(", "))))
    }
}

pub fn expect(config: &RunConfig) -> Result<(), CliError> {
    let op = parse_operator(operator_text(config)?, config.hbar)?;
    let psi = load_state(config)?;
    let pgrid = config.pgrid.unwrap_or_else(|| psi.grid.reciprocal(config.hbar));
    let report = expectation_report(&density_from_pure(&psi)?, &op, config.alpha, pgrid)?;

    println!("operator  {}", report.operator);
    println!("alpha     {}", report.alpha);
    println!("{:<10} {:>22} {:>22} {:>12}", "", "re", "im", "|diff|");
    println!("{:<10} {:>22.15e} {:>22.15e}", "hilbert", report.hilbert.re, report.hilbert.im);
    for pairing in phasespace::expectation::Pairing::ALL {
        let v = report.value(pairing);
        println!("{:<10} {:>22.15e} {:>22.15e} {:>12.3e}", pairing.to_string(), v.re, v.im, report.discrepancy(pairing));
    }
    let certified = report.certified(config.tolerance);
    println!(
        "certified {}",
        if certified.is_empty() {
            "none".to_string()
        } else {
            certified.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
        }
    );

    let mut out = report.to_json(config.tolerance);
    out["hbar"] = json!(config.hbar);
    out["config"] = config.echo();
    prepare_out(&config.out)?;
    write_json(&config.out.join("expectation.json"), &out)?;
    if certified.is_empty() {
        return Err(CliError::Invariant(format!("no pairing reproduces the trace within {:e}", config.tolerance)));
    }
    Ok(())
}

fn q_variance(field: &DistributionField) -> f64 {
    let m = field.marginals().position;
    let dq = field.qgrid.step;
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (k, w) in m.iter().enumerate() {
        let q = field.qgrid.point(k);
        s0 += w * dq;
        s1 += w * q * dq;
        s2 += w * q * q * dq;
    }
    s2 / s0 - (s1 / s0).powi(2)
}

pub fn evolve(config: &RunConfig) -> Result<(), CliError> {
    let evo = config.evolution.as_ref().ok_or_else(|| CliError::Input("ham: an evolution block is required".into()))?;
    let h = HamiltonianPolynomial::from_symbol(&parse_symbol(&evo.hamiltonian, config.hbar)?)?;
    let psi = load_state(config)?;
    let pgrid = config.pgrid.unwrap_or(psi.grid);
    let chi0 = separable_chi(&psi, pgrid)?;
    let max_dt = DiscreteGenerator::new(&build_generator(&h), psi.grid, pgrid).max_stable_dt();

    let mut snapshots = Vec::new();
    let mut prepared = false;
    let result = evolve_observed(&chi0, &h, evo.dt, evo.steps, |step, chi| {
        if step % evo.stride != 0 && step != evo.steps {
            return Ok(());
        }
        if !prepared {
            fs::create_dir_all(&config.out)?;
            prepared = true;
        }
        let name = format!("chi_{step:06}.csv");
        let mut extra = Map::new();
        extra.insert("time".into(), json!(chi.time));
        extra.insert("step".into(), json!(step));
        extra.insert("config".into(), config.echo());
        write_field(&config.out.join(&name), &chi.field, Some(&extra))?;
        let (q, p) = chi.field.centroid();
        snapshots.push(json!({
            "step": step,
            "time": chi.time,
            "file": name,
            "centroid": [q, p],
            "q_variance": q_variance(&chi.field),
            "normalization": complex(chi.field.normalization()),
        }));
        Ok(())
    })?;

    let n0 = result.norm_log[0].normalization;
    let drift: Vec<f64> = result.norm_log.iter().map(|r| (r.normalization - n0).norm()).collect();
    let (q, p) = result.chi.field.centroid();
    println!("steps            {}", evo.steps);
    println!("final time       {}", result.chi.time);
    println!("final centroid   ({q:.9}, {p:.9})");
    println!("max norm drift   {:.3e}", result.max_norm_drift());
    write_json(
        &config.out.join("summary.json"),
        &json!({
            "config": config.echo(),
            "hamiltonian": h.poly.to_string(),
            "dt": evo.dt,
            "steps": evo.steps,
            "stride": evo.stride,
            "max_stable_dt": max_dt,
            "snapshots": snapshots,
            "norm_drift": drift,
            "final_centroid": [q, p],
        }),
    )?;
    Ok(())
}
