use std::path::Path;

use lindblad_core::algebra::is_irreducible;
use lindblad_core::certificates::{certify, CertificateWitness, CertifyOptions, ContractionCertificate, PairRate};
use lindblad_core::evolution::{contraction_envelope, observable_trajectory, PropagatorOptions, Scheme, Trajectory};
use lindblad_core::frames::PairSearch;
use lindblad_core::ladder::{c_alpha, family_scan, LadderFamily};
use lindblad_core::linalg;
use lindblad_core::operators::{self, HamiltonianSchedule, LindbladModel};
use lindblad_core::perturbation::{
    perturbed_rate, slow_drive_check, small_drive_check, time_average_check, AverageKind, BaseContraction,
    DriveCheck, PerturbedContraction, WindowLimit,
};
use lindblad_core::scenarios;
use lindblad_core::superop::{build_superoperator, fixed_points, spectral_gap};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::*;
use crate::error::CliError;
use crate::json::{self, num};
use crate::model_file::ModelFile;
use crate::spec::{parse_observable, parse_state};

struct LoadedModel {
    model: LindbladModel,
    digest: String,
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn load_model(path: &Path) -> Result<LoadedModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(path.display().to_string(), e.to_string()))?;
    let model = ModelFile::parse(&text, &path.display().to_string())?.to_model()?;
    Ok(LoadedModel { model, digest: digest(text.as_bytes()) })
}

fn report(echo: &[String], inputs: Value, results: Value, warnings: Vec<String>) -> String {
    let v = json!({
        "command": echo,
        "inputs": inputs,
        "results": results,
        "warnings": warnings,
    });
    json::to_pretty(&v)
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn f(x: f64) -> String {
    json::format_float(x)
}

fn linspace(t_end: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(CliError::input("t-end", "must be finite and >= 0"));
    }
    if samples < 2 {
        return Err(CliError::input("samples", "need at least 2"));
    }
    Ok((0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect())
}

fn is_rotating(model: &LindbladModel) -> bool {
    matches!(model.hamiltonian(), HamiltonianSchedule::PhiDrive(_))
}

/// Rotating drives default to RK4 on frequency-scaled steps without the
/// half-step control, which would triple the cost of an already fine grid.
fn propagator_options(integ: &Integration, model: &LindbladModel) -> PropagatorOptions {
    let rotating = is_rotating(model);
    let scheme = match integ.scheme {
        Some(SchemeArg::Exp) => Scheme::ExpStep,
        Some(SchemeArg::Rk4) => Scheme::Rk4,
        None if rotating => Scheme::Rk4,
        None => Scheme::ExpStep,
    };
    PropagatorOptions {
        scheme,
        dt: integ.dt.unwrap_or(if rotating { 0.05 } else { 1e-2 }),
        richardson: !integ.no_richardson && !rotating,
        ..Default::default()
    }
}

pub fn execute(cli: &Cli, echo: &[String]) -> Result<String, CliError> {
    match &cli.command {
        Command::Certify { model, restarts, seed } => {
            let loaded = load_model(model)?;
            let (results, warnings) = certificate_report(&loaded.model, *restarts, *seed)?;
            let inputs = json!({"model_sha256": loaded.digest, "restarts": restarts, "seed": seed});
            Ok(report(echo, inputs, results, warnings))
        }
        Command::Spectrum { model, time } => {
            let loaded = load_model(model)?;
            let s = build_superoperator(&loaded.model, *time)?;
            let rep = spectral_gap(&s);
            let results = json!({
                "dim": loaded.model.dim(),
                "eigenvalues": rep.eigenvalues.iter().map(|z| json::complex(*z)).collect::<Vec<_>>(),
                "lambda2": rep.lambda2.map(json::complex),
                "lambda2_partner": rep.lambda2_partner.map(json::complex),
                "gap": num(rep.gap),
                "no_nonzero_eigenvalue": rep.no_nonzero_eigenvalue,
                "zero_eigenvalue_count": rep.fixed_point_count,
                "irreducible": is_irreducible(&loaded.model, *time)?,
            });
            let inputs = json!({"model_sha256": loaded.digest, "time": num(*time)});
            Ok(report(echo, inputs, results, vec![]))
        }
        Command::FixedPoints { model, tol, time } => {
            let loaded = load_model(model)?;
            let s = build_superoperator(&loaded.model, *time)?;
            let rep = fixed_points(&s, *tol)?;
            let fps: Vec<Value> = rep
                .fixed_points
                .iter()
                .map(|p| json!({"matrix": json::matrix(&p.matrix), "unit_trace": p.unit_trace, "is_state": p.is_state}))
                .collect();
            let mut warnings = vec![];
            if rep.fixed_point_count > 1 {
                warnings.push("fixed point is not unique: the dynamics is not contractive".to_string());
            }
            let results = json!({
                "fixed_point_count": rep.fixed_point_count,
                "fixed_points": fps,
                "singular_values": json::reals(&rep.singular_values),
            });
            let inputs = json!({"model_sha256": loaded.digest, "tol": num(*tol), "time": num(*time)});
            Ok(report(echo, inputs, results, warnings))
        }
        Command::Simulate { model, t_end, initial, observable, integ } => {
            let loaded = load_model(model)?;
            let m = &loaded.model;
            let rho = parse_state(initial, m.dim())?;
            let obs = parse_observable(observable, m.dim())?;
            let grid = linspace(*t_end, integ.samples)?;
            let trs = observable_trajectory(m, &[rho], &obs, &grid, propagator_options(integ, m))?;
            let series = &trs[0].observables[0].1;
            Ok(csv(
                &["t", "expectation"],
                grid.iter().zip(series).map(|(t, y)| vec![f(*t), f(*y)]),
            ))
        }
        Command::Envelope { model, rho, sigma, t_end, integ } => {
            let loaded = load_model(model)?;
            let m = &loaded.model;
            let rho = parse_state(rho, m.dim())?;
            let sigma = parse_state(sigma, m.dim())?;
            let grid = linspace(*t_end, integ.samples)?;
            let env = contraction_envelope(m, &rho, &sigma, &grid, propagator_options(integ, m))?;
            Ok(csv(
                &["t", "trace_distance"],
                grid.iter().zip(&env).map(|(t, y)| vec![f(*t), f(*y)]),
            ))
        }
        Command::Ladder { command } => ladder(command),
        Command::Perturb { command } => perturb(echo, command),
        Command::Scenario { scenario } => run_scenario(echo, scenario),
    }
}

fn pair_rate_json(p: &PairRate, rate: f64) -> Value {
    json!({
        "value": num(p.value),
        "rate": num(rate),
        "saturated": p.saturated,
        "restarts": p.restarts,
        "grid_value": p.grid_value.map(num),
        "witness": {"u": json::vector(&p.witness.u), "v": json::vector(&p.witness.v)},
    })
}

fn certificate_json(c: &ContractionCertificate) -> Value {
    let witness = match &c.witness {
        Some(CertificateWitness::Pair(w)) => json!({
            "kind": "pair", "u": json::vector(&w.u), "v": json::vector(&w.v), "value": num(w.value),
        }),
        Some(CertificateWitness::Eigenvector(m)) => json!({"kind": "eigenvector", "matrix": json::matrix(m)}),
        None => Value::Null,
    };
    let cl = &c.classifications;
    let d = c.dim as f64;
    json!({
        "method": c.method.as_str(),
        "gamma": num(c.gamma),
        "K": num(c.k),
        "dim": c.dim,
        "witness": witness,
        "classifications": {
            "unital": cl.unital,
            "antiherm_span": cl.antiherm_span,
            "algebra_full_with_daggers": cl.algebra_full_with_daggers,
            "algebra_full_jumps_only": cl.algebra_full_jumps_only,
            "d2_contractive": cl.d2_contractive,
            "d3_sufficient": cl.d3_sufficient,
        },
        "R": pair_rate_json(&c.symmetric, c.symmetric.value),
        "r": pair_rate_json(&c.directed, d * c.directed.value),
        "mu2": {
            "value": num(c.mu2.mu2),
            "rate": num(if c.mu2.mu2 < 0.0 { -c.mu2.mu2 } else { 0.0 }),
            "multiplicity": c.mu2.multiplicity,
            "eigenvector": json::matrix(&c.mu2.eigenvector),
        },
    })
}

fn certificate_warnings(model: &LindbladModel, c: &ContractionCertificate) -> Vec<String> {
    let mut w = vec![];
    if !matches!(model.hamiltonian(), HamiltonianSchedule::Zero) {
        w.push("certificates ignore the Hamiltonian: they hold for every drive".to_string());
    }
    if model.jumps().check_traceless(operators::STRUCTURAL_TOL).is_err() {
        w.push("jumps were shifted to be traceless before certification".to_string());
    }
    if !c.symmetric.saturated || !c.directed.saturated {
        w.push("pair search did not saturate; pair rates are upper estimates".to_string());
    }
    let cl = &c.classifications;
    if c.gamma == 0.0 && cl.algebra_full_jumps_only && c.dim > 3 {
        w.push("jumps generate the full algebra, but no rate follows from that alone for d > 3".to_string());
    }
    if c.gamma == 0.0 && (cl.d2_contractive || cl.d3_sufficient) {
        w.push("structural condition holds but no quantitative certificate fired".to_string());
    }
    w
}

fn certificate_report(model: &LindbladModel, restarts: usize, seed: u64) -> Result<(Value, Vec<String>), CliError> {
    if restarts == 0 {
        return Err(CliError::input("restarts", "must be at least 1"));
    }
    let opts = CertifyOptions { search: PairSearch { restarts, seed, ..Default::default() } };
    let c = certify(model.jumps(), opts)?;
    let warnings = certificate_warnings(model, &c);
    Ok((certificate_json(&c), warnings))
}

fn ladder(cmd: &LadderCommand) -> Result<String, CliError> {
    match cmd {
        LadderCommand::Scan { family, dmax, gamma } => {
            let fam = match family {
                FamilyArg::Ho => LadderFamily::Ho,
                FamilyArg::Am => LadderFamily::Am,
                FamilyArg::Ul => LadderFamily::Ul,
            };
            let rows = family_scan(fam, *dmax, *gamma)?;
            Ok(csv(&["d", "mu2"], rows.iter().map(|r| vec![r.d.to_string(), f(r.mu2)])))
        }
        LadderCommand::CAlpha { min, max, steps } => {
            if *steps < 2 || !(min < max) || !(*min > 0.0) {
                return Err(CliError::input("c-alpha", "need 0 < min < max and steps >= 2"));
            }
            let mut rows = vec![];
            for i in 0..*steps {
                let a = min + (max - min) * i as f64 / (*steps - 1) as f64;
                let c = c_alpha(a)?;
                rows.push(vec![f(a), f(c), (c > 0.0).to_string()]);
            }
            Ok(csv(&["alpha", "c_alpha", "certified"], rows))
        }
    }
}

fn contraction_json(p: &PerturbedContraction) -> Value {
    json!({
        "K_tilde": num(p.k_tilde),
        "gamma_tilde": num(p.gamma_tilde),
        "x_star": num(p.x_star),
        "feasible": p.feasible,
        "limit": p.limit.map(|l| match l {
            WindowLimit::Vanishing => "window_to_zero",
            WindowLimit::Unbounded => "window_to_infinity",
        }),
        "unimodal": p.unimodal,
    })
}

fn drive_json(c: &DriveCheck) -> Value {
    json!({
        "threshold": num(c.threshold),
        "passed": c.passed,
        "contraction": c.contraction.as_ref().map(contraction_json),
    })
}

fn perturb(echo: &[String], cmd: &PerturbCommand) -> Result<String, CliError> {
    let base_of = |b: &BaseArgs| BaseContraction::new(b.k, b.gamma);
    let (inputs, results, warnings) = match cmd {
        PerturbCommand::Small { base, vmax } => {
            let c = small_drive_check(base_of(base)?, *vmax)?;
            (json!({"K": num(base.k), "gamma": num(base.gamma), "vmax": num(*vmax)}), drive_json(&c), vec![])
        }
        PerturbCommand::Slow { base, hdot } => {
            let c = slow_drive_check(base_of(base)?, *hdot)?;
            (json!({"K": num(base.k), "gamma": num(base.gamma), "hdot": num(*hdot)}), drive_json(&c), vec![])
        }
        PerturbCommand::Lemma { base, delta_l } => {
            let p = perturbed_rate(base_of(base)?, *delta_l)?;
            let mut w = vec![];
            if p.limit == Some(WindowLimit::Unbounded) {
                w.push("supremum reached only as the window grows without bound; base constants returned".into());
            }
            (json!({"K": num(base.k), "gamma": num(base.gamma), "delta_l": num(*delta_l)}), contraction_json(&p), w)
        }
        PerturbCommand::Average { base, avg, period, kind } => {
            let k = match kind {
                AverageKindArg::Drive => AverageKind::Drive,
                AverageKindArg::Perturbation => AverageKind::Perturbation,
            };
            let r = time_average_check(base_of(base)?, *avg, k, *period)?;
            let mut w = vec![];
            if let Some(fr) = &r.fixed_recipe {
                if fr.passed && !r.passed {
                    w.push("fixed-constant recipe passes but the window factor is not below one".into());
                }
            }
            let results = json!({
                "window_factor": num(r.window_factor),
                "passed": r.passed,
                "constants": r.constants.map(|(k, g)| json!({"K_D": num(k), "gamma_D": num(g)})),
                "fixed_recipe": r.fixed_recipe.map(|fr| json!({
                    "passed": fr.passed, "K_D": num(fr.k_d), "gamma_D": num(fr.gamma_d),
                })),
            });
            let kind = match kind {
                AverageKindArg::Drive => "drive",
                AverageKindArg::Perturbation => "perturbation",
            };
            (
                json!({"K": num(base.k), "gamma": num(base.gamma), "avg": num(*avg), "period": num(*period), "kind": kind}),
                results,
                w,
            )
        }
    };
    Ok(report(echo, inputs, results, warnings))
}

fn emit(model: &LindbladModel) -> String {
    ModelFile::from_model(model).to_canonical_json()
}

fn model_digest(model: &LindbladModel) -> String {
    digest(emit(model).as_bytes())
}

fn run_scenario(echo: &[String], sc: &Scenario) -> Result<String, CliError> {
    let iz = linalg::kron(&linalg::identity(2), &operators::named::sigma_z());
    let plus1 = parse_state("+1", 4)?;
    let plus0 = parse_state("+0", 4)?;
    match sc {
        Scenario::Ce1 { t_end, samples, emit_model, with_hamiltonian } => {
            if *emit_model {
                return Ok(emit(&scenarios::ce1(*with_hamiltonian)));
            }
            let grid = linspace(*t_end, *samples)?;
            let opts = PropagatorOptions::default();
            let initials = [plus1, plus0];
            let bare = observable_trajectory(&scenarios::ce1(false), &initials, &iz, &grid, opts)?;
            let driven = observable_trajectory(&scenarios::ce1(true), &initials, &iz, &grid, opts)?;
            let col = |trs: &[Trajectory], k: usize, i: usize| f(trs[k].observables[0].1[i]);
            Ok(csv(
                &["t", "plus1", "plus0", "plus1_driven", "plus0_driven"],
                (0..grid.len()).map(|i| {
                    vec![f(grid[i]), col(&bare, 0, i), col(&bare, 1, i), col(&driven, 0, i), col(&driven, 1, i)]
                }),
            ))
        }
        Scenario::Ce2 { r, c, t_end, samples, dt, emit_model } => {
            let model = scenarios::ce2(*r, *c)?;
            if *emit_model {
                return Ok(emit(&model));
            }
            if !scenarios::ce2_parameters_admissible(*r, *c) {
                eprintln!("warning: (r, c) violates 4 + 9/(c(r-2)) < 2*pi*r*c; the distance floor is not guaranteed");
            } else {
                eprintln!("distance floor: {}", f(scenarios::ce2_distance_floor(*r, *c)));
            }
            let grid = linspace(*t_end, *samples)?;
            let opts = PropagatorOptions { scheme: Scheme::Rk4, dt: *dt, richardson: false, ..Default::default() };
            let trs = observable_trajectory(&model, &[plus1, plus0], &iz, &grid, opts)?;
            Ok(csv(
                &["t", "trace_distance", "plus1", "plus0"],
                (0..grid.len()).map(|i| {
                    let dist = operators::trace_norm(&linalg::hermitian_part(&(&trs[0].states[i] - &trs[1].states[i])));
                    vec![f(grid[i]), f(dist), f(trs[0].observables[0].1[i]), f(trs[1].observables[0].1[i])]
                }),
            ))
        }
        Scenario::Depolarizing { gamma, seed, emit_model } => {
            let model = scenarios::depolarizing(*gamma)?;
            if *emit_model {
                return Ok(emit(&model));
            }
            let (results, warnings) = certificate_report(&model, 64, *seed)?;
            let inputs = json!({"model_sha256": model_digest(&model), "gamma": num(*gamma), "seed": seed});
            Ok(report(echo, inputs, results, warnings))
        }
        Scenario::Ladder3 { alpha, eta, seed, emit_model } => {
            let model = scenarios::ladder3(*alpha, *eta)?;
            if *emit_model {
                return Ok(emit(&model));
            }
            let (mut results, warnings) = certificate_report(&model, 64, *seed)?;
            let ca = c_alpha(*alpha)?;
            if let Value::Object(map) = &mut results {
                let mut extra = Map::new();
                extra.insert("c_alpha".into(), num(ca));
                extra.insert("rate_bound".into(), num(ca * eta));
                extra.insert("certified".into(), Value::Bool(ca > 0.0));
                map.insert("three_level".into(), Value::Object(extra));
            }
            let inputs = json!({"model_sha256": model_digest(&model), "alpha": num(*alpha), "eta": num(*eta), "seed": seed});
            Ok(report(echo, inputs, results, warnings))
        }
    }
}
