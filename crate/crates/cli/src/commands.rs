use std::error::Error as StdError;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use flowreach::control::{synthesize, synthesize_positive, verify_closed_loop};
use flowreach::funcspace::serial::{read_piecewise, read_state, sample_csv, write_piecewise, write_state, FloatFormat};
use flowreach::funcspace::sup_norm;
use flowreach::network::{build_matrices, parse_network, validate_relations, GraphMatrices, Mode};
use flowreach::reach::{
    cone_reach, dynamic_reach_structure, network_reach, positivity_preservation_check, AxisVerdict, ConeOptions,
    ConeReport,
};
use flowreach::report::Report;
use flowreach::selftest::{run_selftest, summary, SelftestOptions};
use flowreach::semigroup::{default_lambda, DynamicSystem, StaticSystem};
use flowreach::Error;
use nalgebra::DVector;

use crate::output::emit;
use crate::Common;

pub type CmdResult = Result<ExitCode, Box<dyn StdError>>;

/// Domain-condition defect above which `simulate` warns about a dynamic state.
const DEFECT_WARN: f64 = 1e-9;

const NOT_VERIFIED: u8 = 3;

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(NOT_VERIFIED)
    }
}

fn load_network(common: &Common, path: &Path) -> Result<GraphMatrices, Box<dyn StdError>> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(build_matrices(&parse_network(&text)?, common.mode)?)
}

/// 1-based vertex from the command line to a 0-based index.
fn vertex_index(vertex: usize, mats: &GraphMatrices) -> Result<usize, Error> {
    if vertex == 0 || vertex > mats.n() {
        return Err(Error::InvalidVertex { index: vertex, n: mats.n() });
    }
    Ok(vertex - 1)
}

fn header(command: &str, common: &Common, mats: &GraphMatrices) -> Report {
    let mut r = Report::new(command, common.seed);
    r.text("mode", common.mode.to_string()).int("vertices", mats.n() as i64).int("edges", mats.m() as i64);
    r
}

fn opt_float(r: &mut Report, key: &str, v: Option<f64>) {
    match v {
        Some(x) => r.float(key, x),
        None => r.text(key, "none"),
    };
}

pub fn matrices(common: &Common, network: &Path, tol: f64) -> CmdResult {
    let mats = load_network(common, network)?;
    let rel = validate_relations(&mats, tol);
    let mut r = header("matrices", common, &mats);
    r.matrix("A", &mats.a).matrix("B", &mats.b).matrix("Psi", &mats.psi);
    r.matrix("Phi_minus", &mats.phi_minus).matrix("Phi_plus_w", &mats.phi_plus_w);
    r.float("residual_intertwining", rel.intertwining).float("residual_left_inverse", rel.left_inverse);
    opt_float(&mut r, "residual_resolvent", rel.resolvent);
    r.float("resolvent_lambda", rel.resolvent_lambda);
    if let Some(n) = &rel.notice {
        r.text("notice", n.as_str());
    }
    r.float("residual_column_sums", rel.column_sums);
    opt_float(&mut r, "residual_dynamic_definition", rel.dynamic_definition);
    r.float("min_entry", rel.min_entry).float("max_residual", rel.max_residual()).float("tol", tol);
    let ok = rel.passes(tol);
    r.bool("relations_pass", ok);
    emit(common, &r, &[], None)?;
    Ok(verdict(ok))
}

fn cone_entries(r: &mut Report, cone: &ConeReport) {
    r.int("cone_k", cone.k as i64);
    r.bool("positive_controllable", cone.positive_controllable);
    r.bool("closure_controllable", cone.closure_controllable);
    match cone.untruncated_controllable {
        Some(b) => r.bool("untruncated_controllable", b),
        None => r.text("untruncated_controllable", "unknown"),
    };
    r.bool("closure_sensitive", cone.closure_sensitive).bool("truncation_sensitive", cone.truncation_sensitive);
    if let Some(ray) = &cone.extra_ray {
        r.vector("limit_ray", ray);
    }
    for (i, (axis, hit)) in cone.axes.iter().zip(&cone.first_axis_hit).enumerate() {
        let key = format!("axis{}", i + 1);
        match hit {
            Some(k) => r.int(&format!("{key}_first_hit"), *k as i64),
            None => r.text(&format!("{key}_first_hit"), "none"),
        };
        match axis {
            AxisVerdict::Feasible { weights, residual } => {
                r.text(&key, "reached");
                r.vector(&format!("{key}_weights"), &DVector::from_column_slice(weights));
                r.float(&format!("{key}_residual"), *residual);
            }
            AxisVerdict::Separated { phi, margin, verified, perturbed } => {
                r.text(&key, "separated");
                r.vector(&format!("{key}_certificate"), phi);
                r.float(&format!("{key}_margin"), *margin);
                r.bool(&format!("{key}_certificate_verified"), *verified);
                if let Some(p) = perturbed {
                    r.vector(&format!("{key}_certificate_perturbed"), p);
                }
            }
        }
    }
}

pub fn reach(
    common: &Common,
    network: &Path,
    vertex: usize,
    positive: bool,
    cone_k: Option<usize>,
    tol: f64,
) -> CmdResult {
    let mats = load_network(common, network)?;
    let v = vertex_index(vertex, &mats)?;
    let mut r = header("reach", common, &mats);
    r.int("vertex", vertex as i64);
    if common.mode == Mode::Dynamic {
        if positive {
            return Err("--positive is only available for static vertex conditions".into());
        }
        let sys = DynamicSystem::new(mats, v)?;
        let st = dynamic_reach_structure(&sys)?;
        let approx = st.report.l == sys.m();
        r.int("rank", st.report.l as i64).int("minpoly_degree", st.report.minpoly_degree as i64);
        r.bool("approximately_controllable", approx);
        r.text("grades", st.grades.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" "));
        for (k, d) in st.directions.iter().enumerate() {
            r.vector(&format!("direction{k}"), d);
        }
        r.matrix("basis", &st.report.basis).float("gram_residual", st.report.gram_residual());
        emit(common, &r, &[], None)?;
        return Ok(verdict(approx));
    }
    let nr = network_reach(&mats, v)?;
    r.int("rank", nr.edge.l as i64).int("minpoly_degree", nr.edge.minpoly_degree as i64);
    r.int("horizon", nr.horizon as i64).bool("exact_controllable", nr.edge.exact_controllable);
    r.matrix("basis", &nr.edge.basis).float("gram_residual", nr.edge.gram_residual());
    r.int("vertex_rank", nr.vertex_basis.ncols() as i64).float("principal_angle", nr.principal_angle);
    let mut ok = nr.edge.exact_controllable;
    if positive {
        let b = mats.control_direction(v)?;
        let cone = cone_reach(&mats.b, &b, ConeOptions { k: cone_k, tol })?;
        cone_entries(&mut r, &cone);
        let lambda0 = default_lambda(&mats.b);
        let grid: Vec<f64> = (0..5).map(|k| lambda0 + 0.5 * k as f64).collect();
        let pos = positivity_preservation_check(&mats.b, &b, &grid, 1e-12)?;
        r.float("positivity_min_entry", pos.min_entry).bool("positivity_preserved", pos.nonnegative);
        ok = cone.positive_controllable;
    }
    emit(common, &r, &[], None)?;
    Ok(verdict(ok))
}

pub fn simulate(common: &Common, network: &Path, state: &Path, time: f64, vertex: usize, hex: bool) -> CmdResult {
    if time < 0.0 || !time.is_finite() {
        return Err(Error::NegativeTime(time).into());
    }
    let mats = load_network(common, network)?;
    let v = vertex_index(vertex, &mats)?;
    let text = fs::read_to_string(state).map_err(|e| format!("{}: {e}", state.display()))?;
    let fmt = if hex { FloatFormat::Hex } else { FloatFormat::Decimal };
    let mut r = header("simulate", common, &mats);
    r.float("time", time);
    let out = match common.mode {
        Mode::Static => {
            let f = read_piecewise(&text)?;
            let sys = StaticSystem::from_network(&mats, v)?;
            let g = sys.apply(&f, time)?;
            r.float("initial_sup", sup_norm(&f)).float("final_sup", sup_norm(&g));
            write_piecewise(&g, fmt)
        }
        Mode::Dynamic => {
            let x = read_state(&text)?;
            let sys = DynamicSystem::new(mats, v)?;
            let defect = sys.compatibility_defect(&x);
            if defect > DEFECT_WARN {
                eprintln!("warning: initial state violates the domain condition (defect {defect:e})");
            }
            r.float("compatibility_defect", defect);
            let y = sys.apply_long(&x, time)?;
            r.float("initial_sup", sup_norm(&x.f)).float("final_sup", sup_norm(&y.f));
            r.vector("final_vertex", &y.d);
            write_state(&y, fmt)
        }
    };
    let payload = common.out.is_none().then_some(out.as_str());
    emit(common, &r, &[("state.txt", out.clone())], payload)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
pub fn steer(
    common: &Common,
    network: &Path,
    target: &Path,
    vertex: usize,
    horizon: Option<usize>,
    positive: bool,
    tol: f64,
    samples: usize,
) -> CmdResult {
    if !(tol > 0.0) {
        return Err("tolerance must be positive".into());
    }
    let mats = load_network(common, network)?;
    if common.mode == Mode::Dynamic {
        return Err("steer supports static vertex conditions only".into());
    }
    let v = vertex_index(vertex, &mats)?;
    let text = fs::read_to_string(target).map_err(|e| format!("{}: {e}", target.display()))?;
    let target = read_piecewise(&text)?;
    let sys = StaticSystem::from_network(&mats, v)?;
    let n = horizon.unwrap_or(sys.m());
    let res = if positive {
        synthesize_positive(&sys, &target, n, tol)?
    } else {
        synthesize(&sys, &target, n, tol)?
    };
    let check = verify_closed_loop(&sys, &res, Some(&target), tol)?;
    let mut r = header("steer", common, &mats);
    r.int("vertex", vertex as i64).int("horizon", n as i64).bool("positive", positive);
    r.text("synthesis", res.mode.to_string()).float("tol", tol);
    r.float("residual_to_target", res.residual_to_target);
    r.float("sim_vs_predicted", check.sim_vs_predicted);
    opt_float(&mut r, "sim_vs_target", check.sim_vs_target);
    r.float("control_min", res.control.min()).float("state_min", check.min_entry);
    let ok = res.reached && check.passed;
    r.bool("verified", ok);
    if !ok && positive {
        let cone = cone_reach(&sys.b_mat, &sys.b, ConeOptions { k: Some(n), ..ConeOptions::default() })?;
        cone_entries(&mut r, &cone);
    }
    let artifacts = [
        ("control.txt", write_piecewise(&res.control.u, FloatFormat::Hex)),
        ("control.csv", sample_csv(&res.control.u, samples)),
        ("final.txt", write_piecewise(&res.predicted_final, FloatFormat::Hex)),
    ];
    emit(common, &r, &artifacts, None)?;
    Ok(verdict(ok))
}

pub fn selftest(common: &Common, quick: bool) -> CmdResult {
    let results = run_selftest(SelftestOptions { seed: common.seed, quick });
    let mut r = Report::new("selftest", common.seed);
    r.bool("quick", quick);
    for s in &results {
        r.text(s.name, if s.passed() { "pass" } else { "fail" });
        r.int(&format!("{}_cases", s.name), s.cases as i64);
        r.int(&format!("{}_failures", s.name), s.failures as i64);
        r.float(&format!("{}_worst", s.name), s.worst);
    }
    let ok = results.iter().all(|s| s.passed());
    r.bool("all_pass", ok);
    eprint!("{}", summary(&results));
    emit(common, &r, &[], None)?;
    Ok(verdict(ok))
}
