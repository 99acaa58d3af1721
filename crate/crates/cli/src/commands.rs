use std::f64::consts::PI;

use serde_json::{json, Value};
use tritronquee::analysis::{hamiltonians, lax_residual, sector_field, stokes_difference, SectorField};
use tritronquee::bvp::{solve_line, LineDomain, LineSolution, SolverOptions};
use tritronquee::io::{
    decay_fit_json, field_metadata, solution_sidecar, write_coefficients_csv, write_difference_csv, write_field_csv,
    write_solution_csv,
};
use tritronquee::model_curve::{branch_points, coefficient_asymptotics, stokes_prediction};
use tritronquee::series::{cn_table_check, coefficients, coefficients_log, coefficients_t0, exact_table_matches};
use tritronquee::stokes_data::all_presets;
use tritronquee::{BranchedPoint, Complex64, Result};

use crate::config::{CoeffAsymConfig, CurveConfig, Job, LineConfig, SectorConfig, SeriesConfig, StokesConfig};
use crate::run::Run;

/// What a finished command reports: the manifest summary and what goes to stdout.
pub struct Report {
    pub summary: Value,
    pub stdout: String,
    pub ok: bool,
}

fn report(summary: Value) -> Report {
    Report { summary, stdout: String::new(), ok: true }
}

pub fn execute(run: &mut Run) -> Result<Report> {
    match run.job.clone() {
        Job::Series(c) => series(run, &c),
        Job::SolveLine(c) => solve(run, &c),
        Job::Sector(c) => sector(run, &c),
        Job::StokesDiff(c) => stokes(run, &c),
        Job::CoeffAsym(c) => coeff_asym(run, &c),
        Job::Curve(c) => curve(run, &c),
        Job::Check => check(run),
    }
}

fn line_solution(run: &mut Run, domain: &LineDomain, solver: &SolverOptions) -> Result<LineSolution> {
    run.cached("line", &(domain, solver), || solve_line(domain, solver))
}

fn series(run: &mut Run, c: &SeriesConfig) -> Result<Report> {
    let a = coefficients_log(c.t, c.max_n)?;
    run.emit("coefficients.csv", |b| write_coefficients_csv(b, &a))?;
    let nonzero = a.iter().filter(|x| !x.is_zero()).count();
    Ok(report(json!({ "coefficients": a.len(), "nonzero": nonzero })))
}

fn solve(run: &mut Run, c: &LineConfig) -> Result<Report> {
    let sol = line_solution(run, &c.domain, &c.solver)?;
    run.emit("solution.csv", |b| write_solution_csv(b, &sol))?;
    run.emit_json("solution.json", &solution_sidecar(&sol))?;
    let max_imag = sol.u.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(report(json!({
        "residual_norm": sol.residual_norm,
        "iterations": sol.iterations,
        "max_abs_u": sol.u.iter().map(|z| z.norm()).fold(0.0, f64::max),
        "max_abs_imag_u": max_imag,
    })))
}

fn sector(run: &mut Run, c: &SectorConfig) -> Result<Report> {
    let field: SectorField = run.cached("sector", c, || sector_field(&c.options, &c.solver))?;
    run.emit("field.csv", |b| write_field_csv(b, &field))?;
    run.emit_json("field.json", &field_metadata(&field))?;
    Ok(report(json!({ "max_abs_u": field.max_abs, "rays": field.ray_angles.len() })))
}

fn stokes(run: &mut Run, c: &StokesConfig) -> Result<Report> {
    let sol = line_solution(run, &c.domain, &c.solver)?;
    let diff = stokes_difference(&sol, c.window)?;
    let oracle = stokes_prediction(BranchedPoint::new(c.window.0, 3.0 * PI)?, Complex64::new(0.0, 0.0), 0)?;
    run.emit("difference.csv", |b| write_difference_csv(b, &diff))?;
    let mut fit = decay_fit_json(&diff);
    fit["prediction"] = json!({ "rate": oracle.rate, "period": oracle.period });
    run.emit_json("fit.json", &fit)?;
    let f = &diff.fit;
    Ok(report(json!({
        "rate": f.rate,
        "period": f.period,
        "r2": f.r_squared,
        "predicted_rate": oracle.rate,
        "predicted_period": oracle.period,
    })))
}

fn coeff_asym(run: &mut Run, c: &CoeffAsymConfig) -> Result<Report> {
    let a = coefficients_log(c.t, c.max_n)?;
    let mut rows = Vec::new();
    for (n, an) in a.iter().enumerate().skip(3) {
        let asy = coefficient_asymptotics(n, c.t)?;
        if an.is_zero() || asy.ln_abs == f64::NEG_INFINITY {
            continue;
        }
        let err = (an.ln_abs() - asy.ln_abs).abs() / an.ln_abs().abs();
        rows.push((n, an.ln_abs(), asy.ln_abs, err));
    }
    run.emit("asymptotics.csv", |b| {
        let mut w = Vec::from("n,ln_abs,ln_abs_asymptotic,relative_error\n");
        for (n, x, y, e) in &rows {
            w.extend(format!("{n},{x},{y},{e}\n").bytes());
        }
        b.extend(w);
        Ok(())
    })?;
    // the nearest non-vanishing index at or below each checkpoint
    let checkpoints: Vec<(usize, f64)> = (1..=c.max_n / c.step)
        .filter_map(|k| rows.iter().rev().find(|r| r.0 <= k * c.step).map(|r| (r.0, r.3)))
        .collect();
    let monotone = checkpoints.windows(2).all(|w| w[1].1 < w[0].1);
    let summary = json!({
        "checkpoints": checkpoints.iter().map(|&(n, e)| json!({ "n": n, "relative_error": e })).collect::<Vec<_>>(),
        "monotone": monotone,
    });
    run.emit_json("report.json", &summary)?;
    let stdout = checkpoints.iter().map(|(n, e)| format!("N = {n:>4}  relative error {e:.3e}\n")).collect::<String>()
        + &format!("monotone decrease: {monotone}\n");
    Ok(Report { summary, stdout, ok: true })
}

fn curve(run: &mut Run, c: &CurveConfig) -> Result<Report> {
    let p = branch_points(c.x, c.t, None)?;
    let v = p.to_json();
    run.emit_json("curve.json", &v)?;
    let stdout = serde_json::to_string_pretty(&v)? + "\n";
    Ok(Report { summary: json!({ "lambda5": p.lambda5 }), stdout, ok: true })
}

struct Check {
    name: &'static str,
    value: f64,
    bound: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.bound
    }
}

fn check_suite() -> Result<Vec<Check>> {
    let z = Complex64::new(0.0, 0.0);
    let mut out = Vec::new();
    let cn = [z, Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 1.0)]
        .iter()
        .flat_map(|&t| cn_table_check(t))
        .fold(0.0, f64::max);
    out.push(Check { name: "c_n table", value: cn, bound: 1e-10 });
    out.push(Check { name: "exact c_n polynomials", value: if exact_table_matches() { 0.0 } else { 1.0 }, bound: 0.0 });

    let a = coefficients(z, 70)?;
    let b = coefficients_t0(10)?;
    let mut rec = 0.0f64;
    for (k, an) in a.iter().enumerate() {
        rec = rec.max(if k % 7 == 0 { (an.re - b[k / 7]).abs() / b[k / 7].abs() } else { an.norm() });
    }
    out.push(Check { name: "t = 0 recurrence and sparsity", value: rec, bound: 1e-10 });

    let presets = all_presets();
    let cyc = presets.iter().map(|(_, s)| s.validate()).fold(0.0, f64::max);
    let rot = presets.iter().map(|(_, s)| s.rotate(7).max_difference(s)).fold(0.0, f64::max);
    out.push(Check { name: "Stokes presets", value: cyc, bound: 1e-14 });
    out.push(Check { name: "rotate^7 identity", value: rot, bound: 0.0 });

    let mut curve = 0.0f64;
    for (r, th, t) in [(1.0, 0.0, z), (4.0, 2.0, Complex64::new(0.5, -0.3)), (9.0, 3.0 * PI, Complex64::new(-1.0, 0.0))] {
        let p = branch_points(BranchedPoint::new(r, th)?, t, None)?;
        let s = p.lambda5.norm().max(1.0);
        let q = p.quadratic_residuals();
        curve = curve.max(p.cubic_residual() / s.powi(3)).max(q[0] / (s * s)).max(q[1] / (s * s));
    }
    out.push(Check { name: "model curve residuals", value: curve, bound: 1e-10 });

    let asy: Vec<f64> = [70usize, 140, 210]
        .iter()
        .map(|&n| {
            let an = coefficients_log(z, n).map(|v| v[n].ln_abs())?;
            Ok((an - coefficient_asymptotics(n, z)?.ln_abs).abs() / an.abs())
        })
        .collect::<Result<_>>()?;
    let monotone = asy.windows(2).all(|w| w[1] < w[0]);
    out.push(Check { name: "coefficient asymptotics at N = 210", value: if monotone { asy[2] } else { 1.0 }, bound: 0.05 });

    let sol = solve_line(&LineDomain::u0_real(z, 12.0, 512), &SolverOptions::default())?;
    out.push(Check { name: "real-line solve residual", value: sol.residual_norm, bound: 1e-8 });
    out.push(Check {
        name: "real-line solve is real",
        value: sol.u.iter().map(|u| u.im.abs()).fold(0.0, f64::max),
        bound: 1e-6,
    });
    let h = hamiltonians(&sol)?;
    out.push(Check { name: "Hamiltonian identities", value: h.max_r1.max(h.max_r0), bound: 1e-4 });
    let lax = lax_residual(&sol, &[z, Complex64::new(1.0, 1.0), Complex64::new(-2.0, 0.0)])?;
    out.push(Check { name: "Lax compatibility", value: lax, bound: 1e-4 });
    Ok(out)
}

fn check(run: &mut Run) -> Result<Report> {
    let checks = check_suite()?;
    let ok = checks.iter().all(Check::pass);
    let items: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "value": c.value, "bound": c.bound, "pass": c.pass() }))
        .collect();
    run.emit_json("check.json", &items)?;
    let stdout = checks
        .iter()
        .map(|c| format!("{} {}: {:.2e} (bound {:.0e})\n", if c.pass() { "PASS" } else { "FAIL" }, c.name, c.value, c.bound))
        .collect();
    Ok(Report { summary: json!({ "pass": ok, "checks": items.len() }), stdout, ok })
}
