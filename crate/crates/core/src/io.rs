//! CSV tables and JSON sidecars for coefficients, line solutions, sector
//! fields and fits. Writers take any `io::Write` so that callers decide where
//! the bytes go.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{SectorField, StokesDifference};
use crate::bvp::LineSolution;
use crate::series::LogCoefficient;
use crate::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn table<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `n, re_a, im_a, log10_abs_a, phase`; vanishing coefficients get `log10_abs = -inf`.
pub fn write_coefficients_csv<W: Write>(out: W, coefficients: &[LogCoefficient]) -> Result<()> {
    table(
        out,
        &["n", "re_a", "im_a", "log10_abs_a", "phase"],
        coefficients.iter().enumerate().map(|(n, c)| {
            let v = c.value();
            let (lg, ph) = if c.is_zero() { (f64::NEG_INFINITY, 0.0) } else { (c.log10_abs(), c.phase()) };
            vec![n as f64, v.re, v.im, lg, ph]
        }),
    )
}

/// `xi, re_x, im_x, re_u, im_u` at the collocation nodes.
pub fn write_solution_csv<W: Write>(out: W, sol: &LineSolution) -> Result<()> {
    table(
        out,
        &["xi", "re_x", "im_x", "re_u", "im_u"],
        (0..sol.u.len()).map(|j| vec![sol.xi[j], sol.x[j].re, sol.x[j].im, sol.u[j].re, sol.u[j].im]),
    )
}

/// Everything about a line solve except the node values.
pub fn solution_sidecar(sol: &LineSolution) -> Value {
    json!({
        "domain": sol.domain,
        "residual_norm": sol.residual_norm,
        "raw_residual_norm": sol.raw_residual_norm,
        "boundary_residual": sol.boundary_residual,
        "iterations": sol.iterations,
        "line_search_failures": sol.line_search_failures,
        "boundary_truncation": sol.boundary_truncation,
        "initial_mode": sol.initial_mode,
        "continuation": sol.continuation,
        "history": sol.history,
    })
}

/// `r, theta, re_u, im_u`, angle-major.
pub fn write_field_csv<W: Write>(out: W, field: &SectorField) -> Result<()> {
    let rows = field.theta.iter().enumerate().flat_map(|(j, &th)| {
        field.r.iter().enumerate().map(move |(i, &r)| {
            let v = field.values[j][i];
            vec![r, th, v.re, v.im]
        })
    });
    table(out, &["r", "theta", "re_u", "im_u"], rows)
}

pub fn field_metadata(field: &SectorField) -> Value {
    json!({
        "method": field.method,
        "n_r": field.r.len(),
        "n_theta": field.theta.len(),
        "r_range": [field.r[0], field.r[field.r.len() - 1]],
        "theta_range": [field.theta[0], field.theta[field.theta.len() - 1]],
        "ray_angles": field.ray_angles,
        "origin": field.origin,
        "max_abs": field.max_abs,
    })
}

/// `abs_x, difference, minimal_term`.
pub fn write_difference_csv<W: Write>(out: W, diff: &StokesDifference) -> Result<()> {
    table(out, &["abs_x", "difference", "minimal_term"], diff.trace.iter().map(|&(r, d, m)| vec![r, d, m]))
}

pub fn decay_fit_json(diff: &StokesDifference) -> Value {
    let f = &diff.fit;
    json!({
        "rate": f.rate,
        "period": f.period,
        "amplitude": f.amplitude,
        "r2": f.r_squared,
        "window": [f.window.0, f.window.1],
        "n_samples": f.n_samples,
        "n_crossings": f.n_crossings,
        "samples": f.samples,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Creates the parent directory if needed and writes the file in one go.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::coefficients_log;
    use crate::Complex64;

    #[test]
    fn coefficient_table_marks_zeros() {
        let c = coefficients_log(Complex64::new(0.0, 0.0), 8).unwrap();
        let mut buf = Vec::new();
        write_coefficients_csv(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,re_a,im_a,log10_abs_a,phase");
        assert_eq!(lines.len(), 10);
        assert!(lines[2].starts_with("1,0,0,-inf"));
        assert!(lines[8].starts_with("7,0.027777777777777"));
    }

    #[test]
    fn json_ends_with_newline() {
        let mut buf = Vec::new();
        write_json(&mut buf, &json!({"a": 1})).unwrap();
        assert!(buf.ends_with(b"}\n"));
    }
}
