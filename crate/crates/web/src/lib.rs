//! Browser bindings: the series table, a model-curve point and a small line
//! solve. Everything goes back to JavaScript as a JSON string.

use serde_json::json;
use tritronquee::bvp::{solve_line as solve, LineDomain, SolverOptions};
use tritronquee::model_curve::branch_points;
use tritronquee::series::coefficients_log;
use tritronquee::{BranchedPoint, Complex64, Error};
use wasm_bindgen::prelude::*;

/// Largest grid the page may ask for; a dense solve at this size takes a few seconds.
const MAX_NC: usize = 256;

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[{n, re, im, log10_abs}]` for `a_0 ..= a_max_n`.
pub fn series_json(t: Complex64, max_n: usize) -> Result<String, Error> {
    let rows: Vec<_> = coefficients_log(t, max_n)?
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let v = a.value();
            let lg = if a.is_zero() { None } else { Some(a.log10_abs()) };
            json!({ "n": n, "re": v.re, "im": v.im, "log10_abs": lg })
        })
        .collect();
    Ok(serde_json::to_string(&rows)?)
}

pub fn curve_json(modulus: f64, arg: f64, t: Complex64) -> Result<String, Error> {
    Ok(branch_points(BranchedPoint::new(modulus, arg)?, t, None)?.to_json().to_string())
}

/// Line presets by name: `U0-real`, `V0-imag`, or `U0-offset` with offset `b`.
pub fn line_json(preset: &str, t: Complex64, b: Complex64, half_width: f64, nc: usize) -> Result<String, Error> {
    if nc > MAX_NC {
        return Err(Error::InvalidArgument(format!("Nc = {nc} is more than this page allows ({MAX_NC})")));
    }
    let domain = match preset {
        "U0-real" => LineDomain::u0_real(t, half_width, nc),
        "V0-imag" => LineDomain::v0_imag(t, half_width, nc),
        "U0-offset" => LineDomain::u0_offset(t, b, half_width, nc)?,
        other => return Err(Error::InvalidArgument(format!("unknown preset {other:?}"))),
    };
    let s = solve(&domain, &SolverOptions::default())?;
    Ok(json!({
        "xi": s.xi,
        "re": s.u.iter().map(|z| z.re).collect::<Vec<_>>(),
        "im": s.u.iter().map(|z| z.im).collect::<Vec<_>>(),
        "residual": s.residual_norm,
        "iterations": s.iterations,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn series(t_re: f64, t_im: f64, max_n: usize) -> Result<String, JsError> {
    series_json(Complex64::new(t_re, t_im), max_n).map_err(js_err)
}

#[wasm_bindgen]
pub fn curve(modulus: f64, arg: f64, t_re: f64, t_im: f64) -> Result<String, JsError> {
    curve_json(modulus, arg, Complex64::new(t_re, t_im)).map_err(js_err)
}

#[wasm_bindgen]
pub fn solve_line(preset: &str, t_re: f64, t_im: f64, b_im: f64, half_width: f64, nc: usize) -> Result<String, JsError> {
    line_json(preset, Complex64::new(t_re, t_im), Complex64::new(0.0, b_im), half_width, nc).map_err(js_err)
}
