//! Instruments applied to converged line solutions: Hamiltonian and Lax
//! identities, KdV compatibility in `t`, the exponentially small difference
//! between `U₀` and its series on the negative axis, and fields over sectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvp::{x_derivatives, BoundaryData, LineDomain, LineProblem, LineSolution, SolverOptions};
use crate::linalg::BandedMatrix;
use crate::series::{minimal_term_truncation, SeriesExpansion};
use crate::spectral::{build_diff_ops, build_grid, interpolate, DiffOps};
use crate::stokes_data::Family;
use crate::{BranchedPoint, Error, Result};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Nodes whose parameter lies in the middle two thirds of `[ξ_l, ξ_r]`.
pub fn interior_two_thirds(xi: &[f64]) -> Vec<usize> {
    let (a, b) = (xi[0], xi[xi.len() - 1]);
    let (lo, hi) = (a + (b - a) / 6.0, b - (b - a) / 6.0);
    (0..xi.len()).filter(|&j| xi[j] >= lo && xi[j] <= hi).collect()
}

fn max_on(v: &[Complex64], idx: &[usize]) -> f64 {
    idx.iter().map(|&j| v[j].norm()).fold(0.0, f64::max)
}

fn x_derivative(ops: &DiffOps, phi: f64, v: &[Complex64]) -> Vec<Complex64> {
    let e = Complex64::from_polar(1.0, -phi);
    ops.apply(1, v).into_iter().map(|z| z * e).collect()
}

/// `H₁` and `H₀` from `[u, u_x, u_xx, u_xxx]`.
pub fn hamiltonian_densities(x: Complex64, t: Complex64, d: [Complex64; 4]) -> (Complex64, Complex64) {
    let [u, u1, u2, u3] = d;
    let h1 = x * u + u.powi(4) / 24.0 - t * u * u / 2.0 + u * u1 * u1 / 24.0 + u1 * u3 / 240.0 - u2 * u2 / 480.0;
    let h0 = u3 * u3 / 1920.0 + u * u1 * u3 / 80.0 + u * u * u1 * u1 / 16.0 + u.powi(5) / 10.0 + u.powi(3) * u2 / 24.0
        + u * u2 * u2 / 240.0
        - u1 * u1 * u2 / 480.0
        - u1 / 4.0
        + 1.5 * x * u * u
        + x * u2 / 4.0
        - t * u.powi(3)
        - t * u * u2 / 4.0
        + t * u1 * u1 / 8.0;
    (h1, h0)
}

/// Left-hand side of the equation, `u'''' + 10u'² + 20uu'' + 40(u³ - 6tu + 6x)`.
pub fn ode_defect(x: Complex64, t: Complex64, d: [Complex64; 5]) -> Complex64 {
    let [u, u1, u2, _, u4] = d;
    u4 + 10.0 * u1 * u1 + 20.0 * u * u2 + 40.0 * (u * u * u - 6.0 * t * u + 6.0 * x)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianTrace {
    pub x: Vec<Complex64>,
    pub h1: Vec<Complex64>,
    pub h0: Vec<Complex64>,
    /// `(H₁)_x - u`.
    pub r1: Vec<Complex64>,
    /// `(H₀)_x - (3/2)u²`.
    pub r0: Vec<Complex64>,
    /// Maxima over the middle two thirds of the line.
    pub max_r1: f64,
    pub max_r0: f64,
}

pub fn hamiltonians(sol: &LineSolution) -> Result<HamiltonianTrace> {
    let ops = build_diff_ops(&sol.grid()?);
    Ok(hamiltonians_on(&ops, sol.domain.phi, &sol.xi, &sol.x, sol.domain.t, &sol.u))
}

/// Same as [`hamiltonians`] for arbitrary node values.
pub fn hamiltonians_on(ops: &DiffOps, phi: f64, xi: &[f64], x: &[Complex64], t: Complex64, u: &[Complex64]) -> HamiltonianTrace {
    let d = x_derivatives(ops, phi, u);
    let (h1, h0): (Vec<_>, Vec<_>) = (0..u.len())
        .map(|j| hamiltonian_densities(x[j], t, [d[0][j], d[1][j], d[2][j], d[3][j]]))
        .unzip();
    let r1: Vec<_> = x_derivative(ops, phi, &h1).iter().zip(u).map(|(a, b)| a - b).collect();
    let r0: Vec<_> = x_derivative(ops, phi, &h0).iter().zip(u).map(|(a, b)| a - 1.5 * b * b).collect();
    let idx = interior_two_thirds(xi);
    HamiltonianTrace {
        x: x.to_vec(),
        max_r1: max_on(&r1, &idx),
        max_r0: max_on(&r0, &idx),
        h1,
        h0,
        r1,
        r0,
    }
}

/// Entries `(a, b, c)` of `A(λ) = [[a, b], [c, -a]]`.
pub fn lax_a(x: Complex64, t: Complex64, lambda: Complex64, d: [Complex64; 4]) -> [Complex64; 3] {
    let [u, u1, u2, u3] = d;
    let l = lambda;
    [
        (-u1 * l - 3.0 * u * u1 - u3 / 4.0) / 60.0,
        (l * l + u * l + 1.5 * u * u + u2 / 4.0 - 15.0 * t) / 30.0,
        (l * l * l - u * l * l - (u * u / 2.0 + u2 / 4.0 + 15.0 * t) * l + 2.0 * u.powi(3) - u1 * u1 / 4.0 + u * u2 / 2.0
            + 30.0 * x)
            / 30.0,
    ]
}

/// Largest entry of `A_x - B_λ + [A, B]` over the samples and the middle two
/// thirds of the line; `A_x` is differentiated spectrally entry by entry.
pub fn lax_residual(sol: &LineSolution, lambdas: &[Complex64]) -> Result<f64> {
    let ops = build_diff_ops(&sol.grid()?);
    Ok(lax_residual_on(&ops, sol.domain.phi, &sol.xi, &sol.x, sol.domain.t, &sol.u, lambdas))
}

pub fn lax_residual_on(
    ops: &DiffOps,
    phi: f64,
    xi: &[f64],
    x: &[Complex64],
    t: Complex64,
    u: &[Complex64],
    lambdas: &[Complex64],
) -> f64 {
    let d = x_derivatives(ops, phi, u);
    let idx = interior_two_thirds(xi);
    let mut worst = 0.0f64;
    for &l in lambdas {
        let entries: Vec<[Complex64; 3]> = (0..u.len())
            .map(|j| lax_a(x[j], t, l, [d[0][j], d[1][j], d[2][j], d[3][j]]))
            .collect();
        let col = |k: usize| entries.iter().map(|e| e[k]).collect::<Vec<_>>();
        let (ax, bx, cx) = (x_derivative(ops, phi, &col(0)), x_derivative(ops, phi, &col(1)), x_derivative(ops, phi, &col(2)));
        for &j in &idx {
            let [a, b, c] = entries[j];
            let beta = l - 2.0 * u[j];
            let m = [
                ax[j] + b * beta - c,
                bx[j] + 2.0 * a,
                cx[j] - 2.0 * a * beta - 1.0,
                -ax[j] + c - beta * b,
            ];
            worst = m.iter().fold(worst, |w, z| w.max(z.norm()));
        }
    }
    worst
}

/// `u_t + u u_x + u_xxx/12` with `u_t` from a central difference.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KdvReport {
    pub t_center: f64,
    pub delta: f64,
    /// Maximum over the middle two thirds.
    pub residual: f64,
    pub xi: Vec<f64>,
    pub u_t: Vec<Complex64>,
    pub defect: Vec<Complex64>,
}

/// Residual from three solutions on a common grid at `t - δ`, `t`, `t + δ`.
pub fn kdv_residual_from(sols: [&LineSolution; 3], delta: f64) -> Result<KdvReport> {
    let [minus, centre, plus] = sols;
    if minus.xi != centre.xi || plus.xi != centre.xi || centre.domain.phi != minus.domain.phi || plus.domain.phi != centre.domain.phi {
        return Err(Error::InvalidArgument("KdV residual needs three solutions on one line and grid".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let d = centre.x_derivatives()?;
    let u_t: Vec<Complex64> = plus.u.iter().zip(&minus.u).map(|(p, m)| (p - m) / (2.0 * delta)).collect();
    let defect: Vec<Complex64> = (0..u_t.len()).map(|j| u_t[j] + d[0][j] * d[1][j] + d[3][j] / 12.0).collect();
    let idx = interior_two_thirds(&centre.xi);
    Ok(KdvReport {
        t_center: centre.domain.t.re,
        delta,
        residual: max_on(&defect, &idx),
        xi: centre.xi.clone(),
        u_t,
        defect,
    })
}

fn solve_near(template: &LineDomain, t: f64, start: &[Complex64], opts: &SolverOptions) -> Result<LineSolution> {
    let problem = LineProblem::new(LineDomain { t: Complex64::new(t, 0.0), ..template.clone() })?;
    problem.newton_armijo(start.to_vec(), opts)
}

fn centre_solution(template: &LineDomain, t_center: f64, opts: &SolverOptions) -> Result<LineSolution> {
    crate::bvp::solve_line(&LineDomain { t: Complex64::new(t_center, 0.0), ..template.clone() }, opts)
}

/// Solves at `t_center` and `t_center ± δ` on the template line (Newton for
/// the outer two starts from the centre solution).
pub fn kdv_residual(t_center: f64, delta: f64, template: &LineDomain, opts: &SolverOptions) -> Result<KdvReport> {
    let centre = centre_solution(template, t_center, opts)?;
    let minus = solve_near(template, t_center - delta, &centre.u, opts)?;
    let plus = solve_near(template, t_center + delta, &centre.u, opts)?;
    kdv_residual_from([&minus, &centre, &plus], delta)
}

/// Order check on the time difference: the change of `u_t` from `δ` to `δ/2`
/// against the change from `δ/2` to `δ/4`. Second order gives a ratio near 4.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KdvRichardson {
    pub deltas: [f64; 3],
    pub residuals: [f64; 3],
    pub differences: [f64; 2],
    pub ratio: f64,
}

pub fn kdv_richardson(t_center: f64, delta: f64, template: &LineDomain, opts: &SolverOptions) -> Result<KdvRichardson> {
    let centre = centre_solution(template, t_center, opts)?;
    let deltas = [delta, delta / 2.0, delta / 4.0];
    let reports = deltas
        .iter()
        .map(|&dl| {
            let minus = solve_near(template, t_center - dl, &centre.u, opts)?;
            let plus = solve_near(template, t_center + dl, &centre.u, opts)?;
            kdv_residual_from([&minus, &centre, &plus], dl)
        })
        .collect::<Result<Vec<_>>>()?;
    let idx = interior_two_thirds(&centre.xi);
    let diff = |a: &KdvReport, b: &KdvReport| idx.iter().map(|&j| (a.u_t[j] - b.u_t[j]).norm()).fold(0.0, f64::max);
    let differences = [diff(&reports[0], &reports[1]), diff(&reports[1], &reports[2])];
    Ok(KdvRichardson {
        deltas,
        residuals: [reports[0].residual, reports[1].residual, reports[2].residual],
        differences,
        ratio: differences[0] / differences[1],
    })
}

/// Envelope and period of an exponentially small oscillating difference,
/// measured against `s = |x|^{7/6}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    /// `(s, ln|d| + ln|x|/4)` at the local maxima of `|d|`.
    pub samples: Vec<(f64, f64)>,
    pub rate: f64,
    pub period: f64,
    /// `C` in `|d| ≈ C |x|^{-1/4} e^{-rate s}`.
    pub amplitude: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_samples: usize,
    pub n_crossings: usize,
}

impl DecayFit {
    pub fn envelope(&self, r: f64) -> f64 {
        self.amplitude * r.powf(-0.25) * (-self.rate * r.powf(7.0 / 6.0)).exp()
    }
}

/// `U₀ - series` on the negative axis, sampled densely.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StokesDifference {
    pub fit: DecayFit,
    /// `(|x|, d(x), minimal term)` along the window and beyond.
    pub trace: Vec<(f64, f64, f64)>,
}

/// Domain used for the difference measurement: real line, `|x| ≤ 12`,
/// series cut at `10⁻¹³`.
pub fn stokes_domain(nc: usize) -> LineDomain {
    LineDomain {
        threshold: 1e-13,
        ..LineDomain::u0_real(zero(), 12.0, nc)
    }
}

fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// Measures `d(x) = U₀(x) - S(x)` for `x = -r`, `r` in `window`, where `S` is
/// the series on the sheet `arg x = 3π` cut near its smallest term. Local
/// maxima of `|d|` give the decay rate, zero crossings the period.
pub fn stokes_difference(sol: &LineSolution, window: (f64, f64)) -> Result<StokesDifference> {
    let d = &sol.domain;
    if d.t != zero() || d.phi != 0.0 || d.b != zero() || (d.arg_left - 3.0 * PI).abs() > 1e-12 {
        return Err(Error::InvalidArgument("difference is measured on the t = 0 real-line U0 solution".into()));
    }
    if !(window.0 > 0.0 && window.0 < window.1 && window.1 <= -d.xi_l) {
        return Err(Error::InvalidArgument(format!(
            "window {:?} must lie inside (0, {}]",
            window, -d.xi_l
        )));
    }
    let grid = sol.grid()?;
    let cap = 400;
    let full = SeriesExpansion::new(zero(), cap)?;
    let noise = 10.0 * sol.boundary_truncation[0].last_term_size.max(sol.boundary_truncation[1].last_term_size);
    let samples = 3000;
    let mut trace = Vec::with_capacity(samples + 1);
    let (r_lo, r_hi) = (0.5 * window.0, -d.xi_l);
    for k in 0..=samples {
        let r = r_lo + (r_hi - r_lo) * k as f64 / samples as f64;
        let x = BranchedPoint::new(r, 3.0 * PI)?;
        let report = minimal_term_truncation(zero(), x, cap)?;
        let s = SeriesExpansion::from_coefficients(zero(), full.coefficients[..=report.m_selected].to_vec());
        let diff = interpolate(&grid, &sol.u, -r)? - s.evaluate(&x, 0);
        trace.push((r, diff.re, report.last_term_size));
    }
    let inside: Vec<usize> = (0..trace.len()).filter(|&k| trace[k].0 >= window.0 && trace[k].0 <= window.1).collect();
    let floor = |k: usize| (10.0 * trace[k].2).max(noise).max(1e-12);
    let mut maxima = Vec::new();
    for &k in &inside {
        if k == 0 || k + 1 >= trace.len() {
            continue;
        }
        let (a, b, c) = (trace[k - 1].1.abs(), trace[k].1.abs(), trace[k + 1].1.abs());
        if b > a && b >= c && b > floor(k) {
            let r = trace[k].0;
            maxima.push((r.powf(7.0 / 6.0), b.ln() + 0.25 * r.ln()));
        }
    }
    if maxima.len() < 3 {
        return Err(Error::BelowNoiseFloor(format!(
            "{} envelope maxima above the floor in |x| in [{}, {}]",
            maxima.len(),
            window.0,
            window.1
        )));
    }
    let mut crossings = Vec::new();
    for w in inside.windows(2) {
        let (p, q) = (trace[w[0]], trace[w[1]]);
        if p.1 * q.1 < 0.0 && p.1.abs().max(q.1.abs()) > floor(w[0]) {
            let r = p.0 + (q.0 - p.0) * p.1 / (p.1 - q.1);
            crossings.push(r.powf(7.0 / 6.0));
        }
    }
    if crossings.len() < 3 {
        return Err(Error::BelowNoiseFloor(format!("only {} zero crossings", crossings.len())));
    }
    let (slope, intercept, r_squared) = linear_fit(&maxima);
    let indexed: Vec<(f64, f64)> = crossings.iter().enumerate().map(|(i, &s)| (i as f64, s)).collect();
    let (half, _, _) = linear_fit(&indexed);
    Ok(StokesDifference {
        fit: DecayFit {
            n_samples: maxima.len(),
            samples: maxima,
            rate: -slope,
            period: 2.0 * half,
            amplitude: intercept.exp(),
            r_squared,
            window,
            n_crossings: crossings.len(),
        },
        trace,
    })
}

/// Where `u` stops being monotone: the span of the zeros of `Re u_x` on the
/// line parameter. `None` when `Re u_x` keeps one sign.
pub fn oscillation_support(sol: &LineSolution) -> Result<Option<(f64, f64)>> {
    let d = sol.x_derivatives()?;
    let ux: Vec<f64> = d[1].iter().map(|z| z.re).collect();
    let scale = ux.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut zeros = Vec::new();
    for j in 0..ux.len() - 1 {
        let (a, b) = (ux[j], ux[j + 1]);
        if a * b < 0.0 && a.abs().max(b.abs()) > 1e-6 * scale {
            zeros.push(sol.xi[j] + (sol.xi[j + 1] - sol.xi[j]) * a / (a - b));
        }
    }
    Ok(match (zeros.first(), zeros.last()) {
        (Some(&a), Some(&b)) => Some((a, b)),
        _ => None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMethod {
    Rays,
    Laplace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorOptions {
    pub family: Family,
    pub m: i32,
    pub t: Complex64,
    pub r_min: f64,
    /// Radius of the outer arc, where the series supplies the data.
    pub r_max: f64,
    /// Unwrapped arguments of the two edge rays.
    pub theta_min: f64,
    pub theta_max: f64,
    /// Rays sit at the Chebyshev points of `[θ_min, θ_max]`.
    pub n_rays: usize,
    pub n_r: usize,
    pub n_theta: usize,
    /// Collocation size of each ray and of the line through the origin.
    pub nc: usize,
    pub threshold: f64,
    pub method: FieldMethod,
}

impl SectorOptions {
    pub fn new(family: Family, m: i32, theta: (f64, f64), method: FieldMethod) -> Self {
        Self {
            family,
            m,
            t: zero(),
            r_min: 1.0,
            r_max: 12.0,
            theta_min: theta.0,
            theta_max: theta.1,
            n_rays: 16,
            n_r: 221,
            n_theta: 281,
            nc: 256,
            threshold: 1e-6,
            method,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return bad(format!("need 0 < r_min < r_max, got {} and {}", self.r_min, self.r_max));
        }
        if !(self.theta_min < self.theta_max) {
            return bad("empty angular range".into());
        }
        if self.n_rays < 3 {
            return bad(format!("at least 3 rays needed, got {}", self.n_rays));
        }
        if self.n_r < 3 || self.n_theta < 3 {
            return bad("polar grid needs at least 3 points in each direction".into());
        }
        Ok(())
    }
}

/// Values on the polar grid, `values[j][i]` at `(r[i], θ[j])`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorField {
    pub method: FieldMethod,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    pub ray_angles: Vec<f64>,
    /// Value and `x`-derivative at the origin taken from the line solve.
    pub origin: (Complex64, Complex64),
    pub max_abs: f64,
}

impl SectorField {
    pub fn value(&self, i_r: usize, j_theta: usize) -> Complex64 {
        self.values[j_theta][i_r]
    }

    pub fn max_difference(&self, other: &SectorField) -> Result<f64> {
        if self.r != other.r || self.theta != other.theta {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Line through the origin along the family's central direction.
fn central_line(opts: &SectorOptions) -> LineDomain {
    let n = 3 * opts.m;
    let back = Complex64::from_polar(1.0, -6.0 * PI * n as f64 / 7.0);
    let base = match opts.family {
        Family::TypeII => LineDomain::u0_real(opts.t * back, opts.r_max, opts.nc),
        Family::TypeI => LineDomain::v0_imag(opts.t * back, opts.r_max, opts.nc),
    };
    let nc = opts.nc + opts.nc % 2;
    LineDomain { nc, threshold: opts.threshold, ..base }.rotated(n)
}

/// Value and `x`-derivative at `x = 0` from the central line.
pub fn origin_data(opts: &SectorOptions, solver: &SolverOptions) -> Result<(Complex64, Complex64)> {
    let sol = crate::bvp::solve_line(&central_line(opts), solver)?;
    let d = sol.x_derivatives()?;
    let origin = sol.xi.iter().position(|&xi| xi == 0.0).expect("even Nc puts a node at the origin");
    Ok((d[0][origin], d[1][origin]))
}

/// Ray `x = r e^{iθ}`, `r ∈ [0, r_max]`, with the origin data at one end and
/// the series at the other.
pub fn solve_ray(opts: &SectorOptions, theta: f64, origin: (Complex64, Complex64), solver: &SolverOptions) -> Result<LineSolution> {
    let domain = LineDomain {
        phi: theta,
        b: zero(),
        xi_l: 0.0,
        xi_r: opts.r_max,
        t: opts.t,
        nc: opts.nc,
        arg_left: theta,
        arg_right: theta,
        threshold: opts.threshold,
        allow_origin: true,
    };
    let right = BoundaryData::from_series(opts.t, BranchedPoint::new(opts.r_max, theta)?, opts.threshold)?;
    let left = BoundaryData::given(origin.0, origin.1, zero());
    LineProblem::with_boundary(domain, left, right)?.solve(solver)
}

/// Field over `[r_min, r_max] × [θ_min, θ_max]` from ray solves, either
/// interpolated directly or through a Laplace solve for `Re u`, `Im u` fed
/// with the edge rays, the series on the outer arc and the ray bundle on the
/// inner arc.
pub fn sector_field(opts: &SectorOptions, solver: &SolverOptions) -> Result<SectorField> {
    opts.validate()?;
    let origin = origin_data(opts, solver)?;
    let angles = build_grid(opts.n_rays - 1, opts.theta_min, opts.theta_max)?;
    let rays: Vec<LineSolution> = angles
        .nodes
        .par_iter()
        .map(|&theta| solve_ray(opts, theta, origin, solver))
        .collect::<Result<Vec<_>>>()?;
    let r = uniform(opts.r_min, opts.r_max, opts.n_r);
    let theta = uniform(opts.theta_min, opts.theta_max, opts.n_theta);
    let ray_grid = rays[0].grid()?;
    // ray values on the radial grid, then across rays
    let radial: Vec<Vec<Complex64>> = rays
        .iter()
        .map(|s| r.iter().map(|&ri| interpolate(&ray_grid, &s.u, ri)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let across = |i: usize, th: f64| -> Result<Complex64> {
        let column: Vec<Complex64> = radial.iter().map(|v| v[i]).collect();
        interpolate(&angles, &column, th)
    };
    let values: Vec<Vec<Complex64>> = match opts.method {
        FieldMethod::Rays => theta
            .iter()
            .map(|&th| (0..r.len()).map(|i| across(i, th)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?,
        FieldMethod::Laplace => {
            let (nr, nt) = (r.len(), theta.len());
            let mut boundary = vec![vec![zero(); nr]; nt];
            for (j, &th) in theta.iter().enumerate() {
                boundary[j][0] = across(0, th)?;
                let outer = BoundaryData::from_series(opts.t, BranchedPoint::new(opts.r_max, th)?, opts.threshold)?;
                boundary[j][nr - 1] = outer.value;
            }
            boundary[0] = radial[0].clone();
            boundary[nt - 1] = radial[radial.len() - 1].clone();
            let re: Vec<Vec<f64>> = boundary.iter().map(|row| row.iter().map(|z| z.re).collect()).collect();
            let im: Vec<Vec<f64>> = boundary.iter().map(|row| row.iter().map(|z| z.im).collect()).collect();
            let mut solved = laplace_polar(&r, &theta, &[re, im])?.into_iter();
            let (re, im) = (solved.next().expect("two fields"), solved.next().expect("two fields"));
            (0..nt)
                .map(|j| (0..nr).map(|i| Complex64::new(re[j][i], im[j][i])).collect())
                .collect()
        }
    };
    let max_abs = values.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if !max_abs.is_finite() {
        return Err(Error::InvalidArgument("field is not finite".into()));
    }
    Ok(SectorField {
        method: opts.method,
        r,
        theta,
        values,
        ray_angles: angles.nodes.clone(),
        origin,
        max_abs,
    })
}

/// Five-point Laplacian in polar coordinates, `(r u_r)_r + u_θθ / r = 0`, on
/// a uniform grid with Dirichlet data taken from the edges of each input
/// (`field[j][i]` at `(r[i], θ[j])`). One banded factorisation serves all inputs.
pub fn laplace_polar(r: &[f64], theta: &[f64], fields: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let (nr, nt) = (r.len(), theta.len());
    if nr < 3 || nt < 3 || !(r[0] > 0.0) {
        return Err(Error::InvalidArgument("Laplace grid needs 3x3 points and r > 0".into()));
    }
    for f in fields {
        if f.len() != nt || f.iter().any(|row| row.len() != nr) {
            return Err(Error::InvalidArgument("boundary data does not match the grid".into()));
        }
    }
    let (hr, ht) = ((r[nr - 1] - r[0]) / (nr - 1) as f64, (theta[nt - 1] - theta[0]) / (nt - 1) as f64);
    let (mi, mj) = (nr - 2, nt - 2);
    // unknowns ordered with the shorter direction running fastest
    let radial_fast = mi <= mj;
    let index = |i: usize, j: usize| if radial_fast { (j - 1) * mi + (i - 1) } else { (i - 1) * mj + (j - 1) };
    let bw = mi.min(mj);
    let n = mi * mj;
    let mut a = BandedMatrix::zeros(n, bw);
    let mut rhs = vec![vec![0.0; n]; fields.len()];
    for j in 1..nt - 1 {
        for i in 1..nr - 1 {
            let row = index(i, j);
            let (rp, rm) = (r[i] + 0.5 * hr, r[i] - 0.5 * hr);
            let wr = 1.0 / (hr * hr);
            let wt = 1.0 / (r[i] * ht * ht);
            a.add(row, row, -(rp + rm) * wr - 2.0 * wt);
            let neighbours = [(i + 1, j, rp * wr), (i - 1, j, rm * wr), (i, j + 1, wt), (i, j - 1, wt)];
            for (ii, jj, w) in neighbours {
                if ii == 0 || ii == nr - 1 || jj == 0 || jj == nt - 1 {
                    for (k, f) in fields.iter().enumerate() {
                        rhs[k][row] -= w * f[jj][ii];
                    }
                } else {
                    a.add(row, index(ii, jj), w);
                }
            }
        }
    }
    let lu = a.factor()?;
    Ok(fields
        .iter()
        .zip(&rhs)
        .map(|(f, b)| {
            let v = lu.solve(b);
            let mut out = f.clone();
            for j in 1..nt - 1 {
                for i in 1..nr - 1 {
                    out[j][i] = v[index(i, j)];
                }
            }
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly_state(nc: usize, phi: f64) -> (DiffOps, Vec<f64>, Vec<Complex64>, Vec<Complex64>) {
        let grid = build_grid(nc, -1.5, 2.0).unwrap();
        let ops = build_diff_ops(&grid);
        let e = Complex64::from_polar(1.0, phi);
        let x: Vec<Complex64> = grid.nodes.iter().map(|&s| e * s + c(0.1, 0.2)).collect();
        let u = x.iter().map(|z| c(0.3, -0.1) + c(0.5, 0.2) * z - 0.4 * z * z + c(0.0, 0.1) * z.powi(3)).collect();
        (ops, grid.nodes, x, u)
    }

    fn poly_derivs(z: Complex64) -> [Complex64; 5] {
        [
            c(0.3, -0.1) + c(0.5, 0.2) * z - 0.4 * z * z + c(0.0, 0.1) * z.powi(3),
            c(0.5, 0.2) - 0.8 * z + c(0.0, 0.3) * z * z,
            -0.8 + c(0.0, 0.6) * z,
            c(0.0, 0.6),
            zero(),
        ]
    }

    #[test]
    fn zero_state_has_zero_hamiltonians() {
        let (h1, h0) = hamiltonian_densities(zero(), c(0.3, 0.1), [zero(); 4]);
        assert_eq!(h1, zero());
        assert_eq!(h0, zero());
    }

    #[test]
    fn hamiltonian_residuals_are_multiples_of_the_defect() {
        let t = c(0.7, -0.2);
        let (ops, xi, x, u) = poly_state(24, 0.4);
        let tr = hamiltonians_on(&ops, 0.4, &xi, &x, t, &u);
        for j in 0..u.len() {
            let d = poly_derivs(x[j]);
            let e = ode_defect(x[j], t, d);
            let want1 = d[1] * e / 240.0;
            let want0 = (12.0 * d[0] * d[1] + d[3]) * e / 960.0;
            assert!((tr.r1[j] - want1).norm() < 1e-9 * (1.0 + want1.norm()), "{j}");
            assert!((tr.r0[j] - want0).norm() < 1e-9 * (1.0 + want0.norm()), "{j}");
        }
    }

    #[test]
    fn constant_on_the_algebraic_locus() {
        // u = c with c³ - 6tc + 6x = 0 at one point: (H₁)_x = u holds there
        let t = c(1.0, 0.0);
        let cst = c(0.5, 0.0);
        let x0 = -(cst.powi(3) - 6.0 * t * cst) / 6.0;
        let grid = build_grid(16, -1.0, 1.0).unwrap();
        let ops = build_diff_ops(&grid);
        let x: Vec<Complex64> = grid.nodes.iter().map(|&s| x0 + s).collect();
        let u = vec![cst; x.len()];
        let tr = hamiltonians_on(&ops, 0.0, &grid.nodes, &x, t, &u);
        for j in 0..x.len() {
            assert!((tr.r1[j]).norm() < 1e-11);
        }
    }

    #[test]
    fn lax_residual_is_the_defect_over_240() {
        let t = c(-0.3, 0.5);
        let (ops, xi, x, u) = poly_state(24, -0.7);
        let idx = interior_two_thirds(&xi);
        let worst = idx
            .iter()
            .map(|&j| ode_defect(x[j], t, poly_derivs(x[j])).norm() / 240.0)
            .fold(0.0, f64::max);
        for l in [zero(), c(1.0, 1.0), c(-2.0, 0.0)] {
            let got = lax_residual_on(&ops, -0.7, &xi, &x, t, &u, &[l]);
            assert!((got - worst).abs() < 1e-8 * (1.0 + worst), "{got} vs {worst}");
        }
    }

    #[test]
    fn frozen_time_gives_the_spatial_part() {
        let sol = crate::bvp::solve_line(&LineDomain::u0_real(c(-1.0, 0.0), 10.0, 96), &SolverOptions::default()).unwrap();
        let rep = kdv_residual_from([&sol, &sol, &sol], 1e-3).unwrap();
        let d = sol.x_derivatives().unwrap();
        let idx = interior_two_thirds(&sol.xi);
        let want = idx.iter().map(|&j| (d[0][j] * d[1][j] + d[3][j] / 12.0).norm()).fold(0.0, f64::max);
        assert!(rep.u_t.iter().all(|z| z.norm() == 0.0));
        assert!((rep.residual - want).abs() < 1e-14 && want > 1e-2);
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 2.0 - 0.5 * k as f64)).collect();
        let (s, i, r2) = linear_fit(&pts);
        assert!((s + 0.5).abs() < 1e-14 && (i - 2.0).abs() < 1e-13 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn laplace_keeps_constants_and_harmonic_functions() {
        let r = uniform(1.0, 3.0, 21);
        let th = uniform(-1.0, 1.0, 31);
        let konst = vec![vec![2.5; r.len()]; th.len()];
        // Re z² = r² cos 2θ is harmonic; second order accuracy on this grid
        let harm: Vec<Vec<f64>> = th.iter().map(|&t| r.iter().map(|&s| s * s * (2.0 * t).cos()).collect()).collect();
        let mut edges = harm.clone();
        for row in edges.iter_mut().take(th.len() - 1).skip(1) {
            for v in row.iter_mut().take(r.len() - 1).skip(1) {
                *v = 0.0;
            }
        }
        let out = laplace_polar(&r, &th, &[konst, edges]).unwrap();
        assert!(out[0].iter().flatten().all(|v| (v - 2.5).abs() < 1e-12));
        let err = out[1].iter().flatten().zip(harm.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn bad_sector_options() {
        let mut o = SectorOptions::new(Family::TypeII, 0, (-1.0, 1.0), FieldMethod::Rays);
        o.n_rays = 2;
        assert!(matches!(sector_field(&o, &SolverOptions::default()), Err(Error::InvalidArgument(_))));
        let o = SectorOptions::new(Family::TypeII, 0, (1.0, -1.0), FieldMethod::Rays);
        assert!(matches!(sector_field(&o, &SolverOptions::default()), Err(Error::InvalidArgument(_))));
    }
}
