//! Chebyshev collocation of the fourth-order equation along a line
//! `x = e^{iφ} ξ + b` of the complex plane, with asymptotic-series boundary
//! data and a damped Newton iteration.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, LuFactors};
use crate::series::{SeriesExpansion, TruncationReport};
use crate::spectral::{build_diff_ops, build_grid, interpolate, ChebGrid, DiffOps};
use crate::{BranchedPoint, Error, Result};

/// Smallest damping factor tried by the line search.
pub const MIN_STEP: f64 = 1e-5;

/// Line, parameter `t`, grid size and the sheets used for the series at the ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineDomain {
    pub phi: f64,
    pub b: Complex64,
    pub xi_l: f64,
    pub xi_r: f64,
    pub t: Complex64,
    pub nc: usize,
    /// Unwrapped argument of `x(ξ_l)`.
    pub arg_left: f64,
    /// Unwrapped argument of `x(ξ_r)`.
    pub arg_right: f64,
    pub threshold: f64,
    /// Accept lines whose nodes pass through `x = 0`.
    #[serde(default)]
    pub allow_origin: bool,
}

impl LineDomain {
    /// Real line through the origin, `U₀` sheets `(3π, 0)`. The equation is
    /// regular at `x = 0`, so a node there is allowed.
    pub fn u0_real(t: Complex64, half_width: f64, nc: usize) -> Self {
        Self {
            phi: 0.0,
            b: Complex64::new(0.0, 0.0),
            xi_l: -half_width,
            xi_r: half_width,
            t,
            nc,
            arg_left: 3.0 * PI,
            arg_right: 0.0,
            threshold: 1e-6,
            allow_origin: true,
        }
    }

    /// Imaginary axis as `x = e^{5πi/2} ξ`, `V₀` sheets `(7π/2, 5π/2)`.
    pub fn v0_imag(t: Complex64, half_width: f64, nc: usize) -> Self {
        Self {
            phi: 2.5 * PI,
            arg_left: 3.5 * PI,
            arg_right: 2.5 * PI,
            ..Self::u0_real(t, half_width, nc)
        }
    }

    /// `x = ξ + b`; the end sheets stay next to `3π` and `0`.
    pub fn u0_offset(t: Complex64, b: Complex64, half_width: f64, nc: usize) -> Result<Self> {
        let mut d = Self { b, ..Self::u0_real(t, half_width, nc) };
        d.arg_left = BranchedPoint::from_complex_near(d.x_at(d.xi_l), 3.0 * PI)?.argument;
        d.arg_right = BranchedPoint::from_complex_near(d.x_at(d.xi_r), 0.0)?.argument;
        Ok(d)
    }

    /// The image under `x ↦ ωx`, `t ↦ ω³t` with `ω = e^{2πin/7}`. If `u` solves
    /// the problem on `self`, `ω^{-2} u(x)` solves it at `ωx` on the result.
    pub fn rotated(&self, n: i32) -> Self {
        let angle = 2.0 * PI * n as f64 / 7.0;
        let w = Complex64::from_polar(1.0, angle);
        Self {
            phi: self.phi + angle,
            b: self.b * w,
            t: self.t * w.powi(3),
            arg_left: self.arg_left + angle,
            arg_right: self.arg_right + angle,
            ..self.clone()
        }
    }

    pub fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi)
    }

    pub fn x_at(&self, xi: f64) -> Complex64 {
        self.direction() * xi + self.b
    }

    pub fn endpoints(&self) -> Result<(BranchedPoint, BranchedPoint)> {
        let left = self.x_at(self.xi_l);
        let right = self.x_at(self.xi_r);
        Ok((
            BranchedPoint::new(left.norm(), self.arg_left)?,
            BranchedPoint::new(right.norm(), self.arg_right)?,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.nc < 8 {
            return bad(format!("Nc = {} is too small (need at least 8)", self.nc));
        }
        if !(self.xi_l < self.xi_r) {
            return bad(format!("empty interval [{}, {}]", self.xi_l, self.xi_r));
        }
        if !(self.threshold > 0.0) {
            return bad(format!("threshold must be positive, got {}", self.threshold));
        }
        let (l, r) = self.endpoints()?;
        for (end, xi, name) in [(l, self.xi_l, "left"), (r, self.xi_r, "right")] {
            if !end.consistent_with(self.x_at(xi), 1e-6) {
                return bad(format!("arg_{name} = {} does not match x at that end", end.argument));
            }
        }
        Ok(())
    }
}

/// Start of the Newton iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialMode {
    /// `-6^{1/3} x / (1 + x²)^{1/3}`, corrected affinely to the boundary values.
    Smooth,
    /// Affine interpolation of the boundary values.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on the scaled interior residual.
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            initial: InitialMode::Smooth,
        }
    }
}

/// Converged node values together with the run diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineSolution {
    pub domain: LineDomain,
    pub xi: Vec<f64>,
    pub x: Vec<Complex64>,
    pub u: Vec<Complex64>,
    /// Interior rows, each divided by the size of the terms that make it up.
    pub residual_norm: f64,
    /// Plain `∞`-norm over the interior rows.
    pub raw_residual_norm: f64,
    /// Largest boundary-row residual, derivative rows scaled like the interior.
    pub boundary_residual: f64,
    pub iterations: usize,
    pub line_search_failures: usize,
    pub boundary_truncation: [TruncationReport; 2],
    pub initial_mode: InitialMode,
    pub history: Vec<f64>,
    /// Values of `t` passed through when the direct solve needed continuation.
    #[serde(default)]
    pub continuation: Vec<Complex64>,
}

impl LineSolution {
    pub fn grid(&self) -> Result<ChebGrid> {
        build_grid(self.domain.nc, self.domain.xi_l, self.domain.xi_r)
    }

    /// `u` at a line parameter between the ends.
    pub fn value_at(&self, xi: f64) -> Result<Complex64> {
        interpolate(&self.grid()?, &self.u, xi)
    }

    /// `[u, u_x, u_xx, u_xxx, u_xxxx]` at the nodes.
    pub fn x_derivatives(&self) -> Result<[Vec<Complex64>; 5]> {
        let ops = build_diff_ops(&self.grid()?);
        Ok(x_derivatives(&ops, self.domain.phi, &self.u))
    }
}

/// `d^k u / dx^k = e^{-ikφ} d^k u / dξ^k` for `k = 0..=4`.
pub fn x_derivatives(ops: &DiffOps, phi: f64, u: &[Complex64]) -> [Vec<Complex64>; 5] {
    std::array::from_fn(|k| {
        if k == 0 {
            u.to_vec()
        } else {
            let f = Complex64::from_polar(1.0, -(k as f64) * phi);
            ops.apply(k, u).into_iter().map(|v| v * f).collect()
        }
    })
}

/// Series value and `x`-derivative at one end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub value: Complex64,
    pub derivative: Complex64,
    pub report: TruncationReport,
}

impl BoundaryData {
    /// Data known from elsewhere, e.g. another solve through the same point.
    /// The report records the point and an empty truncation.
    pub fn given(value: Complex64, derivative: Complex64, at: Complex64) -> Self {
        Self {
            value,
            derivative,
            report: TruncationReport {
                m_selected: 0,
                last_term_size: 0.0,
                endpoint: BranchedPoint { modulus: at.norm(), argument: at.arg() },
                threshold: 0.0,
            },
        }
    }

    pub fn from_series(t: Complex64, x: BranchedPoint, threshold: f64) -> Result<Self> {
        let (s, report) = SeriesExpansion::truncated(t, x, threshold)?;
        Ok(Self {
            value: s.evaluate(&x, 0),
            derivative: s.evaluate(&x, 1),
            report,
        })
    }
}

/// Discretised problem: grid, operators and boundary data for one domain.
#[derive(Clone, Debug)]
pub struct LineProblem {
    pub domain: LineDomain,
    pub grid: ChebGrid,
    pub ops: DiffOps,
    pub x: Vec<Complex64>,
    pub left: BoundaryData,
    pub right: BoundaryData,
}

impl LineProblem {
    /// Builds the grid and truncates the series at both ends.
    pub fn new(domain: LineDomain) -> Result<Self> {
        domain.validate()?;
        let grid = build_grid(domain.nc, domain.xi_l, domain.xi_r)?;
        let x: Vec<Complex64> = grid.nodes.iter().map(|&xi| domain.x_at(xi)).collect();
        if !domain.allow_origin {
            let scale = (domain.xi_r - domain.xi_l) * 1e-12;
            if let Some(j) = x.iter().position(|z| z.norm() <= scale) {
                return Err(Error::InvalidArgument(format!("node {j} sits on x = 0")));
            }
        }
        let (l, r) = domain.endpoints()?;
        let left = BoundaryData::from_series(domain.t, l, domain.threshold)?;
        let right = BoundaryData::from_series(domain.t, r, domain.threshold)?;
        let ops = build_diff_ops(&grid);
        Ok(Self { domain, grid, ops, x, left, right })
    }

    /// Problem with explicitly given boundary data, bypassing the series.
    pub fn with_boundary(domain: LineDomain, left: BoundaryData, right: BoundaryData) -> Result<Self> {
        let grid = build_grid(domain.nc, domain.xi_l, domain.xi_r)?;
        let x = grid.nodes.iter().map(|&xi| domain.x_at(xi)).collect();
        let ops = build_diff_ops(&grid);
        Ok(Self { domain, grid, ops, x, left, right })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn factors(&self) -> (Complex64, Complex64) {
        let e = Complex64::from_polar(1.0, -self.domain.phi);
        (e * e, e * e * e * e)
    }

    fn boundary_rows(&self, u: &[Complex64], d1_first: Complex64, d1_last: Complex64, out: &mut [Complex64]) {
        let n = u.len() - 1;
        let dir = self.domain.direction();
        out[0] = u[0] - self.left.value;
        out[1] = d1_first - dir * self.left.derivative;
        out[n - 1] = d1_last - dir * self.right.derivative;
        out[n] = u[n] - self.right.value;
    }

    /// Collocation rows: the equation on `j = 2..Nc-2`, boundary conditions on
    /// `j ∈ {0, 1, Nc-1, Nc}`.
    pub fn residual(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.residual_parts(u).0
    }

    /// Residual rows and, for interior rows, the size of the terms summed.
    fn residual_parts(&self, u: &[Complex64]) -> (Vec<Complex64>, Vec<f64>) {
        assert_eq!(u.len(), self.len(), "u needs Nc + 1 node values");
        let (e2, e4) = self.factors();
        let t = self.domain.t;
        let d1 = self.ops.apply(1, u);
        let d2 = self.ops.apply(2, u);
        let d4m = self.ops.d4();
        let n = u.len() - 1;
        let mut r = vec![Complex64::new(0.0, 0.0); n + 1];
        let mut scale = vec![1.0; n + 1];
        for j in 2..n - 1 {
            let uj = u[j];
            let mut d4 = Complex64::new(0.0, 0.0);
            let mut s4 = 0.0;
            for (k, uk) in u.iter().enumerate() {
                if k != j {
                    let term = d4m[(j, k)] * (uk - uj);
                    d4 += term;
                    s4 += term.norm();
                }
            }
            let poly = uj * uj * uj - 6.0 * t * uj + 6.0 * self.x[j];
            r[j] = e4 * d4 + 10.0 * e2 * d1[j] * d1[j] + 20.0 * e2 * uj * d2[j] + 40.0 * poly;
            scale[j] = 1.0
                + s4
                + 10.0 * d1[j].norm_sqr()
                + 20.0 * (uj * d2[j]).norm()
                + 40.0 * (uj.norm().powi(3) + 6.0 * (t * uj).norm() + 6.0 * self.x[j].norm());
        }
        self.boundary_rows(u, d1[0], d1[n], &mut r);
        let d1m = self.ops.d1();
        for (row, j) in [(1, 0), (n - 1, n)] {
            scale[row] = 1.0 + (0..=n).map(|k| (d1m[(j, k)] * (u[k] - u[j])).norm()).sum::<f64>();
        }
        (r, scale)
    }

    /// Newton linearisation of [`LineProblem::residual`].
    pub fn jacobian(&self, u: &[Complex64]) -> CMatrix {
        assert_eq!(u.len(), self.len());
        let (e2, e4) = self.factors();
        let t = self.domain.t;
        let d1u = self.ops.apply(1, u);
        let d2u = self.ops.apply(2, u);
        let (d1, d2, d4) = (self.ops.d1(), self.ops.d2(), self.ops.d4());
        let n = u.len() - 1;
        let mut jac = CMatrix::zeros(n + 1);
        for i in 2..n - 1 {
            let a = 20.0 * e2 * d1u[i];
            let b = 20.0 * e2 * u[i];
            let row = jac.row_mut(i);
            for k in 0..=n {
                row[k] = e4 * d4[(i, k)] + a * d1[(i, k)] + b * d2[(i, k)];
            }
            row[i] += 20.0 * e2 * d2u[i] + 120.0 * u[i] * u[i] - 240.0 * t;
        }
        jac[(0, 0)] = Complex64::new(1.0, 0.0);
        jac[(n, n)] = Complex64::new(1.0, 0.0);
        for k in 0..=n {
            jac[(1, k)] = Complex64::new(d1[(0, k)], 0.0);
            jac[(n - 1, k)] = Complex64::new(d1[(n, k)], 0.0);
        }
        jac
    }

    /// Starting values; the smooth guess falls back to the linear one when
    /// `1 + x²` comes close to zero on the line.
    pub fn initial_iterate(&self, mode: InitialMode) -> (Vec<Complex64>, InitialMode) {
        let n = self.len() - 1;
        let (ul, ur) = (self.left.value, self.right.value);
        let affine = |j: usize, a: Complex64, b: Complex64| {
            let s = (self.grid.nodes[j] - self.domain.xi_l) / (self.domain.xi_r - self.domain.xi_l);
            a * (1.0 - s) + b * s
        };
        let linear = || (0..=n).map(|j| affine(j, ul, ur)).collect::<Vec<_>>();
        if mode == InitialMode::Linear || self.x.iter().any(|z| (1.0 + z * z).norm() < 1e-3) {
            return (linear(), InitialMode::Linear);
        }
        // (1 + x²)^{1/3}, continued from the right end along the line
        let c = -crate::cbrt6();
        let xr = BranchedPoint::new(self.x[n].norm(), self.domain.arg_right).expect("validated");
        let target = c * xr.cbrt();
        let q = 1.0 + self.x[n] * self.x[n];
        let mut root = (0..3)
            .map(|k| q.powf(1.0 / 3.0) * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0))
            .min_by(|a, b| {
                let da = (c * self.x[n] / a - target).norm();
                let db = (c * self.x[n] / b - target).norm();
                da.total_cmp(&db)
            })
            .unwrap();
        let mut g = vec![Complex64::new(0.0, 0.0); n + 1];
        g[n] = c * self.x[n] / root;
        for j in (0..n).rev() {
            let q = 1.0 + self.x[j] * self.x[j];
            let p = q.powf(1.0 / 3.0);
            root = (0..3)
                .map(|k| p * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0))
                .min_by(|a, b| (a - root).norm().total_cmp(&(b - root).norm()))
                .unwrap();
            g[j] = c * self.x[j] / root;
        }
        let (gl, gr) = (g[0], g[n]);
        let u = (0..=n).map(|j| g[j] + affine(j, ul - gl, ur - gr)).collect();
        (u, InitialMode::Smooth)
    }

    /// Largest scaled interior residual and largest boundary residual.
    fn norms(&self, u: &[Complex64]) -> (f64, f64, f64) {
        let (r, s) = self.residual_parts(u);
        let n = r.len() - 1;
        let interior = (2..n - 1).map(|j| r[j].norm() / s[j]).fold(0.0, f64::max);
        let raw = (2..n - 1).map(|j| r[j].norm()).fold(0.0, f64::max);
        let boundary = [0, 1, n - 1, n].iter().map(|&j| r[j].norm() / s[j]).fold(0.0, f64::max);
        (interior, raw, boundary)
    }

    /// Damped Newton iteration. A full step is taken when it lowers the merit
    /// function, otherwise `λ` is backtracked with a quadratic model down to
    /// [`MIN_STEP`]; if nothing helps, `MIN_STEP` is taken anyway.
    pub fn newton_armijo(&self, u0: Vec<Complex64>, opts: &SolverOptions) -> Result<LineSolution> {
        self.newton_from(u0, opts, InitialMode::Linear)
    }

    fn newton_from(&self, u0: Vec<Complex64>, opts: &SolverOptions, initial_mode: InitialMode) -> Result<LineSolution> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", opts.tol)));
        }
        let mut u = u0;
        let mut history = Vec::new();
        let mut failures = 0;
        let mut polished = false;
        for it in 0..=opts.max_iter {
            let (interior, _, boundary) = self.norms(&u);
            history.push(interior);
            if interior < opts.tol && boundary < 1e-12 && polished {
                return Ok(self.finish(u, it, failures, history, initial_mode));
            }
            if it == opts.max_iter {
                break;
            }
            let lu = LuFactors::new(self.jacobian(&u))?;
            let step = lu.solve(&self.residual(&u));
            // natural level function ‖J(u_n)⁻¹ F(·)‖², invariant under row scaling
            let level = |v: &[Complex64]| -> f64 { lu.solve(&self.residual(v)).iter().map(|z| z.norm_sqr()).sum() };
            let f0: f64 = step.iter().map(|z| z.norm_sqr()).sum();
            let trial = |lambda: f64| -> Vec<Complex64> { u.iter().zip(&step).map(|(a, d)| a - lambda * d).collect() };
            if interior < opts.tol && boundary < 1e-12 {
                // one more full step to reach the rounding floor
                let next = trial(1.0);
                if level(&next) <= 100.0 * f0 {
                    u = next;
                }
                polished = true;
                continue;
            }
            let mut lambda = 1.0;
            let mut next = trial(lambda);
            let mut f1 = level(&next);
            while !(f1 < f0) {
                // minimiser of the quadratic through f(0), f'(0) = -2f(0), f(λ)
                let model = f0 * lambda * lambda / (f1 + (2.0 * lambda - 1.0) * f0);
                let lower = 0.1 * lambda;
                lambda = if model.is_finite() { model.clamp(lower, 0.5 * lambda) } else { 0.5 * lambda };
                if lambda < MIN_STEP {
                    lambda = MIN_STEP;
                    failures += 1;
                    next = trial(lambda);
                    f1 = level(&next);
                    break;
                }
                next = trial(lambda);
                f1 = level(&next);
            }
            let size = step.iter().map(|d| d.norm()).fold(0.0, f64::max) * lambda;
            u = next;
            if size < 1e-12 && lambda == 1.0 {
                let (interior, _, _) = self.norms(&u);
                history.push(interior);
                return Ok(self.finish(u, it + 1, failures, history, initial_mode));
            }
        }
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            residual: *history.last().unwrap_or(&f64::NAN),
            history,
        })
    }

    fn finish(&self, u: Vec<Complex64>, iterations: usize, failures: usize, history: Vec<f64>, initial_mode: InitialMode) -> LineSolution {
        let (residual_norm, raw_residual_norm, boundary_residual) = self.norms(&u);
        LineSolution {
            domain: self.domain.clone(),
            xi: self.grid.nodes.clone(),
            x: self.x.clone(),
            u,
            residual_norm,
            raw_residual_norm,
            boundary_residual,
            iterations,
            line_search_failures: failures,
            boundary_truncation: [self.left.report, self.right.report],
            initial_mode,
            history,
            continuation: Vec::new(),
        }
    }

    /// Initial iterate followed by Newton.
    pub fn solve(&self, opts: &SolverOptions) -> Result<LineSolution> {
        let (u0, mode) = self.initial_iterate(opts.initial);
        self.newton_from(u0, opts, mode)
    }
}

/// Series truncation at both ends, operators, initial iterate and Newton.
///
/// For `t ≠ 0` the solve is continued from `t = 0` along `s ↦ s·t`: from the
/// smooth iterate Newton may settle on a different solution once
/// oscillations develop.
pub fn solve_line(domain: &LineDomain, opts: &SolverOptions) -> Result<LineSolution> {
    let problem = LineProblem::new(domain.clone())?;
    if domain.t == Complex64::new(0.0, 0.0) {
        problem.solve(opts)
    } else {
        continue_in_t(&problem, opts)
    }
}

/// Newton iterations allowed per continuation step before the step is halved.
const STEP_ITERATIONS: usize = 20;

/// Continuation along `s ↦ s·t`, `s` from `0` to `1`, with a secant predictor
/// and adaptive steps. The first attempt goes straight to `s = 1`.
pub fn continue_in_t(target: &LineProblem, opts: &SolverOptions) -> Result<LineSolution> {
    let at = |s: f64| -> Result<LineProblem> {
        if s == 1.0 {
            return Ok(target.clone());
        }
        LineProblem::new(LineDomain { t: target.domain.t * s, ..target.domain.clone() })
    };
    let mut prev = at(0.0)?.solve(opts)?;
    let mut before: Option<(f64, Vec<Complex64>)> = None;
    let mut path = vec![prev.domain.t];
    let step_opts = SolverOptions { max_iter: STEP_ITERATIONS.min(opts.max_iter), ..*opts };
    let (mut s, mut ds) = (0.0f64, 1.0f64);
    let mut total = prev.iterations;
    while s < 1.0 {
        let next_s = (s + ds).min(1.0);
        let problem = at(next_s)?;
        let mut guess = prev.u.clone();
        if let Some((s_old, u_old)) = &before {
            let f = (next_s - s) / (s - s_old);
            for (g, o) in guess.iter_mut().zip(u_old) {
                *g += (*g - o) * f;
            }
        }
        // shift affinely onto the new boundary values
        let n = guess.len() - 1;
        let (dl, dr) = (problem.left.value - guess[0], problem.right.value - guess[n]);
        let span = problem.domain.xi_r - problem.domain.xi_l;
        for (g, xi) in guess.iter_mut().zip(&problem.grid.nodes) {
            let w = (xi - problem.domain.xi_l) / span;
            *g += dl * (1.0 - w) + dr * w;
        }
        match problem.newton_from(guess, &step_opts, prev.initial_mode) {
            Ok(sol) => {
                total += sol.iterations;
                before = Some((s, std::mem::replace(&mut prev, sol).u));
                s = next_s;
                path.push(prev.domain.t);
                ds = (2.0 * ds).min(1.0 - s);
            }
            Err(Error::NoConvergence { .. }) if ds > 1.0 / 1024.0 => ds *= 0.5,
            Err(Error::NoConvergence { history, .. }) => {
                return Err(Error::NoConvergence {
                    iterations: total,
                    residual: *history.last().unwrap_or(&f64::NAN),
                    history,
                })
            }
            Err(e) => return Err(e),
        }
    }
    prev.iterations = total;
    prev.continuation = path;
    Ok(prev)
}
