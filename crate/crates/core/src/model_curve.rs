//! The degenerate spectral curve with two double branch points `λ₁, λ₃` and a
//! simple one `λ₅`, the phase integral `F`, sector membership and the
//! exponential rates derived from `Re F(λ₁,₃)`.
//!
//! Branches of `√(λ - λ₅)`, `√(λ₅² - 48t)` and `(F″)^{-1/2}` are fixed at
//! `t = 0` by closed forms in `x` (on the sheet carried by the
//! [`BranchedPoint`]) and continued along the straight segment `t' = s t`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::stokes_data::Family;
use crate::{cbrt6, BranchedPoint, Error, Result, I};

/// `arctan(1/√5)`.
pub fn alpha() -> f64 {
    (1.0 / 5f64.sqrt()).atan()
}

/// Half-width of `ω₀` at `t = 0`.
pub fn alpha0() -> f64 {
    3.0 * PI / 7.0 - 3.0 * alpha() / 7.0
}

/// Half-width of `ω̂₀` at `t = 0`.
pub fn beta0() -> f64 {
    3.0 * alpha() / 7.0
}

pub fn h_modulus() -> f64 {
    5f64.powf(0.25) * 3f64.powf(5.0 / 12.0) * 2f64.powf(11.0 / 12.0)
}

/// `h_σ` for `σ = ±1`.
pub fn h(sigma: f64) -> Complex64 {
    Complex64::from_polar(h_modulus(), sigma * alpha() / 2.0)
}

pub fn a_modulus() -> f64 {
    15f64.powf(0.125) / (32f64.powf(0.125) * PI.sqrt())
}

/// `A_σ` for `σ = ±1`.
pub fn a(sigma: f64) -> Complex64 {
    Complex64::from_polar(a_modulus(), sigma * (PI / 4.0 - alpha() / 4.0))
}

/// Radius `ρ₀(1 + |t|^{3/2})` below which sector statements are not made.
pub fn rho0_of_t(rho0: f64, t: Complex64) -> f64 {
    rho0 * (1.0 + t.norm().powf(1.5))
}

const DEGENERACY_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCurvePoint {
    pub x: BranchedPoint,
    pub t: Complex64,
    pub lambda5: Complex64,
    pub lambda1: Complex64,
    pub lambda3: Complex64,
    /// `F(λ₁)`, `F(λ₃)` on the continued branch.
    pub f1: Complex64,
    pub f3: Complex64,
    pub fpp1: Complex64,
    pub fpp3: Complex64,
    pub fm1: Complex64,
    pub fm2: Complex64,
    /// `(F″(λ₁,₃))^{-1/2}` on the continued branch.
    pub g1: Complex64,
    pub g3: Complex64,
    /// `√(λ₁,₃ - λ₅)` on the continued branch.
    pub w1: Complex64,
    pub w3: Complex64,
}

/// Which double branch point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Double {
    L1,
    L3,
}

/// The three roots of `λ³ + pλ + q = 0`.
pub fn depressed_cubic_roots(p: Complex64, q: Complex64) -> [Complex64; 3] {
    let zero = Complex64::new(0.0, 0.0);
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let c1 = -q / 2.0 + disc;
    let c2 = -q / 2.0 - disc;
    let cube = if c1.norm() >= c2.norm() { c1 } else { c2 };
    if cube == zero {
        return [zero; 3];
    }
    let u = cube.powf(1.0 / 3.0);
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut roots = [zero; 3];
    let mut uk = u;
    for r in roots.iter_mut() {
        let mut z = uk - p / (3.0 * uk);
        for _ in 0..3 {
            let f = z * z * z + p * z + q;
            let df = 3.0 * z * z + p;
            if df.norm() == 0.0 {
                break;
            }
            z -= f / df;
        }
        *r = z;
        uk *= omega;
    }
    roots
}

fn phase_from_w(w: Complex64, lambda5: Complex64, t: Complex64) -> Complex64 {
    let w2 = w * w;
    w * w2 * (w2 * w2 / 105.0 + lambda5 * w2 / 30.0 + lambda5 * lambda5 / 24.0 - t / 3.0)
}

fn nearer(candidate: Complex64, reference: Complex64) -> Complex64 {
    if (candidate - reference).norm() <= (candidate + reference).norm() {
        candidate
    } else {
        -candidate
    }
}

/// Picks `±c` closest to `reference`, refusing when the choice is ambiguous.
fn track_sign(candidate: Complex64, reference: Complex64) -> Option<Complex64> {
    let chosen = nearer(candidate, reference);
    let good = (chosen - reference).norm();
    let bad = (chosen + reference).norm();
    (good < 0.5 * bad).then_some(chosen)
}

#[derive(Clone, Copy)]
struct Branches {
    lambda5: Complex64,
    q: Complex64,
    w1: Complex64,
    w3: Complex64,
    g1: Complex64,
    g3: Complex64,
}

fn lambdas(lambda5: Complex64, q: Complex64) -> (Complex64, Complex64) {
    let s5 = 5f64.sqrt();
    ((-lambda5 + I * s5 * q) / 4.0, (-lambda5 - I * s5 * q) / 4.0)
}

fn anchor(x: &BranchedPoint) -> Branches {
    let lambda5 = -2.0 * cbrt6() * x.cbrt();
    let q = lambda5;
    let (l1, l3) = lambdas(lambda5, q);
    let t0 = Complex64::new(0.0, 0.0);
    let x76 = x.powf(7.0 / 6.0);
    let xm14 = x.powf(-0.25);
    let target_f1 = 0.5 * h(-1.0) * (6.0 / 7.0) * x76;
    let target_f3 = 0.5 * h(1.0) * (6.0 / 7.0) * x76;
    let pick_w = |l: Complex64, target: Complex64| {
        let w = (l - lambda5).sqrt();
        let f = phase_from_w(w, lambda5, t0);
        if (f - target).norm() <= (f + target).norm() {
            w
        } else {
            -w
        }
    };
    let w1 = pick_w(l1, target_f1);
    let w3 = pick_w(l3, target_f3);
    let fpp1 = w1 * (l1 - l3) / 30.0;
    let fpp3 = w3 * (l3 - l1) / 30.0;
    let two_sqrt_pi = 2.0 * PI.sqrt();
    let g1 = nearer(fpp1.sqrt().inv(), I * two_sqrt_pi * a(-1.0) * xm14);
    let g3 = nearer(fpp3.sqrt().inv(), -I * two_sqrt_pi * a(1.0) * xm14);
    Branches { lambda5, q, w1, w3, g1, g3 }
}

fn step(prev: &Branches, x: Complex64, t: Complex64) -> Option<Branches> {
    let roots = depressed_cubic_roots(-24.0 * t, 48.0 * x);
    let mut d: Vec<(f64, Complex64)> = roots.iter().map(|r| ((r - prev.lambda5).norm(), *r)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    if !(d[0].0 < 0.25 * d[1].0) {
        return None;
    }
    let lambda5 = d[0].1;
    let q = track_sign((lambda5 * lambda5 - 48.0 * t).sqrt(), prev.q)?;
    let (l1, l3) = lambdas(lambda5, q);
    let w1 = track_sign((l1 - lambda5).sqrt(), prev.w1)?;
    let w3 = track_sign((l3 - lambda5).sqrt(), prev.w3)?;
    let fpp1 = w1 * (l1 - l3) / 30.0;
    let fpp3 = w3 * (l3 - l1) / 30.0;
    let g1 = track_sign(fpp1.sqrt().inv(), prev.g1)?;
    let g3 = track_sign(fpp3.sqrt().inv(), prev.g3)?;
    Some(Branches { lambda5, q, w1, w3, g1, g3 })
}

// `n` grows only right before restarting the outer loop
#[allow(clippy::mut_range_bound)]
fn continue_to(x: &BranchedPoint, t: Complex64) -> Result<Branches> {
    let start = anchor(x);
    if t == Complex64::new(0.0, 0.0) {
        return Ok(start);
    }
    let xv = x.value();
    let ratio = t.norm() / x.modulus.powf(2.0 / 3.0);
    let mut n = 16 + (64.0 * ratio).ceil() as usize;
    let mut last_good = 0.0;
    'refine: while n <= MAX_STEPS {
        let mut b = start;
        for k in 1..=n {
            let s = k as f64 / n as f64;
            match step(&b, xv, t * s) {
                Some(next) => b = next,
                None => {
                    last_good = (k - 1) as f64 / n as f64;
                    n *= 4;
                    continue 'refine;
                }
            }
        }
        return Ok(b);
    }
    // a failure right at the end means the target itself is degenerate
    if last_good > 0.99 {
        for r in depressed_cubic_roots(-24.0 * t, 48.0 * xv) {
            check_degenerate_with(r, t, 1e-6)?;
        }
    }
    Err(Error::BranchTracking { at: last_good })
}

fn check_degenerate(lambda5: Complex64, t: Complex64) -> Result<()> {
    check_degenerate_with(lambda5, t, DEGENERACY_TOL)
}

fn check_degenerate_with(lambda5: Complex64, t: Complex64, tol: f64) -> Result<()> {
    let l2 = lambda5 * lambda5;
    let scale = tol * l2.norm();
    if (l2 - 8.0 * t).norm() < scale || (l2 - 48.0 * t).norm() < scale {
        return Err(Error::DegenerateCurve { lambda5 });
    }
    Ok(())
}

fn assemble(x: BranchedPoint, t: Complex64, b: Branches) -> ModelCurvePoint {
    let (lambda1, lambda3) = lambdas(b.lambda5, b.q);
    let xv = x.value();
    let l5 = b.lambda5;
    ModelCurvePoint {
        x,
        t,
        lambda5: l5,
        lambda1,
        lambda3,
        f1: phase_from_w(b.w1, l5, t),
        f3: phase_from_w(b.w3, l5, t),
        fpp1: b.w1 * (lambda1 - lambda3) / 30.0,
        fpp3: b.w3 * (lambda3 - lambda1) / 30.0,
        fm1: l5 * (t * l5 - 6.0 * xv) / 16.0,
        fm2: l5 * l5 * (2.0 * t * l5 - 9.0 * xv) / 40.0,
        g1: b.g1,
        g3: b.g3,
        w1: b.w1,
        w3: b.w3,
    }
}

/// Branch points and phase data at `(x, t)`.
///
/// `λ₅` continues `-2·6^{1/3}x^{1/3}` from `t = 0`; with a hint, the cubic
/// root nearest the hint is used instead and the remaining square roots take
/// the sign nearest their continued values.
pub fn branch_points(x: BranchedPoint, t: Complex64, continuity_hint: Option<Complex64>) -> Result<ModelCurvePoint> {
    let mut b = continue_to(&x, t)?;
    if let Some(hint) = continuity_hint {
        let roots = depressed_cubic_roots(-24.0 * t, 48.0 * x.value());
        let l5 = roots
            .into_iter()
            .min_by(|a, b| (a - hint).norm().total_cmp(&(b - hint).norm()))
            .unwrap();
        if l5 != b.lambda5 {
            let q = nearer((l5 * l5 - 48.0 * t).sqrt(), b.q);
            let (l1, l3) = lambdas(l5, q);
            let w1 = nearer((l1 - l5).sqrt(), b.w1);
            let w3 = nearer((l3 - l5).sqrt(), b.w3);
            let g1 = nearer((w1 * (l1 - l3) / 30.0).sqrt().inv(), b.g1);
            let g3 = nearer((w3 * (l3 - l1) / 30.0).sqrt().inv(), b.g3);
            b = Branches { lambda5: l5, q, w1, w3, g1, g3 };
        }
    }
    check_degenerate(b.lambda5, t)?;
    Ok(assemble(x, t, b))
}

/// `F(λ)` with the principal `√(λ - λ₅)` (cut along `λ - λ₅ ∈ (-∞, 0]`).
///
/// At `λ₁, λ₃` this can differ in sign from the continued values
/// `point.f1`, `point.f3`.
pub fn phase(point: &ModelCurvePoint, lambda: Complex64) -> Complex64 {
    phase_from_w((lambda - point.lambda5).sqrt(), point.lambda5, point.t)
}

/// `F″` at a double branch point, continued branch.
pub fn phase_second_derivative(point: &ModelCurvePoint, which: Double) -> Complex64 {
    match which {
        Double::L1 => point.fpp1,
        Double::L3 => point.fpp3,
    }
}

/// `(F″)^{-1/2}` at a double branch point, continued branch.
pub fn inverse_sqrt_second_derivative(point: &ModelCurvePoint, which: Double) -> Complex64 {
    match which {
        Double::L1 => point.g1,
        Double::L3 => point.g3,
    }
}

/// Two-term large-`x` expansion of `(F(λ₁), F(λ₃))`.
pub fn phase_expansion(x: &BranchedPoint, t: Complex64) -> (Complex64, Complex64) {
    let lead = 0.5 * (6.0 / 7.0) * x.powf(7.0 / 6.0);
    let c = 7.5f64.powf(0.25);
    let corr = |sigma: f64| sigma * I * c * Complex64::from_polar(1.0, -sigma * 1.5 * alpha()) * t * x.powf(0.5);
    (lead * h(-1.0) + corr(1.0), lead * h(1.0) + corr(-1.0))
}

impl ModelCurvePoint {
    /// `|λ₅³ - 24tλ₅ + 48x| / max(1, |λ₅|³)`.
    pub fn cubic_residual(&self) -> f64 {
        let l = self.lambda5;
        (l * l * l - 24.0 * self.t * l + 48.0 * self.x.value()).norm() / l.norm().powi(3).max(1.0)
    }

    /// Residuals of `λ₁ + λ₃ = -λ₅/2` and `λ₁λ₃ = (3/8)λ₅² - 15t`, relative.
    pub fn quadratic_residuals(&self) -> [f64; 2] {
        let l5 = self.lambda5;
        let scale = l5.norm().max(1.0);
        [
            (self.lambda1 + self.lambda3 + l5 / 2.0).norm() / scale,
            (self.lambda1 * self.lambda3 - 0.375 * l5 * l5 + 15.0 * self.t).norm() / (scale * scale),
        ]
    }

    /// `(x, t)` recovered from the symmetric functions of the branch points.
    pub fn reconstruct(&self) -> (Complex64, Complex64, Complex64) {
        let (l1, l3, l5) = (self.lambda1, self.lambda3, self.lambda5);
        let sum = 2.0 * l1 + 2.0 * l3 + l5;
        let t = -(l1 * l1 + 4.0 * l1 * l3 + 2.0 * l1 * l5 + 2.0 * l3 * l5 + l3 * l3) / 30.0;
        let x = -(2.0 * l1 * l1 * l3 + 2.0 * l1 * l3 * l3 + 4.0 * l1 * l3 * l5 + l1 * l1 * l5 + l3 * l3 * l5) / 30.0;
        (sum, t, x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serialises")
    }
}

/// Elementary regions: `ω_k` (around `arg x = 6πk/7`) and `ω̂_k` (around `3π + 6πk/7`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Omega(i32),
    OmegaHat(i32),
}

impl Component {
    fn index(&self) -> i32 {
        match *self {
            Component::Omega(k) | Component::OmegaHat(k) => k,
        }
    }

    /// Centre direction at `t = 0`.
    pub fn center(&self) -> f64 {
        let base = 6.0 * PI * self.index() as f64 / 7.0;
        match self {
            Component::Omega(_) => base,
            Component::OmegaHat(_) => base + 3.0 * PI,
        }
    }

    /// `[lo, hi]` at `t = 0`.
    pub fn bounds_t0(&self) -> (f64, f64) {
        let w = match self {
            Component::Omega(_) => alpha0(),
            Component::OmegaHat(_) => beta0(),
        };
        (self.center() - w, self.center() + w)
    }

    /// Signed distance from the region: `min(±Re F(λ₁), Re F(λ₃))` in the
    /// frame rotated back to `k = 0`; `None` outside the window where that
    /// frame is meaningful.
    pub fn margin(&self, x: &BranchedPoint, t: Complex64) -> Result<Option<f64>> {
        let k = self.index() as f64;
        let xr = x.rotated(-6.0 * PI * k / 7.0);
        let tr = t * Complex64::from_polar(1.0, -18.0 * PI * k / 7.0);
        let offset = match self {
            Component::Omega(_) => xr.argument,
            Component::OmegaHat(_) => xr.argument - 3.0 * PI,
        };
        if offset.abs() >= 6.0 * PI / 7.0 {
            return Ok(None);
        }
        let p = branch_points(xr, tr, None)?;
        let s1 = match self {
            Component::Omega(_) => 1.0,
            Component::OmegaHat(_) => -1.0,
        };
        Ok(Some((s1 * p.f1.re).min(p.f3.re)))
    }
}

/// Components whose union is the region of algebraic behaviour.
pub fn components(family: Family, m: i32) -> Vec<Component> {
    match family {
        Family::TypeII => vec![
            Component::OmegaHat(m - 4),
            Component::Omega(m),
            Component::OmegaHat(m - 3),
            Component::OmegaHat(m),
        ],
        Family::TypeI => vec![
            Component::Omega(m + 3),
            Component::OmegaHat(m),
            Component::Omega(m + 4),
        ],
    }
}

/// Angular description of a family's region at `t = 0`, merged into intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub family: Family,
    pub m: i32,
    pub t: Complex64,
    pub components: Vec<Component>,
    pub bounds_t0: Vec<(f64, f64)>,
}

pub fn sector_spec(family: Family, m: i32, t: Complex64) -> SectorSpec {
    let comps = components(family, m);
    let mut iv: Vec<(f64, f64)> = comps.iter().map(|c| c.bounds_t0()).collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in iv {
        match merged.last_mut() {
            Some(last) if lo <= last.1 + 1e-12 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    SectorSpec {
        family,
        m,
        t,
        components: comps,
        bounds_t0: merged,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub membership: Membership,
    /// Largest signed margin over the family's components.
    pub margin: f64,
    pub component: Option<Component>,
}

/// Whether `x` lies in the region of algebraic behaviour of the family member.
pub fn sector_membership(family: Family, m: i32, x: BranchedPoint, t: Complex64, rho0: f64) -> Result<SectorReport> {
    let radius = rho0_of_t(rho0, t);
    if x.modulus <= radius {
        return Err(Error::InsideRadius {
            modulus: x.modulus,
            radius,
        });
    }
    let tol = 1e-9 * x.modulus.powf(7.0 / 6.0).max(1.0);
    let mut best: Option<(f64, Component)> = None;
    for c in components(family, m) {
        if let Some(margin) = c.margin(&x, t)? {
            if best.is_none_or(|(b, _)| margin > b) {
                best = Some((margin, c));
            }
        }
    }
    Ok(match best {
        None => SectorReport {
            membership: Membership::Outside,
            margin: f64::NEG_INFINITY,
            component: None,
        },
        Some((margin, c)) => SectorReport {
            membership: if margin > tol {
                Membership::Inside
            } else if margin >= -tol {
                Membership::Boundary
            } else {
                Membership::Outside
            },
            margin,
            component: Some(c),
        },
    })
}

/// Edges `(lo, hi)` of a component at radius `modulus`, where its margin
/// changes sign. Found by stepping out from the centre and bisecting.
pub fn boundary_angles(component: Component, t: Complex64, modulus: f64) -> Result<(f64, f64)> {
    let centre = component.center();
    let f = |theta: f64| -> Result<f64> {
        let x = BranchedPoint::new(modulus, theta)?;
        component
            .margin(&x, t)?
            .ok_or_else(|| Error::InvalidArgument("boundary outside the component window".into()))
    };
    if f(centre)? <= 0.0 {
        return Err(Error::InvalidArgument(format!("{component:?} is empty at |x| = {modulus}")));
    }
    let edge = |dir: f64| -> Result<f64> {
        let h = 0.01;
        let mut inner = centre;
        let mut outer = centre + dir * h;
        while f(outer)? > 0.0 {
            inner = outer;
            outer += dir * h;
        }
        for _ in 0..60 {
            let mid = 0.5 * (inner + outer);
            if f(mid)? > 0.0 {
                inner = mid;
            } else {
                outer = mid;
            }
            if (outer - inner).abs() < 1e-14 {
                break;
            }
        }
        Ok(0.5 * (inner + outer))
    };
    Ok((edge(-1.0)?, edge(1.0)?))
}

/// Predicted `U_m - V_{m-3}` in `ω̂_m`: two terms `c·x^{-1/4}e^{E}` decaying
/// like `e^{-rate·|x|^{7/6}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesPrediction {
    pub rate: f64,
    pub period: f64,
    /// Coefficients of `x^{-1/4} e^{2F(λ₁)}` and `x^{-1/4} e^{-2F(λ₃)}`
    /// in the frame rotated back to `m = 0`; `(A₋, -iA₊)` at `t = 0`.
    pub amplitude_prefactor: [Complex64; 2],
    pub power: f64,
    /// `2F(λ₁)` and `-2F(λ₃)`.
    pub exponents: [Complex64; 2],
}

impl StokesPrediction {
    /// Sum of the two terms at the point the prediction was made for.
    pub fn value(&self, x: &BranchedPoint) -> Complex64 {
        let p = x.powf(self.power);
        self.amplitude_prefactor[0] * p * self.exponents[0].exp() + self.amplitude_prefactor[1] * p * self.exponents[1].exp()
    }

    /// `2|A| r^{-1/4} e^{-rate r^{7/6}}` for `t = 0`-like predictions.
    pub fn envelope(&self, r: f64) -> f64 {
        (self.amplitude_prefactor[0].norm() + self.amplitude_prefactor[1].norm())
            * r.powf(self.power)
            * (-self.rate * r.powf(7.0 / 6.0)).exp()
    }
}

pub fn stokes_prediction(x: BranchedPoint, t: Complex64, m: i32) -> Result<StokesPrediction> {
    let k = m as f64;
    let xr = x.rotated(-6.0 * PI * k / 7.0);
    let tr = t * Complex64::from_polar(1.0, -18.0 * PI * k / 7.0);
    if (xr.argument - 3.0 * PI).abs() >= 6.0 * PI / 7.0 {
        return Err(Error::InvalidArgument(format!(
            "arg x = {} is not near the overlap sector centred at {}",
            x.argument,
            3.0 * PI + 6.0 * PI * k / 7.0
        )));
    }
    let p = branch_points(xr, tr, None)?;
    let scale = xr.modulus.powf(7.0 / 6.0);
    let e = [2.0 * p.f1, -2.0 * p.f3];
    let rates = [-e[0].re / scale, -e[1].re / scale];
    let slow = if rates[0] <= rates[1] { 0 } else { 1 };
    let rate = rates[slow];
    if !(rate > 0.0) {
        return Err(Error::NotExponentiallySmall { rate });
    }
    let two_sqrt_pi = 2.0 * PI.sqrt();
    let x14 = xr.powf(0.25);
    Ok(StokesPrediction {
        rate,
        period: 2.0 * PI / (e[slow].im / scale).abs(),
        amplitude_prefactor: [p.g1 * x14 / (two_sqrt_pi * I), p.g3 * x14 / two_sqrt_pi],
        power: -0.25,
        exponents: e,
    })
}

/// Closed-form large-`N` approximation of `a_N(t)` as `(ln|a_N|, arg a_N)`.
///
/// Meaningful for `N ≳ 15`. At `t = 0` the inner sum over `m` is evaluated
/// exactly (`7` or `0`), so indices not divisible by seven give `ln|a_N| = -∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCoefficient {
    pub ln_abs: f64,
    pub phase: f64,
}

pub fn coefficient_asymptotics(n: usize, t: Complex64) -> Result<AsymptoticCoefficient> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("asymptotic formula needs N >= 3, got {n}")));
    }
    let nf = n as f64;
    let al = alpha();
    let ln_pref = -(2.0 * (7.0 * PI).sqrt()).ln() + (2.0 * nf / 7.0 - 1.0) * (nf - 2.75).ln()
        - (2.0 * nf / 7.0 - 11.0 / 14.0)
        + (-nf / 7.0 + 0.25) * (0.5 * 5f64.ln() + 17.0 / 6.0 * 3f64.ln() + 11.0 / 6.0 * 2f64.ln());
    let b_mod = 5f64.powf(1.0 / 7.0) * 3f64.powf(-5.0 / 14.0) * 2f64.powf(5.0 / 14.0);
    let zero_t = t == Complex64::new(0.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for sigma in [1.0, -1.0] {
        let outer = a(-sigma) * Complex64::from_polar(1.0, sigma * (nf / 7.0 - 0.25) * al);
        let inner = if zero_t {
            if n.is_multiple_of(7) {
                Complex64::new(7.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            (0..7)
                .map(|m| {
                    let mf = m as f64;
                    let b = sigma * b_mod * Complex64::from_polar(1.0, -sigma * 9.0 / 7.0 * al - 18.0 * PI * mf / 7.0);
                    (I * 2.0 * PI * ((n * m) % 7) as f64 / 7.0 - I * t * nf.powf(3.0 / 7.0) * b).exp()
                })
                .sum()
        };
        sum += outer * inner;
    }
    Ok(AsymptoticCoefficient {
        ln_abs: ln_pref + sum.norm().ln(),
        phase: sum.arg(),
    })
}
