//! Formal solutions `u_f(x, t) = Σ a_n(t) x^{-(n-1)/3}` with `a_0 = -6^{1/3}`.
//!
//! Coefficients come from the nonlinear recurrence obtained by substituting
//! the series into the equation. At `t = 0` only every seventh coefficient is
//! nonzero and a separate, sparser recurrence for `b_n = a_{7n}(0)` is
//! available; the two are kept independent so they can check each other.
//!
//! `a_n` grows like `Γ(2n/7)`, so a scaled ("log-magnitude") variant of the
//! recurrence stores `a_n = mantissa · e^{L_n}` with `L_n = ln Γ(2n/7 + 1)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{cbrt6, BranchedPoint, Error, Result};

/// Hard cap on the number of terms scanned by the truncation rules.
pub const DEFAULT_TRUNCATION_CAP: usize = 400;

/// Number of consecutive indices that must stay below threshold before the
/// truncation rule accepts an index. Two full periods of the 7-sparse pattern.
const TAIL_WINDOW: usize = 14;

pub fn leading_coefficient() -> f64 {
    -cbrt6()
}

/// A coefficient stored as `mantissa · e^{ln_scale}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCoefficient {
    pub mantissa: Complex64,
    pub ln_scale: f64,
}

impl LogCoefficient {
    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::zero()
    }

    /// `ln |a|`; `-inf` for an exact zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.ln_scale
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs() / std::f64::consts::LN_10
    }

    pub fn phase(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Plain value; overflows to infinity when the scale is too large.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.ln_scale.exp()
    }
}

/// Incremental evaluation of the coefficient recurrence.
///
/// Produces `a_0, a_1, ...` one at a time so that truncation rules can stop
/// as soon as they have what they need.
#[derive(Clone, Debug)]
pub struct CoefficientStream {
    t: Complex64,
    scaled: bool,
    a: Vec<Complex64>,
    ln_scale: Vec<f64>,
    // conv[j] = Σ_m a_m a_{j-m}, in the same scaled representation as a[j]
    conv: Vec<Complex64>,
}

impl CoefficientStream {
    pub fn new(t: Complex64) -> Self {
        Self::with_mode(t, false)
    }

    /// Stream in log-magnitude mode (never overflows for practical indices).
    pub fn scaled(t: Complex64) -> Self {
        Self::with_mode(t, true)
    }

    fn with_mode(t: Complex64, scaled: bool) -> Self {
        Self {
            t,
            scaled,
            a: Vec::new(),
            ln_scale: Vec::new(),
            conv: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    fn scale_of(&self, k: usize) -> f64 {
        if self.scaled {
            ln_gamma(2.0 * k as f64 / 7.0 + 1.0)
        } else {
            0.0
        }
    }

    #[inline]
    fn factor(&self, i: usize, j: usize, k: usize) -> f64 {
        if self.scaled {
            (self.ln_scale[i] + self.ln_scale[j] - self.ln_scale[k]).exp()
        } else {
            1.0
        }
    }

    /// Computes the next coefficient and returns it in scaled form.
    pub fn next_log(&mut self) -> Result<LogCoefficient> {
        let k = self.a.len();
        let lk = self.scale_of(k);
        self.ln_scale.push(lk);
        let value = if k == 0 {
            Complex64::new(leading_coefficient(), 0.0)
        } else {
            let a = &self.a;
            let a0 = a[0];
            let mut acc = Complex64::zero();
            if k >= 2 {
                acc += 2.0 * self.t * a[k - 2] * self.factor(k - 2, 0, k);
            }
            // a_0 a_m a_{k-m}, m = 2..=k-2
            let mut s = Complex64::zero();
            for m in 2..k.saturating_sub(1) {
                s += a[m] * a[k - m] * self.factor(m, k - m, k);
            }
            acc -= a0 * s / 3.0;
            // Σ_{n=2}^{k-1} a_n Σ_m a_m a_{k-n-m}
            let mut s = Complex64::zero();
            for n in 2..k {
                s += a[n] * self.conv[k - n] * self.factor(n, k - n, k);
            }
            acc -= s / 3.0;
            if k >= 7 {
                let mut s = Complex64::zero();
                for n in 0..=k - 7 {
                    let w = (n as f64 - 1.0) * (k as f64 + n as f64 - 4.0) / 108.0;
                    s += w * a[n] * a[k - n - 7] * self.factor(n, k - n - 7, k);
                }
                acc -= s;
            }
            if k >= 14 {
                let kf = k as f64;
                let w = (kf - 15.0) * (kf - 12.0) * (kf - 9.0) * (kf - 6.0) / 9720.0;
                acc -= w * a[k - 14] * self.factor(k - 14, 0, k);
            }
            acc / (a0 * a0)
        };
        if !value.re.is_finite() || !value.im.is_finite() {
            self.ln_scale.pop();
            return Err(Error::CoefficientOverflow { index: k });
        }
        self.a.push(value);
        let mut c = Complex64::zero();
        for m in 0..=k {
            c += self.a[m] * self.a[k - m] * self.factor(m, k - m, k);
        }
        self.conv.push(c);
        Ok(LogCoefficient {
            mantissa: value,
            ln_scale: lk,
        })
    }

    /// Next coefficient as a plain complex number.
    pub fn next_value(&mut self) -> Result<Complex64> {
        let c = self.next_log()?;
        let v = c.value();
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::CoefficientOverflow { index: self.a.len() - 1 });
        }
        Ok(v)
    }
}

/// `a_0 ..= a_max_index` for arbitrary complex `t`.
pub fn coefficients(t: Complex64, max_index: usize) -> Result<Vec<Complex64>> {
    let mut stream = CoefficientStream::new(t);
    (0..=max_index).map(|_| stream.next_value()).collect()
}

/// `a_0 ..= a_max_index` in log-magnitude form.
pub fn coefficients_log(t: Complex64, max_index: usize) -> Result<Vec<LogCoefficient>> {
    let mut stream = CoefficientStream::scaled(t);
    (0..=max_index).map(|_| stream.next_log()).collect()
}

/// `b_0 ..= b_max_index` from the dedicated `t = 0` recurrence, `b_n = a_{7n}(0)`.
pub fn coefficients_t0(max_index: usize) -> Result<Vec<f64>> {
    let b0 = leading_coefficient();
    let mut b = vec![b0];
    if max_index >= 1 {
        b.push(1.0 / 36.0);
    }
    for n in 1..max_index {
        let nf = n as f64;
        let mut first = 0.0;
        for m in 0..n {
            first += b[n - m] * b[m + 1];
        }
        let mut second = 0.0;
        for l in 0..n {
            for m in 0..=n - l {
                second += b[n - m - l] * b[l + 1] * b[m];
            }
        }
        let mut third = 0.0;
        for m in 0..=n {
            let mf = m as f64;
            third += (7.0 * mf - 1.0) * (7.0 * nf + 7.0 * mf + 3.0) / 108.0 * b[m] * b[n - m];
        }
        let fourth = (7.0 * nf - 8.0) * (7.0 * nf - 5.0) * (7.0 * nf - 2.0) * (7.0 * nf + 1.0)
            / 9720.0
            * b[n - 1];
        let next = -first / (3.0 * b0) - second / (3.0 * b0 * b0) - third / (b0 * b0) - fourth / (b0 * b0);
        if !next.is_finite() {
            return Err(Error::CoefficientOverflow { index: n + 1 });
        }
        b.push(next);
    }
    Ok(b)
}

/// Polynomial in `t` with exact rational coefficients (index = power).
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPoly(pub Vec<BigRational>);

impl RationalPoly {
    fn constant(c: BigRational) -> Self {
        Self(vec![c]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Self(out).trimmed()
    }

    fn mul(&self, other: &Self) -> Self {
        if self.0.is_empty() || other.0.is_empty() {
            return Self(Vec::new());
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out).trimmed()
    }

    fn scale(&self, c: &BigRational) -> Self {
        Self(self.0.iter().map(|a| a * c).collect()).trimmed()
    }

    fn shift(&self) -> Self {
        if self.0.is_empty() {
            return self.clone();
        }
        let mut v = vec![BigRational::zero()];
        v.extend(self.0.iter().cloned());
        Self(v)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::zero(), |acc, c| {
            acc * t + Complex64::new(rational_to_f64(c), 0.0)
        })
    }

    pub fn from_terms(terms: &[(i64, i64, usize)]) -> Self {
        let degree = terms.iter().map(|&(_, _, p)| p).max().map_or(0, |p| p + 1);
        let mut v = vec![BigRational::zero(); degree];
        for &(num, den, p) in terms {
            v[p] += BigRational::new(BigInt::from(num), BigInt::from(den));
        }
        Self(v).trimmed()
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    let num: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let den: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    num / den
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `c_1 ..= c_max` of `u = Y + Σ c_n Y^{-n}`, `Y = a_0 x^{1/3}`.
///
/// With `d_j = a_j a_0^{j-1}` every power of `a_0` in the recurrence reduces
/// to `a_0^6 = 36` or `a_0^{12} = 1296`, so the `d_j` are polynomials in `t`
/// with rational coefficients and `c_n = d_{n+1}`.
pub fn exact_cn_polynomials(max: usize) -> Vec<RationalPoly> {
    let mut d: Vec<RationalPoly> = vec![RationalPoly::constant(BigRational::one())];
    let third = ratio(1, 3);
    for k in 1..=max + 1 {
        let mut acc = RationalPoly(Vec::new());
        if k >= 2 {
            acc = acc.add(&d[k - 2].shift().scale(&ratio(2, 1)));
        }
        let mut s = RationalPoly(Vec::new());
        for m in 2..k.saturating_sub(1) {
            s = s.add(&d[m].mul(&d[k - m]));
        }
        for n in 2..k {
            for m in 0..=k - n {
                s = s.add(&d[n].mul(&d[m]).mul(&d[k - n - m]));
            }
        }
        acc = acc.add(&s.scale(&-third.clone()));
        if k >= 7 {
            for n in 0..=k - 7 {
                let w = ratio(36 * (n as i64 - 1) * (k as i64 + n as i64 - 4), 108);
                acc = acc.add(&d[n].mul(&d[k - n - 7]).scale(&-w));
            }
        }
        if k >= 14 {
            let kk = k as i64;
            let w = ratio(1296 * (kk - 15) * (kk - 12) * (kk - 9) * (kk - 6), 9720);
            acc = acc.add(&d[k - 14].scale(&-w));
        }
        d.push(acc);
    }
    d.into_iter().skip(2).collect()
}

/// Closed forms of `c_1 ..= c_14` as `(numerator, denominator, power of t)` terms.
pub fn tabulated_cn(n: usize) -> &'static [(i64, i64, usize)] {
    const TABLE: [&[(i64, i64, usize)]; 14] = [
        &[(2, 1, 1)],
        &[],
        &[],
        &[],
        &[(-8, 3, 3)],
        &[(1, 1, 0)],
        &[(16, 3, 4)],
        &[(-10, 3, 1)],
        &[],
        &[(-28, 3, 2)],
        &[(-256, 9, 6)],
        &[(96, 1, 3)],
        &[(640, 9, 7), (-21, 1, 0)],
        &[(-1936, 9, 4)],
    ];
    assert!((1..=14).contains(&n), "tabulated c_n available for n = 1..=14");
    TABLE[n - 1]
}

/// Relative residuals `|a_{n+1}(t) - c_n(t) a_0^{-n}|` for `n = 1..=14`,
/// normalised by `|a_0|^{-n} max(1, |c_n(t)|)`.
pub fn cn_table_check(t: Complex64) -> Vec<f64> {
    let a = coefficients(t, 15).expect("15 coefficients never overflow");
    let a0 = leading_coefficient();
    (1..=14)
        .map(|n| {
            let cn = RationalPoly::from_terms(tabulated_cn(n)).eval(t);
            let target = cn * a0.powi(-(n as i32));
            let scale = a0.abs().powi(-(n as i32)) * cn.norm().max(1.0);
            (a[n + 1] - target).norm() / scale
        })
        .collect()
}

/// True when the exact recurrence reproduces every tabulated `c_n` polynomial.
pub fn exact_table_matches() -> bool {
    exact_cn_polynomials(14)
        .iter()
        .enumerate()
        .all(|(i, p)| *p == RationalPoly::from_terms(tabulated_cn(i + 1)))
}

/// A truncated formal solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub t: Complex64,
    pub coefficients: Vec<Complex64>,
    pub threshold: f64,
}

/// Where and why a series was cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// Last index kept in the sum.
    pub m_selected: usize,
    /// `|a_M x^{-(M-1)/3}|` at the endpoint.
    pub last_term_size: f64,
    pub endpoint: BranchedPoint,
    pub threshold: f64,
}

impl SeriesExpansion {
    pub fn new(t: Complex64, max_index: usize) -> Result<Self> {
        Ok(Self {
            t,
            coefficients: coefficients(t, max_index)?,
            threshold: 0.0,
        })
    }

    pub fn from_coefficients(t: Complex64, coefficients: Vec<Complex64>) -> Self {
        Self {
            t,
            coefficients,
            threshold: 0.0,
        }
    }

    /// Series cut by [`auto_truncate`] at `x`.
    pub fn truncated(t: Complex64, x: BranchedPoint, threshold: f64) -> Result<(Self, TruncationReport)> {
        let report = auto_truncate(t, x, threshold)?;
        let mut s = Self::new(t, report.m_selected)?;
        s.threshold = threshold;
        Ok((s, report))
    }

    pub fn max_index(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// `d^k/dx^k Σ a_n x^{-(n-1)/3}` on the sheet of `x`, term by term.
    pub fn evaluate(&self, x: &BranchedPoint, derivative_order: usize) -> Complex64 {
        assert!(derivative_order <= 4, "derivatives up to fourth order");
        let lx = x.ln();
        let mut sum = Complex64::zero();
        for (n, an) in self.coefficients.iter().enumerate().rev() {
            if *an == Complex64::zero() {
                continue;
            }
            let p = -(n as f64 - 1.0) / 3.0;
            let falling: f64 = (0..derivative_order).map(|i| p - i as f64).product();
            if falling == 0.0 {
                continue;
            }
            sum += an * falling * ((p - derivative_order as f64) * lx).exp();
        }
        sum
    }

    /// Magnitude of the `n`-th term at `x`.
    pub fn term_size(&self, n: usize, x: &BranchedPoint) -> f64 {
        self.coefficients[n].norm() * x.modulus.powf(-(n as f64 - 1.0) / 3.0)
    }
}

/// Applies the truncation rule with the default cap.
pub fn auto_truncate(t: Complex64, x: BranchedPoint, threshold: f64) -> Result<TruncationReport> {
    auto_truncate_with_cap(t, x, threshold, DEFAULT_TRUNCATION_CAP)
}

/// Smallest `M` whose term, and the `TAIL_WINDOW` terms after it, are all
/// below `threshold` at `x`. Terms that vanish identically count as small.
/// Scanning stops at `cap`, on coefficient overflow, or once the terms have
/// grown far past their minimum.
pub fn auto_truncate_with_cap(
    t: Complex64,
    x: BranchedPoint,
    threshold: f64,
    cap: usize,
) -> Result<TruncationReport> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    let mut stream = CoefficientStream::scaled(t);
    let ln_r = x.modulus.ln();
    let mut sizes: Vec<f64> = Vec::new();
    let mut min_size = f64::INFINITY;
    let mut min_index = 0;
    let mut run_start: Option<usize> = None;
    for n in 0..=cap + TAIL_WINDOW {
        let c = match stream.next_log() {
            Ok(c) => c,
            Err(_) => break,
        };
        let size = if c.is_zero() {
            0.0
        } else {
            (c.ln_abs() - (n as f64 - 1.0) / 3.0 * ln_r).exp()
        };
        sizes.push(size);
        // smallest largest term over seven consecutive indices, so that an
        // accidentally tiny coefficient does not count as the minimum
        if n >= 6 && n <= cap {
            let block = sizes[n - 6..=n].iter().cloned().fold(0.0, f64::max);
            if block > 0.0 && block < min_size {
                min_size = block;
                min_index = n;
            }
        }
        if size < threshold {
            let start = *run_start.get_or_insert(n);
            if n - start >= TAIL_WINDOW {
                return Ok(TruncationReport {
                    m_selected: start,
                    last_term_size: sizes[start],
                    endpoint: x,
                    threshold,
                });
            }
        } else {
            run_start = None;
            if n > min_index + 3 * TAIL_WINDOW && size > 1e6 * min_size {
                break;
            }
        }
    }
    if let Some(start) = run_start.filter(|&s| s <= cap) {
        // ran out of coefficients while inside a run of small terms
        if sizes.len() > start + 1 {
            return Ok(TruncationReport {
                m_selected: start,
                last_term_size: sizes[start],
                endpoint: x,
                threshold,
            });
        }
    }
    Err(Error::ThresholdUnreachable {
        threshold,
        min_term: min_size,
        index: min_index,
    })
}

/// Near-optimal truncation: groups terms in blocks of seven consecutive
/// indices, finds the block with the smallest largest term and keeps
/// everything before it.
pub fn minimal_term_truncation(t: Complex64, x: BranchedPoint, cap: usize) -> Result<TruncationReport> {
    let mut stream = CoefficientStream::scaled(t);
    let ln_r = x.modulus.ln();
    let mut blocks: Vec<f64> = Vec::new();
    let mut current = 0.0f64;
    for n in 0..=cap {
        let c = match stream.next_log() {
            Ok(c) => c,
            Err(_) => break,
        };
        if !c.is_zero() {
            current = current.max((c.ln_abs() - (n as f64 - 1.0) / 3.0 * ln_r).exp());
        }
        if n % 7 == 6 {
            blocks.push(current);
            current = 0.0;
            let best = blocks.iter().cloned().fold(f64::INFINITY, f64::min);
            if blocks.len() > 4 && current.max(*blocks.last().unwrap()) > 1e6 * best {
                break;
            }
        }
    }
    let (block, size) = blocks
        .iter()
        .enumerate()
        .skip(1)
        .fold((1usize, f64::INFINITY), |acc, (i, &b)| if b < acc.1 { (i, b) } else { acc });
    if !size.is_finite() {
        return Err(Error::InvalidArgument("too few terms for minimal-term truncation".into()));
    }
    Ok(TruncationReport {
        m_selected: 7 * block - 1,
        last_term_size: size,
        endpoint: x,
        threshold: size,
    })
}
