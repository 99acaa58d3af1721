//! Flags, the optional TOML file, and the fully resolved run configurations
//! that end up in manifests.
//!
//! Every flag struct has only optional fields so that a flag and the file can
//! be merged field by field before defaults are filled in.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};
use tritronquee::analysis::{stokes_domain, FieldMethod, SectorOptions};
use tritronquee::bvp::{InitialMode, LineDomain, SolverOptions};
use tritronquee::stokes_data::{Family, PresetName};
use tritronquee::{BranchedPoint, Complex64, Error, Result};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "TRITRONQUEE_OUT";

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn number(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| invalid(format!("not a number: {s:?}")))
}

/// Complex flag value: `"re,im"`, a real number, or an imaginary one like `0.8i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub Complex64);

impl FromStr for Cx {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((re, im)) = s.split_once(',') {
            return Ok(Cx(Complex64::new(number(re)?, number(im)?)));
        }
        if let Some(im) = s.strip_suffix('i') {
            let im = match im.trim() {
                "" | "+" => 1.0,
                "-" => -1.0,
                v => number(v)?,
            };
            return Ok(Cx(Complex64::new(0.0, im)));
        }
        Ok(Cx(Complex64::new(number(s)?, 0.0)))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CxRepr {
    Real(f64),
    Text(String),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match CxRepr::deserialize(d)? {
            CxRepr::Real(x) => Ok(Cx(Complex64::new(x, 0.0))),
            CxRepr::Pair([re, im]) => Ok(Cx(Complex64::new(re, im))),
            CxRepr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Two reals, `"a,b"` on the command line or `[a, b]` in the file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(',').ok_or_else(|| invalid(format!("expected \"a,b\", got {s:?}")))?;
        Ok(Pair(number(a)?, number(b)?))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PairRepr {
    Text(String),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for Pair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match PairRepr::deserialize(d)? {
            PairRepr::Pair([a, b]) => Ok(Pair(a, b)),
            PairRepr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `typeI:m` / `typeII:m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset(pub PresetName);

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(Preset)
    }
}

impl<'de> Deserialize<'de> for Preset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum LinePreset {
    /// Real line, U₀ ends at arguments 3π and 0.
    #[value(name = "U0-real")]
    #[serde(rename = "U0-real")]
    U0Real,
    /// Imaginary axis, V₀ ends at arguments 7π/2 and 5π/2.
    #[value(name = "V0-imag")]
    #[serde(rename = "V0-imag")]
    V0Imag,
    /// Real line shifted by b.
    #[value(name = "U0-offset")]
    #[serde(rename = "U0-offset")]
    U0Offset,
    /// U0-real rotated by e^{2πin/7}, n from --rotate.
    #[value(name = "rotated")]
    #[serde(rename = "rotated")]
    Rotated,
}

impl fmt::Display for LinePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Smooth,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rays,
    Laplace,
}

/// Merges `self` (flags) over `file`, field by field.
pub trait Overlay {
    fn over(self, file: Self) -> Self;
}

macro_rules! overlay {
    ($ty:ty { $($f:ident),* $(,)? } $(flatten { $($g:ident),* })?) => {
        impl Overlay for $ty {
            fn over(self, file: Self) -> Self {
                Self {
                    $($f: self.$f.or(file.$f),)*
                    $($($g: self.$g.over(file.$g),)*)?
                }
            }
        }
    };
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SolverArgs {
    /// Bound on the scaled residual [default: 1e-8]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Newton iteration budget [default: 100]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Initial iterate [default: smooth]
    #[arg(long, value_enum)]
    pub initial: Option<Initial>,
}

overlay!(SolverArgs { tol, max_iter, initial });

impl SolverArgs {
    fn resolve(&self) -> Result<SolverOptions> {
        let d = SolverOptions::default();
        let opts = SolverOptions {
            tol: self.tol.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            initial: match self.initial {
                None => d.initial,
                Some(Initial::Smooth) => InitialMode::Smooth,
                Some(Initial::Linear) => InitialMode::Linear,
            },
        };
        if !(opts.tol > 0.0) || opts.max_iter == 0 {
            return Err(invalid("tol must be positive and max-iter at least 1"));
        }
        Ok(opts)
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SeriesArgs {
    /// Parameter t as "re,im" [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<Cx>,
    /// Last coefficient index [default: 100]
    #[arg(long)]
    pub max_n: Option<usize>,
}

overlay!(SeriesArgs { t, max_n });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub t: Complex64,
    pub max_n: usize,
}

impl SeriesArgs {
    pub fn resolve(&self) -> Result<SeriesConfig> {
        Ok(SeriesConfig {
            t: self.t.map_or(Complex64::new(0.0, 0.0), |c| c.0),
            max_n: self.max_n.unwrap_or(100),
        })
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LineArgs {
    /// Line preset [default: U0-real]
    #[arg(long, value_enum)]
    pub preset: Option<LinePreset>,
    /// Parameter t as "re,im"; for `rotated` this is t before the rotation [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<Cx>,
    /// Offset of the line, "re,im" or e.g. 0.8i [default: 0.8i for U0-offset]
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<Cx>,
    /// Half-width of the ξ-interval [default: 12]
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Number of Chebyshev intervals [default: 256]
    #[arg(long)]
    pub nc: Option<usize>,
    /// Rotation index n for `rotated` [default: 3]
    #[arg(long, allow_hyphen_values = true)]
    pub rotate: Option<i32>,
    /// Direction angle of the line (radians)
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_l: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_r: Option<f64>,
    /// Unwrapped argument of x at the left end
    #[arg(long, allow_hyphen_values = true)]
    pub arg_left: Option<f64>,
    /// Unwrapped argument of x at the right end
    #[arg(long, allow_hyphen_values = true)]
    pub arg_right: Option<f64>,
    /// Target size of the series truncation at the ends [default: 1e-6]
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

overlay!(LineArgs { preset, t, b, half_width, nc, rotate, phi, xi_l, xi_r, arg_left, arg_right, threshold } flatten { solver });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineConfig {
    pub preset: LinePreset,
    pub domain: LineDomain,
    pub solver: SolverOptions,
}

impl LineArgs {
    pub fn resolve(&self) -> Result<LineConfig> {
        let preset = self.preset.unwrap_or(LinePreset::U0Real);
        let t = self.t.map_or(Complex64::new(0.0, 0.0), |c| c.0);
        let hw = self.half_width.unwrap_or(12.0);
        let nc = self.nc.unwrap_or(256);
        if !(hw > 0.0) {
            return Err(invalid("half-width must be positive"));
        }
        let mut d = match preset {
            LinePreset::U0Real => LineDomain::u0_real(t, hw, nc),
            LinePreset::V0Imag => LineDomain::v0_imag(t, hw, nc),
            LinePreset::U0Offset => {
                LineDomain::u0_offset(t, self.b.map_or(Complex64::new(0.0, 0.8), |c| c.0), hw, nc)?
            }
            LinePreset::Rotated => LineDomain::u0_real(t, hw, nc).rotated(self.rotate.unwrap_or(3)),
        };
        if preset != LinePreset::Rotated {
            if let Some(n) = self.rotate {
                d = d.rotated(n);
            }
        }
        let moved = self.phi.is_some() || self.xi_l.is_some() || self.xi_r.is_some()
            || (self.b.is_some() && preset != LinePreset::U0Offset);
        d.phi = self.phi.unwrap_or(d.phi);
        d.xi_l = self.xi_l.unwrap_or(d.xi_l);
        d.xi_r = self.xi_r.unwrap_or(d.xi_r);
        if preset != LinePreset::U0Offset {
            d.b = self.b.map_or(d.b, |c| c.0);
        }
        if moved {
            // keep each end on the sheet closest to the preset's
            d.arg_left = BranchedPoint::from_complex_near(d.x_at(d.xi_l), d.arg_left)?.argument;
            d.arg_right = BranchedPoint::from_complex_near(d.x_at(d.xi_r), d.arg_right)?.argument;
        }
        d.arg_left = self.arg_left.unwrap_or(d.arg_left);
        d.arg_right = self.arg_right.unwrap_or(d.arg_right);
        d.threshold = self.threshold.unwrap_or(d.threshold);
        d.validate()?;
        Ok(LineConfig { preset, domain: d, solver: self.solver.resolve()? })
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SectorArgs {
    /// Solution, typeI:m or typeII:m [default: typeII:0]
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Unwrapped angular range "θmin,θmax" [default: the solution's sector]
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<Pair>,
    /// Radial range "r_min,r_max" [default: 1,12]
    #[arg(long)]
    pub radii: Option<Pair>,
    /// How the field between rays is filled [default: rays]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Parameter t as "re,im" [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<Cx>,
    /// Number of rays [default: 16]
    #[arg(long)]
    pub n_rays: Option<usize>,
    /// Radial grid points [default: 221]
    #[arg(long)]
    pub n_r: Option<usize>,
    /// Angular grid points [default: 281]
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Chebyshev intervals per ray [default: 256]
    #[arg(long)]
    pub nc: Option<usize>,
    /// Series truncation target on the outer arc [default: 1e-6]
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

overlay!(SectorArgs { preset, theta, radii, method, t, n_rays, n_r, n_theta, nc, threshold } flatten { solver });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorConfig {
    pub options: SectorOptions,
    pub solver: SolverOptions,
}

/// Angular window in which the solution of the given family is computed by default.
pub fn default_theta(name: PresetName) -> (f64, f64) {
    let shift = 6.0 * PI * name.m as f64 / 7.0;
    let (a, b) = match name.family {
        Family::TypeII => (-1.4, 1.4),
        Family::TypeI => (7.1, 11.7),
    };
    (a + shift, b + shift)
}

impl SectorArgs {
    pub fn resolve(&self) -> Result<SectorConfig> {
        let name = self.preset.map_or(PresetName { family: Family::TypeII, m: 0 }, |p| p.0);
        let theta = self.theta.map_or(default_theta(name), |p| (p.0, p.1));
        let method = match self.method {
            Some(Method::Laplace) => FieldMethod::Laplace,
            _ => FieldMethod::Rays,
        };
        let mut o = SectorOptions::new(name.family, name.m, theta, method);
        o.t = self.t.map_or(o.t, |c| c.0);
        if let Some(Pair(a, b)) = self.radii {
            o.r_min = a;
            o.r_max = b;
        }
        o.n_rays = self.n_rays.unwrap_or(o.n_rays);
        o.n_r = self.n_r.unwrap_or(o.n_r);
        o.n_theta = self.n_theta.unwrap_or(o.n_theta);
        o.nc = self.nc.unwrap_or(o.nc);
        o.threshold = self.threshold.unwrap_or(o.threshold);
        Ok(SectorConfig { options: o, solver: self.solver.resolve()? })
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct StokesArgs {
    /// Chebyshev intervals of the t = 0 real-line solve [default: 512]
    #[arg(long)]
    pub nc: Option<usize>,
    /// Range of |x| used for the fit, "a,b" [default: 4,10]
    #[arg(long)]
    pub window: Option<Pair>,
    /// Series truncation target at the ends [default: 1e-13]
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

overlay!(StokesArgs { nc, window, threshold } flatten { solver });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesConfig {
    pub domain: LineDomain,
    pub window: (f64, f64),
    pub solver: SolverOptions,
}

impl StokesArgs {
    pub fn resolve(&self) -> Result<StokesConfig> {
        let mut domain = stokes_domain(self.nc.unwrap_or(512));
        domain.threshold = self.threshold.unwrap_or(domain.threshold);
        domain.validate()?;
        let window = self.window.map_or((4.0, 10.0), |p| (p.0, p.1));
        if !(0.0 < window.0 && window.0 < window.1) {
            return Err(invalid(format!("window must satisfy 0 < a < b, got {window:?}")));
        }
        Ok(StokesConfig { domain, window, solver: self.solver.resolve()? })
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CoeffAsymArgs {
    /// Parameter t as "re,im" [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<Cx>,
    /// Last coefficient index [default: 350]
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Spacing of the report checkpoints [default: 70]
    #[arg(long)]
    pub step: Option<usize>,
}

overlay!(CoeffAsymArgs { t, max_n, step });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffAsymConfig {
    pub t: Complex64,
    pub max_n: usize,
    pub step: usize,
}

impl CoeffAsymArgs {
    pub fn resolve(&self) -> Result<CoeffAsymConfig> {
        let c = CoeffAsymConfig {
            t: self.t.map_or(Complex64::new(0.0, 0.0), |c| c.0),
            max_n: self.max_n.unwrap_or(350),
            step: self.step.unwrap_or(70),
        };
        if c.step == 0 || c.max_n < c.step {
            return Err(invalid("need 0 < step <= max-n"));
        }
        Ok(c)
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CurveArgs {
    /// Modulus of x
    #[arg(long)]
    pub x: Option<f64>,
    /// Unwrapped argument of x [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub arg: Option<f64>,
    /// Parameter t as "re,im" [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<Cx>,
}

overlay!(CurveArgs { x, arg, t });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub x: BranchedPoint,
    pub t: Complex64,
}

impl CurveArgs {
    pub fn resolve(&self) -> Result<CurveConfig> {
        let r = self.x.ok_or_else(|| invalid("curve needs --x"))?;
        Ok(CurveConfig {
            x: BranchedPoint::new(r, self.arg.unwrap_or(0.0))?,
            t: self.t.map_or(Complex64::new(0.0, 0.0), |c| c.0),
        })
    }
}

/// Contents of `--config`: global keys plus one table per command.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub cache: Option<bool>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub series: SeriesArgs,
    #[serde(default)]
    pub solve_line: LineArgs,
    #[serde(default)]
    pub sector: SectorArgs,
    #[serde(default)]
    pub stokes_diff: StokesArgs,
    #[serde(default)]
    pub coeff_asym: CoeffAsymArgs,
    #[serde(default)]
    pub curve: CurveArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

/// A resolved command; this is what gets hashed and written to the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum Job {
    Series(SeriesConfig),
    SolveLine(LineConfig),
    Sector(SectorConfig),
    StokesDiff(StokesConfig),
    CoeffAsym(CoeffAsymConfig),
    Curve(CurveConfig),
    Check,
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Series(_) => "series",
            Job::SolveLine(_) => "solve-line",
            Job::Sector(_) => "sector",
            Job::StokesDiff(_) => "stokes-diff",
            Job::CoeffAsym(_) => "coeff-asym",
            Job::Curve(_) => "curve",
            Job::Check => "check",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!("1.5,-2".parse::<Cx>().unwrap().0, Complex64::new(1.5, -2.0));
        assert_eq!("0.8i".parse::<Cx>().unwrap().0, Complex64::new(0.0, 0.8));
        assert_eq!("-i".parse::<Cx>().unwrap().0, Complex64::new(0.0, -1.0));
        assert_eq!("-3".parse::<Cx>().unwrap().0, Complex64::new(-3.0, 0.0));
        assert!("1,x".parse::<Cx>().is_err());
    }

    #[test]
    fn file_values_fill_missing_flags() {
        let file: FileConfig = toml::from_str(
            r#"
            out = "runs"
            [solve-line]
            preset = "U0-offset"
            b = [0.0, 0.4]
            nc = 128
            tol = 1e-9
            "#,
        )
        .unwrap();
        let flags = LineArgs { nc: Some(64), ..Default::default() };
        let c = flags.over(file.solve_line).resolve().unwrap();
        assert_eq!(c.preset, LinePreset::U0Offset);
        assert_eq!(c.domain.nc, 64);
        assert_eq!(c.domain.b, Complex64::new(0.0, 0.4));
        assert_eq!(c.solver.tol, 1e-9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[series]\nmaxn = 3").is_err());
    }

    #[test]
    fn moved_lines_keep_their_sheets() {
        let c = LineArgs { phi: Some(0.15), ..Default::default() }.resolve().unwrap();
        assert!((c.domain.arg_left - (3.0 * PI + 0.15)).abs() < 1e-12);
        assert!((c.domain.arg_right - 0.15).abs() < 1e-12);
    }

    #[test]
    fn jobs_round_trip() {
        let job = Job::SolveLine(LineArgs::default().resolve().unwrap());
        let text = serde_json::to_string(&job).unwrap();
        assert_eq!(serde_json::from_str::<Job>(&text).unwrap(), job);
    }
}
