//! Input handling: per-backend scalar parsing, moments and spectrum files,
//! and range specs.
//!
//! The exact backend accepts anything that denotes a rational: integers,
//! fractions ("7/2"), finite decimals ("0.5"), and scientific notation
//! ("1e-3"). JSON files may carry non-integer numbers only in the floating
//! backend; the exact backend requires them as strings so no binary
//! rounding sneaks in.

use std::fs;
use std::io::Read;

use ghr_core::moments::{DistributionSpec, MomentSequence};
use ghr_core::oracle::SpectrumLevel;
use ghr_core::scalar::Exact;
use ghr_core::Scalar;
use num::bigint::BigInt;
use num::rational::Ratio;
use num_complex::Complex64;
use serde::Deserialize;

/// Parses a rational literal: "a/b", integer, finite decimal, or
/// scientific notation.
pub fn parse_rational(s: &str) -> Result<Exact, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in '{s}'"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in '{s}'"))?;
        if d == BigInt::from(0) {
            return Err(format!("zero denominator in '{s}'"));
        }
        return Ok(Ratio::new(n, d));
    }
    let lower = s.to_ascii_lowercase();
    let (mantissa, exp): (&str, i64) = match lower.split_once('e') {
        Some((m, e)) => (
            m,
            e.parse()
                .map_err(|_| format!("bad exponent in '{s}'"))?,
        ),
        None => (lower.as_str(), 0),
    };
    if exp.abs() > 4096 {
        return Err(format!("exponent out of range in '{s}'"));
    }
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    let scale = frac_part.len() as i64 - exp;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Ratio::new(n, ten.pow(scale as u32))
    } else {
        Ratio::from_integer(n * ten.pow((-scale) as u32))
    })
}

/// Backend-specific parsing and rendering on top of the core scalar.
pub trait CliScalar: Scalar {
    const BACKEND_NAME: &'static str;
    fn parse_value(s: &str) -> Result<Self, String>;
    fn from_json(v: &serde_json::Value) -> Result<Self, String>;
    /// Full-precision rendering: 17 significant digits or "num/den".
    fn render_full(&self) -> String;
    /// Table rendering: 9 decimals in a sane range, scientific otherwise.
    fn render_table(&self) -> String;
    fn to_json(&self) -> serde_json::Value;
}

impl CliScalar for f64 {
    const BACKEND_NAME: &'static str = "real";

    fn parse_value(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            if v.is_finite() {
                return Ok(v);
            }
        }
        parse_rational(s).map(|r| Scalar::to_f64(&r))
    }

    fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        match v {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| format!("'{n}' is not representable as f64")),
            serde_json::Value::String(s) => Self::parse_value(s),
            other => Err(format!("expected a number, got {other}")),
        }
    }

    fn render_full(&self) -> String {
        format!("{:.16e}", self)
    }

    fn render_table(&self) -> String {
        let a = self.abs();
        if *self == 0.0 {
            "0".into()
        } else if (1e-4..1e9).contains(&a) {
            format!("{:.9}", self)
        } else {
            format!("{:.6e}", self)
        }
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

impl CliScalar for Exact {
    const BACKEND_NAME: &'static str = "exact";

    fn parse_value(s: &str) -> Result<Self, String> {
        parse_rational(s)
    }

    fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        match v {
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Exact::from_int(i))
                } else {
                    Err(format!(
                        "exact backend requires rational inputs; write '{n}' as a string \
                         like \"1/3\" or \"0.1\""
                    ))
                }
            }
            serde_json::Value::String(s) => parse_rational(s),
            other => Err(format!("expected a number, got {other}")),
        }
    }

    fn render_full(&self) -> String {
        self.to_string()
    }

    fn render_table(&self) -> String {
        self.to_string()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self.to_string())
    }
}

/// Reads a file, or stdin for "-".
pub fn read_source(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))
    }
}

/// Moments file: `order` (optional, cross-checked), `mu` (numbers or
/// strings), optional `exact` (numerator/denominator string pairs, which
/// take precedence).
#[derive(Deserialize)]
pub struct MomentsFile {
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub mu: Vec<serde_json::Value>,
    #[serde(default)]
    pub exact: Option<Vec<[String; 2]>>,
}

pub fn load_moments<S: CliScalar>(path: &str) -> Result<MomentSequence<S>, String> {
    let text = read_source(path)?;
    let file: MomentsFile =
        serde_json::from_str(&text).map_err(|e| format!("parsing moments file: {e}"))?;
    let values: Vec<S> = if let Some(pairs) = &file.exact {
        pairs
            .iter()
            .map(|[num, den]| S::parse_value(&format!("{num}/{den}")))
            .collect::<Result<_, _>>()?
    } else if !file.mu.is_empty() {
        file.mu
            .iter()
            .map(S::from_json)
            .collect::<Result<_, _>>()?
    } else {
        return Err("moments file has neither 'mu' nor 'exact' entries".into());
    };
    if let Some(order) = file.order {
        if order + 1 != values.len() {
            return Err(format!(
                "order field says {order} but {} moment values were given",
                values.len()
            ));
        }
    }
    MomentSequence::new(values).map_err(|e| e.to_string())
}

/// Spectrum file entry: an eigenvalue with either a probability or a
/// complex amplitude.
#[derive(Deserialize)]
pub struct SpectrumEntry {
    pub eigenvalue: serde_json::Value,
    #[serde(default)]
    pub probability: Option<serde_json::Value>,
    #[serde(default)]
    pub amplitude_re: Option<serde_json::Value>,
    #[serde(default)]
    pub amplitude_im: Option<serde_json::Value>,
}

fn load_spectrum_entries(path: &str) -> Result<Vec<SpectrumEntry>, String> {
    let text = read_source(path)?;
    serde_json::from_str(&text).map_err(|e| format!("parsing spectrum file: {e}"))
}

/// Spectrum as a probability distribution, for the moment engine.
/// Amplitude entries contribute |amplitude|^2.
pub fn load_spectrum_distribution<S: CliScalar>(path: &str) -> Result<Vec<(S, S)>, String> {
    load_spectrum_entries(path)?
        .iter()
        .map(|entry| {
            let e = S::from_json(&entry.eigenvalue)?;
            let p = match (&entry.probability, &entry.amplitude_re) {
                (Some(p), None) => S::from_json(p)?,
                (None, Some(_)) | (None, None) => {
                    let re = entry
                        .amplitude_re
                        .as_ref()
                        .map(S::from_json)
                        .transpose()?
                        .unwrap_or_else(S::zero);
                    let im = entry
                        .amplitude_im
                        .as_ref()
                        .map(S::from_json)
                        .transpose()?
                        .unwrap_or_else(S::zero);
                    re.clone() * re + im.clone() * im
                }
                (Some(_), Some(_)) => {
                    return Err("give either probability or amplitude, not both".into())
                }
            };
            Ok((e, p))
        })
        .collect()
}

/// Spectrum as an oracle model: amplitudes for probability entries are the
/// positive square roots.
pub fn load_spectrum_model(path: &str) -> Result<Vec<SpectrumLevel>, String> {
    load_spectrum_entries(path)?
        .iter()
        .map(|entry| {
            let energy = f64::from_json(&entry.eigenvalue)?;
            let amplitude = match (&entry.probability, &entry.amplitude_re) {
                (Some(p), None) => {
                    let p = f64::from_json(p)?;
                    if p < 0.0 {
                        return Err(format!("negative probability {p}"));
                    }
                    Complex64::new(p.sqrt(), 0.0)
                }
                (None, _) => {
                    let re = entry
                        .amplitude_re
                        .as_ref()
                        .map(f64::from_json)
                        .transpose()?
                        .unwrap_or(0.0);
                    let im = entry
                        .amplitude_im
                        .as_ref()
                        .map(f64::from_json)
                        .transpose()?
                        .unwrap_or(0.0);
                    Complex64::new(re, im)
                }
                (Some(_), Some(_)) => {
                    return Err("give either probability or amplitude, not both".into())
                }
            };
            Ok(SpectrumLevel { energy, amplitude })
        })
        .collect()
}

/// "start:stop[:step]" or a single value, inclusive of the endpoint when
/// it lies on the grid.
pub fn parse_f64_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let parse = |p: &str| f64::parse_value(p);
    let (start, stop, step) = match parts.as_slice() {
        [single] => return Ok(vec![parse(single)?]),
        [a, b] => (parse(a)?, parse(b)?, 1.0),
        [a, b, c] => (parse(a)?, parse(b)?, parse(c)?),
        _ => return Err(format!("bad range '{s}': want start:stop[:step]")),
    };
    if step <= 0.0 {
        return Err(format!("range step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("empty range '{s}'"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Integer range with the same syntax.
pub fn parse_usize_range(s: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let parse = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| format!("'{p}' is not a positive integer"))
    };
    let (start, stop, step) = match parts.as_slice() {
        [single] => return Ok(vec![parse(single)?]),
        [a, b] => (parse(a)?, parse(b)?, 1),
        [a, b, c] => (parse(a)?, parse(b)?, parse(c)?),
        _ => return Err(format!("bad range '{s}': want start:stop[:step]")),
    };
    if step == 0 {
        return Err("range step must be positive".into());
    }
    if stop < start {
        return Err(format!("empty range '{s}'"));
    }
    Ok((start..=stop).step_by(step).collect())
}

/// Builds a distribution spec from the CLI flags. The second return value
/// marks the exponential family (exponential, or gamma with shape 1), which
/// gets the third-order footnote in bound output.
pub fn build_distribution<S: CliScalar>(
    dist: Option<&str>,
    shape: Option<&str>,
    rate: Option<&str>,
    variance: Option<&str>,
    spectrum_file: Option<&str>,
) -> Result<(DistributionSpec<S>, bool), String> {
    match (dist, spectrum_file) {
        (Some(_), Some(_)) => Err("give either --dist or --spectrum-file, not both".into()),
        (None, Some(path)) => {
            let levels = load_spectrum_distribution::<S>(path)?;
            Ok((DistributionSpec::Spectrum { levels }, false))
        }
        (Some(name), None) => match name {
            "gamma" => {
                let shape =
                    S::parse_value(shape.ok_or("gamma needs --shape")?)?;
                let rate = S::parse_value(rate.unwrap_or("1"))?;
                let is_exponential = shape == S::one();
                Ok((DistributionSpec::Gamma { shape, rate }, is_exponential))
            }
            "exponential" => {
                let rate = S::parse_value(rate.unwrap_or("1"))?;
                Ok((DistributionSpec::Exponential { rate }, true))
            }
            "gaussian" => {
                let variance =
                    S::parse_value(variance.ok_or("gaussian needs --variance")?)?;
                Ok((DistributionSpec::Gaussian { variance }, false))
            }
            other => Err(format!(
                "unknown distribution '{other}' (gamma, exponential, gaussian)"
            )),
        },
        (None, None) => Err("no input: give --dist, --spectrum-file, or --moments-file".into()),
    }
}
