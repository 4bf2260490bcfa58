//! Text form of catalog functions.
//!
//! Grammar: `name:key=val,key=val`, list values separated by `;`, and weighted
//! linear combinations written as `coef*name:... + coef*name:...`.

use std::fmt;
use std::str::FromStr;

use crate::error::{FracError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `((x^ρ − a^ρ)/ρ)^β`; `rho = 0` selects `(log(x/a))^β`.
    Power { beta: f64, rho: f64, a: f64 },
    /// `x^{βk}`.
    Monomial { beta: f64, k: u32 },
    /// `exp(x^β)`.
    ExpPow { beta: f64 },
    /// `E^ν_{λ,μ}(x^β)`.
    MittagLeffler { lam: f64, mu: f64, nu: f64, beta: f64 },
    /// `pFq(a; b; x^β)`.
    Pfq { a: Vec<f64>, b: Vec<f64>, beta: f64 },
    Constant { c: f64 },
    LinComb(Vec<(f64, FunctionSpec)>),
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FracError::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(FracError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl FunctionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Power { beta, rho, a } => {
                finite("beta", *beta)?;
                finite("rho", *rho)?;
                finite("a", *a)?;
                if *beta < 0.0 {
                    return Err(FracError::InvalidParameter("power needs beta >= 0".into()));
                }
                if *rho < 0.0 {
                    return Err(FracError::InvalidParameter("power needs rho >= 0".into()));
                }
                if *a < 0.0 || (*rho == 0.0 && *a <= 0.0) {
                    return Err(FracError::InvalidParameter(
                        "power needs a >= 0 (a > 0 for the logarithmic form rho = 0)".into(),
                    ));
                }
                Ok(())
            }
            FunctionSpec::Monomial { beta, .. } | FunctionSpec::ExpPow { beta } => positive("beta", *beta),
            FunctionSpec::MittagLeffler { lam, mu, nu, beta } => {
                positive("lam", *lam)?;
                finite("mu", *mu)?;
                finite("nu", *nu)?;
                positive("beta", *beta)
            }
            FunctionSpec::Pfq { a, b, beta } => {
                positive("beta", *beta)?;
                for v in a.iter().chain(b) {
                    finite("pfq parameter", *v)?;
                }
                if let Some(bad) = b.iter().find(|v| **v <= 0.0 && v.fract() == 0.0) {
                    return Err(FracError::InvalidParameter(format!(
                        "pfq lower parameter {bad} is a non-positive integer"
                    )));
                }
                if a.len() > b.len() + 1 {
                    return Err(FracError::InvalidParameter(
                        "pfq with p > q + 1 diverges".into(),
                    ));
                }
                Ok(())
            }
            FunctionSpec::Constant { c } => finite("c", *c),
            FunctionSpec::LinComb(terms) => {
                if terms.is_empty() {
                    return Err(FracError::InvalidParameter("empty linear combination".into()));
                }
                for (coef, spec) in terms {
                    finite("coefficient", *coef)?;
                    if matches!(spec, FunctionSpec::LinComb(_)) {
                        return Err(FracError::InvalidParameter(
                            "nested linear combinations are not supported".into(),
                        ));
                    }
                    spec.validate()?;
                }
                Ok(())
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(";")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Power { beta, rho, a } => write!(f, "power:beta={beta},rho={rho},a={a}"),
            FunctionSpec::Monomial { beta, k } => write!(f, "monomial:beta={beta},k={k}"),
            FunctionSpec::ExpPow { beta } => write!(f, "exppow:beta={beta}"),
            FunctionSpec::MittagLeffler { lam, mu, nu, beta } => {
                write!(f, "ml:lam={lam},mu={mu},nu={nu},beta={beta}")
            }
            FunctionSpec::Pfq { a, b, beta } => {
                f.write_str("pfq:a=")?;
                write_list(f, a)?;
                f.write_str(",b=")?;
                write_list(f, b)?;
                write!(f, ",beta={beta}")
            }
            FunctionSpec::Constant { c } => write!(f, "constant:c={c}"),
            FunctionSpec::LinComb(terms) => {
                for (i, (coef, spec)) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{coef}*{spec}")?;
                }
                Ok(())
            }
        }
    }
}

/// Splits on `+` signs that are not part of a float exponent.
fn split_terms(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'+' {
            continue;
        }
        let exponent_sign = i >= 2
            && matches!(bytes[i - 1], b'e' | b'E')
            && (bytes[i - 2].is_ascii_digit() || bytes[i - 2] == b'.');
        if !exponent_sign {
            parts.push(&s[start..i]);
            start = i + 1;
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_number(key: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| FracError::Parse(format!("value of `{key}` is not a number: `{raw}`")))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(';').map(|v| parse_number(key, v)).collect()
}

struct Params<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    fn parse(name: &'a str, body: &'a str) -> Result<Self> {
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        if !body.trim().is_empty() {
            for item in body.split(',') {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| FracError::Parse(format!("expected key=value, got `{item}`")))?;
                let k = k.trim();
                if pairs.iter().any(|(seen, _)| *seen == k) {
                    return Err(FracError::Parse(format!("duplicate key `{k}` in `{name}`")));
                }
                pairs.push((k, v));
            }
        }
        Ok(Self { name, pairs })
    }

    fn take(&mut self, key: &str) -> Result<&'a str> {
        let pos = self
            .pairs
            .iter()
            .position(|(k, _)| *k == key)
            .ok_or_else(|| FracError::Parse(format!("`{}` requires key `{key}`", self.name)))?;
        Ok(self.pairs.remove(pos).1)
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let raw = self.take(key)?;
        parse_number(key, raw)
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            Some((k, _)) => Err(FracError::Parse(format!("unknown key `{k}` for `{}`", self.name))),
            None => Ok(()),
        }
    }
}

fn parse_entry(text: &str) -> Result<FunctionSpec> {
    let text = text.trim();
    let (name, body) = text.split_once(':').unwrap_or((text, ""));
    let name = name.trim();
    let mut p = Params::parse(name, body)?;
    let spec = match name {
        "power" => FunctionSpec::Power {
            beta: p.number("beta")?,
            rho: p.number("rho")?,
            a: p.number("a")?,
        },
        "monomial" => {
            let beta = p.number("beta")?;
            let raw = p.take("k")?;
            let k = raw
                .trim()
                .parse::<u32>()
                .map_err(|_| FracError::Parse(format!("k must be a non-negative integer, got `{raw}`")))?;
            FunctionSpec::Monomial { beta, k }
        }
        "exppow" => FunctionSpec::ExpPow { beta: p.number("beta")? },
        "ml" => FunctionSpec::MittagLeffler {
            lam: p.number("lam")?,
            mu: p.number("mu")?,
            nu: p.number("nu")?,
            beta: p.number("beta")?,
        },
        "pfq" => {
            let a = parse_list("a", p.take("a")?)?;
            let b = parse_list("b", p.take("b")?)?;
            FunctionSpec::Pfq { a, b, beta: p.number("beta")? }
        }
        "constant" => FunctionSpec::Constant { c: p.number("c")? },
        "" => return Err(FracError::Parse("empty function name".into())),
        other => return Err(FracError::Parse(format!("unknown function `{other}`"))),
    };
    p.finish()?;
    Ok(spec)
}

impl FromStr for FunctionSpec {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        let parts = split_terms(s);
        let spec = if parts.len() == 1 && !parts[0].contains('*') {
            parse_entry(parts[0])?
        } else {
            let terms = parts
                .into_iter()
                .map(|part| {
                    let (coef, entry) = part.split_once('*').ok_or_else(|| {
                        FracError::Parse(format!("linear-combination term needs `coef*`: `{}`", part.trim()))
                    })?;
                    Ok((parse_number("coefficient", coef)?, parse_entry(entry)?))
                })
                .collect::<Result<Vec<_>>>()?;
            FunctionSpec::LinComb(terms)
        };
        spec.validate()?;
        Ok(spec)
    }
}
