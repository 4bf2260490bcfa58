//! Quadrature for `∫_0^1 (1−r)^{p−1} G(r) dr` with `G` possibly integrably
//! singular at `r = 0`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::special::{gamma, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Gauss-Jacobi at the kernel endpoint, double-exponential at the base.
    JacobiWeighted,
    /// Graded geometric cells toward both endpoints with Gauss-Legendre.
    AdaptiveSplit,
}

impl std::str::FromStr for Scheme {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jacobi" | "jacobi_weighted" => Ok(Scheme::JacobiWeighted),
            "adaptive" | "adaptive_split" => Ok(Scheme::AdaptiveSplit),
            other => Err(FracError::Parse(format!("unknown quadrature scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::JacobiWeighted => "jacobi",
            Scheme::AdaptiveSplit => "adaptive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub scheme: Scheme,
    pub nodes: usize,
    pub abs_tol: f64,
    pub split_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::JacobiWeighted,
            nodes: 64,
            abs_tol: 1e-8,
            split_depth: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn new(scheme: Scheme, nodes: usize, abs_tol: f64, split_depth: usize) -> Result<Self> {
        let cfg = Self { scheme, nodes, abs_tol, split_depth };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn adaptive() -> Self {
        Self { scheme: Scheme::AdaptiveSplit, ..Self::default() }
    }

    pub fn with_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(FracError::InvalidParameter(format!("nodes must be >= 2, got {}", self.nodes)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(FracError::InvalidParameter(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if self.split_depth == 0 || self.split_depth > 1000 {
            return Err(FracError::InvalidParameter("split_depth must be in 1..=1000".into()));
        }
        Ok(())
    }
}

/// Nodes and weights on `[−1, 1]` for the weight `(1−t)^a (1+t)^b`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type RuleKey = (usize, u64, u64);

fn rule_cache() -> &'static RwLock<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached Gauss-Jacobi rule (Golub-Welsch).
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Arc<GaussRule>> {
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(rule) = rule_cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(golub_welsch(n, a, b)?);
    let mut cache = rule_cache().write().expect("rule cache poisoned");
    if cache.len() > 4096 {
        cache.clear();
    }
    Ok(cache.entry(key).or_insert(rule).clone())
}

fn golub_welsch(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    if n == 0 || !(a > -1.0 && b > -1.0) {
        return Err(FracError::InvalidParameter(format!(
            "Gauss-Jacobi needs n >= 1 and exponents > -1 (n={n}, a={a}, b={b})"
        )));
    }
    let ab = a + b;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let fi = i as f64;
        let diag = if i == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * fi + ab) * (2.0 * fi + ab + 2.0))
        };
        jm[(i, i)] = diag;
        if i + 1 < n {
            let k = fi + 1.0;
            let off = if i == 0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let s = 2.0 * k + ab;
                (4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            jm[(i, i + 1)] = off;
            jm[(i + 1, i)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0)? * gamma(b + 1.0)? / gamma(ab + 2.0)?;
    let eig = jm.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// `∫_0^1 (1−r)^{p−1} G(r) dr` for `p > 0`.
pub fn weighted_unit_integral(
    p: f64,
    g: &dyn Fn(f64) -> Result<f64>,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(FracError::InvalidParameter(format!("kernel exponent must be > 0, got {p}")));
    }
    match cfg.scheme {
        Scheme::JacobiWeighted => jacobi_weighted(p, g, cfg),
        Scheme::AdaptiveSplit => adaptive_split(p, g, cfg),
    }
}

fn jacobi_weighted(p: f64, g: &dyn Fn(f64) -> Result<f64>, cfg: &QuadratureConfig) -> Result<f64> {
    // [1/2, 1]: r = 3/4 + t/4, (1−r)^{p−1} dr = 4^{−p} (1−t)^{p−1} dt
    let rule = gauss_jacobi(cfg.nodes, p - 1.0, 0.0)?;
    let mut right = CompensatedSum::new();
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = g(0.75 + 0.25 * t)?;
        if !v.is_finite() {
            return Err(FracError::NonFinite(format!("integrand at r = {}", 0.75 + 0.25 * t)));
        }
        right.add(w * v);
    }
    let right = right.value() * 0.25f64.powf(p);
    let left = tanh_sinh_base(0.5, &|r| Ok((1.0 - r).powf(p - 1.0) * g(r)?), cfg.abs_tol)?;
    Ok(left + right)
}

/// Double-exponential rule on `[0, c]` that tolerates an integrable
/// singularity at 0.
fn tanh_sinh_base(c: f64, w: &dyn Fn(f64) -> Result<f64>, abs_tol: f64) -> Result<f64> {
    const T_LO: f64 = 6.08;
    const T_HI: f64 = 3.5;
    const MAX_LEVEL: usize = 8;
    const NEGLIGIBLE: f64 = 1e-18;
    let pi = std::f64::consts::PI;

    let point = |t: f64| -> Result<f64> {
        let y = pi * t.sinh();
        let lower = 1.0 / (1.0 + (-y).exp());
        let upper = 1.0 / (1.0 + y.exp());
        let r = c * lower;
        if r <= 0.0 || r >= c {
            return Ok(0.0);
        }
        let jac = c * pi * t.cosh() * lower * upper;
        if jac == 0.0 {
            return Ok(0.0);
        }
        let tiny = r < 1e-12 * c;
        match w(r) {
            Ok(v) if v.is_finite() => Ok(jac * v),
            // the base point itself may be singular; such samples carry no weight
            Ok(_) | Err(_) if tiny => Ok(0.0),
            Ok(_) => Err(FracError::NonFinite(format!("integrand at r = {r:e}"))),
            Err(e) => Err(e),
        }
    };

    // coarse pass, also used to trim the tails where terms are negligible
    let mut h = 0.5;
    let k_lo = (T_LO / h).ceil() as i64;
    let k_hi = (T_HI / h).ceil() as i64;
    let terms: Vec<f64> = (-k_lo..=k_hi).map(|k| point(k as f64 * h)).collect::<Result<_>>()?;
    let peak = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = NEGLIGIBLE * peak;
    let first = terms.iter().position(|v| v.abs() > cut).unwrap_or(0);
    let last = terms.iter().rposition(|v| v.abs() > cut).unwrap_or(terms.len() - 1);
    let t_lo = ((first as i64 - k_lo - 1) as f64 * h).max(-T_LO);
    let t_hi = ((last as i64 - k_lo + 1) as f64 * h).min(T_HI);
    let mut sum: CompensatedSum = terms.iter().copied().collect();
    let mut estimate = h * sum.value();

    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let k_start = (t_lo / h).floor() as i64;
        let k_end = (t_hi / h).ceil() as i64;
        let mut k = if k_start % 2 == 0 { k_start + 1 } else { k_start };
        while k <= k_end {
            sum.add(point(k as f64 * h)?);
            k += 2;
        }
        let next = h * sum.value();
        let diff = (next - estimate).abs();
        estimate = next;
        if level >= 3 && diff <= (0.1 * abs_tol).max(1e-15 * next.abs()) {
            break;
        }
    }
    Ok(estimate)
}

fn adaptive_split(p: f64, g: &dyn Fn(f64) -> Result<f64>, cfg: &QuadratureConfig) -> Result<f64> {
    let per_cell = (cfg.nodes / 4).clamp(8, 32);
    let rule = gauss_jacobi(per_cell, 0.0, 0.0)?;
    let depth = cfg.split_depth;

    let cell = |lo: f64, hi: f64, f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = CompensatedSum::new();
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(mid + half * t)?;
            if !v.is_finite() {
                return Err(FracError::QuadratureNonConvergence(format!(
                    "non-finite integrand at r = {}",
                    mid + half * t
                )));
            }
            acc.add(w * v);
        }
        Ok(half * acc.value())
    };
    let integrand = |r: f64| -> Result<f64> { Ok((1.0 - r).powf(p - 1.0) * g(r)?) };
    // integrand in s = 1 − r, kernel computed from s directly
    let mirrored = |s: f64| -> Result<f64> { Ok(s.powf(p - 1.0) * g(1.0 - s)?) };

    let mut total = CompensatedSum::new();

    // toward r = 0: cells [2^{−d−2}, 2^{−d−1}]
    let mut previous = f64::NAN;
    let mut last = 0.0;
    for d in 0..depth {
        let hi = 0.5f64.powi(d as i32 + 1);
        let v = cell(0.5 * hi, hi, &integrand)?;
        total.add(v);
        previous = last;
        last = v;
    }
    if last != 0.0 {
        let q = last / previous;
        if !(q.abs() < 1.0) {
            return Err(FracError::QuadratureNonConvergence(format!(
                "cell integrals toward the base point do not decay (ratio {q})"
            )));
        }
        total.add(last * q / (1.0 - q));
    }

    // toward r = 1 in s = 1 − r
    for d in 0..depth {
        let hi = 0.5f64.powi(d as i32 + 1);
        total.add(cell(0.5 * hi, hi, &mirrored)?);
    }
    let delta = 0.5f64.powi(depth as i32 + 1);
    let inner = g(1.0 - 0.5 * delta)?;
    total.add(inner * delta.powf(p) / p);

    Ok(total.value())
}
