//! Scalar special functions: gamma, Pochhammer symbols, the three-parameter
//! Mittag-Leffler function and generalized hypergeometric series.
//!
//! All routines are pure and can be called concurrently.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

/// Largest argument for which `Γ(x)` is representable as an `f64`.
const GAMMA_OVERFLOW: f64 = 171.624_376_956_302_7;

/// Truncation control for the series evaluated in this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTolerance {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl SeriesTolerance {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(FracError::InvalidParameter(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(FracError::InvalidParameter("max_terms must be at least 1".into()));
        }
        Ok(Self { abs_tol, max_terms })
    }
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-16,
            max_terms: 5000,
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) for real `x`.
///
/// Non-positive integers are poles; arguments above ~171.62 overflow.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(FracError::InvalidParameter("gamma of NaN".into()));
    }
    if is_non_positive_integer(x) {
        return Err(FracError::Pole(format!("gamma has a pole at {x}")));
    }
    if x > GAMMA_OVERFLOW {
        return Err(FracError::Overflow(format!("gamma({x}) exceeds f64 range")));
    }
    Ok(libm::tgamma(x))
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "ln_gamma requires x > 0, got {x}"
        )));
    }
    Ok(libm::lgamma(x))
}

/// 1/Γ(x), an entire function: zero at the poles of Γ and finite (possibly
/// underflowing) for large arguments.
pub fn recip_gamma(x: f64) -> f64 {
    if is_non_positive_integer(x) {
        0.0
    } else if x > GAMMA_OVERFLOW {
        (-libm::lgamma(x)).exp()
    } else {
        1.0 / libm::tgamma(x)
    }
}

/// Rising factorial (ν)_k = ν(ν+1)…(ν+k−1), with (ν)_0 = 1.
pub fn pochhammer(nu: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (nu + i as f64))
}

/// Falling factorial x(x−1)…(x−k+1), with an empty product for k = 0.
pub fn falling_factorial(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x - i as f64))
}

/// Sums `term(k)` for k = 0, 1, … until a term is below `tol.abs_tol` in
/// magnitude and no larger than its predecessor.
pub(crate) fn sum_series<F>(mut term: F, tol: SeriesTolerance) -> Result<f64>
where
    F: FnMut(usize) -> f64,
{
    let mut acc = CompensatedSum::new();
    let mut previous = f64::INFINITY;
    for k in 0..tol.max_terms {
        let t = term(k);
        if !t.is_finite() {
            return Err(FracError::NonConvergence { terms: k });
        }
        acc.add(t);
        let magnitude = t.abs();
        if k >= 1 && magnitude < tol.abs_tol && magnitude <= previous {
            return Ok(acc.value());
        }
        previous = magnitude;
    }
    Err(FracError::NonConvergence {
        terms: tol.max_terms,
    })
}

/// Generalized Mittag-Leffler function
/// `E^ν_{λ,μ}(z) = Σ_k (ν)_k z^k / (Γ(λk+μ) k!)`, by direct summation.
pub fn mittag_leffler(lam: f64, mu: f64, nu: f64, z: f64, tol: SeriesTolerance) -> Result<f64> {
    if !(lam > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "Mittag-Leffler requires lambda > 0, got {lam}"
        )));
    }
    if !(mu.is_finite() && nu.is_finite() && z.is_finite()) {
        return Err(FracError::InvalidParameter("non-finite Mittag-Leffler argument".into()));
    }
    // prefix holds (ν)_k z^k / k!
    let mut prefix = 1.0;
    sum_series(
        |k| {
            if k > 0 {
                let kf = (k - 1) as f64;
                prefix *= (nu + kf) * z / (kf + 1.0);
            }
            prefix * recip_gamma(lam * k as f64 + mu)
        },
        tol,
    )
}

/// Classical two-parameter Mittag-Leffler `E_{λ,μ}(z)`.
pub fn mittag_leffler2(lam: f64, mu: f64, z: f64, tol: SeriesTolerance) -> Result<f64> {
    mittag_leffler(lam, mu, 1.0, z, tol)
}

/// Generalized hypergeometric series `pFq(a; b; z)`.
pub fn hypergeometric_pfq(a: &[f64], b: &[f64], z: f64, tol: SeriesTolerance) -> Result<f64> {
    if let Some(bad) = b.iter().find(|&&bj| is_non_positive_integer(bj)) {
        return Err(FracError::Pole(format!(
            "lower parameter {bad} is a non-positive integer"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let (p, q) = (a.len(), b.len());
    if p > q + 1 {
        return Err(FracError::Divergence(format!(
            "{p}F{q} diverges for z != 0"
        )));
    }
    // a terminating series (some a_i a non-positive integer) converges everywhere
    let terminates = a.iter().any(|&ai| is_non_positive_integer(ai));
    if p == q + 1 && z.abs() >= 1.0 && !terminates {
        return Err(FracError::Divergence(format!(
            "{p}F{q} requires |z| < 1, got {z}"
        )));
    }
    let mut term = 1.0;
    sum_series(
        |k| {
            if k > 0 {
                let kf = (k - 1) as f64;
                let num: f64 = a.iter().map(|ai| ai + kf).product();
                let den: f64 = b.iter().map(|bj| bj + kf).product();
                term *= num / den * z / (kf + 1.0);
            }
            term
        },
        tol,
    )
}
