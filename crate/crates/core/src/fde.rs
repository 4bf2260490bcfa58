//! Fractional power-series solutions of `Σ_k a_k C^{kα} u = 0`.

use serde::{Deserialize, Serialize};

use crate::catalog::{make_function, CatalogFunction, FunctionSpec};
use crate::error::{FracError, Result};
use crate::par::{try_map, Execution};
use crate::special::{mittag_leffler, recip_gamma, CompensatedSum, SeriesTolerance};

/// Linear sequential equation with constant coefficients `a_0..a_K` and
/// initial data `IC_k = C^{kα}u(a)`, `k < K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSequentialFde {
    pub coeffs: Vec<f64>,
    pub alpha: f64,
    pub rho: f64,
    pub a: f64,
    pub initial_values: Vec<f64>,
}

impl LinearSequentialFde {
    pub fn new(coeffs: Vec<f64>, alpha: f64, rho: f64, a: f64, initial_values: Vec<f64>) -> Result<Self> {
        let fde = Self { coeffs, alpha, rho, a, initial_values };
        fde.validate()?;
        Ok(fde)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.len() < 2 {
            return Err(FracError::InvalidParameter("need coefficients a_0..a_K with K >= 1".into()));
        }
        if self.coeffs.iter().chain(&self.initial_values).any(|v| !v.is_finite()) {
            return Err(FracError::InvalidParameter("coefficients and initial values must be finite".into()));
        }
        if *self.coeffs.last().unwrap() == 0.0 {
            return Err(FracError::Degenerate("leading coefficient a_K is zero".into()));
        }
        if self.initial_values.len() != self.order() {
            return Err(FracError::InvalidParameter(format!(
                "expected {} initial values, got {}",
                self.order(),
                self.initial_values.len()
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(FracError::InvalidParameter(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(FracError::InvalidParameter(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(FracError::InvalidParameter(format!("a must be >= 0, got {}", self.a)));
        }
        Ok(())
    }
}

/// `u(x) = Σ_n c_n (x^ρ − a^ρ)^{nα}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub alpha: f64,
    pub rho: f64,
    pub a: f64,
    pub coeffs: Vec<f64>,
}

/// Value of the truncated series and `|last term|` as a tail indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail: f64,
}

impl SeriesSolution {
    pub fn truncation(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `d_n = c_n Γ(1+nα)`.
    pub fn scaled_coefficients(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c / recip_gamma(1.0 + n as f64 * self.alpha))
            .collect()
    }

    fn base_distance(&self, x: f64) -> f64 {
        let a = self.a;
        if a > 0.0 {
            a.powf(self.rho) * (self.rho * (x / a).ln()).exp_m1()
        } else {
            x.powf(self.rho)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solution serializes")
    }

    /// The truncated series as a catalog combination of power functions,
    /// usable with the quadrature operators.
    pub fn to_function(&self, max_order: usize) -> Result<CatalogFunction> {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(n, c)| {
                let beta = n as f64 * self.alpha;
                let spec = if n == 0 {
                    FunctionSpec::Constant { c: 1.0 }
                } else {
                    FunctionSpec::Power { beta, rho: self.rho, a: self.a }
                };
                (c * self.rho.powf(beta), spec)
            })
            .collect();
        make_function(&FunctionSpec::LinComb(terms), max_order)
    }
}

/// Coefficients `c_0..c_N` from `Σ_k a_k ρ^{kα} d_{n+k} = 0` in
/// `d_n = c_n Γ(1+nα)`, started from `d_k = IC_k ρ^{−kα}`.
pub fn solve(fde: &LinearSequentialFde, n_max: usize) -> Result<SeriesSolution> {
    fde.validate()?;
    if n_max == 0 {
        return Err(FracError::InvalidParameter("truncation order N must be >= 1".into()));
    }
    let k_ord = fde.order();
    let ra = fde.rho.powf(fde.alpha);
    let weights: Vec<f64> = fde
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| a * ra.powi(k as i32))
        .collect();
    let lead = weights[k_ord];
    let mut d: Vec<f64> = fde
        .initial_values
        .iter()
        .enumerate()
        .map(|(k, ic)| ic / ra.powi(k as i32))
        .collect();
    while d.len() <= n_max {
        let n = d.len() - k_ord;
        let s: CompensatedSum = (0..k_ord).map(|k| weights[k] * d[n + k]).collect();
        d.push(-s.value() / lead);
    }
    d.truncate(n_max + 1);
    let coeffs = d
        .iter()
        .enumerate()
        .map(|(n, dn)| dn * recip_gamma(1.0 + n as f64 * fde.alpha))
        .collect();
    Ok(SeriesSolution { alpha: fde.alpha, rho: fde.rho, a: fde.a, coeffs })
}

pub fn evaluate_solution(s: &SeriesSolution, x: f64) -> SeriesValue {
    let Some(&c0) = s.coeffs.first() else {
        return SeriesValue { value: 0.0, tail: 0.0 };
    };
    if x == s.a {
        return SeriesValue { value: c0, tail: 0.0 };
    }
    if !(x > s.a) {
        return SeriesValue { value: f64::NAN, tail: f64::NAN };
    }
    let big_x = s.base_distance(x);
    let mut acc = CompensatedSum::new();
    let mut last = 0.0;
    for (n, c) in s.coeffs.iter().enumerate() {
        last = if n == 0 { *c } else { c * big_x.powf(n as f64 * s.alpha) };
        acc.add(last);
    }
    SeriesValue { value: acc.value(), tail: last.abs() }
}

/// `max_x |Σ_k a_k C^{kα} u(x)|` for the truncated series, with `C^{kα}`
/// applied termwise by the power rule.
pub fn residual(s: &SeriesSolution, fde: &LinearSequentialFde, x_grid: &[f64]) -> Result<f64> {
    fde.validate()?;
    let d = s.scaled_coefficients();
    let ra = s.rho.powf(s.alpha);
    let per_point = try_map(Execution::default(), x_grid, |&x| {
        if !(x > s.a) {
            return Err(FracError::Domain(format!("residual grid point {x} must exceed a = {}", s.a)));
        }
        let big_x = s.base_distance(x);
        let mut total = CompensatedSum::new();
        for (k, ak) in fde.coeffs.iter().enumerate() {
            if *ak == 0.0 {
                continue;
            }
            let mut inner = CompensatedSum::new();
            for (n, dn) in d.iter().enumerate().skip(k) {
                let m = (n - k) as f64 * s.alpha;
                let power = if n == k { 1.0 } else { big_x.powf(m) };
                inner.add(dn * recip_gamma(1.0 + m) * power);
            }
            total.add(ak * ra.powi(k as i32) * inner.value());
        }
        Ok(total.value().abs())
    })?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// `u_a E_α(λ ρ^{−α} (x^ρ − a^ρ)^α)`, the solution of `C^α u = λu`.
pub fn closed_form_example1(lam: f64, alpha: f64, rho: f64, a: f64, u_a: f64, x: f64) -> Result<f64> {
    if x < a {
        return Err(FracError::Domain(format!("x = {x} is below a = {a}")));
    }
    let big_x = if a > 0.0 {
        a.powf(rho) * (rho * (x / a).ln()).exp_m1()
    } else {
        x.powf(rho)
    };
    let z = lam * rho.powf(-alpha) * big_x.powf(alpha);
    Ok(u_a * mittag_leffler(alpha, 1.0, 1.0, z, SeriesTolerance::default())?)
}

/// Solution of `C^{2α}u − 2C^α u + u = 0` with `u(0) = u_0`,
/// `C^α u(0) = u_1` (base point 0):
/// `u_0 E_α(z) + ((u_1 − u_0)/α) z E_{α,α}(z)`, `z = ρ^{−α} x^{ρα}`.
pub fn closed_form_example2(u0: f64, u1: f64, alpha: f64, rho: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(FracError::Domain(format!("x = {x} must be >= 0")));
    }
    let tol = SeriesTolerance::default();
    let z = rho.powf(-alpha) * x.powf(rho * alpha);
    let first = u0 * mittag_leffler(alpha, 1.0, 1.0, z, tol)?;
    let second = (u1 - u0) / alpha * z * mittag_leffler(alpha, alpha, 1.0, z, tol)?;
    Ok(first + second)
}
