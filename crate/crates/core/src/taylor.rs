//! Generalized Taylor (Müntz) expansions with Lagrange and integral
//! remainders, the mean value theorem, and the Hadamard-limit expansion.

use serde::{Deserialize, Serialize};

use crate::catalog::{scaled_difference, DifferentiableFunction};
use crate::error::{FracError, Result};
use crate::gamma_op::{caputo_at_base, hadamard_at_base};
use crate::operators::{caputo_derivative, frac_integral, sequential_caputo, CaputoFn, OperatorParams};
use crate::par::{try_map, try_map_range, Execution};
use crate::quadrature::QuadratureConfig;
use crate::special::{gamma, recip_gamma, CompensatedSum};

/// `Λ_m(x) = Σ_j c_j ((x^ρ − a^ρ)/ρ)^{jα}` with `c_j = C^{jα}f(a)/Γ(jα+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuntzExpansion {
    pub a: f64,
    pub alpha: f64,
    pub rho: f64,
    pub coeffs: Vec<f64>,
}

impl MuntzExpansion {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficients of `(x^ρ − a^ρ)^{jα}`, i.e. `c_j ρ^{−jα}`.
    pub fn abstract_coefficients(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.rho.powf(-(j as f64) * self.alpha))
            .collect()
    }

    /// Müntz exponents `λ_j = ραj` in the variable `x` (for `a = 0`).
    pub fn exponents(&self) -> Vec<f64> {
        (0..self.coeffs.len()).map(|j| self.rho * self.alpha * j as f64).collect()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        evaluate_powers(&self.coeffs, scaled_difference(x, self.a, self.rho), self.alpha, x, self.a)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expansion serializes")
    }
}

fn evaluate_powers(coeffs: &[f64], u: f64, alpha: f64, x: f64, a: f64) -> f64 {
    let Some((&c0, rest)) = coeffs.split_first() else {
        return 0.0;
    };
    if x == a {
        return c0;
    }
    if !(x > a) {
        return f64::NAN;
    }
    let mut acc = CompensatedSum::new();
    acc.add(c0);
    for (j, c) in rest.iter().enumerate() {
        if *c != 0.0 {
            acc.add(c * u.powf((j + 1) as f64 * alpha));
        }
    }
    acc.value()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(FracError::InvalidParameter(format!("alpha must be in (0, 1], got {alpha}")))
    }
}

/// Generalized Taylor polynomial of order `m` at `a`.
pub fn expand(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    rho: f64,
    a: f64,
    m: usize,
) -> Result<MuntzExpansion> {
    expand_with(f, alpha, rho, a, m, Execution::default())
}

pub fn expand_with(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    rho: f64,
    a: f64,
    m: usize,
    exec: Execution,
) -> Result<MuntzExpansion> {
    check_alpha(alpha)?;
    let coeffs = try_map_range(exec, m + 1, |j| {
        let v = caputo_at_base(f, j, alpha, rho, a)?;
        Ok(v * recip_gamma(j as f64 * alpha + 1.0))
    })?;
    if let Some(bad) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(FracError::NonFinite(format!("coefficient {bad} is not finite")));
    }
    Ok(MuntzExpansion { a, alpha, rho, coeffs })
}

/// Grid-based estimate of the Lagrange remainder
/// `u^{(m+1)α}/Γ((m+1)α+1) · sup_ξ |C^{(m+1)α} f(ξ)|`, the sup taken over
/// `ξ_k = a + (x − a)k/N`, `k = 1..N`.
pub fn lagrange_remainder_bound(
    f: &dyn DifferentiableFunction,
    e: &MuntzExpansion,
    x: f64,
    grid_points: usize,
    q: &QuadratureConfig,
) -> Result<f64> {
    lagrange_remainder_bound_with(f, e, x, grid_points, q, Execution::default())
}

pub fn lagrange_remainder_bound_with(
    f: &dyn DifferentiableFunction,
    e: &MuntzExpansion,
    x: f64,
    grid_points: usize,
    q: &QuadratureConfig,
    exec: Execution,
) -> Result<f64> {
    if grid_points == 0 {
        return Err(FracError::InvalidParameter("grid_points must be >= 1".into()));
    }
    if x < e.a {
        return Err(FracError::Domain(format!("x = {x} is below the base point {}", e.a)));
    }
    if x == e.a {
        return Ok(0.0);
    }
    let j = e.order() + 1;
    let order = j as f64 * e.alpha;
    let grid: Vec<f64> = (1..=grid_points)
        .map(|k| e.a + (x - e.a) * k as f64 / grid_points as f64)
        .collect();
    let values = try_map(exec, &grid, |xi| sequential_caputo(f, e.alpha, j, e.rho, e.a, *xi, q))?;
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let u = scaled_difference(x, e.a, e.rho);
    Ok(u.powf(order) * recip_gamma(order + 1.0) * sup)
}

/// `I^{(m+1)α}(C^{(m+1)α} f)(x)`, so that `f(x) = Λ_m(x) + remainder`.
pub fn integral_remainder(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    rho: f64,
    a: f64,
    m: usize,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    check_alpha(alpha)?;
    let order = (m + 1) as f64 * alpha;
    let c = CaputoFn::new(f, order, rho, a, *q)?;
    frac_integral(&c, &OperatorParams::left(order, rho, a), x, q)
}

/// Intermediate point of the mean value theorem and its residual
/// `|C^α f(ξ) − Γ(α+1) u(x)^{−α} (f(x) − f(a))|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanValuePoint {
    pub xi: f64,
    pub residual: f64,
}

pub fn mean_value_find_xi(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    rho: f64,
    a: f64,
    x: f64,
    grid_points: usize,
    q: &QuadratureConfig,
) -> Result<MeanValuePoint> {
    check_alpha(alpha)?;
    if !(x > a) {
        return Err(FracError::Domain(format!("need x > a, got x = {x}, a = {a}")));
    }
    let n = grid_points.max(2);
    let target = gamma(alpha + 1.0)? * scaled_difference(x, a, rho).powf(-alpha)
        * (f.eval(x, 0)? - f.eval(a, 0)?);
    let p = OperatorParams::left(alpha, rho, a);
    let g = |xi: f64| -> Result<f64> { Ok(caputo_derivative(f, &p, xi, q)? - target) };

    let grid: Vec<f64> = (1..=n).map(|k| a + (x - a) * k as f64 / (n + 1) as f64).collect();
    let values = try_map(Execution::default(), &grid, |xi| g(*xi))?;

    if let Some(k) = values.iter().position(|v| *v == 0.0) {
        return Ok(MeanValuePoint { xi: grid[k], residual: 0.0 });
    }
    if let Some(k) = values.windows(2).position(|w| w[0].signum() != w[1].signum()) {
        let (mut lo, mut hi) = (grid[k], grid[k + 1]);
        let (mut glo, mut best) = (values[k], (grid[k], values[k].abs()));
        if values[k + 1].abs() < best.1 {
            best = (grid[k + 1], values[k + 1].abs());
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid)?;
            if gm.abs() < best.1 {
                best = (mid, gm.abs());
            }
            if gm == 0.0 {
                break;
            }
            if gm.signum() == glo.signum() {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        return Ok(MeanValuePoint { xi: best.0, residual: best.1 });
    }
    let k = values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    Ok(MeanValuePoint { xi: grid[k], residual: values[k].abs() })
}

/// Expansion in powers of `log(x/a)` with Hadamard-Caputo coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardExpansion {
    pub a: f64,
    pub alpha: f64,
    pub coeffs: Vec<f64>,
}

impl HadamardExpansion {
    pub fn evaluate(&self, x: f64) -> f64 {
        evaluate_powers(&self.coeffs, (x / self.a).ln(), self.alpha, x, self.a)
    }
}

pub fn expand_hadamard(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    a: f64,
    m: usize,
) -> Result<HadamardExpansion> {
    check_alpha(alpha)?;
    let coeffs = try_map_range(Execution::default(), m + 1, |j| {
        Ok(hadamard_at_base(f, j, alpha, a)? * recip_gamma(j as f64 * alpha + 1.0))
    })?;
    Ok(HadamardExpansion { a, alpha, coeffs })
}
