//! Generalized fractional integrals and derivatives, and the classical and
//! Hadamard reference operators they reduce to as `ρ → 1` and `ρ → 0⁺`.

use serde::{Deserialize, Serialize};

use crate::catalog::{scaled_difference, DifferentiableFunction, Interval};
use crate::error::{FracError, Result};
use crate::gamma_op::{caputo_n, gamma_power, gamma_power_at_base, gamma_power_offset, point_from_scaled};
use crate::quadrature::{weighted_unit_integral, QuadratureConfig};
use crate::special::{gamma, recip_gamma, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(FracError::Parse(format!("unknown side '{other}'"))),
        }
    }
}

/// Order, `ρ`, base point (`a` on the left, `b` on the right) and side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub alpha: f64,
    pub rho: f64,
    pub base: f64,
    pub side: Side,
}

impl OperatorParams {
    pub fn left(alpha: f64, rho: f64, a: f64) -> Self {
        Self { alpha, rho, base: a, side: Side::Left }
    }

    pub fn right(alpha: f64, rho: f64, b: f64) -> Self {
        Self { alpha, rho, base: b, side: Side::Right }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(FracError::InvalidParameter(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(FracError::InvalidParameter(format!("rho must be > 0, got {}", self.rho)));
        }
        let ok = match self.side {
            Side::Left => self.base >= 0.0 && self.base.is_finite(),
            Side::Right => self.base > 0.0 && self.base.is_finite(),
        };
        if !ok {
            return Err(FracError::InvalidParameter(format!("invalid base point {}", self.base)));
        }
        Ok(())
    }

    /// `(x^ρ − a^ρ)/ρ` on the left, `(b^ρ − x^ρ)/ρ` on the right.
    pub fn distance(&self, x: f64) -> f64 {
        match self.side {
            Side::Left => scaled_difference(x, self.base, self.rho),
            Side::Right => -scaled_difference(x, self.base, self.rho),
        }
    }

    fn check_point(&self, domain: Interval, x: f64) -> Result<()> {
        let inside = match self.side {
            Side::Left => self.base <= x && x <= domain.hi && self.base >= domain.lo,
            Side::Right => domain.lo <= x && x <= self.base && self.base <= domain.hi,
        };
        if inside && x.is_finite() {
            Ok(())
        } else {
            Err(FracError::Domain(format!(
                "x = {x} with base {} not inside the domain [{}, {}] on the {:?} side",
                self.base, domain.lo, domain.hi, self.side
            )))
        }
    }
}

/// `I^α g(x)` for a function given pointwise; `g(t, s)` receives each node
/// both as a point `t` strictly between the base point and `x` and as its
/// signed scaled offset `s` from the base point.
fn integral_of(
    g: &dyn Fn(f64, f64) -> Result<f64>,
    alpha: f64,
    p: &OperatorParams,
    dist: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if dist == 0.0 {
        return Ok(0.0);
    }
    let (base, rho) = (p.base, p.rho);
    let shift = match p.side {
        Side::Left => dist,
        Side::Right => -dist,
    };
    let at = |r: f64| {
        let s = shift * r;
        g(point_from_scaled(base, rho, s), s)
    };
    let core = weighted_unit_integral(alpha, &at, q)?;
    Ok(dist.powf(alpha) * recip_gamma(alpha) * core)
}

/// Generalized fractional integral `I^α f(x)`; `α = 0` is the identity.
pub fn frac_integral(
    f: &dyn DifferentiableFunction,
    p: &OperatorParams,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    p.validate()?;
    p.check_point(f.domain(), x)?;
    if p.alpha == 0.0 {
        return f.eval(x, 0);
    }
    let (rho, base) = (p.rho, p.base);
    integral_of(&|t, s| gamma_power_offset(f, rho, 0, t, base, s), p.alpha, p, p.distance(x), q)
}

fn sign_for(side: Side, n: usize) -> f64 {
    match side {
        Side::Right if n % 2 == 1 => -1.0,
        _ => 1.0,
    }
}

/// Caputo-type derivative `C^α f(x)`, with `n = ⌈α⌉`.
pub fn caputo_derivative(
    f: &dyn DifferentiableFunction,
    p: &OperatorParams,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    p.validate()?;
    p.check_point(f.domain(), x)?;
    let alpha = p.alpha;
    if alpha == 0.0 {
        return f.eval(x, 0);
    }
    let n = caputo_n(alpha);
    if n > f.max_order() {
        return Err(FracError::Order { requested: n, available: f.max_order() });
    }
    let sign = sign_for(p.side, n);
    if (n as f64 - alpha).abs() <= 1e-12 * alpha.max(1.0) {
        return Ok(sign * gamma_power(f, p.rho, n, x)?);
    }
    let (rho, base) = (p.rho, p.base);
    let g = |t: f64, s: f64| gamma_power_offset(f, rho, n, t, base, s);
    Ok(sign * integral_of(&g, n as f64 - alpha, p, p.distance(x), q)?)
}

/// Riemann-type derivative together with a flag raised when `x` sits so
/// close to the base point that negative-power boundary terms dominate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannValue {
    pub value: f64,
    pub singular_warning: bool,
}

/// Riemann-type derivative `D^α f(x)`, evaluated as `C^α f(x)` plus the
/// boundary terms `Σ_{k<n} (γ^k f)(a)/Γ(k+1−α)·u^{k−α}`.
pub fn riemann_derivative_flagged(
    f: &dyn DifferentiableFunction,
    p: &OperatorParams,
    x: f64,
    q: &QuadratureConfig,
) -> Result<RiemannValue> {
    let caputo = caputo_derivative(f, p, x, q)?;
    let alpha = p.alpha;
    let n = caputo_n(alpha);
    if alpha == 0.0 || (n as f64 - alpha).abs() <= 1e-12 * alpha.max(1.0) {
        return Ok(RiemannValue { value: caputo, singular_warning: false });
    }
    let dist = p.distance(x);
    let mut acc = CompensatedSum::new();
    acc.add(caputo);
    let mut warning = false;
    for k in 0..n {
        let boundary = sign_for(p.side, k) * gamma_power_at_base(f, p.rho, k, p.base)?;
        if boundary == 0.0 {
            continue;
        }
        let e = k as f64 - alpha;
        if e < 0.0 && dist < 1e-6 {
            warning = true;
        }
        acc.add(boundary * recip_gamma(k as f64 + 1.0 - alpha) * dist.powf(e));
    }
    Ok(RiemannValue { value: acc.value(), singular_warning: warning })
}

/// Riemann-type derivative `D^α f(x) = γ^n I^{n−α} f(x)`, `n = ⌊α⌋ + 1`.
pub fn riemann_derivative(
    f: &dyn DifferentiableFunction,
    p: &OperatorParams,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    Ok(riemann_derivative_flagged(f, p, x, q)?.value)
}

/// `C^{jα} f(x)` evaluated as a single Caputo-type derivative of order `jα`.
pub fn sequential_caputo(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    j: usize,
    rho: f64,
    base: f64,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::InvalidParameter(format!("alpha must be in (0, 1], got {alpha}")));
    }
    caputo_derivative(f, &OperatorParams::left(j as f64 * alpha, rho, base), x, q)
}

fn reference_checks(f: &dyn DifferentiableFunction, alpha: f64, a: f64, x: f64) -> Result<usize> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(FracError::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    let d = f.domain();
    if !(a >= d.lo && a <= x && x <= d.hi) {
        return Err(FracError::Domain(format!("need {} <= a = {a} <= x = {x} <= {}", d.lo, d.hi)));
    }
    let n = caputo_n(alpha);
    if n > f.max_order() {
        return Err(FracError::Order { requested: n, available: f.max_order() });
    }
    Ok(n)
}

/// Classical Caputo derivative `1/Γ(n−α) ∫_a^x (x−τ)^{n−α−1} f^(n)(τ) dτ`.
pub fn classical_caputo(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    a: f64,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    let n = reference_checks(f, alpha, a, x)?;
    if alpha == 0.0 {
        return f.eval(x, 0);
    }
    if (n as f64 - alpha).abs() <= 1e-12 * alpha.max(1.0) {
        return f.eval(x, n);
    }
    let h = x - a;
    if h == 0.0 {
        return Ok(0.0);
    }
    let s = n as f64 - alpha;
    let g = |r: f64| f.eval(a + h * r, n);
    Ok(h.powf(s) / gamma(s)? * weighted_unit_integral(s, &g, q)?)
}

/// Caputo-modified Hadamard derivative
/// `1/Γ(n−α) ∫_a^x (log x/τ)^{n−α−1} (δ^n f)(τ) dτ/τ` with `δ = x d/dx`.
pub fn hadamard_caputo(
    f: &dyn DifferentiableFunction,
    alpha: f64,
    a: f64,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if !(a > 0.0) {
        return Err(FracError::Domain(format!("Hadamard operators need a > 0, got {a}")));
    }
    let n = reference_checks(f, alpha, a, x)?;
    if alpha == 0.0 {
        return f.eval(x, 0);
    }
    if (n as f64 - alpha).abs() <= 1e-12 * alpha.max(1.0) {
        return gamma_power(f, 0.0, n, x);
    }
    let len = (x / a).ln();
    if len == 0.0 {
        return Ok(0.0);
    }
    let s = n as f64 - alpha;
    let g = |r: f64| gamma_power(f, 0.0, n, a * (len * r).exp());
    Ok(len.powf(s) / gamma(s)? * weighted_unit_integral(s, &g, q)?)
}

/// `γ^j f` as a function in its own right.
#[derive(Debug, Clone)]
pub struct GammaPowerFn<F> {
    f: F,
    rho: f64,
    j: usize,
}

impl<F: DifferentiableFunction> GammaPowerFn<F> {
    pub fn new(f: F, rho: f64, j: usize) -> Result<Self> {
        if j > f.max_order() {
            return Err(FracError::Order { requested: j, available: f.max_order() });
        }
        Ok(Self { f, rho, j })
    }
}

impl<F: DifferentiableFunction> DifferentiableFunction for GammaPowerFn<F> {
    fn domain(&self) -> Interval {
        self.f.domain()
    }

    fn max_order(&self) -> usize {
        self.f.max_order() - self.j
    }

    fn derivative(&self, x: f64, order: usize) -> f64 {
        if order == 0 {
            gamma_power(&self.f, self.rho, self.j, x).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        }
    }

    fn exact_gamma_power(&self, rho: f64, k: usize, x: f64) -> Option<f64> {
        if rho != self.rho || k > self.max_order() {
            return None;
        }
        gamma_power(&self.f, self.rho, self.j + k, x).ok()
    }

    fn exact_gamma_power_offset(&self, rho: f64, k: usize, x: f64, base: f64, u: f64) -> Option<f64> {
        if rho != self.rho || k > self.max_order() {
            return None;
        }
        gamma_power_offset(&self.f, self.rho, self.j + k, x, base, u).ok()
    }

    fn gamma_power_bounded_near(&self, rho: f64, a: f64, n: usize) -> Option<bool> {
        if rho != self.rho {
            return None;
        }
        self.f.gamma_power_bounded_near(rho, a, n + self.j)
    }
}

/// Left-sided `I^α g` as a function of `x`, with exact `γ`-powers
/// `γ^k I^α g = I^α γ^k g + Σ_{i<k} (γ^i g)(a) u^{α−k+i}/Γ(α−k+i+1)`.
#[derive(Debug, Clone)]
pub struct FracIntegralFn<G> {
    g: G,
    params: OperatorParams,
    quad: QuadratureConfig,
    boundary: Vec<f64>,
}

impl<G: DifferentiableFunction> FracIntegralFn<G> {
    pub fn new(g: G, alpha: f64, rho: f64, a: f64, quad: QuadratureConfig) -> Result<Self> {
        let params = OperatorParams::left(alpha, rho, a);
        params.validate()?;
        if !(alpha > 0.0) {
            return Err(FracError::InvalidParameter("integral wrapper needs alpha > 0".into()));
        }
        let boundary = (0..g.max_order())
            .map(|i| gamma_power_at_base(&g, rho, i, a).unwrap_or(f64::NAN))
            .collect();
        Ok(Self { g, params, quad, boundary })
    }
}

impl<G: DifferentiableFunction> DifferentiableFunction for FracIntegralFn<G> {
    fn domain(&self) -> Interval {
        let d = self.g.domain();
        Interval::new(self.params.base.max(d.lo), d.hi)
    }

    fn max_order(&self) -> usize {
        self.g.max_order()
    }

    fn derivative(&self, x: f64, order: usize) -> f64 {
        if order == 0 {
            frac_integral(&self.g, &self.params, x, &self.quad).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        }
    }

    fn exact_gamma_power(&self, rho: f64, k: usize, x: f64) -> Option<f64> {
        self.gamma_power_at(rho, k, self.params.distance(x))
    }

    fn exact_gamma_power_offset(&self, rho: f64, k: usize, x: f64, base: f64, u: f64) -> Option<f64> {
        if base == self.params.base && u >= 0.0 {
            self.gamma_power_at(rho, k, u)
        } else {
            self.exact_gamma_power(rho, k, x)
        }
    }
}

impl<G: DifferentiableFunction> FracIntegralFn<G> {
    /// `γ^k I^α g` at scaled distance `u` from the base point.
    fn gamma_power_at(&self, rho: f64, k: usize, u: f64) -> Option<f64> {
        if rho != self.params.rho || k > self.max_order() {
            return None;
        }
        let p = &self.params;
        let base = p.base;
        let g = |t: f64, s: f64| gamma_power_offset(&self.g, rho, k, t, base, s);
        let mut acc = CompensatedSum::new();
        acc.add(integral_of(&g, p.alpha, p, u, &self.quad).ok()?);
        for i in 0..k {
            let b = self.boundary[i];
            if b == 0.0 {
                continue;
            }
            if !b.is_finite() {
                return None;
            }
            let e = p.alpha - k as f64 + i as f64;
            let c = recip_gamma(e + 1.0);
            if c != 0.0 {
                acc.add(b * c * u.powf(e));
            }
        }
        Some(acc.value())
    }
}

/// `C^α f` as a function: `I^{n−α}(γ^n f)` for non-integer `α`, `γ^n f`
/// otherwise.
pub enum CaputoFn<F> {
    Integral(FracIntegralFn<GammaPowerFn<F>>),
    Power(GammaPowerFn<F>),
}

impl<F: DifferentiableFunction> CaputoFn<F> {
    pub fn new(f: F, alpha: f64, rho: f64, a: f64, quad: QuadratureConfig) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(FracError::InvalidParameter("Caputo wrapper needs alpha > 0".into()));
        }
        let n = caputo_n(alpha);
        let inner = GammaPowerFn::new(f, rho, n)?;
        if (n as f64 - alpha).abs() <= 1e-12 * alpha.max(1.0) {
            Ok(CaputoFn::Power(inner))
        } else {
            Ok(CaputoFn::Integral(FracIntegralFn::new(inner, n as f64 - alpha, rho, a, quad)?))
        }
    }

    fn inner(&self) -> &dyn DifferentiableFunction {
        match self {
            CaputoFn::Integral(i) => i,
            CaputoFn::Power(p) => p,
        }
    }
}

impl<F: DifferentiableFunction> DifferentiableFunction for CaputoFn<F> {
    fn domain(&self) -> Interval {
        self.inner().domain()
    }
    fn max_order(&self) -> usize {
        self.inner().max_order()
    }
    fn derivative(&self, x: f64, order: usize) -> f64 {
        self.inner().derivative(x, order)
    }
    fn exact_gamma_power(&self, rho: f64, j: usize, x: f64) -> Option<f64> {
        self.inner().exact_gamma_power(rho, j, x)
    }
    fn exact_gamma_power_offset(&self, rho: f64, j: usize, x: f64, base: f64, u: f64) -> Option<f64> {
        self.inner().exact_gamma_power_offset(rho, j, x, base, u)
    }
    fn gamma_power_bounded_near(&self, rho: f64, a: f64, n: usize) -> Option<bool> {
        self.inner().gamma_power_bounded_near(rho, a, n)
    }
}
