//! Input functions with closed-form classical derivatives, and the catalog of
//! Müntz-type functions used throughout the crate.

mod spec;

use std::sync::Arc;

pub use spec::FunctionSpec;

use crate::error::{FracError, Result};
use crate::special::{falling_factorial, gamma, recip_gamma, CompensatedSum};

/// Closed interval `[lo, hi]`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

/// A real function on an interval whose classical derivatives up to
/// [`max_order`](DifferentiableFunction::max_order) can be evaluated.
///
/// `rho = 0` in the γ-related hooks denotes the Euler operator `x d/dx`.
pub trait DifferentiableFunction: Send + Sync {
    fn domain(&self) -> Interval;

    fn max_order(&self) -> usize;

    /// Raw `f^(order)(x)`; non-finite when the value does not exist.
    fn derivative(&self, x: f64, order: usize) -> f64;

    /// `(γ^j f)(x)` with `γ = x^{1−ρ} d/dx`, when a closed form is known.
    fn exact_gamma_power(&self, _rho: f64, _j: usize, _x: f64) -> Option<f64> {
        None
    }

    /// As `exact_gamma_power`, given also the signed scaled offset `u` of
    /// `x` from `base`, which may be more accurate than `x` itself.
    fn exact_gamma_power_offset(&self, rho: f64, j: usize, x: f64, _base: f64, _u: f64) -> Option<f64> {
        self.exact_gamma_power(rho, j, x)
    }

    /// Whether `γ^n f` stays bounded as `x → a⁺`; `None` when unknown.
    fn gamma_power_bounded_near(&self, _rho: f64, _a: f64, _n: usize) -> Option<bool> {
        None
    }

    fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Checked evaluation of `f^(order)(x)`.
    fn eval(&self, x: f64, order: usize) -> Result<f64> {
        if order > self.max_order() {
            return Err(FracError::Order {
                requested: order,
                available: self.max_order(),
            });
        }
        if !self.domain().contains(x) {
            let d = self.domain();
            return Err(FracError::Domain(format!("x = {x} outside [{}, {}]", d.lo, d.hi)));
        }
        let v = self.derivative(x, order);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FracError::UnsupportedOrder { order, x })
        }
    }
}

impl<T: DifferentiableFunction + ?Sized> DifferentiableFunction for &T {
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn derivative(&self, x: f64, order: usize) -> f64 {
        (**self).derivative(x, order)
    }
    fn exact_gamma_power(&self, rho: f64, j: usize, x: f64) -> Option<f64> {
        (**self).exact_gamma_power(rho, j, x)
    }
    fn exact_gamma_power_offset(&self, rho: f64, j: usize, x: f64, base: f64, u: f64) -> Option<f64> {
        (**self).exact_gamma_power_offset(rho, j, x, base, u)
    }
    fn gamma_power_bounded_near(&self, rho: f64, a: f64, n: usize) -> Option<bool> {
        (**self).gamma_power_bounded_near(rho, a, n)
    }
}

/// `c · x^e`, with the conventions `0^0 = 1` and a zero coefficient
/// annihilating any power of zero.
pub(crate) fn power_term(c: f64, e: f64, x: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if x == 0.0 {
        if e > 0.0 {
            0.0
        } else if e == 0.0 {
            c
        } else {
            c.signum() * f64::INFINITY
        }
    } else {
        c * x.powf(e)
    }
}

/// `(γ^j f_k)(z)` for `f_k(x) = x^{βk}` with `ρ = β`:
/// `β^j Γ(k+1)/Γ(k−j+1) z^{β(k−j)}` for `j ≤ k`, zero otherwise.
pub fn exact_gamma_power_monomial(beta: f64, k: u32, j: u32, z: f64) -> f64 {
    if j > k {
        return 0.0;
    }
    let ratio = falling_factorial(k as f64, j as usize);
    power_term(beta.powi(j as i32) * ratio, beta * (k - j) as f64, z)
}

/// `γ^j x^e = Π_{i<j}(e − iρ) x^{e − jρ}` (ρ = 0 gives `δ^j x^e = e^j x^e`).
fn gamma_power_of_power(e: f64, rho: f64, j: usize, x: f64) -> f64 {
    let c = (0..j).fold(1.0, |acc, i| acc * (e - i as f64 * rho));
    power_term(c, e - j as f64 * rho, x)
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0)
}

/// `Σ_k w_k x^{βk}` with precomputed weights.
#[derive(Debug)]
struct MuntzSeries {
    beta: f64,
    weights: Vec<f64>,
}

const SERIES_REL_TOL: f64 = 1e-17;
const MAX_SERIES_TERMS: usize = 60_000;

impl MuntzSeries {
    fn from_ratio(beta: f64, mut next: impl FnMut(usize, f64) -> f64, first: f64) -> Self {
        let mut weights = Vec::with_capacity(64);
        let mut w = first;
        for k in 0..MAX_SERIES_TERMS {
            weights.push(w);
            // superfactorial decay: stop once the weights are negligible for any sane argument
            if k > 8 && w.abs() < 1e-300 {
                break;
            }
            w = next(k, w);
            if !w.is_finite() {
                break;
            }
        }
        Self { beta, weights }
    }

    fn mittag_leffler(lam: f64, mu: f64, nu: f64, beta: f64) -> Self {
        let mut prefix = 1.0;
        let mut weights = Vec::new();
        for k in 0..MAX_SERIES_TERMS {
            if k > 0 {
                let kf = (k - 1) as f64;
                prefix *= (nu + kf) / (kf + 1.0);
            }
            let w = prefix * recip_gamma(lam * k as f64 + mu);
            weights.push(w);
            if k > 8 && w.abs() < 1e-300 {
                break;
            }
        }
        Self { beta, weights }
    }

    fn pfq(a: &[f64], b: &[f64], beta: f64) -> Self {
        let a = a.to_vec();
        let b = b.to_vec();
        Self::from_ratio(
            beta,
            move |k, w| {
                let kf = k as f64;
                let num: f64 = a.iter().map(|ai| ai + kf).product();
                let den: f64 = b.iter().map(|bj| bj + kf).product();
                w * num / den / (kf + 1.0)
            },
            1.0,
        )
    }

    fn exp() -> Self {
        Self::from_ratio(1.0, |k, w| w / (k as f64 + 1.0), 1.0)
    }

    /// Sums `Σ_k coef(k) x^{βk − shift}` starting at `k0` with a relative
    /// stopping rule; NaN when the weights run out first.
    fn sum(&self, x: f64, shift: f64, k0: usize, coef: impl Fn(usize) -> f64) -> f64 {
        let beta = self.beta;
        if x == 0.0 {
            let mut acc = 0.0;
            for k in k0..self.weights.len() {
                let e = beta * k as f64 - shift;
                if e > 0.0 && k > k0 {
                    break;
                }
                acc += power_term(coef(k), e, 0.0);
            }
            return acc;
        }
        let z = x.powf(beta);
        let scale = x.powf(-shift);
        let mut zk = z.powi(k0 as i32);
        let mut acc = CompensatedSum::new();
        let mut previous = f64::INFINITY;
        // index past which terms are monotone in the tail
        let settle = k0.max(((shift + 1.0) / beta).ceil() as usize + 1);
        for k in k0..self.weights.len() {
            let t = coef(k) * zk * scale;
            acc.add(t);
            let m = t.abs();
            if k >= settle && m <= SERIES_REL_TOL * acc.value().abs() && m <= previous {
                return acc.value();
            }
            if k >= settle && m == 0.0 && previous == 0.0 {
                return acc.value();
            }
            previous = m;
            zk *= z;
        }
        f64::NAN
    }

    fn derivative(&self, x: f64, order: usize) -> f64 {
        let beta = self.beta;
        self.sum(x, order as f64, 0, |k| {
            self.weights[k] * falling_factorial(beta * k as f64, order)
        })
    }

    fn gamma_power(&self, rho: f64, j: usize, x: f64) -> f64 {
        let beta = self.beta;
        if same(rho, beta) && rho > 0.0 {
            // only k ≥ j survive: β^j k!/(k−j)! x^{β(k−j)}
            let bj = beta.powi(j as i32);
            return self.sum(x, beta * j as f64, j, |k| {
                self.weights[k] * bj * falling_factorial(k as f64, j)
            });
        }
        self.sum(x, rho * j as f64, 0, |k| {
            let e = beta * k as f64;
            self.weights[k] * (0..j).fold(1.0, |acc, i| acc * (e - i as f64 * rho))
        })
    }

    fn bounded_near_zero(&self, rho: f64, n: usize) -> bool {
        if rho <= 0.0 {
            return false;
        }
        let last = ((n as f64 * rho) / self.beta).ceil() as usize + 1;
        (0..=last.min(self.weights.len().saturating_sub(1))).all(|k| {
            let e = self.beta * k as f64;
            self.weights[k] == 0.0
                || e >= n as f64 * rho
                || (0..n).any(|i| e - i as f64 * rho == 0.0)
        })
    }
}

#[derive(Debug)]
enum Repr {
    Constant(f64),
    Power { beta: f64, rho: f64, a: f64 },
    Monomial { exponent: f64 },
    ExpPow { beta: f64, series: MuntzSeries },
    Series(MuntzSeries),
    LinComb(Vec<(f64, CatalogFunction)>),
}

/// A catalog entry compiled for evaluation. Cheap to clone.
#[derive(Debug, Clone)]
pub struct CatalogFunction {
    spec: FunctionSpec,
    max_order: usize,
    domain: Interval,
    repr: Arc<Repr>,
}

/// Builds the evaluable function for `spec`, with derivatives up to `max_order`.
pub fn make_function(spec: &FunctionSpec, max_order: usize) -> Result<CatalogFunction> {
    spec.validate()?;
    let (repr, domain) = match spec {
        FunctionSpec::Constant { c } => (Repr::Constant(*c), Interval::new(0.0, f64::INFINITY)),
        FunctionSpec::Power { beta, rho, a } => (
            Repr::Power { beta: *beta, rho: *rho, a: *a },
            Interval::new(*a, f64::INFINITY),
        ),
        FunctionSpec::Monomial { beta, k } => (
            Repr::Monomial { exponent: beta * *k as f64 },
            Interval::new(0.0, f64::INFINITY),
        ),
        FunctionSpec::ExpPow { beta } => {
            let mut series = MuntzSeries::exp();
            series.beta = *beta;
            (Repr::ExpPow { beta: *beta, series }, Interval::new(0.0, f64::INFINITY))
        }
        FunctionSpec::MittagLeffler { lam, mu, nu, beta } => (
            Repr::Series(MuntzSeries::mittag_leffler(*lam, *mu, *nu, *beta)),
            Interval::new(0.0, f64::INFINITY),
        ),
        FunctionSpec::Pfq { a, b, beta } => {
            let hi = if a.len() == b.len() + 1 && !a.iter().any(|v| *v <= 0.0 && v.fract() == 0.0) {
                1.0
            } else {
                f64::INFINITY
            };
            (Repr::Series(MuntzSeries::pfq(a, b, *beta)), Interval::new(0.0, hi))
        }
        FunctionSpec::LinComb(terms) => {
            let parts = terms
                .iter()
                .map(|(c, s)| Ok((*c, make_function(s, max_order)?)))
                .collect::<Result<Vec<_>>>()?;
            let domain = parts
                .iter()
                .fold(Interval::new(0.0, f64::INFINITY), |d, (_, f)| d.intersect(&f.domain));
            (Repr::LinComb(parts), domain)
        }
    };
    Ok(CatalogFunction {
        spec: spec.clone(),
        max_order,
        domain,
        repr: Arc::new(repr),
    })
}

/// Derivatives of `u^β` through the recurrence obtained by differentiating
/// `u f' = β u' f`; `du(k)` returns `u^(k)`.
fn power_derivatives(beta: f64, u: f64, du: impl Fn(usize) -> f64, order: usize) -> f64 {
    let mut f = Vec::with_capacity(order + 1);
    f.push(u.powf(beta));
    for n in 1..=order {
        let mut rhs = 0.0;
        for k in 0..n {
            rhs += beta * binomial(n - 1, k) * du(k + 1) * f[n - 1 - k];
        }
        for k in 1..n {
            rhs -= binomial(n - 1, k) * du(k) * f[n - k];
        }
        f.push(rhs / u);
    }
    f[order]
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl CatalogFunction {
    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    /// Same function restricted to `domain ∩ [lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Self {
        Self {
            domain: self.domain.intersect(&Interval::new(lo, hi)),
            ..self.clone()
        }
    }

    fn power_derivative(beta: f64, rho: f64, a: f64, x: f64, order: usize) -> f64 {
        if x < a {
            return f64::NAN;
        }
        if rho == 1.0 {
            return power_term(falling_factorial(beta, order), beta - order as f64, x - a);
        }
        if rho == 0.0 {
            let u = (x / a).ln();
            if x == a {
                return Self::power_at_base(beta, order, 1.0 / a);
            }
            let du = |k: usize| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * falling_factorial(k as f64 - 1.0, k - 1) * x.powi(-(k as i32))
            };
            return power_derivatives(beta, u, du, order);
        }
        if x == a {
            return Self::power_at_base(beta, order, a.powf(rho - 1.0));
        }
        let u = scaled_difference(x, a, rho);
        let du = |k: usize| falling_factorial(rho - 1.0, k - 1) * x.powf(rho - k as f64);
        power_derivatives(beta, u, du, order)
    }

    /// `f^(order)(a)` for `f = u^β` with `u(a) = 0`, `u'(a) = slope`.
    fn power_at_base(beta: f64, order: usize, slope: f64) -> f64 {
        let ord = order as f64;
        if order == 0 {
            if beta == 0.0 {
                1.0
            } else {
                0.0
            }
        } else if beta > ord {
            0.0
        } else if beta == ord {
            gamma(ord + 1.0).unwrap_or(f64::NAN) * slope.powi(order as i32)
        } else {
            f64::NAN
        }
    }

    fn exppow_derivative(beta: f64, x: f64, order: usize) -> f64 {
        // Faà di Bruno for exp(g), g = x^β: P_n = Σ C(n−1,k) g^(k+1) P_{n−1−k}
        let g = |k: usize| power_term(falling_factorial(beta, k), beta - k as f64, x);
        let mut p = Vec::with_capacity(order + 1);
        p.push(1.0);
        for n in 1..=order {
            let v: f64 = (0..n).map(|k| binomial(n - 1, k) * g(k + 1) * p[n - 1 - k]).sum();
            p.push(v);
        }
        power_term(1.0, beta, x).exp() * p[order]
    }
}

/// `(x^ρ − a^ρ)/ρ`, accurate when `x` is close to `a` or `ρ` is small.
pub(crate) fn scaled_difference(x: f64, a: f64, rho: f64) -> f64 {
    if rho == 0.0 {
        (x / a).ln()
    } else if a > 0.0 {
        a.powf(rho) * (rho * (x / a).ln()).exp_m1() / rho
    } else {
        x.powf(rho) / rho
    }
}

impl DifferentiableFunction for CatalogFunction {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn derivative(&self, x: f64, order: usize) -> f64 {
        if x < 0.0 {
            return f64::NAN;
        }
        match &*self.repr {
            Repr::Constant(c) => {
                if order == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Repr::Power { beta, rho, a } => Self::power_derivative(*beta, *rho, *a, x, order),
            Repr::Monomial { exponent } => {
                power_term(falling_factorial(*exponent, order), exponent - order as f64, x)
            }
            Repr::ExpPow { beta, .. } => Self::exppow_derivative(*beta, x, order),
            Repr::Series(series) => series.derivative(x, order),
            Repr::LinComb(parts) => parts
                .iter()
                .map(|(c, f)| c * f.derivative(x, order))
                .collect::<CompensatedSum>()
                .value(),
        }
    }

    fn exact_gamma_power(&self, rho: f64, j: usize, x: f64) -> Option<f64> {
        if x < 0.0 {
            return None;
        }
        match &*self.repr {
            Repr::Constant(c) => Some(if j == 0 { *c } else { 0.0 }),
            Repr::Power { beta, rho: r, a } => {
                if !same(rho, *r) || x < *a {
                    return None;
                }
                let u = scaled_difference(x, *a, *r);
                Some(power_term(falling_factorial(*beta, j), beta - j as f64, u))
            }
            Repr::Monomial { exponent } => Some(gamma_power_of_power(*exponent, rho, j, x)),
            Repr::ExpPow { beta, series } => {
                if same(rho, *beta) {
                    Some(beta.powi(j as i32) * power_term(1.0, *beta, x).exp())
                } else {
                    Some(series.gamma_power(rho, j, x))
                }
            }
            Repr::Series(series) => Some(series.gamma_power(rho, j, x)),
            Repr::LinComb(parts) => {
                let mut acc = CompensatedSum::new();
                for (c, f) in parts {
                    acc.add(c * f.exact_gamma_power(rho, j, x)?);
                }
                Some(acc.value())
            }
        }
    }

    fn exact_gamma_power_offset(&self, rho: f64, j: usize, x: f64, base: f64, u: f64) -> Option<f64> {
        match &*self.repr {
            Repr::Power { beta, rho: r, a } if same(rho, *r) && base == *a && u >= 0.0 => {
                Some(power_term(falling_factorial(*beta, j), beta - j as f64, u))
            }
            Repr::LinComb(parts) => {
                let mut acc = CompensatedSum::new();
                for (c, f) in parts {
                    acc.add(c * f.exact_gamma_power_offset(rho, j, x, base, u)?);
                }
                Some(acc.value())
            }
            _ => self.exact_gamma_power(rho, j, x),
        }
    }

    fn gamma_power_bounded_near(&self, rho: f64, a: f64, n: usize) -> Option<bool> {
        match &*self.repr {
            Repr::Constant(_) => Some(true),
            Repr::Power { beta, rho: r, a: base } => {
                if a > *base {
                    Some(true)
                } else if a == *base && same(rho, *r) {
                    Some(*beta >= n as f64 || beta.fract() == 0.0)
                } else {
                    None
                }
            }
            _ if a > 0.0 => Some(true),
            Repr::Monomial { exponent } => {
                if rho <= 0.0 {
                    return None;
                }
                let e = *exponent;
                Some(e >= n as f64 * rho || (0..n).any(|i| e - i as f64 * rho == 0.0))
            }
            Repr::ExpPow { series, .. } | Repr::Series(series) => {
                (rho > 0.0).then(|| series.bounded_near_zero(rho, n))
            }
            Repr::LinComb(parts) => {
                let mut all = true;
                for (c, f) in parts {
                    if *c == 0.0 {
                        continue;
                    }
                    match f.gamma_power_bounded_near(rho, a, n) {
                        Some(true) => {}
                        Some(false) => return Some(false),
                        None => all = false,
                    }
                }
                all.then_some(true)
            }
        }
    }
}
