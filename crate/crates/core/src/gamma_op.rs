//! The operator `γ = x^{1−ρ} d/dx`, its powers, and boundary values of
//! Caputo-type derivatives at the base point.

use crate::catalog::{power_term, scaled_difference, DifferentiableFunction};
use crate::error::{FracError, Result};
use crate::special::{gamma, CompensatedSum};

/// Triangular coefficients with `(γ^j f)(x) = Σ_i λ_{i,j} x^{i−jρ} f^(i)(x)`.
///
/// `rho = 0` yields the Euler operator `δ = x d/dx` (Stirling numbers of the
/// second kind).
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    rho: f64,
    m: usize,
    // column j holds λ_{1,j}..λ_{j,j}
    columns: Vec<Vec<f64>>,
}

impl LambdaTable {
    pub fn new(m: usize, rho: f64) -> Result<Self> {
        if m == 0 {
            return Err(FracError::InvalidParameter("lambda table needs m >= 1".into()));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(FracError::InvalidParameter(format!("rho must be >= 0, got {rho}")));
        }
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(), vec![1.0]];
        for j in 2..=m {
            let prev = &columns[j - 1];
            let col = (1..=j)
                .map(|i| {
                    let left = if i >= 2 { prev[i - 2] } else { 0.0 };
                    let here = if i < j { prev[i - 1] } else { 0.0 };
                    left + (i as f64 - (j - 1) as f64 * rho) * here
                })
                .collect();
            columns.push(col);
        }
        Ok(Self { rho, m, columns })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `λ_{i,j}` for `1 ≤ i ≤ j ≤ m`, zero outside the triangle.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == 0 || j == 0 || i > j || j > self.m {
            0.0
        } else {
            self.columns[j][i - 1]
        }
    }
}

/// Builds the λ-table up to order `m` for the given `ρ`.
pub fn lambda_table(m: usize, rho: f64) -> Result<LambdaTable> {
    LambdaTable::new(m, rho)
}

/// `(γ^j f)(x)` from the λ-table and the classical derivatives of `f`.
pub fn gamma_power_apply(
    f: &dyn DifferentiableFunction,
    j: usize,
    x: f64,
    table: &LambdaTable,
) -> Result<f64> {
    if j == 0 {
        return f.eval(x, 0);
    }
    if j > table.m {
        return Err(FracError::Order { requested: j, available: table.m });
    }
    if j > f.max_order() {
        return Err(FracError::Order { requested: j, available: f.max_order() });
    }
    if x < 0.0 {
        return Err(FracError::Domain(format!("gamma power needs x >= 0, got {x}")));
    }
    let rho = table.rho;
    let mut acc = CompensatedSum::new();
    for i in 1..=j {
        let lam = table.get(i, j);
        if lam == 0.0 {
            continue;
        }
        let e = i as f64 - j as f64 * rho;
        if x == 0.0 && e < 0.0 {
            return Err(FracError::Domain(format!(
                "gamma power of order {j} needs x^{e} at x = 0"
            )));
        }
        acc.add(power_term(lam, e, x) * f.eval(x, i)?);
    }
    Ok(acc.value())
}

/// `(γ^j f)(x)`, using the function's closed form when it has one and the
/// λ-table otherwise.
pub fn gamma_power(f: &dyn DifferentiableFunction, rho: f64, j: usize, x: f64) -> Result<f64> {
    gamma_power_inner(f, rho, j, x, None)
}

/// `gamma_power` at a point given both as `x` and as the signed scaled
/// offset `u` from `base`.
pub(crate) fn gamma_power_offset(
    f: &dyn DifferentiableFunction,
    rho: f64,
    j: usize,
    x: f64,
    base: f64,
    u: f64,
) -> Result<f64> {
    gamma_power_inner(f, rho, j, x, Some((base, u)))
}

fn gamma_power_inner(
    f: &dyn DifferentiableFunction,
    rho: f64,
    j: usize,
    x: f64,
    offset: Option<(f64, f64)>,
) -> Result<f64> {
    if j == 0 && offset.is_none() {
        return f.eval(x, 0);
    }
    if j > f.max_order() {
        return Err(FracError::Order { requested: j, available: f.max_order() });
    }
    let d = f.domain();
    if !d.contains(x) {
        return Err(FracError::Domain(format!("x = {x} outside [{}, {}]", d.lo, d.hi)));
    }
    let exact = match offset {
        Some((base, u)) => f.exact_gamma_power_offset(rho, j, x, base, u),
        None => f.exact_gamma_power(rho, j, x),
    };
    if let Some(v) = exact {
        if v.is_finite() {
            return Ok(v);
        }
    }
    if j == 0 {
        return f.eval(x, 0);
    }
    gamma_power_apply(f, j, x, &lambda_table(j, rho)?)
}

/// `x` with `(x^ρ − a^ρ)/ρ = u` (`ρ = 0`: `log(x/a) = u`).
pub(crate) fn point_from_scaled(a: f64, rho: f64, u: f64) -> f64 {
    if rho == 0.0 {
        a * u.exp()
    } else if a > 0.0 {
        let ar = a.powf(rho);
        a * ((rho * u / ar).ln_1p() / rho).exp()
    } else {
        (rho * u).powf(1.0 / rho)
    }
}

fn nearly_integer(v: f64) -> Option<usize> {
    let r = v.round();
    ((v - r).abs() <= 1e-12 * v.abs().max(1.0) && r >= 0.0).then_some(r as usize)
}

/// `⌈order⌉`, with orders within rounding of an integer treated as integral.
pub(crate) fn caputo_n(order: f64) -> usize {
    nearly_integer(order).unwrap_or_else(|| order.ceil() as usize)
}

fn probe_scale(f: &dyn DifferentiableFunction, a: f64, rho: f64) -> f64 {
    let d = f.domain();
    let width = if d.hi.is_finite() { d.hi - a } else { 1.0 };
    scaled_difference(a + 1e-2 * width, a, rho)
}

/// `(γ^n f)(a)`: closed form at `a`, then the λ-table at `a`, then the
/// one-sided limit.
pub fn gamma_power_at_base(f: &dyn DifferentiableFunction, rho: f64, n: usize, a: f64) -> Result<f64> {
    if n > f.max_order() {
        return Err(FracError::Order { requested: n, available: f.max_order() });
    }
    if n == 0 {
        return f.eval(a, 0);
    }
    if let Some(v) = f.exact_gamma_power(rho, n, a) {
        if v.is_finite() {
            return Ok(v);
        }
    }
    if a > 0.0 || rho == 1.0 {
        if let Ok(v) = gamma_power_apply(f, n, a, &lambda_table(n, rho)?) {
            return Ok(v);
        }
    }
    let u0 = probe_scale(f, a, rho);
    one_sided_limit(u0, |u| gamma_power(f, rho, n, point_from_scaled(a, rho, u)))
}

/// Value of the order-`order` Caputo-type derivative at the base point,
/// `lim_{x→a⁺}`, for a general real `order ≥ 0`.
pub fn caputo_value_at_base(
    f: &dyn DifferentiableFunction,
    order: f64,
    rho: f64,
    a: f64,
) -> Result<f64> {
    if !(order >= 0.0) {
        return Err(FracError::InvalidParameter(format!("order must be >= 0, got {order}")));
    }
    if let Some(n) = nearly_integer(order) {
        return gamma_power_at_base(f, rho, n, a);
    }
    let n = order.ceil() as usize;
    if n > f.max_order() {
        return Err(FracError::Order { requested: n, available: f.max_order() });
    }
    if f.gamma_power_bounded_near(rho, a, n) == Some(true) {
        return Ok(0.0);
    }
    let s = n as f64 - order;
    let scale = gamma(1.0 - s)?;
    let u0 = probe_scale(f, a, rho);
    one_sided_limit(u0, |u| {
        let x = point_from_scaled(a, rho, u);
        Ok(scale * u.powf(s) * gamma_power(f, rho, n, x)?)
    })
}

/// `C^{jα} f(a)` with `γ = x^{1−ρ} d/dx`.
pub fn caputo_at_base(
    f: &dyn DifferentiableFunction,
    j: usize,
    alpha: f64,
    rho: f64,
    a: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::InvalidParameter(format!("alpha must be in (0, 1], got {alpha}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(FracError::InvalidParameter(format!("rho must be > 0, got {rho}")));
    }
    caputo_value_at_base(f, j as f64 * alpha, rho, a)
}

/// Hadamard-Caputo analogue of [`caputo_at_base`], built on `δ = x d/dx`.
pub fn hadamard_at_base(f: &dyn DifferentiableFunction, j: usize, alpha: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(FracError::Domain(format!("Hadamard base point must be > 0, got {a}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::InvalidParameter(format!("alpha must be in (0, 1], got {alpha}")));
    }
    caputo_value_at_base(f, j as f64 * alpha, 0.0, a)
}

const LIMIT_LEVELS: usize = 12;
const LIMIT_REL: f64 = 1e-9;
const LIMIT_ABS: f64 = 1e-14;

fn settled(new: f64, old: f64, scale: f64) -> bool {
    let d = (new - old).abs();
    d < LIMIT_REL * new.abs() || d < LIMIT_ABS.max(1e-12 * scale)
}

/// `lim_{u→0⁺} g(u)` from samples at `u_k = u0·2^{−k}`: Richardson
/// extrapolation first, iterated Aitken Δ² for fractional-power tails.
pub(crate) fn one_sided_limit(u0: f64, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut values = Vec::with_capacity(LIMIT_LEVELS + 1);
    let mut u = u0;
    for _ in 0..=LIMIT_LEVELS {
        let v = g(u)?;
        if !v.is_finite() {
            return Err(FracError::LimitDivergence(format!("non-finite sample at u = {u:e}")));
        }
        values.push(v);
        u *= 0.5;
    }
    for k in 3..values.len() {
        if values[k].abs() > 10.0 * values[k - 3].abs() && values[k].abs() > 1e-10 {
            return Err(FracError::LimitDivergence(format!(
                "samples grow from {:e} to {:e}",
                values[k - 3],
                values[k]
            )));
        }
    }

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut row = vec![values[0]];
    for k in 1..values.len() {
        let mut next = vec![values[k]];
        let mut factor = 1.0;
        for m in 1..=k {
            factor *= 2.0;
            let t = next[m - 1] + (next[m - 1] - row[m - 1]) / (factor - 1.0);
            next.push(t);
        }
        if k >= 3 && settled(next[k], row[k - 1], scale) {
            return Ok(next[k]);
        }
        row = next;
    }

    let n = values.len();
    let d1 = (values[n - 1] - values[n - 2]).abs();
    let d2 = (values[n - 2] - values[n - 3]).abs();
    let d3 = (values[n - 3] - values[n - 4]).abs();
    if d1 >= 0.999 * d2 && d2 >= 0.999 * d3 && d1 > 1e-9 * scale {
        return Err(FracError::LimitDivergence(format!(
            "increments do not shrink near the base point (last sample {:e})",
            values[n - 1]
        )));
    }

    let mut level = values;
    let mut last = f64::NAN;
    while level.len() >= 3 {
        let next: Vec<f64> = level
            .windows(3)
            .map(|w| {
                let den = w[2] - 2.0 * w[1] + w[0];
                if den == 0.0 {
                    w[2]
                } else {
                    w[2] - (w[2] - w[1]).powi(2) / den
                }
            })
            .collect();
        let k = next.len();
        if k >= 2 && settled(next[k - 1], next[k - 2], scale) {
            return Ok(next[k - 1]);
        }
        last = next[k - 1];
        level = next;
    }
    Err(FracError::LimitNotConverged { estimate: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_function;
    use approx::assert_relative_eq;

    #[test]
    fn table_small_cases() {
        let t = lambda_table(1, 0.7).unwrap();
        assert_eq!(t.get(1, 1), 1.0);
        let t = lambda_table(2, 1.0).unwrap();
        assert_eq!((t.get(1, 2), t.get(2, 2)), (0.0, 1.0));
        let t = lambda_table(3, 0.5).unwrap();
        assert_eq!(t.get(1, 2), 0.5);
        assert_eq!(t.get(1, 3), 0.0);
        assert_eq!(t.get(2, 3), 1.5);
        assert_eq!(t.get(3, 3), 1.0);
    }

    #[test]
    fn euler_table_is_stirling() {
        // δ^4 = x D + 7 x² D² + 6 x³ D³ + x⁴ D⁴
        let t = lambda_table(4, 0.0).unwrap();
        let col: Vec<f64> = (1..=4).map(|i| t.get(i, 4)).collect();
        assert_eq!(col, vec![1.0, 7.0, 6.0, 1.0]);
    }

    #[test]
    fn unit_rho_columns_are_unit_diagonal() {
        let t = lambda_table(20, 1.0).unwrap();
        for j in 1..=20 {
            for i in 1..=j {
                assert_eq!(t.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn apply_examples() {
        let sq = make_function(&"monomial:beta=1,k=2".parse().unwrap(), 2).unwrap();
        let t = lambda_table(1, 1.0).unwrap();
        assert_eq!(gamma_power_apply(&sq, 1, 3.0, &t).unwrap(), 6.0);

        let e = make_function(&"exppow:beta=2".parse().unwrap(), 2).unwrap();
        let t = lambda_table(2, 2.0).unwrap();
        assert_relative_eq!(
            gamma_power_apply(&e, 2, 1.0, &t).unwrap(),
            4.0 * std::f64::consts::E,
            max_relative = 1e-14
        );

        let m = make_function(&"monomial:beta=0.5,k=4".parse().unwrap(), 2).unwrap();
        let t = lambda_table(2, 0.5).unwrap();
        assert_relative_eq!(gamma_power_apply(&m, 2, 1.0, &t).unwrap(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn apply_errors() {
        let e = make_function(&"exppow:beta=2".parse().unwrap(), 2).unwrap();
        let t = lambda_table(3, 2.0).unwrap();
        assert!(matches!(gamma_power_apply(&e, 3, 1.0, &t), Err(FracError::Order { .. })));
        let t = lambda_table(2, 2.0).unwrap();
        assert!(matches!(gamma_power_apply(&e, 2, 0.0, &t), Err(FracError::Domain(_))));
    }

    #[test]
    fn boundary_values() {
        let c = make_function(&"constant:c=4".parse().unwrap(), 3).unwrap();
        assert_eq!(caputo_at_base(&c, 1, 0.4, 1.3, 0.2).unwrap(), 0.0);

        let e = make_function(&"exppow:beta=1.5".parse().unwrap(), 4).unwrap();
        for j in 0..4 {
            assert_relative_eq!(
                caputo_at_base(&e, j, 1.0, 1.5, 0.0).unwrap(),
                1.5f64.powi(j as i32),
                max_relative = 1e-12
            );
        }

        for (alpha, rho, a) in [(0.5, 2.0, 0.0), (0.3, 0.7, 0.4), (0.8, 1.0, 1.0)] {
            let spec = format!("power:beta={alpha},rho={rho},a={a}");
            let p = make_function(&spec.parse().unwrap(), 1).unwrap();
            assert_relative_eq!(
                caputo_at_base(&p, 1, alpha, rho, a).unwrap(),
                gamma(1.0 + alpha).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn limit_without_closed_form() {
        // γf is unbounded at 0 for ρ = 1, so the limit path runs
        let f = make_function(
            &"1*monomial:beta=0.5,k=1 + 1*ml:lam=1,mu=1.5,nu=1,beta=0.5".parse().unwrap(),
            2,
        )
        .unwrap();
        // only the x^0.5 terms survive: Γ(1.5)·(1 + w_1) with w_1 = 1/Γ(2.5)
        let w1 = crate::special::recip_gamma(2.5);
        let got = caputo_value_at_base(&f, 0.5, 1.0, 0.0).unwrap();
        assert_relative_eq!(got, gamma(1.5).unwrap() * (1.0 + w1), max_relative = 1e-7);
    }

    #[test]
    fn divergence_reported() {
        let p = make_function(&"power:beta=1.5,rho=2,a=0".parse().unwrap(), 2).unwrap();
        assert!(matches!(
            caputo_at_base(&p, 2, 1.0, 2.0, 0.0),
            Err(FracError::LimitDivergence(_))
        ));
        let log_growth = |u: f64| Ok(-u.ln());
        assert!(one_sided_limit(0.01, log_growth).is_err());
    }

    #[test]
    fn limit_of_fractional_tail() {
        let got = one_sided_limit(0.01, |u: f64| Ok(2.0 + 3.0 * u.powf(0.3))).unwrap();
        assert_relative_eq!(got, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn hadamard_base_values() {
        let f = make_function(&"power:beta=1,rho=0,a=1".parse().unwrap(), 2).unwrap();
        assert_relative_eq!(hadamard_at_base(&f, 1, 1.0, 1.0).unwrap(), 1.0, max_relative = 1e-12);
        let f = make_function(&"power:beta=0.6,rho=0,a=1".parse().unwrap(), 2).unwrap();
        assert_relative_eq!(
            hadamard_at_base(&f, 2, 0.3, 1.0).unwrap(),
            gamma(1.6).unwrap(),
            max_relative = 1e-9
        );
        assert!(matches!(hadamard_at_base(&f, 1, 0.5, 0.0), Err(FracError::Domain(_))));
    }
}
