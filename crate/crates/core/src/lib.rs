//! Generalized (Katugampola-type) fractional integrals and derivatives,
//! generalized Taylor expansions and a series solver for sequential
//! fractional differential equations.

pub mod catalog;
pub mod error;
pub mod fde;
pub mod gamma_op;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod special;
pub mod taylor;

pub use catalog::{make_function, CatalogFunction, DifferentiableFunction, FunctionSpec, Interval};
pub use error::{FracError, Result};
pub use fde::{
    closed_form_example1, closed_form_example2, evaluate_solution, residual, solve, LinearSequentialFde,
    SeriesSolution, SeriesValue,
};
pub use gamma_op::{
    caputo_at_base, gamma_power, gamma_power_apply, hadamard_at_base, lambda_table, LambdaTable,
};
pub use operators::{
    caputo_derivative, classical_caputo, frac_integral, hadamard_caputo, riemann_derivative,
    sequential_caputo, OperatorParams, Side,
};
pub use par::Execution;
pub use quadrature::{QuadratureConfig, Scheme};
pub use taylor::{
    expand, expand_hadamard, integral_remainder, lagrange_remainder_bound, mean_value_find_xi,
    MuntzExpansion,
};
