//! `fracx`: command-line access to generalized fractional operators,
//! generalized Taylor expansions and the sequential FDE series solver.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracx_core::fde::{evaluate_solution, residual, solve, LinearSequentialFde};
use fracx_core::operators::riemann_derivative_flagged;
use fracx_core::par::try_map;
use fracx_core::taylor::{expand, integral_remainder, lagrange_remainder_bound};
use fracx_core::{
    caputo_derivative, classical_caputo, frac_integral, hadamard_caputo, make_function, CatalogFunction,
    DifferentiableFunction, Execution, FracError, FunctionSpec, OperatorParams, QuadratureConfig, Scheme, Side,
};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "fracx", version, about = "Generalized fractional calculus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized fractional integral at one or more points.
    Integrate(OperatorArgs),
    /// Fractional derivative (Caputo-type, Riemann-type, classical or Hadamard).
    Derive(DeriveArgs),
    /// Generalized Taylor expansion with remainder columns.
    Expand(ExpandArgs),
    /// Series solution of a linear sequential fractional equation.
    Solve(SolveArgs),
    /// Sweep ρ toward 1 and 0⁺ against the classical and Hadamard references.
    VerifyLimits(LimitArgs),
}

#[derive(Args, Debug)]
struct NumericArgs {
    /// Gauss-Jacobi node count.
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Quadrature scheme: jacobi or adaptive.
    #[arg(long, default_value = "jacobi")]
    scheme: String,
    /// Absolute quadrature tolerance.
    #[arg(long, env = "FRACX_TOL")]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct OperatorArgs {
    /// Function spec, e.g. `exppow:beta=2` or `0.5*exppow:beta=2 + 1*power:beta=1.5,rho=2,a=0`.
    #[arg(long = "f")]
    f: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Left base point.
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value = "left")]
    side: String,
    /// Right base point, required with `--side right`.
    #[arg(long)]
    b: Option<f64>,
    /// Comma-separated evaluation points.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[command(flatten)]
    num: NumericArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Caputo,
    Riemann,
    Classical,
    Hadamard,
}

#[derive(Args, Debug)]
struct DeriveArgs {
    #[arg(long, value_enum, default_value_t = Kind::Caputo)]
    kind: Kind,
    #[command(flatten)]
    op: OperatorArgs,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    #[arg(long = "f")]
    f: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Expansion order.
    #[arg(long)]
    m: usize,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Grid size for the Lagrange bound.
    #[arg(long, default_value_t = 50)]
    grid: usize,
    #[command(flatten)]
    num: NumericArgs,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Equation coefficients a0,...,aK.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
    /// Initial data v0,...,v{K-1}.
    #[arg(long, allow_hyphen_values = true)]
    ic: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Truncation index.
    #[arg(long = "N", default_value_t = 80)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[command(flatten)]
    num: NumericArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Reference {
    Classical,
    Hadamard,
    Both,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long = "f")]
    f: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    #[arg(long)]
    x: f64,
    #[arg(long, value_enum, default_value_t = Reference::Both)]
    reference: Reference,
    /// ρ values compared with the classical Caputo derivative.
    #[arg(long, default_value = "1.1,1.01,1.001,0.9,0.99,0.999")]
    rho_near_one: String,
    /// ρ values compared with the Hadamard-Caputo derivative.
    #[arg(long, default_value = "0.1,0.01,0.001")]
    rho_near_zero: String,
    #[command(flatten)]
    num: NumericArgs,
}

#[derive(Serialize)]
struct OutputRecord {
    command: String,
    params: BTreeMap<String, Value>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<Value>,
    diagnostics: BTreeMap<String, Value>,
}

impl OutputRecord {
    fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            params: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            result: None,
            diagnostics: BTreeMap::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    fn diag(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    fn quadrature(&mut self, q: &QuadratureConfig) {
        self.diag("abs_tol", q.abs_tol);
        self.diag("nodes", q.nodes);
        self.diag("scheme", q.scheme.to_string());
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("record serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|v| csv_number(*v)).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn csv_number(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite number serializes")
    } else {
        v.to_string()
    }
}

fn parse_list(name: &str, text: &str) -> Result<Vec<f64>, FracError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(FracError::Parse(format!("--{name}: expected comma-separated numbers, got {text:?}"))),
    }
}

fn quadrature(num: &NumericArgs) -> Result<QuadratureConfig, FracError> {
    let scheme: Scheme = num.scheme.parse()?;
    let d = QuadratureConfig::default();
    QuadratureConfig::new(scheme, num.nodes, num.tol.unwrap_or(d.abs_tol), d.split_depth)
}

fn function(text: &str, order: usize) -> Result<CatalogFunction, FracError> {
    let spec: FunctionSpec = text.parse()?;
    make_function(&spec, order)
}

fn order_for(alpha: f64) -> usize {
    if alpha.is_finite() && alpha > 0.0 {
        alpha.ceil() as usize + 1
    } else {
        1
    }
}

fn operator_params(op: &OperatorArgs) -> Result<OperatorParams, FracError> {
    let side: Side = op.side.parse()?;
    let p = match side {
        Side::Left => OperatorParams::left(op.alpha, op.rho, op.a),
        Side::Right => {
            let b = op
                .b
                .ok_or_else(|| FracError::InvalidParameter("--side right needs --b".into()))?;
            OperatorParams::right(op.alpha, op.rho, b)
        }
    };
    p.validate()?;
    Ok(p)
}

fn echo_operator(rec: &mut OutputRecord, op: &OperatorArgs, xs: &[f64]) {
    rec.param("f", op.f.as_str());
    rec.param("alpha", op.alpha);
    rec.param("rho", op.rho);
    rec.param("a", op.a);
    rec.param("side", op.side.as_str());
    if let Some(b) = op.b {
        rec.param("b", b);
    }
    rec.param("x", xs.to_vec());
}

fn points(xs: &[f64], values: Vec<f64>) -> Vec<Vec<f64>> {
    xs.iter().zip(values).map(|(x, v)| vec![*x, v]).collect()
}

fn finite(value: f64, what: &str) -> Result<f64, FracError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FracError::NonFinite(what.to_string()))
    }
}

fn cmd_integrate(op: &OperatorArgs) -> Result<OutputRecord, FracError> {
    let q = quadrature(&op.num)?;
    let xs = parse_list("x", &op.x)?;
    let f = function(&op.f, 1)?;
    let p = operator_params(op)?;
    let values = try_map(Execution::default(), &xs, |x| {
        finite(frac_integral(&f, &p, *x, &q)?, &format!("integral at x = {x}"))
    })?;
    let mut rec = OutputRecord::new("integrate", &["x", "value"]);
    echo_operator(&mut rec, op, &xs);
    rec.rows = points(&xs, values);
    rec.quadrature(&q);
    Ok(rec)
}

fn cmd_derive(args: &DeriveArgs) -> Result<OutputRecord, FracError> {
    let op = &args.op;
    let q = quadrature(&op.num)?;
    let xs = parse_list("x", &op.x)?;
    let f = function(&op.f, order_for(op.alpha))?;
    let p = operator_params(op)?;
    if matches!(args.kind, Kind::Classical | Kind::Hadamard) && p.side != Side::Left {
        return Err(FracError::InvalidParameter("classical and hadamard kinds are left-sided".into()));
    }
    if args.kind == Kind::Hadamard && !(op.a > 0.0) {
        return Err(FracError::Domain(format!("Hadamard operators need a > 0, got {}", op.a)));
    }
    let results = try_map(Execution::default(), &xs, |x| {
        let (v, warn) = match args.kind {
            Kind::Caputo => (caputo_derivative(&f, &p, *x, &q)?, false),
            Kind::Riemann => {
                let r = riemann_derivative_flagged(&f, &p, *x, &q)?;
                (r.value, r.singular_warning)
            }
            Kind::Classical => (classical_caputo(&f, op.alpha, op.a, *x, &q)?, false),
            Kind::Hadamard => (hadamard_caputo(&f, op.alpha, op.a, *x, &q)?, false),
        };
        Ok((finite(v, &format!("derivative at x = {x}"))?, warn))
    })?;
    let mut rec = OutputRecord::new("derive", &["x", "value"]);
    echo_operator(&mut rec, op, &xs);
    rec.param("kind", format!("{:?}", args.kind).to_lowercase());
    let warned: Vec<f64> = xs.iter().zip(&results).filter(|(_, r)| r.1).map(|(x, _)| *x).collect();
    rec.rows = points(&xs, results.into_iter().map(|r| r.0).collect());
    rec.quadrature(&q);
    if !warned.is_empty() {
        rec.diag("singular_warning_at", warned);
    }
    Ok(rec)
}

fn cmd_expand(args: &ExpandArgs) -> Result<OutputRecord, FracError> {
    let q = quadrature(&args.num)?;
    let xs = parse_list("x", &args.x)?;
    let f = function(&args.f, order_for((args.m + 1) as f64 * args.alpha))?;
    let e = expand(&f, args.alpha, args.rho, args.a, args.m)?;
    let rows = try_map(Execution::default(), &xs, |x| {
        let taylor = e.evaluate(*x);
        let remainder = integral_remainder(&f, args.alpha, args.rho, args.a, args.m, *x, &q)?;
        let bound = lagrange_remainder_bound(&f, &e, *x, args.grid, &q)?;
        let error = f.eval(*x, 0)? - taylor;
        Ok(vec![*x, taylor, remainder, bound, error])
    })?;
    let mut rec = OutputRecord::new(
        "expand",
        &["x", "taylor", "integral_remainder", "lagrange_bound", "error"],
    );
    rec.param("f", args.f.as_str());
    rec.param("alpha", args.alpha);
    rec.param("rho", args.rho);
    rec.param("a", args.a);
    rec.param("m", args.m);
    rec.param("grid", args.grid);
    rec.param("x", xs.clone());
    rec.rows = rows;
    rec.result = Some(json!({
        "expansion": serde_json::to_value(&e).expect("expansion serializes"),
        "abstract_coefficients": e.abstract_coefficients(),
    }));
    rec.quadrature(&q);
    Ok(rec)
}

fn cmd_solve(args: &SolveArgs) -> Result<OutputRecord, FracError> {
    let q = quadrature(&args.num)?;
    let coeffs = parse_list("coeffs", &args.coeffs)?;
    let ic = parse_list("ic", &args.ic)?;
    let xs = parse_list("x", &args.x)?;
    let fde = LinearSequentialFde::new(coeffs.clone(), args.alpha, args.rho, args.a, ic.clone())?;
    let s = solve(&fde, args.n)?;
    let res = residual(&s, &fde, &xs)?;
    let mut rec = OutputRecord::new("solve", &["x", "value", "tail"]);
    for x in &xs {
        let v = evaluate_solution(&s, *x);
        rec.rows.push(vec![*x, finite(v.value, &format!("solution at x = {x}"))?, v.tail]);
    }
    rec.param("coeffs", coeffs);
    rec.param("ic", ic);
    rec.param("alpha", args.alpha);
    rec.param("rho", args.rho);
    rec.param("a", args.a);
    rec.param("N", args.n);
    rec.param("x", xs);
    rec.result = Some(serde_json::to_value(&s).expect("solution serializes"));
    rec.diag("residual", res);
    rec.quadrature(&q);
    Ok(rec)
}

fn cmd_verify_limits(args: &LimitArgs) -> Result<OutputRecord, FracError> {
    let q = quadrature(&args.num)?;
    let wants_hadamard = args.reference != Reference::Classical;
    let wants_classical = args.reference != Reference::Hadamard;
    if wants_hadamard && !(args.a > 0.0) {
        return Err(FracError::Domain(format!("Hadamard reference needs a > 0, got {}", args.a)));
    }
    let near_one = parse_list("rho-near-one", &args.rho_near_one)?;
    let near_zero = parse_list("rho-near-zero", &args.rho_near_zero)?;
    let f = function(&args.f, order_for(args.alpha))?;
    let classical = if wants_classical {
        classical_caputo(&f, args.alpha, args.a, args.x, &q)?
    } else {
        f64::NAN
    };
    let hadamard = if wants_hadamard {
        hadamard_caputo(&f, args.alpha, args.a, args.x, &q)?
    } else {
        f64::NAN
    };
    let mut rhos = Vec::new();
    if wants_classical {
        rhos.extend(near_one.iter().copied());
    }
    if wants_hadamard {
        rhos.extend(near_zero.iter().copied());
    }
    let values = try_map(Execution::default(), &rhos, |rho| {
        caputo_derivative(&f, &OperatorParams::left(args.alpha, *rho, args.a), args.x, &q)
    })?;
    let mut rec = OutputRecord::new("verify-limits", &["rho", "value", "classical_error", "hadamard_error"]);
    for (rho, v) in rhos.iter().zip(values) {
        rec.rows.push(vec![*rho, v, (v - classical).abs(), (v - hadamard).abs()]);
    }
    rec.param("f", args.f.as_str());
    rec.param("alpha", args.alpha);
    rec.param("a", args.a);
    rec.param("x", args.x);
    rec.param("reference", format!("{:?}", args.reference).to_lowercase());
    rec.result = Some(json!({ "classical": finite_or_null(classical), "hadamard": finite_or_null(hadamard) }));
    rec.diag("classical_monotone", monotone(&rec.rows, &near_one, 2, wants_classical));
    rec.diag("hadamard_monotone", monotone(&rec.rows, &near_zero, 3, wants_hadamard));
    rec.quadrature(&q);
    Ok(rec)
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Whether the error column decreases as ρ approaches its limit, checked
/// separately for each run of ρ values on one side of the limit.
fn monotone(rows: &[Vec<f64>], rhos: &[f64], column: usize, active: bool) -> Value {
    if !active {
        return Value::Null;
    }
    let errs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| rhos.contains(&r[0]))
        .map(|r| (r[0], r[column]))
        .collect();
    let ok = errs.windows(2).all(|w| {
        let same_run = (w[0].0 > 1.0) == (w[1].0 > 1.0);
        !same_run || w[1].1 <= w[0].1
    });
    Value::Bool(ok)
}

fn fail(code: u8, kind: &str, msg: &str) -> ExitCode {
    let msg = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("fracx: error: code={code} kind={kind} msg={msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let body = text.split("\n\nUsage:").next().unwrap_or("invalid arguments");
            return fail(2, "usage", body.trim_start_matches("error: "));
        }
    };
    let (result, format) = match &cli.command {
        Command::Integrate(a) => (cmd_integrate(a), a.num.format),
        Command::Derive(a) => (cmd_derive(a), a.op.num.format),
        Command::Expand(a) => (cmd_expand(a), a.num.format),
        Command::Solve(a) => (cmd_solve(a), a.num.format),
        Command::VerifyLimits(a) => (cmd_verify_limits(a), a.num.format),
    };
    match result {
        Ok(rec) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(rec.render(format).as_bytes()).is_err() {
                return fail(3, "io", "could not write to standard output");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = if e.is_usage() { 2 } else { 3 };
            fail(code, e.kind(), &e.to_string())
        }
    }
}
