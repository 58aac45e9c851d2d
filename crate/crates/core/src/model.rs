//! Compiled models and dynamic states.
//!
//! A [`MechModel`] is a [`ModelSpec`](crate::expr::ModelSpec) with every name
//! resolved to an input slot, ready for repeated jet evaluation. Models are
//! immutable after construction; parameter overrides produce a new model.

use std::collections::BTreeMap;

use crate::expr::{BinOp, Expr, Func, ModelSpec};
use crate::jet::{self, DomainError, Jet2};

/// A point in extended phase space. `lambda` is only populated for the
/// vakonomic formulation, whose state carries the current multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct DynState {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl DynState {
    pub fn new(t: f64, x: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(x.len(), v.len());
        Self { t, x, v, lambda: Vec::new() }
    }

    pub fn with_lambda(mut self, lambda: Vec<f64>) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Expression with variables bound to input slots.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Const(f64),
    Param(usize),
    Time,
    Coord(usize),
    Vel(usize),
    Neg(Box<Bound>),
    Bin(BinOp, Box<Bound>, Box<Bound>),
    Call(Func, Vec<Bound>),
}

/// Evaluation error carrying the offending sub-expression in source form.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalError {
    pub domain: DomainError,
    pub subexpr: String,
}

impl std::fmt::Display for EvalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (in `{}`)", self.domain, self.subexpr)
    }
}

impl std::error::Error for EvalError {}

/// A compiled mechanical model: `N` coordinates, Lagrangian `L₀`,
/// `M` constraints, `N−M` auxiliary frame functions, and the constant
/// multipliers attached to the auxiliary functions.
#[derive(Debug, Clone)]
pub struct MechModel {
    pub spec: ModelSpec,
    pub coords: Vec<String>,
    param_names: Vec<String>,
    param_values: Vec<f64>,
    pub lagrangian: Bound,
    pub constraints: Vec<Bound>,
    pub aux: Vec<Bound>,
    pub lambda0: Vec<f64>,
}

impl MechModel {
    pub fn compile(spec: &ModelSpec) -> Self {
        let param_names: Vec<String> = spec.params.keys().cloned().collect();
        let param_values: Vec<f64> = param_names.iter().map(|k| spec.params[k]).collect();
        let binder = Binder { coords: &spec.coords, params: &param_names };
        Self {
            spec: spec.clone(),
            coords: spec.coords.clone(),
            lagrangian: binder.bind(&spec.lagrangian),
            constraints: spec.constraints.iter().map(|c| binder.bind(c)).collect(),
            aux: spec.aux.iter().map(|a| binder.bind(a)).collect(),
            lambda0: spec.lambda0.clone(),
            param_names,
            param_values,
        }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// Jet dimension `1 + 2N`.
    pub fn dim(&self) -> usize {
        1 + 2 * self.n()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.param_names
            .iter()
            .position(|p| p == name)
            .map(|i| self.param_values[i])
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        self.param_names
            .iter()
            .cloned()
            .zip(self.param_values.iter().copied())
            .collect()
    }

    /// New model with some parameters overridden. Unknown names are accepted
    /// and appended so that `--set` can introduce setup-only knobs.
    pub fn with_params(&self, overrides: &BTreeMap<String, f64>) -> MechModel {
        let mut spec = self.spec.clone();
        for (k, v) in overrides {
            spec.params.insert(k.clone(), *v);
        }
        MechModel::compile(&spec)
    }

    /// Value-only evaluation (no derivatives).
    pub fn eval_value(&self, e: &Bound, state: &DynState) -> Result<f64, EvalError> {
        debug_assert_eq!(state.n(), self.n());
        eval_value_rec(e, state, &self.param_values)
    }

    /// Value, gradient, and Hessian of `e` at `state`.
    pub fn eval_jet2(&self, e: &Bound, state: &DynState) -> Result<Jet2, EvalError> {
        debug_assert_eq!(state.n(), self.n());
        let n = self.n();
        let dim = self.dim();
        eval_jet_rec(e, state, &self.param_values, n, dim)
    }

    /// Residuals of all constraints at `state`.
    pub fn constraint_residuals(&self, state: &DynState) -> Result<Vec<f64>, EvalError> {
        self.constraints.iter().map(|c| self.eval_value(c, state)).collect()
    }

    /// Compile an extra expression in this model's scope (monitors, ad-hoc
    /// diagnostics).
    pub fn bind_expr(&self, e: &Expr) -> Bound {
        Binder { coords: &self.coords, params: &self.param_names }.bind(e)
    }
}

struct Binder<'a> {
    coords: &'a [String],
    params: &'a [String],
}

impl Binder<'_> {
    fn bind(&self, e: &Expr) -> Bound {
        match e {
            Expr::Const(c) => Bound::Const(*c),
            Expr::Param(p) => {
                let idx = self
                    .params
                    .iter()
                    .position(|q| q == p)
                    .unwrap_or_else(|| panic!("unbound parameter `{}`", p));
                Bound::Param(idx)
            }
            Expr::Var(v) => {
                if v == "t" {
                    Bound::Time
                } else if let Some(k) = self.coords.iter().position(|c| c == v) {
                    Bound::Coord(k)
                } else if let Some(stripped) = v.strip_prefix('d') {
                    let k = self
                        .coords
                        .iter()
                        .position(|c| c == stripped)
                        .unwrap_or_else(|| panic!("unbound variable `{}`", v));
                    Bound::Vel(k)
                } else {
                    panic!("unbound variable `{}`", v)
                }
            }
            Expr::Neg(inner) => Bound::Neg(Box::new(self.bind(inner))),
            Expr::Bin(op, a, b) => Bound::Bin(*op, Box::new(self.bind(a)), Box::new(self.bind(b))),
            Expr::Call(f, args) => Bound::Call(*f, args.iter().map(|a| self.bind(a)).collect()),
        }
    }
}

fn subexpr_text(e: &Bound) -> String {
    // Positions were consumed at parse time; report the shape instead.
    match e {
        Bound::Const(c) => format!("{}", c),
        Bound::Param(i) => format!("param#{}", i),
        Bound::Time => "t".into(),
        Bound::Coord(k) => format!("x{}", k + 1),
        Bound::Vel(k) => format!("dx{}", k + 1),
        Bound::Neg(a) => format!("(-{})", subexpr_text(a)),
        Bound::Bin(op, a, b) => format!(
            "({} {} {})",
            subexpr_text(a),
            match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
            },
            subexpr_text(b)
        ),
        Bound::Call(f, args) => {
            let inner: Vec<String> = args.iter().map(subexpr_text).collect();
            format!("{}({})", f.name(), inner.join(", "))
        }
    }
}

fn eval_value_rec(e: &Bound, state: &DynState, params: &[f64]) -> Result<f64, EvalError> {
    let fail = |op: &'static str, detail: String| EvalError {
        domain: DomainError { op, detail },
        subexpr: subexpr_text(e),
    };
    Ok(match e {
        Bound::Const(c) => *c,
        Bound::Param(i) => params[*i],
        Bound::Time => state.t,
        Bound::Coord(k) => state.x[*k],
        Bound::Vel(k) => state.v[*k],
        Bound::Neg(a) => -eval_value_rec(a, state, params)?,
        Bound::Bin(op, a, b) => {
            let av = eval_value_rec(a, state, params)?;
            let bv = eval_value_rec(b, state, params)?;
            match op {
                BinOp::Add => av + bv,
                BinOp::Sub => av - bv,
                BinOp::Mul => av * bv,
                BinOp::Div => {
                    if bv == 0.0 {
                        return Err(fail("division", "denominator is zero".into()));
                    }
                    av / bv
                }
            }
        }
        Bound::Call(f, args) => {
            let a0 = eval_value_rec(&args[0], state, params)?;
            match f {
                Func::Sin => a0.sin(),
                Func::Cos => a0.cos(),
                Func::Tan => a0.tan(),
                Func::Atan => a0.atan(),
                Func::Exp => a0.exp(),
                Func::Abs => a0.abs(),
                Func::Sqrt => {
                    if a0 < 1e-18 {
                        return Err(fail("sqrt", format!("argument {} below kink guard", a0)));
                    }
                    a0.sqrt()
                }
                Func::Ln => {
                    if a0 <= 0.0 {
                        return Err(fail("ln", format!("argument {} not positive", a0)));
                    }
                    a0.ln()
                }
                Func::Atan2 => {
                    let a1 = eval_value_rec(&args[1], state, params)?;
                    if a0 == 0.0 && a1 == 0.0 {
                        return Err(fail("atan2", "both arguments are zero".into()));
                    }
                    a0.atan2(a1)
                }
                Func::Pow => {
                    let a1 = eval_value_rec(&args[1], state, params)?;
                    if a1.fract() == 0.0 && a1.abs() <= 64.0 {
                        if a0 == 0.0 && a1 < 0.0 {
                            return Err(fail("pow", "zero base with negative exponent".into()));
                        }
                        a0.powi(a1 as i32)
                    } else {
                        if a0 <= 0.0 {
                            return Err(fail(
                                "pow",
                                format!("base {} not positive for exponent {}", a0, a1),
                            ));
                        }
                        a0.powf(a1)
                    }
                }
            }
        }
    })
}

fn eval_jet_rec(
    e: &Bound,
    state: &DynState,
    params: &[f64],
    n: usize,
    dim: usize,
) -> Result<Jet2, EvalError> {
    let wrap = |r: Result<Jet2, DomainError>| {
        r.map_err(|domain| EvalError { domain, subexpr: subexpr_text(e) })
    };
    Ok(match e {
        Bound::Const(c) => Jet2::constant(*c, dim),
        Bound::Param(i) => Jet2::constant(params[*i], dim),
        Bound::Time => Jet2::variable(state.t, jet::slot_t(), dim),
        Bound::Coord(k) => Jet2::variable(state.x[*k], jet::slot_x(*k), dim),
        Bound::Vel(k) => Jet2::variable(state.v[*k], jet::slot_v(*k, n), dim),
        Bound::Neg(a) => eval_jet_rec(a, state, params, n, dim)?.neg(),
        Bound::Bin(op, a, b) => {
            let aj = eval_jet_rec(a, state, params, n, dim)?;
            let bj = eval_jet_rec(b, state, params, n, dim)?;
            match op {
                BinOp::Add => aj.add(&bj),
                BinOp::Sub => aj.sub(&bj),
                BinOp::Mul => aj.mul(&bj),
                BinOp::Div => wrap(aj.div(&bj))?,
            }
        }
        Bound::Call(f, args) => {
            let a0 = eval_jet_rec(&args[0], state, params, n, dim)?;
            match f {
                Func::Sin => a0.sin(),
                Func::Cos => a0.cos(),
                Func::Tan => a0.tan(),
                Func::Atan => a0.atan(),
                Func::Exp => a0.exp(),
                Func::Abs => a0.abs(),
                Func::Sqrt => wrap(a0.sqrt())?,
                Func::Ln => wrap(a0.ln())?,
                Func::Atan2 => {
                    let a1 = eval_jet_rec(&args[1], state, params, n, dim)?;
                    wrap(a0.atan2(&a1))?
                }
                Func::Pow => {
                    let a1 = eval_jet_rec(&args[1], state, params, n, dim)?;
                    wrap(a0.pow(&a1))?
                }
            }
        }
    })
}
