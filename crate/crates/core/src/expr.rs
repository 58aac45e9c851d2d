//! Expression language for model definitions.
//!
//! Lagrangians, constraints, and auxiliary frame functions are all scalar
//! expressions in `t`, the declared coordinates, and their velocities
//! (`d<coord>`). The grammar is deliberately small: `+ - * / ^`, unary minus,
//! parentheses, and a closed set of functions. No implicit multiplication.
//!
//! Precedence, tightest first: unary minus, `^` (right-associative),
//! `* /`, `+ -`. Exponents that are literal integers ≤ 4 are expanded to
//! repeated multiplication so that automatic differentiation never routes a
//! plain square through `exp(b·ln a)`.

use std::collections::BTreeMap;
use std::fmt;

/// Function identifiers accepted by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Atan2,
    Sqrt,
    Exp,
    Ln,
    Abs,
    Pow,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Atan2 => "atan2",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 | Func::Pow => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            "atan2" => Func::Atan2,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Parsed expression tree.
///
/// Variable references name only `t`, a declared coordinate, or `d<coord>`;
/// the parser enforces this, so a well-typed `Expr` never carries an unbound
/// name. Trees are immutable and freely shareable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Param(String),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Collect free variable and parameter names into `vars` / `params`.
    pub fn collect_names(&self, vars: &mut Vec<String>, params: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Param(p) => {
                if !params.contains(p) {
                    params.push(p.clone());
                }
            }
            Expr::Var(v) => {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            }
            Expr::Neg(e) => e.collect_names(vars, params),
            Expr::Bin(_, a, b) => {
                a.collect_names(vars, params);
                b.collect_names(vars, params);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_names(vars, params);
                }
            }
        }
    }

    /// Does the expression mention variable `name`?
    pub fn mentions_var(&self, name: &str) -> bool {
        match self {
            Expr::Var(v) => v == name,
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Neg(e) => e.mentions_var(name),
            Expr::Bin(_, a, b) => a.mentions_var(name) || b.mentions_var(name),
            Expr::Call(_, args) => args.iter().any(|a| a.mentions_var(name)),
        }
    }

    /// Replace every occurrence of variable `name` by `replacement`.
    pub fn substitute_var(&self, name: &str, replacement: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == name => replacement.clone(),
            Expr::Var(_) | Expr::Const(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute_var(name, replacement))),
            Expr::Bin(op, a, b) => Expr::Bin(
                *op,
                Box::new(a.substitute_var(name, replacement)),
                Box::new(b.substitute_var(name, replacement)),
            ),
            Expr::Call(f, args) => Expr::Call(
                *f,
                args.iter().map(|a| a.substitute_var(name, replacement)).collect(),
            ),
        }
    }
}

/// Parenthesized canonical text; `parse(pretty_print(e))` is structurally
/// identical to `e`.
pub fn pretty_print(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Const(c) => {
            out.push_str(&format!("{}", c));
        }
        Expr::Param(p) => out.push_str(p),
        Expr::Var(v) => out.push_str(v),
        Expr::Neg(inner) => {
            out.push_str("(-");
            write_expr(inner, out);
            out.push(')');
        }
        Expr::Bin(op, a, b) => {
            out.push('(');
            write_expr(a, out);
            out.push_str(&format!(" {} ", op.symbol()));
            write_expr(b, out);
            out.push(')');
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(a, out);
            }
            out.push(')');
        }
    }
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Parse error with a byte offset into the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnknownIdentifier(String),
    Syntax { expected: String },
    Arity { name: String, expected: usize, got: usize },
    BadNumber(String),
}

impl ParseError {
    fn syntax(pos: usize, expected: &str) -> Self {
        Self { pos, kind: ParseErrorKind::Syntax { expected: expected.to_string() } }
    }

    /// Shift the reported position by `delta` bytes (used when an expression
    /// is embedded in a larger file).
    pub fn offset(mut self, delta: usize) -> Self {
        self.pos += delta;
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{}` at byte {}", name, self.pos)
            }
            ParseErrorKind::Syntax { expected } => {
                write!(f, "syntax error at byte {}: expected {}", self.pos, expected)
            }
            ParseErrorKind::Arity { name, expected, got } => {
                write!(
                    f,
                    "wrong arity for `{}` at byte {}: expected {} argument(s), got {}",
                    name, self.pos, expected, got
                )
            }
            ParseErrorKind::BadNumber(s) => {
                write!(f, "malformed number `{}` at byte {}", s, self.pos)
            }
        }
    }
}

impl std::error::Error for ParseError {}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
            }
            '+' => {
                toks.push(SpannedTok { tok: Tok::Plus, pos });
                i += 1;
            }
            '-' => {
                toks.push(SpannedTok { tok: Tok::Minus, pos });
                i += 1;
            }
            '*' => {
                toks.push(SpannedTok { tok: Tok::Star, pos });
                i += 1;
            }
            '/' => {
                toks.push(SpannedTok { tok: Tok::Slash, pos });
                i += 1;
            }
            '^' => {
                toks.push(SpannedTok { tok: Tok::Caret, pos });
                i += 1;
            }
            '(' => {
                toks.push(SpannedTok { tok: Tok::LParen, pos });
                i += 1;
            }
            ')' => {
                toks.push(SpannedTok { tok: Tok::RParen, pos });
                i += 1;
            }
            ',' => {
                toks.push(SpannedTok { tok: Tok::Comma, pos });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mark = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        // `1e` followed by nothing numeric: not an exponent
                        i = mark;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    pos: start,
                    kind: ParseErrorKind::BadNumber(text.to_string()),
                })?;
                toks.push(SpannedTok { tok: Tok::Num(value), pos: start });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push(SpannedTok {
                    tok: Tok::Ident(src[start..i].to_string()),
                    pos: start,
                });
            }
            _ => {
                return Err(ParseError::syntax(pos, "a token"));
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: Vec<SpannedTok>,
    idx: usize,
    src_len: usize,
    vars: &'a [String],
    params: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|s| s.pos).unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|s| s.tok.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.idx += 1;
            Ok(())
        } else {
            Err(ParseError::syntax(self.pos(), what))
        }
    }

    fn parse_add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_mul()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    let rhs = self.parse_mul()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    let rhs = self.parse_mul()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_pow()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    let rhs = self.parse_pow()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    let rhs = self.parse_pow()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // `^` is right-associative; unary minus binds tighter than `^`.
    fn parse_pow(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_unary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exponent = self.parse_pow()?;
            Ok(expand_pow(base, exponent))
        } else {
            Ok(base)
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            let inner = self.parse_unary()?;
            Ok(Expr::Neg(Box::new(inner)))
        } else {
            self.parse_atom()
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let inner = self.parse_add()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        pos,
                        kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                    })?;
                    self.idx += 1; // consume `(`
                    let mut args = vec![self.parse_add()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.idx += 1;
                        args.push(self.parse_add()?);
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            pos,
                            kind: ParseErrorKind::Arity {
                                name: name.clone(),
                                expected: func.arity(),
                                got: args.len(),
                            },
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else if self.vars.iter().any(|v| v == &name) {
                    Ok(Expr::Var(name))
                } else if self.params.iter().any(|p| p == &name) {
                    Ok(Expr::Param(name))
                } else {
                    Err(ParseError { pos, kind: ParseErrorKind::UnknownIdentifier(name) })
                }
            }
            _ => Err(ParseError::syntax(pos, "a number, identifier, or `(`")),
        }
    }
}

/// Literal integer exponents in 0..=4 become repeated multiplication;
/// everything else becomes a `pow` call.
fn expand_pow(base: Expr, exponent: Expr) -> Expr {
    if let Expr::Const(c) = exponent {
        if c.fract() == 0.0 && (0.0..=4.0).contains(&c) {
            let k = c as u32;
            return match k {
                0 => Expr::Const(1.0),
                1 => base,
                _ => {
                    let mut acc = base.clone();
                    for _ in 1..k {
                        acc = Expr::Bin(BinOp::Mul, Box::new(acc), Box::new(base.clone()));
                    }
                    acc
                }
            };
        }
    }
    Expr::Call(Func::Pow, vec![base, exponent])
}

/// Parse `src` with the given variable names in scope (no parameters).
pub fn parse_expression(src: &str, declared_vars: &[String]) -> Result<Expr, ParseError> {
    parse_expression_with_params(src, declared_vars, &[])
}

/// Parse `src` with both variables and parameters in scope.
pub fn parse_expression_with_params(
    src: &str,
    declared_vars: &[String],
    params: &[String],
) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        idx: 0,
        src_len: src.len(),
        vars: declared_vars,
        params,
    };
    let e = p.parse_add()?;
    if p.idx != p.toks.len() {
        return Err(ParseError::syntax(p.pos(), "end of expression"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

/// A validated model definition: N coordinates, Lagrangian, M constraints,
/// N−M auxiliary frame functions, and the constant multipliers attached to
/// the auxiliary functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub coords: Vec<String>,
    pub params: BTreeMap<String, f64>,
    pub lagrangian: Expr,
    pub constraints: Vec<Expr>,
    pub aux: Vec<Expr>,
    pub lambda0: Vec<f64>,
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// Variable names in scope: `t`, coords, velocities.
    pub fn var_names(&self) -> Vec<String> {
        var_names(&self.coords)
    }
}

pub(crate) fn var_names(coords: &[String]) -> Vec<String> {
    let mut vars = Vec::with_capacity(1 + 2 * coords.len());
    vars.push("t".to_string());
    for c in coords {
        vars.push(c.clone());
    }
    for c in coords {
        vars.push(format!("d{}", c));
    }
    vars
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Parse(ParseError),
    DuplicateCoordinate { name: String, line: usize },
    ReservedName { name: String, line: usize },
    MissingSection { section: String },
    DuplicateSection { section: String, line: usize },
    ArityMismatch { expected: usize, got: usize, what: String },
    BadDirective { line: usize, detail: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Parse(e) => write!(f, "{}", e),
            ModelError::DuplicateCoordinate { name, line } => {
                write!(f, "line {}: duplicate coordinate `{}`", line, name)
            }
            ModelError::ReservedName { name, line } => {
                write!(f, "line {}: `{}` collides with a reserved or derived name", line, name)
            }
            ModelError::MissingSection { section } => {
                write!(f, "missing `{}` section", section)
            }
            ModelError::DuplicateSection { section, line } => {
                write!(f, "line {}: `{}` given twice", line, section)
            }
            ModelError::ArityMismatch { expected, got, what } => {
                write!(f, "{}: expected {}, got {}", what, expected, got)
            }
            ModelError::BadDirective { line, detail } => {
                write!(f, "line {}: {}", line, detail)
            }
        }
    }
}

impl std::error::Error for ModelError {}

impl From<ParseError> for ModelError {
    fn from(e: ParseError) -> Self {
        ModelError::Parse(e)
    }
}

/// Parse the line-oriented model grammar:
///
/// ```text
/// model "<name>"
/// coords <name> <name> ...
/// param <name> = <number>           (repeatable)
/// lagrangian <expr>
/// constraint <expr>                 (repeatable, M lines)
/// aux <expr>                        (repeatable, N−M lines)
/// lambda0 <number> <number> ...     (optional; defaults to all zeros)
/// ```
///
/// `#` starts a comment. The state-dependent rank condition on the
/// constraints is not checked here; see `lagrange::check_constraint_rank`.
pub fn parse_model_file(text: &str) -> Result<ModelSpec, ModelError> {
    let mut name: Option<String> = None;
    let mut coords: Vec<String> = Vec::new();
    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    let mut param_order: Vec<String> = Vec::new();
    let mut lagrangian_src: Option<(String, usize)> = None;
    let mut constraint_srcs: Vec<(String, usize)> = Vec::new();
    let mut aux_srcs: Vec<(String, usize)> = Vec::new();
    let mut lambda0: Option<Vec<f64>> = None;

    let mut offset = 0usize;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line_start = offset;
        offset += raw_line.len() + 1;
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let (directive, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((d, r)) => (d, r.trim()),
            None => (trimmed, ""),
        };
        let rest_offset = line_start + (rest.as_ptr() as usize - raw_line.as_ptr() as usize);
        match directive {
            "model" => {
                if name.is_some() {
                    return Err(ModelError::DuplicateSection {
                        section: "model".into(),
                        line: lineno,
                    });
                }
                let stripped = rest
                    .strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .ok_or_else(|| ModelError::BadDirective {
                        line: lineno,
                        detail: "model name must be quoted".into(),
                    })?;
                name = Some(stripped.to_string());
            }
            "coords" => {
                if !coords.is_empty() {
                    return Err(ModelError::DuplicateSection {
                        section: "coords".into(),
                        line: lineno,
                    });
                }
                for c in rest.split_whitespace() {
                    if c == "t" || c.starts_with('d') && coords.iter().any(|k| format!("d{}", k) == c) {
                        return Err(ModelError::ReservedName { name: c.into(), line: lineno });
                    }
                    if coords.iter().any(|k| k == c) {
                        return Err(ModelError::DuplicateCoordinate {
                            name: c.into(),
                            line: lineno,
                        });
                    }
                    if !is_identifier(c) {
                        return Err(ModelError::BadDirective {
                            line: lineno,
                            detail: format!("`{}` is not a valid coordinate name", c),
                        });
                    }
                    coords.push(c.to_string());
                }
                // A coordinate may not shadow another's velocity name.
                for c in &coords {
                    if coords.iter().any(|k| format!("d{}", k) == *c) {
                        return Err(ModelError::ReservedName { name: c.clone(), line: lineno });
                    }
                }
                if coords.is_empty() {
                    return Err(ModelError::BadDirective {
                        line: lineno,
                        detail: "coords needs at least one name".into(),
                    });
                }
            }
            "param" => {
                let (pname, value) = rest.split_once('=').ok_or_else(|| {
                    ModelError::BadDirective {
                        line: lineno,
                        detail: "param needs `name = value`".into(),
                    }
                })?;
                let pname = pname.trim();
                if !is_identifier(pname) {
                    return Err(ModelError::BadDirective {
                        line: lineno,
                        detail: format!("`{}` is not a valid parameter name", pname),
                    });
                }
                let v: f64 = value.trim().parse().map_err(|_| ModelError::BadDirective {
                    line: lineno,
                    detail: format!("`{}` is not a number", value.trim()),
                })?;
                if !param_order.contains(&pname.to_string()) {
                    param_order.push(pname.to_string());
                }
                params.insert(pname.to_string(), v);
            }
            "lagrangian" => {
                if lagrangian_src.is_some() {
                    return Err(ModelError::DuplicateSection {
                        section: "lagrangian".into(),
                        line: lineno,
                    });
                }
                lagrangian_src = Some((rest.to_string(), rest_offset));
            }
            "constraint" => constraint_srcs.push((rest.to_string(), rest_offset)),
            "aux" => aux_srcs.push((rest.to_string(), rest_offset)),
            "lambda0" => {
                let mut vals = Vec::new();
                for tok in rest.split_whitespace() {
                    vals.push(tok.parse().map_err(|_| ModelError::BadDirective {
                        line: lineno,
                        detail: format!("`{}` is not a number", tok),
                    })?);
                }
                lambda0 = Some(vals);
            }
            other => {
                return Err(ModelError::BadDirective {
                    line: lineno,
                    detail: format!("unknown directive `{}`", other),
                });
            }
        }
    }

    if coords.is_empty() {
        return Err(ModelError::MissingSection { section: "coords".into() });
    }
    let (lag_src, lag_off) =
        lagrangian_src.ok_or(ModelError::MissingSection { section: "lagrangian".into() })?;

    // Parameters may not shadow variables.
    let vars = var_names(&coords);
    for p in &param_order {
        if vars.iter().any(|v| v == p) {
            return Err(ModelError::ReservedName { name: p.clone(), line: 0 });
        }
    }

    let n = coords.len();
    let m = constraint_srcs.len();
    if m >= n {
        return Err(ModelError::ArityMismatch {
            expected: n.saturating_sub(1),
            got: m,
            what: "constraint count must satisfy M < N".into(),
        });
    }
    if aux_srcs.len() != n - m {
        return Err(ModelError::ArityMismatch {
            expected: n - m,
            got: aux_srcs.len(),
            what: "aux function count must equal N - M".into(),
        });
    }

    let parse_one = |(src, off): &(String, usize)| -> Result<Expr, ModelError> {
        parse_expression_with_params(src, &vars, &param_order)
            .map_err(|e| ModelError::Parse(e.offset(*off)))
    };

    let lagrangian = parse_one(&(lag_src, lag_off))?;
    let constraints: Vec<Expr> =
        constraint_srcs.iter().map(parse_one).collect::<Result<_, _>>()?;
    let aux: Vec<Expr> = aux_srcs.iter().map(parse_one).collect::<Result<_, _>>()?;

    let lambda0 = match lambda0 {
        Some(vals) => {
            if vals.len() != n - m {
                return Err(ModelError::ArityMismatch {
                    expected: n - m,
                    got: vals.len(),
                    what: "lambda0 count must equal N - M".into(),
                });
            }
            vals
        }
        None => vec![0.0; n - m],
    };

    Ok(ModelSpec {
        name: name.unwrap_or_else(|| "unnamed".to_string()),
        coords,
        params,
        lagrangian,
        constraints,
        aux,
        lambda0,
    })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Emit a model spec back into the file grammar. `parse_model_file` of the
/// output reproduces the same `ModelSpec` (floats are written round-trip exactly).
pub fn emit_model_file(spec: &ModelSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("model \"{}\"\n", spec.name));
    out.push_str(&format!("coords {}\n", spec.coords.join(" ")));
    for (k, v) in &spec.params {
        out.push_str(&format!("param {} = {}\n", k, fmt_f64(*v)));
    }
    out.push_str(&format!("lagrangian {}\n", pretty_print(&spec.lagrangian)));
    for c in &spec.constraints {
        out.push_str(&format!("constraint {}\n", pretty_print(c)));
    }
    for a in &spec.aux {
        out.push_str(&format!("aux {}\n", pretty_print(a)));
    }
    if spec.lambda0.iter().any(|&v| v != 0.0) {
        let vals: Vec<String> = spec.lambda0.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&format!("lambda0 {}\n", vals.join(" ")));
    }
    out
}

fn fmt_f64(v: f64) -> String {
    format!("{}", v)
}

// ---------------------------------------------------------------------------
// Random expression generator (used by the parser and autodiff check suites)
// ---------------------------------------------------------------------------

/// Generate a random parser-shaped AST of depth ≤ `depth`.
///
/// Constants are non-negative (the parser never produces negative literals;
/// negation shows up as an explicit unary node), so pretty-print → parse is
/// the identity on the output of this generator.
pub fn random_expr(
    rng: &mut crate::rng::SplitMix64,
    vars: &[String],
    params: &[String],
    depth: usize,
) -> Expr {
    if depth == 0 {
        return random_leaf(rng, vars, params);
    }
    match rng.below(10) {
        0 | 1 => random_leaf(rng, vars, params),
        2 => Expr::Neg(Box::new(random_expr(rng, vars, params, depth - 1))),
        3..=6 => {
            let op = match rng.below(4) {
                0 => BinOp::Add,
                1 => BinOp::Sub,
                2 => BinOp::Mul,
                _ => BinOp::Div,
            };
            Expr::Bin(
                op,
                Box::new(random_expr(rng, vars, params, depth - 1)),
                Box::new(random_expr(rng, vars, params, depth - 1)),
            )
        }
        _ => {
            let f = match rng.below(8) {
                0 => Func::Sin,
                1 => Func::Cos,
                2 => Func::Tan,
                3 => Func::Atan,
                4 => Func::Sqrt,
                5 => Func::Exp,
                6 => Func::Ln,
                _ => Func::Atan2,
            };
            let mut args = vec![random_expr(rng, vars, params, depth - 1)];
            if f.arity() == 2 {
                args.push(random_expr(rng, vars, params, depth - 1));
            }
            Expr::Call(f, args)
        }
    }
}

fn random_leaf(
    rng: &mut crate::rng::SplitMix64,
    vars: &[String],
    params: &[String],
) -> Expr {
    match rng.below(4) {
        0 => {
            // short non-negative decimal so printing round-trips exactly
            let v = (rng.below(4000) as f64) / 128.0;
            Expr::Const(v)
        }
        1 if !params.is_empty() => Expr::Param(params[rng.below(params.len())].clone()),
        _ => Expr::Var(vars[rng.below(vars.len())].clone()),
    }
}
