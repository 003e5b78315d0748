//! A small arithmetic language for metric components, evaluated on jets.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! There is no implicit multiplication: `2m` is a syntax error.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::jet::Jet;

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Ident(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parsed expression. Equality ignores source spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr { kind: ExprKind::Num(x), span: Span::default() }
    }

    pub fn ident(s: &str) -> Expr {
        Expr { kind: ExprKind::Ident(s.to_string()), span: Span::default() }
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr { kind: ExprKind::Bin(op, Box::new(a), Box::new(b)), span: Span::default() }
    }

    pub fn neg(a: Expr) -> Expr {
        Expr { kind: ExprKind::Neg(Box::new(a)), span: Span::default() }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr { kind: ExprKind::Call(f, Box::new(a)), span: Span::default() }
    }

    /// All identifiers referenced, sorted and deduplicated.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_idents(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_idents(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::Num(_) => {}
            ExprKind::Ident(s) => out.push(s.clone()),
            ExprKind::Neg(a) | ExprKind::Call(_, a) => a.collect_idents(out),
            ExprKind::Bin(_, a, b) => {
                a.collect_idents(out);
                b.collect_idents(out);
            }
        }
    }

    /// Resolve identifiers: coordinates become jet inputs, parameters become constants.
    pub fn bind(
        &self,
        coords: &[String; 4],
        params: &BTreeMap<String, f64>,
    ) -> Result<BoundExpr, ExprError> {
        Ok(BoundExpr { root: self.bind_node(coords, params)? })
    }

    fn bind_node(
        &self,
        coords: &[String; 4],
        params: &BTreeMap<String, f64>,
    ) -> Result<Node, ExprError> {
        let span = self.span;
        Ok(match &self.kind {
            ExprKind::Num(x) => Node::Const(*x),
            ExprKind::Ident(s) => {
                if let Some(i) = coords.iter().position(|c| c == s) {
                    Node::Coord(i)
                } else if let Some(v) = params.get(s) {
                    Node::Const(*v)
                } else {
                    return Err(ExprError::UnknownIdentifier { name: s.clone(), span });
                }
            }
            ExprKind::Neg(a) => Node::Neg(Box::new(a.bind_node(coords, params)?)),
            ExprKind::Bin(op, a, b) => Node::Bin(
                *op,
                span,
                Box::new(a.bind_node(coords, params)?),
                Box::new(b.bind_node(coords, params)?),
            ),
            ExprKind::Call(f, a) => Node::Call(*f, span, Box::new(a.bind_node(coords, params)?)),
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(x) => write!(f, "{x}"),
            ExprKind::Ident(s) => write!(f, "{s}"),
            ExprKind::Neg(a) => write!(f, "(-{a})"),
            ExprKind::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprKind::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String>, found: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown identifier `{name}` at {span}")]
    UnknownIdentifier { name: String, span: Span },
    #[error("domain error at {span}: {what}")]
    Domain { what: String, span: Span },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let x: f64 = text.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                expected: vec!["number".into()],
                found: format!("`{text}`"),
            })?;
            out.push((Tok::Num(x), Span { start, end: i }));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), Span { start, end: i }));
        } else if b"+-*/^()".contains(&c) {
            i += 1;
            out.push((Tok::Op(c as char), Span { start, end: i }));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(ExprError::Syntax {
                offset: start,
                expected: vec!["operator".into(), "operand".into()],
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((Tok::End, Span { start: src.len(), end: src.len() }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

const OPERAND: [&str; 4] = ["number", "identifier", "`(`", "`-`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        ExprError::Syntax {
            offset: self.span().start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = join(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = join(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Op('-') {
            let (_, s) = self.bump();
            let a = self.unary()?;
            let span = Span { start: s.start, end: a.span.end };
            return Ok(Expr { kind: ExprKind::Neg(Box::new(a)), span });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(join(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().clone() {
            Tok::Num(x) => {
                let (_, span) = self.bump();
                Ok(Expr { kind: ExprKind::Num(x), span })
            }
            Tok::Ident(name) => {
                let (_, span) = self.bump();
                if *self.peek() != Tok::Op('(') {
                    return Ok(Expr { kind: ExprKind::Ident(name), span });
                }
                let func = Func::from_name(&name)
                    .ok_or(ExprError::UnknownFunction { name, offset: span.start })?;
                self.bump();
                let arg = self.expr()?;
                let close = self.expect_close()?;
                Ok(Expr {
                    kind: ExprKind::Call(func, Box::new(arg)),
                    span: Span { start: span.start, end: close.end },
                })
            }
            Tok::Op('(') => {
                let (_, open) = self.bump();
                let mut inner = self.expr()?;
                let close = self.expect_close()?;
                inner.span = Span { start: open.start, end: close.end };
                Ok(inner)
            }
            _ => Err(self.error(&OPERAND)),
        }
    }

    fn expect_close(&mut self) -> Result<Span, ExprError> {
        if *self.peek() == Tok::Op(')') {
            Ok(self.bump().1)
        } else {
            Err(self.error(&["operator", "`)`"]))
        }
    }
}

fn join(op: BinOp, a: Expr, b: Expr) -> Expr {
    let span = Span { start: a.span.start, end: b.span.end };
    Expr { kind: ExprKind::Bin(op, Box::new(a), Box::new(b)), span }
}

/// Parse an expression.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Coord(usize),
    Neg(Box<Node>),
    Bin(BinOp, Span, Box<Node>, Box<Node>),
    Call(Func, Span, Box<Node>),
}

/// An expression with every identifier resolved.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    root: Node,
}

fn domain(what: &str, span: Span) -> ExprError {
    ExprError::Domain { what: what.to_string(), span }
}

fn is_constant(j: &Jet<f64>) -> bool {
    j.coeffs()[1..].iter().all(|&x| x == 0.0)
}

impl BoundExpr {
    /// Evaluate with the given coordinate jets (usually seed variables).
    pub fn eval(&self, vars: &[Jet<f64>; 4]) -> Result<Jet<f64>, ExprError> {
        let ord = vars.iter().map(Jet::order).min().unwrap_or(0);
        eval_node(&self.root, vars, ord)
    }

    /// Plain value at a point.
    pub fn eval_value(&self, x: [f64; 4]) -> Result<f64, ExprError> {
        let vars = std::array::from_fn(|i| Jet::constant(x[i], 0));
        Ok(self.eval(&vars)?.value())
    }
}

fn eval_node(n: &Node, vars: &[Jet<f64>; 4], ord: usize) -> Result<Jet<f64>, ExprError> {
    Ok(match n {
        Node::Const(x) => Jet::constant(*x, ord),
        Node::Coord(i) => vars[*i].clone(),
        Node::Neg(a) => -eval_node(a, vars, ord)?,
        Node::Bin(op, span, a, b) => {
            let a = eval_node(a, vars, ord)?;
            let b = eval_node(b, vars, ord)?;
            let out = match op {
                BinOp::Add => &a + &b,
                BinOp::Sub => &a - &b,
                BinOp::Mul => &a * &b,
                BinOp::Div => {
                    if b.value() == 0.0 {
                        return Err(domain("division by zero", *span));
                    }
                    &a * &b.recip()
                }
                BinOp::Pow => pow(&a, &b, *span)?,
            };
            check_finite(out, *span)?
        }
        Node::Call(f, span, a) => {
            let a = eval_node(a, vars, ord)?;
            let x = a.value();
            let out = match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => {
                    if a.value().cos() == 0.0 {
                        return Err(domain("tan at a pole", *span));
                    }
                    a.tan()
                }
                Func::Exp => a.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain("log of a non-positive value", *span));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if x <= 0.0 {
                        return Err(domain("sqrt of a non-positive value", *span));
                    }
                    a.sqrt()
                }
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Abs => {
                    if x == 0.0 {
                        return Err(domain("abs is not differentiable at zero", *span));
                    }
                    a.abs()
                }
            };
            check_finite(out, *span)?
        }
    })
}

fn pow(b: &Jet<f64>, e: &Jet<f64>, span: Span) -> Result<Jet<f64>, ExprError> {
    let ev = e.value();
    if is_constant(e) && ev.fract() == 0.0 && ev.abs() <= 1024.0 {
        if ev < 0.0 && b.value() == 0.0 {
            return Err(domain("zero raised to a negative power", span));
        }
        return Ok(b.powi(ev as i32));
    }
    if b.value() <= 0.0 {
        return Err(domain("non-integer power of a non-positive base", span));
    }
    if is_constant(e) {
        Ok(b.powf(ev))
    } else {
        Ok((e * &b.ln()).exp())
    }
}

fn check_finite(j: Jet<f64>, span: Span) -> Result<Jet<f64>, ExprError> {
    if j.is_finite() {
        Ok(j)
    } else {
        Err(domain("non-finite result", span))
    }
}

/// Parse-free convenience: evaluate `e` at a point with jets of order `ord`.
pub fn eval_jet(
    e: &Expr,
    coords: &[String; 4],
    x: [f64; 4],
    params: &BTreeMap<String, f64>,
    ord: usize,
) -> Result<Jet<f64>, ExprError> {
    let vars = std::array::from_fn(|i| Jet::variable(x[i], i, ord));
    e.bind(coords, params)?.eval(&vars)
}
