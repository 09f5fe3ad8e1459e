//! The textual expression language used for Lamé coefficients, separation
//! factors, potentials and basis functions.
//!
//! An [`Expr`] is a parsed tree whose identifiers are resolved against a list
//! of coordinate names and a list of constant names. Binding the constants to
//! numbers yields a [`ScalarField`], which is what the geometry code consumes.

mod field;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jets::{self, Jet, JetError, Univariate, DOMAIN_GUARD, MAX_INTEGER_EXPONENT};

pub use field::ScalarField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` is declared both as a coordinate and as a constant")]
    Ambiguous { name: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("`{expr}` failed at {point:?}: {source}")]
    Domain { expr: String, point: Vec<f64>, source: JetError },
    #[error("constant `{0}` has no bound value")]
    Unbound(String),
    #[error("expected a point with {expected} coordinates, got {got}")]
    PointArity { expected: usize, got: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 3,
        }
    }
}

/// Syntax tree node. Coordinates and constants are stored by position.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Coord(usize),
    Const(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Univariate, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(op, ..) => op.precedence(),
            Node::Num(v) if *v < 0.0 || v.is_sign_negative() => 0,
            Node::Neg(_) => 0,
            _ => 4,
        }
    }

    fn collect_coords(&self, out: &mut BTreeSet<usize>) {
        match self {
            Node::Coord(i) => {
                out.insert(*i);
            }
            Node::Num(_) | Node::Const(_) => {}
            Node::Neg(a) | Node::Call(_, a) => a.collect_coords(out),
            Node::Binary(_, a, b) => {
                a.collect_coords(out);
                b.collect_coords(out);
            }
        }
    }

    fn has_coords(&self) -> bool {
        match self {
            Node::Coord(_) => true,
            Node::Num(_) | Node::Const(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.has_coords(),
            Node::Binary(_, a, b) => a.has_coords() || b.has_coords(),
        }
    }

    /// Replaces constants by their values.
    fn bind(&self, values: &[f64], names: &[String]) -> Result<Node, EvalError> {
        Ok(match self {
            Node::Const(i) => Node::Num(*values.get(*i).ok_or_else(|| EvalError::Unbound(names[*i].clone()))?),
            Node::Num(_) | Node::Coord(_) => self.clone(),
            Node::Neg(a) => Node::Neg(Box::new(a.bind(values, names)?)),
            Node::Call(f, a) => Node::Call(*f, Box::new(a.bind(values, names)?)),
            Node::Binary(op, a, b) => Node::Binary(*op, Box::new(a.bind(values, names)?), Box::new(b.bind(values, names)?)),
        })
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &Names<'_>) -> fmt::Result {
        match self {
            Node::Num(v) if v.is_sign_negative() => write!(f, "(-{:?})", -v),
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Coord(i) => f.write_str(&names.coords[*i]),
            Node::Const(i) => f.write_str(&names.consts[*i]),
            Node::Neg(a) => {
                f.write_str("-")?;
                write_child(a, f, names, a.precedence() < 4)
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(f, names)?;
                f.write_str(")")
            }
            Node::Binary(op, a, b) => {
                let p = op.precedence();
                let (left_parens, right_parens) = match op {
                    BinOp::Pow => (a.precedence() <= p, b.precedence() < p),
                    _ => (a.precedence() < p, b.precedence() <= p),
                };
                write_child(a, f, names, left_parens)?;
                write!(f, "{}", op.symbol())?;
                write_child(b, f, names, right_parens)
            }
        }
    }
}

fn write_child(node: &Node, f: &mut fmt::Formatter<'_>, names: &Names<'_>, parens: bool) -> fmt::Result {
    if parens {
        f.write_str("(")?;
        node.write(f, names)?;
        f.write_str(")")
    } else {
        node.write(f, names)
    }
}

struct Names<'a> {
    coords: &'a [String],
    consts: &'a [String],
}

struct Displayed<'a> {
    node: &'a Node,
    names: Names<'a>,
}

impl fmt::Display for Displayed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.node.write(f, &self.names)
    }
}

pub(crate) fn render(node: &Node, coords: &[String], consts: &[String]) -> String {
    Displayed { node, names: Names { coords, consts } }.to_string()
}

/// A parsed expression with resolved identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    coords: Arc<[String]>,
    consts: Arc<[String]>,
}

fn owned(names: &[&str]) -> Arc<[String]> {
    names.iter().map(|s| s.to_string()).collect()
}

impl Expr {
    pub fn parse(text: &str, coords: &[&str], consts: &[&str]) -> Result<Expr, ParseError> {
        Expr::parse_owned(text, owned(coords), owned(consts))
    }

    pub(crate) fn parse_owned(text: &str, coords: Arc<[String]>, consts: Arc<[String]>) -> Result<Expr, ParseError> {
        let root = parse::Parser::parse(text, &coords, &consts)?;
        Ok(Expr { root, coords, consts })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coords
    }

    pub fn constants(&self) -> &[String] {
        &self.consts
    }

    /// Names of the coordinates that appear in the tree.
    pub fn free_coordinates(&self) -> BTreeSet<String> {
        let mut idx = BTreeSet::new();
        self.root.collect_coords(&mut idx);
        idx.into_iter().map(|i| self.coords[i].clone()).collect()
    }

    pub fn eval_jet(&self, point: &[f64], bindings: &[f64], order: usize) -> Result<Jet, EvalError> {
        let bound = self.bind(bindings)?;
        bound.eval_jet(point, order)
    }

    /// Plain `f64` evaluation performing the same operations, in the same
    /// order, as the value coefficient of [`Expr::eval_jet`].
    pub fn eval(&self, point: &[f64], bindings: &[f64]) -> Result<f64, EvalError> {
        self.bind(bindings)?.eval(point)
    }

    pub fn bind(&self, bindings: &[f64]) -> Result<ScalarField, EvalError> {
        let root = self.root.bind(bindings, &self.consts)?;
        Ok(ScalarField::from_parts(root, self.coords.clone()))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &Names { coords: &self.coords, consts: &self.consts })
    }
}

pub(crate) struct JetEval<'a> {
    pub vars: Vec<Jet>,
    pub point: &'a [f64],
    pub coords: &'a [String],
}

impl JetEval<'_> {
    fn fail(&self, node: &Node, source: JetError) -> EvalError {
        EvalError::Domain { expr: render(node, self.coords, &[]), point: self.point.to_vec(), source }
    }

    pub(crate) fn eval(&self, node: &Node) -> Result<Jet, EvalError> {
        match node {
            Node::Num(v) => Ok(self.vars[0].constant_like(*v)),
            Node::Coord(i) => Ok(self.vars[*i].clone()),
            Node::Const(_) => unreachable!("constants are bound before evaluation"),
            Node::Neg(a) => Ok(-self.eval(a)?),
            Node::Call(func, a) => {
                let arg = self.eval(a)?;
                jets::apply_univariate(*func, &arg).map_err(|e| self.fail(node, e))
            }
            Node::Binary(op, a, b) => {
                let lhs = self.eval(a)?;
                match op {
                    BinOp::Add => Ok(lhs + self.eval(b)?),
                    BinOp::Sub => Ok(lhs - self.eval(b)?),
                    BinOp::Mul => Ok(lhs * self.eval(b)?),
                    BinOp::Div => lhs.checked_div(&self.eval(b)?).map_err(|e| self.fail(node, e)),
                    BinOp::Pow if !b.has_coords() => {
                        let p = eval_plain(b, self.point, self.coords)?;
                        lhs.powf(p).map_err(|e| self.fail(node, e))
                    }
                    BinOp::Pow => lhs.pow(&self.eval(b)?).map_err(|e| self.fail(node, e)),
                }
            }
        }
    }
}

fn plain_domain(node: &Node, point: &[f64], coords: &[String], op: &'static str, value: f64) -> EvalError {
    EvalError::Domain {
        expr: render(node, coords, &[]),
        point: point.to_vec(),
        source: JetError::Domain { op, value },
    }
}

pub(crate) fn eval_plain(node: &Node, point: &[f64], coords: &[String]) -> Result<f64, EvalError> {
    let recur = |n: &Node| eval_plain(n, point, coords);
    match node {
        Node::Num(v) => Ok(*v),
        Node::Coord(i) => Ok(point[*i]),
        Node::Const(_) => unreachable!("constants are bound before evaluation"),
        Node::Neg(a) => Ok(-recur(a)?),
        Node::Call(func, a) => {
            let x = recur(a)?;
            func.eval(x).map_err(|source| EvalError::Domain {
                expr: render(node, coords, &[]),
                point: point.to_vec(),
                source,
            })
        }
        Node::Binary(op, a, b) => {
            let x = recur(a)?;
            match op {
                BinOp::Add => Ok(x + recur(b)?),
                BinOp::Sub => Ok(x - recur(b)?),
                BinOp::Mul => Ok(x * recur(b)?),
                BinOp::Div => {
                    let y = recur(b)?;
                    if y.abs() <= DOMAIN_GUARD || !y.is_finite() {
                        return Err(plain_domain(node, point, coords, "division", y));
                    }
                    Ok(x / y)
                }
                BinOp::Pow if !b.has_coords() => {
                    let p = recur(b)?;
                    if p.fract() == 0.0 && p.abs() <= MAX_INTEGER_EXPONENT {
                        let pos = jets::pow_by_squaring(&x, p.abs() as u32, 1.0, |u, v| u * v);
                        if p < 0.0 {
                            if pos.abs() <= DOMAIN_GUARD || !pos.is_finite() {
                                return Err(plain_domain(node, point, coords, "division", pos));
                            }
                            Ok(1.0 / pos)
                        } else {
                            Ok(pos)
                        }
                    } else if x <= DOMAIN_GUARD {
                        Err(plain_domain(node, point, coords, "fractional power", x))
                    } else {
                        Ok(x.powf(p))
                    }
                }
                BinOp::Pow => {
                    let y = recur(b)?;
                    if x <= DOMAIN_GUARD {
                        return Err(plain_domain(node, point, coords, "ln", x));
                    }
                    Ok((y * x.ln()).exp())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPH: [&str; 3] = ["r", "theta", "phi"];

    #[test]
    fn parses_product() {
        let e = Expr::parse("r^2*sin(theta)", &SPH, &[]).unwrap();
        assert!(matches!(e.root(), Node::Binary(BinOp::Mul, ..)));
    }

    #[test]
    fn parses_negative_power() {
        let e = Expr::parse("(cosh(eta)-cos(theta))^(-2)", &["eta", "theta", "phi"], &[]).unwrap();
        match e.root() {
            Node::Binary(BinOp::Pow, _, exp) => assert_eq!(**exp, Node::Neg(Box::new(Node::Num(2.0)))),
            other => panic!("expected a power node, got {other:?}"),
        }
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = Expr::parse("2*(", &SPH, &[]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 3, .. }), "{err:?}");
    }

    #[test]
    fn rejects_implicit_multiplication() {
        let err = Expr::parse("2r", &SPH, &[]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 1, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier_is_named() {
        let err = Expr::parse("r*rho", &SPH, &[]).unwrap_err();
        assert_eq!(err, ParseError::UnknownIdentifier { name: "rho".into(), offset: 2 });
    }

    #[test]
    fn precedence_rules() {
        let v = |s: &str| Expr::parse(s, &["x"], &[]).unwrap().eval(&[3.0], &[]).unwrap();
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("-x^2"), 9.0);
        assert_eq!(v("-(x^2)"), -9.0);
        assert_eq!(v("1-x-1"), -3.0);
        assert_eq!(v("12/x/2"), 2.0);
        assert_eq!(v("2^-1"), 0.5);
        assert_eq!(v("1+2*x^2"), 19.0);
        assert_eq!(v("1.5e1+x"), 18.0);
    }

    #[test]
    fn eval_jet_gradient() {
        let e = Expr::parse("x+y", &["x", "y"], &[]).unwrap();
        let j = e.eval_jet(&[1.0, 2.0], &[], 1).unwrap();
        assert_eq!(j.value(), 3.0);
        assert_eq!(j.gradient(), vec![1.0, 1.0]);
    }

    #[test]
    fn eval_at_order_zero() {
        let e = Expr::parse("r^2*sin(theta)", &SPH, &[]).unwrap();
        let j = e.eval_jet(&[2.0, std::f64::consts::FRAC_PI_2, 0.0], &[], 0).unwrap();
        assert_eq!(j.value(), 4.0);
    }

    #[test]
    fn constants_are_bound() {
        let e = Expr::parse("a*x^2", &["x"], &["a"]).unwrap();
        assert_eq!(e.eval(&[2.0], &[0.5]).unwrap(), 2.0);
        assert!(matches!(e.eval(&[2.0], &[]), Err(EvalError::Unbound(n)) if n == "a"));
    }

    #[test]
    fn free_coordinate_sets() {
        let fc = |s: &str| Expr::parse(s, &SPH, &[]).unwrap().free_coordinates();
        assert_eq!(fc("sin(theta)"), ["theta".to_string()].into());
        assert_eq!(fc("r*r - r"), ["r".to_string()].into());
        assert!(fc("1").is_empty());
    }

    #[test]
    fn domain_error_names_subexpression() {
        let e = Expr::parse("1 + ln(x - 1)", &["x"], &[]).unwrap();
        match e.eval_jet(&[0.5], &[], 1).unwrap_err() {
            EvalError::Domain { expr, point, .. } => {
                assert_eq!(expr, "ln(x-1.0)");
                assert_eq!(point, vec![0.5]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn printing_round_trips() {
        for s in ["-x^2", "-(x^2)", "(a+b)*c", "a-(b-c)", "a/(b*c)", "a^b^c", "(a^b)^c", "2^-x", "sin(-a)*-b", "a--b"] {
            let e = Expr::parse(s, &["a", "b", "c", "x"], &[]).unwrap();
            let again = Expr::parse(&e.to_string(), &["a", "b", "c", "x"], &[]).unwrap();
            assert_eq!(e, again, "{s} printed as {e}");
        }
    }
}
