use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::{eval_plain, render, BinOp, EvalError, Expr, JetEval, Node, ParseError};
use crate::jets::{self, Jet, Univariate};

/// A closed expression over named coordinates: every constant has already
/// been replaced by its value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    root: Arc<Node>,
    coords: Arc<[String]>,
}

impl ScalarField {
    pub(crate) fn from_parts(root: Node, coords: Arc<[String]>) -> ScalarField {
        ScalarField { root: Arc::new(root), coords }
    }

    /// Parses `text` and binds the named constants.
    pub fn parse(text: &str, coords: &[&str], constants: &[(&str, f64)]) -> Result<ScalarField, ParseError> {
        let names: Vec<&str> = constants.iter().map(|c| c.0).collect();
        let values: Vec<f64> = constants.iter().map(|c| c.1).collect();
        let e = Expr::parse(text, coords, &names)?;
        Ok(e.bind(&values).expect("every declared constant has a value"))
    }

    /// Like [`ScalarField::parse`] with an already shared coordinate list.
    pub fn parse_in(text: &str, coords: &Arc<[String]>, constants: &[(String, f64)]) -> Result<ScalarField, ParseError> {
        let names: Arc<[String]> = constants.iter().map(|c| c.0.clone()).collect();
        let values: Vec<f64> = constants.iter().map(|c| c.1).collect();
        let e = Expr::parse_owned(text, coords.clone(), names)?;
        Ok(e.bind(&values).expect("every declared constant has a value"))
    }

    pub fn constant(value: f64, coords: &Arc<[String]>) -> ScalarField {
        ScalarField::from_parts(Node::Num(value), coords.clone())
    }

    pub fn coordinate(axis: usize, coords: &Arc<[String]>) -> ScalarField {
        assert!(axis < coords.len());
        ScalarField::from_parts(Node::Coord(axis), coords.clone())
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn coordinates(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn arity(&self) -> usize {
        self.coords.len()
    }

    /// The literal value if the tree is a bare number.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.root {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn free_coordinates(&self) -> BTreeSet<String> {
        self.free_axes().into_iter().map(|i| self.coords[i].clone()).collect()
    }

    pub fn free_axes(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.root.collect_coords(&mut out);
        out
    }

    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, EvalError> {
        self.check_point(point)?;
        let vars = jets::seed(point, order)?;
        self.eval_seeded(&vars, point)
    }

    /// Evaluates with coordinate jets that were seeded once for several fields.
    pub fn eval_seeded(&self, vars: &[Jet], point: &[f64]) -> Result<Jet, EvalError> {
        self.check_point(point)?;
        JetEval { vars: vars.to_vec(), point, coords: &self.coords }.eval(&self.root)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.check_point(point)?;
        eval_plain(&self.root, point, &self.coords)
    }

    fn check_point(&self, point: &[f64]) -> Result<(), EvalError> {
        if point.len() != self.coords.len() {
            return Err(EvalError::PointArity { expected: self.coords.len(), got: point.len() });
        }
        Ok(())
    }

    /// Renames coordinate `i` to `target[map[i]]`, moving the field onto a
    /// new coordinate list.
    pub fn remap(&self, target: &Arc<[String]>, map: &[usize]) -> ScalarField {
        fn walk(n: &Node, map: &[usize]) -> Node {
            match n {
                Node::Coord(i) => Node::Coord(map[*i]),
                Node::Num(_) | Node::Const(_) => n.clone(),
                Node::Neg(a) => Node::Neg(Box::new(walk(a, map))),
                Node::Call(f, a) => Node::Call(*f, Box::new(walk(a, map))),
                Node::Binary(op, a, b) => Node::Binary(*op, Box::new(walk(a, map)), Box::new(walk(b, map))),
            }
        }
        assert_eq!(map.len(), self.coords.len());
        ScalarField::from_parts(walk(&self.root, map), target.clone())
    }

    /// Restricts a field that depends on at most coordinate `axis` to a
    /// one-variable field. Returns `None` if another coordinate appears.
    pub fn to_univariate(&self, axis: usize) -> Option<ScalarField> {
        if self.free_axes().iter().any(|&a| a != axis) {
            return None;
        }
        let single: Arc<[String]> = Arc::from(vec![self.coords[axis].clone()]);
        let map: Vec<usize> = (0..self.coords.len()).map(|_| 0).collect();
        Some(self.remap(&single, &map))
    }

    /// Places a one-variable field on coordinate `axis` of `coords`.
    pub fn embed(&self, coords: &Arc<[String]>, axis: usize) -> ScalarField {
        assert_eq!(self.coords.len(), 1, "embed expects a one-variable field");
        self.remap(coords, &[axis])
    }

    fn binary(&self, op: BinOp, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.coords, rhs.coords, "fields over different coordinates");
        let node = Node::Binary(op, Box::new((*self.root).clone()), Box::new((*rhs.root).clone()));
        ScalarField::from_parts(node, self.coords.clone())
    }

    pub fn powf(&self, exponent: f64) -> ScalarField {
        let e = if exponent < 0.0 { Node::Neg(Box::new(Node::Num(-exponent))) } else { Node::Num(exponent) };
        let node = Node::Binary(BinOp::Pow, Box::new((*self.root).clone()), Box::new(e));
        ScalarField::from_parts(node, self.coords.clone())
    }

    pub fn apply(&self, func: Univariate) -> ScalarField {
        ScalarField::from_parts(Node::Call(func, Box::new((*self.root).clone())), self.coords.clone())
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self * &ScalarField::constant(c, &self.coords)
    }

    /// Product of a non-empty list of fields.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a ScalarField>) -> Option<ScalarField> {
        factors.into_iter().fold(None, |acc, f| Some(match acc {
            None => f.clone(),
            Some(a) => &a * f,
        }))
    }

    /// Sum of a non-empty list of fields.
    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a ScalarField>) -> Option<ScalarField> {
        terms.into_iter().fold(None, |acc, f| Some(match acc {
            None => f.clone(),
            Some(a) => &a + f,
        }))
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.root, &self.coords, &[]))
    }
}

macro_rules! field_op {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.binary($op, rhs)
            }
        }
        impl $trait<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.binary($op, &rhs)
            }
        }
    };
}

field_op!(Add, add, BinOp::Add);
field_op!(Sub, sub, BinOp::Sub);
field_op!(Mul, mul, BinOp::Mul);
field_op!(Div, div, BinOp::Div);

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::from_parts(Node::Neg(Box::new((*self.root).clone())), self.coords.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composed_fields_evaluate() {
        let f = ScalarField::parse("x*y", &["x", "y"], &[]).unwrap();
        let g = ScalarField::parse("x+k", &["x", "y"], &[("k", 1.0)]).unwrap();
        let h = &(&f / &g) - &f.powf(-2.0);
        let v = h.eval(&[2.0, 3.0]).unwrap();
        assert!((v - (6.0 / 3.0 - 1.0 / 36.0)).abs() < 1e-15);
        let again = ScalarField::parse(&h.to_string(), &["x", "y"], &[]).unwrap();
        assert_eq!(again, h);
    }

    #[test]
    fn univariate_round_trip() {
        let f = ScalarField::parse("sin(theta)^2", &["r", "theta", "phi"], &[]).unwrap();
        let u = f.to_univariate(1).unwrap();
        assert_eq!(u.coordinates().len(), 1);
        assert_eq!(u.eval(&[0.5]).unwrap(), f.eval(&[9.0, 0.5, 7.0]).unwrap());
        assert_eq!(u.embed(f.coordinates(), 1), f);
        assert!(f.to_univariate(0).is_none());
    }

    #[test]
    fn order_zero_matches_plain() {
        let f = ScalarField::parse("exp(x)/(1+y^2)-sqrt(x*y)^3", &["x", "y"], &[]).unwrap();
        let p = [0.7, 1.3];
        assert_eq!(f.eval_jet(&p, 0).unwrap().value().to_bits(), f.eval(&p).unwrap().to_bits());
    }
}
