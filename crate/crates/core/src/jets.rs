//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] of arity `n` and order `K` stores the Taylor coefficients
//! `f^(α)(u) / α!` for every multi-index `α` with `|α| ≤ K`, densely, in
//! graded order (all degree-0 entries, then degree 1, and so on). Because the
//! graded rank of a multi-index does not depend on `K`, truncating a jet to a
//! lower order is a prefix slice.
//!
//! Every partial derivative used elsewhere in the crate is read off a jet, so
//! the arithmetic here is exact up to floating-point rounding; there is no
//! finite differencing anywhere on the production path.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 5;
/// Highest supported number of independent coordinates.
pub const MAX_ARITY: usize = 8;
/// Arguments of division, `ln`, `sqrt` and fractional powers must clear this
/// margin.
pub const DOMAIN_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order {0} is out of range 0..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("jet arity {0} is out of range 1..={MAX_ARITY}")]
    ArityOutOfRange(usize),
    #[error("multi-index {index:?} has degree above the jet order {order}")]
    DegreeTooHigh { index: Vec<usize>, order: usize },
    #[error("{op} is undefined at argument value {value:e}")]
    Domain { op: &'static str, value: f64 },
}

struct Layout {
    arity: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    weights: Vec<f64>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `products[t]` lists the `(i, j)` with `indices[i] + indices[j] == indices[t]`.
    products: Vec<Vec<(u16, u16)>>,
    /// `shifts[axis][k]` is the rank of `lower.indices[k] + e_axis` in this
    /// layout together with the factor `α_axis + 1`.
    shifts: Vec<Vec<(usize, f64)>>,
    lower: Option<Arc<Layout>>,
}

fn graded_indices(arity: usize, order: usize) -> Vec<Vec<u8>> {
    fn fill(prefix: &mut Vec<u8>, remaining: usize, slots: usize, out: &mut Vec<Vec<u8>>) {
        if slots == 1 {
            prefix.push(remaining as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first as u8);
            fill(prefix, remaining - first, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for degree in 0..=order {
        fill(&mut Vec::with_capacity(arity), degree, arity, &mut out);
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl Layout {
    fn build(arity: usize, order: usize, lower: Option<Arc<Layout>>) -> Layout {
        let indices = graded_indices(arity, order);
        let lookup: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(rank, idx)| (idx.clone(), rank))
            .collect();
        let weights = indices
            .iter()
            .map(|idx| idx.iter().map(|&a| factorial(a as usize)).product())
            .collect();
        let degree = |idx: &[u8]| idx.iter().map(|&a| a as usize).sum::<usize>();

        let mut products = vec![Vec::new(); indices.len()];
        for (i, a) in indices.iter().enumerate() {
            let da = degree(a);
            for (j, b) in indices.iter().enumerate() {
                if da + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products[lookup[&sum]].push((i as u16, j as u16));
            }
        }

        let shifts = match &lower {
            Some(low) => (0..arity)
                .map(|axis| {
                    low.indices
                        .iter()
                        .map(|idx| {
                            let mut up = idx.clone();
                            up[axis] += 1;
                            (lookup[&up], (idx[axis] + 1) as f64)
                        })
                        .collect()
                })
                .collect(),
            None => Vec::new(),
        };

        Layout { arity, order, indices, weights, lookup, products, shifts, lower }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }
}

fn layout(arity: usize, order: usize) -> Result<Arc<Layout>, JetError> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(JetError::ArityOutOfRange(arity));
    }
    if order > MAX_ORDER {
        return Err(JetError::OrderOutOfRange(order));
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    for k in 0..=order {
        if !guard.contains_key(&(arity, k)) {
            let lower = if k == 0 { None } else { Some(guard[&(arity, k - 1)].clone()) };
            guard.insert((arity, k), Arc::new(Layout::build(arity, k, lower)));
        }
    }
    Ok(guard[&(arity, order)].clone())
}

/// A truncated multivariate Taylor expansion.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("arity", &self.layout.arity)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// The elementary functions a jet can be pushed through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Univariate {
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Univariate {
    pub const ALL: [Univariate; 8] = [
        Univariate::Exp,
        Univariate::Ln,
        Univariate::Sin,
        Univariate::Cos,
        Univariate::Sinh,
        Univariate::Cosh,
        Univariate::Tanh,
        Univariate::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Univariate::Exp => "exp",
            Univariate::Ln => "ln",
            Univariate::Sin => "sin",
            Univariate::Cos => "cos",
            Univariate::Sinh => "sinh",
            Univariate::Cosh => "cosh",
            Univariate::Tanh => "tanh",
            Univariate::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Univariate> {
        Univariate::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Plain evaluation with the same domain guards as the jet path.
    pub fn eval(self, x: f64) -> Result<f64, JetError> {
        Ok(self.taylor(x, 0)?[0])
    }

    /// Coefficients `f^(k)(x) / k!` for `k = 0..=order`.
    fn taylor(self, x: f64, order: usize) -> Result<Vec<f64>, JetError> {
        let mut c = Vec::with_capacity(order + 1);
        match self {
            Univariate::Exp => {
                let e = x.exp();
                for k in 0..=order {
                    c.push(e / factorial(k));
                }
            }
            Univariate::Sin | Univariate::Cos => {
                let (s, co) = (x.sin(), x.cos());
                let cycle = [s, co, -s, -co];
                let shift = if self == Univariate::Sin { 0 } else { 1 };
                for k in 0..=order {
                    c.push(cycle[(k + shift) % 4] / factorial(k));
                }
            }
            Univariate::Sinh | Univariate::Cosh => {
                let (s, co) = (x.sinh(), x.cosh());
                let shift = if self == Univariate::Sinh { 0 } else { 1 };
                for k in 0..=order {
                    let v = if (k + shift) % 2 == 0 { s } else { co };
                    c.push(v / factorial(k));
                }
            }
            Univariate::Tanh => {
                // t' = 1 - t^2, matched power by power.
                c.push(x.tanh());
                for k in 0..order {
                    let conv: f64 = (0..=k).map(|j| c[j] * c[k - j]).sum();
                    let rhs = if k == 0 { 1.0 - conv } else { -conv };
                    c.push(rhs / (k + 1) as f64);
                }
            }
            Univariate::Ln => {
                if x <= DOMAIN_GUARD {
                    return Err(JetError::Domain { op: "ln", value: x });
                }
                c.push(x.ln());
                let mut p = 1.0;
                for k in 1..=order {
                    p *= x;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    c.push(sign / (k as f64 * p));
                }
            }
            Univariate::Sqrt => {
                if x <= DOMAIN_GUARD {
                    return Err(JetError::Domain { op: "sqrt", value: x });
                }
                c.push(x.sqrt());
                for k in 1..=order {
                    let prev = c[k - 1];
                    c.push(prev * (0.5 - (k - 1) as f64) / (k as f64 * x));
                }
            }
        }
        Ok(c)
    }
}

/// Binary operations accepted by [`combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Right-hand operand of [`combine`].
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Jet(&'a Jet),
    Scalar(f64),
}

impl<'a> From<&'a Jet> for Operand<'a> {
    fn from(j: &'a Jet) -> Self {
        Operand::Jet(j)
    }
}

impl From<f64> for Operand<'_> {
    fn from(v: f64) -> Self {
        Operand::Scalar(v)
    }
}

/// Seeds the coordinate jets at `point`: jet `i` has value `point[i]` and
/// unit first derivative along axis `i`.
pub fn seed(point: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
    let lay = layout(point.len(), order)?;
    Ok((0..point.len()).map(|axis| Jet::variable_in(&lay, point[axis], axis)).collect())
}

pub fn combine<'a>(op: BinaryOp, a: &Jet, b: impl Into<Operand<'a>>) -> Result<Jet, JetError> {
    match (op, b.into()) {
        (BinaryOp::Add, Operand::Jet(b)) => Ok(a + b),
        (BinaryOp::Add, Operand::Scalar(b)) => Ok(a + b),
        (BinaryOp::Sub, Operand::Jet(b)) => Ok(a - b),
        (BinaryOp::Sub, Operand::Scalar(b)) => Ok(a - b),
        (BinaryOp::Mul, Operand::Jet(b)) => Ok(a * b),
        (BinaryOp::Mul, Operand::Scalar(b)) => Ok(a * b),
        (BinaryOp::Div, Operand::Jet(b)) => a.checked_div(b),
        (BinaryOp::Div, Operand::Scalar(b)) => a.checked_div(&a.constant_like(b)),
        (BinaryOp::Pow, Operand::Jet(b)) => a.pow(b),
        (BinaryOp::Pow, Operand::Scalar(b)) => a.powf(b),
    }
}

pub fn apply_univariate(func: Univariate, a: &Jet) -> Result<Jet, JetError> {
    let series = func.taylor(a.value(), a.order())?;
    Ok(a.compose(&series))
}

/// Exponentiation by squaring, shared by the jet and plain evaluators so
/// both perform the same sequence of multiplications.
pub(crate) fn pow_by_squaring<T: Clone>(base: &T, exponent: u32, one: T, mul: impl Fn(&T, &T) -> T) -> T {
    let mut result: Option<T> = None;
    let mut b = base.clone();
    let mut n = exponent;
    while n > 0 {
        if n & 1 == 1 {
            result = Some(match result {
                None => b.clone(),
                Some(r) => mul(&r, &b),
            });
        }
        n >>= 1;
        if n > 0 {
            b = mul(&b, &b);
        }
    }
    result.unwrap_or(one)
}

/// Largest integer exponent that is expanded by repeated multiplication.
pub(crate) const MAX_INTEGER_EXPONENT: f64 = 1024.0;

impl Jet {
    fn variable_in(lay: &Arc<Layout>, value: f64, axis: usize) -> Jet {
        let mut coeffs = vec![0.0; lay.len()];
        coeffs[0] = value;
        if lay.order >= 1 {
            coeffs[1 + axis] = 1.0;
        }
        Jet { layout: lay.clone(), coeffs }
    }

    pub fn constant(arity: usize, order: usize, value: f64) -> Result<Jet, JetError> {
        let lay = layout(arity, order)?;
        let mut coeffs = vec![0.0; lay.len()];
        coeffs[0] = value;
        Ok(Jet { layout: lay, coeffs })
    }

    /// A constant with the same arity and order as `self`.
    pub fn constant_like(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        Jet { layout: self.layout.clone(), coeffs }
    }

    /// Jet of a function of the single coordinate `axis`, given its
    /// derivatives `f, f', f'', ...` at the expansion point. Missing higher
    /// derivatives are taken as zero.
    pub fn along_axis(arity: usize, order: usize, axis: usize, derivatives: &[f64]) -> Result<Jet, JetError> {
        let lay = layout(arity, order)?;
        let mut coeffs = vec![0.0; lay.len()];
        let mut idx = vec![0u8; arity];
        let mut factorial = 1.0;
        for (k, &dk) in derivatives.iter().enumerate().take(order + 1) {
            if k > 0 {
                factorial *= k as f64;
            }
            idx[axis] = k as u8;
            coeffs[lay.lookup[&idx]] = dk / factorial;
        }
        Ok(Jet { layout: lay, coeffs })
    }

    pub fn arity(&self) -> usize {
        self.layout.arity
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in graded order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// The Taylor coefficient `f^(α) / α!`.
    pub fn coefficient(&self, index: &[usize]) -> Result<f64, JetError> {
        Ok(self.coeffs[self.rank(index)?])
    }

    fn rank(&self, index: &[usize]) -> Result<usize, JetError> {
        assert_eq!(index.len(), self.arity(), "multi-index arity mismatch");
        let degree: usize = index.iter().sum();
        if degree > self.order() {
            return Err(JetError::DegreeTooHigh { index: index.to_vec(), order: self.order() });
        }
        let key: Vec<u8> = index.iter().map(|&a| a as u8).collect();
        Ok(self.layout.lookup[&key])
    }

    /// The raw partial derivative `∂^α f`.
    pub fn partial(&self, index: &[usize]) -> Result<f64, JetError> {
        let rank = self.rank(index)?;
        Ok(self.coeffs[rank] * self.layout.weights[rank])
    }

    /// `∂_axis f` at the expansion point.
    pub fn d(&self, axis: usize) -> f64 {
        assert!(self.order() >= 1, "first derivative of an order-0 jet");
        self.coeffs[1 + axis]
    }

    /// `∂_a ∂_b f` at the expansion point.
    pub fn d2(&self, a: usize, b: usize) -> f64 {
        let mut idx = vec![0; self.arity()];
        idx[a] += 1;
        idx[b] += 1;
        self.partial(&idx).expect("second derivative of a jet with order < 2")
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.arity()).map(|i| self.d(i)).collect()
    }

    /// The jet of `∂_axis f`, one order lower.
    pub fn derivative(&self, axis: usize) -> Result<Jet, JetError> {
        let lower = match &self.layout.lower {
            Some(l) => l.clone(),
            None => return Err(JetError::OrderOutOfRange(0)),
        };
        let coeffs = self.layout.shifts[axis]
            .iter()
            .map(|&(src, factor)| factor * self.coeffs[src])
            .collect();
        Ok(Jet { layout: lower, coeffs })
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let lay = layout(self.arity(), order).expect("lower order of a valid layout");
        let coeffs = self.coeffs[..lay.len()].to_vec();
        Jet { layout: lay, coeffs }
    }

    fn aligned<'a>(&'a self, other: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(self.arity(), other.arity(), "jet arity mismatch");
        match self.order().cmp(&other.order()) {
            std::cmp::Ordering::Equal => (Cow::Borrowed(self), Cow::Borrowed(other)),
            std::cmp::Ordering::Less => (Cow::Borrowed(self), Cow::Owned(other.truncate(self.order()))),
            std::cmp::Ordering::Greater => (Cow::Owned(self.truncate(other.order())), Cow::Borrowed(other)),
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f(x, y)).collect();
        Jet { layout: a.layout.clone(), coeffs }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|&x| f(x)).collect() }
    }

    fn product(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let lay = a.layout.clone();
        let coeffs = lay
            .products
            .iter()
            .map(|pairs| {
                let mut it = pairs.iter();
                let &(i, j) = it.next().expect("every index has a product decomposition");
                let mut s = a.coeffs[i as usize] * b.coeffs[j as usize];
                for &(i, j) in it {
                    s += a.coeffs[i as usize] * b.coeffs[j as usize];
                }
                s
            })
            .collect();
        Jet { layout: lay, coeffs }
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet, JetError> {
        let (a, b) = self.aligned(other);
        let b0 = b.coeffs[0];
        if b0.abs() <= DOMAIN_GUARD || !b0.is_finite() {
            return Err(JetError::Domain { op: "division", value: b0 });
        }
        let lay = a.layout.clone();
        let mut c = vec![0.0; lay.len()];
        for t in 0..lay.len() {
            let mut s = a.coeffs[t];
            for &(i, j) in &lay.products[t] {
                if i != 0 {
                    s -= b.coeffs[i as usize] * c[j as usize];
                }
            }
            c[t] = s / b0;
        }
        Ok(Jet { layout: lay, coeffs: c })
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        self.constant_like(1.0).checked_div(self)
    }

    /// `Σ series[k] (f - f(u))^k`, evaluated by Horner's rule.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut shifted = self.clone();
        shifted.coeffs[0] = 0.0;
        let top = series.len() - 1;
        let mut r = self.constant_like(series[top]);
        for k in (0..top).rev() {
            r = r.product(&shifted);
            r.coeffs[0] = series[k];
        }
        r
    }

    pub fn exp(&self) -> Jet {
        apply_univariate(Univariate::Exp, self).expect("exp is total")
    }
    pub fn sin(&self) -> Jet {
        apply_univariate(Univariate::Sin, self).expect("sin is total")
    }
    pub fn cos(&self) -> Jet {
        apply_univariate(Univariate::Cos, self).expect("cos is total")
    }
    pub fn sinh(&self) -> Jet {
        apply_univariate(Univariate::Sinh, self).expect("sinh is total")
    }
    pub fn cosh(&self) -> Jet {
        apply_univariate(Univariate::Cosh, self).expect("cosh is total")
    }
    pub fn tanh(&self) -> Jet {
        apply_univariate(Univariate::Tanh, self).expect("tanh is total")
    }
    pub fn ln(&self) -> Result<Jet, JetError> {
        apply_univariate(Univariate::Ln, self)
    }
    pub fn sqrt(&self) -> Result<Jet, JetError> {
        apply_univariate(Univariate::Sqrt, self)
    }

    pub fn powi(&self, n: i64) -> Result<Jet, JetError> {
        let positive = pow_by_squaring(self, n.unsigned_abs() as u32, self.constant_like(1.0), |a, b| a * b);
        if n < 0 {
            positive.recip()
        } else {
            Ok(positive)
        }
    }

    /// Real power. Integer exponents go through [`Jet::powi`] and accept any
    /// base; other exponents need a positive base.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        if p.fract() == 0.0 && p.abs() <= MAX_INTEGER_EXPONENT {
            return self.powi(p as i64);
        }
        let x = self.value();
        if x <= DOMAIN_GUARD {
            return Err(JetError::Domain { op: "fractional power", value: x });
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        series.push(x.powf(p));
        for k in 1..=self.order() {
            let prev = series[k - 1];
            series.push(prev * (p - (k - 1) as f64) / (k as f64 * x));
        }
        Ok(self.compose(&series))
    }

    /// `self^exponent = exp(exponent · ln self)`.
    pub fn pow(&self, exponent: &Jet) -> Result<Jet, JetError> {
        Ok((exponent * &self.ln()?).exp())
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a: &Jet, b: &Jet| a.product(b));

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut r = self.clone();
        r.coeffs[0] += rhs;
        r
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        &self + rhs
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        let mut r = self.clone();
        r.coeffs[0] -= rhs;
        r
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        &self - rhs
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map(|x| x * rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        &self * rhs
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|x| -x)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}
