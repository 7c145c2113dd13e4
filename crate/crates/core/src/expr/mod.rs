//! Immutable polynomial expression trees.
//!
//! An [`Expr`] is a shared, immutable tree of constants (exact rationals),
//! variables, negation, sums, products and nonnegative integer powers.
//! Arithmetic operators, [`Expr::differentiate`] and [`Expr::substitute`] all
//! return the *simplified* form: the tree is expanded into a sum of monomials,
//! like terms are collected, and terms are sorted in descending graded
//! lexicographic order. Two polynomials are equal exactly when their
//! simplified trees are structurally equal.
//!
//! ```
//! use tensor_chain::expr::{Expr, VarSpace};
//!
//! let vars = VarSpace::new(["x1", "x2"]).unwrap();
//! let f = Expr::parse("(1-x1)^2 + 100*(x1^2-x2)^2", &vars).unwrap();
//! assert_eq!(f.differentiate("x2").to_string(), "-200*x1^2 + 200*x2");
//! ```

mod parse;
mod poly;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use thiserror::Error;

use crate::tensor::{Domain, Element, JsonElement, Tensor};

pub use parse::parse_rational;
use poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    /// `position` is a 1-based character column.
    #[error("syntax error at column {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("undeclared variable {name:?} at column {position}")]
    UndeclaredVariable { name: String, position: usize },
    #[error("no value assigned to variable {0:?}")]
    MissingAssignment(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("expected {expected} coordinates, got {got}")]
    PointArity { expected: usize, got: usize },
}

/// Ordered list of distinct variable names; the order is the coordinate
/// order of every derivative tensor built over it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSpace {
    names: Vec<String>,
}

impl VarSpace {
    pub fn new<I, S>(names: I) -> Result<Self, ExprError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(ExprError::InvalidVariable(name));
            }
            if out.contains(&name) {
                return Err(ExprError::DuplicateVariable(name));
            }
            out.push(name);
        }
        Ok(VarSpace { names: out })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Pairs the variables with coordinates, in order.
    pub fn assign<N: Clone>(&self, values: &[N]) -> Result<HashMap<String, N>, ExprError> {
        if values.len() != self.names.len() {
            return Err(ExprError::PointArity {
                expected: self.names.len(),
                got: values.len(),
            });
        }
        Ok(self
            .names
            .iter()
            .cloned()
            .zip(values.iter().cloned())
            .collect())
    }
}

impl fmt::Display for VarSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Node kinds of an expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const(BigRational),
    Var(Arc<str>),
    Neg(Expr),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, u32),
}

/// Shared immutable expression tree. `==` is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: BigRational) -> Expr {
        Expr::from_node(Node::Const(value))
    }

    pub fn int(value: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Expr {
        Expr::from_node(Node::Var(Arc::from(name)))
    }

    /// Raw negation node; not simplified.
    pub fn negation(e: Expr) -> Expr {
        Expr::from_node(Node::Neg(e))
    }

    /// Raw sum node; not simplified.
    pub fn add(terms: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Add(terms))
    }

    /// Raw product node; not simplified.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Mul(factors))
    }

    /// Raw power node; not simplified.
    pub fn pow(base: Expr, exp: u32) -> Expr {
        Expr::from_node(Node::Pow(base, exp))
    }

    /// Parses and simplifies; every identifier must be declared in `vars`.
    pub fn parse(text: &str, vars: &VarSpace) -> Result<Expr, ExprError> {
        Ok(parse::parse_raw(text, Some(vars))?.simplify())
    }

    /// Parses without simplifying.
    pub fn parse_raw(text: &str, vars: &VarSpace) -> Result<Expr, ExprError> {
        parse::parse_raw(text, Some(vars))
    }

    /// Parses and simplifies, accepting any identifier.
    pub fn parse_free(text: &str) -> Result<Expr, ExprError> {
        Ok(parse::parse_raw(text, None)?.simplify())
    }

    pub fn simplify(&self) -> Expr {
        Poly::from_expr(self).to_expr()
    }

    pub fn as_constant(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant().is_some_and(Zero::is_zero)
    }

    /// Total degree of the expanded polynomial (0 for constants).
    pub fn degree(&self) -> u32 {
        Poly::from_expr(self).degree()
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(v.to_string());
            }
            Node::Neg(a) | Node::Pow(a, _) => a.collect_vars(out),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
        }
    }

    fn mentions(&self, var: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(v) => &**v == var,
            Node::Neg(a) | Node::Pow(a, _) => a.mentions(var),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().any(|x| x.mentions(var)),
        }
    }

    /// Partial derivative with respect to `var`, simplified.
    pub fn differentiate(&self, var: &str) -> Expr {
        self.derivative_tree(var).simplify()
    }

    /// Sum, product and power rules applied to the tree as written.
    fn derivative_tree(&self, var: &str) -> Expr {
        if !self.mentions(var) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(_) => Expr::one(),
            Node::Neg(a) => Expr::negation(a.derivative_tree(var)),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.derivative_tree(var)).collect()),
            Node::Mul(fs) => Expr::add(
                (0..fs.len())
                    .filter(|&i| fs[i].mentions(var))
                    .map(|i| {
                        let mut factors = fs.clone();
                        factors[i] = fs[i].derivative_tree(var);
                        Expr::mul(factors)
                    })
                    .collect(),
            ),
            Node::Pow(_, 0) => Expr::zero(),
            Node::Pow(b, e) => Expr::mul(vec![
                Expr::int(i64::from(*e)),
                Expr::pow(b.clone(), e - 1),
                b.derivative_tree(var),
            ]),
        }
    }

    /// Simultaneous substitution: every occurrence of a mapped variable is
    /// replaced by its image in the original expression; images are not
    /// themselves rewritten.
    pub fn substitute<S>(&self, map: &HashMap<S, Expr>) -> Expr
    where
        S: std::hash::Hash + Eq + std::borrow::Borrow<str>,
    {
        self.substitute_tree(map).simplify()
    }

    fn substitute_tree<S>(&self, map: &HashMap<S, Expr>) -> Expr
    where
        S: std::hash::Hash + Eq + std::borrow::Borrow<str>,
    {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| self.clone()),
            Node::Neg(a) => Expr::negation(a.substitute_tree(map)),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.substitute_tree(map)).collect()),
            Node::Mul(fs) => Expr::mul(fs.iter().map(|f| f.substitute_tree(map)).collect()),
            Node::Pow(b, e) => Expr::pow(b.substitute_tree(map), *e),
        }
    }

    /// Evaluates in the numeric domain of the point: exact for rationals,
    /// floating point for `f64`.
    pub fn evaluate<N: Numeric>(&self, point: &HashMap<String, N>) -> Result<N, ExprError> {
        Ok(match self.node() {
            Node::Const(c) => N::from_rational(c),
            Node::Var(v) => point
                .get(&**v)
                .cloned()
                .ok_or_else(|| ExprError::MissingAssignment(v.to_string()))?,
            Node::Neg(a) => a.evaluate(point)?.neg_elem(),
            Node::Add(ts) => {
                let mut acc = N::zero();
                for t in ts {
                    acc = acc.add_elem(&t.evaluate(point)?);
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = N::one_elem();
                for f in fs {
                    acc = acc.mul_elem(&f.evaluate(point)?);
                }
                acc
            }
            Node::Pow(b, e) => b.evaluate(point)?.pow_elem(*e),
        })
    }
}

/// Semantic equality of two polynomials. Compares canonical forms first;
/// if they differ structurally, falls back to agreement at 20 pseudo-random
/// rational points (fixed seed).
pub fn expr_equal(a: &Expr, b: &Expr) -> bool {
    let (sa, sb) = (a.simplify(), b.simplify());
    if sa == sb {
        return true;
    }
    let vars: BTreeSet<String> = sa.variables().union(&sb.variables()).cloned().collect();
    let mut rng = StdRng::seed_from_u64(0x7e45_0c4a);
    (0..20).all(|_| {
        let point: HashMap<String, BigRational> = vars
            .iter()
            .map(|v| {
                let num = BigInt::from(rng.gen_range(-60i64..=60));
                let den = BigInt::from(rng.gen_range(1i64..=17));
                (v.clone(), BigRational::new(num, den))
            })
            .collect();
        sa.evaluate(&point).ok() == sb.evaluate(&point).ok()
    })
}

/// Same shape and [`expr_equal`] entries.
pub fn tensor_expr_equal(a: &Tensor<Expr>, b: &Tensor<Expr>) -> bool {
    a.shape() == b.shape() && a.data().iter().zip(b.data()).all(|(x, y)| expr_equal(x, y))
}

/// Numeric domains an expression can be evaluated in.
pub trait Numeric: Element {
    fn from_rational(r: &BigRational) -> Self;
    fn one_elem() -> Self;
    fn neg_elem(&self) -> Self;

    fn pow_elem(&self, exp: u32) -> Self {
        let mut acc = Self::one_elem();
        for _ in 0..exp {
            acc = acc.mul_elem(self);
        }
        acc
    }
}

impl Numeric for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn one_elem() -> Self {
        1.0
    }
    fn neg_elem(&self) -> Self {
        -self
    }
    fn pow_elem(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

impl Numeric for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn one_elem() -> Self {
        One::one()
    }
    fn neg_elem(&self) -> Self {
        -self
    }
    fn pow_elem(&self, exp: u32) -> Self {
        num::pow(self.clone(), exp as usize)
    }
}

impl Element for Expr {
    const DOMAIN: Domain = Domain::Symbolic;

    fn zero() -> Self {
        Expr::zero()
    }

    fn add_elem(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn mul_elem(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn sum<'a, I>(items: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        let mut acc = Poly::zero();
        for x in items {
            acc.add_assign(&Poly::from_expr(x));
        }
        acc.to_expr()
    }

    fn sum_of_products<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (&'a Self, &'a Self)>,
    {
        let mut acc = Poly::zero();
        for (a, b) in terms {
            if a.is_zero() || b.is_zero() {
                continue;
            }
            acc.add_assign(&Poly::from_expr(a).mul(&Poly::from_expr(b)));
        }
        acc.to_expr()
    }
}

impl JsonElement for Expr {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(value: &Value) -> Result<Self, String> {
        match value {
            Value::String(s) => Expr::parse_free(s).map_err(|e| e.to_string()),
            Value::Number(_) => BigRational::from_json(value).map(Expr::constant),
            other => Err(format!("expected an expression string, got {other}")),
        }
    }
}

impl From<BigRational> for Expr {
    fn from(value: BigRational) -> Self {
        Expr::constant(value)
    }
}

impl From<i64> for Expr {
    fn from(value: i64) -> Self {
        Expr::int(value)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let ($a, $b) = (self, rhs);
                $body
            }
        }
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                ops::$trait::$method(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                ops::$trait::$method(&self, rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let mut p = Poly::from_expr(a);
    p.add_assign(&Poly::from_expr(b));
    p.to_expr()
});
binop!(Sub, sub, |a, b| {
    let mut p = Poly::from_expr(a);
    p.add_assign(&Poly::from_expr(b).neg());
    p.to_expr()
});
binop!(Mul, mul, |a, b| Poly::from_expr(a)
    .mul(&Poly::from_expr(b))
    .to_expr());

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Poly::from_expr(self).neg().to_expr()
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

/// `n` for integers, `p/q` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// Printing precedence levels.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_FACTOR: u8 = 3;
const PREC_ATOM: u8 = 4;

fn node_prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(ts) if ts.len() > 1 => PREC_SUM,
        Node::Mul(fs) if fs.len() > 1 => PREC_PRODUCT,
        Node::Pow(..) => PREC_FACTOR,
        _ => PREC_ATOM,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if node_prec(e) < min_prec {
        f.write_str("(")?;
        write_expr(f, e)?;
        f.write_str(")")
    } else {
        write_expr(f, e)
    }
}

/// For a term printed after a binary minus: the negated term, if the term
/// reads as negative.
fn negated_term(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Const(c) if c.is_negative() => Some(Expr::constant(-c)),
        Node::Neg(inner) => Some(inner.clone()),
        Node::Mul(fs) => match fs.first().map(Expr::node) {
            Some(Node::Const(c)) if c.is_negative() => {
                let c = -c;
                let mut rest: Vec<Expr> = fs[1..].to_vec();
                if !c.is_one() {
                    rest.insert(0, Expr::constant(c));
                }
                Some(match rest.len() {
                    0 => Expr::one(),
                    1 => rest.pop().expect("one factor"),
                    _ => Expr::mul(rest),
                })
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Const(c) => f.write_str(&format_rational(c)),
        Node::Var(v) => f.write_str(v),
        Node::Neg(a) => {
            f.write_str("-")?;
            match a.node() {
                Node::Var(_) => write_expr(f, a),
                Node::Const(c) if !c.is_negative() => write_expr(f, a),
                _ => {
                    f.write_str("(")?;
                    write_expr(f, a)?;
                    f.write_str(")")
                }
            }
        }
        Node::Add(ts) => {
            if ts.is_empty() {
                return f.write_str("0");
            }
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_at(f, t, PREC_PRODUCT)?;
                } else if let Some(pos) = negated_term(t) {
                    f.write_str(" - ")?;
                    write_at(f, &pos, PREC_PRODUCT)?;
                } else {
                    f.write_str(" + ")?;
                    write_at(f, t, PREC_PRODUCT)?;
                }
            }
            Ok(())
        }
        Node::Mul(fs) => {
            if fs.is_empty() {
                return f.write_str("1");
            }
            let mut rest = &fs[..];
            // `-x*y` reads as (-x)*y, which is fine; `-x^2` would read as
            // (-x)^2, so a unit negative coefficient before a power stays
            // explicit as `-1*`.
            if let (Node::Const(c), Some(next)) = (fs[0].node(), fs.get(1)) {
                if c == &-BigRational::one() && matches!(next.node(), Node::Var(_)) {
                    f.write_str("-")?;
                    rest = &fs[1..];
                }
            }
            for (i, x) in rest.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                write_at(f, x, PREC_FACTOR)?;
            }
            Ok(())
        }
        Node::Pow(b, exp) => {
            write_at(f, b, PREC_ATOM)?;
            write!(f, "^{exp}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}
