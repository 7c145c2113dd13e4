//! Canonical expanded form: a map from monomials to nonzero rational
//! coefficients. Every simplified [`Expr`] is the tree image of one of these.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};

use super::{Expr, Node};

/// Product of variable powers, sorted by variable name, exponents > 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub(crate) struct Monomial(Vec<(Arc<str>, u32)>);

impl Monomial {
    pub(crate) fn var(name: Arc<str>) -> Self {
        Monomial(vec![(name, 1)])
    }

    pub(crate) fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

/// Graded lexicographic order with variables ranked by name. The canonical
/// printing order is descending.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            let (mut i, mut j) = (0, 0);
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some((na, ea)), Some((nb, eb))) => match na.cmp(nb) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(eb);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly::default()
    }

    pub(crate) fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::default(), c);
        }
        p
    }

    pub(crate) fn var(name: Arc<str>) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(Monomial::var(name), BigRational::one());
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, mono: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub(crate) fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub(crate) fn pow(&self, mut exp: u32) -> Poly {
        let mut result = Poly::constant(BigRational::one());
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub(crate) fn from_expr(e: &Expr) -> Poly {
        match e.node() {
            Node::Const(c) => Poly::constant(c.clone()),
            Node::Var(v) => Poly::var(v.clone()),
            Node::Neg(a) => Poly::from_expr(a).neg(),
            Node::Add(ts) => {
                let mut acc = Poly::zero();
                for t in ts {
                    acc.add_assign(&Poly::from_expr(t));
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = Poly::constant(BigRational::one());
                for f in fs {
                    if acc.is_zero() {
                        break;
                    }
                    acc = acc.mul(&Poly::from_expr(f));
                }
                acc
            }
            Node::Pow(b, e) => Poly::from_expr(b).pow(*e),
        }
    }

    /// Canonical tree: terms in descending graded-lex order, coefficient
    /// first, unit coefficients omitted.
    pub(crate) fn to_expr(&self) -> Expr {
        let mut terms: Vec<Expr> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| term_expr(m, c))
            .collect();
        match terms.len() {
            0 => Expr::constant(BigRational::zero()),
            1 => terms.pop().expect("one term"),
            _ => Expr::from_node(Node::Add(terms)),
        }
    }
}

fn term_expr(mono: &Monomial, coeff: &BigRational) -> Expr {
    if mono.0.is_empty() {
        return Expr::constant(coeff.clone());
    }
    let mut factors: Vec<Expr> = Vec::with_capacity(mono.0.len() + 1);
    if !coeff.is_one() {
        factors.push(Expr::constant(coeff.clone()));
    }
    for (name, e) in &mono.0 {
        let v = Expr::from_node(Node::Var(name.clone()));
        factors.push(if *e == 1 {
            v
        } else {
            Expr::from_node(Node::Pow(v, *e))
        });
    }
    if factors.len() == 1 {
        factors.pop().expect("one factor")
    } else {
        Expr::from_node(Node::Mul(factors))
    }
}
