//! Chain rules for `f ∘ g` with `f: R^n -> R` and `g: R^m -> R^n`.
//!
//! First order: `D(f∘g) = Df(g) · Dg`.
//! Second order: `D²(f∘g) = (D²f(g) · Dg) · Dg + Df(g) · D²g`.
//!
//! Every `·` is a generalized tensor dot product in which an axis of a
//! derivative of `f` (running over the `n` partials `∂/∂y_k`) is paired with
//! the component axis of a derivative of `g` (running over the `n`
//! components `g_k`). Derivatives of `f` are taken in `y` and then evaluated
//! at `y = g(x)` by substitution before any product is formed.
//!
//! [`hessian_chain_matrix`] computes the same Hessian with ordinary matrix
//! algebra, `Jgᵀ · Hf(g) · Jg + Σ_k ∂f/∂y_k(g) · Hg_k`, and
//! [`direct_hessian`] substitutes first and differentiates afterwards. The two
//! serve as independent checks of [`chain_second`].

use std::collections::HashMap;

use thiserror::Error;

use crate::deriv::{
    derivative_order, derivative_step, hessian, jacobian, DerivError, DerivativeTensor,
    VectorFunction,
};
use crate::expr::{Expr, VarSpace};
use crate::tensor::{dot, permute_axes, AxisPairing, Element, Tensor, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("inner map has {components} components but the outer function takes {vars} variables")]
    Arity { components: usize, vars: usize },
    #[error("outer function must be scalar, got {0} components")]
    OuterNotScalar(usize),
    #[error("operands use variables outside {0}")]
    ForeignVariables(VarSpace),
    #[error(transparent)]
    Deriv(#[from] DerivError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Outer scalar function `f` over `y` and inner map `g` over `x` with one
/// component per `y` variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionProblem {
    outer: VectorFunction,
    inner: VectorFunction,
}

impl CompositionProblem {
    pub fn new(outer: VectorFunction, inner: VectorFunction) -> Result<Self, ChainError> {
        if outer.len() != 1 {
            return Err(ChainError::OuterNotScalar(outer.len()));
        }
        if inner.len() != outer.vars().len() {
            return Err(ChainError::Arity {
                components: inner.len(),
                vars: outer.vars().len(),
            });
        }
        let outer = if outer.is_scalar() {
            outer
        } else {
            VectorFunction::scalar(outer.components()[0].clone(), outer.vars().clone())?
        };
        Ok(CompositionProblem { outer, inner })
    }

    pub fn outer(&self) -> &VectorFunction {
        &self.outer
    }

    pub fn inner(&self) -> &VectorFunction {
        &self.inner
    }

    pub fn x_vars(&self) -> &VarSpace {
        self.inner.vars()
    }

    pub fn y_vars(&self) -> &VarSpace {
        self.outer.vars()
    }

    /// `y_k -> g_k(x)`.
    pub fn substitution(&self) -> HashMap<&str, Expr> {
        self.y_vars()
            .names()
            .iter()
            .map(String::as_str)
            .zip(self.inner.components().iter().cloned())
            .collect()
    }

    /// Evaluates a tensor of `y`-expressions at `y = g(x)`.
    pub fn at_inner(&self, t: &Tensor<Expr>) -> Tensor<Expr> {
        let map = self.substitution();
        t.map(|e| e.substitute(&map))
    }

    /// `f(g(x))` as one expression.
    pub fn composed(&self) -> Expr {
        self.outer.components()[0].substitute(&self.substitution())
    }

    /// `f(g(x))` evaluated numerically through `g` then `f`, without forming
    /// the composed expression.
    pub fn eval_composed(&self, x: &[f64]) -> Result<f64, crate::expr::ExprError> {
        let y = self.inner.evaluate(x)?;
        Ok(self.outer.evaluate(&y)?[0])
    }
}

/// Which derivative axis of `D²f(g)` meets the first copy of `Dg`. By
/// symmetry of `D²f` the choice does not change the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingOrder {
    /// Second derivative axis first, then the surviving first axis.
    #[default]
    LastAxisFirst,
    /// First derivative axis first, then the surviving second axis.
    FirstAxisFirst,
}

/// Derivative of `a ∘ b` where `a` holds functions of `z` and `b` maps `u` to
/// `z`: `D(a∘b)[i, j] = Σ_k (∂a[i]/∂z_k)(b(u)) · ∂b_k/∂u_j`. The result has
/// `a`'s axes as value axes and one derivative axis over `u`.
pub fn compose_derivative(
    a: &DerivativeTensor,
    b: &VectorFunction,
) -> Result<DerivativeTensor, ChainError> {
    if b.len() != a.vars().len() {
        return Err(ChainError::Arity {
            components: b.len(),
            vars: a.vars().len(),
        });
    }
    let da = derivative_step(a);
    let map: HashMap<&str, Expr> = a
        .vars()
        .names()
        .iter()
        .map(String::as_str)
        .zip(b.components().iter().cloned())
        .collect();
    let da_at_b = da.values().map(|e| e.substitute(&map));
    let jb = jacobian(b);
    let last = da_at_b.rank() - 1;
    let out = dot(&da_at_b, jb.values(), &AxisPairing::single(last, 0))?;
    let rank = out.rank();
    Ok(DerivativeTensor::from_parts(
        out,
        rank - 1,
        1,
        b.vars().clone(),
    )?)
}

/// `Df(g) · Dg`, the gradient of `f∘g`, shape `(m)`.
pub fn chain_first(p: &CompositionProblem) -> Result<DerivativeTensor, ChainError> {
    compose_derivative(&p.outer.as_tensor(), &p.inner)
}

/// The two terms of the second-order chain rule, each of shape `(m, m)`:
/// `(D²f(g)·Dg)·Dg` and `Df(g)·D²g`.
pub fn chain_second_terms(
    p: &CompositionProblem,
    order: PairingOrder,
) -> Result<(Tensor<Expr>, Tensor<Expr>), ChainError> {
    let df = derivative_order(&p.outer, 1)?;
    let d2f = derivative_order(&p.outer, 2)?;
    let jg = jacobian(&p.inner);
    let d2g = derivative_order(&p.inner, 2)?;

    let d2f_g = p.at_inner(d2f.values());
    let df_g = p.at_inner(df.values());

    // (n, n) · (n, m) -> (n, m), then (n, m) · (n, m) -> (m, m)
    let first_axis = match order {
        PairingOrder::LastAxisFirst => 1,
        PairingOrder::FirstAxisFirst => 0,
    };
    let half = dot(&d2f_g, jg.values(), &AxisPairing::single(first_axis, 0))?;
    let term1 = dot(&half, jg.values(), &AxisPairing::single(0, 0))?;
    // (n) · (n, m, m) -> (m, m)
    let term2 = dot(&df_g, d2g.values(), &AxisPairing::single(0, 0))?;
    Ok((term1, term2))
}

/// Hessian of `f∘g` by the second-order chain rule.
pub fn chain_second(p: &CompositionProblem) -> Result<DerivativeTensor, ChainError> {
    chain_second_with(p, PairingOrder::default())
}

pub fn chain_second_with(
    p: &CompositionProblem,
    order: PairingOrder,
) -> Result<DerivativeTensor, ChainError> {
    let (t1, t2) = chain_second_terms(p, order)?;
    Ok(DerivativeTensor::from_parts(
        t1.try_add(&t2)?,
        0,
        2,
        p.x_vars().clone(),
    )?)
}

/// Row-major matrix of expressions used only by [`hessian_chain_matrix`].
#[derive(Debug, Clone)]
struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl Matrix {
    fn from_tensor(t: &Tensor<Expr>) -> Matrix {
        let (rows, cols) = match t.dims() {
            [r, c] => (*r, *c),
            dims => panic!("expected a rank-2 tensor, got shape {dims:?}"),
        };
        Matrix {
            rows,
            cols,
            data: t.data().to_vec(),
        }
    }

    fn at(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.at(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut data = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                data.push(Expr::sum_of_products(
                    (0..self.cols).map(|k| (self.at(i, k), rhs.at(k, j))),
                ));
            }
        }
        Matrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        }
    }

    fn scaled_add(&mut self, factor: &Expr, rhs: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a = &*a + &(factor * b);
        }
    }

    fn into_tensor(self) -> Tensor<Expr> {
        Tensor::from_vec(&[self.rows, self.cols], self.data).expect("rows * cols entries")
    }
}

/// `Jgᵀ · Hf(g) · Jg + Σ_k ∂f/∂y_k(g) · Hg_k` with plain matrix products.
pub fn hessian_chain_matrix(p: &CompositionProblem) -> Result<DerivativeTensor, ChainError> {
    let jg = Matrix::from_tensor(jacobian(&p.inner).values());
    let hf_g = Matrix::from_tensor(&p.at_inner(hessian(&p.outer)?.values()));
    let grad_f = derivative_order(&p.outer, 1)?;
    let grad_f_g = p.at_inner(grad_f.values());

    let mut h = jg.transpose().matmul(&hf_g).matmul(&jg);
    for (k, gk) in p.inner.components().iter().enumerate() {
        let hg_k = hessian(&VectorFunction::scalar(gk.clone(), p.x_vars().clone())?)?;
        h.scaled_add(&grad_f_g.data()[k], &Matrix::from_tensor(hg_k.values()));
    }
    Ok(DerivativeTensor::from_parts(
        h.into_tensor(),
        0,
        2,
        p.x_vars().clone(),
    )?)
}

/// Substitute `y = g(x)` into `f`, then take the Hessian in `x`.
pub fn direct_hessian(p: &CompositionProblem) -> Result<DerivativeTensor, ChainError> {
    Ok(hessian(&VectorFunction::scalar(
        p.composed(),
        p.x_vars().clone(),
    )?)?)
}

/// Both sides of `D(a·b) = Da·b + a·Db` for the dot product over `pairing`,
/// with the derivative axis last on each side.
pub fn product_rule_sides(
    a: &Tensor<Expr>,
    b: &Tensor<Expr>,
    vars: &VarSpace,
    pairing: &AxisPairing,
) -> Result<(DerivativeTensor, DerivativeTensor), ChainError> {
    let a_t = DerivativeTensor::from_values(a.clone(), vars.clone())
        .map_err(|_| ChainError::ForeignVariables(vars.clone()))?;
    let b_t = DerivativeTensor::from_values(b.clone(), vars.clone())
        .map_err(|_| ChainError::ForeignVariables(vars.clone()))?;

    let ab = DerivativeTensor::from_values(dot(a, b, pairing)?, vars.clone())?;
    let lhs = derivative_step(&ab);

    let da = derivative_step(&a_t);
    let db = derivative_step(&b_t);

    // Da·b leaves the derivative axis between a's and b's surviving axes.
    let da_b = dot(da.values(), b, pairing)?;
    let deriv_pos = a.rank() - pairing.len();
    let mut perm: Vec<usize> = (0..da_b.rank()).filter(|&ax| ax != deriv_pos).collect();
    perm.push(deriv_pos);
    let da_b = permute_axes(&da_b, &perm)?;

    let a_db = dot(a, db.values(), pairing)?;
    let rhs_values = da_b.try_add(&a_db)?;
    let rank = rhs_values.rank();
    let rhs = DerivativeTensor::from_parts(rhs_values, rank - 1, 1, vars.clone())?;
    Ok((lhs, rhs))
}
