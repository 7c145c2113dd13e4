//! Seeded generators for property tests and the acceptance suite.

use rand::Rng;

use crate::chain::CompositionProblem;
use crate::deriv::VectorFunction;
use crate::expr::{Expr, VarSpace};
use crate::tensor::{Shape, Tensor};

/// Limits for [`random_problem`].
#[derive(Debug, Clone, Copy)]
pub struct ProblemLimits {
    pub max_x: usize,
    pub max_y: usize,
    pub outer_degree: u32,
    pub inner_degree: u32,
    pub max_terms: usize,
}

impl Default for ProblemLimits {
    fn default() -> Self {
        ProblemLimits {
            max_x: 3,
            max_y: 3,
            outer_degree: 3,
            inner_degree: 2,
            max_terms: 4,
        }
    }
}

fn nonzero_coefficient<R: Rng>(rng: &mut R) -> i64 {
    let c = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        -c
    } else {
        c
    }
}

/// Sum of up to `max_terms` monomials with integer coefficients in
/// `[-3, 3] \ {0}` and total degree at most `max_degree`.
pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    vars: &VarSpace,
    max_degree: u32,
    max_terms: usize,
) -> Expr {
    let count = rng.gen_range(1..=max_terms.max(1));
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let mut factors = vec![Expr::int(nonzero_coefficient(rng))];
        let degree = rng.gen_range(0..=max_degree);
        for _ in 0..degree {
            if vars.is_empty() {
                break;
            }
            let v = &vars.names()[rng.gen_range(0..vars.len())];
            factors.push(Expr::var(v));
        }
        terms.push(Expr::mul(factors));
    }
    Expr::add(terms).simplify()
}

fn var_space(prefix: &str, n: usize) -> VarSpace {
    VarSpace::new((1..=n).map(|i| format!("{prefix}{i}"))).expect("distinct names")
}

/// A scalar `f(y)` over `y1..yn` and `g(x)` over `x1..xm`.
pub fn random_problem<R: Rng>(rng: &mut R, limits: &ProblemLimits) -> CompositionProblem {
    let m = rng.gen_range(1..=limits.max_x.max(1));
    let n = rng.gen_range(1..=limits.max_y.max(1));
    let xs = var_space("x", m);
    let ys = var_space("y", n);
    let f = random_polynomial(rng, &ys, limits.outer_degree, limits.max_terms);
    let g = (0..n)
        .map(|_| random_polynomial(rng, &xs, limits.inner_degree, limits.max_terms))
        .collect();
    let outer = VectorFunction::scalar(f, ys).expect("f uses only y variables");
    let inner = VectorFunction::new(g, xs).expect("g uses only x variables");
    CompositionProblem::new(outer, inner).expect("arity matches")
}

/// Tensor of the given shape filled with random polynomials.
pub fn random_expr_tensor<R: Rng>(
    rng: &mut R,
    dims: &[usize],
    vars: &VarSpace,
    max_degree: u32,
) -> Tensor<Expr> {
    let shape = Shape::new(dims.to_vec()).expect("positive extents");
    let data = (0..shape.len())
        .map(|_| random_polynomial(rng, vars, max_degree, 3))
        .collect();
    Tensor::new(shape, data).expect("matching length")
}

/// Uniform point in `[-bound, bound]^m`.
pub fn random_point<R: Rng>(rng: &mut R, m: usize, bound: f64) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-bound..=bound)).collect()
}
