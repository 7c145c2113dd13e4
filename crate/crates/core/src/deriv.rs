//! Derivative tensors.
//!
//! Differentiating a tensor `a[i]` whose entries depend on `u = (u1, .., um)`
//! gives `(Da)[i, j] = ∂a[i]/∂u_j`: one more axis, of extent `m`, appended
//! after all existing axes. Repeating the step builds `D^k a` with `k`
//! trailing derivative axes in differentiation order. A [`DerivativeTensor`]
//! records how many leading axes index values and how many trailing axes are
//! derivative axes.
//!
//! Some libraries put the new derivative axis *first* instead; results from
//! such a library can be compared after [`crate::tensor::permute_axes`].
//!
//! ```
//! use tensor_chain::deriv::{jacobian, VectorFunction};
//! use tensor_chain::expr::VarSpace;
//!
//! let x = VarSpace::new(["x1", "x2"]).unwrap();
//! let g = VectorFunction::parse(&["x1", "x1^2 - x2"], &x).unwrap();
//! let jg = jacobian(&g);
//! assert_eq!(jg.values().to_string(), "[[1, 0], [2*x1, -1]]");
//! ```

use std::collections::HashMap;

use serde_json::Value;
use thiserror::Error;

use crate::expr::{Expr, ExprError, Numeric, VarSpace};
use crate::tensor::{is_symmetric_in_axes, Shape, Tensor, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DerivError {
    #[error("component {index} uses variable {name:?}, which is not in {vars}")]
    UnknownVariable {
        index: usize,
        name: String,
        vars: VarSpace,
    },
    #[error("expected a scalar function, got {0} components")]
    NotScalar(usize),
    #[error("a vector function needs at least one component")]
    NoComponents,
    #[error("derivative order must be at least 1")]
    ZeroOrder,
    #[error("inconsistent derivative tensor: {0}")]
    Malformed(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// `g = (g1, .., gn)` over an ordered variable list. A scalar function is a
/// single component flagged so that its derivative tensors drop the value
/// axis: the gradient has shape `(m)` and the Hessian `(m, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFunction {
    components: Vec<Expr>,
    vars: VarSpace,
    scalar: bool,
}

impl VectorFunction {
    pub fn new(components: Vec<Expr>, vars: VarSpace) -> Result<Self, DerivError> {
        if components.is_empty() {
            return Err(DerivError::NoComponents);
        }
        for (index, c) in components.iter().enumerate() {
            if let Some(name) = c.variables().into_iter().find(|v| !vars.contains(v)) {
                return Err(DerivError::UnknownVariable {
                    index,
                    name,
                    vars: vars.clone(),
                });
            }
        }
        Ok(VectorFunction {
            components,
            vars,
            scalar: false,
        })
    }

    pub fn scalar(component: Expr, vars: VarSpace) -> Result<Self, DerivError> {
        let mut f = Self::new(vec![component], vars)?;
        f.scalar = true;
        Ok(f)
    }

    /// Parses one expression per component.
    pub fn parse(components: &[&str], vars: &VarSpace) -> Result<Self, DerivError> {
        let exprs = components
            .iter()
            .map(|s| Expr::parse(s, vars))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(exprs, vars.clone())
    }

    pub fn parse_scalar(text: &str, vars: &VarSpace) -> Result<Self, DerivError> {
        Self::scalar(Expr::parse(text, vars)?, vars.clone())
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn vars(&self) -> &VarSpace {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.scalar
    }

    /// Order-0 derivative tensor: the components themselves.
    pub fn as_tensor(&self) -> DerivativeTensor {
        let (values, value_axes) = if self.scalar {
            (Tensor::scalar(self.components[0].clone()), 0)
        } else {
            let values = Tensor::from_vec(&[self.components.len()], self.components.clone())
                .expect("at least one component");
            (values, 1)
        };
        DerivativeTensor {
            values,
            value_axes,
            deriv_axes: 0,
            vars: self.vars.clone(),
        }
    }

    pub fn evaluate<N: Numeric>(&self, point: &[N]) -> Result<Vec<N>, ExprError> {
        let assignment = self.vars.assign(point)?;
        self.components
            .iter()
            .map(|c| c.evaluate(&assignment))
            .collect()
    }
}

/// A tensor of expressions with `value_axes` leading axes followed by
/// `deriv_axes` derivative axes, each of extent `vars.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTensor {
    values: Tensor<Expr>,
    value_axes: usize,
    deriv_axes: usize,
    vars: VarSpace,
}

impl DerivativeTensor {
    pub fn from_parts(
        values: Tensor<Expr>,
        value_axes: usize,
        deriv_axes: usize,
        vars: VarSpace,
    ) -> Result<Self, DerivError> {
        if values.rank() != value_axes + deriv_axes {
            return Err(DerivError::Malformed(format!(
                "rank {} but {value_axes} value axes and {deriv_axes} derivative axes",
                values.rank()
            )));
        }
        if let Some(&bad) = values.dims()[value_axes..]
            .iter()
            .find(|&&d| d != vars.len())
        {
            return Err(DerivError::Malformed(format!(
                "derivative axis of extent {bad} over {} variables",
                vars.len()
            )));
        }
        for (index, e) in values.data().iter().enumerate() {
            if let Some(name) = e.variables().into_iter().find(|v| !vars.contains(v)) {
                return Err(DerivError::UnknownVariable { index, name, vars });
            }
        }
        Ok(DerivativeTensor {
            values,
            value_axes,
            deriv_axes,
            vars,
        })
    }

    /// Treats every axis of `values` as a value axis.
    pub fn from_values(values: Tensor<Expr>, vars: VarSpace) -> Result<Self, DerivError> {
        let rank = values.rank();
        Self::from_parts(values, rank, 0, vars)
    }

    pub fn values(&self) -> &Tensor<Expr> {
        &self.values
    }

    pub fn into_values(self) -> Tensor<Expr> {
        self.values
    }

    pub fn value_axes(&self) -> usize {
        self.value_axes
    }

    pub fn deriv_axes(&self) -> usize {
        self.deriv_axes
    }

    pub fn vars(&self) -> &VarSpace {
        &self.vars
    }

    pub fn dims(&self) -> &[usize] {
        self.values.dims()
    }

    /// Positions of the derivative axes.
    pub fn derivative_axis_indices(&self) -> Vec<usize> {
        (self.value_axes..self.value_axes + self.deriv_axes).collect()
    }

    /// Whether the entries are invariant under permuting derivative axes.
    pub fn is_symmetric(&self) -> bool {
        is_symmetric_in_axes(&self.values, &self.derivative_axis_indices())
            .expect("derivative axes share one extent")
    }

    pub fn eval<N: Numeric>(&self, point: &HashMap<String, N>) -> Result<Tensor<N>, ExprError> {
        eval_exprs(&self.values, point)
    }

    /// Evaluates at coordinates given in `vars` order.
    pub fn eval_at<N: Numeric>(&self, coords: &[N]) -> Result<Tensor<N>, ExprError> {
        self.eval(&self.vars.assign(coords)?)
    }

    /// Tensor JSON plus `value_axes`, `deriv_axes` and `vars`.
    pub fn to_json(&self) -> Value {
        let mut obj = self.values.to_json();
        let map = obj.as_object_mut().expect("tensor JSON is an object");
        map.insert("value_axes".into(), Value::from(self.value_axes));
        map.insert("deriv_axes".into(), Value::from(self.deriv_axes));
        map.insert("vars".into(), Value::from(self.vars.names().to_vec()));
        obj
    }

    pub fn from_json(value: &Value) -> Result<Self, DerivError> {
        let field = |name: &str| {
            value
                .get(name)
                .and_then(Value::as_u64)
                .map(|n| n as usize)
                .ok_or_else(|| DerivError::Malformed(format!("missing integer {name:?}")))
        };
        let value_axes = field("value_axes")?;
        let deriv_axes = field("deriv_axes")?;
        let names = value
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| DerivError::Malformed("missing \"vars\" array".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| DerivError::Malformed(format!("bad variable name {v}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let vars = VarSpace::new(names)?;
        let values = Tensor::<Expr>::from_json(value)?;
        Self::from_parts(values, value_axes, deriv_axes, vars)
    }
}

/// Elementwise evaluation of an expression tensor.
pub fn eval_exprs<N: Numeric>(
    t: &Tensor<Expr>,
    point: &HashMap<String, N>,
) -> Result<Tensor<N>, ExprError> {
    t.try_map(|e| e.evaluate(point))
}

/// Appends one derivative axis: `result[i, j] = ∂t[i]/∂u_j`.
pub fn derivative_step(t: &DerivativeTensor) -> DerivativeTensor {
    let m = t.vars.len();
    let mut dims = t.dims().to_vec();
    dims.push(m);
    let shape = Shape::new(dims).expect("extents stay positive");
    let names = t.vars.names();
    let mut data = Vec::with_capacity(shape.len());
    for e in t.values.data() {
        for v in names {
            data.push(e.differentiate(v));
        }
    }
    DerivativeTensor {
        values: Tensor::new(shape, data).expect("row-major order appends the last axis"),
        value_axes: t.value_axes,
        deriv_axes: t.deriv_axes + 1,
        vars: t.vars.clone(),
    }
}

/// `(Dg)[i, j] = ∂g_i/∂x_j`, shape `(n, m)`. A scalar function is treated as
/// a single-component map here, giving shape `(1, m)`.
pub fn jacobian(g: &VectorFunction) -> DerivativeTensor {
    let mut as_vector = g.clone();
    as_vector.scalar = false;
    derivative_step(&as_vector.as_tensor())
}

/// `D^k f`: shape `(n, m, .., m)`, or `(m, .., m)` for a scalar function.
pub fn derivative_order(f: &VectorFunction, k: usize) -> Result<DerivativeTensor, DerivError> {
    if k == 0 {
        return Err(DerivError::ZeroOrder);
    }
    let mut t = f.as_tensor();
    for _ in 0..k {
        t = derivative_step(&t);
    }
    Ok(t)
}

/// Gradient of a scalar function, shape `(m)`.
pub fn gradient(f: &VectorFunction) -> Result<DerivativeTensor, DerivError> {
    derivative_order(&scalar_view(f)?, 1)
}

/// Hessian of a scalar function, shape `(m, m)`.
pub fn hessian(f: &VectorFunction) -> Result<DerivativeTensor, DerivError> {
    derivative_order(&scalar_view(f)?, 2)
}

fn scalar_view(f: &VectorFunction) -> Result<VectorFunction, DerivError> {
    if f.len() != 1 {
        return Err(DerivError::NotScalar(f.len()));
    }
    let mut s = f.clone();
    s.scalar = true;
    Ok(s)
}

/// Free-function form of [`DerivativeTensor::eval`].
pub fn eval_tensor<N: Numeric>(
    t: &DerivativeTensor,
    point: &HashMap<String, N>,
) -> Result<Tensor<N>, ExprError> {
    t.eval(point)
}
