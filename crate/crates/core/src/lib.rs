//! Higher-order derivative tensors of composed vector-valued functions.
//!
//! The crate is organized bottom-up:
//!
//! - [`tensor`]: dense tensors, outer products, contraction and the
//!   generalized dot product over explicit axis pairings.
//! - [`expr`]: exact polynomial expression trees with parsing, simplification,
//!   differentiation and substitution.
//! - [`deriv`]: derivative tensors. Each differentiation appends one axis,
//!   always as the last axis.
//! - [`chain`]: first- and second-order chain rules for `f ∘ g`, the
//!   matrix form of the Hessian chain rule, a direct-substitution oracle and
//!   the tensor product rule.
//! - [`fd`]: central finite differences and tensor comparison reports.
//! - [`problem`]: the line-oriented problem file format used by the CLI.
//! - [`random`]: seeded generators for randomized polynomial problems.

pub mod chain;
pub mod deriv;
pub mod expr;
pub mod fd;
pub mod problem;
pub mod random;
pub mod tensor;

pub use chain::{ChainError, CompositionProblem};
pub use deriv::{DerivError, DerivativeTensor, VectorFunction};
pub use expr::{expr_equal, tensor_expr_equal, Expr, ExprError, VarSpace};
pub use fd::{compare_tensors, fd_gradient, fd_hessian, ComparisonReport, FdConfig};
pub use tensor::{AxisPairing, Shape, Tensor, TensorError};
