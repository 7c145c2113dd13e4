//! Runs the code listings of the guide in `book/src` as doc-tests, one
//! module per chapter so a failure points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/tensors.md")]
pub mod tensors {}
#[doc = include_str!("../../../book/src/expressions.md")]
pub mod expressions {}
#[doc = include_str!("../../../book/src/derivatives.md")]
pub mod derivatives {}
#[doc = include_str!("../../../book/src/chain-rule.md")]
pub mod chain_rule {}
#[doc = include_str!("../../../book/src/rosenbrock.md")]
pub mod rosenbrock {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
