//! The chapters of the book under `book/src`, compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}
#[doc = include_str!("../../../book/src/crgs.md")]
pub mod crgs {}
#[doc = include_str!("../../../book/src/curves.md")]
pub mod curves {}
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}
#[doc = include_str!("../../../book/src/oracles.md")]
pub mod oracles {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
