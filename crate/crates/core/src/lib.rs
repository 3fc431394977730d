//! Asymptotic edit distance bounds for hereditary graph properties, computed
//! from colored regularity graphs (CRGs).
//!
//! The modules follow the computation: [`graph`] holds simple graphs and
//! their clique/coclique partitions, [`crg`] the colored templates and the
//! homomorphism search, [`curves`] the `f` and `g` functionals, [`bounds`]
//! the envelope maximization, and [`oracle`] brute-force checks on small
//! graphs. [`cli`] drives everything from the command line.

use thiserror::Error;

pub mod bounds;
pub mod cli;
pub mod crg;
pub mod curves;
pub mod graph;
mod num;
pub mod oracle;

/// Any error raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Crg(#[from] crg::CrgError),
    #[error(transparent)]
    Curve(#[from] curves::CurveError),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
}

impl Error {
    /// True when a search ran out of budget before reaching an answer.
    pub fn is_indeterminate(&self) -> bool {
        matches!(
            self,
            Error::Crg(crg::CrgError::Indeterminate { .. })
                | Error::Bounds(bounds::BoundsError::Crg(crg::CrgError::Indeterminate { .. }))
        )
    }
}
