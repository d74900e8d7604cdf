//! Numerical laboratory for the continuity equation.

pub mod error;
pub mod experiments;
pub mod fields;
pub mod lagrangian;
pub mod quadrature;
pub mod solver;
pub mod transport;

pub use error::{Error, Result};

/// The guide, compiled so its snippets run as doc-tests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    pub mod fields {}
    #[doc = include_str!("../../../book/src/transport.md")]
    pub mod transport {}
    #[doc = include_str!("../../../book/src/solver.md")]
    pub mod solver {}
    #[doc = include_str!("../../../book/src/lagrangian.md")]
    pub mod lagrangian {}
    #[doc = include_str!("../../../book/src/studies.md")]
    pub mod studies {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
