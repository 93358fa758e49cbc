pub mod brake;
pub mod coefficient;
pub mod corpus;
pub mod error;
pub mod index;
pub mod iteration;
pub mod normal_form;
pub mod path;
pub mod quadrature;
pub mod symplectic;
pub mod tolerances;

pub use error::{Error, Result};

/// The guide in `book/`, compiled here so its examples run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    pub mod conventions {}
    #[doc = include_str!("../../../book/src/paths.md")]
    pub mod paths {}
    #[doc = include_str!("../../../book/src/indices.md")]
    pub mod indices {}
    #[doc = include_str!("../../../book/src/iteration.md")]
    pub mod iteration {}
    #[doc = include_str!("../../../book/src/jumps.md")]
    pub mod jumps {}
    #[doc = include_str!("../../../book/src/brake_orbits.md")]
    pub mod brake_orbits {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../book/src/limits.md")]
    pub mod limits {}
}
