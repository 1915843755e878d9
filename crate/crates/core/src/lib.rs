//! Box-dimension bounds for graphs of generalized affine recurrent fractal
//! interpolation functions.
//!
//! The pipeline runs in this order:
//!
//! 1. [`spec`] parses and validates an instance (nodes, affine maps, polynomial
//!    scaling and offset functions).
//! 2. [`graph`] builds the address digraph, its cycle-bearing strongly connected
//!    components and the position function.
//! 3. [`partition`] constructs the per-component grid of basic intervals and the
//!    surviving index sets.
//! 4. [`scaling`] builds restricted vertical scaling matrices and their spectral radii.
//! 5. [`function`] solves the fixed-point equation on a grid, measures oscillation
//!    and certifies infinite variation.
//! 6. [`dimension`] assembles the bounds and cross-checks them by box counting.

pub mod cli;
pub mod dimension;
pub mod error;
pub mod function;
pub mod graph;
pub mod partition;
pub mod poly;
pub mod rational;
pub mod scaling;
pub mod spec;

pub use error::{Error, Result};
pub use poly::Polynomial;
pub use rational::{AffineMap, Interval, Rational};
pub use spec::{parse_spec, validate_spec, RfifSpec};
