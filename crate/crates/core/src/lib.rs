//! Exact algebra of piecewise-affine circle homeomorphisms (Thompson's group
//! T included) together with a seeded Monte Carlo harness for random-walk
//! boundary statistics: contraction rates, stationary measures, dominating
//! interval counts, entropy growth and breakpoint-cocycle dynamics.
//!
//! Everything group-theoretic is exact: maps are canonical segment lists over
//! arbitrary-precision rationals, so equality, hashing and entropy counting
//! are free of rounding. Floating point enters only when a finished exact
//! statistic is converted for reporting.

pub mod boundary;
pub mod cocycle;
pub mod domination;
pub mod entropy;
pub mod error;
pub mod exact;
pub mod map;
pub mod measure;
pub mod stats;
pub mod thompson;
pub mod walk;

pub use error::{Error, Result};
pub use exact::{CirclePoint, Rational};
pub use map::{CircleArc, PiecewiseAffineCircleMap, RawSegment, Support};
pub use measure::StepDistribution;
pub use thompson::GeneratorSet;
pub use walk::Trajectory;
