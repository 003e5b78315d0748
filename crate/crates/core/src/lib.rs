//! Numerical verification engine for Clifford-bundle general relativity.

pub mod cforms;
pub mod dirac;
pub mod expr;
pub mod fixtures;
pub mod einstein;
pub mod geometry;
pub mod jet;
pub mod metric;
pub mod report;
pub mod sampling;
pub mod stal;
pub mod suite;

pub use expr::{parse, Expr, ExprError};
pub use geometry::{GeometryError, Snapshot};
pub use jet::{Jet, Jet3, MvJet};
pub use stal::{BladeIndex, Multivector, Role};
pub use metric::{MetricError, MetricSpec, StressEnergySpec};
