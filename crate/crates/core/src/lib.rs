//! Monge-Kantorovich metrics, inductive limits and Lipschitz isomorphisms of
//! finite-dimensional compact quantum metric spaces.
//!
//! Everything is generic over the real scalar `T: Scalar` (`f32` or `f64`);
//! the `*F64` aliases below cover the common case.

pub mod algebra;
pub mod error;
pub mod hom;
pub mod inductive;
pub mod ladder;
pub mod linalg;
pub mod lp;
pub mod mk;
pub mod sampling;
pub mod scalar;
pub mod seminorm;

pub use algebra::{AlgElement, AlgState, FiniteDimAlgebra};
pub use error::{CqmsError, Result};
pub use hom::UnitalHom;
pub use inductive::{InductiveSequence, LimitElement, ProductMetric, StateTower, TowerPair};
pub use ladder::{BoundSequences, Ladder, Provenance};
pub use mk::{MetricResult, SolverConfig, SolverMethod};
pub use scalar::Scalar;
pub use seminorm::{AxiomReport, Geometry, LipSeminorm, SeminormKind};

pub use nalgebra::{Complex, DMatrix};

pub type AlgElementF64 = AlgElement<f64>;
pub type AlgStateF64 = AlgState<f64>;
pub type UnitalHomF64 = UnitalHom<f64>;
pub type LipSeminormF64 = LipSeminorm<f64>;
pub type LadderF64 = Ladder<f64>;
pub type InductiveSequenceF64 = InductiveSequence<f64>;
