//! Structure learning, identifiability and uniqueness diagnostics for
//! `H`-colorings and hard-constraint spin systems.

pub mod conditions;
mod csp;
pub mod enumeration;
pub mod error;
pub mod experiments;
pub mod gadgets;
pub mod identifiability;
pub mod learner;
pub mod measure;
pub mod model;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{
    build_gij, build_gij2, is_valid_coloring, Color, Coloring, ConstraintGraph, LabeledSupergraph,
    Potential, SpinSystem, TargetGraph, VertexTag, WeightedGraph, MAX_COLORS,
};
pub use scalar::Scalar;

pub type SpinSystemF64 = SpinSystem<f64>;
pub type WeightedGraphF64 = WeightedGraph<f64>;
pub type ExactSpinSystem = SpinSystem<num_rational::BigRational>;
pub type ExactWeightedGraph = WeightedGraph<num_rational::BigRational>;
