//! Evidential reasoning over multi-variable frames: Dempster-Shafer mass
//! functions and pseudo-belief functions, hypergraph and hypertree
//! structuring, directed belief networks with local propagation, and
//! independence predicates.

mod bits;
pub mod error;
pub mod format;
pub mod frames;
pub mod hyper;
pub mod independence;
pub mod mass;
pub mod network;
pub mod random;
pub mod repro;
pub mod transforms;

pub use error::{Error, Result};
pub use frames::{parse_event, project_set, vacuous_extend_set, Config, EventSet, Frame, Variable};
pub use hyper::{Edge, Hypergraph, HypertreeSequence};
pub use independence::{ci_mte, IndependenceStatement};
pub use mass::{
    mass_from_belief, mass_from_commonality, BeliefView, MassFunction, MassKind, Tolerance,
    UnnormalizedCombination,
};
pub use network::{propagate_marginal, BeliefNetwork, Dag, PropagationPlan};
