//! Routing a single repair crew through a storm-damaged power distribution
//! network under incomplete fault information.
//!
//! The grid is a tree rooted at a substation (node 1). Every node is dark;
//! each is faulty with a known probability, but faults are only revealed
//! when power reaches them or the crew inspects them. The crew drives from
//! node to node, repairing known faults and probing uncertain nodes, and
//! the goal is to minimize the total customer-time spent without power.
//!
//! The crate provides:
//! - belief states and exact stochastic dynamics ([`state`], [`transition`]);
//! - an exact expectimax solver for small networks ([`oracle`]);
//! - tabular reinforcement learning with optional state aggregation and
//!   dominance pruning of candidate moves ([`table`], [`learner`]);
//! - rule-based benchmark policies and paired-realization evaluation
//!   ([`policy`], [`evaluate`], [`rollout`]);
//! - random instance generation on simple regions with degree-bounded
//!   spanning trees ([`gen`], [`instance`], [`tree`], [`geom`]).

pub mod error;
pub mod evaluate;
pub mod gen;
pub mod geom;
pub mod instance;
pub mod learner;
pub mod nodeset;
pub mod oracle;
pub mod policy;
pub mod rollout;
pub mod route;
pub mod state;
pub mod table;
pub mod transition;
pub mod tree;

pub use error::{Error, Result};

/// Version stamp written into every generated file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
