//! Orthogonality graphs for Levy-driven MCAR(p) processes.
//!
//! A model is given by autoregressive coefficients `A_1..A_p` and the Levy
//! covariance `Sigma_L`. From these the crate builds
//!
//! * the orthogonality graph and the local orthogonality graph
//!   ([`builder`]), with an audit trail of certifying matrix entries,
//! * m-separation and Markov read-outs on the resulting mixed graphs
//!   ([`graph`]),
//! * exact and Euler sample paths ([`simulate`]) and empirical checks
//!   against the algebraic results ([`empirical`]).
//!
//! ```
//! use mcar_graphs::builder::{orthogonality_graph, DEFAULT_TOL};
//! use mcar_graphs::model::reference_ou_spec;
//!
//! let og = orthogonality_graph(&reference_ou_spec(), DEFAULT_TOL).unwrap();
//! assert!(og.graph.has_directed(1, 2));
//! assert!(!og.graph.has_directed(2, 1));
//! ```

pub mod builder;
pub mod cli;
pub mod empirical;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod model;
pub mod random_models;
pub mod simulate;

pub use builder::{
    check_nesting, local_orthogonality_graph, orthogonality_graph, ou_orthogonality_graph, sampled_graph,
    EdgeCriterionReport, Witness, DEFAULT_TOL,
};
pub use error::{Error, Result};
pub use graph::{m_separated, EndpointMark, MixedGraph, SeparationQuery, VertexSet};
pub use kernels::{CMatrix, Matrix};
pub use model::{build_state_space, McarSpec, StateSpace};
pub use simulate::{LevyDriver, SamplePath};
