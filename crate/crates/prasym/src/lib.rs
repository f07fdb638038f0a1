//! Personalized PageRank on undirected random graphs.
//!
//! The crate bundles everything needed to study how PageRank behaves on
//! families of random graphs as the graph size grows:
//!
//! - [`graph`]: an immutable compressed adjacency structure with cached
//!   degrees, plus a plain-text edge-list format.
//! - [`models`]: seeded generators for Erdős–Rényi, Chung-Lu (constant,
//!   geometric-clipped and power-law expected degrees) and two-community
//!   stochastic block model graphs. Generation is counter-based per vertex
//!   pair, so a `(spec, seed)` pair reproduces the same graph bit-for-bit
//!   at any thread count.
//! - [`spectral`]: matrix-free operators for the random-walk matrices
//!   `P = A D^{-1}` and `Q = D^{-1/2} A D^{-1/2}`, deflated power iteration
//!   for the second eigenvalue magnitude, and a dense eigendecomposition
//!   used as the oracle for everything iterative.
//! - [`pagerank`]: exact personalized PageRank by three mutually checking
//!   routes (power iteration, dense resolvent solve, truncated series).
//! - [`asymptotics`]: closed-form approximations of PageRank — the
//!   degree/restart mixture for expander-like graphs and the rank-reduced
//!   block-model form with its community correction term.
//! - [`metrics`]: total variation distance, max relative error and norms,
//!   all with pairwise accumulation.
//! - [`verify`]: empirical checks of the concentration and spectral-norm
//!   bounds that justify the approximations, reported as
//!   (measured, bound, pass/fail) rows.

pub mod asymptotics;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod models;
pub mod pagerank;
pub mod rng;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use graph::Graph;
pub use models::{SbmExpectedAdjacency, SbmParams, WeightSpec};
pub use pagerank::{PageRankConfig, PageRankResult, PreferenceVector};
pub use spectral::SpectralEstimate;
pub use verify::BoundCheck;

/// Largest `n` for which the dense O(n^3) oracle paths (eigendecomposition,
/// resolvent solves) are allowed to run.
pub const DENSE_LIMIT: usize = 2048;
