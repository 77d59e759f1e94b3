//! Edge-differentially-private spectral community detection for two-block
//! stochastic block models.
//!
//! Three mechanisms are provided:
//!
//! * [`mechanisms::perturb_and_cluster`]: randomized response on every edge
//!   slot, then Fiedler-vector clustering of the perturbed graph.
//! * [`mechanisms::subsampling_stability`]: cluster many edge-subsampled
//!   copies and release the mode only if a Laplace-noised stability score
//!   clears a threshold.
//! * [`mechanisms::noisy_power_iteration`]: power iteration on the centered
//!   adjacency with Gaussian noise scaled to the per-step sensitivity, and
//!   [`mechanisms::private_power_with_init`] which also starts from a
//!   privately computed vector.
//!
//! [`accounting`] calibrates noise, [`bounds`] evaluates the closed-form
//! utility bounds, and [`experiment`] runs reproducible Monte-Carlo sweeps.

pub mod accounting;
pub mod bounds;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod linalg;
pub mod mechanisms;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{AdjacencyMatrix, CenteredAdjacency, LabelVector, Laplacian, SbmParams};
pub use spectral::{EigenPair, SolverConfig};
