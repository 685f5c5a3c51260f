//! # hybrid-gibbs
//!
//! Exact construction and spectral certification of Gibbs-type Markov kernels
//! on finite product spaces.
//!
//! The crate builds random-scan Gibbs kernels, their hybrid
//! (Metropolis-within-Gibbs) counterparts, blocked random-scan kernels,
//! two-block data augmentation kernels and finite slice samplers as dense
//! matrices, computes their L² spectra exactly, and checks the comparison
//! inequalities that relate exact and hybrid samplers: spectral-gap and
//! Dirichlet-form sandwiches, asymptotic-variance bounds and t-step bounds for
//! hybrid data augmentation.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`spectral`] | probability vectors, stochastic kernels, operator norm, Dirichlet forms, asymptotic variance |
//! | [`gibbs`] | product spaces, joint distributions, every kernel family |
//! | [`bounds`] | approximation quality constants and the certified inequalities |
//! | [`sim`] | seeded simulation, batch means, L² mixing curves |
//! | [`cli`] | configuration files, demo registry, suite orchestration |
//!
//! ```
//! use hybrid_gibbs::gibbs::{exact_random_scan, JointDistribution, ProductSpace, SelectionProbs};
//! use hybrid_gibbs::spectral::spectral_summary;
//!
//! let space = ProductSpace::new(vec![2, 2]).unwrap();
//! let joint = JointDistribution::new(space, vec![0.25; 4]).unwrap();
//! let t = exact_random_scan(&joint, &SelectionProbs::uniform(2)).unwrap();
//! let s = spectral_summary(&t).unwrap();
//! assert!((s.operator_norm - 0.5).abs() < 1e-12);
//! ```
//!
//! Coordinates are indexed from 0 in the API and in configuration files. State
//! indices use a mixed-radix code with coordinate 0 varying fastest.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod gibbs;
pub mod report;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use report::{BoundReport, Status};
