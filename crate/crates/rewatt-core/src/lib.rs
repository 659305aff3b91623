//! Rewiring-based black-box attacks on GCN graph classifiers.
//!
//! The crate contains the full attack stack: a dense numeric kernel with a
//! small reverse-mode tape, the graph/rewiring machinery, Laplacian spectral
//! analysis of structural perturbations, a trainable GCN victim exposed to
//! attackers as a label oracle, the rewiring MDP with its baselines, the
//! REINFORCE-trained attacker itself, and the post-hoc analysis tooling.

pub mod analysis;
pub mod attack;
pub mod checkpoint;
pub mod classifier;
pub mod data;
pub mod error;
pub mod graph;
pub mod numeric;
pub mod policy;
pub mod spectral;

pub use error::{Error, Result};
