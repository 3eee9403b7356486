//! Graph neural networks trained on growing graphs sampled from graphons.
//!
//! A graphon is a bounded symmetric measurable function `W: [0,1]^2 -> [0,1]`
//! that acts both as a generative model for random graphs and as the limit
//! object of a growing graph sequence. This crate implements the full
//! pipeline built on that observation:
//!
//! - [`graphon`]: graphon families, template/stochastic graph sampling, the
//!   induced step objects that embed a finite graph back into graphon space,
//!   quadrature distances, spectral summaries, and the transferability
//!   constants that govern how gradients move between graph sizes.
//! - [`gnn`]: polynomial graph-convolutional networks over a fixed graph
//!   shift operator, with hand-rolled reverse-mode differentiation. Parameter
//!   shapes are independent of the graph size, which is what makes a single
//!   parameter tensor meaningful across an entire growing graph sequence.
//! - [`train`]: per-sample SGD with a growth schedule that enlarges the
//!   training graph at epoch boundaries, a gradient-distance estimator
//!   comparing small-graph gradients against a large reference graph, and a
//!   teacher-student task for synthetic experiments.
//! - [`flocking`]: a velocity-consensus benchmark where a decentralized GNN
//!   policy is trained by imitation of a centralized expert controller while
//!   the swarm grows between epochs.
//! - [`run`]: config-driven entry points behind the `graphon-gnn` binary;
//!   every subcommand writes deterministic CSV outputs plus a run manifest
//!   under a directory named by the config hash.
//!
//! Runnable walkthroughs for each capability live in `examples/`; see the
//! README for the catalog.

pub mod error;
pub mod flocking;
pub mod gnn;
pub mod graphon;
pub mod run;
pub mod seed;
pub mod train;

pub use error::{Error, Result};
