//! Link-based route choice models.
//!
//! This crate holds the numerical side of the recursive logit family: the
//! link graph and its proximity matrices, the systematic and residual utility
//! layers (RL, LS-RL, NRL, Res-RL, ResDGCN-RL), exact value-function solves,
//! choice and flow computations, maximum-likelihood estimation with analytic
//! gradients, and the evaluation metrics.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and reporting live in the `reclogit` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;
pub mod math;
pub mod linalg;

pub mod network;
pub mod features;
pub mod model;
pub mod solver;
pub mod data;
pub mod evaluator;
pub mod estimation;
pub mod optim;
pub mod metrics;
pub mod fixture;
pub mod synthetic;

pub use error::{Error, Result};
pub use features::{FeatureSpec, FeatureTensor, FeatureSource};
pub use linalg::{DenseMatrix, Lu};
pub use model::{ModelKind, ModelParams, UtilityField};
pub use network::{Link, LinkGraph, ProximitySet};
pub use solver::{ChoiceMatrix, FlowVector, ValueField};
pub use data::{Split, Trajectory, TrajectorySet};
