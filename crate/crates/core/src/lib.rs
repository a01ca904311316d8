//! Learning decision trees from random examples drawn from a randomly
//! perturbed product distribution.
//!
//! The learner ([`learner::learn`]) grows a family of candidate feature sets
//! top-down, keeping every extension whose estimated normalized Fourier
//! coefficient clears a threshold, and outputs the sign of the resulting
//! sparse polynomial. The [`oracle`] module computes exact ground truth by
//! enumeration and Monte-Carlo checks of the probabilistic facts the learner
//! relies on; [`harness`] runs seeded experiment campaigns and backs the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod learner;
pub mod oracle;
pub mod rng;
pub mod tree;

pub use dist::{Dataset, Perturbation, ProductDist};
pub use error::{Error, Result};
pub use fourier::{BooleanFunction, SparsePoly, SubsetIndex};
pub use learner::{learn, Hypothesis, LearnOutcome, LearnerConfig};
pub use tree::DecisionTree;
