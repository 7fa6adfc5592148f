//! Derivative-free composite optimization.
//!
//! Minimizes `F(x) = (1/n) Σ f_i(x) + λ1‖x‖₁` using only values of the
//! components `f_i`. Every component evaluation made by an optimizer is metered
//! through an [`SzoCounter`](objective::SzoCounter), which is the cost axis of
//! all experiments.
//!
//! The main algorithm is [`Zpdvr`](algorithms::Zpdvr): a loopless SVRG scheme
//! whose reference gradient comes from a [`GradientLearner`](learner::GradientLearner)
//! refined one random direction at a time, so that both the sampling variance
//! and the coordinate-wise variance of random-direction estimates vanish at
//! the optimum. Baselines are proximal gradient descent with coordinate finite
//! differences ([`Pgd`](algorithms::Pgd)), zeroth-order prox-SVRG
//! ([`Zpsvrg`](algorithms::Zpsvrg)) and a sketch-and-project gradient learner
//! ([`Sega`](algorithms::Sega)).

// `!(x > 0.0)` is the NaN-rejecting form used throughout for parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod data;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod learner;
pub mod linalg;
pub mod objective;
pub mod par;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{soft_threshold, DenseVector, SparseRow};
pub use objective::{CompositeProblem, LogisticProblem, QuadraticLassoProblem, SzoCounter};
pub use par::Exec;
pub use rng::{gaussian_vector, SeededRng};
