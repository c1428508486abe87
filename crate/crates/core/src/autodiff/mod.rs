//! Reverse-mode differentiation over dense `f64` arrays.
//!
//! A [`Graph`] is rebuilt for every evaluation. Trainable values live in a
//! [`ParamStore`] and are bound into a graph with [`Graph::param`];
//! [`Graph::backward`] adds the resulting gradients back into the store.

mod gradcheck;
mod graph;
mod params;
mod tensor;

pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport};
pub use graph::{leaky_relu, sigmoid, DiffValue, Graph, Taps, Var, LOG_EPS};
pub use params::{ParamId, ParamStore, Parameter, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use tensor::{gemm_acc, Tensor};

pub(crate) use graph::{bilinear_forward, pairwise_sq_dist};
