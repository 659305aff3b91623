//! Dense linear algebra and differentiation utilities shared by every other
//! module. No external numeric dependencies.

pub mod autodiff;
mod eigen;
mod func;
mod matrix;

pub use autodiff::{masked_softmax, Gradients, Tape, Var};
pub use eigen::{sym_eig, EigenDecomposition};
pub use func::{cross_entropy, finite_diff_gradient, max_relative_deviation, softmax, PROB_FLOOR};
pub use matrix::DenseMatrix;
