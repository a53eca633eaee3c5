//! Dense `f64` tensors, a reverse-mode tape, and a finite-difference oracle.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{finite_difference_check, Coordinates, GradCheckReport};
pub use tape::{sigmoid, softmax_in_place, Tape, Var};
pub use tensor::Tensor;
