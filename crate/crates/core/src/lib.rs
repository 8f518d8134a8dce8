//! Tensor-train algebra with sketch-guided interpolative products.
//!
//! The crate provides tensor trains with exact and rounded arithmetic, an
//! interpolative decomposition based on rank-revealing LU, random sketches
//! of tensor-train tails, and the sketched interpolation algorithm that
//! computes elementwise products and elementwise maps of tensor trains
//! without ever forming the squared bond dimension.

pub mod baseline;
pub mod error;
pub mod linalg;
pub mod matrix_id;
pub mod ops;
pub mod qtt;
pub mod rsi;
pub mod sketching;
pub mod tt;

pub use error::{Result, TtError};
pub use matrix_id::{prrlu_row_id, InterpolativeFactor};
pub use rsi::{rsi_apply, rsi_hadamard, rsi_map, Combine, RsiConfig, RsiReport};
pub use sketching::SketchBundle;
pub use tt::{Core, DenseTensor, TensorTrain};
