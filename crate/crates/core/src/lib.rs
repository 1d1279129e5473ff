//! Construction and certification of a family of rank-three symmetric
//! nonnegative matrices with exactly one negative eigenvalue and a
//! nonnegative rank that grows with the matrix size.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, timing and the command line live
//! in the companion `nnrank` crate.

#![no_std]

extern crate alloc;

pub mod bounds;
pub mod construction;
pub mod nmf;
pub mod scalar;
pub mod symbolic;
pub mod verify;

pub use construction::{AnyBundle, Bundle, ChainOrigin, HChain, ScalarMode, SurrogateSpec};
pub use scalar::{BigFloat, FloatInterval, Matrix, RatFunc, Rational, Sign, UniPoly};
