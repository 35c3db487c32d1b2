//! Terrace convolutional decoder network (TNet) built from first principles:
//! a rank-4 NCHW tensor, hand-written forward/backward kernels for every
//! layer, a pyramid encoder with a terrace decoder (plus a UNet-style
//! baseline), CE+Dice objective, AdamW with a one-cycle schedule,
//! segmentation metrics, a synthetic data pipeline, and a finite-difference
//! gradient-check harness that certifies all of it.

pub mod error;
pub mod mask;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use mask::{Mask, IGNORE_LABEL};
pub use rng::Rng;
pub use tensor::{dot, Scalar, Shape, Tensor};
