//! Forward and backward kernels for every layer primitive in the network.
//!
//! All spatial ops share four building blocks (`gemm_acc`, `transpose_mat`,
//! `im2col`, `col2im_acc`); convolution and transposed convolution are the
//! same machinery with the roles of image and grid swapped, which is what
//! makes the adjoint identity hold structurally.

mod activation;
mod batchnorm;
mod conv;
mod conv_transpose;
mod gemm;
mod pool;
mod upsample;

pub use activation::{activation_bwd, activation_fwd, ActivationKind};
pub use batchnorm::{
    batchnorm_bwd, batchnorm_eval_fwd, batchnorm_train_fwd, update_running_stat, BnCache,
    BN_EPS, BN_MOMENTUM,
};
pub use conv::{add_channel_bias, channel_bias_grad, conv2d_bwd, conv2d_fwd, ConvSpec};
pub use conv_transpose::{conv_transpose2d_bwd, conv_transpose2d_fwd, ConvTransposeSpec};
pub use gemm::{gemm_acc, transpose_mat};
pub use pool::{maxpool3x3s2_bwd, maxpool3x3s2_fwd};
pub use upsample::{bilinear_upsample, bilinear_upsample_bwd};
