//! Dense tensor substrate and the differentiable kernels shared by both
//! simulators: affine current injection, depthwise causal convolution and a
//! finite-difference gradient checker.

mod affine;
mod conv;
pub(crate) mod gemm;
mod gradcheck;
mod real;
mod tensor;

pub use affine::{affine_backward, affine_backward_opts, affine_forward, AffineGrads};
pub use conv::{
    causal_conv, causal_conv_backward, causal_conv_backward_opts, causal_conv_shared,
    causal_conv_shared_backward, causal_conv_with, direct_max_steps, ConvBackend, ConvGrads,
};
pub(crate) use conv::causal_conv_shared_rounded;
pub use gradcheck::{central_difference, finite_diff_check};
pub use real::{DType, Real};
pub use tensor::{GradBuffer, SpikeTensor, Tensor};
