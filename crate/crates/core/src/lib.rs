//! Single-spike spiking neural networks on the CPU.
//!
//! Two simulators of the same layer dynamics live side by side:
//!
//! * [`seq`] steps a leaky integrate-and-fire layer through time with the
//!   usual reset term, in multi-spike or single-spike (gated) mode, and
//!   backpropagates through time with a surrogate gradient.
//! * [`fastpath`] computes the single-spike layer without any loop over
//!   time: potentials without reset come from a causal convolution, and the
//!   first threshold crossing is isolated with a ramp convolution followed
//!   by an `== 1` test.
//!
//! Both produce identical output spikes. [`training`] assembles networks,
//! readout, loss and Adam; [`data`] generates and loads spike datasets;
//! [`bench`] times the two simulators against each other.

pub mod bench;
pub mod data;
mod error;
pub mod fastpath;
pub mod neuron;
pub mod numerics;
pub mod seq;
pub mod training;

pub use error::{Error, Result};
pub use numerics::{DType, GradBuffer, Real, SpikeTensor, Tensor};
