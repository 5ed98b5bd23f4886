//! Single-spike layers without a loop over time.
//!
//! ```text
//! I  = b + W·S_in                  (affine)
//! Ṽ  = I ⊛ (1-β)β^j  (+ β^t·v0)    (no-reset potentials, causal conv)
//! S̃  = spike_fn(Ṽ)                 (every crossing, including spurious ones)
//! z  = S̃ ⊛ [1, 2, 3, ...]          (phi)
//! S  = [z == 1]                    (first crossing only)
//! ```
//!
//! Up to and including its first crossing a neuron never resets, so `Ṽ`
//! agrees with the reset dynamics there and `S` equals the single-spike
//! output of [`crate::seq`].

use crate::neuron::{spike_fn, surrogate_grad};
use crate::numerics::{
    affine_backward_opts, affine_forward, causal_conv_backward_opts, causal_conv_shared,
    causal_conv_shared_backward, causal_conv_shared_rounded, causal_conv_with, ConvBackend, Real, Tensor,
};
use crate::seq::{LayerGrads, LayerParams};
use crate::{Error, Result};

/// Per-neuron kernels `K[n, j] = (1-β_n)·β_n^j`, shape `[N, steps]`.
pub fn decay_kernel<T: Real>(beta: &Tensor<T>, steps: usize) -> Result<Tensor<T>> {
    let n = beta.dims1("decay_kernel")?;
    let mut k = Tensor::zeros(&[n, steps]);
    for (i, &b) in beta.data().iter().enumerate() {
        let mut p = T::one() - b;
        for v in &mut k.data_mut()[i * steps..(i + 1) * steps] {
            *v = p;
            p *= b;
        }
    }
    Ok(k)
}

/// `dK[n, j]/dβ_n = -β^j + (1-β)·j·β^(j-1)`.
fn decay_kernel_slope<T: Real>(beta: &Tensor<T>, steps: usize) -> Tensor<T> {
    let n = beta.len();
    let mut k = Tensor::zeros(&[n, steps]);
    for (i, &b) in beta.data().iter().enumerate() {
        let row = &mut k.data_mut()[i * steps..(i + 1) * steps];
        let (mut pow, mut pow_prev) = (T::one(), T::zero());
        for (j, v) in row.iter_mut().enumerate() {
            *v = -pow + (T::one() - b) * T::lit(j as f64) * pow_prev;
            pow_prev = pow;
            pow *= b;
        }
    }
    k
}

fn check_beta<T: Real>(op: &'static str, current: &Tensor<T>, beta: &Tensor<T>, v0: Option<&Tensor<T>>) -> Result<[usize; 3]> {
    let dims = current.dims3(op)?;
    if beta.dims1(op)? != dims[1] {
        return Err(Error::dim(op, current.shape(), beta.shape()));
    }
    if let Some(v0) = v0 {
        if v0.shape() != beta.shape() {
            return Err(Error::dim(op, beta.shape(), v0.shape()));
        }
    }
    Ok(dims)
}

/// `Ṽ[t] = β^t·v0 + (1-β)·Σ_{k ≤ t} β^(t-k)·I[k]` with 1-based `t`.
pub fn no_reset_potentials<T: Real>(current: &Tensor<T>, beta: &Tensor<T>, v0: &Tensor<T>) -> Result<Tensor<T>> {
    no_reset_potentials_with(current, beta, Some(v0), ConvBackend::Auto)
}

/// [`no_reset_potentials`] with an explicit backend; `v0 = None` means rest.
pub fn no_reset_potentials_with<T: Real>(
    current: &Tensor<T>,
    beta: &Tensor<T>,
    v0: Option<&Tensor<T>>,
    backend: ConvBackend,
) -> Result<Tensor<T>> {
    let [batch, n, steps] = check_beta("no_reset_potentials", current, beta, v0)?;
    let kernel = decay_kernel(beta, steps)?;
    let mut v = causal_conv_with(current, &kernel, backend)?;
    if let Some(v0) = v0 {
        for i in 0..n {
            let (b_i, v0_i) = (beta.data()[i], v0.data()[i]);
            if v0_i == T::zero() {
                continue;
            }
            for b in 0..batch {
                let mut p = b_i;
                for x in v.row_mut(b, i) {
                    *x += p * v0_i;
                    p *= b_i;
                }
            }
        }
    }
    Ok(v)
}

/// Gradients of [`no_reset_potentials_with`]. Fields are `None` when not requested.
#[derive(Debug, Clone)]
pub struct NoResetGrads<T> {
    pub current: Option<Tensor<T>>,
    pub beta: Option<Tensor<T>>,
}

pub fn no_reset_potentials_backward<T: Real>(
    grad: &Tensor<T>,
    current: &Tensor<T>,
    beta: &Tensor<T>,
    v0: Option<&Tensor<T>>,
    backend: ConvBackend,
    need_current: bool,
    need_beta: bool,
) -> Result<NoResetGrads<T>> {
    let [batch, n, steps] = check_beta("no_reset_potentials_backward", current, beta, v0)?;
    if grad.shape() != current.shape() {
        return Err(Error::dim("no_reset_potentials_backward", grad.shape(), current.shape()));
    }
    let kernel = decay_kernel(beta, steps)?;
    let conv = causal_conv_backward_opts(grad, current, &kernel, backend, need_current, need_beta)?;
    let beta_grad = match conv.kernel {
        None => None,
        Some(gk) => {
            let slope = decay_kernel_slope(beta, steps);
            let mut gb: Vec<T> = (0..n)
                .map(|i| {
                    let r = i * steps..(i + 1) * steps;
                    gk.data()[r.clone()].iter().zip(&slope.data()[r]).map(|(&g, &s)| g * s).sum()
                })
                .collect();
            if let Some(v0) = v0 {
                for i in 0..n {
                    let (b_i, v0_i) = (beta.data()[i], v0.data()[i]);
                    for b in 0..batch {
                        // d(β^(t+1))/dβ = (t+1)·β^t
                        let mut p = T::one();
                        for (t, &g) in grad.row(b, i).iter().enumerate() {
                            gb[i] += g * T::lit((t + 1) as f64) * p * v0_i;
                            p *= b_i;
                        }
                    }
                }
            }
            Some(Tensor::from_vec(&[n], gb)?)
        }
    };
    Ok(NoResetGrads {
        current: conv.input,
        beta: beta_grad,
    })
}

/// `[1, 2, ..., steps]`
pub fn ramp_kernel<T: Real>(steps: usize) -> Vec<T> {
    (1..=steps).map(|k| T::lit(k as f64)).collect()
}

/// Window length below which [`phi`] under [`ConvBackend::Auto`] multiplies
/// by the ramp matrix directly, provided the native type is exact.
pub const PHI_DIRECT_MAX_STEPS: usize = 1536;

/// Spike-ordering transform `z[t] = Σ_{k ≤ t} S̃[k]·(t-k+1)`.
pub fn phi<T: Real>(raw_spikes: &Tensor<T>) -> Result<Tensor<T>> {
    phi_with(raw_spikes, ConvBackend::Auto)
}

/// [`phi`] with an explicit backend. The result is always integer-exact: when
/// the native type or the backend could round, it is computed in `f64` and
/// rounded.
pub fn phi_with<T: Real>(raw_spikes: &Tensor<T>, backend: ConvBackend) -> Result<Tensor<T>> {
    raw_spikes.dims3("phi")?;
    raw_spikes.ensure_binary("phi input")?;
    phi_unchecked(raw_spikes, backend)
}

/// [`phi_with`] for input already known to be binary and rank 3.
fn phi_unchecked<T: Real>(raw_spikes: &Tensor<T>, backend: ConvBackend) -> Result<Tensor<T>> {
    let steps = raw_spikes.shape()[2];
    let largest = (steps as f64) * (steps as f64 + 1.0) / 2.0;
    let native_exact = largest < 2f64.powi(T::MANTISSA_DIGITS as i32);
    // The ramp product is a plain matrix multiply, which stays ahead of the
    // f64 transform for much longer windows than a general kernel does.
    let backend = match backend {
        ConvBackend::Auto if native_exact && steps < PHI_DIRECT_MAX_STEPS => ConvBackend::Direct,
        other => other.resolve(steps),
    };
    match backend {
        ConvBackend::Direct if native_exact => causal_conv_shared(raw_spikes, &ramp_kernel::<T>(steps), backend),
        ConvBackend::Direct => {
            let z = causal_conv_shared(&raw_spikes.cast::<f64>(), &ramp_kernel::<f64>(steps), backend)?;
            Ok(z.map(f64::round).cast())
        }
        _ => Ok(causal_conv_shared_rounded(raw_spikes, &ramp_kernel::<f64>(steps))),
    }
}

/// Adjoint of [`phi`]: correlation with the ramp.
pub fn phi_backward<T: Real>(grad_latent: &Tensor<T>, backend: ConvBackend) -> Result<Tensor<T>> {
    let [_, _, steps] = grad_latent.dims3("phi_backward")?;
    let backend = match backend {
        ConvBackend::Auto if steps < PHI_DIRECT_MAX_STEPS => ConvBackend::Direct,
        other => other,
    };
    causal_conv_shared_backward(grad_latent, &ramp_kernel::<T>(steps), backend)
}

/// `1` where the latent equals one, else `0`.
pub fn extract_first_spike<T: Real>(latent: &Tensor<T>) -> Tensor<T> {
    latent.map(|z| if z == T::one() { T::one() } else { T::zero() })
}

/// Forward quantities of one fast single-spike layer, each `[batch, neurons, steps]`.
#[derive(Debug, Clone)]
pub struct FastLayerTrace<T> {
    pub current: Tensor<T>,
    pub no_reset_v: Tensor<T>,
    pub raw_spikes: Tensor<T>,
    pub latent: Tensor<T>,
    pub out_spikes: Tensor<T>,
}

fn check_input<T: Real>(op: &'static str, input: &Tensor<T>, params: &LayerParams<T>) -> Result<()> {
    let [_, n_in, _] = input.dims3(op)?;
    if n_in != params.n_in() {
        return Err(Error::dim(op, input.shape(), params.weights.shape()));
    }
    input.ensure_binary(op)
}

pub fn fast_layer_forward<T: Real>(
    input: &Tensor<T>,
    params: &LayerParams<T>,
    backend: ConvBackend,
) -> Result<FastLayerTrace<T>> {
    check_input("fast_layer_forward", input, params)?;
    let current = affine_forward(input, &params.weights, &params.bias)?;
    let no_reset_v = no_reset_potentials_with(&current, &params.beta, None, backend)?;
    let raw_spikes = no_reset_v.map(spike_fn);
    let latent = phi_unchecked(&raw_spikes, backend)?;
    let out_spikes = extract_first_spike(&latent);
    Ok(FastLayerTrace {
        current,
        no_reset_v,
        raw_spikes,
        latent,
        out_spikes,
    })
}

/// Surrogate backward of [`fast_layer_forward`] given the gradient w.r.t. its output spikes.
pub fn fast_layer_backward<T: Real>(
    trace: &FastLayerTrace<T>,
    input: &Tensor<T>,
    params: &LayerParams<T>,
    grad_out: &Tensor<T>,
    slope: T,
    need_input: bool,
    backend: ConvBackend,
) -> Result<LayerGrads<T>> {
    if grad_out.shape() != trace.out_spikes.shape() {
        return Err(Error::dim("fast_layer_backward", grad_out.shape(), trace.out_spikes.shape()));
    }
    // extraction is straight-through, so grad_out is the latent gradient
    let grad_raw = phi_backward(grad_out, backend)?;
    let grad_v = grad_raw.zip_map(&trace.no_reset_v, |g, v| g * surrogate_grad(v, slope))?;
    potentials_backward(&grad_v, &trace.current, input, params, need_input, backend)
}

fn potentials_backward<T: Real>(
    grad_v: &Tensor<T>,
    current: &Tensor<T>,
    input: &Tensor<T>,
    params: &LayerParams<T>,
    need_input: bool,
    backend: ConvBackend,
) -> Result<LayerGrads<T>> {
    let nr = no_reset_potentials_backward(grad_v, current, &params.beta, None, backend, true, params.trainable_beta)?;
    let grad_current = nr.current.expect("current gradient requested");
    let affine = affine_backward_opts(&grad_current, input, &params.weights, need_input)?;
    Ok(LayerGrads {
        weights: affine.weights,
        bias: affine.bias,
        beta: nr.beta,
        input: affine.input,
    })
}

/// A non-spiking output layer: its potentials are exactly the no-reset potentials.
#[derive(Debug, Clone)]
pub struct FastReadoutTrace<T> {
    pub current: Tensor<T>,
    pub v: Tensor<T>,
}

pub fn fast_readout_forward<T: Real>(
    input: &Tensor<T>,
    params: &LayerParams<T>,
    backend: ConvBackend,
) -> Result<FastReadoutTrace<T>> {
    check_input("fast_readout_forward", input, params)?;
    let current = affine_forward(input, &params.weights, &params.bias)?;
    let v = no_reset_potentials_with(&current, &params.beta, None, backend)?;
    Ok(FastReadoutTrace { current, v })
}

pub fn fast_readout_backward<T: Real>(
    trace: &FastReadoutTrace<T>,
    input: &Tensor<T>,
    params: &LayerParams<T>,
    grad_v: &Tensor<T>,
    need_input: bool,
    backend: ConvBackend,
) -> Result<LayerGrads<T>> {
    if grad_v.shape() != trace.v.shape() {
        return Err(Error::dim("fast_readout_backward", grad_v.shape(), trace.v.shape()));
    }
    potentials_backward(grad_v, &trace.current, input, params, need_input, backend)
}
