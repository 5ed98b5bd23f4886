//! Depthwise causal convolution along the time axis.
//!
//! `out[b,n,t] = Σ_{k ≤ t} kernel[n, t-k] · input[b,n,k]`
//!
//! Two backends compute the same thing. `Direct` multiplies each channel's
//! rows by an upper-triangular Toeplitz matrix (O(T²) per row, but a single
//! GEMM per kernel). `Transform` zero-pads to at least `2T-1` and multiplies
//! real FFT spectra (O(T log T) per row).

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::{Error, Result};

use super::gemm::{gemm, View};
use super::{Real, Tensor};

/// Sequences shorter than this use the direct backend under [`ConvBackend::Auto`].
const DIRECT_MAX_STEPS: usize = 256;

pub fn direct_max_steps() -> usize {
    DIRECT_MAX_STEPS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvBackend {
    #[default]
    Auto,
    Direct,
    Transform,
}

impl ConvBackend {
    pub(crate) fn resolve(self, steps: usize) -> ConvBackend {
        match self {
            ConvBackend::Auto if steps < DIRECT_MAX_STEPS => ConvBackend::Direct,
            ConvBackend::Auto => ConvBackend::Transform,
            other => other,
        }
    }
}

/// Gradients of a causal convolution. Fields are `None` when not requested.
#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub input: Option<Tensor<T>>,
    pub kernel: Option<Tensor<T>>,
}

fn check_kernel<T: Real>(op: &'static str, input: &Tensor<T>, kernel: &Tensor<T>) -> Result<[usize; 3]> {
    let dims = input.dims3(op)?;
    let [channels, len] = kernel.dims2(op)?;
    if channels != dims[1] || len != dims[2] {
        return Err(Error::dim(op, input.shape(), kernel.shape()));
    }
    Ok(dims)
}

/// `m[s, t] = k[t - s]` for `t ≥ s`, zero below the diagonal.
fn toeplitz<T: Real>(kernel: &[T]) -> Vec<T> {
    let steps = kernel.len();
    let mut m = vec![T::zero(); steps * steps];
    for s in 0..steps {
        m[s * steps + s..(s + 1) * steps].copy_from_slice(&kernel[..steps - s]);
    }
    m
}

struct Spectral<T: Real> {
    len: usize,
    steps: usize,
    fwd: Arc<dyn RealToComplex<T>>,
    inv: Arc<dyn ComplexToReal<T>>,
    time: Vec<T>,
    scratch: Vec<Complex<T>>,
    scale: T,
}

impl<T: Real> Spectral<T> {
    fn new(steps: usize) -> Self {
        let len = (2 * steps).next_power_of_two().max(2);
        let mut planner = RealFftPlanner::<T>::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let scratch_len = fwd.get_scratch_len().max(inv.get_scratch_len());
        Spectral {
            len,
            steps,
            fwd,
            inv,
            time: vec![T::zero(); len],
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            scale: T::one() / T::lit(len as f64),
        }
    }

    fn bins(&self) -> usize {
        self.len / 2 + 1
    }

    fn spectrum(&self) -> Vec<Complex<T>> {
        vec![Complex::new(T::zero(), T::zero()); self.bins()]
    }

    fn forward(&mut self, row: &[T], out: &mut [Complex<T>]) {
        self.time[..self.steps].copy_from_slice(row);
        self.time[self.steps..].iter_mut().for_each(|v| *v = T::zero());
        self.fwd
            .process_with_scratch(&mut self.time, out, &mut self.scratch)
            .expect("buffer sizes fixed by the plan");
    }

    /// Inverse transform of `spec`, writing the first `steps` samples.
    fn inverse(&mut self, spec: &mut [Complex<T>], out: &mut [T]) {
        let last = spec.len() - 1;
        spec[0].im = T::zero();
        spec[last].im = T::zero();
        self.inv
            .process_with_scratch(spec, &mut self.time, &mut self.scratch)
            .expect("buffer sizes fixed by the plan");
        for (o, &v) in out.iter_mut().zip(&self.time[..self.steps]) {
            *o = v * self.scale;
        }
    }
}

/// How rows map onto kernels: one kernel per channel, or one for all rows.
#[derive(Clone, Copy)]
enum Kernels<'a, T> {
    PerChannel(&'a [T]),
    Shared(&'a [T]),
}

fn conv_forward<T: Real>(
    input: &Tensor<T>,
    kernels: Kernels<'_, T>,
    backend: ConvBackend,
) -> Tensor<T> {
    let [batch, channels, steps] = [input.shape()[0], input.shape()[1], input.shape()[2]];
    let mut out = Tensor::zeros(input.shape());
    if input.is_empty() {
        return out;
    }
    match (backend.resolve(steps), kernels) {
        (ConvBackend::Direct, Kernels::Shared(k)) => {
            let m = toeplitz(k);
            gemm(
                batch * channels,
                steps,
                steps,
                input.data(),
                View::rows(0, steps),
                &m,
                View::rows(0, steps),
                out.data_mut(),
                View::rows(0, steps),
                false,
            );
        }
        (ConvBackend::Direct, Kernels::PerChannel(ks)) => {
            for n in 0..channels {
                let m = toeplitz(&ks[n * steps..(n + 1) * steps]);
                let view = View::new(n * steps, channels * steps, 1);
                gemm(batch, steps, steps, input.data(), view, &m, View::rows(0, steps), out.data_mut(), view, false);
            }
        }
        (_, kernels) => {
            let mut fft = Spectral::new(steps);
            let mut khat = fft.spectrum();
            let mut xhat = fft.spectrum();
            if let Kernels::Shared(k) = kernels {
                fft.forward(k, &mut khat);
            }
            for n in 0..channels {
                if let Kernels::PerChannel(ks) = kernels {
                    fft.forward(&ks[n * steps..(n + 1) * steps], &mut khat);
                }
                for b in 0..batch {
                    fft.forward(input.row(b, n), &mut xhat);
                    xhat.iter_mut().zip(&khat).for_each(|(x, k)| *x = *x * *k);
                    fft.inverse(&mut xhat, out.row_mut(b, n));
                }
            }
        }
    }
    out
}

/// Shared-kernel causal convolution evaluated per row in `f64` through the
/// transform and rounded to the nearest integer. Exact whenever the true
/// outputs are integers well inside the `f64` mantissa.
pub(crate) fn causal_conv_shared_rounded<T: Real>(input: &Tensor<T>, kernel: &[f64]) -> Tensor<T> {
    let steps = kernel.len();
    let mut out = Tensor::zeros(input.shape());
    if input.is_empty() || steps == 0 {
        return out;
    }
    let mut fft = Spectral::<f64>::new(steps);
    let mut khat = fft.spectrum();
    let mut xhat = fft.spectrum();
    fft.forward(kernel, &mut khat);
    let mut row = vec![0.0f64; steps];
    for (src, dst) in input.data().chunks_exact(steps).zip(out.data_mut().chunks_exact_mut(steps)) {
        row.iter_mut().zip(src).for_each(|(r, &x)| *r = x.as_f64());
        fft.forward(&row, &mut xhat);
        xhat.iter_mut().zip(&khat).for_each(|(x, k)| *x *= *k);
        fft.inverse(&mut xhat, &mut row);
        dst.iter_mut().zip(&row).for_each(|(d, &z)| *d = T::lit(z.round()));
    }
    out
}

fn conv_backward<T: Real>(
    grad_out: &Tensor<T>,
    input: Option<&Tensor<T>>,
    kernels: Kernels<'_, T>,
    backend: ConvBackend,
    need_input: bool,
) -> ConvGrads<T> {
    let [batch, channels, steps] = [grad_out.shape()[0], grad_out.shape()[1], grad_out.shape()[2]];
    let need_kernel = input.is_some();
    let mut grad_in = need_input.then(|| Tensor::zeros(grad_out.shape()));
    let mut grad_k = need_kernel.then(|| Tensor::zeros(&[channels, steps]));
    if grad_out.is_empty() {
        return ConvGrads {
            input: grad_in,
            kernel: grad_k,
        };
    }
    match (backend.resolve(steps), kernels) {
        (ConvBackend::Direct, Kernels::Shared(k)) => {
            if let Some(gi) = grad_in.as_mut() {
                let m = toeplitz(k);
                gemm(
                    batch * channels,
                    steps,
                    steps,
                    grad_out.data(),
                    View::rows(0, steps),
                    &m,
                    View::rows(0, steps).t(),
                    gi.data_mut(),
                    View::rows(0, steps),
                    false,
                );
            }
        }
        (ConvBackend::Direct, Kernels::PerChannel(ks)) => {
            let mut outer = vec![T::zero(); if need_kernel { steps * steps } else { 0 }];
            for n in 0..channels {
                let view = View::new(n * steps, channels * steps, 1);
                if let Some(gi) = grad_in.as_mut() {
                    let m = toeplitz(&ks[n * steps..(n + 1) * steps]);
                    gemm(batch, steps, steps, grad_out.data(), view, &m, View::rows(0, steps).t(), gi.data_mut(), view, false);
                }
                if let (Some(x), Some(gk)) = (input, grad_k.as_mut()) {
                    // outer[s, t] = Σ_b x[b,n,s]·g[b,n,t]
                    gemm(steps, batch, steps, x.data(), view.t(), grad_out.data(), view, &mut outer, View::rows(0, steps), false);
                    let row = &mut gk.data_mut()[n * steps..(n + 1) * steps];
                    for (lag, slot) in row.iter_mut().enumerate() {
                        *slot = (lag..steps).map(|t| outer[(t - lag) * steps + t]).sum();
                    }
                }
            }
        }
        (_, kernels) => {
            let mut fft = Spectral::new(steps);
            let mut khat = fft.spectrum();
            let mut ghat = fft.spectrum();
            let mut xhat = fft.spectrum();
            let mut prod = fft.spectrum();
            let mut acc = fft.spectrum();
            if let Kernels::Shared(k) = kernels {
                fft.forward(k, &mut khat);
            }
            for n in 0..channels {
                if let (Kernels::PerChannel(ks), true) = (kernels, need_input) {
                    fft.forward(&ks[n * steps..(n + 1) * steps], &mut khat);
                }
                acc.iter_mut().for_each(|v| *v = Complex::new(T::zero(), T::zero()));
                for b in 0..batch {
                    fft.forward(grad_out.row(b, n), &mut ghat);
                    if let Some(gi) = grad_in.as_mut() {
                        prod.iter_mut()
                            .zip(ghat.iter().zip(&khat))
                            .for_each(|(p, (g, k))| *p = *g * k.conj());
                        fft.inverse(&mut prod, gi.row_mut(b, n));
                    }
                    if let Some(x) = input {
                        fft.forward(x.row(b, n), &mut xhat);
                        acc.iter_mut()
                            .zip(ghat.iter().zip(&xhat))
                            .for_each(|(a, (g, x))| *a = *a + *g * x.conj());
                    }
                }
                if let Some(gk) = grad_k.as_mut() {
                    fft.inverse(&mut acc, &mut gk.data_mut()[n * steps..(n + 1) * steps]);
                }
            }
        }
    }
    ConvGrads {
        input: grad_in,
        kernel: grad_k,
    }
}

/// Depthwise causal convolution with the backend picked by sequence length.
pub fn causal_conv<T: Real>(input: &Tensor<T>, kernel: &Tensor<T>) -> Result<Tensor<T>> {
    causal_conv_with(input, kernel, ConvBackend::Auto)
}

pub fn causal_conv_with<T: Real>(
    input: &Tensor<T>,
    kernel: &Tensor<T>,
    backend: ConvBackend,
) -> Result<Tensor<T>> {
    check_kernel("causal_conv", input, kernel)?;
    Ok(conv_forward(input, Kernels::PerChannel(kernel.data()), backend))
}

/// Causal convolution of every row of `input` with one shared kernel of length `T`.
pub fn causal_conv_shared<T: Real>(
    input: &Tensor<T>,
    kernel: &[T],
    backend: ConvBackend,
) -> Result<Tensor<T>> {
    let [_, _, steps] = input.dims3("causal_conv_shared")?;
    if kernel.len() != steps {
        return Err(Error::dim("causal_conv_shared", input.shape(), &[kernel.len()]));
    }
    Ok(conv_forward(input, Kernels::Shared(kernel), backend))
}

/// Input gradient of [`causal_conv_shared`] (the causal correlation with the kernel).
pub fn causal_conv_shared_backward<T: Real>(
    grad_out: &Tensor<T>,
    kernel: &[T],
    backend: ConvBackend,
) -> Result<Tensor<T>> {
    let [_, _, steps] = grad_out.dims3("causal_conv_shared_backward")?;
    if kernel.len() != steps {
        return Err(Error::dim(
            "causal_conv_shared_backward",
            grad_out.shape(),
            &[kernel.len()],
        ));
    }
    let grads = conv_backward(grad_out, None, Kernels::Shared(kernel), backend, true);
    Ok(grads.input.expect("input gradient requested"))
}

/// Input and kernel gradients of [`causal_conv`].
pub fn causal_conv_backward<T: Real>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    kernel: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    causal_conv_backward_opts(grad_out, input, kernel, ConvBackend::Auto, true, true)
}

pub fn causal_conv_backward_opts<T: Real>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    kernel: &Tensor<T>,
    backend: ConvBackend,
    need_input: bool,
    need_kernel: bool,
) -> Result<ConvGrads<T>> {
    check_kernel("causal_conv_backward", input, kernel)?;
    if grad_out.shape() != input.shape() {
        return Err(Error::dim("causal_conv_backward", grad_out.shape(), input.shape()));
    }
    Ok(conv_backward(
        grad_out,
        need_kernel.then_some(input),
        Kernels::PerChannel(kernel.data()),
        backend,
        need_input,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both(input: &Tensor<f64>, kernel: &Tensor<f64>) -> [Tensor<f64>; 2] {
        [ConvBackend::Direct, ConvBackend::Transform]
            .map(|be| causal_conv_with(input, kernel, be).unwrap())
    }

    #[test]
    fn unit_impulse_kernel_is_identity() {
        let input = Tensor::from_fn(&[2, 3, 7], |i| (i as f64).sin());
        let kernel = Tensor::from_fn(&[3, 7], |i| if i % 7 == 0 { 1.0 } else { 0.0 });
        for out in both(&input, &kernel) {
            assert!(out.max_abs_diff(&input).unwrap() < 1e-12);
        }
    }

    #[test]
    fn impulse_response_is_the_kernel_row() {
        let beta: f64 = 0.8;
        let mut input = Tensor::zeros(&[1, 1, 6]);
        input.data_mut()[0] = 1.0;
        let kernel = Tensor::from_fn(&[1, 6], |j| beta.powi(j as i32));
        for out in both(&input, &kernel) {
            assert!(out.max_abs_diff(&kernel.clone().reshape(&[1, 1, 6]).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn geometric_series_sum() {
        let input = Tensor::from_vec(&[1, 1, 3], vec![1.0, 1.0, 1.0]).unwrap();
        let kernel = Tensor::from_vec(&[1, 3], vec![1.0, 0.5, 0.25]).unwrap();
        for out in both(&input, &kernel) {
            for (got, want) in out.data().iter().zip([1.0, 1.5, 1.75]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_channel_mismatch_is_a_dimension_error() {
        let input = Tensor::<f64>::zeros(&[1, 3, 4]);
        assert!(matches!(
            causal_conv(&input, &Tensor::zeros(&[2, 4])),
            Err(Error::Dimension { .. })
        ));
        assert!(causal_conv(&input, &Tensor::zeros(&[3, 5])).is_err());
        assert!(causal_conv_backward(&Tensor::zeros(&[1, 3, 3]), &input, &Tensor::zeros(&[3, 4])).is_err());
    }

    #[test]
    fn zero_grad_out_gives_zero_gradients() {
        let input = Tensor::from_fn(&[2, 2, 5], |i| i as f64);
        let kernel = Tensor::from_fn(&[2, 5], |i| 1.0 / (1.0 + i as f64));
        for be in [ConvBackend::Direct, ConvBackend::Transform] {
            let g = causal_conv_backward_opts(&Tensor::zeros(&[2, 2, 5]), &input, &kernel, be, true, true).unwrap();
            assert!(g.input.unwrap().data().iter().all(|v| v.abs() < 1e-15));
            assert!(g.kernel.unwrap().data().iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn impulse_input_and_impulse_grad_give_single_kernel_entry() {
        // x = δ at t=1, g = δ at t=4 → grad_kernel = δ at lag 3.
        let mut x = Tensor::<f64>::zeros(&[1, 1, 6]);
        x.data_mut()[1] = 1.0;
        let mut g = Tensor::zeros(&[1, 1, 6]);
        g.data_mut()[4] = 1.0;
        let kernel = Tensor::full(&[1, 6], 0.5);
        for be in [ConvBackend::Direct, ConvBackend::Transform] {
            let gk = causal_conv_backward_opts(&g, &x, &kernel, be, false, true).unwrap().kernel.unwrap();
            for (j, &v) in gk.data().iter().enumerate() {
                let want = if j == 3 { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "lag {j}: {v}");
            }
        }
    }

    #[test]
    fn shared_kernel_matches_per_channel_copies() {
        let input = Tensor::from_fn(&[3, 4, 9], |i| ((i * 7) % 5) as f64);
        let ramp: Vec<f64> = (1..=9).map(|v| v as f64).collect();
        let per_channel = Tensor::from_fn(&[4, 9], |i| ramp[i % 9]);
        for be in [ConvBackend::Direct, ConvBackend::Transform] {
            let a = causal_conv_shared(&input, &ramp, be).unwrap();
            let b = causal_conv_with(&input, &per_channel, be).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-9);
            let ga = causal_conv_shared_backward(&input, &ramp, be).unwrap();
            let gb = causal_conv_backward_opts(&input, &input, &per_channel, be, true, false)
                .unwrap()
                .input
                .unwrap();
            assert!(ga.max_abs_diff(&gb).unwrap() < 1e-9);
        }
    }

    #[test]
    fn empty_batch_is_fine() {
        let input = Tensor::<f32>::zeros(&[0, 3, 300]);
        let out = causal_conv(&input, &Tensor::zeros(&[3, 300])).unwrap();
        assert_eq!(out.shape(), &[0, 3, 300]);
    }
}
