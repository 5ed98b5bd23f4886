use crate::{Error, Result};

use super::gemm::{gemm, View};
use super::{Real, Tensor};

/// Inputs whose fraction of nonzeros falls below this use the scatter kernels.
const SPARSE_DENSITY: f64 = 0.05;

/// Gradients of [`affine_forward`].
#[derive(Debug, Clone)]
pub struct AffineGrads<T> {
    /// `None` when the caller asked not to propagate into the input.
    pub input: Option<Tensor<T>>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

fn check_shapes<T: Real>(
    op: &'static str,
    input: &Tensor<T>,
    weights: &Tensor<T>,
) -> Result<([usize; 3], usize)> {
    let [batch, n_in, steps] = input.dims3(op)?;
    let [n_out, w_in] = weights.dims2(op)?;
    if w_in != n_in {
        return Err(Error::dim(op, input.shape(), weights.shape()));
    }
    Ok(([batch, n_in, steps], n_out))
}

/// Nonzero `(neuron, step, value)` entries of batch element `b`, if sparse enough.
fn sparse_entries<T: Real>(input: &Tensor<T>) -> Option<Vec<Vec<(usize, usize, T)>>> {
    let nnz = input.data().iter().filter(|&&v| v != T::zero()).count();
    if input.is_empty() || (nnz as f64) >= SPARSE_DENSITY * input.len() as f64 {
        return None;
    }
    let [batch, n_in, steps] = [input.shape()[0], input.shape()[1], input.shape()[2]];
    Some(
        (0..batch)
            .map(|b| {
                let mut entries = Vec::new();
                for j in 0..n_in {
                    for (t, &v) in input.row(b, j).iter().enumerate() {
                        if v != T::zero() {
                            entries.push((j, t, v));
                        }
                    }
                }
                debug_assert!(entries.iter().all(|&(_, t, _)| t < steps));
                entries
            })
            .collect(),
    )
}

fn transpose<T: Real>(src: &[T], rows: usize, cols: usize, dst: &mut [T]) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// `out[b,i,t] = bias[i] + Σ_j weights[i,j]·input[b,j,t]`.
pub fn affine_forward<T: Real>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let ([batch, n_in, steps], n_out) = check_shapes("affine_forward", input, weights)?;
    if bias.dims1("affine_forward")? != n_out {
        return Err(Error::dim("affine_forward", weights.shape(), bias.shape()));
    }
    let mut out = Tensor::zeros(&[batch, n_out, steps]);
    let plane = n_out * steps;

    if let Some(entries) = sparse_entries(input) {
        let mut wt = vec![T::zero(); n_in * n_out];
        transpose(weights.data(), n_out, n_in, &mut wt);
        let mut scratch = vec![T::zero(); steps * n_out];
        for (b, nz) in entries.iter().enumerate() {
            scratch.iter_mut().for_each(|v| *v = T::zero());
            for &(j, t, v) in nz {
                let dst = &mut scratch[t * n_out..(t + 1) * n_out];
                for (d, &w) in dst.iter_mut().zip(&wt[j * n_out..(j + 1) * n_out]) {
                    *d += v * w;
                }
            }
            let out_b = &mut out.data_mut()[b * plane..(b + 1) * plane];
            for i in 0..n_out {
                let bi = bias.data()[i];
                for t in 0..steps {
                    out_b[i * steps + t] = bi + scratch[t * n_out + i];
                }
            }
        }
        return Ok(out);
    }

    for b in 0..batch {
        gemm(
            n_out,
            n_in,
            steps,
            weights.data(),
            View::rows(0, n_in),
            input.data(),
            View::rows(b * n_in * steps, steps),
            out.data_mut(),
            View::rows(b * plane, steps),
            false,
        );
    }
    for b in 0..batch {
        for i in 0..n_out {
            let bi = bias.data()[i];
            out.row_mut(b, i).iter_mut().for_each(|v| *v += bi);
        }
    }
    Ok(out)
}

/// Adjoint of [`affine_forward`] including the input gradient.
pub fn affine_backward<T: Real>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    weights: &Tensor<T>,
) -> Result<AffineGrads<T>> {
    affine_backward_opts(grad_out, input, weights, true)
}

/// Adjoint of [`affine_forward`]; skips the input gradient unless `need_input`.
pub fn affine_backward_opts<T: Real>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    weights: &Tensor<T>,
    need_input: bool,
) -> Result<AffineGrads<T>> {
    let ([batch, n_in, steps], n_out) = check_shapes("affine_backward", input, weights)?;
    if grad_out.shape() != [batch, n_out, steps] {
        return Err(Error::dim(
            "affine_backward",
            grad_out.shape(),
            &[batch, n_out, steps],
        ));
    }
    let plane_out = n_out * steps;
    let plane_in = n_in * steps;

    let mut grad_bias = Tensor::zeros(&[n_out]);
    for b in 0..batch {
        for i in 0..n_out {
            let s: T = grad_out.row(b, i).iter().copied().sum();
            grad_bias.data_mut()[i] += s;
        }
    }

    let mut grad_w = Tensor::zeros(&[n_out, n_in]);
    if let Some(entries) = sparse_entries(input) {
        let mut gwt = vec![T::zero(); n_in * n_out];
        let mut scratch = vec![T::zero(); steps * n_out];
        for (b, nz) in entries.iter().enumerate() {
            if nz.is_empty() {
                continue;
            }
            transpose(
                &grad_out.data()[b * plane_out..(b + 1) * plane_out],
                n_out,
                steps,
                &mut scratch,
            );
            for &(j, t, v) in nz {
                let dst = &mut gwt[j * n_out..(j + 1) * n_out];
                for (d, &g) in dst.iter_mut().zip(&scratch[t * n_out..(t + 1) * n_out]) {
                    *d += v * g;
                }
            }
        }
        transpose(&gwt, n_in, n_out, grad_w.data_mut());
    } else {
        for b in 0..batch {
            gemm(
                n_out,
                steps,
                n_in,
                grad_out.data(),
                View::rows(b * plane_out, steps),
                input.data(),
                View::rows(b * plane_in, steps).t(),
                grad_w.data_mut(),
                View::rows(0, n_in),
                true,
            );
        }
    }

    let grad_input = if need_input {
        let mut gi = Tensor::zeros(&[batch, n_in, steps]);
        for b in 0..batch {
            gemm(
                n_in,
                n_out,
                steps,
                weights.data(),
                View::rows(0, n_in).t(),
                grad_out.data(),
                View::rows(b * plane_out, steps),
                gi.data_mut(),
                View::rows(b * plane_in, steps),
                false,
            );
        }
        Some(gi)
    } else {
        None
    };

    Ok(AffineGrads {
        input: grad_input,
        weights: grad_w,
        bias: grad_bias,
    })
}
