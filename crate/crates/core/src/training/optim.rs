use super::AdamConfig;
use crate::neuron::clip_beta;
use crate::numerics::{Real, Tensor};
use crate::seq::{LayerGrads, LayerParams};
use crate::{Error, Result};

/// `lr0 / 10^k` where `k` counts milestones at or before `epoch`.
pub fn lr_schedule(epoch: usize, milestones: &[usize], lr0: f64) -> f64 {
    let k = milestones.iter().filter(|&&m| m <= epoch).count();
    lr0 / 10f64.powi(k as i32)
}

/// Moment buffers for a flat list of tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub cfg: AdamConfig,
    pub step: u64,
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(cfg: AdamConfig, shapes: &[&[usize]]) -> Self {
        AdamState {
            cfg,
            step: 0,
            m: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            v: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
        }
    }

    /// Three slots per layer: weights, bias, beta.
    pub fn for_layers(cfg: AdamConfig, layers: &[LayerParams<T>]) -> Self {
        let shapes: Vec<&[usize]> = layers
            .iter()
            .flat_map(|l| [l.weights.shape(), l.bias.shape(), l.beta.shape()])
            .collect();
        AdamState::new(cfg, &shapes)
    }
}

/// One Adam update of `values` in place. A `None` gradient leaves that tensor
/// and its moments untouched. Nothing is modified if any gradient is non-finite.
pub fn adam_update<T: Real>(
    values: &mut [&mut Tensor<T>],
    grads: &[Option<&Tensor<T>>],
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<()> {
    if values.len() != grads.len() || values.len() != state.m.len() {
        return Err(Error::State(format!(
            "optimizer tracks {} tensors, got {} values and {} gradients",
            state.m.len(),
            values.len(),
            grads.len()
        )));
    }
    for (k, (v, g)) in values.iter().zip(grads).enumerate() {
        if let Some(g) = g {
            if g.shape() != v.shape() || state.m[k].shape() != v.shape() {
                return Err(Error::dim("adam_update", v.shape(), g.shape()));
            }
            if !g.all_finite() {
                return Err(Error::Numeric(format!("non-finite gradient in parameter tensor {k}")));
            }
        }
    }
    state.step += 1;
    let AdamConfig { beta1, beta2, eps } = state.cfg;
    let c1 = 1.0 - beta1.powi(state.step as i32);
    let c2 = 1.0 - beta2.powi(state.step as i32);
    let (b1, b2) = (T::lit(beta1), T::lit(beta2));
    let step_size = T::lit(lr / c1);
    let (sqrt_c2, eps) = (T::lit(c2.sqrt()), T::lit(eps));
    for (k, (value, g)) in values.iter_mut().zip(grads).enumerate() {
        let Some(g) = g else { continue };
        let (m, v) = (state.m[k].data_mut(), state.v[k].data_mut());
        for (((p, &gi), mi), vi) in value.data_mut().iter_mut().zip(g.data()).zip(m).zip(v) {
            *mi = b1 * *mi + (T::one() - b1) * gi;
            *vi = b2 * *vi + (T::one() - b2) * gi * gi;
            *p -= step_size * *mi / (vi.sqrt() / sqrt_c2 + eps);
        }
    }
    Ok(())
}

/// Adam over every layer's weights, biases and (if trainable) β, then clips β into `[0, 1]`.
pub fn adam_step<T: Real>(
    params: &mut [LayerParams<T>],
    grads: &[LayerGrads<T>],
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::State(format!("{} layers but {} gradients", params.len(), grads.len())));
    }
    let g: Vec<Option<&Tensor<T>>> = params
        .iter()
        .zip(grads)
        .flat_map(|(p, g)| {
            [
                Some(&g.weights),
                Some(&g.bias),
                g.beta.as_ref().filter(|_| p.trainable_beta),
            ]
        })
        .collect();
    let mut values: Vec<&mut Tensor<T>> = params
        .iter_mut()
        .flat_map(|p| [&mut p.weights, &mut p.bias, &mut p.beta])
        .collect();
    adam_update(&mut values, &g, state, lr)?;
    for p in params.iter_mut().filter(|p| p.trainable_beta) {
        p.beta.data_mut().iter_mut().for_each(|b| *b = clip_beta(*b));
    }
    Ok(())
}
