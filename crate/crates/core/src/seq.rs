//! Time-stepped LIF simulation with reset, and its surrogate-gradient BPTT.
//!
//! One update per step and neuron:
//!
//! ```text
//! v[t] = β·v[t-1] + (1-β)·(b + W·s_in[t]) - raw[t-1]
//! raw[t] = spike_fn(v[t])
//! out[t] = (1 - d[t])·raw[t],  d[t+1] = max(d[t], out[t])   (single-spike mode)
//! ```

use serde::{Deserialize, Serialize};

use crate::neuron::{spike_fn, surrogate_grad};
use crate::numerics::{affine_backward_opts, affine_forward, Real, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpikeMode {
    /// Integrate, fire, reset, repeat.
    Multi,
    /// At most one emitted spike per neuron and stimulus.
    Single,
}

/// How a layer turns potentials into output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Firing {
    Spiking(SpikeMode),
    /// Infinite threshold: never spikes, the potential trace is the output.
    Readout,
}

/// Weights, biases and per-neuron decay of one dense LIF layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    /// `[n_out, n_in]`
    pub weights: Tensor<T>,
    /// `[n_out]`
    pub bias: Tensor<T>,
    /// `[n_out]`, each in `[0, 1]`
    pub beta: Tensor<T>,
    pub trainable_beta: bool,
}

impl<T: Real> LayerParams<T> {
    pub fn new(weights: Tensor<T>, bias: Tensor<T>, beta: Tensor<T>, trainable_beta: bool) -> Result<Self> {
        let p = LayerParams {
            weights,
            bias,
            beta,
            trainable_beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let [n_out, _] = self.weights.dims2("layer weights")?;
        if self.bias.dims1("layer bias")? != n_out {
            return Err(Error::dim("layer bias", self.weights.shape(), self.bias.shape()));
        }
        if self.beta.dims1("layer beta")? != n_out {
            return Err(Error::dim("layer beta", self.weights.shape(), self.beta.shape()));
        }
        if !(self.weights.all_finite() && self.bias.all_finite()) {
            return Err(Error::Numeric("non-finite layer parameters".into()));
        }
        if let Some(b) = self.beta.data().iter().find(|b| !(**b >= T::zero() && **b <= T::one())) {
            return Err(Error::Parameter(format!("beta {b} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn n_in(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn n_out(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn cast<U: Real>(&self) -> LayerParams<U> {
        LayerParams {
            weights: self.weights.cast(),
            bias: self.bias.cast(),
            beta: self.beta.cast(),
            trainable_beta: self.trainable_beta,
        }
    }
}

/// Parameter gradients of one layer, plus the gradient for its input when requested.
#[derive(Debug, Clone)]
pub struct LayerGrads<T> {
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
    /// `None` when beta is frozen.
    pub beta: Option<Tensor<T>>,
    pub input: Option<Tensor<T>>,
}

/// Per-neuron state carried between steps, each `[batch, neurons]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqLayerState<T> {
    pub v: Tensor<T>,
    /// 1 once the neuron has emitted its spike (single-spike mode).
    pub d: Tensor<T>,
    /// Raw spike of the previous step; drives the reset.
    pub last_spike: Tensor<T>,
}

impl<T: Real> SeqLayerState<T> {
    /// Everything at rest.
    pub fn rest(batch: usize, neurons: usize) -> Self {
        SeqLayerState {
            v: Tensor::zeros(&[batch, neurons]),
            d: Tensor::zeros(&[batch, neurons]),
            last_spike: Tensor::zeros(&[batch, neurons]),
        }
    }
}

/// One neuron update. Returns the emitted spike.
#[inline(always)]
fn advance<T: Real>(v: &mut T, d: &mut T, last: &mut T, current: T, beta: T, firing: Firing) -> T {
    *v = beta * *v + (T::one() - beta) * current - *last;
    match firing {
        Firing::Readout => T::zero(),
        Firing::Spiking(mode) => {
            let raw = spike_fn(*v);
            *last = raw;
            match mode {
                SpikeMode::Multi => raw,
                SpikeMode::Single => {
                    let out = (T::one() - *d) * raw;
                    if out > *d {
                        *d = out;
                    }
                    out
                }
            }
        }
    }
}

/// Advances every neuron by one step given the input spikes `[batch, n_in]` of that step.
pub fn seq_step<T: Real>(
    state: &SeqLayerState<T>,
    params: &LayerParams<T>,
    input_t: &Tensor<T>,
    firing: Firing,
) -> Result<(SeqLayerState<T>, Tensor<T>)> {
    let [batch, n_in] = input_t.dims2("seq_step")?;
    let n = params.n_out();
    if state.v.shape() != [batch, n] || state.d.shape() != [batch, n] || state.last_spike.shape() != [batch, n] {
        return Err(Error::dim("seq_step", state.v.shape(), &[batch, n]));
    }
    let current = affine_forward(
        &input_t.clone().reshape(&[batch, n_in, 1])?,
        &params.weights,
        &params.bias,
    )?;
    let mut next = state.clone();
    let mut out = Tensor::zeros(&[batch, n]);
    for s in 0..batch * n {
        out.data_mut()[s] = advance(
            &mut next.v.data_mut()[s],
            &mut next.d.data_mut()[s],
            &mut next.last_spike.data_mut()[s],
            current.data()[s],
            params.beta.data()[s % n],
            firing,
        );
    }
    Ok((next, out))
}

/// Saved forward quantities of one layer, each `[batch, neurons, steps]`.
#[derive(Debug, Clone)]
pub struct SeqLayerTrace<T> {
    pub firing: Firing,
    /// `b + W·s_in`
    pub current: Tensor<T>,
    pub v: Tensor<T>,
    /// Emitted spikes; all zero for a readout layer.
    pub out: Tensor<T>,
}

impl<T: Real> SeqLayerTrace<T> {
    /// What the next layer (or the loss) consumes.
    pub fn output(&self) -> &Tensor<T> {
        match self.firing {
            Firing::Readout => &self.v,
            Firing::Spiking(_) => &self.out,
        }
    }
}

/// Simulates one layer over the whole input window, step by step.
pub fn seq_layer_forward<T: Real>(
    input: &Tensor<T>,
    params: &LayerParams<T>,
    firing: Firing,
) -> Result<SeqLayerTrace<T>> {
    let [_, n_in, steps] = input.dims3("seq_layer_forward")?;
    if n_in != params.n_in() {
        return Err(Error::dim("seq_layer_forward", input.shape(), params.weights.shape()));
    }
    input.ensure_binary("sequential layer input")?;
    // The drive does not depend on the neuron state, so it is formed for all
    // steps up front; only the membrane recurrence walks through time.
    let current = affine_forward(input, &params.weights, &params.bias)?;
    let n = params.n_out();
    let mut v = Tensor::zeros(current.shape());
    let mut out = Tensor::zeros(current.shape());
    let beta = params.beta.data();
    if steps > 0 {
        let rows = current.data().chunks_exact(steps);
        let v_rows = v.data_mut().chunks_exact_mut(steps);
        let o_rows = out.data_mut().chunks_exact_mut(steps);
        for (r, (cur, (vr, or))) in rows.zip(v_rows.zip(o_rows)).enumerate() {
            let b_i = beta[r % n];
            let (mut vs, mut d, mut last) = (T::zero(), T::zero(), T::zero());
            for t in 0..steps {
                or[t] = advance(&mut vs, &mut d, &mut last, cur[t], b_i, firing);
                vr[t] = vs;
            }
        }
    }
    let trace = SeqLayerTrace { firing, current, v, out };
    Ok(trace)
}

/// Reverse-time surrogate-gradient pass through one layer.
///
/// `grad_out` is the gradient with respect to [`SeqLayerTrace::output`]. The
/// reset and the single-spike gate are treated as constants.
pub fn seq_layer_backward<T: Real>(
    trace: &SeqLayerTrace<T>,
    input: &Tensor<T>,
    params: &LayerParams<T>,
    grad_out: &Tensor<T>,
    slope: T,
    need_input: bool,
) -> Result<LayerGrads<T>> {
    let [batch, n, steps] = trace.v.dims3("seq_layer_backward")?;
    if grad_out.shape() != trace.v.shape() {
        return Err(Error::dim("seq_layer_backward", grad_out.shape(), trace.v.shape()));
    }
    if n != params.n_out() {
        return Err(Error::dim("seq_layer_backward", trace.v.shape(), params.weights.shape()));
    }
    let mut grad_current = Tensor::zeros(&[batch, n, steps]);
    let mut grad_beta = vec![T::zero(); n];
    for b in 0..batch {
        for i in 0..n {
            let beta = params.beta.data()[i];
            let (v, cur, g) = (trace.v.row(b, i), trace.current.row(b, i), grad_out.row(b, i));
            // Steps after the emitted spike see a closed gate.
            let open_until = match trace.firing {
                Firing::Spiking(SpikeMode::Single) => trace
                    .out
                    .row(b, i)
                    .iter()
                    .position(|&s| s != T::zero())
                    .unwrap_or(steps),
                _ => steps,
            };
            let gc = grad_current.row_mut(b, i);
            let mut gv = T::zero();
            let mut gb = T::zero();
            for t in (0..steps).rev() {
                let local = match trace.firing {
                    Firing::Readout => g[t],
                    Firing::Spiking(_) if t <= open_until => g[t] * surrogate_grad(v[t], slope),
                    Firing::Spiking(_) => T::zero(),
                };
                gv = beta * gv + local;
                gc[t] = (T::one() - beta) * gv;
                let prev = if t == 0 { T::zero() } else { v[t - 1] };
                gb += gv * (prev - cur[t]);
            }
            grad_beta[i] += gb;
        }
    }
    let affine = affine_backward_opts(&grad_current, input, &params.weights, need_input)?;
    Ok(LayerGrads {
        weights: affine.weights,
        bias: affine.bias,
        beta: if params.trainable_beta {
            Some(Tensor::from_vec(&[n], grad_beta)?)
        } else {
            None
        },
        input: affine.input,
    })
}

/// Runs a stack of layers. Every layer spikes under `mode`, except the last
/// when `readout` is set.
pub fn seq_forward<T: Real>(
    params: &[LayerParams<T>],
    input: &Tensor<T>,
    mode: SpikeMode,
    readout: bool,
) -> Result<Vec<SeqLayerTrace<T>>> {
    input.ensure_binary("network input")?;
    let mut traces: Vec<SeqLayerTrace<T>> = Vec::with_capacity(params.len());
    for (l, p) in params.iter().enumerate() {
        let firing = if readout && l + 1 == params.len() {
            Firing::Readout
        } else {
            Firing::Spiking(mode)
        };
        let x = traces.last().map_or(input, |tr| &tr.out);
        let trace = seq_layer_forward(x, p, firing)?;
        traces.push(trace);
    }
    Ok(traces)
}

/// Backpropagates `grad_top` (gradient w.r.t. the last layer's output) through the stack.
pub fn seq_backward<T: Real>(
    params: &[LayerParams<T>],
    input: &Tensor<T>,
    traces: &[SeqLayerTrace<T>],
    grad_top: &Tensor<T>,
    slope: T,
) -> Result<Vec<LayerGrads<T>>> {
    if traces.len() != params.len() || traces.is_empty() {
        return Err(Error::State(format!(
            "backward needs one trace per layer: {} layers, {} traces",
            params.len(),
            traces.len()
        )));
    }
    let mut grads = Vec::with_capacity(params.len());
    let mut upstream = grad_top.clone();
    for l in (0..params.len()).rev() {
        let x = if l == 0 { input } else { &traces[l - 1].out };
        let mut g = seq_layer_backward(&traces[l], x, &params[l], &upstream, slope, l > 0)?;
        if let Some(gi) = g.input.take() {
            upstream = gi;
        }
        grads.push(g);
    }
    grads.reverse();
    Ok(grads)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numerics::finite_diff_check;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponential_decay_is_exact_for_constant_current() {
        // with β = exp(-dt/τ) the recurrence samples I·(1 - e^{-t/τ}) exactly
        let (tau, horizon, drive) = (10.0, 20.0, 0.8);
        let exact = drive * (1.0 - (-horizon / tau as f64).exp());
        for dt in [1.0, 0.5, 0.25, 0.125] {
            let steps = (horizon / dt) as usize;
            let beta = crate::neuron::beta_from_tau(tau, dt).unwrap();
            let p = single_neuron(0.0, drive, beta);
            let tr = seq_layer_forward(&Tensor::zeros(&[1, 1, steps]), &p, Firing::Readout).unwrap();
            assert!((tr.v.row(0, 0)[steps - 1] - exact).abs() < 1e-12, "dt={dt}");
        }
    }

    fn single_neuron(w: f64, bias: f64, beta: f64) -> LayerParams<f64> {
        LayerParams::new(
            Tensor::full(&[1, 1], w),
            Tensor::full(&[1], bias),
            Tensor::full(&[1], beta),
            true,
        )
        .unwrap()
    }

    #[test]
    fn hand_step_without_spike() {
        // 0.9·0.5 + 0.1·1.0 = 0.55
        let p = single_neuron(1.0, 0.0, 0.9);
        let mut st = SeqLayerState::rest(1, 1);
        st.v.data_mut()[0] = 0.5;
        let input = Tensor::full(&[1, 1], 1.0);
        let (next, out) = seq_step(&st, &p, &input, Firing::Spiking(SpikeMode::Multi)).unwrap();
        assert!((next.v.data()[0] - 0.55).abs() < 1e-15);
        assert_eq!(out.data()[0], 0.0);
    }

    #[test]
    fn memoryless_neuron_resets_to_exact_threshold() {
        let p = single_neuron(0.0, 2.0, 0.0);
        let input = Tensor::zeros(&[1, 1]);
        let st = SeqLayerState::rest(1, 1);
        let (st, s1) = seq_step(&st, &p, &input, Firing::Spiking(SpikeMode::Multi)).unwrap();
        assert_eq!((st.v.data()[0], s1.data()[0]), (2.0, 1.0));
        let (st, s2) = seq_step(&st, &p, &input, Firing::Spiking(SpikeMode::Multi)).unwrap();
        assert_eq!((st.v.data()[0], s2.data()[0]), (1.0, 0.0));
    }

    #[test]
    fn rest_is_an_equilibrium() {
        let p = single_neuron(0.7, 0.0, 0.9);
        let tr = seq_layer_forward(&Tensor::zeros(&[2, 1, 50]), &p, Firing::Spiking(SpikeMode::Multi)).unwrap();
        assert!(tr.v.data().iter().all(|&v| v == 0.0));
        assert_eq!(tr.out.sum(), 0.0);
    }

    #[test]
    fn strong_drive_single_vs_multi() {
        let p = single_neuron(0.0, 5.0, 0.5);
        let x = Tensor::zeros(&[1, 1, 40]);
        let single = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Single)).unwrap();
        let multi = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Multi)).unwrap();
        assert_eq!(single.out.sum(), 1.0);
        assert!(multi.out.sum() >= 10.0);
        // periodic: equal gaps between consecutive spikes once settled
        let times: Vec<usize> = (0..40).filter(|&t| multi.out.data()[t] == 1.0).collect();
        let gaps: Vec<usize> = times.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps[gaps.len() / 2..].windows(2).all(|w| w[0] == w[1]), "{times:?}");
    }

    #[test]
    fn weak_drive_gives_identical_empty_outputs() {
        let p = single_neuron(0.3, 0.1, 0.9);
        let mut x = Tensor::zeros(&[1, 1, 30]);
        x.data_mut()[3] = 1.0;
        let a = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Single)).unwrap();
        let b = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Multi)).unwrap();
        assert_eq!(a.out, b.out);
        assert_eq!(a.out.sum(), 0.0);
    }

    #[test]
    fn non_binary_input_is_rejected() {
        let p = single_neuron(1.0, 0.0, 0.9);
        let x = Tensor::full(&[1, 1, 3], 0.5);
        assert!(matches!(seq_forward(&[p], &x, SpikeMode::Single, false), Err(Error::Encoding(_))));
    }

    #[test]
    fn step_and_layer_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (b, n_in, n, t) = (3, 5, 4, 20);
        let p = random_params(&mut rng, n_in, n, 1.5);
        let x = random_spikes(&mut rng, b, n_in, t, 0.4);
        for firing in [Firing::Spiking(SpikeMode::Single), Firing::Spiking(SpikeMode::Multi), Firing::Readout] {
            let tr = seq_layer_forward(&x, &p, firing).unwrap();
            let mut st = SeqLayerState::rest(b, n);
            for step in 0..t {
                let xt = Tensor::from_fn(&[b, n_in], |k| x.at3(k / n_in, k % n_in, step));
                let (next, out) = seq_step(&st, &p, &xt, firing).unwrap();
                for s in 0..b * n {
                    assert_eq!(next.v.data()[s], tr.v.at3(s / n, s % n, step));
                    assert_eq!(out.data()[s], tr.out.at3(s / n, s % n, step));
                }
                st = next;
            }
        }
    }

    #[test]
    fn emitted_spike_is_followed_by_reset() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_params(&mut rng, 6, 5, 2.0);
        let x = random_spikes(&mut rng, 2, 6, 60, 0.5);
        let tr = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Multi)).unwrap();
        let mut fired = 0;
        for b in 0..2 {
            for i in 0..5 {
                let beta = p.beta.data()[i];
                for t in 0..59 {
                    if tr.out.at3(b, i, t) == 1.0 {
                        fired += 1;
                        let no_reset = beta * tr.v.at3(b, i, t) + (1.0 - beta) * tr.current.at3(b, i, t + 1);
                        assert!((no_reset - tr.v.at3(b, i, t + 1) - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
        assert!(fired > 0);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_params(&mut rng, 4, 3, 1.5);
        let x = random_spikes(&mut rng, 2, 4, 10, 0.5);
        let tr = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Single)).unwrap();
        let g = seq_layer_backward(&tr, &x, &p, &Tensor::zeros(&[2, 3, 10]), 10.0, true).unwrap();
        assert_eq!(g.weights.sum(), 0.0);
        assert_eq!(g.bias.sum(), 0.0);
        assert_eq!(g.beta.unwrap().sum(), 0.0);
        assert_eq!(g.input.unwrap().sum(), 0.0);
    }

    #[test]
    fn one_step_gradient_is_the_surrogate_chain_rule() {
        // T=1: v = (1-β)(b + w·x), dL/dw = g·sur(v)·(1-β)·x
        let p = single_neuron(0.8, 0.1, 0.6);
        let x = Tensor::full(&[1, 1, 1], 1.0);
        let tr = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Single)).unwrap();
        let v = 0.4 * 0.9;
        assert!((tr.v.data()[0] - v).abs() < 1e-15);
        let g = seq_layer_backward(&tr, &x, &p, &Tensor::full(&[1, 1, 1], 2.0), 10.0, true).unwrap();
        let sur = surrogate_grad(v, 10.0);
        assert!((g.weights.data()[0] - 2.0 * sur * 0.4).abs() < 1e-14);
        assert!((g.bias.data()[0] - 2.0 * sur * 0.4).abs() < 1e-14);
        assert!((g.beta.unwrap().data()[0] + 2.0 * sur * 0.9).abs() < 1e-14);
        assert!((g.input.unwrap().data()[0] - 2.0 * sur * 0.4 * 0.8).abs() < 1e-14);
    }

    #[test]
    fn readout_layer_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (b, n_in, n, t) = (2, 4, 3, 12);
        let p = random_params(&mut rng, n_in, n, 1.0);
        let x = random_spikes(&mut rng, b, n_in, t, 0.4);
        let coef = Tensor::from_fn(&[b, n, t], |_| rng.random_range(-1.0..1.0));
        let loss = |pp: &LayerParams<f64>| -> Result<f64> {
            let tr = seq_layer_forward(&x, pp, Firing::Readout)?;
            Ok(tr.v.data().iter().zip(coef.data()).map(|(a, c)| a * c).sum())
        };
        let tr = seq_layer_forward(&x, &p, Firing::Readout).unwrap();
        let g = seq_layer_backward(&tr, &x, &p, &coef, 10.0, false).unwrap();
        let mut analytic = g.weights.data().to_vec();
        analytic.extend_from_slice(g.bias.data());
        analytic.extend_from_slice(g.beta.unwrap().data());
        let nw = n * n_in;
        let unpack = |flat: &[f64]| {
            let mut q = p.clone();
            q.weights.data_mut().copy_from_slice(&flat[..nw]);
            q.bias.data_mut().copy_from_slice(&flat[nw..nw + n]);
            q.beta.data_mut().copy_from_slice(&flat[nw + n..]);
            q
        };
        let mut point = p.weights.data().to_vec();
        point.extend_from_slice(p.bias.data());
        point.extend_from_slice(p.beta.data());
        let err = finite_diff_check(|f| loss(&unpack(f)), &point, &analytic).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn missing_traces_are_a_state_error() {
        let p = single_neuron(1.0, 0.0, 0.9);
        let x = Tensor::zeros(&[1, 1, 3]);
        let res = seq_backward(&[p], &x, &[], &Tensor::zeros(&[1, 1, 3]), 10.0);
        assert!(matches!(res, Err(Error::State(_))));
    }

    pub(crate) fn random_params(rng: &mut ChaCha8Rng, n_in: usize, n: usize, scale: f64) -> LayerParams<f64> {
        LayerParams::new(
            Tensor::from_fn(&[n, n_in], |_| rng.random_range(-0.5..1.0) * scale),
            Tensor::from_fn(&[n], |_| rng.random_range(-0.2..0.4)),
            Tensor::from_fn(&[n], |_| rng.random_range(0.0..1.0)),
            true,
        )
        .unwrap()
    }

    pub(crate) fn random_spikes(rng: &mut ChaCha8Rng, b: usize, n: usize, t: usize, p: f64) -> Tensor<f64> {
        Tensor::from_fn(&[b, n, t], |_| if rng.random_bool(p) { 1.0 } else { 0.0 })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn single_mode_emits_at_most_one_spike(seed in any::<u64>(), n_in in 1usize..8, n in 1usize..8, t in 1usize..40, scale in 0.1f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_params(&mut rng, n_in, n, scale);
            let x = random_spikes(&mut rng, 2, n_in, t, 0.5);
            let tr = seq_layer_forward(&x, &p, Firing::Spiking(SpikeMode::Single)).unwrap();
            for b in 0..2 {
                for i in 0..n {
                    prop_assert!(tr.out.row(b, i).iter().sum::<f64>() <= 1.0);
                }
            }
        }

        #[test]
        fn simulation_is_deterministic(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_params(&mut rng, 5, 4, 2.0);
            let x = random_spikes(&mut rng, 3, 5, 25, 0.5);
            let a = seq_forward(&[p.clone()], &x, SpikeMode::Multi, false).unwrap();
            let b = seq_forward(&[p], &x, SpikeMode::Multi, false).unwrap();
            prop_assert_eq!(&a[0].v, &b[0].v);
            prop_assert_eq!(&a[0].out, &b[0].out);
        }
    }
}
