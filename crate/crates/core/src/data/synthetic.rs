use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{Real, Tensor};
use crate::{Error, Result};

/// Per-sample firing-rate bounds in Hz.
pub const DEFAULT_RATE_RANGE: (f64, f64) = (0.0, 200.0);

/// Independent Bernoulli spikes. Sample `b` fires at a rate `r_b ~ U(lo, hi)` Hz,
/// so each bin of width `dt_ms` spikes with probability `r_b·dt_ms/1000`.
pub fn gen_synthetic<T: Real>(
    batch: usize,
    neurons: usize,
    steps: usize,
    dt_ms: f64,
    rate_range: (f64, f64),
    seed: u64,
) -> Result<Tensor<T>> {
    let (lo, hi) = rate_range;
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Rate(format!("invalid rate range {lo}..{hi} Hz")));
    }
    if !(dt_ms > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt_ms}")));
    }
    if hi * dt_ms / 1000.0 > 1.0 {
        return Err(Error::Rate(format!(
            "{hi} Hz at dt={dt_ms} ms gives spike probability {} > 1",
            hi * dt_ms / 1000.0
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Tensor::zeros(&[batch, neurons, steps]);
    let plane = neurons * steps;
    for b in 0..batch {
        let rate = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let p = rate * dt_ms / 1000.0;
        for v in &mut out.data_mut()[b * plane..(b + 1) * plane] {
            if rng.random_bool(p) {
                *v = T::one();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_silent() {
        let s = gen_synthetic::<f32>(4, 10, 50, 1.0, (0.0, 0.0), 1).unwrap();
        assert_eq!(s.sum(), 0.0);
    }

    #[test]
    fn fixed_rate_gives_expected_probability() {
        // 200 Hz at 1 ms → p = 0.2
        let s = gen_synthetic::<f64>(1, 100, 1000, 1.0, (200.0, 200.0), 2).unwrap();
        let p = s.sum() / 1e5;
        let se = (0.2f64 * 0.8 / 1e5).sqrt();
        assert!((p - 0.2).abs() < 4.0 * se, "{p}");
    }

    #[test]
    fn impossible_rates_are_rejected() {
        assert!(matches!(
            gen_synthetic::<f32>(1, 1, 1, 10.0, (0.0, 200.0), 0),
            Err(Error::Rate(_))
        ));
        assert!(gen_synthetic::<f32>(1, 1, 1, 1.0, (50.0, 10.0), 0).is_err());
    }

    #[test]
    fn same_seed_same_spikes() {
        let a = gen_synthetic::<f32>(3, 20, 40, 1.0, DEFAULT_RATE_RANGE, 9).unwrap();
        let b = gen_synthetic::<f32>(3, 20, 40, 1.0, DEFAULT_RATE_RANGE, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.is_binary());
    }
}
