use serde::{Deserialize, Serialize};

use crate::numerics::{Real, Tensor};
use crate::{Error, Result};

/// Time-to-first-spike latency code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtfsEncoderCfg {
    pub i_max: f64,
    pub steps: usize,
}

impl TtfsEncoderCfg {
    pub fn validate(&self) -> Result<()> {
        if !(self.i_max > 0.0) || !self.i_max.is_finite() {
            return Err(Error::Parameter(format!("i_max must be positive, got {}", self.i_max)));
        }
        if self.steps == 0 {
            return Err(Error::Parameter("TTFS window needs at least one step".into()));
        }
        Ok(())
    }
}

/// `floor((i_max - v)/i_max · T)`; `None` when that lands on `T` (zero intensity).
pub fn ttfs_spike_time(value: f64, cfg: &TtfsEncoderCfg) -> Result<Option<usize>> {
    if !(value >= 0.0 && value <= cfg.i_max) {
        return Err(Error::Encoding(format!("intensity {value} outside [0, {}]", cfg.i_max)));
    }
    let t = ((cfg.i_max - value) / cfg.i_max * cfg.steps as f64).floor() as usize;
    Ok((t < cfg.steps).then_some(t))
}

/// Encodes `[n, d]` intensities into `[n, d, T]` spikes, at most one per row.
pub fn ttfs_encode<T: Real>(values: &Tensor<T>, cfg: &TtfsEncoderCfg) -> Result<Tensor<T>> {
    cfg.validate()?;
    let [n, d] = values.dims2("ttfs_encode")?;
    let mut out = Tensor::zeros(&[n, d, cfg.steps]);
    for b in 0..n {
        for j in 0..d {
            if let Some(t) = ttfs_spike_time(values.data()[b * d + j].as_f64(), cfg)? {
                out.row_mut(b, j)[t] = T::one();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CFG: TtfsEncoderCfg = TtfsEncoderCfg { i_max: 1.0, steps: 100 };

    #[test]
    fn formula_cases() {
        assert_eq!(ttfs_spike_time(1.0, &CFG).unwrap(), Some(0));
        assert_eq!(ttfs_spike_time(0.0, &CFG).unwrap(), None);
        assert_eq!(ttfs_spike_time(0.35, &CFG).unwrap(), Some(65));
        assert!(matches!(ttfs_spike_time(1.01, &CFG), Err(Error::Encoding(_))));
        assert!(ttfs_spike_time(-0.1, &CFG).is_err());
        assert!(ttfs_spike_time(f64::NAN, &CFG).is_err());
    }

    #[test]
    fn tensor_encoding() {
        let v = Tensor::<f64>::from_vec(&[1, 3], vec![1.0, 0.0, 0.35]).unwrap();
        let s = ttfs_encode(&v, &CFG).unwrap();
        assert_eq!(s.shape(), &[1, 3, 100]);
        assert_eq!(s.row(0, 0)[0], 1.0);
        assert_eq!(s.row(0, 1).iter().sum::<f64>(), 0.0);
        assert_eq!(s.row(0, 2)[65], 1.0);
        assert!(ttfs_encode(&v, &TtfsEncoderCfg { i_max: 0.0, steps: 5 }).is_err());
    }

    proptest! {
        #[test]
        fn brighter_is_never_later(a in 0.0f64..=1.0, b in 0.0f64..=1.0, steps in 1usize..300) {
            let cfg = TtfsEncoderCfg { i_max: 1.0, steps };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let t_lo = ttfs_spike_time(lo, &cfg).unwrap().unwrap_or(steps);
            let t_hi = ttfs_spike_time(hi, &cfg).unwrap().unwrap_or(steps);
            prop_assert!(t_hi <= t_lo);
        }
    }
}
