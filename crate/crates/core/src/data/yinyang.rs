//! Three-class taijitu points in the unit square.
//!
//! Big disk of radius 0.5 at (0.5, 0.5); two lobes of radius 0.25 at
//! (0.25, 0.5) and (0.75, 0.5); a dot of radius 0.125 in each lobe centre.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{Real, Tensor};
use crate::Result;

const R: f64 = 0.5;
const LEFT: (f64, f64) = (0.25, 0.5);
const RIGHT: (f64, f64) = (0.75, 0.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum YinYangClass {
    Yin = 0,
    Yang = 1,
    Dot = 2,
}

fn dist2(x: f64, y: f64, c: (f64, f64)) -> f64 {
    (x - c.0).powi(2) + (y - c.1).powi(2)
}

/// Class of an in-disk point; `None` outside the big disk.
///
/// Points exactly on a boundary get the lower class index.
pub fn yinyang_class(x: f64, y: f64) -> Option<YinYangClass> {
    if dist2(x, y, (0.5, 0.5)) > R * R {
        return None;
    }
    let (dl, dr) = (dist2(x, y, LEFT), dist2(x, y, RIGHT));
    let (lobe, dot) = ((R / 2.0).powi(2), (R / 4.0).powi(2));
    if dl < dot || dr < dot {
        return Some(YinYangClass::Dot);
    }
    let yin = (y >= 0.5 && dr >= lobe) || (y < 0.5 && dl <= lobe);
    Some(if yin { YinYangClass::Yin } else { YinYangClass::Yang })
}

/// `n` points as `[n, 4]` rows `(x, y, 1-x, 1-y)`, classes cycling yin, yang, dot.
pub fn gen_yinyang<T: Real>(n: usize, seed: u64) -> Result<(Tensor<T>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * 4);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let want = i % 3;
        loop {
            let (x, y): (f64, f64) = (rng.random(), rng.random());
            if let Some(c) = yinyang_class(x, y) {
                if c as usize == want {
                    data.extend([x, y, 1.0 - x, 1.0 - y].map(T::lit));
                    labels.push(want);
                    break;
                }
            }
        }
    }
    Ok((Tensor::from_vec(&[n, 4], data)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn landmarks() {
        assert_eq!(yinyang_class(0.5, 0.5), Some(YinYangClass::Yin));
        assert_eq!(yinyang_class(0.25, 0.5), Some(YinYangClass::Dot));
        assert_eq!(yinyang_class(0.75, 0.5), Some(YinYangClass::Dot));
        assert_eq!(yinyang_class(0.5, 0.95), Some(YinYangClass::Yin));
        assert_eq!(yinyang_class(0.5, 0.05), Some(YinYangClass::Yang));
        assert_eq!(yinyang_class(0.02, 0.02), None);
    }

    #[test]
    fn balanced_classes_and_mirrored_inputs() {
        let (x, y) = gen_yinyang::<f64>(3000, 7).unwrap();
        let mut counts = [0usize; 3];
        y.iter().for_each(|&c| counts[c] += 1);
        assert!(counts.iter().all(|&c| c.abs_diff(1000) <= 1), "{counts:?}");
        for r in x.data().chunks(4) {
            assert!(r.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(r[2], 1.0 - r[0]);
            assert_eq!(r[3], 1.0 - r[1]);
        }
        for (r, &c) in x.data().chunks(4).zip(&y) {
            assert_eq!(yinyang_class(r[0], r[1]).unwrap() as usize, c);
        }
    }

    proptest! {
        #[test]
        fn every_disk_point_gets_one_label(r in 0.0f64..0.5, a in 0.0f64..std::f64::consts::TAU) {
            let (x, y) = (0.5 + r * a.cos(), 0.5 + r * a.sin());
            prop_assert!(yinyang_class(x, y).is_some());
        }
    }
}
