use super::ReadoutMode;
use crate::numerics::{Real, Tensor};
use crate::{Error, Result};

/// Per-class scores `[B, C]` from readout potentials `[B, C, T]`.
pub fn readout_forward<T: Real>(potentials: &Tensor<T>, mode: ReadoutMode) -> Result<Tensor<T>> {
    let [b, c, steps] = potentials.dims3("readout_forward")?;
    Ok(Tensor::from_fn(&[b, c], |k| {
        let row = potentials.row(k / c, k % c);
        match mode {
            ReadoutMode::Sum => row.iter().copied().sum(),
            ReadoutMode::Max if steps == 0 => T::zero(),
            ReadoutMode::Max => row.iter().copied().fold(T::neg_infinity(), T::max),
        }
    }))
}

/// Gradient w.r.t. the potentials. `Max` routes everything to the first maximizing step.
pub fn readout_backward<T: Real>(grad_scores: &Tensor<T>, potentials: &Tensor<T>, mode: ReadoutMode) -> Result<Tensor<T>> {
    let [b, c, steps] = potentials.dims3("readout_backward")?;
    if grad_scores.shape() != [b, c] {
        return Err(Error::dim("readout_backward", grad_scores.shape(), &[b, c]));
    }
    let mut out = Tensor::zeros(&[b, c, steps]);
    for bi in 0..b {
        for ci in 0..c {
            let g = grad_scores.data()[bi * c + ci];
            match mode {
                ReadoutMode::Sum => out.row_mut(bi, ci).iter_mut().for_each(|v| *v = g),
                ReadoutMode::Max => {
                    let row = potentials.row(bi, ci);
                    if let Some((t, _)) = row
                        .iter()
                        .enumerate()
                        .fold(None, |best: Option<(usize, T)>, (t, &v)| match best {
                            Some((_, m)) if m >= v => best,
                            _ => Some((t, v)),
                        })
                    {
                        out.row_mut(bi, ci)[t] = g;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Row-wise softmax with max subtraction.
pub fn softmax<T: Real>(scores: &Tensor<T>) -> Result<Tensor<T>> {
    let [_, c] = scores.dims2("softmax")?;
    let mut p = scores.clone();
    if c == 0 {
        return Ok(p);
    }
    for row in p.data_mut().chunks_mut(c) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut z = T::zero();
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            z += *v;
        }
        row.iter_mut().for_each(|v| *v = *v / z);
    }
    Ok(p)
}

/// Scores and their class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutOutput<T> {
    pub o: Tensor<T>,
    pub p: Tensor<T>,
}

impl<T: Real> ReadoutOutput<T> {
    pub fn new(o: Tensor<T>) -> Result<Self> {
        let p = softmax(&o)?;
        Ok(ReadoutOutput { o, p })
    }

    /// Index of the largest score per row (first on ties).
    pub fn predictions(&self) -> Vec<usize> {
        let c = self.o.shape()[1];
        self.o
            .data()
            .chunks(c.max(1))
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
                    .0
            })
            .collect()
    }
}

pub fn one_hot<T: Real>(labels: &[usize], classes: usize) -> Result<Tensor<T>> {
    let mut y = Tensor::zeros(&[labels.len(), classes]);
    for (b, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::Label(format!("label {l} outside [0, {classes})")));
        }
        y.data_mut()[b * classes + l] = T::one();
    }
    Ok(y)
}

/// Mean cross-entropy over the batch and its gradient `(p - y)/B`.
pub fn softmax_xent<T: Real>(scores: &Tensor<T>, targets: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    let [b, c] = scores.dims2("softmax_xent")?;
    if targets.shape() != scores.shape() {
        return Err(Error::dim("softmax_xent", scores.shape(), targets.shape()));
    }
    for (i, row) in targets.data().chunks(c.max(1)).enumerate() {
        let ones = row.iter().filter(|&&v| v == T::one()).count();
        let zeros = row.iter().filter(|&&v| v == T::zero()).count();
        if ones != 1 || ones + zeros != c {
            return Err(Error::Label(format!("target row {i} is not one-hot")));
        }
    }
    if b == 0 {
        return Ok((T::zero(), Tensor::zeros(&[0, c])));
    }
    let bt = T::lit(b as f64);
    let mut loss = T::zero();
    let mut grad = scores.clone();
    for (row, y) in grad.data_mut().chunks_mut(c).zip(targets.data().chunks(c)) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let lse = row.iter().map(|&v| (v - m).exp()).sum::<T>().ln() + m;
        for (v, &yi) in row.iter_mut().zip(y) {
            if yi == T::one() {
                loss += lse - *v;
            }
            *v = ((*v - lse).exp() - yi) / bt;
        }
    }
    Ok((loss / bt, grad))
}
