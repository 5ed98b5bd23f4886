use crate::{Error, Result};

use super::{DType, Real};

/// Dense row-major tensor. Activity tensors are `[batch, neurons, steps]`
/// with time as the contiguous axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

/// A [`Tensor`] whose entries are all `0` or `1`.
pub type SpikeTensor<T> = Tensor<T>;

impl<T: Real> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, T::zero())
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::dim("from_vec", shape, &[data.len()]));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> T) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: (0..len).map(&mut f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dtype(&self) -> DType {
        T::DTYPE
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::dim("reshape", &self.shape, shape));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Extents of a rank-3 tensor, or a dimension error naming `op`.
    pub fn dims3(&self, op: &'static str) -> Result<[usize; 3]> {
        match self.shape[..] {
            [a, b, c] => Ok([a, b, c]),
            _ => Err(Error::dim(op, &self.shape, &[0, 0, 0])),
        }
    }

    pub fn dims2(&self, op: &'static str) -> Result<[usize; 2]> {
        match self.shape[..] {
            [a, b] => Ok([a, b]),
            _ => Err(Error::dim(op, &self.shape, &[0, 0])),
        }
    }

    pub fn dims1(&self, op: &'static str) -> Result<usize> {
        match self.shape[..] {
            [a] => Ok(a),
            _ => Err(Error::dim(op, &self.shape, &[0])),
        }
    }

    /// The time row `[b, n, ..]` of a rank-3 tensor.
    pub fn row(&self, b: usize, n: usize) -> &[T] {
        let (neurons, steps) = (self.shape[1], self.shape[2]);
        let start = (b * neurons + n) * steps;
        &self.data[start..start + steps]
    }

    pub fn row_mut(&mut self, b: usize, n: usize) -> &mut [T] {
        let (neurons, steps) = (self.shape[1], self.shape[2]);
        let start = (b * neurons + n) * steps;
        &mut self.data[start..start + steps]
    }

    pub fn at3(&self, b: usize, n: usize, t: usize) -> T {
        self.data[(b * self.shape[1] + n) * self.shape[2] + t]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == T::zero() || v == T::one())
    }

    /// Fails with an encoding error unless every entry is `0` or `1`.
    pub fn ensure_binary(&self, what: &str) -> Result<()> {
        match self
            .data
            .iter()
            .position(|&v| v != T::zero() && v != T::one())
        {
            None => Ok(()),
            Some(i) => Err(Error::Encoding(format!(
                "{what}: entry {i} is {} (expected 0 or 1)",
                self.data[i]
            ))),
        }
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::dim("zip_map", &self.shape, &other.shape));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| U::lit(v.as_f64())).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::dim("max_abs_diff", &self.shape, &other.shape));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs().as_f64())
            .fold(0.0, f64::max))
    }
}

/// A value together with its accumulated gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct GradBuffer<T> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
}

impl<T: Real> GradBuffer<T> {
    pub fn new(value: Tensor<T>) -> Self {
        let grad = Tensor::zeros(value.shape());
        GradBuffer { value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(T::zero());
    }

    pub fn accumulate(&mut self, grad: &Tensor<T>) -> Result<()> {
        if grad.shape() != self.value.shape() {
            return Err(Error::dim("accumulate", self.value.shape(), grad.shape()));
        }
        for (g, &d) in self.grad.data_mut().iter_mut().zip(grad.data()) {
            *g += d;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_length() {
        assert!(Tensor::<f64>::from_vec(&[2, 3], vec![0.0; 6]).is_ok());
        let err = Tensor::<f64>::from_vec(&[2, 3], vec![0.0; 5]).unwrap_err();
        assert!(err.to_string().contains("[2, 3]"));
    }

    #[test]
    fn grad_buffer_zeroing_and_accumulation() {
        let mut g = GradBuffer::new(Tensor::<f32>::full(&[3], 2.0));
        assert_eq!(g.grad.data(), &[0.0; 3]);
        g.accumulate(&Tensor::full(&[3], 1.5)).unwrap();
        g.accumulate(&Tensor::full(&[3], 1.0)).unwrap();
        assert_eq!(g.grad.data(), &[2.5; 3]);
        g.zero_grad();
        assert_eq!(g.grad.data(), &[0.0; 3]);
        assert!(g.accumulate(&Tensor::zeros(&[4])).is_err());
    }

    #[test]
    fn rows_are_time_contiguous() {
        let t = Tensor::<f64>::from_fn(&[2, 3, 4], |i| i as f64);
        assert_eq!(t.row(1, 2), &[20.0, 21.0, 22.0, 23.0]);
        assert_eq!(t.at3(1, 0, 3), 15.0);
    }
}
