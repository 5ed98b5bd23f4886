use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use realfft::FftNum;

/// Storage precision of a [`Tensor`](super::Tensor).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F64,
}

impl DType {
    pub fn size_of(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }
}

/// Floating-point element type accepted by every kernel in the crate.
pub trait Real:
    Float
    + FftNum
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + 'static
{
    const DTYPE: DType;
    /// Number of significand bits; integers below `2^MANTISSA_DIGITS` are exact.
    const MANTISSA_DIGITS: u32;

    /// `C = A·B` (or `C += A·B` when `accumulate`) on raw strided storage.
    ///
    /// # Safety
    /// Every index reachable through the given dimensions and strides must be
    /// in bounds of the respective buffers, and `c` must not alias `a` or `b`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        accumulate: bool,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn to_le_bytes_vec(values: &[Self]) -> Vec<u8>;
    fn from_le_slice(bytes: &[u8]) -> Vec<Self>;

    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const DTYPE: DType = DType::F32;
    const MANTISSA_DIGITS: u32 = f32::MANTISSA_DIGITS;

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        accumulate: bool,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        let beta = if accumulate { 1.0 } else { 0.0 };
        matrixmultiply::sgemm(m, k, n, 1.0, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }

    fn to_le_bytes_vec(values: &[f32]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    fn from_le_slice(bytes: &[u8]) -> Vec<f32> {
        bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect()
    }
}

impl Real for f64 {
    const DTYPE: DType = DType::F64;
    const MANTISSA_DIGITS: u32 = f64::MANTISSA_DIGITS;

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        accumulate: bool,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        let beta = if accumulate { 1.0 } else { 0.0 };
        matrixmultiply::dgemm(m, k, n, 1.0, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }

    fn to_le_bytes_vec(values: &[f64]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    fn from_le_slice(bytes: &[u8]) -> Vec<f64> {
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect()
    }
}
