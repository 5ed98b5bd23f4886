//! Bounds-checked strided matrix multiply on top of `matrixmultiply`.

use super::Real;

/// A strided 2-D window into a flat buffer.
#[derive(Debug, Clone, Copy)]
pub(crate) struct View {
    pub offset: usize,
    pub row_stride: usize,
    pub col_stride: usize,
}

impl View {
    pub fn new(offset: usize, row_stride: usize, col_stride: usize) -> Self {
        View {
            offset,
            row_stride,
            col_stride,
        }
    }

    /// Row-major contiguous matrix starting at `offset`.
    pub fn rows(offset: usize, cols: usize) -> Self {
        View::new(offset, cols, 1)
    }

    /// The same window read as its transpose.
    pub fn t(self) -> Self {
        View::new(self.offset, self.col_stride, self.row_stride)
    }

    fn last_index(&self, rows: usize, cols: usize) -> usize {
        self.offset + (rows - 1) * self.row_stride + (cols - 1) * self.col_stride
    }
}

/// `c[m×n] (+)= a[m×k] · b[k×n]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm<T: Real>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    av: View,
    b: &[T],
    bv: View,
    c: &mut [T],
    cv: View,
    accumulate: bool,
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if !accumulate {
            for i in 0..m {
                for j in 0..n {
                    c[cv.offset + i * cv.row_stride + j * cv.col_stride] = T::zero();
                }
            }
        }
        return;
    }
    assert!(av.last_index(m, k) < a.len(), "gemm: lhs view out of bounds");
    assert!(bv.last_index(k, n) < b.len(), "gemm: rhs view out of bounds");
    assert!(cv.last_index(m, n) < c.len(), "gemm: output view out of bounds");
    // SAFETY: all reachable indices were bounds-checked above and `c` is a
    // unique borrow, so it cannot alias `a` or `b`.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            a.as_ptr().add(av.offset),
            av.row_stride as isize,
            av.col_stride as isize,
            b.as_ptr().add(bv.offset),
            bv.row_stride as isize,
            bv.col_stride as isize,
            accumulate,
            c.as_mut_ptr().add(cv.offset),
            cv.row_stride as isize,
            cv.col_stride as isize,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transposed_views_match_naive_product() {
        // a is 2x3, b is stored as its 2x3 transpose.
        let a = [1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0];
        let bt = [1.0f64, 0.0, -1.0, 2.0, 1.0, 0.5];
        let mut c = [0.0f64; 4];
        gemm(2, 3, 2, &a, View::rows(0, 3), &bt, View::rows(0, 3).t(), &mut c, View::rows(0, 2), false);
        assert_eq!(c, [-2.0, 5.5, -2.0, 16.0]);
        gemm(2, 3, 2, &a, View::rows(0, 3), &bt, View::rows(0, 3).t(), &mut c, View::rows(0, 2), true);
        assert_eq!(c, [-4.0, 11.0, -4.0, 32.0]);
    }
}
