use crate::{Error, Result};

/// Step used by [`finite_diff_check`].
pub const FD_STEP: f64 = 1e-5;

/// Central-difference gradient of `f` at `point`.
pub fn central_difference<F>(f: F, point: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut x = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let orig = x[i];
        x[i] = orig + step;
        let up = f(&x)?;
        x[i] = orig - step;
        let down = f(&x)?;
        x[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite evaluation at coordinate {i}: f(x+h)={up}, f(x-h)={down}"
            )));
        }
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Largest `|analytic - numeric| / (|analytic| + |numeric| + 1e-12)` over all coordinates.
pub fn finite_diff_check<F>(f: F, point: &[f64], analytic: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if analytic.len() != point.len() {
        return Err(Error::dim("finite_diff_check", &[point.len()], &[analytic.len()]));
    }
    let numeric = central_difference(f, point, FD_STEP)?;
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / (a.abs() + n.abs() + 1e-12))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let err = finite_diff_check(|x| Ok(x[0] * x[0]), &[3.0], &[6.0]).unwrap();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn wrong_gradient_is_detected() {
        let err = finite_diff_check(|x| Ok(x[0] * x[0]), &[3.0], &[5.0]).unwrap();
        assert!(err > 0.05);
    }

    #[test]
    fn non_finite_evaluation_is_a_numeric_error() {
        let res = finite_diff_check(|x| Ok(1.0 / x[0]), &[0.0], &[1.0]);
        // 1/(±h) is finite; log of a negative number is not.
        assert!(res.is_ok());
        let res = finite_diff_check(|x| Ok(x[0].ln()), &[0.0], &[1.0]);
        assert!(matches!(res, Err(Error::Numeric(_))));
    }
}
