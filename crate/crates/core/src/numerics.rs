//! Small dense least-squares helpers.

use faer::prelude::*;
use faer::Mat;

use crate::error::{Error, Result};
use crate::C64;

/// min ‖A c − b‖ for a real design matrix (rows) and complex data, via Householder QR.
/// Columns are scaled to unit norm first.
pub fn lstsq(rows: &[Vec<f64>], b: &[C64]) -> Result<Vec<C64>> {
    let m = rows.len();
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    if n == 0 || m < n {
        return Err(Error::DegenerateFit(format!("{m} samples for {n} unknowns")));
    }
    let mut scale = vec![0.0; n];
    for r in rows {
        for (s, v) in scale.iter_mut().zip(r) {
            *s += v * v;
        }
    }
    for s in scale.iter_mut() {
        *s = s.sqrt();
        if !(*s > 0.0) {
            return Err(Error::DegenerateFit("empty basis column".into()));
        }
    }
    let a = Mat::<C64>::from_fn(m, n, |i, j| C64::new(rows[i][j] / scale[j], 0.0));
    let rhs = Mat::<C64>::from_fn(m, 1, |i, _| b[i]);
    let x = a.qr().solve_lstsq(&rhs);
    let out: Vec<C64> = (0..n).map(|j| x[(j, 0)] / scale[j]).collect();
    if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::DegenerateFit("non-finite least-squares solution".into()));
    }
    Ok(out)
}

/// Ordinary least-squares line y = a + b x; returns (b, a).
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Ok((b, my - b * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_coefficients() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| {
            let t = i as f64 * 0.3;
            vec![1.0, t, (t * 1.3).sin() * 1e3]
        }).collect();
        let c = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(0.0, 1e-3)];
        let b: Vec<C64> = rows.iter().map(|r| r.iter().zip(&c).map(|(a, x)| x * a).sum()).collect();
        let x = lstsq(&rows, &b).unwrap();
        for (u, v) in x.iter().zip(&c) {
            assert!((u - v).norm() < 1e-12);
        }
        assert!(lstsq(&rows[..2], &b[..2]).is_err());
    }

    #[test]
    fn line() {
        let x = [1.0, 2.0, 3.0];
        let (b, a) = fit_line(&x, &[3.0, 5.0, 7.0]).unwrap();
        assert!((b - 2.0).abs() < 1e-14 && (a - 1.0).abs() < 1e-14);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
