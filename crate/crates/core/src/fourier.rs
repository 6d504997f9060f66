//! Discrete Fourier helpers shared by the fluctuation and spectroscopy code.
//!
//! Transforms run in `f64` regardless of the simulation scalar.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Forward DFT `X_k = Σ_j x_j e^{−2πi jk/n}` of a real series.
pub fn dft(series: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Angular frequency of bin `k` for `n` samples spaced `dt` apart, folded so
/// bins above `n/2` map to negative frequencies.
pub fn bin_frequency(k: usize, n: usize, dt: f64) -> f64 {
    let span = n as f64 * dt;
    let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    2.0 * std::f64::consts::PI * signed / span
}

/// Checks that `x` is uniformly spaced and returns the spacing.
pub fn uniform_step(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidConfig("grid needs at least two points".into()));
    }
    let dt = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidConfig("grid must be strictly increasing".into()));
    }
    for (i, w) in x.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(x[i].abs()) {
            return Err(Error::InvalidConfig(format!("grid is not uniform at index {}", i + 1)));
        }
    }
    Ok(dt)
}

/// Removes the least-squares polynomial of the given degree in `x`.
pub fn detrend(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    if x.len() != y.len() || x.len() <= degree {
        return Err(Error::DegenerateFit(format!(
            "cannot fit degree {degree} to {} points",
            x.len()
        )));
    }
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let mid = 0.5 * (lo + hi);
    let half = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    let u: Vec<f64> = x.iter().map(|&v| (v - mid) / half).collect();
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, j| u[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let fit = a * coef;
    Ok(y.iter().zip(fit.iter()).map(|(v, f)| v - f).collect())
}

/// Angular frequency of the largest non-DC amplitude in the positive half of
/// the spectrum, along with the bin width.
pub fn dominant_frequency(series: &[f64], dt: f64) -> Result<(f64, f64)> {
    let n = series.len();
    if n < 4 {
        return Err(Error::DegenerateFit("series too short for a spectrum".into()));
    }
    let spec = dft(series);
    let (k, _) = spec[1..=n / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm()))
        .fold((1, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok((bin_frequency(k, n, dt), bin_frequency(1, n, dt)))
}
