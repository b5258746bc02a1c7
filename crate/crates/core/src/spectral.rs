//! Temporal autocorrelation, average power and power spectral density.
//!
//! `autocorr` is the biased linear-lag estimator used to build STAM
//! matrices. The circular variant only exists to check the
//! Wiener-Khinchin identity, which is exact in the circular convention.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// `gamma[i] = 1/(n+1) * sum_{k=i..n} s[k] * s[k-i]` for `i` in `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrVector {
    pub gamma: Vec<f64>,
}

impl AutocorrVector {
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn at(&self, lag: usize) -> f64 {
        self.gamma[lag]
    }
}

/// Non-negative density over the DFT bins of the observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub density: Vec<f64>,
}

pub fn autocorr(series: &[f64]) -> AutocorrVector {
    let len = series.len();
    let norm = len as f64;
    let gamma = (0..len)
        .map(|lag| {
            series[lag..]
                .iter()
                .zip(series)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / norm
        })
        .collect();
    AutocorrVector { gamma }
}

/// Mean squared magnitude; the discrete average power.
pub fn avg_power(series: &[f64]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    autocorr(series).gamma[0]
}

fn dft(input: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = input.iter().map(|&v| Complex::new(v, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Periodogram `|DFT(s)|^2 / N`.
pub fn psd(series: &[f64]) -> PowerSpectrum {
    let n = series.len() as f64;
    PowerSpectrum {
        density: dft(series).iter().map(|c| c.norm_sqr() / n).collect(),
    }
}

/// `c[l] = 1/N * sum_j s[j] * s[(j - l) mod N]`.
pub fn circular_autocorr(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    (0..n)
        .map(|lag| {
            let direct: f64 = series[lag..].iter().zip(series).map(|(a, b)| a * b).sum();
            let wrapped: f64 = series[..lag]
                .iter()
                .zip(&series[n - lag..])
                .map(|(a, b)| a * b)
                .sum();
            (direct + wrapped) / n as f64
        })
        .collect()
}

/// Largest absolute deviation between the DFT of the circular
/// autocorrelation and the periodogram. Zero up to rounding.
pub fn wiener_khinchin_residual(series: &[f64]) -> f64 {
    let spectrum = psd(series);
    dft(&circular_autocorr(series))
        .iter()
        .zip(&spectrum.density)
        .map(|(c, &s)| (c - Complex::new(s, 0.0)).norm())
        .fold(0.0, f64::max)
}

/// Largest deviation, relative to `gamma(0)`, between the linear-lag
/// autocorrelation and the inverse DFT of the periodogram over lags
/// `0..=max_lag`. Unlike the circular residual this is not an identity:
/// the two differ by the wrap-around term `gamma(N - l)`, which shrinks as
/// the window grows.
pub fn linear_lag_residual(series: &[f64], max_lag: usize) -> f64 {
    let n = series.len();
    if n == 0 {
        return 0.0;
    }
    let linear = autocorr(series);
    if linear.gamma[0] == 0.0 {
        return 0.0;
    }
    let mut spec: Vec<Complex<f64>> = psd(series)
        .density
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    (0..=max_lag.min(n - 1))
        .map(|l| (spec[l].re / n as f64 - linear.gamma[l]).abs())
        .fold(0.0, f64::max)
        / linear.gamma[0]
}
