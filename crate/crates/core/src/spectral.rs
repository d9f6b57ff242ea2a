//! Periodograms and bias-corrected smoothed log-periodograms.
//!
//! The log-periodogram is smoothed with a centred running mean (Daniell
//! window) whose half-width is chosen by generalised cross-validation on the
//! gamma deviance of the raw periodogram. Adding the Euler–Mascheroni
//! constant removes the `-γ` bias of log-periodogram ordinates, so the output
//! estimates the log spectral density.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::curves::{Curve, CurveSet, Grid};
use crate::error::{Error, Result};

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

const MIN_SERIES_LEN: usize = 8;
const MIN_SMOOTHING_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    sampling_rate: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, sampling_rate: f64) -> Result<Self> {
        if values.len() < MIN_SERIES_LEN {
            return Err(Error::InvalidParameter(format!(
                "time series needs at least {MIN_SERIES_LEN} samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("time series contains non-finite values".into()));
        }
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling rate must be positive, got {sampling_rate}"
            )));
        }
        Ok(Self {
            values,
            sampling_rate,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.sampling_rate
    }

    pub fn std_dev(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        (self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            sampling_rate: self.sampling_rate,
        }
    }
}

/// Raw periodogram at the Fourier frequencies `k·F/n`, `k = 1..⌊(n-1)/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    degenerate: bool,
}

impl Periodogram {
    /// True when the mean-removed series is zero, i.e. the input was constant.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

pub fn fourier_frequencies(len: usize, sampling_rate: f64) -> Vec<f64> {
    (1..=(len - 1) / 2)
        .map(|k| k as f64 * sampling_rate / len as f64)
        .collect()
}

/// `I(ω_k) = |Σ_t x_t e^{-2πikt/n}|² / n` of the mean-removed series. The zero
/// and Nyquist bins are excluded.
pub fn periodogram(x: &TimeSeries) -> Periodogram {
    let n = x.len();
    let frequencies = fourier_frequencies(n, x.sampling_rate);
    let bins = frequencies.len();
    let mean = x.values.iter().sum::<f64>() / n as f64;
    let scale = x.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let centred: Vec<f64> = x.values.iter().map(|v| v - mean).collect();
    if centred.iter().all(|v| v.abs() <= 1e-12 * scale) {
        return Periodogram {
            frequencies,
            values: vec![0.0; bins],
            degenerate: true,
        };
    }

    let mut buffer: Vec<Complex<f64>> = centred.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let values = buffer[1..=bins]
        .iter()
        .map(|c| c.norm_sqr() / n as f64)
        .collect();
    Periodogram {
        frequencies,
        values,
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    pub frequencies: Vec<f64>,
    pub log_values: Vec<f64>,
    /// Selected half-width of the running mean, in bins.
    pub span: usize,
}

/// Half-widths `1, 2, 4, ...` not exceeding a tenth of the bin count (at least `1`).
pub fn candidate_spans(bins: usize) -> Vec<usize> {
    let limit = (bins / 10).max(1);
    std::iter::successors(Some(1usize), |h| Some(h * 2))
        .take_while(|&h| h <= limit)
        .collect()
}

/// Centred running mean with mirrored ends (`i → -i`, `i → 2(n-1) - i`), so
/// every output bin averages exactly `2h + 1` values and its own value once.
fn running_mean(values: &[f64], half_width: usize) -> Vec<f64> {
    let n = values.len() as isize;
    let h = half_width as isize;
    let width = (2 * h + 1) as f64;
    (0..n)
        .map(|i| {
            (i - h..=i + h)
                .map(|k| {
                    let k = if k < 0 { -k } else if k >= n { 2 * (n - 1) - k } else { k };
                    values[k as usize]
                })
                .sum::<f64>()
                / width
        })
        .collect()
}

/// Gamma-deviance generalised cross-validation score of a fitted spectrum.
fn gamma_gcv(raw: &[f64], fitted_log: &[f64], half_width: usize) -> f64 {
    let deviance: f64 = raw
        .iter()
        .zip(fitted_log)
        .map(|(&i, &s)| {
            let ratio = i / (s + EULER_MASCHERONI).exp();
            ratio - ratio.ln() - 1.0
        })
        .sum::<f64>()
        / raw.len() as f64;
    let leverage = 1.0 / (2 * half_width + 1) as f64;
    deviance / (1.0 - leverage).powi(2)
}

pub fn smooth_log_periodogram(x: &TimeSeries) -> Result<SpectralEstimate> {
    if x.len() < MIN_SMOOTHING_LEN {
        return Err(Error::InvalidParameter(format!(
            "smoothing needs at least {MIN_SMOOTHING_LEN} samples, got {}",
            x.len()
        )));
    }
    let pg = periodogram(x);
    if pg.is_degenerate() {
        return Err(Error::DegeneratePeriodogram);
    }
    let mean_power = pg.values.iter().sum::<f64>() / pg.values.len() as f64;
    let floor = 1e-12 * mean_power;
    let raw: Vec<f64> = pg.values.iter().map(|&v| v.max(floor)).collect();
    let logs: Vec<f64> = raw.iter().map(|v| v.ln()).collect();

    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for h in candidate_spans(raw.len()) {
        let smoothed = running_mean(&logs, h);
        let score = gamma_gcv(&raw, &smoothed, h);
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, h, smoothed));
        }
    }
    let (_, span, smoothed) = best.expect("at least one candidate span");
    Ok(SpectralEstimate {
        frequencies: pg.frequencies,
        log_values: smoothed.into_iter().map(|s| s + EULER_MASCHERONI).collect(),
        span,
    })
}

pub fn check_stationary(phi1: f64, phi2: f64) -> Result<()> {
    let ok = phi2 + phi1 < 1.0 && phi2 - phi1 < 1.0 && phi2.abs() < 1.0;
    if ok && phi1.is_finite() && phi2.is_finite() {
        Ok(())
    } else {
        Err(Error::NonStationary { phi1, phi2 })
    }
}

/// `log f(ω) = log σ² - log|1 - φ₁e^{-iθ} - φ₂e^{-2iθ}|²` with `θ = 2πω/F`.
pub fn ar2_true_log_sdf(
    phi1: f64,
    phi2: f64,
    sigma2: f64,
    freqs: &[f64],
    sampling_rate: f64,
) -> Result<Vec<f64>> {
    check_stationary(phi1, phi2)?;
    Ok(freqs
        .iter()
        .map(|&w| sigma2.ln() - ar2_transfer_norm_sqr(phi1, phi2, w / sampling_rate).ln())
        .collect())
}

/// `|1 - φ₁e^{-2πiν} - φ₂e^{-4πiν}|²` at normalised frequency `ν`.
pub(crate) fn ar2_transfer_norm_sqr(phi1: f64, phi2: f64, nu: f64) -> f64 {
    let theta = 2.0 * std::f64::consts::PI * nu;
    let re = 1.0 - phi1 * theta.cos() - phi2 * (2.0 * theta).cos();
    let im = phi1 * theta.sin() + phi2 * (2.0 * theta).sin();
    re * re + im * im
}

/// Smoothed log-periodograms of equally long series as curves on their common
/// frequency grid. Curve `i` gets id `first_id + i`.
pub fn spectral_curves(series: &[TimeSeries], first_id: usize) -> Result<CurveSet> {
    let first = series.first().ok_or(Error::EmptySet)?;
    if series
        .iter()
        .any(|s| s.len() != first.len() || s.sampling_rate != first.sampling_rate)
    {
        return Err(Error::InvalidParameter(
            "all series must share length and sampling rate".into(),
        ));
    }
    let estimates = series
        .par_iter()
        .map(smooth_log_periodogram)
        .collect::<Result<Vec<_>>>()?;
    let freqs = estimates[0].frequencies.clone();
    let length = freqs[freqs.len() - 1] - freqs[0];
    let grid = Arc::new(Grid::new(freqs, length)?);
    let curves = estimates
        .into_iter()
        .enumerate()
        .map(|(i, e)| Curve::new(first_id + i, e.log_values))
        .collect::<Result<Vec<_>>>()?;
    CurveSet::new(grid, curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Direct O(n²) DFT.
    fn naive_periodogram(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        (1..=(n - 1) / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (k * t) as f64 / n as f64;
                    re += (v - mean) * a.cos();
                    im += (v - mean) * a.sin();
                }
                (re * re + im * im) / n as f64
            })
            .collect()
    }

    fn series(values: Vec<f64>) -> TimeSeries {
        TimeSeries::new(values, 100.0).unwrap()
    }

    #[test]
    fn fft_matches_direct_dft() {
        let x: Vec<f64> = (0..37).map(|t| ((t * t) as f64 * 0.37).sin() + 0.1 * t as f64).collect();
        let fast = periodogram(&series(x.clone()));
        let slow = naive_periodogram(&x);
        assert_eq!(fast.values.len(), 18);
        for (a, b) in fast.values.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b));
        }
        assert!((fast.frequencies[0] - 100.0 / 37.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let pg = periodogram(&series(vec![0.0; 16]));
        assert!(pg.is_degenerate());
        assert!(pg.values.iter().all(|&v| v == 0.0));
        assert!(periodogram(&series(vec![3.3; 100])).is_degenerate());
        assert_eq!(smooth_log_periodogram(&series(vec![2.0; 128])), Err(Error::DegeneratePeriodogram));
    }

    #[test]
    fn cosine_concentrates_in_one_bin() {
        let n = 64;
        let k0 = 5;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * (k0 * t) as f64 / n as f64).cos()).collect();
        let pg = periodogram(&series(x));
        let peak = pg.values[k0 - 1];
        assert!((peak - n as f64 / 4.0).abs() < 1e-9);
        for (k, v) in pg.values.iter().enumerate() {
            if k != k0 - 1 {
                assert!(*v <= 1e-9 * peak);
            }
        }
    }

    #[test]
    fn parseval_without_dc_and_nyquist() {
        // Odd length: no Nyquist bin, so twice the one-sided sum is the full energy.
        let x: Vec<f64> = (0..101).map(|t| ((t as f64) * 0.7).sin() * (t as f64 * 0.05).cos() + (t % 7) as f64).collect();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let energy: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let pg = periodogram(&series(x));
        let total: f64 = 2.0 * pg.values.iter().sum::<f64>();
        assert!((total - energy).abs() < 0.01 * energy);
    }

    #[test]
    fn short_inputs_are_rejected() {
        assert!(TimeSeries::new(vec![1.0; 7], 1.0).is_err());
        assert!(TimeSeries::new(vec![1.0; 8], 0.0).is_err());
        assert!(smooth_log_periodogram(&series((0..63).map(|t| (t as f64).sin()).collect())).is_err());
    }

    #[test]
    fn spans_are_powers_of_two() {
        assert_eq!(candidate_spans(99), vec![1, 2, 4, 8]);
        assert_eq!(candidate_spans(5), vec![1]);
        assert_eq!(candidate_spans(999), vec![1, 2, 4, 8, 16, 32, 64]);
    }

    #[test]
    fn running_mean_mirrors_edges() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let m = running_mean(&v, 1);
        assert_eq!(m, vec![(2.0 + 1.0 + 2.0) / 3.0, 2.0, 3.0, (3.0 + 4.0 + 3.0) / 3.0]);
    }

    #[test]
    fn scaling_shifts_log_values() {
        let x: Vec<f64> = (0..256).map(|t| ((t * 31 % 17) as f64 - 8.0) + (t as f64 * 0.3).sin()).collect();
        let base = smooth_log_periodogram(&series(x.clone())).unwrap();
        let scaled = smooth_log_periodogram(&series(x.iter().map(|v| 3.0 * v).collect())).unwrap();
        assert_eq!(base.span, scaled.span);
        for (a, b) in base.log_values.iter().zip(&scaled.log_values) {
            assert!((b - a - 2.0 * 3.0f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn time_reversal_leaves_estimate_unchanged() {
        let x: Vec<f64> = (0..300).map(|t| ((t * 13 % 29) as f64) * 0.1 + (t as f64 * 0.21).cos()).collect();
        let mut rev = x.clone();
        rev.reverse();
        let a = smooth_log_periodogram(&series(x)).unwrap();
        let b = smooth_log_periodogram(&series(rev)).unwrap();
        assert_eq!(a.span, b.span);
        for (u, v) in a.log_values.iter().zip(&b.log_values) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn true_sdf_of_white_noise_is_flat() {
        let f = ar2_true_log_sdf(0.0, 0.0, 1.0, &[1.0, 50.0, 400.0], 1000.0).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn true_sdf_peaks_near_design_frequency() {
        let m: f64 = 1.05;
        let phi1 = 2.0 * (2.0 * PI * 100.0 / 1000.0).cos() / m;
        let phi2 = -1.0 / (m * m);
        assert!((phi1 - 1.54098).abs() < 1e-5);
        assert!((phi2 + 0.90703).abs() < 1e-5);
        let freqs: Vec<f64> = (1..500).map(|k| k as f64).collect();
        let f = ar2_true_log_sdf(phi1, phi2, 1.0, &freqs, 1000.0).unwrap();
        let argmax = f.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!((freqs[argmax] - 100.0).abs() <= 5.0, "peak at {}", freqs[argmax]);
        assert!(f.iter().all(|v| v.exp() > 0.0));
    }

    #[test]
    fn non_stationary_coefficients_are_rejected() {
        assert!(ar2_true_log_sdf(1.2, 0.0, 1.0, &[1.0], 10.0).is_err());
        assert!(ar2_true_log_sdf(0.0, -1.0, 1.0, &[1.0], 10.0).is_err());
        assert!(ar2_true_log_sdf(-0.5, 0.6, 1.0, &[1.0], 10.0).is_err());
        assert!(check_stationary(0.8, 0.1).is_ok());
    }
}
