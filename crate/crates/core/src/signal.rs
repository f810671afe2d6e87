//! Time, frequency and time-frequency views of a real signal.
//!
//! The radix-2 [`fft`] is checked against the direct [`dft_brute`] sum. The
//! STFT uses a periodic Hann window and keeps the non-negative frequency
//! magnitudes of each frame. The Haar transform is the orthonormal variant.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm()).collect()
    }

    /// Magnitudes of bins `0..=n/2`.
    pub fn half_magnitudes(&self) -> Vec<f64> {
        let n = self.len();
        self.coefficients[..n / 2 + 1].iter().map(|c| c.norm()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    /// One row per window position, `window_size / 2 + 1` magnitude bins each.
    pub frames: Vec<Vec<f64>>,
    pub window_size: usize,
    pub hop: usize,
}

impl Spectrogram {
    pub fn frame_count(signal_len: usize, window_size: usize, hop: usize) -> usize {
        (signal_len - window_size) / hop + 1
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.frames.concat()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    pub approximation: Vec<f64>,
    /// Detail coefficients, finest level first.
    pub details: Vec<Vec<f64>>,
    pub levels: usize,
}

impl WaveletDecomposition {
    pub fn coefficient_count(&self) -> usize {
        self.approximation.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    pub fn energy(&self) -> f64 {
        self.approximation
            .iter()
            .chain(self.details.iter().flatten())
            .map(|c| c * c)
            .sum()
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!("sample {i} is not finite"))),
        None => Ok(()),
    }
}

/// Direct O(n²) evaluation of `X[k] = Σ x[t] e^{-2πi kt/n}`.
pub fn dft_brute(x: &[f64]) -> Result<Spectrum> {
    if x.is_empty() {
        return Err(Error::InvalidInput("empty signal".into()));
    }
    check_finite(x)?;
    let n = x.len();
    let coefficients = (0..n)
        .map(|k| {
            x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (t, &v)| {
                // reduce k·t mod n first so the angle stays small
                let angle = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                acc + Complex64::from_polar(v, angle)
            })
        })
        .collect();
    Ok(Spectrum { coefficients })
}

/// Iterative radix-2 Cooley-Tukey. Length must be a power of two.
pub fn fft(x: &[f64]) -> Result<Spectrum> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "fft length must be a power of two, got {n}"
        )));
    }
    check_finite(x)?;
    let mut a: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let bits = n.trailing_zeros();
    if bits > 0 {
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                a.swap(i, j);
            }
        }
    }
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for j in 0..half {
                let w = twiddles[j * stride];
                let u = a[start + j];
                let v = a[start + j + half] * w;
                a[start + j] = u + v;
                a[start + j + half] = u - v;
            }
        }
        len <<= 1;
    }
    Ok(Spectrum { coefficients: a })
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| 0.5 - 0.5 * (2.0 * PI * t as f64 / n as f64).cos())
        .collect()
}

pub fn stft(x: &[f64], window_size: usize, hop: usize) -> Result<Spectrogram> {
    if window_size < 2 || !window_size.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "window size must be a power of two >= 2, got {window_size}"
        )));
    }
    if hop == 0 {
        return Err(Error::InvalidInput("hop must be at least 1".into()));
    }
    if window_size > x.len() {
        return Err(Error::InvalidInput(format!(
            "window size {window_size} exceeds signal length {}",
            x.len()
        )));
    }
    let window = hann(window_size);
    let frames = (0..Spectrogram::frame_count(x.len(), window_size, hop))
        .map(|f| {
            let seg: Vec<f64> = x[f * hop..f * hop + window_size]
                .iter()
                .zip(&window)
                .map(|(v, w)| v * w)
                .collect();
            fft(&seg).map(|s| s.half_magnitudes())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrogram {
        frames,
        window_size,
        hop,
    })
}

pub fn haar_forward(x: &[f64], levels: usize) -> Result<WaveletDecomposition> {
    let n = x.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "haar input length must be a power of two >= 2, got {n}"
        )));
    }
    let max_levels = n.trailing_zeros() as usize;
    if levels == 0 || levels > max_levels {
        return Err(Error::InvalidInput(format!(
            "levels must lie in 1..={max_levels}, got {levels}"
        )));
    }
    check_finite(x)?;
    let mut approximation = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d): (Vec<f64>, Vec<f64>) = approximation
            .chunks_exact(2)
            .map(|p| ((p[0] + p[1]) / SQRT_2, (p[0] - p[1]) / SQRT_2))
            .unzip();
        details.push(d);
        approximation = a;
    }
    Ok(WaveletDecomposition {
        approximation,
        details,
        levels,
    })
}

pub fn haar_inverse(w: &WaveletDecomposition) -> Result<Vec<f64>> {
    if w.levels == 0 || w.details.len() != w.levels {
        return Err(Error::InvalidInput(format!(
            "decomposition declares {} levels but holds {} detail bands",
            w.levels,
            w.details.len()
        )));
    }
    let mut signal = w.approximation.clone();
    for detail in w.details.iter().rev() {
        if detail.len() != signal.len() {
            return Err(Error::ShapeMismatch {
                context: "haar detail band",
                expected: signal.len(),
                found: detail.len(),
            });
        }
        signal = signal
            .iter()
            .zip(detail)
            .flat_map(|(&a, &d)| [(a + d) / SQRT_2, (a - d) / SQRT_2])
            .collect();
    }
    Ok(signal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureDomain {
    Time,
    Frequency,
    TimeFrequency,
}

impl std::str::FromStr for FeatureDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(FeatureDomain::Time),
            "frequency" => Ok(FeatureDomain::Frequency),
            "time-frequency" | "time_frequency" => Ok(FeatureDomain::TimeFrequency),
            other => Err(Error::InvalidConfig(format!("unknown feature domain {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformParams {
    #[serde(default = "default_window")]
    pub window_size: usize,
    #[serde(default = "default_hop")]
    pub hop: usize,
}

fn default_window() -> usize {
    8
}

fn default_hop() -> usize {
    4
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            window_size: default_window(),
            hop: default_hop(),
        }
    }
}

/// Length of the feature vector produced for an input of length `n`.
pub fn feature_len(n: usize, domain: FeatureDomain, params: &TransformParams) -> Result<usize> {
    match domain {
        FeatureDomain::Time => Ok(n),
        FeatureDomain::Frequency => {
            if n == 0 {
                return Err(Error::InvalidInput("empty row".into()));
            }
            Ok(n.next_power_of_two() / 2 + 1)
        }
        FeatureDomain::TimeFrequency => {
            if params.window_size > n || params.hop == 0 {
                return Err(Error::InvalidInput(format!(
                    "window {} / hop {} invalid for row length {n}",
                    params.window_size, params.hop
                )));
            }
            Ok(Spectrogram::frame_count(n, params.window_size, params.hop) * (params.window_size / 2 + 1))
        }
    }
}

/// Frequency features zero-pad the row to the next power of two.
pub fn extract_features(row: &[f64], domain: FeatureDomain, params: &TransformParams) -> Result<Vec<f64>> {
    check_finite(row)?;
    match domain {
        FeatureDomain::Time => Ok(row.to_vec()),
        FeatureDomain::Frequency => {
            if row.is_empty() {
                return Err(Error::InvalidInput("empty row".into()));
            }
            let mut padded = row.to_vec();
            padded.resize(row.len().next_power_of_two(), 0.0);
            Ok(fft(&padded)?.half_magnitudes())
        }
        FeatureDomain::TimeFrequency => Ok(stft(row, params.window_size, params.hop)?.flatten()),
    }
}
