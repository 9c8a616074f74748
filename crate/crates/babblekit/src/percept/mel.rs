//! Log-mel spectrogram frontend.

use crate::error::{Error, Result};
use crate::vtsynth::AudioBuffer;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

/// Frontend configuration. The defaults are a 25 ms Hann window with a 10 ms
/// hop and 40 triangular bands up to 8 kHz, log-compressed with a fixed
/// floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelConfig {
    pub sample_rate: f64,
    pub window_s: f64,
    pub hop_s: f64,
    pub n_bands: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub floor: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        MelConfig {
            sample_rate: 44_100.0,
            window_s: 0.025,
            hop_s: 0.010,
            n_bands: 40,
            fmin: 0.0,
            fmax: 8_000.0,
            floor: 1e-10,
        }
    }
}

impl MelConfig {
    pub fn window_len(&self) -> usize {
        (self.window_s * self.sample_rate).round() as usize
    }

    pub fn hop_len(&self) -> usize {
        (self.hop_s * self.sample_rate).round() as usize
    }

    fn n_fft(&self) -> usize {
        self.window_len().next_power_of_two()
    }

    /// Center frequencies of the triangular bands, Hz.
    pub fn band_centers(&self) -> Vec<f64> {
        self.band_points()[1..=self.n_bands].to_vec()
    }

    /// Lower and upper edge of one band's triangular support, Hz.
    pub fn band_edges(&self, band: usize) -> (f64, f64) {
        let pts = self.band_points();
        (pts[band], pts[band + 2])
    }

    /// n_bands + 2 frequencies equally spaced on the mel scale.
    fn band_points(&self) -> Vec<f64> {
        let lo = hz_to_mel(self.fmin);
        let hi = hz_to_mel(self.fmax);
        (0..self.n_bands + 2)
            .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (self.n_bands + 1) as f64))
            .collect()
    }
}

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// A log-mel matrix, frames by bands.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub frames: Vec<Vec<f64>>,
    pub config: MelConfig,
}

impl MelSpectrogram {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }
}

/// Computes the log-mel spectrogram of an audio buffer.
pub fn mel_spectrogram(audio: &AudioBuffer, cfg: &MelConfig) -> Result<MelSpectrogram> {
    if (audio.sample_rate - cfg.sample_rate).abs() > 1e-6 {
        return Err(Error::Audio(format!(
            "sample rate {} does not match frontend rate {}",
            audio.sample_rate, cfg.sample_rate
        )));
    }
    let window = cfg.window_len();
    let hop = cfg.hop_len();
    if audio.samples.len() < window {
        return Err(Error::Audio(format!(
            "audio shorter than one window ({} < {window})",
            audio.samples.len()
        )));
    }
    let n_frames = (audio.samples.len() - window) / hop + 1;
    let n_fft = cfg.n_fft();
    let n_bins = n_fft / 2 + 1;

    let hann: Vec<f64> = (0..window)
        .map(|i| {
            let x = std::f64::consts::PI * i as f64 / window as f64;
            x.sin() * x.sin()
        })
        .collect();
    let filters = filterbank(cfg, n_fft, n_bins);

    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    let mut frames = Vec::with_capacity(n_frames);
    let mut buf = vec![Complex::new(0.0, 0.0); n_fft];
    for fi in 0..n_frames {
        let start = fi * hop;
        for (i, c) in buf.iter_mut().enumerate() {
            *c = if i < window {
                Complex::new(audio.samples[start + i] * hann[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        let power: Vec<f64> = buf[..n_bins].iter().map(|c| c.norm_sqr()).collect();
        let row: Vec<f64> = filters
            .iter()
            .map(|f| {
                let e: f64 = f.iter().map(|&(bin, w)| power[bin] * w).sum();
                (e + cfg.floor).ln()
            })
            .collect();
        frames.push(row);
    }
    Ok(MelSpectrogram {
        frames,
        config: cfg.clone(),
    })
}

/// Sparse triangular filters: per band, (bin index, weight) pairs.
fn filterbank(cfg: &MelConfig, n_fft: usize, n_bins: usize) -> Vec<Vec<(usize, f64)>> {
    let bin_hz = cfg.sample_rate / n_fft as f64;
    let mut banks = Vec::with_capacity(cfg.n_bands);
    for band in 0..cfg.n_bands {
        let (lo, hi) = cfg.band_edges(band);
        let center = cfg.band_centers()[band];
        let mut taps = Vec::new();
        for bin in 0..n_bins {
            let f = bin as f64 * bin_hz;
            let w = if f > lo && f < center {
                (f - lo) / (center - lo)
            } else if f >= center && f < hi {
                (hi - f) / (hi - center)
            } else {
                0.0
            };
            if w > 0.0 {
                taps.push((bin, w));
            }
        }
        banks.push(taps);
    }
    banks
}

/// Power spectrum of a raw signal (no windowing), for spectral inspection
/// of impulse responses: |FFT|^2 over the first half of the bins.
pub fn power_spectrum(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&s| Complex::new(s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
}
