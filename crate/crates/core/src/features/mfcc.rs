use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{AudioSignal, FeatureMatrix};
use crate::error::{Error, Result};

const LOG_FLOOR: f64 = 1e-10;

/// Front-end configuration. The defaults produce 38-dimensional features:
/// `c1..c12`, `Δc0..Δc12`, `ΔΔc0..ΔΔc12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    /// Analysis window length in seconds.
    pub frame_len: f64,
    /// Hop between frames in seconds.
    pub frame_shift: f64,
    pub n_mel_filters: usize,
    /// Number of cepstra computed, `c0` included.
    pub n_cepstra: usize,
    pub preemphasis: f64,
    pub fft_size: usize,
    /// Half-width of the delta regression window, in frames.
    pub delta_window: usize,
    /// Drop the static `c0` row (its deltas are kept).
    pub drop_static_c0: bool,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            frame_len: 0.020,
            frame_shift: 0.010,
            n_mel_filters: 26,
            n_cepstra: 13,
            preemphasis: 0.97,
            fft_size: 512,
            delta_window: 2,
            drop_static_c0: true,
        }
    }
}

impl MfccConfig {
    pub fn frame_len_samples(&self, rate: u32) -> usize {
        (self.frame_len * rate as f64).round() as usize
    }

    pub fn frame_shift_samples(&self, rate: u32) -> usize {
        (self.frame_shift * rate as f64).round() as usize
    }

    /// Number of output rows.
    pub fn output_dim(&self) -> usize {
        if self.drop_static_c0 {
            (self.n_cepstra - 1) + 2 * self.n_cepstra
        } else {
            3 * self.n_cepstra
        }
    }

    pub fn validate(&self, rate: u32) -> Result<()> {
        let len = self.frame_len_samples(rate);
        let shift = self.frame_shift_samples(rate);
        if len == 0 || shift == 0 {
            return Err(Error::InvalidConfig(
                "frame length and shift must cover at least one sample".into(),
            ));
        }
        if shift > len {
            return Err(Error::InvalidConfig(format!(
                "frame shift {shift} exceeds frame length {len}"
            )));
        }
        if self.n_cepstra == 0 || self.n_cepstra > self.n_mel_filters {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= n_cepstra ({}) <= n_mel_filters ({})",
                self.n_cepstra, self.n_mel_filters
            )));
        }
        if self.drop_static_c0 && self.n_cepstra < 2 {
            return Err(Error::InvalidConfig(
                "drop_static_c0 needs at least two cepstra".into(),
            ));
        }
        if self.fft_size < len {
            return Err(Error::InvalidConfig(format!(
                "fft size {} shorter than frame length {len}",
                self.fft_size
            )));
        }
        if self.delta_window == 0 {
            return Err(Error::InvalidConfig("delta window must be >= 1".into()));
        }
        Ok(())
    }
}

/// `1 + floor((n - len) / shift)`; the trailing partial frame is dropped.
pub fn frame_count(n_samples: usize, cfg: &MfccConfig, rate: u32) -> Result<usize> {
    let len = cfg.frame_len_samples(rate);
    let shift = cfg.frame_shift_samples(rate);
    if shift == 0 {
        return Err(Error::InvalidConfig("zero frame shift".into()));
    }
    if n_samples < len || len == 0 {
        return Err(Error::SignalTooShort {
            samples: n_samples,
            frame_len: len,
        });
    }
    Ok(1 + (n_samples - len) / shift)
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the HTK mel scale from 0 Hz to
/// Nyquist, evaluated at the FFT bin frequencies.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    weights: Vec<Vec<f64>>,
    centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_filters: usize, fft_size: usize, rate: u32) -> Self {
        let nyquist = rate as f64 / 2.0;
        let mel_max = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(mel_max * i as f64 / (n_filters + 1) as f64))
            .collect();
        let n_bins = fft_size / 2 + 1;
        let bin_hz = rate as f64 / fft_size as f64;
        let weights = (0..n_filters)
            .map(|m| {
                let (lo, c, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                (0..n_bins)
                    .map(|b| {
                        let f = b as f64 * bin_hz;
                        if f >= lo && f <= c {
                            (f - lo) / (c - lo)
                        } else if f > c && f <= hi {
                            (hi - f) / (hi - c)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            weights,
            centers_hz: edges[1..=n_filters].to_vec(),
        }
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn apply(&self, spectrum: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(spectrum).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Pre-emphasized, Hamming-windowed magnitude spectra (`fft_size/2 + 1`
/// bins) of every frame.
pub fn magnitude_spectra(audio: &AudioSignal, cfg: &MfccConfig) -> Result<Vec<Vec<f64>>> {
    let rate = audio.sample_rate();
    cfg.validate(rate)?;
    let n_frames = frame_count(audio.len(), cfg, rate)?;
    let len = cfg.frame_len_samples(rate);
    let shift = cfg.frame_shift_samples(rate);

    let x = audio.samples();
    let mut emph = Vec::with_capacity(x.len());
    emph.push(x[0]);
    for i in 1..x.len() {
        emph.push(x[i] - cfg.preemphasis * x[i - 1]);
    }

    let window = hamming(len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.fft_size);
    let n_bins = cfg.fft_size / 2 + 1;
    let mut buf = vec![Complex::new(0.0, 0.0); cfg.fft_size];
    let mut out = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let start = t * shift;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < len {
                Complex::new(emph[start + i] * window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        out.push(buf[..n_bins].iter().map(|c| c.norm()).collect());
    }
    Ok(out)
}

/// Standard regression deltas over `±window` frames with edge replication.
/// `seq` is indexed `[frame][coefficient]`.
pub fn deltas(seq: &[Vec<f64>], window: usize) -> Vec<Vec<f64>> {
    let t_len = seq.len();
    if t_len == 0 {
        return Vec::new();
    }
    let dim = seq[0].len();
    let denom = 2.0 * (1..=window).map(|n| (n * n) as f64).sum::<f64>();
    (0..t_len)
        .map(|t| {
            (0..dim)
                .map(|d| {
                    let mut acc = 0.0;
                    for n in 1..=window {
                        let fwd = &seq[(t + n).min(t_len - 1)];
                        let back = &seq[t.saturating_sub(n)];
                        acc += n as f64 * (fwd[d] - back[d]);
                    }
                    acc / denom
                })
                .collect()
        })
        .collect()
}

fn dct_ii(input: &[f64], n_out: usize) -> Vec<f64> {
    let n = input.len() as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            scale
                * input
                    .iter()
                    .enumerate()
                    .map(|(m, v)| v * (PI * k as f64 * (m as f64 + 0.5) / n).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Cepstra, deltas and accelerations stacked per frame.
pub fn compute_features(audio: &AudioSignal, cfg: &MfccConfig) -> Result<FeatureMatrix> {
    let spectra = magnitude_spectra(audio, cfg)?;
    let bank = MelFilterbank::new(cfg.n_mel_filters, cfg.fft_size, audio.sample_rate());
    let floor = LOG_FLOOR.ln();
    let cepstra: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| {
            let log_mel: Vec<f64> = bank
                .apply(s)
                .into_iter()
                .map(|e| if e > LOG_FLOOR { e.ln() } else { floor })
                .collect();
            dct_ii(&log_mel, cfg.n_cepstra)
        })
        .collect();
    let d1 = deltas(&cepstra, cfg.delta_window);
    let d2 = deltas(&d1, cfg.delta_window);

    let skip = usize::from(cfg.drop_static_c0);
    let dim = cfg.output_dim();
    let mut data = Vec::with_capacity(dim * cepstra.len());
    for t in 0..cepstra.len() {
        data.extend_from_slice(&cepstra[t][skip..]);
        data.extend_from_slice(&d1[t]);
        data.extend_from_slice(&d2[t]);
    }
    FeatureMatrix::new(data, dim, cepstra.len())
}
