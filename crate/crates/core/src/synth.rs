//! Deterministic synthetic test signals.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::base::Signal;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    /// 10, 25, 50 and 100 Hz cosines in consecutive five-second segments.
    FourTone,
    /// `cos(2 pi t)` for `t <= 0`, `cos(4 pi t)` afterwards, centred on `t = 0`.
    TwoTone,
    Sine { freq: f64 },
    /// `rate` in beats per second.
    EcgLike { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub fs: f64,
    pub duration: f64,
    pub noise_percent: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec { kind: SynthKind::EcgLike { rate: 80.0 / 60.0 }, fs: 1024.0, duration: 1.0, noise_percent: 0.0, seed: 0 }
    }
}

/// One Gaussian wave of the beat template; centre and width are fractions of a cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub amplitude: f64,
    pub centre: f64,
    pub width: f64,
}

/// P, Q, R, S and T waves with the angular widths and offsets of the ECGSYN dynamical model
/// (R at 0.4 of the cycle, Q and S a twelfth of a half-cycle either side), normalized to a unit R wave.
pub const ECG_TEMPLATE: [Wave; 5] = [
    Wave { amplitude: 0.25, centre: 0.4 - 1.0 / 6.0, width: 0.25 / TAU },
    Wave { amplitude: -1.0 / 6.0, centre: 0.4 - 1.0 / 24.0, width: 0.1 / TAU },
    Wave { amplitude: 1.0, centre: 0.4, width: 0.1 / TAU },
    Wave { amplitude: -0.25, centre: 0.4 + 1.0 / 24.0, width: 0.1 / TAU },
    Wave { amplitude: 0.4, centre: 0.65, width: 0.4 / TAU },
];

/// Periodic beat built from `waves`, evaluated at cycle phase `phase`.
pub fn ecg_beat(phase: f64, waves: &[Wave]) -> f64 {
    let p = phase.rem_euclid(1.0);
    waves
        .iter()
        .map(|w| {
            let mut d = p - w.centre;
            if d > 0.5 {
                d -= 1.0;
            } else if d < -0.5 {
                d += 1.0;
            }
            w.amplitude * (-d * d / (2.0 * w.width * w.width)).exp()
        })
        .sum()
}

pub fn clean(spec: &SynthSpec) -> Result<Signal> {
    if !(spec.fs > 0.0) || !(spec.duration > 0.0) {
        return invalid(format!("fs and duration must be positive, got {} and {}", spec.fs, spec.duration));
    }
    let n = (spec.duration * spec.fs).round() as usize;
    let t = |i: usize| i as f64 / spec.fs;
    let samples: Vec<f64> = match spec.kind {
        SynthKind::FourTone => (0..n)
            .map(|i| {
                let t = t(i);
                let f = if t < 5.0 {
                    10.0
                } else if t < 10.0 {
                    25.0
                } else if t < 15.0 {
                    50.0
                } else {
                    100.0
                };
                (2.0 * PI * f * t).cos()
            })
            .collect(),
        SynthKind::TwoTone => (0..n)
            .map(|i| {
                let t = t(i) - spec.duration / 2.0;
                if t <= 0.0 {
                    (2.0 * PI * t).cos()
                } else {
                    (4.0 * PI * t).cos()
                }
            })
            .collect(),
        SynthKind::Sine { freq } => (0..n).map(|i| (2.0 * PI * freq * t(i)).sin()).collect(),
        SynthKind::EcgLike { rate } => {
            if !(rate > 0.0) {
                return invalid(format!("pulse rate must be positive, got {rate}"));
            }
            (0..n).map(|i| ecg_beat(rate * t(i), &ECG_TEMPLATE)).collect()
        }
    };
    Signal::new(samples, spec.fs)
}

/// Adds zero-mean Gaussian noise with standard deviation `percent/100 * rms(s)`.
pub fn add_noise(s: &Signal, percent: f64, seed: u64) -> Result<Signal> {
    if !(percent >= 0.0) {
        return invalid(format!("noise percentage must be non-negative, got {percent}"));
    }
    if percent == 0.0 {
        return Ok(s.clone());
    }
    let x = s.samples();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    let normal = Normal::new(0.0, percent / 100.0 * rms).map_err(|e| crate::Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Signal::new(x.iter().map(|v| v + normal.sample(&mut rng)).collect(), s.sample_rate())
}

pub fn synth(spec: &SynthSpec) -> Result<Signal> {
    add_noise(&clean(spec)?, spec.noise_percent, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psd;

    #[test]
    fn four_tone_segments() {
        let spec = SynthSpec { kind: SynthKind::FourTone, fs: 400.0, duration: 20.0, ..Default::default() };
        let s = clean(&spec).unwrap();
        assert_eq!(s.len(), 8000);
        for (k, f) in [10.0, 25.0, 50.0, 100.0].iter().enumerate() {
            let seg = &s.samples()[k * 2000..(k + 1) * 2000];
            let p = psd(seg, 400.0, 4000).unwrap();
            assert!((p.peak_frequency() - f).abs() < 0.2, "{f}");
        }
    }

    #[test]
    fn two_tone_switches_at_zero() {
        let spec = SynthSpec { kind: SynthKind::TwoTone, fs: 100.0, duration: 4.0, ..Default::default() };
        let s = clean(&spec).unwrap();
        assert!((s.samples()[200] - 1.0).abs() < 1e-12);
        assert!((s.samples()[225] - (4.0 * PI * 0.25).cos()).abs() < 1e-12);
        assert!((s.samples()[175] - (2.0 * PI * -0.25).cos()).abs() < 1e-12);
    }

    #[test]
    fn noiseless_sine_peak() {
        let spec = SynthSpec { kind: SynthKind::Sine { freq: 12.0 }, fs: 256.0, duration: 2.0, ..Default::default() };
        let p = psd(clean(&spec).unwrap().samples(), 256.0, 512).unwrap();
        assert_eq!(p.peak_frequency(), 12.0);
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let spec = SynthSpec { noise_percent: 5.0, seed: 42, ..Default::default() };
        assert_eq!(synth(&spec).unwrap(), synth(&spec).unwrap());
        let other = SynthSpec { seed: 43, ..spec };
        assert_ne!(synth(&spec).unwrap(), synth(&other).unwrap());
    }

    #[test]
    fn ecg_is_periodic_with_sharp_peak() {
        let spec = SynthSpec { kind: SynthKind::EcgLike { rate: 80.0 }, fs: 20480.0, duration: 0.1, ..Default::default() };
        let s = clean(&spec).unwrap();
        let x = s.samples();
        for i in 0..x.len() - 256 {
            assert!((x[i] - x[i + 256]).abs() < 1e-9);
        }
        let max = x.iter().copied().fold(f64::MIN, f64::max);
        assert!(max > 0.8 && max < 1.05, "{max}");
        let argmax = (0..256).fold(0, |b, i| if x[i] > x[b] { i } else { b });
        assert!((argmax as f64 / 256.0 - 0.4).abs() < 0.02);
    }
}
