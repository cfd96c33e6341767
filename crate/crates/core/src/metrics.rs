//! Quality and information metrics.

use num_complex::Complex64;

use crate::base::{Image, Signal};
use crate::error::{invalid, Error, Result};

fn check_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(vec![x.len()], vec![y.len()]));
    }
    Ok(())
}

pub fn mae(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / x.len().max(1) as f64)
}

pub fn mse(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len().max(1) as f64)
}

/// Returns `f64::INFINITY` when the inputs are identical.
pub fn psnr(x: &[f64], y: &[f64], max_val: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(x, y)?, max_val))
}

pub fn psnr_from_mse(mse: f64, max_val: f64) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (max_val * max_val / mse).log10()
}

fn image_pairs(x: &Image, y: &Image) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.channels() != y.channels() || x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::ShapeMismatch(
            vec![x.channels(), x.rows(), x.cols()],
            vec![y.channels(), y.rows(), y.cols()],
        ));
    }
    let flat = |i: &Image| i.planes().iter().flat_map(|p| p.data().iter().copied()).collect::<Vec<_>>();
    Ok((flat(x), flat(y)))
}

/// Mean over every channel element, so a color image divides by three times its size.
pub fn mse_image(x: &Image, y: &Image) -> Result<f64> {
    let (a, b) = image_pairs(x, y)?;
    mse(&a, &b)
}

pub fn mae_image(x: &Image, y: &Image) -> Result<f64> {
    let (a, b) = image_pairs(x, y)?;
    mae(&a, &b)
}

pub fn psnr_image(x: &Image, y: &Image, max_val: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse_image(x, y)?, max_val))
}

pub fn mse_signal(x: &Signal, y: &Signal) -> Result<f64> {
    mse(x.samples(), y.samples())
}

pub fn cr(uncompressed: f64, compressed: f64) -> Result<f64> {
    if compressed <= 0.0 || uncompressed <= 0.0 {
        return invalid(format!("sizes must be positive, got {uncompressed} and {compressed}"));
    }
    Ok(uncompressed / compressed)
}

pub fn pss(cr: f64) -> f64 {
    (1.0 - 1.0 / cr) * 100.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binning {
    /// 256 bins over [0, 255].
    EightBit,
    /// `n` bins between the data minimum and maximum.
    MinMax(usize),
    Range { lo: f64, hi: f64, bins: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(move |&c| c as f64 / t)
    }
}

struct Binner {
    lo: f64,
    width: f64,
    bins: usize,
}

impl Binner {
    fn new(x: &[f64], b: Binning) -> Binner {
        let (lo, hi, bins) = match b {
            Binning::EightBit => (0.0, 255.0, 256),
            Binning::MinMax(n) => {
                let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if x.is_empty() {
                    (0.0, 1.0, n)
                } else {
                    (lo, hi, n)
                }
            }
            Binning::Range { lo, hi, bins } => (lo, hi, bins),
        };
        Binner { lo, width: hi - lo, bins: bins.max(1) }
    }

    #[inline]
    fn bin(&self, v: f64) -> usize {
        if self.width <= 0.0 {
            return 0;
        }
        let k = ((v - self.lo) / self.width * self.bins as f64).floor();
        (k.max(0.0) as usize).min(self.bins - 1)
    }
}

pub fn histogram(x: &[f64], binning: Binning) -> Histogram {
    let b = Binner::new(x, binning);
    let mut counts = vec![0u64; b.bins];
    for &v in x {
        counts[b.bin(v)] += 1;
    }
    Histogram { counts, total: x.len() as u64 }
}

fn entropy_of(p: impl Iterator<Item = f64>) -> f64 {
    -p.filter(|&q| q > 0.0).map(|q| q * q.log2()).sum::<f64>()
}

/// Shannon entropy in bits.
pub fn entropy(x: &[f64], binning: Binning) -> f64 {
    entropy_of(histogram(x, binning).probabilities())
}

pub fn joint_entropy(x: &[f64], y: &[f64], binning: Binning) -> Result<f64> {
    check_len(x, y)?;
    let (bx, by) = (Binner::new(x, binning), Binner::new(y, binning));
    let mut counts = vec![0u64; bx.bins * by.bins];
    for (&a, &b) in x.iter().zip(y) {
        counts[bx.bin(a) * by.bins + by.bin(b)] += 1;
    }
    let t = x.len().max(1) as f64;
    Ok(entropy_of(counts.iter().map(|&c| c as f64 / t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationReport {
    pub hx: f64,
    pub hy: f64,
    pub hxy: f64,
    pub mi: f64,
}

pub fn information(x: &[f64], y: &[f64], binning: Binning) -> Result<InformationReport> {
    let hxy = joint_entropy(x, y, binning)?;
    let (hx, hy) = (entropy(x, binning), entropy(y, binning));
    let mut mi = hx + hy - hxy;
    if mi < 0.0 && mi > -1e-9 {
        mi = 0.0;
    }
    Ok(InformationReport { hx, hy, hxy, mi })
}

pub fn mutual_information(x: &[f64], y: &[f64], binning: Binning) -> Result<f64> {
    Ok(information(x, y, binning)?.mi)
}

pub fn michelson_contrast(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return invalid("contrast of an empty array");
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max + min == 0.0 {
        return Ok(0.0);
    }
    Ok((max - min) / (max + min))
}

/// Direct DFT of `x` zero-padded to `nfft`.
pub fn dft(x: &[f64], nfft: usize) -> Result<Vec<Complex64>> {
    if nfft < x.len() {
        return invalid(format!("nfft {nfft} shorter than signal length {}", x.len()));
    }
    let step = -2.0 * std::f64::consts::PI / nfft as f64;
    Ok((0..nfft)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(n, &v)| v * Complex64::from_polar(1.0, step * ((k * n) % nfft) as f64))
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn peak_frequency(&self) -> f64 {
        let k = self
            .power
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc })
            .0;
        self.freqs[k]
    }
}

/// One-sided power `|X|^2 / (nfft * L)` for bins `0..=nfft/2`.
pub fn psd(s: &[f64], fs: f64, nfft: usize) -> Result<Spectrum> {
    let x = dft(s, nfft)?;
    let l = s.len().max(1) as f64;
    let half = nfft / 2;
    Ok(Spectrum {
        freqs: (0..=half).map(|k| fs * k as f64 / nfft as f64).collect(),
        power: x[..=half].iter().map(|c| c.norm_sqr() / (nfft as f64 * l)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn error_metrics() {
        assert_eq!(mae(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 3.5);
        assert_eq!(mse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5);
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn psnr_values() {
        assert_eq!(psnr(&[1.0], &[1.0], 255.0).unwrap(), f64::INFINITY);
        assert!((psnr_from_mse(255.0 * 255.0, 255.0)).abs() < 1e-12);
        assert!((psnr_from_mse(1.0, 255.0) - 48.1308).abs() < 1e-3);
    }

    #[test]
    fn ratio_and_saving() {
        let c = cr(10.0, 2.0).unwrap();
        assert_eq!(c, 5.0);
        assert!((pss(c) - 80.0).abs() < 1e-12);
        assert_eq!(pss(cr(3.0, 3.0).unwrap()), 0.0);
        assert_eq!(pss(4.0), 75.0);
        assert!(cr(1.0, 0.0).is_err());
    }

    #[test]
    fn uniform_entropy_is_eight_bits() {
        let x: Vec<f64> = (0..256 * 4).map(|i| (i % 256) as f64).collect();
        assert!((entropy(&x, Binning::EightBit) - 8.0).abs() < 1e-12);
        let h = histogram(&x, Binning::EightBit);
        assert_eq!(h.counts.iter().sum::<u64>(), h.total);
    }

    #[test]
    fn independent_noise_has_little_information() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..1_000_000).map(|_| rng.gen_range(0..256) as f64).collect();
        let y: Vec<f64> = (0..1_000_000).map(|_| rng.gen_range(0..256) as f64).collect();
        assert!(mutual_information(&x, &y, Binning::EightBit).unwrap() < 0.05);
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(michelson_contrast(&[0.0, 255.0]).unwrap(), 1.0);
        assert_eq!(michelson_contrast(&[7.0, 7.0]).unwrap(), 0.0);
        assert_eq!(michelson_contrast(&[50.0, 150.0]).unwrap(), 0.5);
        assert_eq!(michelson_contrast(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn psd_peak_of_ten_hertz_tone() {
        let fs = 300.0;
        let n = (5.0 / 10.0 * fs) as usize;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / fs).cos()).collect();
        let s = psd(&x, fs, 1024).unwrap();
        assert!((s.peak_frequency() - 10.0).abs() <= fs / 1024.0);
        assert!(psd(&[0.0; 8], 1.0, 8).unwrap().power.iter().all(|&p| p == 0.0));
        assert!(psd(&[1.0; 8], 1.0, 4).is_err());
    }

    proptest! {
        #[test]
        fn parseval(x in proptest::collection::vec(-5f64..5.0, 1..40), extra in 0usize..20) {
            let nfft = x.len() + extra;
            let big: f64 = dft(&x, nfft).unwrap().iter().map(|c| c.norm_sqr()).sum();
            let small: f64 = x.iter().map(|v| v * v).sum::<f64>() * nfft as f64;
            prop_assert!((big - small).abs() <= 1e-6 * small.max(1e-12));
        }

        #[test]
        fn information_bounds(pairs in proptest::collection::vec((0u8..=255, 0u8..=255), 2..300)) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let r = information(&x, &y, Binning::EightBit).unwrap();
            let r2 = information(&y, &x, Binning::EightBit).unwrap();
            prop_assert!(r.mi >= -1e-9);
            prop_assert!(r.mi <= r.hx.min(r.hy) + 1e-9);
            prop_assert!((r.mi - r2.mi).abs() <= 1e-12);
            let self_info = mutual_information(&x, &x, Binning::EightBit).unwrap();
            prop_assert!((self_info - r.hx).abs() <= 1e-9);
        }

        #[test]
        fn psnr_decreasing(a in 1e-6f64..1e4, b in 1e-6f64..1e4) {
            prop_assume!(a < b);
            prop_assert!(psnr_from_mse(a, 255.0) > psnr_from_mse(b, 255.0));
        }
    }
}
