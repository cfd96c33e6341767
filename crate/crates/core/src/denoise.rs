//! Thresholding, directional smoothing, mean filtering, Savitzky-Golay filters and
//! the wavelet-domain denoising pipeline.

use nalgebra::DMatrix;

use crate::base::{check_mask_size, pad_slice, Image, Kernel2D, Padding, Plane};
use crate::error::{invalid, Error, Result};
use crate::multires::{merge_levels_1d, merge_levels_2d, split_levels_1d, split_levels_2d, Basis, Details2D};

/// Median of absolute values over 0.6745.
pub fn mad_sigma(c: &[f64]) -> Result<f64> {
    if c.is_empty() {
        return invalid("median of an empty array");
    }
    let mut a: Vec<f64> = c.iter().map(|v| v.abs()).collect();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let med = if n % 2 == 1 { a[n / 2] } else { (a[n / 2 - 1] + a[n / 2]) / 2.0 };
    Ok(med / 0.6745)
}

/// `mad_sigma(c) * sqrt(2 ln N)`.
pub fn universal_threshold(c: &[f64]) -> Result<f64> {
    if c.len() < 2 {
        return invalid(format!("universal threshold needs at least 2 coefficients, got {}", c.len()));
    }
    Ok(mad_sigma(c)? * (2.0 * (c.len() as f64).ln()).sqrt())
}

/// `Keep` zeroes the dead zone and leaves survivors alone; `Shrink` also pulls survivors toward zero by lambda.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    Keep,
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub lambda: f64,
    pub mode: ThresholdMode,
}

pub fn threshold(c: &[f64], spec: ThresholdSpec) -> Result<Vec<f64>> {
    let l = spec.lambda;
    if !(l >= 0.0) || !l.is_finite() {
        return invalid(format!("threshold must be finite and non-negative, got {l}"));
    }
    Ok(c.iter()
        .map(|&v| {
            if v.abs() <= l {
                0.0
            } else {
                match spec.mode {
                    ThresholdMode::Keep => v,
                    ThresholdMode::Shrink => v.signum() * (v.abs() - l),
                }
            }
        })
        .collect())
}

fn closest(center: f64, d: [f64; 4]) -> f64 {
    let mut best = 0;
    for k in 1..4 {
        if (d[k] - center).abs() < (d[best] - center).abs() {
            best = k;
        }
    }
    d[best]
}

fn ds2d_once(p: &Plane, round: bool) -> Plane {
    let pad = Padding::Replicate;
    Plane::from_fn(p.rows(), p.cols(), |r, c| {
        let (r, c) = (r as isize, c as isize);
        let at = |dr: isize, dc: isize| p.sample(r + dr, c + dc, pad);
        let i = at(0, 0);
        let d = [
            (at(1, -1) + i + at(-1, 1)) / 3.0,
            (at(-1, 0) + i + at(1, 0)) / 3.0,
            (at(-1, -1) + i + at(1, 1)) / 3.0,
            (at(0, -1) + i + at(0, 1)) / 3.0,
        ];
        let v = closest(i, d);
        if round {
            v.round()
        } else {
            v
        }
    })
}

/// Directional smoothing; `round` is meant for 8-bit pixel data only.
pub fn ds2d(p: &Plane, passes: usize, round: bool) -> Result<Plane> {
    if p.rows() < 3 || p.cols() < 3 {
        return invalid(format!("directional smoothing needs at least 3x3, got {}x{}", p.rows(), p.cols()));
    }
    let mut out = p.clone();
    for _ in 0..passes {
        out = ds2d_once(&out, round);
    }
    Ok(out)
}

pub fn mf2d(p: &Plane, m: usize, passes: usize) -> Result<Plane> {
    check_mask_size(m)?;
    let k = Kernel2D::from_fn(m, |_, _| 1.0 / (m * m) as f64)?;
    let mut out = p.clone();
    for _ in 0..passes {
        out = out.correlate(&k, Padding::Replicate);
    }
    Ok(out)
}

fn ds1d_once(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let se = pad_slice(s, 1, Padding::Cyclic);
    let d: Vec<f64> = (0..n as isize)
        .map(|t| (Padding::Cyclic.sample(s, t + 1) - Padding::Cyclic.sample(s, t - 1)) / 2.0)
        .collect();
    let de = pad_slice(&d, 1, Padding::Cyclic);
    let ue: Vec<f64> = se
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    (1..=n)
        .map(|j| {
            let c = se[j];
            closest(
                c,
                [
                    (de[j - 1] + c + ue[j + 1]) / 3.0,
                    (de[j] + c + ue[j]) / 3.0,
                    (de[j + 1] + c + ue[j - 1]) / 3.0,
                    (se[j - 1] + c + se[j + 1]) / 3.0,
                ],
            )
        })
        .collect()
}

/// Directional smoothing of a cyclic signal: `U` is the running sum and `D` the centered difference.
pub fn ds1d(s: &[f64], passes: usize) -> Result<Vec<f64>> {
    if s.len() < 3 {
        return invalid(format!("directional smoothing needs at least 3 samples, got {}", s.len()));
    }
    let mut out = s.to_vec();
    for _ in 0..passes {
        out = ds1d_once(&out);
    }
    Ok(out)
}

/// Mean of the 3x3 window over the rows `0.9 S`, `S`, `1.1 S`, cyclic.
pub fn mf1d(s: &[f64], passes: usize) -> Result<Vec<f64>> {
    if s.len() < 3 {
        return invalid(format!("mean filter needs at least 3 samples, got {}", s.len()));
    }
    let mut out = s.to_vec();
    for _ in 0..passes {
        let x = &out;
        out = (0..x.len() as isize)
            .map(|t| {
                let mut acc = 0.0;
                for k in -1..=1 {
                    let v = Padding::Cyclic.sample(x, t + k);
                    acc += 0.9 * v + v + 1.1 * v;
                }
                acc / 9.0
            })
            .collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavGolFilter {
    /// Taps for offsets `-n_left..=n_right`.
    pub taps: Vec<f64>,
    pub n_left: usize,
    pub n_right: usize,
    pub degree: usize,
    pub deriv: usize,
}

fn pinv(a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.pseudo_inverse(1e-12).map_err(|e| Error::InvalidParameter(e.to_string()))
}

pub fn savgol_coeffs_1d(n_left: usize, n_right: usize, degree: usize, deriv: usize) -> Result<SavGolFilter> {
    if n_left + n_right < degree {
        return invalid(format!("underdetermined fit: {} points for degree {degree}", n_left + n_right + 1));
    }
    if deriv > degree {
        return invalid(format!("derivative order {deriv} exceeds degree {degree}"));
    }
    let rows = n_left + n_right + 1;
    let a = DMatrix::from_fn(rows, degree + 1, |i, j| (i as f64 - n_left as f64).powi(j as i32));
    let p = pinv(a)?;
    let fact: f64 = (1..=deriv).map(|k| k as f64).product();
    let taps = (0..rows).map(|i| p[(deriv, i)] * fact).collect();
    Ok(SavGolFilter { taps, n_left, n_right, degree, deriv })
}

pub fn savgol_apply_1d(s: &[f64], f: &SavGolFilter, pad: Padding) -> Result<Vec<f64>> {
    if f.taps.len() > s.len() {
        return invalid(format!("filter of {} taps is longer than the signal ({})", f.taps.len(), s.len()));
    }
    let nl = f.n_left as isize;
    Ok((0..s.len() as isize)
        .map(|i| f.taps.iter().enumerate().map(|(k, &c)| c * pad.sample(s, i + k as isize - nl)).sum())
        .collect())
}

/// Cubic/quadratic/... 2D least-squares filters, one per polynomial term `x^i y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavGol2D {
    pub window: usize,
    pub degree: usize,
    /// `(i, j)` exponents in the order a00, a10, a01, a20, a11, a02, ...
    pub terms: Vec<(usize, usize)>,
    /// `filters[k].get(r, c)` weights the sample at `x = r - h`, `y = c - h`.
    pub filters: Vec<Plane>,
}

impl SavGol2D {
    pub fn filter(&self, i: usize, j: usize) -> Option<&Plane> {
        self.terms.iter().position(|&t| t == (i, j)).map(|k| &self.filters[k])
    }
}

pub fn savgol_filters_2d(window: usize, degree: usize) -> Result<SavGol2D> {
    check_mask_size(window)?;
    let terms: Vec<(usize, usize)> = (0..=degree).flat_map(|t| (0..=t).rev().map(move |i| (i, t - i))).collect();
    if window * window < terms.len() {
        return invalid(format!("underdetermined 2D fit: {} points for {} terms", window * window, terms.len()));
    }
    let h = (window / 2) as f64;
    let pts: Vec<(f64, f64)> = (0..window * window).map(|k| ((k / window) as f64 - h, (k % window) as f64 - h)).collect();
    let a = DMatrix::from_fn(pts.len(), terms.len(), |r, k| {
        let (x, y) = pts[r];
        x.powi(terms[k].0 as i32) * y.powi(terms[k].1 as i32)
    });
    let c = pinv(a)?;
    let filters = (0..terms.len())
        .map(|k| Plane::from_fn(window, window, |r, col| c[(k, r * window + col)]))
        .collect();
    Ok(SavGol2D { window, degree, terms, filters })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Keep,
    Shrink,
    Mf,
    Ds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseConfig {
    pub basis: Basis,
    pub levels: usize,
    pub method: Method,
    /// Smoother passes for `Mf` / `Ds`.
    pub passes: usize,
}

fn threshold_band(c: &[f64], mode: ThresholdMode) -> Result<Vec<f64>> {
    let lambda = universal_threshold(c)?;
    threshold(c, ThresholdSpec { lambda, mode })
}

pub fn wavelet_denoise_1d(s: &[f64], cfg: &DenoiseConfig) -> Result<Vec<f64>> {
    let mut pyr = split_levels_1d(s, cfg.basis, cfg.levels)?;
    match cfg.method {
        Method::Keep | Method::Shrink => {
            let mode = if cfg.method == Method::Keep { ThresholdMode::Keep } else { ThresholdMode::Shrink };
            for h in pyr.details.iter_mut() {
                *h = threshold_band(h, mode)?;
            }
        }
        Method::Mf => pyr.details[0] = mf1d(&pyr.details[0], cfg.passes)?,
        Method::Ds => pyr.details[0] = ds1d(&pyr.details[0], cfg.passes)?,
    }
    merge_levels_1d(&pyr)
}

fn map_details(d: &Details2D, f: impl Fn(&Plane) -> Result<Plane>) -> Result<Details2D> {
    Ok(Details2D { lh: f(&d.lh)?, hl: f(&d.hl)?, hh: f(&d.hh)? })
}

pub fn wavelet_denoise_plane(p: &Plane, cfg: &DenoiseConfig) -> Result<Plane> {
    let mut pyr = split_levels_2d(p, cfg.basis, cfg.levels)?;
    match cfg.method {
        Method::Keep | Method::Shrink => {
            let mode = if cfg.method == Method::Keep { ThresholdMode::Keep } else { ThresholdMode::Shrink };
            for d in pyr.details.iter_mut() {
                *d = map_details(d, |b| Plane::new(b.rows(), b.cols(), threshold_band(b.data(), mode)?))?;
            }
        }
        Method::Mf => pyr.details[0] = map_details(&pyr.details[0], |b| mf2d(b, 3, cfg.passes))?,
        Method::Ds => pyr.details[0] = map_details(&pyr.details[0], |b| ds2d(b, cfg.passes, false))?,
    }
    merge_levels_2d(&pyr)
}

pub fn wavelet_denoise_image(img: &Image, cfg: &DenoiseConfig) -> Result<Image> {
    img.try_map_planes(|_, p| wavelet_denoise_plane(p, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::mse;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn mad_examples() {
        assert!((mad_sigma(&[0.6745, -0.6745, 0.6745]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mad_sigma(&[0.0; 5]).unwrap(), 0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = Normal::new(0.0, 2.5).unwrap();
        let x: Vec<f64> = (0..100_000).map(|_| n.sample(&mut rng)).collect();
        assert!((mad_sigma(&x).unwrap() - 2.5).abs() < 0.03 * 2.5);
    }

    #[test]
    fn universal_threshold_examples() {
        assert_eq!(universal_threshold(&[0.0; 4]).unwrap(), 0.0);
        assert!(universal_threshold(&[1.0]).is_err());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = Normal::new(0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..4096).map(|_| n.sample(&mut rng)).collect();
        let expect = (2.0 * 4096f64.ln()).sqrt();
        assert!((universal_threshold(&x).unwrap() - expect).abs() < 0.05 * expect);
    }

    #[test]
    fn threshold_examples() {
        let c = [-3.0, -1.0, 0.0, 2.0, 5.0];
        let keep = ThresholdSpec { lambda: 2.0, mode: ThresholdMode::Keep };
        let shrink = ThresholdSpec { lambda: 2.0, mode: ThresholdMode::Shrink };
        assert_eq!(threshold(&c, keep).unwrap(), vec![-3.0, 0.0, 0.0, 0.0, 5.0]);
        assert_eq!(threshold(&c, shrink).unwrap(), vec![-1.0, 0.0, 0.0, 0.0, 3.0]);
        assert!(threshold(&c, ThresholdSpec { lambda: -1.0, mode: ThresholdMode::Keep }).is_err());
    }

    #[test]
    fn ds2d_examples() {
        let c = Plane::filled(5, 5, 4.0);
        assert_eq!(ds2d(&c, 3, true).unwrap(), c);
        let mut imp = Plane::zeros(5, 5);
        imp.set(2, 2, 9.0);
        let out = ds2d(&imp, 1, false).unwrap();
        assert!(out.get(2, 2) <= 3.0);
        assert_eq!(closest(0.0, [1.0, -1.0, 1.0, -1.0]), 1.0);
    }

    #[test]
    fn mf2d_examples() {
        let mut imp = Plane::zeros(7, 7);
        imp.set(3, 3, 9.0);
        let out = mf2d(&imp, 3, 1).unwrap();
        for r in 0..7 {
            for c in 0..7 {
                let inside = (2..5).contains(&r) && (2..5).contains(&c);
                assert!((out.get(r, c) - if inside { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        assert!(mf2d(&imp, 2, 1).is_err());
        let p = Plane::from_fn(12, 12, |r, c| ((r * 7 + c * 13) % 10) as f64);
        let two = mf2d(&p, 3, 2).unwrap();
        let tri = [1.0, 2.0, 3.0, 2.0, 1.0];
        let k = Kernel2D::from_fn(5, |i, j| tri[i] * tri[j] / 81.0).unwrap();
        let one = p.correlate(&k, Padding::Replicate);
        for r in 2..10 {
            for c in 2..10 {
                assert!((two.get(r, c) - one.get(r, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ds1d_on_ramp_and_noise() {
        let ramp: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let out = ds1d(&ramp, 1).unwrap();
        for t in 1..15 {
            assert_eq!(out[t], ramp[t]);
        }
        let mut errs = Vec::new();
        for seed in 0..20 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = Normal::new(0.0, 0.05).unwrap();
            let clean: Vec<f64> = (0..512).map(|i| (2.0 * PI * 4.0 * i as f64 / 512.0).sin()).collect();
            let noisy: Vec<f64> = clean.iter().map(|v| v + n.sample(&mut rng)).collect();
            let den = ds1d(&noisy, 1).unwrap();
            errs.push(mse(&den, &clean).unwrap() < mse(&noisy, &clean).unwrap());
        }
        assert!(errs.iter().filter(|&&b| b).count() > 10);
    }

    #[test]
    fn mf1d_is_moving_average() {
        let s: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64 - 1.3).collect();
        let out = mf1d(&s, 1).unwrap();
        let n = s.len();
        for t in 0..n {
            let avg = (s[(t + n - 1) % n] + s[t] + s[(t + 1) % n]) / 3.0;
            assert!((out[t] - avg).abs() < 1e-12);
        }
        let mut imp = vec![0.0; 9];
        imp[4] = 3.0;
        assert!(close(&mf1d(&imp, 1).unwrap()[3..6], &[1.0, 1.0, 1.0], 1e-15));
    }

    #[test]
    fn savgol_table_rows() {
        let rows: [((usize, usize, usize), &[f64]); 6] = [
            ((2, 2, 2), &[-0.086, 0.343, 0.486, 0.343, -0.086]),
            ((2, 3, 1), &[-0.143, 0.171, 0.343, 0.371, 0.257]),
            ((2, 4, 0), &[0.086, -0.143, -0.086, 0.257, 0.886]),
            ((2, 5, 5), &[-0.084, 0.021, 0.103, 0.161, 0.196, 0.207, 0.196, 0.161, 0.103, 0.021, -0.084]),
            ((4, 4, 4), &[0.035, -0.128, 0.070, 0.315, 0.417, 0.315, 0.070, -0.128, 0.035]),
            ((4, 5, 5), &[0.042, -0.105, -0.023, 0.140, 0.280, 0.333, 0.280, 0.140, -0.023, -0.105, 0.042]),
        ];
        for ((m, nl, nr), expect) in rows {
            let f = savgol_coeffs_1d(nl, nr, m, 0).unwrap();
            assert!(close(&f.taps, expect, 1e-3), "{m} {nl} {nr}: {:?}", f.taps);
            assert!((f.taps.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(savgol_coeffs_1d(1, 1, 3, 0).is_err());
    }

    #[test]
    fn savgol_derivative_and_polynomial_reproduction() {
        let f = savgol_coeffs_1d(3, 3, 2, 1).unwrap();
        let s: Vec<f64> = (0..30).map(|i| 0.5 * (i as f64).powi(2) - 3.0 * i as f64 + 2.0).collect();
        let d = savgol_apply_1d(&s, &f, Padding::Mirror).unwrap();
        for i in 3..27 {
            assert!((d[i] - (i as f64 - 3.0)).abs() < 1e-9);
        }
        let g = savgol_coeffs_1d(4, 4, 3, 0).unwrap();
        let cubic: Vec<f64> = (0..30).map(|i| 0.01 * (i as f64).powi(3) - (i as f64).powi(2)).collect();
        let out = savgol_apply_1d(&cubic, &g, Padding::Mirror).unwrap();
        assert!(close(&out[4..26], &cubic[4..26], 1e-9));
        assert!(savgol_apply_1d(&[1.0; 5], &g, Padding::Mirror).is_err());
    }

    #[test]
    fn savgol_keeps_peaks_better_than_moving_average() {
        let n = 1000;
        let bumps: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64;
                [200.0, 500.0, 800.0].iter().map(|&c| (-(t - c).powi(2) / (2.0 * 12f64.powi(2))).exp()).sum()
            })
            .collect();
        let sg = savgol_apply_1d(&bumps, &savgol_coeffs_1d(16, 16, 4, 0).unwrap(), Padding::Mirror).unwrap();
        let ma = savgol_apply_1d(&bumps, &savgol_coeffs_1d(16, 16, 0, 0).unwrap(), Padding::Mirror).unwrap();
        for c in [200, 500, 800] {
            assert!((1.0 - sg[c]).abs() < (1.0 - ma[c]).abs());
        }
    }

    #[test]
    fn savgol_2d_filters() {
        let f = savgol_filters_2d(5, 3).unwrap();
        assert_eq!(f.terms.len(), 10);
        let c00 = [
            [-0.0743, 0.0114, 0.0400, 0.0114, -0.0743],
            [0.0114, 0.0971, 0.1257, 0.0971, 0.0114],
            [0.0400, 0.1257, 0.1543, 0.1257, 0.0400],
            [0.0114, 0.0971, 0.1257, 0.0971, 0.0114],
            [-0.0743, 0.0114, 0.0400, 0.0114, -0.0743],
        ];
        let c10 = [
            [0.0738, -0.0119, -0.0405, -0.0119, 0.0738],
            [-0.1048, -0.1476, -0.1619, -0.1476, -0.1048],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.1048, 0.1476, 0.1619, 0.1476, 0.1048],
            [-0.0738, 0.0119, 0.0405, 0.0119, -0.0738],
        ];
        let (a, b, c) = (f.filter(0, 0).unwrap(), f.filter(1, 0).unwrap(), f.filter(0, 1).unwrap());
        for r in 0..5 {
            for k in 0..5 {
                assert!((a.get(r, k) - c00[r][k]).abs() < 1e-3);
                assert!((b.get(r, k) - c10[r][k]).abs() < 1e-3);
                assert!((c.get(r, k) - c10[k][r]).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn wavelet_denoise_constant_exact() {
        let cfg = DenoiseConfig { basis: Basis::Haar, levels: 3, method: Method::Shrink, passes: 1 };
        let s = vec![5.0; 64];
        assert_eq!(wavelet_denoise_1d(&s, &cfg).unwrap(), s);
        let p = Plane::filled(16, 16, 3.0);
        assert_eq!(wavelet_denoise_plane(&p, &cfg).unwrap(), p);
    }

    proptest! {
        #[test]
        fn threshold_properties(c in proptest::collection::vec(-10f64..10.0, 1..50), l in 0f64..5.0) {
            let keep = threshold(&c, ThresholdSpec { lambda: l, mode: ThresholdMode::Keep }).unwrap();
            let shrink = threshold(&c, ThresholdSpec { lambda: l, mode: ThresholdMode::Shrink }).unwrap();
            for i in 0..c.len() {
                prop_assert!(shrink[i].abs() <= c[i].abs());
                prop_assert!(keep[i] == 0.0 || keep[i] == c[i]);
            }
            prop_assert_eq!(threshold(&c, ThresholdSpec { lambda: 0.0, mode: ThresholdMode::Shrink }).unwrap(), c.iter().map(|&v| if v == 0.0 { 0.0 } else { v }).collect::<Vec<_>>());
        }

        #[test]
        fn smoothers_keep_constants(v in -100f64..100.0, passes in 1usize..4) {
            let s = vec![v; 12];
            prop_assert!(close(&mf1d(&s, passes).unwrap(), &s, 1e-12 * v.abs().max(1.0)));
            let p = Plane::filled(6, 6, v);
            prop_assert!(close(mf2d(&p, 3, passes).unwrap().data(), p.data(), 1e-12 * v.abs().max(1.0)));
            prop_assert!(close(ds2d(&p, passes, false).unwrap().data(), p.data(), 1e-12 * v.abs().max(1.0)));
        }

        #[test]
        fn savgol_smoothing_sums_to_one(nl in 0usize..8, nr in 0usize..8, m in 0usize..5) {
            prop_assume!(nl + nr >= m);
            let f = savgol_coeffs_1d(nl, nr, m, 0).unwrap();
            prop_assert!((f.taps.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
