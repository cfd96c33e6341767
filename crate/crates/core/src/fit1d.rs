//! Frequency-in-time estimators for signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::base::{check_mask_size, equalize, mean, Padding, Signal, SIGNAL_RANGE};
use crate::error::{invalid, Error, Result};
use crate::multires::haar1d_forward;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapVariant {
    Raw,
    Equalized,
    Averaged,
    MaskEq,
    MaskAv,
    DiffEq,
    DiffAv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonOverlapVariant {
    Raw,
    Eq,
    Av,
}

/// `SqrtConj` evaluates `sqrt(w * conj(w))` on the complex quotient; `Abs` uses magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    SqrtConj,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    PerSample,
    PerPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSeries {
    /// Hz.
    pub values: Vec<f64>,
    pub alignment: Alignment,
    /// Set when a zero-mean input forced the mean of absolute values as denominator.
    pub abs_mean_fallback: bool,
}

/// Denominator for averaged variants: `|mean|`, or `mean(|x|)` when the mean vanishes.
pub fn average_denominator(x: &[f64]) -> (f64, bool) {
    let m = mean(x);
    if m.abs() <= 1e-12 {
        (x.iter().map(|v| v.abs()).sum::<f64>() / x.len().max(1) as f64, true)
    } else {
        (m.abs(), false)
    }
}

fn quotient(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num.abs() / den.abs() / (2.0 * PI)
    }
}

/// Centered derivative `(s[n+1] - s[n-1]) / 2`.
pub fn centered_derivative(s: &[f64], pad: Padding) -> Vec<f64> {
    (0..s.len() as isize).map(|n| (pad.sample(s, n + 1) - pad.sample(s, n - 1)) / 2.0).collect()
}

/// Forward difference `s[n+1] - s[n]`, padded to keep the input length.
pub fn forward_difference(s: &[f64], pad: Padding) -> Vec<f64> {
    (0..s.len() as isize).map(|n| pad.sample(s, n + 1) - pad.sample(s, n)).collect()
}

/// Derivative mask `[-1 .. -1 0 1 .. 1] / (M-1)`.
pub fn wavelet_mask(m: usize) -> Result<Vec<f64>> {
    check_mask_size(m)?;
    let h = m / 2;
    let k = (m - 1) as f64;
    Ok((0..m)
        .map(|j| match j.cmp(&h) {
            std::cmp::Ordering::Less => -1.0 / k,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => 1.0 / k,
        })
        .collect())
}

/// Mean mask `[1 .. 1] / M`.
pub fn scaling_mask(m: usize) -> Result<Vec<f64>> {
    check_mask_size(m)?;
    Ok(vec![1.0 / m as f64; m])
}

pub fn fit_overlap(s: &Signal, variant: OverlapVariant, m: usize) -> Result<FitSeries> {
    fit_overlap_with(s, variant, m, Padding::Cyclic)
}

/// `m` is only consulted by the mask variants.
pub fn fit_overlap_with(s: &Signal, variant: OverlapVariant, m: usize, pad: Padding) -> Result<FitSeries> {
    use OverlapVariant::*;
    let x = s.samples();
    let n = x.len();
    if variant == Raw {
        if let Some(i) = x.iter().position(|&v| v == 0.0) {
            return Err(Error::DivisionByZero(i));
        }
    }
    // Equalized samples are produced on the fly to avoid full-length temporaries.
    let map: Box<dyn Fn(f64) -> f64 + Sync> = if matches!(variant, Equalized | MaskEq | DiffEq) {
        let (lo, hi) = SIGNAL_RANGE;
        let min = x.iter().copied().fold(f64::INFINITY, f64::min);
        let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            Box::new(move |_| lo)
        } else {
            Box::new(move |v| (v - min) / (max - min) * (hi - lo) + lo)
        }
    } else {
        Box::new(|v| v)
    };
    let at = |i: isize| pad.index(i, n).map_or(0.0, |k| map(x[k]));
    let (avg, fallback) = match variant {
        Averaged | MaskAv | DiffAv => average_denominator(x),
        _ => (0.0, false),
    };
    let (wmask, smask) = if matches!(variant, MaskEq | MaskAv) { (wavelet_mask(m)?, scaling_mask(m)?) } else { (Vec::new(), Vec::new()) };
    let h = (m / 2) as isize;
    let apply = |mask: &[f64], i: isize| mask.iter().enumerate().map(|(j, &t)| t * at(i + j as isize - h)).sum::<f64>();
    let wavelet = |i: isize| apply(&wmask, i);
    let window = |i: isize| apply(&smask, i);
    let values = (0..n as isize)
        .into_par_iter()
        .map(|i| match variant {
            Raw | Equalized => quotient((at(i + 1) - at(i - 1)) / 2.0, at(i)),
            Averaged => quotient((at(i + 1) - at(i - 1)) / 2.0, avg),
            MaskEq => quotient(wavelet(i), window(i)),
            MaskAv => quotient(wavelet(i), avg),
            DiffEq => quotient(at(i + 1) - at(i), at(i)),
            DiffAv => quotient(at(i + 1) - at(i), avg),
        })
        .collect();
    Ok(FitSeries { values, alignment: Alignment::PerSample, abs_mean_fallback: fallback })
}

pub fn fit_nonoverlap(s: &Signal, variant: NonOverlapVariant, form: Form) -> Result<FitSeries> {
    let x = s.samples();
    let mut fallback = false;
    let (l, h) = match variant {
        NonOverlapVariant::Eq => {
            let e = equalize(x, SIGNAL_RANGE.0, SIGNAL_RANGE.1)?;
            let sb = haar1d_forward(&e.values)?;
            (sb.l, sb.h)
        }
        _ => {
            let sb = haar1d_forward(x)?;
            (sb.l, sb.h)
        }
    };
    let dens: Vec<f64> = match variant {
        NonOverlapVariant::Av => {
            let (d, fb) = average_denominator(&l);
            fallback = fb;
            vec![d; l.len()]
        }
        NonOverlapVariant::Raw => {
            if let Some(i) = l.iter().position(|&v| v == 0.0) {
                return Err(Error::DivisionByZero(i));
            }
            l
        }
        NonOverlapVariant::Eq => l,
    };
    let values = h
        .iter()
        .zip(&dens)
        .map(|(&hk, &lk)| match form {
            Form::Abs => quotient(hk, lk),
            Form::SqrtConj => {
                if lk == 0.0 {
                    return 0.0;
                }
                let w = Complex64::new(0.0, hk) / lk;
                (w * w.conj()).re.sqrt() / (2.0 * PI)
            }
        })
        .collect();
    Ok(FitSeries { values, alignment: Alignment::PerPair, abs_mean_fallback: fallback })
}

/// Positions (fractional sample index) where equidistant horizontal levels cross the signal.
pub fn witness_bars(s: &Signal, levels: usize) -> Result<Vec<f64>> {
    if levels < 2 {
        return invalid(format!("witness bars need at least 2 levels, got {levels}"));
    }
    let x = s.samples();
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for j in 0..levels {
        let y = min + j as f64 * (max - min) / (levels - 1) as f64;
        for (n, &v) in x.iter().enumerate() {
            if v == y {
                out.push(n as f64);
            }
        }
        for n in 0..x.len() - 1 {
            let (a, b) = (x[n] - y, x[n + 1] - y);
            if a * b < 0.0 {
                out.push(n as f64 + a / (a - b));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Overlap,
    NonOverlap,
}

/// `(s_n, ds_n)` with the cyclic centered derivative, or `(l_k, h_k)` Haar pairs.
pub fn phase_plane(s: &Signal, mode: PhaseMode) -> Result<Vec<(f64, f64)>> {
    let x = s.samples();
    match mode {
        PhaseMode::Overlap => {
            let d = centered_derivative(x, Padding::Cyclic);
            Ok(x.iter().copied().zip(d).collect())
        }
        PhaseMode::NonOverlap => {
            let sb = haar1d_forward(x)?;
            Ok(sb.l.into_iter().zip(sb.h).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multires::haar1d_inverse;
    use proptest::prelude::*;

    fn sig(v: Vec<f64>) -> Signal {
        Signal::new(v, 1024.0).unwrap()
    }

    const ALL: [OverlapVariant; 6] = [
        OverlapVariant::Equalized,
        OverlapVariant::Averaged,
        OverlapVariant::MaskEq,
        OverlapVariant::MaskAv,
        OverlapVariant::DiffEq,
        OverlapVariant::DiffAv,
    ];

    #[test]
    fn constant_signal_has_zero_fit() {
        let s = sig(vec![3.0; 16]);
        for v in ALL {
            assert!(fit_overlap(&s, v, 5).unwrap().values.iter().all(|&f| f == 0.0), "{v:?}");
        }
        for v in [NonOverlapVariant::Eq, NonOverlapVariant::Av, NonOverlapVariant::Raw] {
            assert!(fit_nonoverlap(&s, v, Form::Abs).unwrap().values.iter().all(|&f| f == 0.0));
        }
    }

    #[test]
    fn raw_rejects_zero_sample() {
        let s = sig(vec![1.0, 0.0, 2.0]);
        assert_eq!(fit_overlap(&s, OverlapVariant::Raw, 3), Err(Error::DivisionByZero(1)));
        assert!(fit_overlap(&sig(vec![1.0; 8]), OverlapVariant::MaskEq, 4).is_err());
    }

    #[test]
    fn mask_three_reduces_to_centered_forms() {
        assert_eq!(wavelet_mask(3).unwrap(), vec![-0.5, 0.0, 0.5]);
        assert_eq!(wavelet_mask(5).unwrap(), vec![-0.25, -0.25, 0.0, 0.25, 0.25]);
        let s = sig(vec![1.0, 4.0, 2.0, 8.0, 5.0, 7.0]);
        let av = fit_overlap(&s, OverlapVariant::Averaged, 3).unwrap();
        let mav = fit_overlap(&s, OverlapVariant::MaskAv, 3).unwrap();
        for (a, b) in av.values.iter().zip(&mav.values) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn equalized_nonoverlap_example() {
        let s = sig(vec![1.0, 3.0, 5.0, 7.0]);
        let f = fit_nonoverlap(&s, NonOverlapVariant::Eq, Form::Abs).unwrap();
        let expect = [1.0 / 7.0 / (2.0 * PI), 1.0 / 11.0 / (2.0 * PI)];
        for (a, b) in f.values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(fit_nonoverlap(&sig(vec![1.0, 2.0, 3.0]), NonOverlapVariant::Eq, Form::Abs).is_err());
    }

    #[test]
    fn zero_mean_uses_absolute_average() {
        let s = sig(vec![1.0, -1.0, 1.0, -1.0]);
        let f = fit_overlap(&s, OverlapVariant::Averaged, 3).unwrap();
        assert!(f.abs_mean_fallback);
        assert!(f.values.iter().all(|v| v.is_finite()));
        let z = fit_overlap(&sig(vec![0.0; 4]), OverlapVariant::Averaged, 3).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn averaged_peak_at_steepest_flank() {
        let fs = 1024.0;
        let x: Vec<f64> = (0..1024).map(|i| (2.0 * PI * 10.0 * i as f64 / fs).sin()).collect();
        let f = fit_overlap(&sig(x.clone()), OverlapVariant::Averaged, 3).unwrap();
        let d = centered_derivative(&x, Padding::Cyclic);
        let am = |v: &[f64]| v.iter().enumerate().fold((0, f64::MIN), |a, (i, &y)| if y.abs() > a.1 { (i, y.abs()) } else { a }).0;
        assert!((am(&f.values) as isize - am(&d) as isize).abs() <= 1);
    }

    #[test]
    fn witness_bars_examples() {
        let ramp = sig((0..9).map(|i| i as f64).collect());
        assert_eq!(witness_bars(&ramp, 5).unwrap(), vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        assert!(witness_bars(&sig(vec![2.0; 5]), 4).unwrap().is_empty());
        let n = 4096;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).sin()).collect();
        let bars = witness_bars(&sig(x), 64).unwrap();
        let count = |lo: f64, hi: f64| bars.iter().filter(|&&b| b >= lo && b < hi).count();
        let q = n as f64 / 8.0;
        assert!(count(3.0 * q, 5.0 * q) > count(q, 3.0 * q));
    }

    #[test]
    fn phase_plane_shapes() {
        let n = 256;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 4.0 * i as f64 / n as f64).sin()).collect();
        let pp = phase_plane(&sig(x.clone()), PhaseMode::Overlap).unwrap();
        let gap = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        let max_step = pp.windows(2).map(|w| gap(w[0], w[1])).fold(0.0, f64::max);
        assert!(gap(pp[0], pp[n - 1]) <= max_step + 1e-12);
        let c = phase_plane(&sig(vec![2.0; 6]), PhaseMode::Overlap).unwrap();
        assert!(c.iter().all(|&p| p == (2.0, 0.0)));
        let non = phase_plane(&sig(x), PhaseMode::NonOverlap).unwrap();
        let dx_over: Vec<f64> = pp.iter().step_by(2).map(|p| p.1).collect();
        let dx_non: Vec<f64> = non.iter().map(|p| p.1).collect();
        let corr = {
            let (ma, mb) = (mean(&dx_over), mean(&dx_non));
            let cov: f64 = dx_over.iter().zip(&dx_non).map(|(a, b)| (a - ma) * (b - mb)).sum();
            let va: f64 = dx_over.iter().map(|a| (a - ma).powi(2)).sum();
            let vb: f64 = dx_non.iter().map(|b| (b - mb).powi(2)).sum();
            cov / (va * vb).sqrt()
        };
        assert!(corr >= 0.99, "{corr}");
    }

    proptest! {
        #[test]
        fn scale_invariance(v in proptest::collection::vec(0.5f64..10.0, 4..64), c in 0.01f64..100.0) {
            let s = sig(v.clone());
            let cs = sig(v.iter().map(|x| x * c).collect());
            for var in [OverlapVariant::Equalized, OverlapVariant::Averaged] {
                let a = fit_overlap(&s, var, 3).unwrap();
                let b = fit_overlap(&cs, var, 3).unwrap();
                for (p, q) in a.values.iter().zip(&b.values) {
                    prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
                }
            }
        }

        #[test]
        fn nonnegative_everywhere(v in proptest::collection::vec(-10f64..10.0, 4..64), m in 1usize..6) {
            let s = sig(v);
            for var in ALL {
                prop_assert!(fit_overlap(&s, var, 2 * m + 1).unwrap().values.iter().all(|&f| f >= 0.0 && f.is_finite()));
            }
        }

        #[test]
        fn forms_agree_and_survive_haar_roundtrip(half in proptest::collection::vec(-10f64..10.0, 2..40)) {
            let v: Vec<f64> = half.iter().chain(half.iter().rev()).copied().collect();
            let s = sig(v.clone());
            let sb = haar1d_forward(&v).unwrap();
            let back = sig(haar1d_inverse(&sb.l, &sb.h).unwrap());
            for var in [NonOverlapVariant::Eq, NonOverlapVariant::Av] {
                let a = fit_nonoverlap(&s, var, Form::Abs).unwrap();
                let b = fit_nonoverlap(&s, var, Form::SqrtConj).unwrap();
                let c = fit_nonoverlap(&back, var, Form::Abs).unwrap();
                for ((x, y), z) in a.values.iter().zip(&b.values).zip(&c.values) {
                    prop_assert!((x - y).abs() <= 1e-12);
                    prop_assert!((x - z).abs() <= 1e-12 * x.abs().max(1.0));
                }
            }
        }
    }
}
