//! Frequency-in-time estimators for images.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::base::{check_mask_size, equalize_plane, Image, Kernel2D, Padding, Plane, IMAGE_RANGE};
use crate::error::{Error, Result};
use crate::fit1d::{average_denominator, scaling_mask, wavelet_mask, Form};
use crate::multires::haar2d_forward;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    Segmental,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageVariant {
    Raw,
    Equalized,
    Averaged,
    Mask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonOverlapImageVariant {
    Raw,
    Eq,
    Av,
}

fn row_kernel(row: &[f64]) -> Kernel2D {
    let m = row.len();
    Kernel2D::from_fn(m, |r, c| if r == m / 2 { row[c] } else { 0.0 }).expect("odd mask")
}

/// Horizontal and vertical derivative masks `N_H`, `N_V`.
pub fn segmental_masks(m: usize) -> Result<(Kernel2D, Kernel2D)> {
    let nh = row_kernel(&wavelet_mask(m)?);
    let nv = nh.transpose();
    Ok((nh, nv))
}

/// Single diagonal derivative mask: -1 below the anti-diagonal, 0 on it, +1 above, over `(M-1)M`.
pub fn square_mask(m: usize) -> Result<Kernel2D> {
    check_mask_size(m)?;
    let k = ((m - 1) * m) as f64;
    Kernel2D::from_fn(m, |i, j| match (i + j).cmp(&(m - 1)) {
        std::cmp::Ordering::Less => -1.0 / k,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0 / k,
    })
}

pub fn segmental_means(m: usize) -> Result<(Kernel2D, Kernel2D)> {
    let dh = row_kernel(&scaling_mask(m)?);
    let dv = dh.transpose();
    Ok((dh, dv))
}

pub fn box_mean(m: usize) -> Result<Kernel2D> {
    check_mask_size(m)?;
    Kernel2D::from_fn(m, |_, _| 1.0 / (m * m) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Directional {
    /// Present for segmental masks only.
    pub ih: Option<Plane>,
    pub iv: Option<Plane>,
    pub magnitude: Plane,
}

pub fn directional_derivative_plane(p: &Plane, kind: MaskKind, m: usize) -> Result<Directional> {
    match kind {
        MaskKind::Segmental => {
            let (nh, nv) = segmental_masks(m)?;
            let ih = p.correlate(&nh, Padding::Zero);
            let iv = p.correlate(&nv, Padding::Zero);
            let magnitude = ih.zip_map(&iv, f64::hypot)?;
            Ok(Directional { ih: Some(ih), iv: Some(iv), magnitude })
        }
        MaskKind::Square => {
            let magnitude = p.correlate(&square_mask(m)?, Padding::Zero);
            Ok(Directional { ih: None, iv: None, magnitude })
        }
    }
}

pub fn directional_derivative(img: &Image, kind: MaskKind, m: usize) -> Result<Vec<Directional>> {
    img.planes().iter().map(|p| directional_derivative_plane(p, kind, m)).collect()
}

pub fn smoothing_denominator_plane(p: &Plane, kind: MaskKind, m: usize) -> Result<Plane> {
    match kind {
        MaskKind::Segmental => {
            let (dh, dv) = segmental_means(m)?;
            p.correlate(&dh, Padding::Zero).zip_map(&p.correlate(&dv, Padding::Zero), f64::hypot)
        }
        MaskKind::Square => Ok(p.correlate(&box_mean(m)?, Padding::Zero)),
    }
}

pub fn smoothing_denominator(img: &Image, kind: MaskKind, m: usize) -> Result<Image> {
    img.try_map_planes(|_, p| smoothing_denominator_plane(p, kind, m))
}

fn hz(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num.abs() / den.abs() / (2.0 * PI)
    }
}

fn first_zero(p: &Plane) -> Option<(usize, usize)> {
    p.data().iter().position(|&v| v == 0.0).map(|k| (k / p.cols(), k % p.cols()))
}

/// Full-resolution FIT per channel, in Hz.
pub fn fit_image_overlap(img: &Image, kind: MaskKind, m: usize, variant: ImageVariant) -> Result<Image> {
    img.try_map_planes(|ch, p| fit_plane_overlap(p, kind, m, variant).map_err(|e| with_channel(e, ch)))
}

fn with_channel(e: Error, channel: usize) -> Error {
    match e {
        Error::DivisionByZeroAt { row, col, .. } => Error::DivisionByZeroAt { channel, row, col },
        other => other,
    }
}

pub fn fit_plane_overlap(p: &Plane, kind: MaskKind, m: usize, variant: ImageVariant) -> Result<Plane> {
    check_mask_size(m)?;
    match variant {
        ImageVariant::Raw => {
            if let Some((row, col)) = first_zero(p) {
                return Err(Error::DivisionByZeroAt { channel: 0, row, col });
            }
            fit_plane_mapped(p, kind, m, variant, 0.0, |v| v)
        }
        ImageVariant::Averaged => fit_plane_mapped(p, kind, m, variant, average_denominator(p.data()).0, |v| v),
        ImageVariant::Equalized | ImageVariant::Mask => {
            // Equalization is applied per sample instead of materializing the equalized plane.
            let (lo, hi) = IMAGE_RANGE;
            let min = p.data().iter().copied().fold(f64::INFINITY, f64::min);
            let max = p.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max <= min {
                fit_plane_mapped(p, kind, m, variant, 0.0, |_| lo)
            } else {
                let scale = (hi - lo) / (max - min);
                fit_plane_mapped(p, kind, m, variant, 0.0, |v| (v - min) * scale + lo)
            }
        }
    }
}

/// `Plane::correlate_at` with zero padding, applied to `map`ped samples.
#[inline]
fn correlate_mapped<F: Fn(f64) -> f64>(p: &Plane, k: &Kernel2D, r: usize, c: usize, map: &F) -> f64 {
    let size = k.size();
    let h = size / 2;
    let taps = k.taps();
    let (rows, cols) = p.shape();
    let data = p.data();
    let mut acc = 0.0;
    if r >= h && c >= h && r + h < rows && c + h < cols {
        for i in 0..size {
            let base = (r + i - h) * cols + c - h;
            for j in 0..size {
                let t = taps[i * size + j];
                if t != 0.0 {
                    acc += t * map(data[base + j]);
                }
            }
        }
        return acc;
    }
    for i in 0..size {
        for j in 0..size {
            let t = taps[i * size + j];
            let (rr, cc) = ((r + i) as isize - h as isize, (c + j) as isize - h as isize);
            if t != 0.0 && rr >= 0 && cc >= 0 && (rr as usize) < rows && (cc as usize) < cols {
                acc += t * map(data[rr as usize * cols + cc as usize]);
            }
        }
    }
    acc
}

fn fit_plane_mapped<F: Fn(f64) -> f64 + Sync>(p: &Plane, kind: MaskKind, m: usize, variant: ImageVariant, avg: f64, map: F) -> Result<Plane> {
    let (d1, d2) = match kind {
        MaskKind::Segmental => {
            let (nh, nv) = segmental_masks(m)?;
            (nh, Some(nv))
        }
        MaskKind::Square => (square_mask(m)?, None),
    };
    let (s1, s2) = match kind {
        MaskKind::Segmental => {
            let (dh, dv) = segmental_means(m)?;
            (dh, Some(dv))
        }
        MaskKind::Square => (box_mean(m)?, None),
    };
    let pair = |k1: &Kernel2D, k2: &Option<Kernel2D>, r: usize, c: usize| {
        let a = correlate_mapped(p, k1, r, c, &map);
        match k2 {
            Some(k2) => a.hypot(correlate_mapped(p, k2, r, c, &map)),
            None => a,
        }
    };
    let cols = p.cols();
    let out = (0..p.rows() * cols)
        .into_par_iter()
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            let num = pair(&d1, &d2, r, c);
            match variant {
                ImageVariant::Raw | ImageVariant::Equalized => hz(num, map(p.get(r, c))),
                ImageVariant::Averaged => hz(num, avg),
                ImageVariant::Mask => hz(num, pair(&s1, &s2, r, c)),
            }
        })
        .collect();
    Plane::new(p.rows(), cols, out)
}

/// Half-resolution horizontal, vertical and diagonal FIT of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalFit {
    pub h: Plane,
    pub v: Plane,
    pub d: Plane,
}

pub fn fit_image_nonoverlap(img: &Image, variant: NonOverlapImageVariant, form: Form) -> Result<Vec<DirectionalFit>> {
    img.planes()
        .iter()
        .enumerate()
        .map(|(ch, p)| fit_plane_nonoverlap(p, variant, form).map_err(|e| with_channel(e, ch)))
        .collect()
}

pub fn fit_plane_nonoverlap(p: &Plane, variant: NonOverlapImageVariant, form: Form) -> Result<DirectionalFit> {
    let sb = match variant {
        NonOverlapImageVariant::Eq => haar2d_forward(&equalize_plane(p, IMAGE_RANGE.0, IMAGE_RANGE.1)?.0)?,
        _ => haar2d_forward(p)?,
    };
    let den = match variant {
        NonOverlapImageVariant::Av => Plane::filled(sb.ll.rows(), sb.ll.cols(), average_denominator(sb.ll.data()).0),
        NonOverlapImageVariant::Raw => {
            if let Some((row, col)) = first_zero(&sb.ll) {
                return Err(Error::DivisionByZeroAt { channel: 0, row, col });
            }
            sb.ll.clone()
        }
        NonOverlapImageVariant::Eq => sb.ll.clone(),
    };
    let f = |num: f64, l: f64| match form {
        Form::Abs => hz(num, l),
        Form::SqrtConj => {
            if l == 0.0 {
                return 0.0;
            }
            let w = Complex64::new(0.0, num) / l;
            (w * w.conj()).re.sqrt() / (2.0 * PI)
        }
    };
    Ok(DirectionalFit { h: sb.lh.zip_map(&den, f)?, v: sb.hl.zip_map(&den, f)?, d: sb.hh.zip_map(&den, f)? })
}
