//! Numeric containers, padding, equalization and element-wise arithmetic.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Boundary extension used by padded filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Zero,
    Cyclic,
    Replicate,
    /// Reflection without repeating the edge sample (`dcb|abcd|cba`).
    Mirror,
}

impl Padding {
    /// Maps an out-of-range index into `0..n`, or `None` for zero padding.
    #[inline]
    pub fn index(self, i: isize, n: usize) -> Option<usize> {
        let n_i = n as isize;
        if (0..n_i).contains(&i) {
            return Some(i as usize);
        }
        match self {
            Padding::Zero => None,
            Padding::Cyclic => Some(i.rem_euclid(n_i) as usize),
            Padding::Replicate => Some(i.clamp(0, n_i - 1) as usize),
            Padding::Mirror => {
                if n == 1 {
                    return Some(0);
                }
                let period = 2 * (n_i - 1);
                let mut j = i.rem_euclid(period);
                if j >= n_i {
                    j = period - j;
                }
                Some(j as usize)
            }
        }
    }

    #[inline]
    pub fn sample(self, s: &[f64], i: isize) -> f64 {
        self.index(i, s.len()).map_or(0.0, |k| s[k])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.len() < 2 {
            return invalid(format!("signal needs at least 2 samples, got {}", samples.len()));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return invalid(format!("sample rate must be positive, got {sample_rate}"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite sample at index {i}"));
        }
        Ok(Signal { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Signal {
        Signal { samples, sample_rate: self.sample_rate }
    }
}

/// A single real-valued channel stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(vec![rows, cols], vec![data.len()]));
        }
        Ok(Plane { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Plane { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, v: f64) -> Self {
        Plane { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Plane { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn sample(&self, r: isize, c: isize, pad: Padding) -> f64 {
        match (pad.index(r, self.rows), pad.index(c, self.cols)) {
            (Some(r), Some(c)) => self.get(r, c),
            _ => 0.0,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Result<Plane> {
        same_shape(self, other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Plane { rows: self.rows, cols: self.cols, data })
    }

    pub fn transpose(&self) -> Plane {
        Plane::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Rotates by 90 degrees counter-clockwise.
    pub fn rot90(&self) -> Plane {
        Plane::from_fn(self.cols, self.rows, |r, c| self.get(c, self.cols - 1 - r))
    }

    pub fn crop(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Plane {
        Plane::from_fn(rows, cols, |r, c| self.get(r0 + r, c0 + c))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        mean(&self.data)
    }

    /// Correlates (no kernel flip) with a square odd kernel; output has the input size.
    pub fn correlate(&self, k: &Kernel2D, pad: Padding) -> Plane {
        let cols = self.cols;
        let mut out = vec![0.0; self.rows * cols];
        out.par_chunks_mut(cols.max(1)).enumerate().for_each(|(r, row)| {
            for (c, o) in row.iter_mut().enumerate() {
                *o = self.correlate_at(k, r, c, pad);
            }
        });
        Plane { rows: self.rows, cols, data: out }
    }

    /// One output sample of [`Plane::correlate`].
    #[inline]
    pub fn correlate_at(&self, k: &Kernel2D, r: usize, c: usize, pad: Padding) -> f64 {
        let h = k.size / 2;
        let mut acc = 0.0;
        if r >= h && c >= h && r + h < self.rows && c + h < self.cols {
            for i in 0..k.size {
                let base = (r + i - h) * self.cols + c - h;
                for j in 0..k.size {
                    let t = k.taps[i * k.size + j];
                    if t != 0.0 {
                        acc += t * self.data[base + j];
                    }
                }
            }
            return acc;
        }
        let h = h as isize;
        for i in 0..k.size {
            let rr = r as isize + i as isize - h;
            for j in 0..k.size {
                let t = k.taps[i * k.size + j];
                if t != 0.0 {
                    acc += t * self.sample(rr, c as isize + j as isize - h, pad);
                }
            }
        }
        acc
    }
}

pub(crate) fn same_shape(a: &Plane, b: &Plane) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(vec![a.rows, a.cols], vec![b.rows, b.cols]));
    }
    Ok(())
}

/// One or three channels of equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    planes: Vec<Plane>,
}

impl Image {
    pub fn new(planes: Vec<Plane>) -> Result<Self> {
        if planes.len() != 1 && planes.len() != 3 {
            return invalid(format!("image needs 1 or 3 channels, got {}", planes.len()));
        }
        let (rows, cols) = planes[0].shape();
        if rows < 2 || cols < 2 {
            return invalid(format!("image must be at least 2x2, got {rows}x{cols}"));
        }
        for p in &planes[1..] {
            same_shape(&planes[0], p)?;
        }
        for p in &planes {
            if p.data.iter().any(|v| !v.is_finite()) {
                return invalid("non-finite pixel value");
            }
        }
        Ok(Image { planes })
    }

    pub fn gray(p: Plane) -> Result<Self> {
        Image::new(vec![p])
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn rows(&self) -> usize {
        self.planes[0].rows
    }

    pub fn cols(&self) -> usize {
        self.planes[0].cols
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn plane(&self, c: usize) -> &Plane {
        &self.planes[c]
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }

    pub fn map_planes(&self, f: impl Fn(&Plane) -> Plane) -> Image {
        Image { planes: self.planes.iter().map(f).collect() }
    }

    pub fn try_map_planes(&self, f: impl Fn(usize, &Plane) -> Result<Plane>) -> Result<Image> {
        let planes = self.planes.iter().enumerate().map(|(i, p)| f(i, p)).collect::<Result<_>>()?;
        Ok(Image { planes })
    }

    /// Rounds and clamps to 8-bit range.
    pub fn quantized(&self) -> Image {
        self.map_planes(|p| p.map(|v| v.round().clamp(0.0, 255.0)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    taps: Vec<f64>,
}

impl Kernel1D {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        check_mask_size(taps.len())?;
        Ok(Kernel1D { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Centered correlation with padding; output has the input length.
    pub fn correlate(&self, s: &[f64], pad: Padding) -> Vec<f64> {
        let h = (self.taps.len() / 2) as isize;
        (0..s.len() as isize)
            .map(|n| self.taps.iter().enumerate().map(|(j, &t)| t * pad.sample(s, n + j as isize - h)).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        check_mask_size(size)?;
        if taps.len() != size * size {
            return Err(Error::ShapeMismatch(vec![size, size], vec![taps.len()]));
        }
        Ok(Kernel2D { size, taps })
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        check_mask_size(size)?;
        let taps = (0..size * size).map(|k| f(k / size, k % size)).collect();
        Ok(Kernel2D { size, taps })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.taps[r * self.size + c]
    }

    pub fn transpose(&self) -> Kernel2D {
        let n = self.size;
        Kernel2D { size: n, taps: (0..n * n).map(|k| self.get(k % n, k / n)).collect() }
    }
}

pub(crate) fn check_mask_size(m: usize) -> Result<()> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::BadMaskSize(m));
    }
    Ok(())
}

pub fn pad_signal(s: &Signal, l: usize, mode: Padding) -> Signal {
    s.with_samples(pad_slice(s.samples(), l, mode))
}

pub fn pad_slice(s: &[f64], l: usize, mode: Padding) -> Vec<f64> {
    let l = l as isize;
    (-l..s.len() as isize + l).map(|i| mode.sample(s, i)).collect()
}

pub fn pad_image(img: &Image, l: usize) -> Image {
    img.map_planes(|p| pad_plane(p, l, Padding::Zero))
}

pub fn pad_plane(p: &Plane, l: usize, mode: Padding) -> Plane {
    let li = l as isize;
    Plane::from_fn(p.rows + 2 * l, p.cols + 2 * l, |r, c| p.sample(r as isize - li, c as isize - li, mode))
}

/// Result of an affine min-max map; `value = scale * input + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub values: Vec<f64>,
    pub degenerate: bool,
    pub scale: f64,
    pub offset: f64,
}

pub const SIGNAL_RANGE: (f64, f64) = (1.0, 2.0);
pub const IMAGE_RANGE: (f64, f64) = (1.0, 256.0);

pub fn equalize(x: &[f64], lo: f64, hi: f64) -> Result<Equalized> {
    if !(hi > lo) {
        return invalid(format!("equalize range needs hi > lo, got [{lo}, {hi}]"));
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if x.is_empty() || max <= min {
        return Ok(Equalized { values: vec![lo; x.len()], degenerate: true, scale: 0.0, offset: lo });
    }
    let scale = (hi - lo) / (max - min);
    let values = x.iter().map(|&v| (v - min) / (max - min) * (hi - lo) + lo).collect();
    Ok(Equalized { values, degenerate: false, scale, offset: lo - min * scale })
}

pub fn equalize_signal(s: &Signal, lo: f64, hi: f64) -> Result<(Signal, bool)> {
    let e = equalize(s.samples(), lo, hi)?;
    Ok((s.with_samples(e.values), e.degenerate))
}

pub fn equalize_plane(p: &Plane, lo: f64, hi: f64) -> Result<(Plane, bool)> {
    let e = equalize(p.data(), lo, hi)?;
    Ok((Plane { rows: p.rows, cols: p.cols, data: e.values }, e.degenerate))
}

pub fn hadamard_quotient(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(vec![a.len()], vec![b.len()]));
    }
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (&x, &y))| if y == 0.0 { Err(Error::DivisionByZero(i)) } else { Ok(x / y) })
        .collect()
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
