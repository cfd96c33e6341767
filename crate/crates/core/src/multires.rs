//! Haar and coslet multiresolution transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::base::Plane;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Haar,
    Coslet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subbands1D {
    pub l: Vec<f64>,
    pub h: Vec<f64>,
    pub level: usize,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subbands2D {
    pub ll: Plane,
    pub lh: Plane,
    pub hl: Plane,
    pub hh: Plane,
    pub level: usize,
    pub basis: Basis,
}

/// The three detail planes of one 2D level.
#[derive(Debug, Clone, PartialEq)]
pub struct Details2D {
    pub lh: Plane,
    pub hl: Plane,
    pub hh: Plane,
}

/// Recursive decomposition; `details[0]` is level 1 (finest).
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid1D {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid2D {
    pub approx: Plane,
    pub details: Vec<Details2D>,
    pub basis: Basis,
}

fn check_even(n: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    Ok(())
}

fn check_even_2d(p: &Plane) -> Result<()> {
    if !p.rows().is_multiple_of(2) || !p.cols().is_multiple_of(2) {
        return Err(Error::Indivisible { rows: p.rows(), cols: p.cols(), by: 2 });
    }
    Ok(())
}

pub fn haar1d_forward(s: &[f64]) -> Result<Subbands1D> {
    check_even(s.len())?;
    let (l, h) = s.chunks_exact(2).map(|p| ((p[0] + p[1]) / 2.0, (p[1] - p[0]) / 2.0)).unzip();
    Ok(Subbands1D { l, h, level: 1, basis: Basis::Haar })
}

pub fn haar1d_inverse(l: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    if l.len() != h.len() {
        return Err(Error::ShapeMismatch(vec![l.len()], vec![h.len()]));
    }
    Ok(l.iter().zip(h).flat_map(|(&a, &d)| [a - d, a + d]).collect())
}

pub fn haar2d_forward(p: &Plane) -> Result<Subbands2D> {
    check_even_2d(p)?;
    let (r2, c2) = (p.rows() / 2, p.cols() / 2);
    let mut ll = Plane::zeros(r2, c2);
    let mut lh = Plane::zeros(r2, c2);
    let mut hl = Plane::zeros(r2, c2);
    let mut hh = Plane::zeros(r2, c2);
    for r in 0..r2 {
        for c in 0..c2 {
            let a = p.get(2 * r, 2 * c);
            let b = p.get(2 * r, 2 * c + 1);
            let cc = p.get(2 * r + 1, 2 * c);
            let d = p.get(2 * r + 1, 2 * c + 1);
            ll.set(r, c, (a + b + cc + d) / 4.0);
            lh.set(r, c, (-a + b - cc + d) / 4.0);
            hl.set(r, c, (-a - b + cc + d) / 4.0);
            hh.set(r, c, (a - b - cc + d) / 4.0);
        }
    }
    Ok(Subbands2D { ll, lh, hl, hh, level: 1, basis: Basis::Haar })
}

pub fn haar2d_inverse(ll: &Plane, d: &Details2D) -> Result<Plane> {
    check_same(ll, d)?;
    let (r2, c2) = ll.shape();
    let mut out = Plane::zeros(2 * r2, 2 * c2);
    for r in 0..r2 {
        for c in 0..c2 {
            let (s, x, y, z) = (ll.get(r, c), d.lh.get(r, c), d.hl.get(r, c), d.hh.get(r, c));
            out.set(2 * r, 2 * c, s - x - y + z);
            out.set(2 * r, 2 * c + 1, s + x - y - z);
            out.set(2 * r + 1, 2 * c, s - x + y - z);
            out.set(2 * r + 1, 2 * c + 1, s + x + y + z);
        }
    }
    Ok(out)
}

fn check_same(ll: &Plane, d: &Details2D) -> Result<()> {
    for p in [&d.lh, &d.hl, &d.hh] {
        crate::base::same_shape(ll, p)?;
    }
    Ok(())
}

/// Orthonormal DCT-II / DCT-III of a fixed length, computed through one complex FFT.
#[derive(Clone)]
pub struct Dct {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
}

impl std::fmt::Debug for Dct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dct").field("n", &self.n).finish()
    }
}

impl Dct {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self::with_planner(n, &mut planner)
    }

    fn with_planner(n: usize, planner: &mut FftPlanner<f64>) -> Self {
        let twiddle = (0..n)
            .map(|k| Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2.0 * n as f64)))
            .collect();
        Dct { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), twiddle }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn weights(&self) -> (f64, f64) {
        let n = self.n as f64;
        ((1.0 / n).sqrt(), (2.0 / n).sqrt())
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(x.len(), n, "dct length");
        if n == 0 {
            return Vec::new();
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n.div_ceil(2) {
            v[k].re = x[2 * k];
        }
        for k in 0..n / 2 {
            v[n - 1 - k].re = x[2 * k + 1];
        }
        self.fwd.process(&mut v);
        let (w0, w) = self.weights();
        (0..n).map(|k| (v[k] * self.twiddle[k]).re * if k == 0 { w0 } else { w }).collect()
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(y.len(), n, "dct length");
        if n == 0 {
            return Vec::new();
        }
        let (w0, w) = self.weights();
        let x = |k: usize| if k == 0 { y[0] / w0 } else if k < n { y[k] / w } else { 0.0 };
        let mut v: Vec<Complex64> =
            (0..n).map(|k| self.twiddle[k].conj() * Complex64::new(x(k), -x(n - k)) ).collect();
        v[0] = Complex64::new(x(0), 0.0);
        self.inv.process(&mut v);
        let scale = 1.0 / n as f64;
        let mut out = vec![0.0; n];
        for k in 0..n.div_ceil(2) {
            out[2 * k] = v[k].re * scale;
        }
        for k in 0..n / 2 {
            out[2 * k + 1] = v[n - 1 - k].re * scale;
        }
        out
    }
}

pub fn dct1d(x: &[f64]) -> Vec<f64> {
    Dct::new(x.len()).forward(x)
}

pub fn idct1d(y: &[f64]) -> Vec<f64> {
    Dct::new(y.len()).inverse(y)
}

fn separable(p: &Plane, inverse: bool) -> Plane {
    let (rows, cols) = p.shape();
    let mut planner = FftPlanner::new();
    let row_dct = Dct::with_planner(cols, &mut planner);
    let col_dct = Dct::with_planner(rows, &mut planner);
    let apply = |d: &Dct, v: &[f64]| if inverse { d.inverse(v) } else { d.forward(v) };
    let mut tmp = vec![0.0; rows * cols];
    tmp.par_chunks_mut(cols.max(1)).enumerate().for_each(|(r, out)| {
        out.copy_from_slice(&apply(&row_dct, p.row(r)));
    });
    let t = Plane::new(rows, cols, tmp).expect("shape").transpose();
    let mut tcols = vec![0.0; rows * cols];
    tcols.par_chunks_mut(rows.max(1)).enumerate().for_each(|(c, out)| {
        out.copy_from_slice(&apply(&col_dct, t.row(c)));
    });
    Plane::new(cols, rows, tcols).expect("shape").transpose()
}

pub fn dct2d(p: &Plane) -> Plane {
    separable(p, false)
}

pub fn idct2d(c: &Plane) -> Plane {
    separable(c, true)
}

pub fn coslet1d_forward(s: &[f64]) -> Result<Subbands1D> {
    check_even(s.len())?;
    let half = s.len() / 2;
    let j = dct1d(s);
    let d = Dct::new(half);
    Ok(Subbands1D { l: d.inverse(&j[..half]), h: d.inverse(&j[half..]), level: 1, basis: Basis::Coslet })
}

pub fn coslet1d_inverse(l: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    if l.len() != h.len() {
        return Err(Error::ShapeMismatch(vec![l.len()], vec![h.len()]));
    }
    let d = Dct::new(l.len());
    let mut j = d.forward(l);
    j.extend(d.forward(h));
    Ok(idct1d(&j))
}

pub fn coslet2d_forward(p: &Plane) -> Result<Subbands2D> {
    check_even_2d(p)?;
    let (r2, c2) = (p.rows() / 2, p.cols() / 2);
    let j = dct2d(p);
    let quad = |r0: usize, c0: usize| idct2d(&j.crop(r0, c0, r2, c2));
    Ok(Subbands2D {
        ll: quad(0, 0),
        lh: quad(0, c2),
        hl: quad(r2, 0),
        hh: quad(r2, c2),
        level: 1,
        basis: Basis::Coslet,
    })
}

pub fn coslet2d_inverse(ll: &Plane, d: &Details2D) -> Result<Plane> {
    check_same(ll, d)?;
    let (r2, c2) = ll.shape();
    let q = [dct2d(ll), dct2d(&d.lh), dct2d(&d.hl), dct2d(&d.hh)];
    let j = Plane::from_fn(2 * r2, 2 * c2, |r, c| {
        let k = (r >= r2) as usize * 2 + (c >= c2) as usize;
        q[k].get(r % r2, c % c2)
    });
    Ok(idct2d(&j))
}

pub fn split1d(s: &[f64], basis: Basis) -> Result<Subbands1D> {
    match basis {
        Basis::Haar => haar1d_forward(s),
        Basis::Coslet => coslet1d_forward(s),
    }
}

pub fn merge1d(l: &[f64], h: &[f64], basis: Basis) -> Result<Vec<f64>> {
    match basis {
        Basis::Haar => haar1d_inverse(l, h),
        Basis::Coslet => coslet1d_inverse(l, h),
    }
}

pub fn split2d(p: &Plane, basis: Basis) -> Result<Subbands2D> {
    match basis {
        Basis::Haar => haar2d_forward(p),
        Basis::Coslet => coslet2d_forward(p),
    }
}

pub fn merge2d(ll: &Plane, d: &Details2D, basis: Basis) -> Result<Plane> {
    match basis {
        Basis::Haar => haar2d_inverse(ll, d),
        Basis::Coslet => coslet2d_inverse(ll, d),
    }
}

impl Subbands2D {
    pub fn details(&self) -> Details2D {
        Details2D { lh: self.lh.clone(), hl: self.hl.clone(), hh: self.hh.clone() }
    }
}

pub fn split_levels_1d(s: &[f64], basis: Basis, levels: usize) -> Result<Pyramid1D> {
    if levels == 0 || !s.len().is_multiple_of(1 << levels) {
        return Err(Error::Indivisible { rows: s.len(), cols: 1, by: 1 << levels });
    }
    let mut approx = s.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let sb = split1d(&approx, basis)?;
        approx = sb.l;
        details.push(sb.h);
    }
    Ok(Pyramid1D { approx, details, basis })
}

pub fn merge_levels_1d(p: &Pyramid1D) -> Result<Vec<f64>> {
    let mut x = p.approx.clone();
    for h in p.details.iter().rev() {
        x = merge1d(&x, h, p.basis)?;
    }
    Ok(x)
}

pub fn split_levels_2d(p: &Plane, basis: Basis, levels: usize) -> Result<Pyramid2D> {
    let by = 1usize << levels;
    if levels == 0 || !p.rows().is_multiple_of(by) || !p.cols().is_multiple_of(by) {
        return Err(Error::Indivisible { rows: p.rows(), cols: p.cols(), by });
    }
    let mut approx = p.clone();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let sb = split2d(&approx, basis)?;
        details.push(Details2D { lh: sb.lh, hl: sb.hl, hh: sb.hh });
        approx = sb.ll;
    }
    Ok(Pyramid2D { approx, details, basis })
}

pub fn merge_levels_2d(p: &Pyramid2D) -> Result<Plane> {
    let mut x = p.approx.clone();
    for d in p.details.iter().rev() {
        x = merge2d(&x, d, p.basis)?;
    }
    Ok(x)
}

impl Pyramid2D {
    /// Tiles the pyramid into one plane: approximation top-left, LH right, HL below, HH diagonal.
    pub fn mosaic(&self) -> Plane {
        let mut out = self.approx.clone();
        for d in self.details.iter().rev() {
            let (r2, c2) = out.shape();
            let prev = out;
            out = Plane::from_fn(2 * r2, 2 * c2, |r, c| match (r >= r2, c >= c2) {
                (false, false) => prev.get(r, c),
                (false, true) => d.lh.get(r, c - c2),
                (true, false) => d.hl.get(r - r2, c),
                (true, true) => d.hh.get(r - r2, c - c2),
            });
        }
        out
    }
}

impl Pyramid1D {
    /// Concatenates `[approx, H^n, ..., H^1]`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.approx.clone();
        for h in self.details.iter().rev() {
            out.extend_from_slice(h);
        }
        out
    }
}
