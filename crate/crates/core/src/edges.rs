//! Gradient, Canny and FIT edge detectors.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::base::{Image, Kernel2D, Padding, Plane};
use crate::error::{invalid, Result};
use crate::fit2d::{fit_plane_overlap, ImageVariant, MaskKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrayMode {
    #[default]
    Luminance,
    Max,
}

pub fn to_gray(img: &Image, mode: GrayMode) -> Plane {
    if img.channels() == 1 {
        return img.plane(0).clone();
    }
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    Plane::from_fn(img.rows(), img.cols(), |i, j| {
        let (x, y, z) = (r.get(i, j), g.get(i, j), b.get(i, j));
        match mode {
            GrayMode::Luminance => 0.299 * x + 0.587 * y + 0.114 * z,
            GrayMode::Max => x.max(y).max(z),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientOp {
    Roberts,
    Sobel,
    Prewitt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagnitudeMode {
    #[default]
    L2,
    L1,
    Max,
}

impl MagnitudeMode {
    pub fn combine(self, gx: f64, gy: f64) -> f64 {
        match self {
            MagnitudeMode::L2 => gx.hypot(gy),
            MagnitudeMode::L1 => gx.abs() + gy.abs(),
            MagnitudeMode::Max => gx.abs().max(gy.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub magnitude: Plane,
    pub orientation: Option<Plane>,
    /// 0/1 plane.
    pub binary: Option<Plane>,
}

impl EdgeMap {
    /// Marks pixels at or above `fraction * max(magnitude)`.
    pub fn thresholded(mut self, fraction: f64) -> Self {
        let t = fraction * self.magnitude.max();
        self.binary = Some(self.magnitude.map(|v| if v > 0.0 && v >= t { 1.0 } else { 0.0 }));
        self
    }

    pub fn edge_count(&self) -> usize {
        self.binary.as_ref().map_or(0, |b| b.data().iter().filter(|&&v| v != 0.0).count())
    }
}

pub fn sobel_kernels() -> (Kernel2D, Kernel2D) {
    kernels(2.0)
}

pub fn prewitt_kernels() -> (Kernel2D, Kernel2D) {
    kernels(1.0)
}

fn kernels(c: f64) -> (Kernel2D, Kernel2D) {
    let sx = Kernel2D::new(3, vec![-1.0, 0.0, 1.0, -c, 0.0, c, -1.0, 0.0, 1.0]).expect("3x3");
    let sy = Kernel2D::new(3, vec![1.0, c, 1.0, 0.0, 0.0, 0.0, -1.0, -c, -1.0]).expect("3x3");
    (sx, sy)
}

fn roberts(p: &Plane) -> (Plane, Plane) {
    let f = |i: usize, j: usize| p.sample(i as isize, j as isize, Padding::Replicate);
    let gx = Plane::from_fn(p.rows(), p.cols(), |i, j| f(i, j) - f(i + 1, j + 1));
    let gy = Plane::from_fn(p.rows(), p.cols(), |i, j| f(i + 1, j) - f(i, j + 1));
    (gx, gy)
}

pub fn gradients(p: &Plane, op: GradientOp) -> (Plane, Plane) {
    match op {
        GradientOp::Roberts => roberts(p),
        GradientOp::Sobel | GradientOp::Prewitt => {
            let (sx, sy) = if op == GradientOp::Sobel { sobel_kernels() } else { prewitt_kernels() };
            (p.correlate(&sx, Padding::Replicate), p.correlate(&sy, Padding::Replicate))
        }
    }
}

pub fn gradient_edges_plane(p: &Plane, op: GradientOp, mode: MagnitudeMode) -> EdgeMap {
    let (gx, gy) = gradients(p, op);
    let magnitude = gx.zip_map(&gy, |x, y| mode.combine(x, y)).expect("same shape");
    let orientation = gy.zip_map(&gx, f64::atan2).expect("same shape");
    EdgeMap { magnitude, orientation: Some(orientation), binary: None }
}

pub fn gradient_edges(img: &Image, op: GradientOp, mode: MagnitudeMode, gray: GrayMode) -> EdgeMap {
    gradient_edges_plane(&to_gray(img, gray), op, mode)
}

pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let mut taps: Vec<f64> = (-r..=r).map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

pub fn gaussian_smooth(p: &Plane, sigma: f64) -> Result<Plane> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    let taps = gaussian_taps(sigma);
    let r = (taps.len() / 2) as isize;
    let pass = |src: &Plane, along_rows: bool| -> Plane {
        let (rows, cols) = src.shape();
        let data: Vec<f64> = (0..rows)
            .into_par_iter()
            .flat_map_iter(|i| {
                let taps = &taps;
                (0..cols).map(move |j| {
                    taps.iter()
                        .enumerate()
                        .map(|(k, t)| {
                            let o = k as isize - r;
                            let (ri, cj) = if along_rows { (i as isize, j as isize + o) } else { (i as isize + o, j as isize) };
                            t * src.sample(ri, cj, Padding::Replicate)
                        })
                        .sum::<f64>()
                })
            })
            .collect();
        Plane::new(rows, cols, data).expect("same shape")
    };
    Ok(pass(&pass(p, true), false))
}

/// Canny detector with absolute hysteresis thresholds on the gradient magnitude.
pub fn canny_plane(p: &Plane, sigma: f64, t_low: f64, t_high: f64) -> Result<EdgeMap> {
    if !(t_low >= 0.0 && t_low < t_high) {
        return invalid(format!("need 0 <= t_low < t_high, got {t_low}, {t_high}"));
    }
    let s = gaussian_smooth(p, sigma)?;
    let (rows, cols) = s.shape();
    let f = |i: usize, j: usize| s.sample(i as isize, j as isize, Padding::Replicate);
    let pg = Plane::from_fn(rows, cols, |i, j| (f(i, j + 1) - f(i, j) + f(i + 1, j + 1) - f(i + 1, j)) / 2.0);
    let qg = Plane::from_fn(rows, cols, |i, j| (f(i, j) - f(i + 1, j) + f(i, j + 1) - f(i + 1, j + 1)) / 2.0);
    let mag = pg.zip_map(&qg, f64::hypot)?;
    let theta = qg.zip_map(&pg, f64::atan2)?;

    let m = |i: isize, j: isize| mag.sample(i, j, Padding::Zero);
    let nms = Plane::from_fn(rows, cols, |i, j| {
        let v = mag.get(i, j);
        if v == 0.0 {
            return 0.0;
        }
        let mut a = theta.get(i, j).to_degrees();
        if a < 0.0 {
            a += 180.0;
        }
        // Q points up, so a positive angle moves to the previous row.
        let (di, dj) = if !(22.5..157.5).contains(&a) {
            (0, 1)
        } else if a < 67.5 {
            (-1, 1)
        } else if a < 112.5 {
            (-1, 0)
        } else {
            (-1, -1)
        };
        let (i, j) = (i as isize, j as isize);
        if v >= m(i + di, j + dj) && v > m(i - di, j - dj) {
            v
        } else {
            0.0
        }
    });

    let mut out = vec![0u8; rows * cols];
    let mut queue = VecDeque::new();
    for (k, &v) in nms.data().iter().enumerate() {
        if v >= t_high {
            out[k] = 1;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        let (i, j) = ((k / cols) as isize, (k % cols) as isize);
        for di in -1..=1 {
            for dj in -1..=1 {
                let (ni, nj) = (i + di, j + dj);
                if ni < 0 || nj < 0 || ni >= rows as isize || nj >= cols as isize {
                    continue;
                }
                let n = ni as usize * cols + nj as usize;
                if out[n] == 0 && nms.data()[n] >= t_low {
                    out[n] = 1;
                    queue.push_back(n);
                }
            }
        }
    }
    let binary = Plane::new(rows, cols, out.into_iter().map(f64::from).collect())?;
    Ok(EdgeMap { magnitude: mag, orientation: Some(theta.map(|t| t.rem_euclid(PI))), binary: Some(binary) })
}

pub fn canny(img: &Image, sigma: f64, t_low: f64, t_high: f64, gray: GrayMode) -> Result<EdgeMap> {
    canny_plane(&to_gray(img, gray), sigma, t_low, t_high)
}

pub fn fit_edges_plane(p: &Plane, kind: MaskKind, m: usize, fraction: Option<f64>) -> Result<EdgeMap> {
    let magnitude = fit_plane_overlap(p, kind, m, ImageVariant::Equalized)?;
    let e = EdgeMap { magnitude, orientation: None, binary: None };
    Ok(match fraction {
        Some(f) => e.thresholded(f),
        None => e,
    })
}

pub fn fit_edges(img: &Image, kind: MaskKind, m: usize, fraction: Option<f64>, gray: GrayMode) -> Result<EdgeMap> {
    fit_edges_plane(&to_gray(img, gray), kind, m, fraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(rows: usize, cols: usize, at: usize, h: f64) -> Plane {
        Plane::from_fn(rows, cols, |_, c| if c >= at { 10.0 + h } else { 10.0 })
    }

    fn argmax_col(p: &Plane, r: usize) -> usize {
        let row = p.row(r);
        (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b })
    }

    #[test]
    fn kernel_taps() {
        let (sx, sy) = prewitt_kernels();
        assert_eq!(sx.taps(), &[-1.0, 0.0, 1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 1.0]);
        assert_eq!(sy.taps(), &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0]);
        let (sx, _) = sobel_kernels();
        assert_eq!(sx.taps(), &[-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_gives_nothing() {
        let p = Plane::filled(12, 12, 42.0);
        for op in [GradientOp::Roberts, GradientOp::Sobel, GradientOp::Prewitt] {
            assert!(gradient_edges_plane(&p, op, MagnitudeMode::L2).magnitude.data().iter().all(|&v| v == 0.0));
        }
        assert_eq!(canny_plane(&p, 1.0, 1.0, 2.0).unwrap().edge_count(), 0);
        let f = fit_edges_plane(&p, MaskKind::Segmental, 3, None).unwrap();
        assert!(f.magnitude.crop(1, 1, 10, 10).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sobel_step_peak() {
        let h = 7.0;
        let e = gradient_edges_plane(&step(9, 12, 6, h), GradientOp::Sobel, MagnitudeMode::L2);
        let r = e.magnitude.row(4);
        assert_eq!(r[5], 4.0 * h);
        assert_eq!(r[6], 4.0 * h);
        assert_eq!(r[4], 0.0);
        assert_eq!(r[7], 0.0);
        let pw = gradient_edges_plane(&step(9, 12, 6, h), GradientOp::Prewitt, MagnitudeMode::L1);
        assert_eq!(pw.magnitude.row(4)[5], 3.0 * h);
    }

    #[test]
    fn magnitude_modes() {
        assert_eq!(MagnitudeMode::L2.combine(3.0, -4.0), 5.0);
        assert_eq!(MagnitudeMode::L1.combine(3.0, -4.0), 7.0);
        assert_eq!(MagnitudeMode::Max.combine(3.0, -4.0), 4.0);
    }

    #[test]
    fn all_detectors_localize_step() {
        let p = step(24, 24, 12, 50.0);
        for op in [GradientOp::Roberts, GradientOp::Sobel, GradientOp::Prewitt] {
            let c = argmax_col(&gradient_edges_plane(&p, op, MagnitudeMode::L2).magnitude, 12);
            assert!((c as isize - 12).abs() <= 1, "{op:?} {c}");
        }
        let c = canny_plane(&p, 1.0, 5.0, 10.0).unwrap();
        let b = c.binary.unwrap();
        for r in 4..20 {
            let on: Vec<usize> = (0..24).filter(|&j| b.get(r, j) == 1.0).collect();
            assert_eq!(on.len(), 1, "row {r}: {on:?}");
            assert!((on[0] as isize - 12).abs() <= 1);
        }
        let f = fit_edges_plane(&p, MaskKind::Segmental, 3, Some(0.5)).unwrap();
        let c = argmax_col(&f.magnitude, 12);
        assert!((c as isize - 12).abs() <= 1, "fit {c}");
    }

    #[test]
    fn fit_support_grows_with_mask() {
        let p = step(32, 32, 16, 50.0);
        let width = |m| {
            let e = fit_edges_plane(&p, MaskKind::Segmental, m, None).unwrap();
            e.magnitude.row(16)[4..28].iter().filter(|&&v| v > 1e-12).count()
        };
        assert!(width(7) > width(3));
    }

    #[test]
    fn canny_rejects_bad_params() {
        let p = step(8, 8, 4, 1.0);
        assert!(canny_plane(&p, 1.0, 2.0, 2.0).is_err());
        assert!(canny_plane(&p, 0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn gray_modes() {
        let img = Image::new(vec![Plane::filled(2, 2, 100.0), Plane::filled(2, 2, 50.0), Plane::filled(2, 2, 10.0)]).unwrap();
        assert!((to_gray(&img, GrayMode::Luminance).get(0, 0) - (29.9 + 29.35 + 1.14)).abs() < 1e-12);
        assert_eq!(to_gray(&img, GrayMode::Max).get(1, 1), 100.0);
    }

    fn arb_plane() -> impl Strategy<Value = Plane> {
        (3usize..10, 3usize..10).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0f64..255.0, r * c).prop_map(move |d| Plane::new(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn rotation_equivariant(p in arb_plane()) {
            for op in [GradientOp::Sobel, GradientOp::Prewitt] {
                let a = gradient_edges_plane(&p.rot90(), op, MagnitudeMode::L2).magnitude;
                let b = gradient_edges_plane(&p, op, MagnitudeMode::L2).magnitude.rot90();
                for (x, y) in a.data().iter().zip(b.data()) {
                    prop_assert!((x - y).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn roberts_rotation_up_to_anchor(p in arb_plane()) {
            let a = gradient_edges_plane(&p.rot90(), GradientOp::Roberts, MagnitudeMode::L2).magnitude;
            let b = gradient_edges_plane(&p, GradientOp::Roberts, MagnitudeMode::L2).magnitude.rot90();
            // rot90 is counter-clockwise, so the 2x2 window anchor moves up one row.
            for i in 0..a.rows() - 1 {
                for j in 0..a.cols() - 1 {
                    prop_assert!((a.get(i, j) - b.get(i + 1, j)).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn canny_subset_of_low_and_monotone(p in arb_plane(), lo in 0f64..20.0, d in 1f64..30.0, extra in 0f64..30.0) {
            let e = canny_plane(&p, 1.0, lo, lo + d).unwrap();
            let b = e.binary.as_ref().unwrap();
            for (v, m) in b.data().iter().zip(e.magnitude.data()) {
                prop_assert!(*v == 0.0 || *v == 1.0);
                prop_assert!(*v == 0.0 || *m >= lo);
            }
            let tighter = canny_plane(&p, 1.0, lo, lo + d + extra).unwrap();
            for (x, y) in tighter.binary.unwrap().data().iter().zip(b.data()) {
                prop_assert!(*x <= *y);
            }
        }
    }
}
