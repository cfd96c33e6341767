//! Super-resolution codecs, deblurring masks and the genetic tuner for them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::base::{dot, equalize, Image, Kernel2D, Padding, Plane, IMAGE_RANGE, SIGNAL_RANGE};
use crate::error::{invalid, Error, Result};
use crate::fit1d::wavelet_mask;
use crate::fit2d::segmental_masks;
use crate::metrics::mse;
use crate::multires::{merge1d, merge2d, split1d, split2d, Basis, Details2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Version {
    /// Details predicted as one least-squares scalar times the approximation.
    V1,
    /// Details predicted from the next level down (rule of three).
    V2,
    /// Details synthesised as derivatives of the approximation.
    V3,
}

impl Version {
    pub fn id(self) -> u8 {
        match self {
            Version::V1 => 1,
            Version::V2 => 2,
            Version::V3 => 3,
        }
    }

    pub fn from_id(id: u8) -> Result<Version> {
        match id {
            1 => Ok(Version::V1),
            2 => Ok(Version::V2),
            3 => Ok(Version::V3),
            _ => invalid(format!("unknown codec version {id}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Media {
    Signal,
    Image,
}

/// Everything the decoder needs: the level-1 approximation and, for v1, the projection scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct SrPayload {
    pub basis: Basis,
    pub version: Version,
    pub media: Media,
    /// Original `(rows, cols)`; signals use `(len, 1)`.
    pub dims: (usize, usize),
    /// Per channel, row-major.
    pub ll: Vec<Vec<f64>>,
    /// v1 only: `[c_lh, c_hl, c_hh]` per channel for images, `[c_h]` for signals.
    pub scalars: Vec<f64>,
}

impl SrPayload {
    pub fn channels(&self) -> usize {
        self.ll.len()
    }

    pub fn ll_dims(&self) -> (usize, usize) {
        match self.media {
            Media::Signal => (self.dims.0 / 2, 1),
            Media::Image => (self.dims.0 / 2, self.dims.1 / 2),
        }
    }

    pub fn original_samples(&self) -> usize {
        self.dims.0 * self.dims.1 * self.channels()
    }

    pub fn payload_samples(&self) -> usize {
        self.ll.iter().map(Vec::len).sum()
    }

    /// Compression ratio counted in samples (scalars excluded).
    pub fn cr(&self) -> f64 {
        self.original_samples() as f64 / self.payload_samples() as f64
    }

    pub fn pss(&self) -> f64 {
        crate::metrics::pss(self.cr())
    }
}

/// `<h|l> / <l|l>` over flattened arrays.
pub fn projection_coeff(h: &[f64], l: &[f64]) -> Result<f64> {
    if h.len() != l.len() {
        return Err(Error::ShapeMismatch(vec![h.len()], vec![l.len()]));
    }
    let ll = dot(l, l);
    if ll == 0.0 {
        return invalid("projection onto a zero array");
    }
    Ok(dot(h, l) / ll)
}

fn projection_or_zero(h: &[f64], l: &[f64]) -> f64 {
    projection_coeff(h, l).unwrap_or(0.0)
}

/// Replicates each element into a 2x2 block.
pub fn res_upsample(a: &Plane) -> Plane {
    Plane::from_fn(2 * a.rows(), 2 * a.cols(), |r, c| a.get(r / 2, c / 2))
}

pub fn res_upsample_1d(a: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&v| [v, v]).collect()
}

fn check_version_dims(version: Version, dims: (usize, usize), media: Media) -> Result<()> {
    let by = if version == Version::V2 { 4 } else { 2 };
    let ok = match media {
        Media::Signal => dims.0.is_multiple_of(by),
        Media::Image => dims.0.is_multiple_of(by) && dims.1.is_multiple_of(by),
    };
    if !ok {
        return Err(Error::Indivisible { rows: dims.0, cols: dims.1, by });
    }
    Ok(())
}

pub fn sr_encode_signal(s: &[f64], basis: Basis, version: Version) -> Result<SrPayload> {
    check_version_dims(version, (s.len(), 1), Media::Signal)?;
    let sb = split1d(s, basis)?;
    let scalars = if version == Version::V1 { vec![projection_or_zero(&sb.h, &sb.l)] } else { Vec::new() };
    Ok(SrPayload { basis, version, media: Media::Signal, dims: (s.len(), 1), ll: vec![sb.l], scalars })
}

pub fn sr_encode_image(img: &Image, basis: Basis, version: Version) -> Result<SrPayload> {
    let dims = (img.rows(), img.cols());
    check_version_dims(version, dims, Media::Image)?;
    let mut ll = Vec::with_capacity(img.channels());
    let mut scalars = Vec::new();
    for p in img.planes() {
        let sb = split2d(p, basis)?;
        if version == Version::V1 {
            for d in [&sb.lh, &sb.hl, &sb.hh] {
                scalars.push(projection_or_zero(d.data(), sb.ll.data()));
            }
        }
        ll.push(sb.ll.into_data());
    }
    Ok(SrPayload { basis, version, media: Media::Image, dims, ll, scalars })
}

/// How version 2 turns level-2 subbands into level-1 details.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ro3 {
    /// Element-wise `(res(H2) / res(L2)) * L1`, evaluated on an equalized copy of L1.
    Elementwise,
    /// One scalar `<H2|L2>/<L2|L2>` times L1.
    ScalarProj,
    /// One scalar from the replicated level-2 subbands times L1.
    ResScalar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions {
    pub alt: Ro3,
    pub deblur: Option<DeblurMask>,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions { alt: Ro3::Elementwise, deblur: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Signal(Vec<f64>),
    Image(Image),
}

fn ratio(h: f64, l: f64) -> f64 {
    if l.abs() < 1e-12 {
        0.0
    } else {
        h / l
    }
}

fn ro3_signal(l1: &[f64], basis: Basis, alt: Ro3) -> Result<Vec<f64>> {
    match alt {
        Ro3::Elementwise => {
            let e = equalize(l1, SIGNAL_RANGE.0, SIGNAL_RANGE.1)?;
            if e.degenerate {
                return Ok(vec![0.0; l1.len()]);
            }
            let sb = split1d(&e.values, basis)?;
            let (h2, l2) = (res_upsample_1d(&sb.h), res_upsample_1d(&sb.l));
            Ok((0..l1.len()).map(|k| ratio(h2[k], l2[k]) * e.values[k] / e.scale).collect())
        }
        Ro3::ScalarProj => {
            let sb = split1d(l1, basis)?;
            let c = projection_or_zero(&sb.h, &sb.l);
            Ok(l1.iter().map(|v| c * v).collect())
        }
        Ro3::ResScalar => {
            let sb = split1d(l1, basis)?;
            let c = projection_or_zero(&res_upsample_1d(&sb.h), &res_upsample_1d(&sb.l));
            Ok(l1.iter().map(|v| c * v).collect())
        }
    }
}

fn ro3_plane(l1: &Plane, basis: Basis, alt: Ro3) -> Result<Details2D> {
    let scaled = |c: f64| l1.map(|v| c * v);
    match alt {
        Ro3::Elementwise => {
            let e = equalize(l1.data(), IMAGE_RANGE.0, IMAGE_RANGE.1)?;
            if e.degenerate {
                let z = Plane::zeros(l1.rows(), l1.cols());
                return Ok(Details2D { lh: z.clone(), hl: z.clone(), hh: z });
            }
            let leq = Plane::new(l1.rows(), l1.cols(), e.values)?;
            let sb = split2d(&leq, basis)?;
            let l2 = res_upsample(&sb.ll);
            let est = |h2: &Plane| -> Result<Plane> {
                let r = res_upsample(h2).zip_map(&l2, ratio)?;
                r.zip_map(&leq, |q, v| q * v / e.scale)
            };
            Ok(Details2D { lh: est(&sb.lh)?, hl: est(&sb.hl)?, hh: est(&sb.hh)? })
        }
        Ro3::ScalarProj => {
            let sb = split2d(l1, basis)?;
            let c = |h: &Plane| projection_or_zero(h.data(), sb.ll.data());
            Ok(Details2D { lh: scaled(c(&sb.lh)), hl: scaled(c(&sb.hl)), hh: scaled(c(&sb.hh)) })
        }
        Ro3::ResScalar => {
            let sb = split2d(l1, basis)?;
            let l2 = res_upsample(&sb.ll);
            let c = |h: &Plane| projection_or_zero(res_upsample(h).data(), l2.data());
            Ok(Details2D { lh: scaled(c(&sb.lh)), hl: scaled(c(&sb.hl)), hh: scaled(c(&sb.hh)) })
        }
    }
}

/// Gain mapping a centered difference over approximation samples onto Haar detail scale.
pub const V3_GAIN: f64 = 0.25;

fn derivative_signal(l1: &[f64]) -> Vec<f64> {
    let m = wavelet_mask(3).expect("size 3");
    let k = crate::base::Kernel1D::new(m).expect("size 3");
    k.correlate(l1, Padding::Replicate).into_iter().map(|v| v * V3_GAIN).collect()
}

fn derivative_plane(l1: &Plane) -> Details2D {
    let (nh, nv) = segmental_masks(3).expect("size 3");
    let ih = l1.correlate(&nh, Padding::Replicate);
    let iv = l1.correlate(&nv, Padding::Replicate);
    let ihv = ih.correlate(&nv, Padding::Replicate);
    Details2D {
        lh: ih.map(|v| v * V3_GAIN),
        hl: iv.map(|v| v * V3_GAIN),
        hh: ihv.map(|v| v * V3_GAIN * V3_GAIN),
    }
}

pub fn sr_decode(p: &SrPayload, opts: &DecodeOptions) -> Result<Decoded> {
    let (r2, c2) = p.ll_dims();
    match p.media {
        Media::Signal => {
            let l1 = p.ll.first().ok_or_else(|| Error::InvalidParameter("payload has no channels".into()))?;
            if l1.len() != r2 {
                return Err(Error::ShapeMismatch(vec![r2], vec![l1.len()]));
            }
            let h = match p.version {
                Version::V1 => {
                    let c = *p.scalars.first().ok_or_else(|| Error::InvalidParameter("missing scalar".into()))?;
                    l1.iter().map(|v| c * v).collect()
                }
                Version::V2 => ro3_signal(l1, p.basis, opts.alt)?,
                Version::V3 => derivative_signal(l1),
            };
            let mut s = merge1d(l1, &h, p.basis)?;
            if let Some(m) = &opts.deblur {
                s = deblur_1d(&s, m)?;
            }
            Ok(Decoded::Signal(s))
        }
        Media::Image => {
            if p.version == Version::V1 && p.scalars.len() != 3 * p.channels() {
                return invalid(format!("expected {} scalars, found {}", 3 * p.channels(), p.scalars.len()));
            }
            let mut planes = Vec::with_capacity(p.channels());
            for (ch, data) in p.ll.iter().enumerate() {
                let l1 = Plane::new(r2, c2, data.clone())?;
                let d = match p.version {
                    Version::V1 => {
                        let c = &p.scalars[3 * ch..3 * ch + 3];
                        Details2D { lh: l1.map(|v| c[0] * v), hl: l1.map(|v| c[1] * v), hh: l1.map(|v| c[2] * v) }
                    }
                    Version::V2 => ro3_plane(&l1, p.basis, opts.alt)?,
                    Version::V3 => derivative_plane(&l1),
                };
                planes.push(merge2d(&l1, &d, p.basis)?);
            }
            let mut img = Image::new(planes)?;
            if let Some(m) = &opts.deblur {
                img = deblur_2d(&img, m)?;
            }
            Ok(Decoded::Image(img))
        }
    }
}

/// `N x N` kernel with `alpha` everywhere except `beta` at the centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeblurMask {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

pub const PRESET_ALPHA: f64 = -0.0129;
pub const PRESET_BETA: f64 = 1.63;

impl DeblurMask {
    /// Deblurring mask; requires `(N^2 - 1) alpha + beta = 1`.
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::checked(n, alpha, beta, 1.0)
    }

    /// Edge-detection mask; requires `(N^2 - 1) alpha + beta = 0`.
    pub fn edge(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::checked(n, alpha, beta, 0.0)
    }

    fn checked(n: usize, alpha: f64, beta: f64, target: f64) -> Result<Self> {
        crate::base::check_mask_size(n)?;
        let sum = (n * n - 1) as f64 * alpha + beta;
        if (sum - target).abs() > 1e-9 {
            return invalid(format!("(N^2-1)*alpha + beta = {sum}, expected {target}"));
        }
        Ok(DeblurMask { n, alpha, beta })
    }

    pub fn from_beta(n: usize, beta: f64) -> Result<Self> {
        crate::base::check_mask_size(n)?;
        Ok(DeblurMask { n, alpha: (1.0 - beta) / (n * n - 1) as f64, beta })
    }

    /// The built-in pair, resolved to the nearest consistent size with alpha renormalized.
    pub fn preset() -> Self {
        let n = size_for(PRESET_ALPHA, PRESET_BETA, 31);
        Self::from_beta(n, PRESET_BETA).expect("odd size")
    }

    pub fn constraint(&self) -> f64 {
        (self.n * self.n - 1) as f64 * self.alpha + self.beta
    }

    pub fn kernel(&self) -> Kernel2D {
        let h = self.n / 2;
        Kernel2D::from_fn(self.n, |r, c| if r == h && c == h { self.beta } else { self.alpha }).expect("odd size")
    }
}

/// Nearest odd `N` in `3..=max` with `N^2 - 1` closest to `(1 - beta) / alpha`.
pub fn size_for(alpha: f64, beta: f64, max: usize) -> usize {
    let max = if max.is_multiple_of(2) { max - 1 } else { max }.max(3);
    let target = if alpha == 0.0 { 0.0 } else { (1.0 - beta) / alpha };
    let mut best = 3;
    let mut n = 3;
    while n <= max {
        if ((n * n - 1) as f64 - target).abs() < ((best * best - 1) as f64 - target).abs() {
            best = n;
        }
        n += 2;
    }
    best
}

pub fn deblur_plane(p: &Plane, m: &DeblurMask) -> Result<Plane> {
    if m.n > p.rows() || m.n > p.cols() {
        return invalid(format!("mask {} larger than image {}x{}", m.n, p.rows(), p.cols()));
    }
    Ok(p.correlate(&m.kernel(), Padding::Replicate))
}

pub fn deblur_2d(img: &Image, m: &DeblurMask) -> Result<Image> {
    img.try_map_planes(|_, p| deblur_plane(p, m))
}

/// Stacks `N` scaled copies `(1 + 0.1 k) S`, `k = -(N-1)/2..=(N-1)/2`, correlates the mask and keeps the centre row.
pub fn deblur_1d(s: &[f64], m: &DeblurMask) -> Result<Vec<f64>> {
    let h = (m.n / 2) as isize;
    let k = m.kernel();
    Ok((0..s.len() as isize)
        .map(|t| {
            let mut acc = 0.0;
            for i in 0..m.n {
                let row_scale = 1.0 + 0.1 * (i as isize - h) as f64;
                for j in 0..m.n {
                    acc += k.get(i, j) * row_scale * Padding::Replicate.sample(s, t + j as isize - h);
                }
            }
            acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub survivors: usize,
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each gene's range.
    pub mutation_scale: f64,
    pub generations: usize,
    pub alpha_bounds: (f64, f64),
    pub beta_bounds: (f64, f64),
    pub max_size: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 64,
            survivors: 16,
            mutation_rate: 0.05,
            mutation_scale: 0.05,
            generations: 100,
            alpha_bounds: (-0.1, 0.0),
            beta_bounds: (1.0, 2.0),
            max_size: 15,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chromosome {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaResult {
    pub chromosome: Chromosome,
    pub mask: DeblurMask,
    pub mse: f64,
}

impl GaConfig {
    fn clamp(&self, c: Chromosome) -> Chromosome {
        let eps_a = (self.alpha_bounds.1 - self.alpha_bounds.0) * 1e-9;
        let eps_b = (self.beta_bounds.1 - self.beta_bounds.0) * 1e-9;
        Chromosome {
            alpha: c.alpha.clamp(self.alpha_bounds.0 + eps_a, self.alpha_bounds.1 - eps_a),
            beta: c.beta.clamp(self.beta_bounds.0 + eps_b, self.beta_bounds.1),
        }
    }

    pub fn random(&self, rng: &mut impl Rng) -> Chromosome {
        self.clamp(Chromosome {
            alpha: rng.gen_range(self.alpha_bounds.0..self.alpha_bounds.1),
            beta: rng.gen_range(self.beta_bounds.0..=self.beta_bounds.1),
        })
    }

    pub fn mask(&self, c: Chromosome) -> DeblurMask {
        DeblurMask::from_beta(size_for(c.alpha, c.beta, self.max_size), c.beta).expect("odd size")
    }
}

/// Mean MSE of `deblur(degraded)` against `original` over the pairs.
pub fn mask_fitness(pairs: &[(Plane, Plane)], m: &DeblurMask) -> Result<f64> {
    let mut total = 0.0;
    for (orig, deg) in pairs {
        total += mse(deblur_plane(deg, m)?.data(), orig.data())?;
    }
    Ok(total / pairs.len() as f64)
}

pub fn ga_tune_mask(pairs: &[(Plane, Plane)], cfg: &GaConfig) -> Result<GaResult> {
    if pairs.is_empty() {
        return invalid("genetic tuning needs at least one training pair");
    }
    if cfg.population < 2 || cfg.survivors < 1 || cfg.survivors > cfg.population {
        return invalid(format!("bad population {} / survivors {}", cfg.population, cfg.survivors));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop: Vec<Chromosome> = (0..cfg.population).map(|_| cfg.random(&mut rng)).collect();
    let sd_a = cfg.mutation_scale * (cfg.alpha_bounds.1 - cfg.alpha_bounds.0);
    let sd_b = cfg.mutation_scale * (cfg.beta_bounds.1 - cfg.beta_bounds.0);
    let na = Normal::new(0.0, sd_a).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let nb = Normal::new(0.0, sd_b).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let score = |pop: &[Chromosome]| -> Result<Vec<(f64, Chromosome)>> {
        let fit: Vec<Result<f64>> = pop.par_iter().map(|&c| mask_fitness(pairs, &cfg.mask(c))).collect();
        let mut scored = fit.into_iter().zip(pop.iter().copied()).map(|(f, c)| f.map(|f| (f, c))).collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(scored)
    };
    let mut scored = score(&pop)?;
    for _ in 0..cfg.generations {
        let elite: Vec<Chromosome> = scored[..cfg.survivors].iter().map(|s| s.1).collect();
        pop = elite.clone();
        while pop.len() < cfg.population {
            let a = elite[rng.gen_range(0..elite.len())];
            let b = elite[rng.gen_range(0..elite.len())];
            let mut child = if rng.gen_bool(0.5) {
                Chromosome { alpha: a.alpha, beta: b.beta }
            } else {
                Chromosome { alpha: b.alpha, beta: a.beta }
            };
            if rng.gen_bool(cfg.mutation_rate) {
                child.alpha += na.sample(&mut rng);
            }
            if rng.gen_bool(cfg.mutation_rate) {
                child.beta += nb.sample(&mut rng);
            }
            pop.push(cfg.clamp(child));
        }
        scored = score(&pop)?;
    }
    let (mse, best) = scored[0];
    Ok(GaResult { chromosome: best, mask: cfg.mask(best), mse })
}
