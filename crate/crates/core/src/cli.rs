//! Command-line front end. Every run prints one JSON record on stdout.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::base::{Image, Padding, Plane, Signal};
use crate::denoise::{self, DenoiseConfig, Method};
use crate::edges::{self, GradientOp, GrayMode, MagnitudeMode};
use crate::error::Error;
use crate::fit1d::{self, Form, NonOverlapVariant, OverlapVariant, PhaseMode};
use crate::fit2d::{self, ImageVariant, MaskKind, NonOverlapImageVariant};
use crate::io::{self, Precision};
use crate::metrics::{self, Binning};
use crate::multires::{self, Basis};
use crate::superres::{self, DecodeOptions, Decoded, DeblurMask, GaConfig, Ro3, Version};
use crate::synth::{self, SynthKind, SynthSpec};

#[derive(Debug, Parser)]
#[command(name = "fitkit", version, about = "FIT/QSA signal and image toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic signal as CSV.
    Synth(SynthArgs),
    /// Per-sample FIT of a CSV signal.
    Fit1d(Fit1dArgs),
    /// FIT image of a PGM/PPM.
    Fit2d(Fit2dArgs),
    /// Witness-bar positions of a CSV signal.
    Witness(WitnessArgs),
    /// Phase-plane trajectory of a CSV signal.
    Phase(PhaseArgs),
    /// Multi-level Haar decomposition.
    Haar(TransformArgs),
    /// Multi-level coslet decomposition.
    Coslet(TransformArgs),
    /// Wavelet-domain or direct denoising of a signal or image.
    Denoise(DenoiseArgs),
    /// Drop the level-1 details into a payload container.
    SrEncode(SrEncodeArgs),
    /// Rebuild a signal or image from a payload container.
    SrDecode(SrDecodeArgs),
    /// Apply a deblurring mask to an image.
    Deblur(DeblurArgs),
    /// Tune a deblurring mask on (original, degraded) image pairs.
    GaTune(GaTuneArgs),
    /// Gradient, Canny or FIT edge maps of an image.
    Edges(EdgesArgs),
    /// MAE, MSE and PSNR between two files.
    Metrics(PairArgs),
    /// Power spectral density of a CSV signal.
    Psd(PsdArgs),
    /// Entropies and mutual information between two files.
    Mi(PairArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    FourTone,
    TwoTone,
    Sine,
    EcgLike,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "ecg-like")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1024.0)]
    pub fs: f64,
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    /// Noise standard deviation as a percentage of the signal RMS.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tone frequency for `sine`.
    #[arg(long, default_value_t = 10.0)]
    pub freq: f64,
    /// Beats per minute for `ecg-like`.
    #[arg(long, default_value_t = 80.0)]
    pub bpm: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Fit1dVariantArg {
    Raw,
    Equalized,
    Averaged,
    MaskEq,
    MaskAv,
    DiffEq,
    DiffAv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    SqrtConj,
    Abs,
}

impl From<FormArg> for Form {
    fn from(f: FormArg) -> Form {
        match f {
            FormArg::SqrtConj => Form::SqrtConj,
            FormArg::Abs => Form::Abs,
        }
    }
}

#[derive(Debug, Args)]
pub struct Fit1dArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "equalized")]
    pub variant: Fit1dVariantArg,
    #[arg(long = "m-size", default_value_t = 3)]
    pub m_size: usize,
    /// Half-rate Haar form (raw, equalized or averaged only).
    #[arg(long)]
    pub nonoverlap: bool,
    #[arg(long, value_enum, default_value = "abs")]
    pub form: FormArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Fit2dVariantArg {
    Raw,
    Equalized,
    Averaged,
    Mask,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MaskArg {
    Segmental,
    Square,
}

impl From<MaskArg> for MaskKind {
    fn from(m: MaskArg) -> MaskKind {
        match m {
            MaskArg::Segmental => MaskKind::Segmental,
            MaskArg::Square => MaskKind::Square,
        }
    }
}

#[derive(Debug, Args)]
pub struct Fit2dArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "equalized")]
    pub variant: Fit2dVariantArg,
    #[arg(long, value_enum, default_value = "segmental")]
    pub mask: MaskArg,
    #[arg(long = "m-size", default_value_t = 3)]
    pub m_size: usize,
    /// Half-resolution horizontal/vertical/diagonal maps written as `{stem}_h`, `_v`, `_d`.
    #[arg(long)]
    pub nonoverlap: bool,
    #[arg(long, value_enum, default_value = "abs")]
    pub form: FormArg,
    /// `.pgm`/`.ppm` gets a min-max 8-bit rendering, `.f32` the raw values.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub levels: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PhaseArg {
    Overlap,
    Nonoverlap,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "overlap")]
    pub mode: PhaseArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// CSV of the flattened pyramid for signals; mosaic image (`.pgm`/`.f32`) for images.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum BasisArg {
    Haar,
    Coslet,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Basis {
        match b {
            BasisArg::Haar => Basis::Haar,
            BasisArg::Coslet => Basis::Coslet,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum MethodArg {
    /// Hard threshold: coefficients above lambda are kept unchanged.
    Keep,
    /// Soft threshold: surviving coefficients shrink towards zero by lambda.
    Shrink,
    Mf,
    Ds,
    /// Savitzky-Golay smoothing, signals only.
    Sg,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "haar")]
    pub basis: BasisArg,
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    #[arg(long, value_enum, default_value = "keep")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1)]
    pub passes: usize,
    /// Apply mf/ds to the data itself instead of the level-1 details.
    #[arg(long)]
    pub direct: bool,
    #[arg(long, default_value_t = 41)]
    pub frame: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Clean reference for PSNR reporting.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SrEncodeArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "coslet")]
    pub basis: BasisArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub version: u8,
    /// Store the approximation as f64 instead of f32.
    #[arg(long = "f64")]
    pub full: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AltArg {
    Elementwise,
    ScalarProj,
    ResScalar,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Centre weight; alpha follows from the unit-sum constraint.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Use the built-in (alpha, beta) = (-0.0129, 1.63) preset.
    #[arg(long)]
    pub preset: bool,
}

#[derive(Debug, Args)]
pub struct SrDecodeArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "elementwise")]
    pub alt: AltArg,
    #[arg(long)]
    pub deblur: bool,
    #[command(flatten)]
    pub mask: MaskArgs,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeblurArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub mask: MaskArgs,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GaTuneArgs {
    /// Original images.
    #[arg(long, required = true)]
    pub original: Vec<PathBuf>,
    /// Degraded counterparts, in the same order; omitted means a mean blur of `--blur` size.
    #[arg(long)]
    pub degraded: Vec<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub blur: usize,
    #[arg(long, default_value_t = 64)]
    pub population: usize,
    #[arg(long, default_value_t = 16)]
    pub survivors: usize,
    #[arg(long, default_value_t = 100)]
    pub generations: usize,
    #[arg(long = "mutation-rate", default_value_t = 0.05)]
    pub mutation_rate: f64,
    #[arg(long = "max-size", default_value_t = 15)]
    pub max_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum EdgeOpArg {
    Roberts,
    Sobel,
    Prewitt,
    Canny,
    Fit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MagnitudeArg {
    L2,
    L1,
    Max,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GrayArg {
    Luminance,
    Max,
}

#[derive(Debug, Args)]
pub struct EdgesArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "sobel")]
    pub op: EdgeOpArg,
    #[arg(long, value_enum, default_value = "l2")]
    pub magnitude: MagnitudeArg,
    #[arg(long, value_enum, default_value = "luminance")]
    pub gray: GrayArg,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10.0)]
    pub low: f64,
    #[arg(long, default_value_t = 30.0)]
    pub high: f64,
    #[arg(long, value_enum, default_value = "segmental")]
    pub mask: MaskArg,
    #[arg(long = "m-size", default_value_t = 3)]
    pub m_size: usize,
    /// Binarize at this fraction of the maximum magnitude.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    pub reference: PathBuf,
    pub test: PathBuf,
    /// Peak value for PSNR; defaults to 255 for images and max |reference| for signals.
    #[arg(long = "max-val")]
    pub max_val: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PsdArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 1024.0)]
    pub fs: f64,
    /// Defaults to the next power of two at or above the signal length.
    #[arg(long)]
    pub nfft: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Data(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// JSON number, or a string for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn record(command: &str, inputs: &[&Path], params: Value, metrics: Map<String, Value>, outputs: &[PathBuf]) -> Value {
    json!({
        "command": command,
        "inputs": inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "params": params,
        "metrics": Value::Object(metrics),
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    })
}

macro_rules! metrics {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut m = Map::new();
        $(m.insert($k.to_string(), $v);)*
        m
    }};
}

#[derive(Debug, Clone)]
enum Data {
    Signal(Vec<f64>),
    Image(Image),
}

fn ext(p: &Path) -> String {
    p.extension().map(|e| e.to_string_lossy().to_ascii_lowercase()).unwrap_or_default()
}

fn read_data(p: &Path) -> std::result::Result<Data, Failure> {
    match ext(p).as_str() {
        "csv" | "txt" => Ok(Data::Signal(io::read_csv(p)?)),
        "pgm" | "ppm" | "pnm" => Ok(Data::Image(io::read_image(p)?)),
        e => usage(format!("unsupported input extension {e:?} for {}", p.display())),
    }
}

fn read_signal(p: &Path) -> std::result::Result<Vec<f64>, Failure> {
    match read_data(p)? {
        Data::Signal(s) => Ok(s),
        Data::Image(_) => usage(format!("{} is an image; a CSV signal is expected", p.display())),
    }
}

fn read_image_arg(p: &Path) -> std::result::Result<Image, Failure> {
    match read_data(p)? {
        Data::Image(i) => Ok(i),
        Data::Signal(_) => usage(format!("{} is a signal; a PGM/PPM image is expected", p.display())),
    }
}

fn signal(x: Vec<f64>) -> std::result::Result<Signal, Failure> {
    Ok(Signal::new(x, 1.0)?)
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let e = ext(p);
    let name = if e.is_empty() { format!("{stem}{suffix}") } else { format!("{stem}{suffix}.{e}") };
    p.with_file_name(name)
}

/// Writes real-valued planes: min-max rendered for netpbm, raw f32 otherwise (one file per channel).
fn write_planes(path: &Path, planes: &[Plane]) -> std::result::Result<Vec<PathBuf>, Failure> {
    match ext(path).as_str() {
        "pgm" | "ppm" | "pnm" => {
            let rendered: Vec<Plane> = planes.iter().map(io::render_8bit).collect();
            let img = if rendered.len() == 3 || rendered.len() == 1 {
                Image::new(rendered)?
            } else {
                Image::gray(rendered[0].clone())?
            };
            io::write_image(path, &img)?;
            Ok(vec![path.to_path_buf()])
        }
        "f32" | "raw" => {
            if planes.len() == 1 {
                io::write_raw_f32(path, &planes[0])?;
                return Ok(vec![path.to_path_buf()]);
            }
            let mut out = Vec::new();
            for (k, p) in planes.iter().enumerate() {
                let q = with_suffix(path, &format!("_c{k}"));
                io::write_raw_f32(&q, p)?;
                out.push(q);
            }
            Ok(out)
        }
        e => usage(format!("unsupported image output extension {e:?}")),
    }
}

fn write_data(path: &Path, d: &Data) -> std::result::Result<(), Failure> {
    match d {
        Data::Signal(s) => {
            if !matches!(ext(path).as_str(), "csv" | "txt") {
                return usage("signal output must be .csv");
            }
            io::write_csv(path, s)?;
        }
        Data::Image(img) => {
            if !matches!(ext(path).as_str(), "pgm" | "ppm" | "pnm") {
                return usage("image output must be .pgm or .ppm");
            }
            io::write_image(path, img)?;
        }
    }
    Ok(())
}

fn peak(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

fn compare(reference: &Data, test: &Data, max_val: Option<f64>) -> std::result::Result<Map<String, Value>, Failure> {
    let (mae, mse, mv) = match (reference, test) {
        (Data::Signal(a), Data::Signal(b)) => (metrics::mae(b, a)?, metrics::mse(b, a)?, max_val.unwrap_or_else(|| peak(a))),
        (Data::Image(a), Data::Image(b)) => {
            (metrics::mae_image(b, a)?, metrics::mse_image(b, a)?, max_val.unwrap_or(255.0))
        }
        _ => return usage("cannot compare a signal with an image"),
    };
    Ok(metrics! {
        "mae" => num(mae),
        "mse" => num(mse),
        "psnr" => num(metrics::psnr_from_mse(mse, mv)),
        "max_val" => num(mv),
    })
}

fn flat(d: &Data) -> Vec<f64> {
    match d {
        Data::Signal(s) => s.clone(),
        Data::Image(i) => i.planes().iter().flat_map(|p| p.data().iter().copied()).collect(),
    }
}

fn resolve_mask(m: &MaskArgs, default: Option<DeblurMask>) -> std::result::Result<DeblurMask, Failure> {
    if m.preset {
        return Ok(DeblurMask::preset());
    }
    match (m.alpha, m.beta, m.n) {
        (Some(a), Some(b), Some(n)) => Ok(DeblurMask::new(n, a, b)?),
        (Some(a), Some(b), None) => Ok(DeblurMask::from_beta(superres::size_for(a, b, 31), b)?),
        (None, Some(b), n) => Ok(DeblurMask::from_beta(n.unwrap_or(3), b)?),
        (None, None, None) => match default {
            Some(d) => Ok(d),
            None => usage("give --beta (with optional --n / --alpha) or --preset"),
        },
        _ => usage("--alpha needs --beta"),
    }
}

fn mask_json(m: &DeblurMask) -> Value {
    json!({ "n": m.n, "alpha": m.alpha, "beta": m.beta })
}

pub fn execute(command: &Command) -> Outcome {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::Fit1d(a) => cmd_fit1d(a),
        Command::Fit2d(a) => cmd_fit2d(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Phase(a) => cmd_phase(a),
        Command::Haar(a) => cmd_transform(a, Basis::Haar),
        Command::Coslet(a) => cmd_transform(a, Basis::Coslet),
        Command::Denoise(a) => cmd_denoise(a),
        Command::SrEncode(a) => cmd_sr_encode(a),
        Command::SrDecode(a) => cmd_sr_decode(a),
        Command::Deblur(a) => cmd_deblur(a),
        Command::GaTune(a) => cmd_ga_tune(a),
        Command::Edges(a) => cmd_edges(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Psd(a) => cmd_psd(a),
        Command::Mi(a) => cmd_mi(a),
    }
}

fn cmd_synth(a: &SynthArgs) -> Outcome {
    let kind = match a.kind {
        KindArg::FourTone => SynthKind::FourTone,
        KindArg::TwoTone => SynthKind::TwoTone,
        KindArg::Sine => SynthKind::Sine { freq: a.freq },
        KindArg::EcgLike => SynthKind::EcgLike { rate: a.bpm / 60.0 },
    };
    let spec = SynthSpec { kind, fs: a.fs, duration: a.duration, noise_percent: a.noise, seed: a.seed };
    let s = synth::synth(&spec)?;
    io::write_csv(&a.output, s.samples())?;
    let x = s.samples();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    Ok(record(
        "synth",
        &[],
        json!({ "kind": format!("{:?}", a.kind), "fs": a.fs, "duration": a.duration, "noise": a.noise, "seed": a.seed, "freq": a.freq, "bpm": a.bpm }),
        metrics! { "samples" => json!(x.len()), "rms" => num(rms) },
        std::slice::from_ref(&a.output),
    ))
}

fn cmd_fit1d(a: &Fit1dArgs) -> Outcome {
    let s = signal(read_signal(&a.input)?)?;
    let series = if a.nonoverlap {
        let v = match a.variant {
            Fit1dVariantArg::Raw => NonOverlapVariant::Raw,
            Fit1dVariantArg::Equalized => NonOverlapVariant::Eq,
            Fit1dVariantArg::Averaged => NonOverlapVariant::Av,
            other => return usage(format!("--nonoverlap supports raw, equalized and averaged, not {other:?}")),
        };
        fit1d::fit_nonoverlap(&s, v, a.form.into())?
    } else {
        let v = match a.variant {
            Fit1dVariantArg::Raw => OverlapVariant::Raw,
            Fit1dVariantArg::Equalized => OverlapVariant::Equalized,
            Fit1dVariantArg::Averaged => OverlapVariant::Averaged,
            Fit1dVariantArg::MaskEq => OverlapVariant::MaskEq,
            Fit1dVariantArg::MaskAv => OverlapVariant::MaskAv,
            Fit1dVariantArg::DiffEq => OverlapVariant::DiffEq,
            Fit1dVariantArg::DiffAv => OverlapVariant::DiffAv,
        };
        fit1d::fit_overlap(&s, v, a.m_size)?
    };
    let v = &series.values;
    let mut outputs = Vec::new();
    if let Some(o) = &a.output {
        io::write_csv(o, v)?;
        outputs.push(o.clone());
    }
    let argmax = (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
    Ok(record(
        "fit1d",
        &[&a.input],
        json!({ "variant": format!("{:?}", a.variant), "m_size": a.m_size, "nonoverlap": a.nonoverlap, "form": format!("{:?}", a.form) }),
        metrics! {
            "samples" => json!(v.len()),
            "mean" => num(crate::base::mean(v)),
            "max" => num(v[argmax]),
            "argmax" => json!(argmax),
            "abs_mean_fallback" => json!(series.abs_mean_fallback),
        },
        &outputs,
    ))
}

fn cmd_fit2d(a: &Fit2dArgs) -> Outcome {
    let img = read_image_arg(&a.input)?;
    let mut outputs = Vec::new();
    let mut m = Map::new();
    if a.nonoverlap {
        let v = match a.variant {
            Fit2dVariantArg::Raw => NonOverlapImageVariant::Raw,
            Fit2dVariantArg::Equalized => NonOverlapImageVariant::Eq,
            Fit2dVariantArg::Averaged => NonOverlapImageVariant::Av,
            Fit2dVariantArg::Mask => return usage("--nonoverlap supports raw, equalized and averaged"),
        };
        let fits = fit2d::fit_image_nonoverlap(&img, v, a.form.into())?;
        for (name, pick) in [("h", 0usize), ("v", 1), ("d", 2)] {
            let planes: Vec<Plane> = fits
                .iter()
                .map(|f| match pick {
                    0 => f.h.clone(),
                    1 => f.v.clone(),
                    _ => f.d.clone(),
                })
                .collect();
            m.insert(format!("max_{name}"), num(planes.iter().map(Plane::max).fold(f64::MIN, f64::max)));
            if let Some(o) = &a.output {
                outputs.extend(write_planes(&with_suffix(o, &format!("_{name}")), &planes)?);
            }
        }
    } else {
        let v = match a.variant {
            Fit2dVariantArg::Raw => ImageVariant::Raw,
            Fit2dVariantArg::Equalized => ImageVariant::Equalized,
            Fit2dVariantArg::Averaged => ImageVariant::Averaged,
            Fit2dVariantArg::Mask => ImageVariant::Mask,
        };
        let f = fit2d::fit_image_overlap(&img, a.mask.into(), a.m_size, v)?;
        m.insert("max".into(), num(f.planes().iter().map(Plane::max).fold(f64::MIN, f64::max)));
        m.insert("mean".into(), num(f.planes().iter().map(Plane::mean).sum::<f64>() / f.channels() as f64));
        if let Some(o) = &a.output {
            outputs.extend(write_planes(o, f.planes())?);
        }
    }
    m.insert("rows".into(), json!(img.rows()));
    m.insert("cols".into(), json!(img.cols()));
    Ok(record(
        "fit2d",
        &[&a.input],
        json!({ "variant": format!("{:?}", a.variant), "mask": format!("{:?}", a.mask), "m_size": a.m_size, "nonoverlap": a.nonoverlap, "form": format!("{:?}", a.form) }),
        m,
        &outputs,
    ))
}

fn cmd_witness(a: &WitnessArgs) -> Outcome {
    let s = signal(read_signal(&a.input)?)?;
    let bars = fit1d::witness_bars(&s, a.levels)?;
    let mut outputs = Vec::new();
    if let Some(o) = &a.output {
        io::write_csv(o, &bars)?;
        outputs.push(o.clone());
    }
    Ok(record("witness", &[&a.input], json!({ "levels": a.levels }), metrics! { "bars" => json!(bars.len()) }, &outputs))
}

fn cmd_phase(a: &PhaseArgs) -> Outcome {
    let s = signal(read_signal(&a.input)?)?;
    let mode = match a.mode {
        PhaseArg::Overlap => PhaseMode::Overlap,
        PhaseArg::Nonoverlap => PhaseMode::NonOverlap,
    };
    let pts = fit1d::phase_plane(&s, mode)?;
    let mut outputs = Vec::new();
    if let Some(o) = &a.output {
        let text: String = pts.iter().map(|(x, y)| format!("{x:?},{y:?}\n")).collect();
        io::write_atomic(o, text.as_bytes())?;
        outputs.push(o.clone());
    }
    Ok(record("phase", &[&a.input], json!({ "mode": format!("{:?}", a.mode) }), metrics! { "points" => json!(pts.len()) }, &outputs))
}

fn cmd_transform(a: &TransformArgs, basis: Basis) -> Outcome {
    let name = if basis == Basis::Haar { "haar" } else { "coslet" };
    let mut outputs = Vec::new();
    let (err, shape) = match read_data(&a.input)? {
        Data::Signal(s) => {
            let pyr = multires::split_levels_1d(&s, basis, a.levels)?;
            let back = multires::merge_levels_1d(&pyr)?;
            if let Some(o) = &a.output {
                io::write_csv(o, &pyr.flatten())?;
                outputs.push(o.clone());
            }
            (max_abs_diff(&back, &s), json!([s.len()]))
        }
        Data::Image(img) => {
            let mut err = 0.0f64;
            let mut mosaics = Vec::new();
            for p in img.planes() {
                let pyr = multires::split_levels_2d(p, basis, a.levels)?;
                err = err.max(max_abs_diff(multires::merge_levels_2d(&pyr)?.data(), p.data()));
                mosaics.push(pyr.mosaic());
            }
            if let Some(o) = &a.output {
                outputs.extend(write_planes(o, &mosaics)?);
            }
            (err, json!([img.channels(), img.rows(), img.cols()]))
        }
    };
    Ok(record(name, &[&a.input], json!({ "levels": a.levels }), metrics! { "roundtrip_max_abs_error" => num(err), "shape" => shape }, &outputs))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn cmd_denoise(a: &DenoiseArgs) -> Outcome {
    let input = read_data(&a.input)?;
    let method = match a.method {
        MethodArg::Keep => Method::Keep,
        MethodArg::Shrink => Method::Shrink,
        MethodArg::Mf => Method::Mf,
        MethodArg::Ds => Method::Ds,
        MethodArg::Sg => Method::Keep,
    };
    let cfg = DenoiseConfig { basis: a.basis.into(), levels: a.levels, method, passes: a.passes };
    let out = match (&input, a.method, a.direct) {
        (Data::Signal(s), MethodArg::Sg, _) => {
            if a.frame.is_multiple_of(2) {
                return usage("--frame must be odd");
            }
            let f = denoise::savgol_coeffs_1d(a.frame / 2, a.frame / 2, a.degree, 0)?;
            Data::Signal(denoise::savgol_apply_1d(s, &f, Padding::Mirror)?)
        }
        (Data::Image(_), MethodArg::Sg, _) => return usage("sg denoising is for signals"),
        (Data::Signal(s), MethodArg::Mf, true) => Data::Signal(denoise::mf1d(s, a.passes)?),
        (Data::Signal(s), MethodArg::Ds, true) => Data::Signal(denoise::ds1d(s, a.passes)?),
        (Data::Image(i), MethodArg::Mf, true) => Data::Image(i.try_map_planes(|_, p| denoise::mf2d(p, 3, a.passes))?),
        (Data::Image(i), MethodArg::Ds, true) => Data::Image(i.try_map_planes(|_, p| denoise::ds2d(p, a.passes, true))?),
        (_, _, true) => return usage("--direct applies to mf and ds"),
        (Data::Signal(s), _, false) => Data::Signal(denoise::wavelet_denoise_1d(s, &cfg)?),
        (Data::Image(i), _, false) => Data::Image(denoise::wavelet_denoise_image(i, &cfg)?),
    };
    write_data(&a.output, &out)?;
    let mut m = Map::new();
    if let Some(r) = &a.reference {
        let reference = read_data(r)?;
        let before = compare(&reference, &input, None)?;
        let after = compare(&reference, &out, None)?;
        m.insert("psnr_noisy".into(), before["psnr"].clone());
        for (k, v) in after {
            m.insert(k, v);
        }
    }
    let mut inputs = vec![a.input.as_path()];
    if let Some(r) = &a.reference {
        inputs.push(r.as_path());
    }
    Ok(record(
        "denoise",
        &inputs,
        json!({ "basis": format!("{:?}", a.basis), "levels": a.levels, "method": format!("{:?}", a.method), "passes": a.passes, "direct": a.direct, "frame": a.frame, "degree": a.degree }),
        m,
        std::slice::from_ref(&a.output),
    ))
}

fn cmd_sr_encode(a: &SrEncodeArgs) -> Outcome {
    let version = Version::from_id(a.version)?;
    let input = read_data(&a.input)?;
    let (payload, original_bytes) = match &input {
        Data::Signal(s) => (superres::sr_encode_signal(s, a.basis.into(), version)?, 8 * s.len()),
        Data::Image(i) => (superres::sr_encode_image(i, a.basis.into(), version)?, i.channels() * i.rows() * i.cols()),
    };
    let precision = if a.full { Precision::F64 } else { Precision::F32 };
    let bytes = io::encode_container(&payload, precision)?;
    io::write_atomic(&a.output, &bytes)?;
    Ok(record(
        "sr-encode",
        &[&a.input],
        json!({ "basis": format!("{:?}", a.basis), "version": a.version, "f64": a.full }),
        metrics! {
            "cr" => num(payload.cr()),
            "pss" => num(payload.pss()),
            "original_bytes" => json!(original_bytes),
            "container_bytes" => json!(bytes.len()),
            "byte_cr" => num(original_bytes as f64 / bytes.len() as f64),
        },
        std::slice::from_ref(&a.output),
    ))
}

fn cmd_sr_decode(a: &SrDecodeArgs) -> Outcome {
    let (payload, precision) = io::read_container(&a.input)?;
    let alt = match a.alt {
        AltArg::Elementwise => Ro3::Elementwise,
        AltArg::ScalarProj => Ro3::ScalarProj,
        AltArg::ResScalar => Ro3::ResScalar,
    };
    let deblur = if a.deblur { Some(resolve_mask(&a.mask, Some(DeblurMask::preset()))?) } else { None };
    let out = match superres::sr_decode(&payload, &DecodeOptions { alt, deblur })? {
        Decoded::Signal(s) => Data::Signal(s),
        Decoded::Image(i) => Data::Image(i),
    };
    write_data(&a.output, &out)?;
    let mut m = metrics! {
        "cr" => num(payload.cr()),
        "pss" => num(payload.pss()),
        "rows" => json!(payload.dims.0),
        "cols" => json!(payload.dims.1),
        "channels" => json!(payload.channels()),
        "f64" => json!(precision == Precision::F64),
    };
    let mut inputs = vec![a.input.as_path()];
    if let Some(r) = &a.reference {
        m.extend(compare(&read_data(r)?, &out, None)?);
        inputs.push(r.as_path());
    }
    Ok(record(
        "sr-decode",
        &inputs,
        json!({ "alt": format!("{:?}", a.alt), "deblur": deblur.as_ref().map(mask_json), "version": payload.version.id(), "basis": format!("{:?}", payload.basis) }),
        m,
        std::slice::from_ref(&a.output),
    ))
}

fn cmd_deblur(a: &DeblurArgs) -> Outcome {
    let mask = resolve_mask(&a.mask, None)?;
    let input = read_data(&a.input)?;
    let out = match &input {
        Data::Signal(s) => Data::Signal(superres::deblur_1d(s, &mask)?),
        Data::Image(i) => Data::Image(superres::deblur_2d(i, &mask)?),
    };
    write_data(&a.output, &out)?;
    let mut m = metrics! { "constraint" => num(mask.constraint()) };
    let mut inputs = vec![a.input.as_path()];
    if let Some(r) = &a.reference {
        let reference = read_data(r)?;
        m.insert("psnr_input".into(), compare(&reference, &input, None)?["psnr"].clone());
        m.extend(compare(&reference, &out, None)?);
        inputs.push(r.as_path());
    }
    Ok(record("deblur", &inputs, json!({ "mask": mask_json(&mask) }), m, std::slice::from_ref(&a.output)))
}

fn cmd_ga_tune(a: &GaTuneArgs) -> Outcome {
    if !a.degraded.is_empty() && a.degraded.len() != a.original.len() {
        return usage("--degraded must be given once per --original");
    }
    let mut pairs = Vec::new();
    for (k, o) in a.original.iter().enumerate() {
        let orig = crate::edges::to_gray(&read_image_arg(o)?, GrayMode::Luminance);
        let deg = match a.degraded.get(k) {
            Some(d) => crate::edges::to_gray(&read_image_arg(d)?, GrayMode::Luminance),
            None => denoise::mf2d(&orig, a.blur, 1)?,
        };
        pairs.push((orig, deg));
    }
    let cfg = GaConfig {
        population: a.population,
        survivors: a.survivors,
        generations: a.generations,
        mutation_rate: a.mutation_rate,
        max_size: a.max_size,
        seed: a.seed,
        ..GaConfig::default()
    };
    let r = superres::ga_tune_mask(&pairs, &cfg)?;
    let degraded_mse = pairs.iter().map(|(o, d)| metrics::mse(d.data(), o.data()).unwrap_or(f64::NAN)).sum::<f64>() / pairs.len() as f64;
    let inputs: Vec<&Path> = a.original.iter().chain(&a.degraded).map(PathBuf::as_path).collect();
    Ok(record(
        "ga-tune",
        &inputs,
        json!({ "population": a.population, "survivors": a.survivors, "generations": a.generations, "mutation_rate": a.mutation_rate, "blur": a.blur, "seed": a.seed }),
        metrics! {
            "chromosome" => json!({ "alpha": num(r.chromosome.alpha), "beta": num(r.chromosome.beta) }),
            "mask" => mask_json(&r.mask),
            "mse" => num(r.mse),
            "degraded_mse" => num(degraded_mse),
        },
        &[],
    ))
}

fn cmd_edges(a: &EdgesArgs) -> Outcome {
    let img = read_image_arg(&a.input)?;
    let gray = match a.gray {
        GrayArg::Luminance => GrayMode::Luminance,
        GrayArg::Max => GrayMode::Max,
    };
    let mode = match a.magnitude {
        MagnitudeArg::L2 => MagnitudeMode::L2,
        MagnitudeArg::L1 => MagnitudeMode::L1,
        MagnitudeArg::Max => MagnitudeMode::Max,
    };
    let map = match a.op {
        EdgeOpArg::Canny => edges::canny(&img, a.sigma, a.low, a.high, gray)?,
        EdgeOpArg::Fit => edges::fit_edges(&img, a.mask.into(), a.m_size, a.fraction, gray)?,
        op => {
            let g = match op {
                EdgeOpArg::Roberts => GradientOp::Roberts,
                EdgeOpArg::Sobel => GradientOp::Sobel,
                _ => GradientOp::Prewitt,
            };
            let e = edges::gradient_edges(&img, g, mode, gray);
            match a.fraction {
                Some(f) => e.thresholded(f),
                None => e,
            }
        }
    };
    let mut outputs = Vec::new();
    if let Some(o) = &a.output {
        let plane = match &map.binary {
            Some(b) if ext(o) != "f32" => b.map(|v| v * 255.0),
            _ => map.magnitude.clone(),
        };
        if map.binary.is_some() && matches!(ext(o).as_str(), "pgm" | "ppm" | "pnm") {
            io::write_image(o, &Image::gray(plane)?)?;
            outputs.push(o.clone());
        } else {
            outputs.extend(write_planes(o, &[plane])?);
        }
    }
    Ok(record(
        "edges",
        &[&a.input],
        json!({ "op": format!("{:?}", a.op), "magnitude": format!("{:?}", a.magnitude), "gray": format!("{:?}", a.gray), "sigma": a.sigma, "low": a.low, "high": a.high, "mask": format!("{:?}", a.mask), "m_size": a.m_size, "fraction": a.fraction }),
        metrics! {
            "max_magnitude" => num(map.magnitude.max()),
            "edge_pixels" => json!(map.edge_count()),
        },
        &outputs,
    ))
}

fn cmd_metrics(a: &PairArgs) -> Outcome {
    let (x, y) = (read_data(&a.reference)?, read_data(&a.test)?);
    let mut m = compare(&x, &y, a.max_val)?;
    if let Data::Image(i) = &y {
        m.insert("michelson".into(), num(metrics::michelson_contrast(&flat(&Data::Image(i.clone())))?));
    }
    Ok(record("metrics", &[&a.reference, &a.test], json!({ "max_val": a.max_val.map(num) }), m, &[]))
}

fn cmd_psd(a: &PsdArgs) -> Outcome {
    let s = read_signal(&a.input)?;
    let nfft = a.nfft.unwrap_or_else(|| s.len().next_power_of_two());
    let spec = metrics::psd(&s, a.fs, nfft)?;
    let mut outputs = Vec::new();
    if let Some(o) = &a.output {
        let text: String = spec.freqs.iter().zip(&spec.power).map(|(f, p)| format!("{f:?},{p:?}\n")).collect();
        io::write_atomic(o, text.as_bytes())?;
        outputs.push(o.clone());
    }
    Ok(record(
        "psd",
        &[&a.input],
        json!({ "fs": a.fs, "nfft": nfft }),
        metrics! { "peak_frequency" => num(spec.peak_frequency()), "total_power" => num(spec.power.iter().sum()) },
        &outputs,
    ))
}

fn cmd_mi(a: &PairArgs) -> Outcome {
    let (x, y) = (read_data(&a.reference)?, read_data(&a.test)?);
    let binning = match (&x, &y) {
        (Data::Image(_), Data::Image(_)) => Binning::EightBit,
        (Data::Signal(_), Data::Signal(_)) => Binning::MinMax(256),
        _ => return usage("cannot compare a signal with an image"),
    };
    let r = metrics::information(&flat(&x), &flat(&y), binning)?;
    Ok(record(
        "mi",
        &[&a.reference, &a.test],
        json!({ "binning": format!("{binning:?}") }),
        metrics! { "hx" => num(r.hx), "hy" => num(r.hy), "hxy" => num(r.hxy), "mi" => num(r.mi) },
        &[],
    ))
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(v) => {
            println!("{v}");
            0
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn non_finite_numbers_become_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(1.5), json!(1.5));
    }

    #[test]
    fn suffixes() {
        assert_eq!(with_suffix(Path::new("/a/b/out.pgm"), "_h"), PathBuf::from("/a/b/out_h.pgm"));
        assert_eq!(with_suffix(Path::new("x"), "_c0"), PathBuf::from("x_c0"));
    }

    #[test]
    fn mask_resolution() {
        let m = |alpha, beta, n, preset| MaskArgs { alpha, beta, n, preset };
        assert_eq!(resolve_mask(&m(None, None, None, true), None).unwrap().n, 7);
        assert_eq!(resolve_mask(&m(None, Some(1.5), Some(5), false), None).unwrap().n, 5);
        assert!(resolve_mask(&m(None, None, None, false), None).is_err());
        assert!(resolve_mask(&m(Some(-0.0129), Some(1.63), Some(7), false), None).is_err());
        assert_eq!(resolve_mask(&m(Some(-0.0129), Some(1.63), None, false), None).unwrap().n, 7);
    }
}
