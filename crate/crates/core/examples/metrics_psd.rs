//! Quality and information metrics, and the DFT power spectrum of the four-tone signal.

use fitkit::metrics::{information, michelson_contrast, psd, psnr_from_mse, Binning};
use fitkit::synth::{clean, SynthKind, SynthSpec};

fn main() -> fitkit::Result<()> {
    println!("PSNR at MSE 1 for 8-bit data: {:.4} dB", psnr_from_mse(1.0, 255.0));
    println!("Michelson contrast of [0, 255]: {}", michelson_contrast(&[0.0, 128.0, 255.0])?);

    let spec = SynthSpec { kind: SynthKind::FourTone, fs: 400.0, duration: 20.0, ..Default::default() };
    let s = clean(&spec)?;
    for k in 0..4 {
        let seg = &s.samples()[k * 2000..(k + 1) * 2000];
        let p = psd(seg, 400.0, 2048)?;
        println!("segment {k}: spectral peak at {:.2} Hz", p.peak_frequency());
    }
    let x: Vec<f64> = (0..4096).map(|i| ((i * 37) % 256) as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| (v / 2.0).floor()).collect();
    let r = information(&x, &y, Binning::EightBit)?;
    println!("H(X) {:.3}, H(Y) {:.3}, H(X,Y) {:.3}, I(X;Y) {:.3} bits", r.hx, r.hy, r.hxy, r.mi);
    Ok(())
}
