//! Denoising a noisy ECG-like trace with every method of the toolkit, median PSNR over seeds.

use fitkit::denoise::{ds1d, mf1d, savgol_apply_1d, savgol_coeffs_1d, wavelet_denoise_1d, DenoiseConfig, Method};
use fitkit::metrics::psnr;
use fitkit::synth::{add_noise, clean, SynthKind, SynthSpec};
use fitkit::{Basis, Padding};

fn main() -> fitkit::Result<()> {
    let spec = SynthSpec { kind: SynthKind::EcgLike { rate: 80.0 / 60.0 }, fs: 1024.0, duration: 4.5, ..Default::default() };
    let x = clean(&spec)?;
    let peak = x.samples().iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let sg = savgol_coeffs_1d(20, 20, 3, 0)?;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for seed in 0..9 {
        let noisy = add_noise(&x, 5.0, seed)?.into_samples();
        let mut outs: Vec<(String, Vec<f64>)> = vec![
            ("noisy".into(), noisy.clone()),
            ("SG 41".into(), savgol_apply_1d(&noisy, &sg, Padding::Mirror)?),
            ("MF x26".into(), mf1d(&noisy, 26)?),
            ("DS x2".into(), ds1d(&noisy, 2)?),
        ];
        for basis in [Basis::Haar, Basis::Coslet] {
            for (method, passes) in [(Method::Keep, 0), (Method::Shrink, 0), (Method::Mf, 5), (Method::Ds, 10)] {
                let cfg = DenoiseConfig { basis, levels: 1, method, passes };
                outs.push((format!("{basis:?}/{method:?}"), wavelet_denoise_1d(&noisy, &cfg)?));
            }
        }
        for (k, (name, y)) in outs.into_iter().enumerate() {
            let v = psnr(&y, x.samples(), peak)?;
            if rows.len() <= k {
                rows.push((name, Vec::new()));
            }
            rows[k].1.push(v);
        }
    }
    for (name, mut v) in rows {
        v.sort_by(f64::total_cmp);
        println!("{name:14} {:6.2} dB", v[v.len() / 2]);
    }
    Ok(())
}
