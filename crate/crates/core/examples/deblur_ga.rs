//! Tunes a deblurring mask with the genetic search and compares it with the built-in preset.

use fitkit::denoise::mf2d;
use fitkit::metrics::psnr;
use fitkit::superres::{deblur_plane, ga_tune_mask, DeblurMask, GaConfig};
use fitkit::Plane;

fn main() -> fitkit::Result<()> {
    let originals: Vec<Plane> = (0..3)
        .map(|k| {
            Plane::from_fn(48, 48, |r, c| {
                let v = ((r / (4 + k)) + (c / (5 + k))) % 2;
                60.0 + 120.0 * v as f64 + 10.0 * ((r + c) as f64 / 7.0).sin()
            })
        })
        .collect();
    let pairs: Vec<(Plane, Plane)> = originals.iter().map(|o| Ok((o.clone(), mf2d(o, 3, 1)?))).collect::<fitkit::Result<_>>()?;
    let cfg = GaConfig { generations: 40, seed: 7, ..GaConfig::default() };
    let best = ga_tune_mask(&pairs, &cfg)?;
    println!("GA: alpha {:.5}, beta {:.4}, N {}, mean MSE {:.3}", best.mask.alpha, best.mask.beta, best.mask.n, best.mse);
    let preset = DeblurMask::preset();
    for (name, mask) in [("GA", best.mask), ("preset", preset)] {
        let (o, d) = &pairs[0];
        let out = deblur_plane(d, &mask)?;
        println!("{name:7} blurred {:.2} dB -> deblurred {:.2} dB", psnr(d.data(), o.data(), 255.0)?, psnr(out.data(), o.data(), 255.0)?);
    }
    Ok(())
}
