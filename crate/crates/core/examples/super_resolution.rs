//! The three super-compression codecs on a smooth signal and an image, through the byte container.

use fitkit::io::{decode_container, encode_container, Precision};
use fitkit::metrics::{psnr, psnr_image};
use fitkit::superres::{sr_decode, sr_encode_image, sr_encode_signal, DecodeOptions, Decoded, Version};
use fitkit::{Basis, Image, Plane};

fn main() -> fitkit::Result<()> {
    let n = 1024;
    let s: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            1.5 + 0.5 * (6.0 * std::f64::consts::PI * t).sin() + 0.3 * (14.0 * std::f64::consts::PI * t).cos()
        })
        .collect();
    for version in [Version::V1, Version::V2, Version::V3] {
        for basis in [Basis::Haar, Basis::Coslet] {
            let payload = sr_encode_signal(&s, basis, version)?;
            let bytes = encode_container(&payload, Precision::F32)?;
            let (back, _) = decode_container(&bytes)?;
            let Decoded::Signal(y) = sr_decode(&back, &DecodeOptions::default())? else { unreachable!() };
            println!("signal {version:?}/{basis:?}: CR {} PSS {} PSNR {:.2} dB", payload.cr(), payload.pss(), psnr(&y, &s, 2.0)?);
        }
    }
    let img = Image::gray(Plane::from_fn(128, 128, |r, c| 128.0 + 90.0 * ((r as f64) / 13.0).sin() * ((c as f64) / 17.0).cos()))?;
    for version in [Version::V1, Version::V2, Version::V3] {
        let payload = sr_encode_image(&img, Basis::Coslet, version)?;
        let Decoded::Image(y) = sr_decode(&payload, &DecodeOptions::default())? else { unreachable!() };
        println!("image {version:?}/Coslet: CR {} PSNR {:.2} dB", payload.cr(), psnr_image(&y, &img, 255.0)?);
    }
    Ok(())
}
