//! Full-resolution and directional FIT of a synthetic image, written as PGM files.
//!
//! `cargo run --example fit_image -- OUT_DIR`

use std::path::PathBuf;

use fitkit::fit1d::Form;
use fitkit::fit2d::{fit_image_nonoverlap, fit_image_overlap, ImageVariant, MaskKind, NonOverlapImageVariant};
use fitkit::io::{render_8bit, write_image};
use fitkit::{Image, Plane};

fn main() -> fitkit::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    let img = Image::gray(Plane::from_fn(128, 128, |r, c| {
        let (x, y) = (c as f64 - 64.0, r as f64 - 64.0);
        if x * x + y * y < 900.0 {
            200.0
        } else {
            40.0 + 0.5 * c as f64
        }
    }))?;
    for (kind, m) in [(MaskKind::Segmental, 3), (MaskKind::Square, 7)] {
        let f = fit_image_overlap(&img, kind, m, ImageVariant::Equalized)?;
        let path = out.join(format!("fit_{kind:?}_{m}.pgm").to_lowercase());
        write_image(&path, &Image::gray(render_8bit(f.plane(0)))?)?;
        println!("{kind:?} M={m}: max {:.4} -> {}", f.plane(0).max(), path.display());
    }
    let d = &fit_image_nonoverlap(&img, NonOverlapImageVariant::Eq, Form::Abs)?[0];
    println!("directional maxima: h {:.4}, v {:.4}, d {:.4}", d.h.max(), d.v.max(), d.d.max());
    Ok(())
}
