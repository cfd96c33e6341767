//! Haar and coslet pyramids: sizes, exact reconstruction and where the energy goes.

use fitkit::multires::{merge_levels_2d, split_levels_2d};
use fitkit::{Basis, Plane};

fn main() -> fitkit::Result<()> {
    let p = Plane::from_fn(256, 256, |r, c| 128.0 + 60.0 * ((r as f64) / 19.0).sin() * ((c as f64) / 31.0).cos());
    let energy = |q: &Plane| q.data().iter().map(|v| v * v).sum::<f64>();
    for basis in [Basis::Haar, Basis::Coslet] {
        let pyr = split_levels_2d(&p, basis, 3)?;
        let back = merge_levels_2d(&pyr)?;
        let err = back.data().iter().zip(p.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let detail: f64 = pyr.details.iter().map(|d| energy(&d.lh) + energy(&d.hl) + energy(&d.hh)).sum();
        println!(
            "{basis:?}: LL3 {}x{}, detail energy {:.3e}, reconstruction error {err:.2e}",
            pyr.approx.rows(),
            pyr.approx.cols(),
            detail
        );
    }
    Ok(())
}
