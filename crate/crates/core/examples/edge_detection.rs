//! Roberts, Sobel, Prewitt, Canny and FIT edges on the same step image.

use fitkit::edges::{canny_plane, fit_edges_plane, gradient_edges_plane, GradientOp, MagnitudeMode};
use fitkit::fit2d::MaskKind;
use fitkit::Plane;

fn main() -> fitkit::Result<()> {
    let p = Plane::from_fn(32, 32, |r, c| if c >= 16 || r >= 24 { 180.0 } else { 50.0 });
    let argmax = |q: &Plane, r: usize| (0..q.cols()).fold(0, |b, j| if q.get(r, j) > q.get(r, b) { j } else { b });
    for op in [GradientOp::Roberts, GradientOp::Sobel, GradientOp::Prewitt] {
        let e = gradient_edges_plane(&p, op, MagnitudeMode::L2);
        println!("{op:?}: row 8 peak at column {}, magnitude {:.1}", argmax(&e.magnitude, 8), e.magnitude.max());
    }
    let c = canny_plane(&p, 1.2, 10.0, 30.0)?;
    println!("Canny: {} edge pixels", c.edge_count());
    for m in [3, 7] {
        let f = fit_edges_plane(&p, MaskKind::Segmental, m, Some(0.25))?;
        println!("FIT M={m}: row 8 peak at column {}, {} pixels above a quarter of the maximum", argmax(&f.magnitude, 8), f.edge_count());
    }
    Ok(())
}
