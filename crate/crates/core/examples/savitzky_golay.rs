//! Savitzky-Golay smoothing and derivative filters in one and two dimensions.

use fitkit::denoise::{savgol_apply_1d, savgol_coeffs_1d, savgol_filters_2d};
use fitkit::Padding;

fn main() -> fitkit::Result<()> {
    for (m, n) in [(2, 2), (2, 4), (4, 4)] {
        let f = savgol_coeffs_1d(n, n, m, 0)?;
        let taps: Vec<String> = f.taps.iter().map(|t| format!("{t:+.3}")).collect();
        println!("degree {m}, {n}+{n}: [{}]", taps.join(" "));
    }
    let d1 = savgol_coeffs_1d(3, 3, 2, 1)?;
    let s: Vec<f64> = (0..64).map(|i| 0.01 * (i * i) as f64).collect();
    let ds = savgol_apply_1d(&s, &d1, Padding::Mirror)?;
    println!("derivative of 0.01 t^2 at t=30: {:.4} (exact 0.6)", ds[30]);

    let sg = savgol_filters_2d(5, 3)?;
    let c00 = sg.filter(0, 0).expect("constant term");
    println!("2D window 5 degree 3, smoothing filter row 0: {:?}", c00.row(0).iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>());
    Ok(())
}
