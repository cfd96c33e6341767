//! Frequency-in-time of a two-tone signal, with witness bars and the Haar (non-overlap) form.

use fitkit::fit1d::{fit_nonoverlap, fit_overlap, witness_bars, Form, NonOverlapVariant, OverlapVariant};
use fitkit::synth::{clean, SynthKind, SynthSpec};

fn main() -> fitkit::Result<()> {
    let spec = SynthSpec { kind: SynthKind::TwoTone, fs: 200.0, duration: 4.0, ..Default::default() };
    let s = clean(&spec)?;
    for variant in [OverlapVariant::Equalized, OverlapVariant::Averaged, OverlapVariant::MaskEq, OverlapVariant::DiffAv] {
        let f = fit_overlap(&s, variant, 3)?;
        let half = f.values.len() / 2;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "{variant:?}: mean FIT first half {:.5}, second half {:.5}",
            mean(&f.values[..half]),
            mean(&f.values[half..])
        );
    }
    let half = fit_nonoverlap(&s, NonOverlapVariant::Av, Form::SqrtConj)?;
    println!("non-overlap averaged: {} values for {} samples", half.values.len(), s.len());
    let bars = witness_bars(&s, 9)?;
    let split = bars.partition_point(|&b| b < s.len() as f64 / 2.0);
    println!("witness bars: {split} in the 1 Hz half, {} in the 2 Hz half", bars.len() - split);
    Ok(())
}
