//! Recovers a constant angular frequency and a multitone generator from quantum trajectories.

use fitkit::qsa::{diagonal_trajectory, evolve, multitone_residual, qsa_monotone, qsa_multitone, Omega, State};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() -> fitkit::Result<()> {
    let psi0 = State::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
    let omega = 2.0 * std::f64::consts::PI * 50.0;
    let h: Omega = DMatrix::identity(2, 2) * Complex64::new(omega, 0.0);
    let traj = evolve(&psi0, &h, 1e-4, 10_000)?;
    let est = qsa_monotone(&traj);
    let mean = est.omega.iter().sum::<f64>() / est.omega.len() as f64;
    println!("monotone: true {omega:.4} rad/s, estimated {mean:.4} rad/s");

    let tones = [30.0, 75.0];
    for dt in [1e-3, 5e-4] {
        let traj = diagonal_trajectory(&psi0, &tones, dt, 400)?;
        let omegas = qsa_multitone(&traj);
        let reference: Vec<State> = traj.states()[1..traj.len() - 1]
            .iter()
            .map(|psi| State::from_iterator(2, psi.iter().zip(&tones).map(|(c, w)| c * Complex64::new(0.0, -w))))
            .collect();
        let r = multitone_residual(&traj, &omegas, &reference);
        let worst = r.iter().copied().fold(0.0, f64::max);
        println!("multitone dt={dt:e}: worst relative residual {worst:.3e}");
    }
    Ok(())
}
