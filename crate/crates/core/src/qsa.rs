//! Angular-frequency recovery from sampled state trajectories.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

pub type State = DVector<Complex64>;
pub type Omega = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<State>,
    dt: f64,
}

impl Trajectory {
    pub fn new(states: Vec<State>, dt: f64) -> Result<Self> {
        if states.len() < 3 {
            return invalid(format!("trajectory needs at least 3 states, got {}", states.len()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        let d = states[0].len();
        if d < 2 {
            return invalid("state dimension must be at least 2");
        }
        for (n, s) in states.iter().enumerate() {
            if s.len() != d {
                return Err(Error::ShapeMismatch(vec![d], vec![s.len()]));
            }
            if (s.norm() - 1.0).abs() > 1e-9 {
                return invalid(format!("state {n} is not normalized (norm {})", s.norm()));
            }
        }
        Ok(Trajectory { states, dt })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Centered differences at interior steps `1..len-1`.
    pub fn derivatives(&self) -> Vec<State> {
        let k = 1.0 / (2.0 * self.dt);
        (1..self.states.len() - 1)
            .into_par_iter()
            .map(|n| (&self.states[n + 1] - &self.states[n - 1]) * Complex64::new(k, 0.0))
            .collect()
    }
}

/// First-order step `(I - i*Omega*dt) psi`, renormalized.
pub fn schrodinger_step(psi: &State, omega: &Omega, dt: f64) -> Result<State> {
    if !omega.is_square() || omega.nrows() != psi.len() {
        return Err(Error::ShapeMismatch(vec![omega.nrows(), omega.ncols()], vec![psi.len()]));
    }
    if dt < 0.0 || !dt.is_finite() {
        return invalid(format!("time step must be non-negative, got {dt}"));
    }
    if dt == 0.0 {
        return Ok(psi.clone());
    }
    let next = psi - omega * psi * (I * dt);
    let norm = next.norm();
    Ok(next / Complex64::new(norm, 0.0))
}

/// Evolves `psi0` for `steps` steps; the result holds `steps + 1` states.
pub fn evolve(psi0: &State, omega: &Omega, dt: f64, steps: usize) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(steps + 1);
    let norm = psi0.norm();
    if norm == 0.0 {
        return invalid("initial state is zero");
    }
    states.push(psi0 / Complex64::new(norm, 0.0));
    for n in 0..steps {
        let next = schrodinger_step(&states[n], omega, dt)?;
        states.push(next);
    }
    Trajectory::new(states, dt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSeries {
    /// Real part of the estimate per interior step, rad/s.
    pub omega: Vec<f64>,
    /// Imaginary part left over, a consistency diagnostic.
    pub residual: Vec<f64>,
}

pub fn qsa_monotone(traj: &Trajectory) -> MonotoneSeries {
    let d = traj.derivatives();
    let (omega, residual) = d
        .par_iter()
        .enumerate()
        .map(|(k, dpsi)| {
            let psi = &traj.states[k + 1];
            let w = I * psi.dotc(dpsi) / psi.dotc(psi);
            (w.re, w.im)
        })
        .unzip();
    MonotoneSeries { omega, residual }
}

pub fn qsa_multitone(traj: &Trajectory) -> Vec<Omega> {
    traj.derivatives()
        .par_iter()
        .enumerate()
        .map(|(k, dpsi)| {
            let psi = &traj.states[k + 1];
            let norm2 = psi.dotc(psi);
            dpsi * psi.adjoint() * (I / norm2)
        })
        .collect()
}

/// `||Omega psi - i dpsi|| / ||dpsi||` for each interior step against a reference derivative.
pub fn multitone_residual(traj: &Trajectory, omegas: &[Omega], reference: &[State]) -> Vec<f64> {
    omegas
        .iter()
        .zip(reference)
        .enumerate()
        .map(|(k, (om, dpsi))| {
            let psi = &traj.states[k + 1];
            (om * psi - dpsi * I).norm() / dpsi.norm()
        })
        .collect()
}

/// Exact trajectory `exp(-i diag(w) t) psi0` sampled at `t = n*dt`.
pub fn diagonal_trajectory(psi0: &State, omegas: &[f64], dt: f64, steps: usize) -> Result<Trajectory> {
    if omegas.len() != psi0.len() {
        return Err(Error::ShapeMismatch(vec![omegas.len()], vec![psi0.len()]));
    }
    let norm = psi0.norm();
    let states = (0..=steps)
        .map(|n| {
            let t = n as f64 * dt;
            State::from_iterator(
                psi0.len(),
                psi0.iter().zip(omegas).map(|(c, &w)| c * Complex64::from_polar(1.0, -w * t) / norm),
            )
        })
        .collect();
    Trajectory::new(states, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis0() -> State {
        State::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])
    }

    #[test]
    fn zero_generator_is_identity() {
        let psi = basis0();
        assert_eq!(schrodinger_step(&psi, &Omega::zeros(2, 2), 0.1).unwrap(), psi);
        let w = Omega::identity(2, 2) * c(3.0, 0.0);
        assert_eq!(schrodinger_step(&psi, &w, 0.0).unwrap(), psi);
        assert!(schrodinger_step(&psi, &Omega::zeros(3, 3), 0.1).is_err());
    }

    #[test]
    fn phase_rotation_follows_exact_solution() {
        let w = 2.0 * PI * 10.0;
        let dt = 1e-5;
        let next = schrodinger_step(&basis0(), &(Omega::identity(2, 2) * c(w, 0.0)), dt).unwrap();
        let exact = Complex64::from_polar(1.0, -w * dt);
        assert!((next[0] - exact).norm() < 1e-6);
        assert!((next.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_recovers_constant_frequency() {
        let w = 2.0 * PI * 10.0;
        let traj = evolve(&basis0(), &(Omega::identity(2, 2) * c(w, 0.0)), 1e-4, 2000).unwrap();
        let est = qsa_monotone(&traj);
        assert_eq!(est.omega.len(), 1999);
        assert!(est.omega.iter().all(|&v| (v - w).abs() < 0.01 * w));
    }

    #[test]
    fn stationary_trajectory_has_zero_frequency() {
        let traj = Trajectory::new(vec![basis0(); 5], 0.01).unwrap();
        assert!(qsa_monotone(&traj).omega.iter().all(|&v| v == 0.0));
        assert!(qsa_multitone(&traj).iter().all(|m| m.norm() == 0.0));
    }

    #[test]
    fn two_states_rejected() {
        assert!(Trajectory::new(vec![basis0(); 2], 0.01).is_err());
    }

    #[test]
    fn multitone_on_diagonal_generator() {
        let psi0 = State::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let ws = [2.0 * PI * 10.0, 2.0 * PI * 25.0];
        let dt = 1e-4;
        let traj = diagonal_trajectory(&psi0, &ws, dt, 200).unwrap();
        let om = qsa_multitone(&traj);
        let truth: Vec<State> = traj.states()[1..traj.len() - 1]
            .iter()
            .map(|p| State::from_iterator(2, p.iter().zip(&ws).map(|(z, &w)| -I * w * z)))
            .collect();
        for r in multitone_residual(&traj, &om, &truth) {
            assert!(r < 0.01);
        }
    }

    #[test]
    fn multitone_agrees_with_monotone_on_scalar_generator() {
        let w = 2.0 * PI * 7.0;
        let psi0 = State::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let traj = diagonal_trajectory(&psi0, &[w, w], 1e-3, 50).unwrap();
        let mono = qsa_monotone(&traj);
        for (k, om) in qsa_multitone(&traj).iter().enumerate() {
            let psi = &traj.states()[k + 1];
            let a = om * psi;
            let b = psi * c(mono.omega[k], mono.residual[k]);
            assert!((&a - &b).norm() <= 1e-6 * b.norm());
        }
    }
}
