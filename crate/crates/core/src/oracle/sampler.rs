// SPDX-License-Identifier: Apache-2.0

//! Kinetic Monte Carlo of the two-state jump process with time-dependent
//! rates, by thinning against a constant envelope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{ModelParams, Rates, Side};
use crate::spectral::steady_state;
use crate::Result;

/// Net counts of bosons taken from the left reservoir.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryBatch {
    pub n_traj: usize,
    /// Horizon in ps.
    pub horizon: f64,
    pub counts: Vec<i64>,
    pub seed: u64,
}

impl TrajectoryBatch {
    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|&q| q as f64).sum::<f64>() / self.n_traj as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let n = self.n_traj as f64;
        self.counts.iter().map(|&q| (q as f64 - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)
    }

    pub fn mean_standard_error(&self) -> f64 {
        (self.variance() / self.n_traj as f64).sqrt()
    }

    /// Large-sample standard error of the variance, from the fourth central
    /// moment.
    pub fn variance_standard_error(&self) -> f64 {
        let m = self.mean();
        let n = self.n_traj as f64;
        let m4 = self.counts.iter().map(|&q| (q as f64 - m).powi(4)).sum::<f64>() / n;
        let v = self.variance();
        ((m4 - v * v * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

/// Samples `n_traj` trajectories over `[0, horizon]`, starting from the
/// instantaneous steady state at t = 0. Trajectory `i` draws from the
/// ChaCha8 stream `i` of `seed`, so results do not depend on scheduling.
pub fn sample_trajectories(params: &ModelParams, n_traj: usize, horizon: f64, seed: u64) -> Result<TrajectoryBatch> {
    // rates grow with temperature, so the hottest point of the orbit bounds them
    let amplitude = params.drive().amplitude;
    let envelope = params.rates_at_temperatures(
        params.left().base_temperature + amplitude,
        params.right().base_temperature + amplitude,
    )?;
    let bound = [
        envelope.emission() * (1.0 + 1e-12),
        envelope.absorption() * (1.0 + 1e-12),
    ];
    let start = steady_state(params, 0.0);
    let counts = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            trajectory(params, horizon, start, bound, &mut rng)
        })
        .collect();
    Ok(TrajectoryBatch {
        n_traj,
        horizon,
        counts,
        seed,
    })
}

fn trajectory(params: &ModelParams, horizon: f64, start: [f64; 2], bound: [f64; 2], rng: &mut ChaCha8Rng) -> i64 {
    // 0 = occupied, 1 = empty
    let mut state = usize::from(rng.random::<f64>() >= start[0]);
    let mut t = 0.0;
    let mut q = 0i64;
    loop {
        let envelope = bound[state];
        if envelope <= 0.0 {
            return q;
        }
        t += -(1.0 - rng.random::<f64>()).ln() / envelope;
        if t > horizon {
            return q;
        }
        let rates: Rates = params.rates_at(t);
        let (left, right) = match state {
            0 => (rates.side(Side::Left).alpha, rates.side(Side::Right).alpha),
            _ => (rates.side(Side::Left).beta, rates.side(Side::Right).beta),
        };
        let u = rng.random::<f64>() * envelope;
        if u < left {
            // emission into (−1) or absorption from (+1) the left reservoir
            q += if state == 0 { -1 } else { 1 };
            state = 1 - state;
        } else if u < left + right {
            state = 1 - state;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, DriveProtocol};
    use std::f64::consts::PI;

    fn params(gl: f64, drive: DriveProtocol) -> ModelParams {
        ModelParams::from_omega0_thz(
            7.4 * PI,
            BathSpec::new(gl, 0.0, 300.0).unwrap(),
            BathSpec::new(1000.0, 0.0, 250.0).unwrap(),
            drive,
        )
        .unwrap()
    }

    #[test]
    fn uncoupled_left_reservoir_counts_nothing() {
        let p = params(0.0, DriveProtocol::quadrature(100.0, 100.0, 0.3));
        let b = sample_trajectories(&p, 200, 0.1, 7).unwrap();
        assert!(b.counts.iter().all(|&q| q == 0));
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let p = params(1000.0, DriveProtocol::quadrature(100.0, 100.0, 0.3));
        let a = sample_trajectories(&p, 300, 0.02, 11).unwrap();
        let b = sample_trajectories(&p, 300, 0.02, 11).unwrap();
        assert_eq!(a.counts, b.counts);
        let c = sample_trajectories(&p, 300, 0.02, 12).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn static_mean_rate_matches_flux() {
        let p = params(1000.0, DriveProtocol::undriven());
        let horizon = 0.05;
        let b = sample_trajectories(&p, 20_000, horizon, 3).unwrap();
        let r = p.rates_at(0.0);
        let flux = (r.left.beta * r.right.alpha - r.left.alpha * r.right.beta) / (r.emission() + r.absorption());
        // starting in the steady state, the mean count grows exactly linearly
        let z = (b.mean() - flux * horizon) / b.mean_standard_error();
        assert!(z.abs() < 3.0, "z = {z}");
    }

    #[test]
    fn driven_moments_match_propagator() {
        use crate::cumulants::{DerivativeScheme, Order};
        use crate::oracle::{finite_horizon_moments, stencil_runs, PropagatorSettings};
        let p = params(
            1000.0,
            DriveProtocol::quadrature(100.0, 100.0, std::f64::consts::FRAC_PI_4),
        );
        let scheme = DerivativeScheme::default();
        let settings = PropagatorSettings::default();
        let period = p.period().unwrap();
        let b = sample_trajectories(&p, 20_000, period, 5).unwrap();
        let mean = finite_horizon_moments(
            &stencil_runs(&p, Order::First, &scheme, 1, &settings).unwrap(),
            Order::First,
            &scheme,
        )
        .unwrap();
        let var = finite_horizon_moments(
            &stencil_runs(&p, Order::Second, &scheme, 1, &settings).unwrap(),
            Order::Second,
            &scheme,
        )
        .unwrap();
        let z_mean = (b.mean() - mean) / b.mean_standard_error();
        let z_var = (b.variance() - var) / b.variance_standard_error();
        assert!(z_mean.abs() < 3.0 && z_var.abs() < 3.0, "z = {z_mean}, {z_var}");
    }
}
