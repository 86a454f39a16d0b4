// SPDX-License-Identifier: Apache-2.0

//! Independent references for the adiabatic decomposition: direct
//! propagation of the tilted master equation and jump-trajectory sampling.

mod propagator;
mod sampler;

pub use propagator::{
    finite_horizon_moments, finite_time_cumulant, propagate, propagate_from, stencil_runs, time_unit, PropagationRun,
    PropagatorSettings, TRANSIENT_FRACTION,
};
pub use sampler::{sample_trajectories, TrajectoryBatch};
