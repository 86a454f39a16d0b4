// SPDX-License-Identifier: Apache-2.0

//! Finite-time propagation of the tilted master equation
//! `∂_t ρ = M(λ, t) ρ` with an adaptive fourth-order Magnus integrator.
//!
//! The state is renormalized after every step and the logarithm of the
//! discarded norm is accumulated, so `ln Σρ` stays representable over long
//! horizons.

use serde::{Deserialize, Serialize};

use crate::cumulants::{lambda_derivative, DerivativeScheme, Order};
use crate::model::ModelParams;
use crate::spectral::{build_generator, steady_state};
use crate::{Error, Result};

type Mat = [[f64; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSettings {
    /// Number of equal steps per period tried first.
    pub steps_per_period: usize,
    /// Local error tolerance per unit time, relative to the period.
    pub tol: f64,
    /// Time unit used in place of the period when undriven, in units of the
    /// inverse total relaxation rate.
    pub static_period_relaxations: f64,
}

impl Default for PropagatorSettings {
    fn default() -> Self {
        PropagatorSettings {
            steps_per_period: 64,
            tol: 1e-12,
            static_period_relaxations: 20.0,
        }
    }
}

/// Result of one propagation at fixed λ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationRun {
    pub lambda: f64,
    pub periods: usize,
    /// Period (or static time unit) in ps.
    pub period: f64,
    pub initial_state: [f64; 2],
    /// `(t, ln Σρ(t))` at t = 0 and after every period.
    pub log_norm_trace: Vec<(f64, f64)>,
    /// Normalized state at the end of the run.
    pub final_state: [f64; 2],
    pub steps: usize,
}

impl PropagationRun {
    pub fn log_norm(&self, period: usize) -> f64 {
        self.log_norm_trace[period].1
    }
}

/// Recording interval: the drive period, or a multiple of the relaxation
/// time when undriven.
pub fn time_unit(params: &ModelParams, settings: &PropagatorSettings) -> f64 {
    match params.period().filter(|_| params.drive().amplitude > 0.0) {
        Some(p) => p,
        None => {
            let r = params.rates_at(0.0);
            settings.static_period_relaxations / (r.emission() + r.absorption())
        }
    }
}

/// Propagates from the instantaneous steady state at t = 0.
pub fn propagate(
    params: &ModelParams,
    lambda: f64,
    periods: usize,
    settings: &PropagatorSettings,
) -> Result<PropagationRun> {
    propagate_from(params, lambda, periods, steady_state(params, 0.0), settings)
}

pub fn propagate_from(
    params: &ModelParams,
    lambda: f64,
    periods: usize,
    initial_state: [f64; 2],
    settings: &PropagatorSettings,
) -> Result<PropagationRun> {
    if periods == 0 || settings.steps_per_period == 0 {
        return Err(Error::InvalidParameter {
            name: "periods",
            reason: "need at least one period and one step".into(),
        });
    }
    let period = time_unit(params, settings);
    let norm0: f64 = initial_state.iter().sum();
    if !(norm0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "initial_state",
            reason: "must have positive total weight".into(),
        });
    }
    let mut state = [initial_state[0] / norm0, initial_state[1] / norm0];
    let mut log_norm = norm0.ln();
    let mut trace = Vec::with_capacity(periods + 1);
    trace.push((0.0, log_norm));
    let generator = |t: f64| build_generator(params, lambda, t).matrix();
    let mut h = period / settings.steps_per_period as f64;
    let min_step = period * 1e-12;
    let mut steps = 0;
    for k in 0..periods {
        let start = k as f64 * period;
        let end = start + period;
        let mut t = start;
        while t < end {
            let step = h.min(end - t);
            let (full, full_log) = magnus_step(&generator, t, step, state);
            let (half, half_log) = magnus_step(&generator, t, 0.5 * step, state);
            let (two, two_log) = magnus_step(&generator, t + 0.5 * step, 0.5 * step, half);
            let two_log = half_log + two_log;
            let err = (two_log - full_log).abs() + (two[0] - full[0]).abs() + (two[1] - full[1]).abs();
            let allowed = settings.tol * step / period + 8.0 * f64::EPSILON;
            if err <= allowed || step <= min_step {
                if step <= min_step && err > allowed {
                    return Err(Error::StepControl { t, step });
                }
                // Richardson correction for a fifth-order local error
                let correct = |fine: f64, coarse: f64| fine + (fine - coarse) / 15.0;
                let s = [correct(two[0], full[0]), correct(two[1], full[1])];
                let sum = s[0] + s[1];
                state = [s[0] / sum, s[1] / sum];
                log_norm += correct(two_log, full_log) + sum.ln();
                t += step;
                steps += 1;
                let grow = if err == 0.0 {
                    2.0
                } else {
                    (0.9 * (allowed / err).powf(0.2)).clamp(0.2, 2.0)
                };
                if step == h {
                    h *= grow;
                }
            } else {
                h = step * (0.9 * (allowed / err).powf(0.2)).clamp(0.1, 0.5);
            }
            if !log_norm.is_finite() {
                return Err(Error::StepControl { t, step });
            }
        }
        trace.push((end, log_norm));
    }
    Ok(PropagationRun {
        lambda,
        periods,
        period,
        initial_state,
        log_norm_trace: trace,
        final_state: state,
        steps,
    })
}

/// One fourth-order Magnus step from `t` to `t + h`. Returns the
/// normalized state and the log of its norm.
fn magnus_step<G>(generator: &G, t: f64, h: f64, state: [f64; 2]) -> ([f64; 2], f64)
where
    G: Fn(f64) -> Mat,
{
    let c = 3f64.sqrt() / 6.0;
    let a1 = generator(t + (0.5 - c) * h);
    let a2 = generator(t + (0.5 + c) * h);
    let comm = commutator(&a2, &a1);
    let w = 3f64.sqrt() * h * h / 12.0;
    let mut omega = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            omega[i][j] = 0.5 * h * (a1[i][j] + a2[i][j]) + w * comm[i][j];
        }
    }
    let (e, shift) = expm_scaled(&omega);
    let v = [
        e[0][0] * state[0] + e[0][1] * state[1],
        e[1][0] * state[0] + e[1][1] * state[1],
    ];
    let sum = v[0] + v[1];
    ([v[0] / sum, v[1] / sum], shift + sum.ln())
}

fn commutator(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = (0..2).map(|k| a[i][k] * b[k][j] - b[i][k] * a[k][j]).sum();
        }
    }
    c
}

/// `exp(X) = e^{shift}·E`, with `shift` the largest real eigenvalue part.
fn expm_scaled(x: &Mat) -> (Mat, f64) {
    let half_trace = 0.5 * (x[0][0] + x[1][1]);
    let p = 0.5 * (x[0][0] - x[1][1]);
    let disc = p * p + x[0][1] * x[1][0];
    // exp(X) = e^{m}[c(δ) I + s(δ)(X − m I)], δ² = disc
    let (shift, c, s) = if disc > 1e-8 {
        let d = disc.sqrt();
        // e^{m}cosh δ = e^{m+δ}(1 + e^{−2δ})/2
        let decay = (-2.0 * d).exp();
        (half_trace + d, 0.5 * (1.0 + decay), 0.5 * (1.0 - decay) / d)
    } else if disc < -1e-8 {
        let d = (-disc).sqrt();
        (half_trace, d.cos(), d.sin() / d)
    } else {
        // series in δ², accurate to well below roundoff for |δ²| ≤ 1e−8
        let c = 1.0 + disc / 2.0 + disc * disc / 24.0;
        let s = 1.0 + disc / 6.0 + disc * disc / 120.0;
        (half_trace, c, s)
    };
    let e = [
        [c + s * (x[0][0] - half_trace), s * x[0][1]],
        [s * x[1][0], c + s * (x[1][1] - half_trace)],
    ];
    (e, shift)
}

/// Fraction of the periods discarded as transient.
pub const TRANSIENT_FRACTION: f64 = 0.2;

/// Per-time cumulant from runs at the stencil points of `scheme`, using the
/// log-norm slope after the transient.
pub fn finite_time_cumulant(runs: &[PropagationRun], order: Order, scheme: &DerivativeScheme) -> Result<f64> {
    let stencil = scheme.stencil(order);
    let first = runs
        .first()
        .ok_or_else(|| Error::StencilMismatch("no runs supplied".into()))?;
    let periods = first.periods;
    for run in runs {
        if run.periods != periods || run.period != first.period {
            return Err(Error::StencilMismatch("runs cover different horizons".into()));
        }
    }
    for &l in &stencil {
        if !runs.iter().any(|r| r.lambda == l) {
            return Err(Error::StencilMismatch(format!("no run at lambda = {l}")));
        }
    }
    let skip = ((TRANSIENT_FRACTION * periods as f64).ceil() as usize).min(periods - 1);
    let span = (periods - skip) as f64 * first.period;
    let slope = |l: f64| {
        runs.iter()
            .find(|r| r.lambda == l)
            .map(|r| (r.log_norm(periods) - r.log_norm(skip)) / span)
            .unwrap_or(f64::NAN)
    };
    Ok(lambda_derivative(slope, order, scheme)?.value)
}

/// Runs at every stencil point of `scheme` for `order`.
pub fn stencil_runs(
    params: &ModelParams,
    order: Order,
    scheme: &DerivativeScheme,
    periods: usize,
    settings: &PropagatorSettings,
) -> Result<Vec<PropagationRun>> {
    use rayon::prelude::*;
    scheme
        .stencil(order)
        .into_par_iter()
        .map(|l| propagate(params, l, periods, settings))
        .collect()
}

/// Mean and variance of the counted number over the whole horizon, from
/// λ-derivatives of `ln Σρ(T)`.
pub fn finite_horizon_moments(runs: &[PropagationRun], order: Order, scheme: &DerivativeScheme) -> Result<f64> {
    let first = runs
        .first()
        .ok_or_else(|| Error::StencilMismatch("no runs supplied".into()))?;
    let periods = first.periods;
    let value = |l: f64| {
        runs.iter()
            .find(|r| r.lambda == l && r.periods == periods)
            .map(|r| r.log_norm(periods))
            .unwrap_or(f64::NAN)
    };
    for l in scheme.stencil(order) {
        if value(l).is_nan() {
            return Err(Error::StencilMismatch(format!("no run at lambda = {l}")));
        }
    }
    Ok(lambda_derivative(value, order, scheme)?.value)
}
