// SPDX-License-Identifier: Apache-2.0

//! Curvature of the adiabatic connection `A = ⟨L₀|dR₀⟩` in the
//! (T_ℓ, T_r) plane.

use serde::{Deserialize, Serialize};

use crate::model::{bose_occupation, ModelParams, Rates, Side};
use crate::spectral::{eigensystem, TiltedGenerator};
use crate::{Error, Result};

/// Relative temperature step for first-principles derivatives.
const TEMPERATURE_STEP: f64 = 1e-3;

/// Auxiliaries of the closed-form curvature at one temperature pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Auxiliaries {
    /// γ_ℓγ_r(γ_ℓ + γ_r).
    pub gamma: f64,
    /// dN_ν/dT_ν.
    pub c_left: f64,
    pub c_right: f64,
    /// Σ_ν γ_ν cosh(2x_ν)(2n_ν + 1), the total relaxation rate.
    pub k: f64,
    #[serde(skip)]
    rates: Rates,
}

impl Auxiliaries {
    pub fn new(params: &ModelParams, t_left: f64, t_right: f64) -> Result<Self> {
        let rates = params.rates_at_temperatures(t_left, t_right)?;
        let (gl, gr) = (params.left().gamma, params.right().gamma);
        Ok(Auxiliaries {
            gamma: gl * gr * (gl + gr),
            c_left: params.occupation_slope(Side::Left, t_left),
            c_right: params.occupation_slope(Side::Right, t_right),
            k: rates.emission() + rates.absorption(),
            rates,
        })
    }

    /// `f(λ) = β_ℓα_r(e^{λ} − 1) + α_ℓβ_r(e^{−λ} − 1)`.
    pub fn f(&self, lambda: f64) -> f64 {
        let (l, r) = (self.rates.left, self.rates.right);
        l.beta * r.alpha * lambda.exp_m1() + l.alpha * r.beta * (-lambda).exp_m1()
    }
}

/// Closed-form curvature
/// `F(λ) = −2Γ C_ℓ C_r sinh(λ) / (K² + 4f(λ))^{3/2}`.
pub fn curvature(params: &ModelParams, lambda: f64, t_left: f64, t_right: f64) -> Result<f64> {
    let aux = Auxiliaries::new(params, t_left, t_right)?;
    let gap_sq = aux.k * aux.k + 4.0 * aux.f(lambda);
    Ok(-2.0 * aux.gamma * aux.c_left * aux.c_right * lambda.sinh() / (gap_sq * gap_sq.sqrt()))
}

/// Which temperature the second exponential of the printed `f(λ)` uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrintedReading {
    /// Both exponentials at T_ℓ, as typeset.
    AsPrinted,
    /// Second exponential at T_r.
    Swapped,
}

/// Literal transcription of the printed curvature with its own `C_ν`, `K`
/// and `f(λ)`. Kept for comparison only.
pub fn curvature_printed(
    params: &ModelParams,
    lambda: f64,
    t_left: f64,
    t_right: f64,
    reading: PrintedReading,
) -> Result<f64> {
    let theta = params.theta0();
    let mut c = [0.0; 2];
    let mut k = 0.0;
    let mut product = 1.0;
    for (i, (side, temp)) in [(Side::Left, t_left), (Side::Right, t_right)].into_iter().enumerate() {
        let bath = params.bath(side);
        let n = bose_occupation(theta, temp)?;
        let ch = bath.squeeze_factor();
        let occupation = (n + 0.5) * ch - 0.5;
        c[i] = theta / (temp * temp) * (theta / temp).exp() * occupation;
        k += bath.gamma * 2.0 * ch * (n + 0.5);
        product *= bath.gamma * occupation;
    }
    let second = match reading {
        PrintedReading::AsPrinted => t_left,
        PrintedReading::Swapped => t_right,
    };
    let f = product * (theta / t_left).exp() * lambda.exp_m1() + (theta / second).exp() * (-lambda).exp_m1();
    let (gl, gr) = (params.left().gamma, params.right().gamma);
    let gamma = gl * gr * (gl + gr);
    let base = k + 4.0 * f;
    if !(base > 0.0) {
        return Err(Error::Domain {
            what: "printed curvature denominator",
            value: base,
        });
    }
    Ok(-2.0 * gamma * c[0] * c[1] * lambda.sin() / base.powf(1.5))
}

/// `(L₀[0] − L₀[1], R₀[0])` at pinned temperatures.
fn frame(params: &ModelParams, lambda: f64, t_left: f64, t_right: f64) -> Result<(f64, f64)> {
    let rates = params.rates_at_temperatures(t_left, t_right)?;
    let es = eigensystem(&TiltedGenerator::from_rates(rates, lambda))?;
    Ok((es.left_difference, es.right[0]))
}

/// Fourth-order central difference of the frame along one temperature.
fn frame_slope(params: &ModelParams, lambda: f64, t_left: f64, t_right: f64, side: Side) -> Result<(f64, f64)> {
    let base = match side {
        Side::Left => t_left,
        Side::Right => t_right,
    };
    let h = TEMPERATURE_STEP * base;
    let at = |offset: f64| match side {
        Side::Left => frame(params, lambda, t_left + offset, t_right),
        Side::Right => frame(params, lambda, t_left, t_right + offset),
    };
    let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
    let d = |a: f64, b: f64, c: f64, e: f64| (8.0 * (a - b) - (c - e)) / (12.0 * h);
    Ok((d(p1.0, m1.0, p2.0, m2.0), d(p1.1, m1.1, p2.1, m2.1)))
}

/// Curvature from finite differences of the gauge-fixed eigenvectors,
/// `∂_ℓ⟨L₀| ∂_r|R₀⟩ − ∂_r⟨L₀| ∂_ℓ|R₀⟩`.
pub fn curvature_first_principles(params: &ModelParams, lambda: f64, t_left: f64, t_right: f64) -> Result<f64> {
    let (dl_left, dr_left) = frame_slope(params, lambda, t_left, t_right, Side::Left)?;
    let (dl_right, dr_right) = frame_slope(params, lambda, t_left, t_right, Side::Right)?;
    // ∂R₀[1] = −∂R₀[0], so ⟨∂L|∂R⟩ = ∂(L₀[0] − L₀[1]) ∂R₀[0].
    Ok(dl_left * dr_right - dl_right * dr_left)
}
