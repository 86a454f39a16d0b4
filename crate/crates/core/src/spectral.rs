// SPDX-License-Identifier: Apache-2.0

//! The counting-field-tilted 2×2 generator and its dominant eigenpair.
//!
//! Basis order is (occupied, empty). The counting field λ tags transfers
//! with the left reservoir: absorption from the left carries `e^{λ}`,
//! emission into the left carries `e^{−λ}`, so λ counts the net number of
//! bosons taken from the left reservoir and positive flux means net
//! left → right transport.
//!
//! Gauge: the right eigenvector is scaled so its components sum to one at
//! every λ; the left eigenvector absorbs the biorthogonal normalization.

use crate::model::{ModelParams, Rates};
use crate::{Error, Result};

const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedGenerator {
    matrix: [[f64; 2]; 2],
    rates: Rates,
    lambda: f64,
    time: Option<f64>,
}

impl TiltedGenerator {
    /// Generator built from explicit rates (no time attached).
    pub fn from_rates(rates: Rates, lambda: f64) -> Self {
        let (l, r) = (rates.left, rates.right);
        let matrix = [
            [-(l.alpha + r.alpha), l.beta * lambda.exp() + r.beta],
            [l.alpha * (-lambda).exp() + r.alpha, -(l.beta + r.beta)],
        ];
        TiltedGenerator {
            matrix,
            rates,
            lambda,
            time: None,
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.matrix
    }

    pub fn rates(&self) -> &Rates {
        &self.rates
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn time(&self) -> Option<f64> {
        self.time
    }

    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn determinant(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// `pq − ab` written without cancellation:
    /// `β_ℓα_r(e^{λ} − 1) + α_ℓβ_r(e^{−λ} − 1)`. Vanishes identically at λ = 0.
    fn tilt(&self) -> f64 {
        let (l, r) = (self.rates.left, self.rates.right);
        l.beta * r.alpha * self.lambda.exp_m1() + l.alpha * r.beta * (-self.lambda).exp_m1()
    }

    /// Half the eigenvalue gap, `sqrt((a − b)²/4 + M₀₁M₁₀)`.
    fn half_gap(&self) -> f64 {
        let a = self.rates.emission();
        let b = self.rates.absorption();
        (0.5 * (a - b)).hypot((self.matrix[0][1] * self.matrix[1][0]).sqrt())
    }
}

/// Tilted generator at counting field `lambda` and time `t`.
pub fn build_generator(params: &ModelParams, lambda: f64, t: f64) -> TiltedGenerator {
    let mut generator = TiltedGenerator::from_rates(params.rates_at(t), lambda);
    generator.time = Some(t);
    generator
}

/// The algebraically larger eigenvalue ζ₀(λ, t).
///
/// Evaluated as `tilt/((a + b)/2 + D)` which equals `−(a + b)/2 + D` but is
/// exactly zero at λ = 0 and keeps full relative precision nearby.
pub fn dominant_eigenvalue(generator: &TiltedGenerator) -> f64 {
    let half_sum = 0.5 * (generator.rates.emission() + generator.rates.absorption());
    generator.tilt() / (half_sum + generator.half_gap())
}

/// The other root, ζ₁ = −(a + b)/2 − D.
pub fn companion_eigenvalue(generator: &TiltedGenerator) -> f64 {
    let half_sum = 0.5 * (generator.rates.emission() + generator.rates.absorption());
    -half_sum - generator.half_gap()
}

/// Dominant eigenvalue with its biorthonormal eigenvectors in the fixed gauge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem {
    pub zeta0: f64,
    pub zeta1: f64,
    /// ⟨L₀|, normalized so ⟨L₀|R₀⟩ = 1.
    pub left: [f64; 2],
    /// |R₀⟩, components sum to one.
    pub right: [f64; 2],
    /// L₀[0] − L₀[1], computed without cancellation. Zero at λ = 0.
    pub left_difference: f64,
}

pub fn eigensystem(generator: &TiltedGenerator) -> Result<EigenSystem> {
    let zeta0 = dominant_eigenvalue(generator);
    let zeta1 = companion_eigenvalue(generator);
    let gap = zeta0 - zeta1;
    if !(gap > DEGENERACY_THRESHOLD * (zeta0.abs() + zeta1.abs())) {
        return Err(Error::Degenerate { gap });
    }

    let a = generator.rates.emission();
    let p = generator.matrix[0][1];
    let shifted = a + zeta0;
    // (M − ζ₀)R = 0  ⇒  R ∝ (p, a + ζ₀);  L(M − ζ₀) = 0  ⇒  L ∝ (q, a + ζ₀).
    let r0 = p / (p + shifted);
    let right = [r0, 1.0 - r0];

    // ρ − 1 with ρ = q/(a + ζ₀); q − a = α_ℓ(e^{−λ} − 1).
    let l = generator.rates.left;
    let excess = (l.alpha * (-generator.lambda).exp_m1() - zeta0) / shifted;
    let l1 = 1.0 / (1.0 + excess * r0);
    let left_difference = excess * l1;
    let left = [l1 + left_difference, l1];

    Ok(EigenSystem {
        zeta0,
        zeta1,
        left,
        right,
        left_difference,
    })
}

/// Instantaneous steady state at time `t` (right null vector at λ = 0).
pub fn steady_state(params: &ModelParams, t: f64) -> [f64; 2] {
    let rates = params.rates_at(t);
    let a = rates.emission();
    let b = rates.absorption();
    [b / (a + b), a / (a + b)]
}
