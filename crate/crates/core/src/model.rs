// SPDX-License-Identifier: Apache-2.0

//! Physical parameters, driven temperatures, occupation factors and the
//! squeezed transition rates.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_B: f64 = 1.380_649e-23;

/// Converts an angular site frequency in THz into the temperature
/// equivalent ħω₀/k_B in Kelvin.
pub fn theta_from_omega_thz(omega0_thz: f64) -> f64 {
    HBAR * omega0_thz * 1e12 / K_B
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// One reservoir: coupling rate (THz), squeezing parameter and base
/// temperature (K).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub gamma: f64,
    pub squeeze: f64,
    pub base_temperature: f64,
}

impl BathSpec {
    pub fn new(gamma: f64, squeeze: f64, base_temperature: f64) -> Result<Self> {
        let bath = BathSpec {
            gamma,
            squeeze,
            base_temperature,
        };
        bath.validate()?;
        Ok(bath)
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        if !(self.squeeze.is_finite() && self.squeeze >= 0.0) {
            return Err(invalid(
                "squeeze",
                format!("must be finite and >= 0, got {}", self.squeeze),
            ));
        }
        if !(self.base_temperature.is_finite() && self.base_temperature > 0.0) {
            return Err(invalid(
                "base_temperature",
                format!("must be finite and > 0, got {}", self.base_temperature),
            ));
        }
        Ok(())
    }

    /// cosh(2x), the factor through which squeezing enters every rate.
    pub fn squeeze_factor(&self) -> f64 {
        (2.0 * self.squeeze).cosh()
    }
}

/// Harmonic modulation of both temperatures,
/// `T_ν(t) = T_ν⁰ + amplitude·cos(omega·t + phi_ν)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveProtocol {
    pub amplitude: f64,
    pub omega: f64,
    pub phi_left: f64,
    pub phi_right: f64,
}

impl DriveProtocol {
    /// Cosine drive on the left and sine drive on the right, both offset by
    /// `phase`. The orbit in the (T_ℓ, T_r) plane is a counter-clockwise
    /// circle.
    pub fn quadrature(amplitude: f64, omega: f64, phase: f64) -> Self {
        DriveProtocol {
            amplitude,
            omega,
            phi_left: phase,
            phi_right: phase - FRAC_PI_2,
        }
    }

    pub fn undriven() -> Self {
        DriveProtocol {
            amplitude: 0.0,
            omega: 0.0,
            phi_left: 0.0,
            phi_right: 0.0,
        }
    }

    /// Drive period in ps, `None` when undriven.
    pub fn period(&self) -> Option<f64> {
        (self.omega > 0.0).then(|| std::f64::consts::TAU / self.omega)
    }

    /// phi_left − phi_right. The enclosed loop area is proportional to its sine.
    pub fn relative_phase(&self) -> f64 {
        self.phi_left - self.phi_right
    }

    pub fn phase(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.phi_left,
            Side::Right => self.phi_right,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(invalid(
                "amplitude",
                format!("must be finite and >= 0, got {}", self.amplitude),
            ));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(invalid("omega", format!("must be finite and >= 0, got {}", self.omega)));
        }
        if !(self.phi_left.is_finite() && self.phi_right.is_finite()) {
            return Err(invalid("phase", "phases must be finite".into()));
        }
        Ok(())
    }
}

/// Complete, validated model. Immutable after construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    theta0: f64,
    left: BathSpec,
    right: BathSpec,
    drive: DriveProtocol,
}

impl ModelParams {
    /// `theta0` is ħω₀/k_B in Kelvin.
    pub fn new(theta0: f64, left: BathSpec, right: BathSpec, drive: DriveProtocol) -> Result<Self> {
        if !(theta0.is_finite() && theta0 > 0.0) {
            return Err(invalid("theta0", format!("must be finite and > 0, got {theta0}")));
        }
        left.validate()?;
        right.validate()?;
        drive.validate()?;
        if left.gamma + right.gamma <= 0.0 {
            return Err(invalid("gamma", "at least one reservoir must be coupled".into()));
        }
        for (side, bath) in [(Side::Left, &left), (Side::Right, &right)] {
            if bath.base_temperature - drive.amplitude <= 0.0 {
                return Err(invalid(
                    "amplitude",
                    format!(
                        "{side:?} temperature {} K minus amplitude {} K leaves the drive orbit non-positive",
                        bath.base_temperature, drive.amplitude
                    ),
                ));
            }
        }
        Ok(ModelParams {
            theta0,
            left,
            right,
            drive,
        })
    }

    /// Same as [`ModelParams::new`] with the site frequency given as an
    /// angular frequency in THz.
    pub fn from_omega0_thz(omega0_thz: f64, left: BathSpec, right: BathSpec, drive: DriveProtocol) -> Result<Self> {
        Self::new(theta_from_omega_thz(omega0_thz), left, right, drive)
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn left(&self) -> &BathSpec {
        &self.left
    }

    pub fn right(&self) -> &BathSpec {
        &self.right
    }

    pub fn bath(&self, side: Side) -> &BathSpec {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn drive(&self) -> &DriveProtocol {
        &self.drive
    }

    pub fn period(&self) -> Option<f64> {
        self.drive.period()
    }

    pub fn with_squeeze(&self, left: f64, right: f64) -> Result<Self> {
        let mut l = self.left;
        let mut r = self.right;
        l.squeeze = left;
        r.squeeze = right;
        Self::new(self.theta0, l, r, self.drive)
    }

    pub fn with_temperatures(&self, left: f64, right: f64) -> Result<Self> {
        let mut l = self.left;
        let mut r = self.right;
        l.base_temperature = left;
        r.base_temperature = right;
        Self::new(self.theta0, l, r, self.drive)
    }

    pub fn with_drive(&self, drive: DriveProtocol) -> Result<Self> {
        Self::new(self.theta0, self.left, self.right, drive)
    }

    pub fn with_baths(&self, left: BathSpec, right: BathSpec) -> Result<Self> {
        Self::new(self.theta0, left, right, self.drive)
    }

    /// Mirror image: reservoirs and their drive phases exchanged.
    pub fn mirrored(&self) -> Self {
        let mut drive = self.drive;
        std::mem::swap(&mut drive.phi_left, &mut drive.phi_right);
        ModelParams {
            theta0: self.theta0,
            left: self.right,
            right: self.left,
            drive,
        }
    }

    /// Unsqueezed, undriven model with the same couplings and base
    /// temperatures; the reference for scaled cumulants.
    pub fn reference(&self) -> Self {
        let mut left = self.left;
        let mut right = self.right;
        left.squeeze = 0.0;
        right.squeeze = 0.0;
        ModelParams {
            theta0: self.theta0,
            left,
            right,
            drive: DriveProtocol::undriven(),
        }
    }

    /// Temperature of one reservoir at time `t` (ps).
    pub fn temperature(&self, side: Side, t: f64) -> f64 {
        let bath = self.bath(side);
        bath.base_temperature + self.drive.amplitude * (self.drive.omega * t + self.drive.phase(side)).cos()
    }

    pub fn temperatures(&self, t: f64) -> (f64, f64) {
        (self.temperature(Side::Left, t), self.temperature(Side::Right, t))
    }

    /// Rates of one reservoir at time `t`.
    pub fn rates(&self, side: Side, t: f64) -> BathRates {
        let temp = self.temperature(side, t);
        self.bath_rates(side, temp)
    }

    /// Rates of both reservoirs at time `t`.
    pub fn rates_at(&self, t: f64) -> Rates {
        Rates {
            left: self.rates(Side::Left, t),
            right: self.rates(Side::Right, t),
        }
    }

    /// Rates with the reservoir temperatures pinned to arbitrary positive
    /// values, as needed for derivatives in the (T_ℓ, T_r) plane.
    pub fn rates_at_temperatures(&self, t_left: f64, t_right: f64) -> Result<Rates> {
        for temp in [t_left, t_right] {
            if !(temp > 0.0) {
                return Err(Error::Domain {
                    what: "temperature",
                    value: temp,
                });
            }
        }
        Ok(Rates {
            left: self.bath_rates(Side::Left, t_left),
            right: self.bath_rates(Side::Right, t_right),
        })
    }

    /// Squeezed occupation factor N_ν at temperature `temp`.
    pub fn occupation(&self, side: Side, temp: f64) -> f64 {
        let n = bose(self.theta0, temp);
        squeezed_occupation(n, self.bath(side).squeeze)
    }

    /// dN_ν/dT_ν at temperature `temp`.
    pub fn occupation_slope(&self, side: Side, temp: f64) -> f64 {
        occupation_slope(self.theta0, temp, self.bath(side).squeeze)
    }

    fn bath_rates(&self, side: Side, temp: f64) -> BathRates {
        BathRates::from_occupation(self.bath(side).gamma, self.occupation(side, temp))
    }
}

/// Emission (`alpha`, site → bath) and absorption (`beta`, bath → site)
/// rates of one reservoir.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathRates {
    pub alpha: f64,
    pub beta: f64,
}

impl BathRates {
    /// `alpha = γ(N + 1)`, `beta = γN`.
    pub fn from_occupation(gamma: f64, occupation: f64) -> Self {
        let beta = gamma * occupation;
        BathRates {
            alpha: beta + gamma,
            beta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub left: BathRates,
    pub right: BathRates,
}

impl Rates {
    pub fn side(&self, side: Side) -> BathRates {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    /// Total emission rate α_ℓ + α_r (exit rate of the occupied state).
    pub fn emission(&self) -> f64 {
        self.left.alpha + self.right.alpha
    }

    /// Total absorption rate β_ℓ + β_r (exit rate of the empty state).
    pub fn absorption(&self) -> f64 {
        self.left.beta + self.right.beta
    }
}

/// Bose–Einstein occupation `1/(exp(theta0/T) − 1)`.
pub fn bose_occupation(theta0: f64, temp: f64) -> Result<f64> {
    if !(temp > 0.0) || !temp.is_finite() {
        return Err(Error::Domain {
            what: "temperature",
            value: temp,
        });
    }
    Ok(bose(theta0, temp))
}

fn bose(theta0: f64, temp: f64) -> f64 {
    (theta0 / temp).exp_m1().recip()
}

/// Squeezed occupation `cosh(2x)(n + 1/2) − 1/2`.
pub fn squeezed_occupation(n: f64, x: f64) -> f64 {
    // cosh(2x) − 1 = 2 sinh²(x) keeps small squeezing exact
    let s = x.sinh();
    n + 2.0 * s * s * (n + 0.5)
}

/// dN/dT for the squeezed occupation, `cosh(2x)·(theta0/T²)·n(n + 1)`.
pub fn occupation_slope(theta0: f64, temp: f64, x: f64) -> f64 {
    let n = bose(theta0, temp);
    (2.0 * x).cosh() * theta0 / (temp * temp) * n * (n + 1.0)
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, LN_2, PI};

    fn fig1() -> ModelParams {
        ModelParams::from_omega0_thz(
            7.4 * PI,
            BathSpec::new(1000.0, 0.7, 300.0).unwrap(),
            BathSpec::new(1000.0, 0.0, 250.0).unwrap(),
            DriveProtocol::quadrature(100.0, 100.0, FRAC_PI_4),
        )
        .unwrap()
    }

    #[test]
    fn zero_amplitude_drive_is_static() {
        let p = fig1().with_drive(DriveProtocol::quadrature(0.0, 100.0, 0.3)).unwrap();
        for t in [0.0, 0.013, 1.7] {
            assert_eq!(p.temperature(Side::Left, t), 300.0);
        }
    }

    #[test]
    fn preset_temperature_at_origin() {
        let p = fig1();
        let expected = 300.0 + 100.0 * FRAC_PI_4.cos();
        assert!((p.temperature(Side::Left, 0.0) - expected).abs() < 1e-12);
        let tp = p.period().unwrap();
        assert!((p.temperature(Side::Left, tp) - expected).abs() < 1e-10);
        assert!((p.temperature(Side::Right, tp) - p.temperature(Side::Right, 0.0)).abs() < 1e-10);
    }

    #[test]
    fn bose_limits() {
        let t = 40.0;
        assert!((bose_occupation(t * LN_2, t).unwrap() - 1.0).abs() < 1e-14);
        assert!(bose_occupation(1.0, 1e-3).unwrap() < 1e-300);
        assert!(bose_occupation(1.0, 0.0).is_err());
        assert!(bose_occupation(1.0, -3.0).is_err());
    }

    #[test]
    fn theta_for_preset_frequency() {
        // ħ·7.4π·10¹² / k_B evaluated by hand from the CODATA values
        let theta = theta_from_omega_thz(7.4 * PI);
        assert!((theta - 177.571_993_605_748_4).abs() < 1e-9, "{theta}");
        let n = bose_occupation(theta, 300.0).unwrap();
        assert!((n - 1.238_495_518_176_987).abs() < 1e-12, "{n}");
    }

    #[test]
    fn squeezed_occupation_values() {
        assert_eq!(squeezed_occupation(0.37, 0.0), 0.37);
        let x = 0.45f64;
        assert!((squeezed_occupation(0.0, x) - ((2.0 * x).cosh() - 1.0) / 2.0).abs() < 1e-15);
        // cosh(1.4)·1.5 − 0.5 with cosh(1.4) = 2.1508984653931407 (50-digit reference)
        let v = squeezed_occupation(1.0, 0.7);
        assert!((v - 2.726_347_698_089_711).abs() < 1e-14, "{v}");
    }

    #[test]
    fn unsqueezed_rates_reduce_to_detailed_balance_pair() {
        let p = fig1().with_squeeze(0.0, 0.0).unwrap();
        let t = 0.01;
        let n = bose_occupation(p.theta0(), p.temperature(Side::Left, t)).unwrap();
        let r = p.rates(Side::Left, t);
        assert!((r.alpha - 1000.0 * (n + 1.0)).abs() < 1e-9);
        assert!((r.beta - 1000.0 * n).abs() < 1e-9);
    }

    #[test]
    fn preset_rates_compose_occupation_functions() {
        let p = fig1();
        let temp = 300.0 + 100.0 * FRAC_PI_4.cos();
        let n = bose_occupation(p.theta0(), temp).unwrap();
        let big_n = squeezed_occupation(n, 0.7);
        let r = p.rates(Side::Left, 0.0);
        assert!((r.beta / (1000.0 * big_n) - 1.0).abs() < 1e-14);
        assert!((r.alpha / (1000.0 * (big_n + 1.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orbit_must_stay_positive() {
        let err = ModelParams::new(
            10.0,
            BathSpec::new(1.0, 0.0, 50.0).unwrap(),
            BathSpec::new(1.0, 0.0, 300.0).unwrap(),
            DriveProtocol::quadrature(100.0, 1.0, 0.0),
        );
        assert!(matches!(err, Err(Error::InvalidParameter { name: "amplitude", .. })));
        assert!(BathSpec::new(1.0, -0.1, 300.0).is_err());
        assert!(BathSpec::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn mirror_exchanges_rates() {
        let p = fig1().with_drive(DriveProtocol {
            amplitude: 40.0,
            omega: 3.0,
            phi_left: 0.2,
            phi_right: 1.1,
        });
        let p = p.unwrap();
        let m = p.mirrored();
        for t in [0.0, 0.3, 1.9] {
            assert_eq!(p.rates(Side::Left, t), m.rates(Side::Right, t));
            assert_eq!(p.rates(Side::Right, t), m.rates(Side::Left, t));
        }
    }

    #[test]
    fn occupation_slope_matches_difference_quotient() {
        let (theta, temp, x) = (177.57, 280.0, 0.6);
        let h = 1e-3;
        let fd =
            (squeezed_occupation(bose(theta, temp + h), x) - squeezed_occupation(bose(theta, temp - h), x)) / (2.0 * h);
        assert!((occupation_slope(theta, temp, x) / fd - 1.0).abs() < 1e-8);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = ModelParams> {
            (
                1.0..500.0f64,
                0.1..2000.0f64,
                0.1..2000.0f64,
                0.0..3.0f64,
                0.0..3.0f64,
                50.0..400.0f64,
                50.0..400.0f64,
                0.0..0.95f64,
                0.1..200.0f64,
                -3.0..3.0f64,
                -3.0..3.0f64,
            )
                .prop_map(|(theta, gl, gr, xl, xr, tl, tr, frac, om, pl, pr)| {
                    let amp = frac * tl.min(tr);
                    ModelParams::new(
                        theta,
                        BathSpec::new(gl, xl, tl).unwrap(),
                        BathSpec::new(gr, xr, tr).unwrap(),
                        DriveProtocol {
                            amplitude: amp,
                            omega: om,
                            phi_left: pl,
                            phi_right: pr,
                        },
                    )
                    .unwrap()
                })
        }

        proptest! {
            #[test]
            fn rate_structure(p in params(), t in 0.0..10.0f64) {
                for side in [Side::Left, Side::Right] {
                    let r = p.rates(side, t);
                    let gamma = p.bath(side).gamma;
                    prop_assert!((r.alpha - r.beta - gamma).abs() <= 4.0 * f64::EPSILON * r.alpha);
                    prop_assert!(r.beta >= 0.0 && r.beta < r.alpha);
                    let ratio = r.beta / r.alpha;
                    prop_assert!((0.0..1.0).contains(&ratio));
                }
            }

            #[test]
            fn rates_periodic(p in params(), t in 0.0..10.0f64) {
                let tp = p.period().unwrap();
                for side in [Side::Left, Side::Right] {
                    let a = p.rates(side, t);
                    let b = p.rates(side, t + tp);
                    prop_assert!((a.alpha - b.alpha).abs() <= 1e-9 * a.alpha);
                    prop_assert!((a.beta - b.beta).abs() <= 1e-9 * a.alpha);
                }
            }

            #[test]
            fn rates_increase_with_squeezing(p in params(), t in 0.0..5.0f64, dx in 0.01..1.0f64) {
                let q = p.with_squeeze(p.left().squeeze + dx, p.right().squeeze).unwrap();
                let a = p.rates(Side::Left, t);
                let b = q.rates(Side::Left, t);
                if p.left().gamma > 0.0 {
                    prop_assert!(b.alpha > a.alpha && b.beta > a.beta);
                }
            }

            #[test]
            fn exchange_covariance(p in params(), t in 0.0..10.0f64) {
                let m = p.mirrored();
                prop_assert_eq!(p.rates(Side::Left, t), m.rates(Side::Right, t));
                prop_assert_eq!(p.rates(Side::Right, t), m.rates(Side::Left, t));
            }
        }
    }
}
