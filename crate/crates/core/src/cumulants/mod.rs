// SPDX-License-Identifier: Apache-2.0

//! Dynamic cumulants: period averages of λ-derivatives of the dominant
//! eigenvalue, plus the shared derivative and quadrature machinery.

mod derivative;
mod quadrature;

pub use derivative::{lambda_derivative, DerivativeScheme, Estimate, Order};
pub use quadrature::{integrate, integrate_polar, DiskSpec, Integral, QuadratureSpec};

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::spectral::{build_generator, dominant_eigenvalue};
use crate::{Error, Result};

/// Numerical settings shared by every cumulant route.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub quadrature: QuadratureSpec,
    pub derivative: DerivativeScheme,
    pub disk: DiskSpec,
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.disk.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Dynamic,
    Geometric,
}

/// One drive period `[t0, t0 + t_p]`, shifted so the time-reversal map that
/// accompanies a left/right exchange sends quadrature nodes onto nodes.
pub fn period_window(params: &ModelParams) -> Option<(f64, f64)> {
    let period = params.period()?;
    let drive = params.drive();
    let t0 = -0.5 * (drive.phi_left + drive.phi_right) / drive.omega;
    Some((t0, t0 + period))
}

fn is_static(params: &ModelParams) -> bool {
    params.period().is_none() || params.drive().amplitude == 0.0
}

/// Period average `⟨f(t)⟩` over one drive period; `f(0)` when static.
pub fn period_average<F>(params: &ModelParams, quad: &QuadratureSpec, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if is_static(params) {
        return f(0.0);
    }
    let (a, b) = period_window(params).ok_or(Error::Undriven)?;
    Ok(integrate(quad, a, b, f)?.value / (b - a))
}

/// Dynamic CGF `S_d(λ) = ⟨ζ₀(λ, t)⟩_t`.
pub fn dynamic_cgf(params: &ModelParams, lambda: f64, quad: &QuadratureSpec) -> Result<f64> {
    period_average(params, quad, |t| {
        Ok(dominant_eigenvalue(&build_generator(params, lambda, t)))
    })
}

/// `∂ⁿ_λ ζ₀(λ, t)` at λ = 0.
pub fn instantaneous_cumulant(
    params: &ModelParams,
    t: f64,
    order: Order,
    scheme: &DerivativeScheme,
) -> Result<Estimate> {
    lambda_derivative(|l| dominant_eigenvalue(&build_generator(params, l, t)), order, scheme)
}

/// Dynamic cumulant `j_d⁽ⁿ⁾` in 1/ps.
pub fn dynamic_cumulant(params: &ModelParams, order: Order, numerics: &Numerics) -> Result<f64> {
    period_average(params, &numerics.quadrature, |t| {
        Ok(instantaneous_cumulant(params, t, order, &numerics.derivative)?.value)
    })
}

/// Cumulant of the unsqueezed, undriven model at the same base temperatures.
pub fn reference_cumulant(params: &ModelParams, order: Order, numerics: &Numerics) -> Result<f64> {
    dynamic_cumulant(&params.reference(), order, numerics)
}

/// `C⁽ⁿ⁾ = j⁽ⁿ⁾/j_o⁽ⁿ⁾`. Fails when the reference vanishes, which for the
/// flux means it is below `1e−10` of the reference noise.
pub fn scaled_cumulant(params: &ModelParams, kind: Kind, order: Order, numerics: &Numerics) -> Result<f64> {
    let reference = reference_cumulant(params, order, numerics)?;
    let scale = match order {
        Order::First => 1e-10 * reference_cumulant(params, Order::Second, numerics)?,
        Order::Second => 0.0,
    };
    if reference.abs() <= scale || reference == 0.0 {
        return Err(Error::ReferenceZero { order: order.as_u32() });
    }
    let value = match kind {
        Kind::Dynamic => dynamic_cumulant(params, order, numerics)?,
        Kind::Geometric => {
            crate::geometry::geometric_cumulant(params, order, crate::geometry::Route::default(), numerics)?
        }
    };
    Ok(value / reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, DriveProtocol};
    use std::f64::consts::FRAC_PI_4;

    fn preset(tl: f64, tr: f64, xl: f64, xr: f64) -> ModelParams {
        ModelParams::from_omega0_thz(
            7.4 * std::f64::consts::PI,
            BathSpec::new(1000.0, xl, tl).unwrap(),
            BathSpec::new(1000.0, xr, tr).unwrap(),
            DriveProtocol::quadrature(100.0, 100.0, FRAC_PI_4),
        )
        .unwrap()
    }

    fn static_flux(p: &ModelParams) -> f64 {
        let r = p.rates_at(0.0);
        (r.left.beta * r.right.alpha - r.left.alpha * r.right.beta) / (r.emission() + r.absorption())
    }

    #[test]
    fn derivative_matches_hand_differentiated_root() {
        let p = preset(300.0, 250.0, 0.7, 0.0);
        let d = instantaneous_cumulant(&p, 0.0, Order::First, &DerivativeScheme::default()).unwrap();
        let exact = static_flux(&p);
        assert!((d.value - exact).abs() <= 1e-10 * exact.abs(), "{} vs {exact}", d.value);
    }

    #[test]
    fn static_flux_and_noise_closed_forms() {
        let p = preset(300.0, 250.0, 0.3, 0.1).reference();
        let n = Numerics::default();
        let r = p.rates_at(0.0);
        let k = r.emission() + r.absorption();
        let (bl, ar, al, br) = (r.left.beta, r.right.alpha, r.left.alpha, r.right.beta);
        let flux = (bl * ar - al * br) / k;
        let noise = (bl * ar + al * br) / k - 2.0 * (bl * ar - al * br).powi(2) / k.powi(3);
        assert!((dynamic_cumulant(&p, Order::First, &n).unwrap() - flux).abs() < 1e-10 * flux.abs());
        assert!((dynamic_cumulant(&p, Order::Second, &n).unwrap() - noise).abs() < 1e-8 * noise);
    }

    #[test]
    fn equilibrium_has_no_flux() {
        let p = preset(300.0, 300.0, 0.0, 0.0).reference();
        let j = dynamic_cumulant(&p, Order::First, &Numerics::default()).unwrap();
        assert!(j.abs() < 1e-12, "{j}");
    }

    #[test]
    fn exchange_symmetry_at_equal_temperatures() {
        let n = Numerics::default();
        let a = preset(300.0, 300.0, 0.7, 0.2);
        let b = preset(300.0, 300.0, 0.2, 0.7);
        let (f1, f2) = (
            dynamic_cumulant(&a, Order::First, &n).unwrap(),
            dynamic_cumulant(&b, Order::First, &n).unwrap(),
        );
        assert!((f1 + f2).abs() <= 1e-9 * f1.abs(), "{f1} {f2}");
        let (s1, s2) = (
            dynamic_cumulant(&a, Order::Second, &n).unwrap(),
            dynamic_cumulant(&b, Order::Second, &n).unwrap(),
        );
        assert!((s1 - s2).abs() <= 1e-9 * s1, "{s1} {s2}");
    }

    #[test]
    fn saturates_in_squeezing() {
        let n = Numerics::default();
        for order in Order::both() {
            let j4 = dynamic_cumulant(&preset(300.0, 250.0, 4.0, 0.5), order, &n).unwrap();
            let j5 = dynamic_cumulant(&preset(300.0, 250.0, 5.0, 0.5), order, &n).unwrap();
            assert!(((j5 - j4) / j4).abs() < 0.02, "{order:?}: {j4} {j5}");
        }
    }

    #[test]
    fn small_amplitude_approaches_static() {
        let n = Numerics::default();
        let base = preset(300.0, 250.0, 0.7, 0.0);
        let stat = dynamic_cumulant(&base.reference().with_squeeze(0.7, 0.0).unwrap(), Order::First, &n).unwrap();
        let mut gaps = Vec::new();
        for amp in [10.0, 1.0, 0.1] {
            let p = base
                .with_drive(DriveProtocol::quadrature(amp, 100.0, FRAC_PI_4))
                .unwrap();
            gaps.push((dynamic_cumulant(&p, Order::First, &n).unwrap() - stat).abs());
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        assert!(gaps[2] < 1e-4 * stat.abs());
    }

    #[test]
    fn scaled_cumulants() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.0, 0.0)
            .with_drive(DriveProtocol::undriven())
            .unwrap();
        for order in Order::both() {
            let c = scaled_cumulant(&p, Kind::Dynamic, order, &n).unwrap();
            assert!((c - 1.0).abs() < 1e-12);
        }
        let eq = preset(300.0, 300.0, 0.7, 0.0);
        assert_eq!(
            scaled_cumulant(&eq, Kind::Dynamic, Order::First, &n),
            Err(Error::ReferenceZero { order: 1 })
        );
    }

    #[test]
    fn window_covers_one_period() {
        let p = preset(300.0, 250.0, 0.0, 0.0);
        let (a, b) = period_window(&p).unwrap();
        assert!((b - a - p.period().unwrap()).abs() < 1e-15);
        assert!(period_window(&p.reference()).is_none());
    }
}
