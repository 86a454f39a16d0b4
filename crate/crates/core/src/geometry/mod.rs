// SPDX-License-Identifier: Apache-2.0

//! Geometric CGF and cumulants.
//!
//! `S_g(λ) = −(1/t_p)∮⟨L₀|dR₀⟩ = −(1/t_p)∬ F dT_ℓ∧dT_r`, evaluated along
//! the drive orbit (line route) or over the enclosed region with either the
//! closed-form or the eigenvector-derivative curvature (surface routes).

mod curvature;

pub use curvature::{curvature, curvature_first_principles, curvature_printed, Auxiliaries, PrintedReading};

use serde::{Deserialize, Serialize};

use crate::cumulants::{integrate, integrate_polar, lambda_derivative, period_window, Numerics, Order, QuadratureSpec};
use crate::model::{ModelParams, Side};
use crate::spectral::{build_generator, eigensystem};
use crate::{Error, Result};

/// Relative time step for ∂_t R₀.
const TIME_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Connection integrated along the orbit.
    Line,
    /// Closed-form curvature over the enclosed region.
    #[default]
    SurfaceAnalytic,
    /// Eigenvector-derivative curvature over the enclosed region.
    SurfaceFirstPrinciples,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Line, Route::SurfaceAnalytic, Route::SurfaceFirstPrinciples];

    pub fn name(self) -> &'static str {
        match self {
            Route::Line => "line",
            Route::SurfaceAnalytic => "surface_analytic",
            Route::SurfaceFirstPrinciples => "surface_first_principles",
        }
    }
}

/// Region enclosed by the drive orbit
/// `(T_ℓ, T_r) = centre + A(cos(s + φ_ℓ), cos(s + φ_r))`: a disk when the
/// phases differ by ±π/2, an ellipse otherwise, a segment when they agree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LoopSurface {
    pub center: (f64, f64),
    pub amplitude: f64,
    pub phi_left: f64,
    pub phi_right: f64,
}

impl LoopSurface {
    pub fn from_params(params: &ModelParams) -> Self {
        let drive = params.drive();
        LoopSurface {
            center: (params.left().base_temperature, params.right().base_temperature),
            amplitude: drive.amplitude,
            phi_left: drive.phi_left,
            phi_right: drive.phi_right,
        }
    }

    /// +1 counter-clockwise, −1 clockwise, 0 degenerate.
    pub fn orientation(&self) -> f64 {
        let s = (self.phi_left - self.phi_right).sin();
        if s == 0.0 || self.amplitude == 0.0 {
            0.0
        } else {
            s.signum()
        }
    }

    pub fn signed_area(&self) -> f64 {
        std::f64::consts::PI * self.amplitude * self.amplitude * (self.phi_left - self.phi_right).sin()
    }

    pub fn reversed(&self) -> Self {
        LoopSurface {
            phi_left: self.phi_right,
            phi_right: self.phi_left,
            ..*self
        }
    }

    /// Point at radius fraction `rho ∈ [0, 1]` and angle `s`.
    pub fn point(&self, rho: f64, s: f64) -> (f64, f64) {
        let r = rho * self.amplitude;
        (
            self.center.0 + r * (s + self.phi_left).cos(),
            self.center.1 + r * (s + self.phi_right).cos(),
        )
    }

    /// Signed Jacobian `ρA² sin(φ_ℓ − φ_r)` of the polar map.
    pub fn jacobian(&self, rho: f64) -> f64 {
        rho * self.amplitude * self.amplitude * (self.phi_left - self.phi_right).sin()
    }

    /// Angle offset that makes the angular nodes symmetric under the
    /// reflection `T_ℓ ↔ T_r`.
    fn angle_offset(&self) -> f64 {
        -0.5 * (self.phi_left + self.phi_right)
    }

    /// Oriented integral `∬ g dT_ℓ∧dT_r` over the region.
    pub fn integrate<G>(&self, numerics: &Numerics, mut g: G) -> Result<f64>
    where
        G: FnMut(f64, f64) -> Result<f64>,
    {
        if self.orientation() == 0.0 {
            return Ok(0.0);
        }
        let offset = self.angle_offset();
        let out = integrate_polar(&numerics.disk, |rho, s| {
            let (tl, tr) = self.point(rho, s + offset);
            Ok(g(tl, tr)? * self.jacobian(rho))
        })?;
        Ok(out.value)
    }
}

fn driven_period(params: &ModelParams) -> Option<f64> {
    params.period().filter(|_| params.drive().amplitude > 0.0)
}

/// `(L₀[0] − L₀[1]) ∂_t R₀[0]`, the connection along the orbit.
fn connection(params: &ModelParams, lambda: f64, t: f64, h: f64) -> Result<f64> {
    let r = |s: f64| -> Result<f64> { Ok(eigensystem(&build_generator(params, lambda, s))?.right[0]) };
    let es = eigensystem(&build_generator(params, lambda, t))?;
    let slope = (8.0 * (r(t + h)? - r(t - h)?) - (r(t + 2.0 * h)? - r(t - 2.0 * h)?)) / (12.0 * h);
    Ok(es.left_difference * slope)
}

/// Line route `S_g(λ) = −(1/t_p)∫⟨L₀|∂_t R₀⟩dt`, a rate in 1/ps.
pub fn geometric_cgf_line(params: &ModelParams, lambda: f64, quad: &QuadratureSpec) -> Result<f64> {
    let Some(period) = driven_period(params) else {
        return Ok(0.0);
    };
    let (a, b) = period_window(params).ok_or(Error::Undriven)?;
    let h = TIME_STEP * period;
    let out = integrate(quad, a, b, |t| connection(params, lambda, t, h))?;
    Ok(-out.value / period)
}

/// Surface route `S_g(λ) = −(1/t_p)∬F(λ)dT_ℓ∧dT_r`.
pub fn geometric_cgf_surface(params: &ModelParams, lambda: f64, route: Route, numerics: &Numerics) -> Result<f64> {
    let Some(period) = driven_period(params) else {
        return Ok(0.0);
    };
    let surface = LoopSurface::from_params(params);
    let flux = match route {
        Route::Line => return geometric_cgf_line(params, lambda, &numerics.quadrature),
        Route::SurfaceAnalytic => surface.integrate(numerics, |tl, tr| curvature(params, lambda, tl, tr))?,
        Route::SurfaceFirstPrinciples => {
            surface.integrate(numerics, |tl, tr| curvature_first_principles(params, lambda, tl, tr))?
        }
    };
    Ok(-flux / period)
}

/// Geometric CGF along any route.
pub fn geometric_cgf(params: &ModelParams, lambda: f64, route: Route, numerics: &Numerics) -> Result<f64> {
    match route {
        Route::Line => geometric_cgf_line(params, lambda, &numerics.quadrature),
        _ => geometric_cgf_surface(params, lambda, route, numerics),
    }
}

/// Geometric cumulant `j_g⁽ⁿ⁾` in 1/ps. The λ-derivative is taken inside
/// the integrand so every stencil point shares one quadrature grid.
pub fn geometric_cumulant(params: &ModelParams, order: Order, route: Route, numerics: &Numerics) -> Result<f64> {
    let Some(period) = driven_period(params) else {
        return Ok(0.0);
    };
    let scheme = &numerics.derivative;
    let flux = match route {
        Route::Line => {
            let (a, b) = period_window(params).ok_or(Error::Undriven)?;
            let h = TIME_STEP * period;
            integrate(&numerics.quadrature, a, b, |t| {
                let mut failure = None;
                let d = lambda_derivative(
                    |l| {
                        connection(params, l, t, h).unwrap_or_else(|e| {
                            failure = Some(e);
                            f64::NAN
                        })
                    },
                    order,
                    scheme,
                );
                match failure {
                    Some(e) => Err(e),
                    None => Ok(d?.value),
                }
            })?
            .value
        }
        Route::SurfaceAnalytic | Route::SurfaceFirstPrinciples => {
            let surface = LoopSurface::from_params(params);
            surface.integrate(numerics, |tl, tr| {
                let mut failure = None;
                let d = lambda_derivative(
                    |l| {
                        let value = if route == Route::SurfaceAnalytic {
                            curvature(params, l, tl, tr)
                        } else {
                            curvature_first_principles(params, l, tl, tr)
                        };
                        value.unwrap_or_else(|e| {
                            failure = Some(e);
                            f64::NAN
                        })
                    },
                    order,
                    scheme,
                );
                match failure {
                    Some(e) => Err(e),
                    None => Ok(d?.value),
                }
            })?
        }
    };
    Ok(-flux / period)
}

/// A printed closed form next to the authoritative surface value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedFormComparison {
    pub printed: f64,
    pub authoritative: f64,
    /// `|printed − authoritative| / |authoritative|`.
    pub residual: f64,
}

fn compare(printed: f64, authoritative: f64) -> ClosedFormComparison {
    let residual = if authoritative == 0.0 {
        printed.abs()
    } else {
        ((printed - authoritative) / authoritative).abs()
    };
    ClosedFormComparison {
        printed,
        authoritative,
        residual,
    }
}

/// `X_ν⁺ = cosh(2x_ν)(2n_ν + 1)` at time `t`.
fn x_plus(params: &ModelParams, side: Side, t: f64) -> Result<f64> {
    let n = crate::model::bose_occupation(params.theta0(), params.temperature(side, t))?;
    Ok(params.bath(side).squeeze_factor() * (2.0 * n + 1.0))
}

fn printed_time_integral<G>(params: &ModelParams, quad: &QuadratureSpec, mut g: G) -> Result<f64>
where
    G: FnMut(f64, f64, f64) -> f64,
{
    let Some(period) = driven_period(params) else {
        return Ok(0.0);
    };
    let (a, b) = period_window(params).ok_or(Error::Undriven)?;
    let (gl, gr) = (params.left().gamma, params.right().gamma);
    let out = integrate(quad, a, b, |t| {
        let (xl, xr) = (x_plus(params, Side::Left, t)?, x_plus(params, Side::Right, t)?);
        Ok(g(xl, xr, gl * xl + gr * xr))
    })?;
    Ok(-out.value / period)
}

/// Printed time-integral expression for the geometric flux.
pub fn geometric_flux_closed(params: &ModelParams, numerics: &Numerics) -> Result<ClosedFormComparison> {
    let (gl, gr) = (params.left().gamma, params.right().gamma);
    let gamma = gl * gr * (gl + gr);
    let squeeze = params.left().squeeze_factor() * params.right().squeeze_factor();
    let printed = printed_time_integral(params, &numerics.quadrature, |_, _, k| {
        2.0 * gamma * squeeze / k.powi(3)
    })?;
    let authoritative = geometric_cumulant(params, Order::First, Route::default(), numerics)?;
    Ok(compare(printed, authoritative))
}

/// Printed time-integral expression for the geometric noise.
pub fn geometric_noise_closed(params: &ModelParams, numerics: &Numerics) -> Result<ClosedFormComparison> {
    let (gl, gr) = (params.left().gamma, params.right().gamma);
    let gamma = gl * gr * (gl + gr);
    let squeeze = params.left().squeeze_factor() * params.right().squeeze_factor();
    let printed = printed_time_integral(params, &numerics.quadrature, |xl, xr, k| {
        12.0 * gamma * gamma * squeeze * (xr - xl) / ((gl + gr) * k.powi(5))
    })?;
    let authoritative = geometric_cumulant(params, Order::Second, Route::default(), numerics)?;
    Ok(compare(printed, authoritative))
}

/// Regression of `log|F|` against the log of the low-temperature
/// prediction `sin λ / (√Σcosh³(2x_ν) · √Π(cosh(2x_ν) − 1))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub lambda: f64,
    /// Fitted slope; 1 means the prediction captures the scaling.
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub points: usize,
}

/// Minimum `θ₀/T` along the orbit for the low-temperature regime.
pub const LOW_TEMPERATURE_RATIO: f64 = 5.0;

/// Fits the curvature at the loop centre over a grid of
/// `(x_ℓ, x_r)` pairs. Both squeezing parameters must be positive.
pub fn low_temperature_limit_check(params: &ModelParams, lambda: f64, grid: &[(f64, f64)]) -> Result<ScalingFit> {
    let amplitude = params.drive().amplitude;
    for side in [Side::Left, Side::Right] {
        let ratio = params.theta0() / (params.bath(side).base_temperature + amplitude);
        if ratio < LOW_TEMPERATURE_RATIO {
            return Err(Error::Regime {
                ratio,
                required: LOW_TEMPERATURE_RATIO,
            });
        }
    }
    if lambda.sin() == 0.0 {
        return Ok(ScalingFit {
            lambda,
            exponent: 1.0,
            intercept: 0.0,
            residual: 0.0,
            points: 0,
        });
    }
    if grid.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "need at least two squeezing pairs".into(),
        });
    }
    let (tl, tr) = (params.left().base_temperature, params.right().base_temperature);
    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &(xl, xr) in grid {
        if !(xl > 0.0 && xr > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("squeezing must be positive, got ({xl}, {xr})"),
            });
        }
        let p = params.with_squeeze(xl, xr)?;
        let (cl, cr) = ((2.0 * xl).cosh(), (2.0 * xr).cosh());
        let predicted = lambda.sin().abs() / ((cl.powi(3) + cr.powi(3)).sqrt() * ((cl - 1.0) * (cr - 1.0)).sqrt());
        xs.push(predicted.ln());
        ys.push(curvature(&p, lambda, tl, tr)?.abs().ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        lambda,
        exponent,
        intercept,
        residual,
        points: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, DriveProtocol};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn preset(tl: f64, tr: f64, xl: f64, xr: f64) -> ModelParams {
        ModelParams::from_omega0_thz(
            7.4 * PI,
            BathSpec::new(1000.0, xl, tl).unwrap(),
            BathSpec::new(1000.0, xr, tr).unwrap(),
            DriveProtocol::quadrature(100.0, 100.0, FRAC_PI_4),
        )
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn surface_geometry() {
        let s = LoopSurface::from_params(&preset(300.0, 250.0, 0.0, 0.0));
        assert_eq!(s.orientation(), 1.0);
        assert_eq!(s.reversed().orientation(), -1.0);
        assert!((s.signed_area() - PI * 1e4).abs() < 1e-8);
        let n = Numerics::default();
        let area = s.integrate(&n, |_, _| Ok(1.0)).unwrap();
        assert!(rel(area, PI * 1e4) < 1e-12);
        // the orbit at time t sits on the boundary
        let p = preset(300.0, 250.0, 0.0, 0.0);
        let (tl, tr) = s.point(1.0, 100.0 * 0.01);
        let (ol, or) = p.temperatures(0.01);
        assert!((tl - ol).abs() < 1e-9 && (tr - or).abs() < 1e-9);
    }

    #[test]
    fn cgf_vanishes_at_zero_field_and_without_motion() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.7, 0.0);
        assert!(geometric_cgf_line(&p, 0.0, &n.quadrature).unwrap().abs() < 1e-15);
        let still = p.with_drive(DriveProtocol::quadrature(0.0, 100.0, FRAC_PI_4)).unwrap();
        for route in Route::ALL {
            assert_eq!(geometric_cgf(&still, 0.8, route, &n).unwrap(), 0.0);
        }
    }

    #[test]
    fn routes_agree_on_the_cgf() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.0, 0.0);
        for lambda in [-2.5, -0.4, 0.9, 3.0] {
            let line = geometric_cgf_line(&p, lambda, &n.quadrature).unwrap();
            let surf = geometric_cgf_surface(&p, lambda, Route::SurfaceAnalytic, &n).unwrap();
            assert!(rel(line, surf) < 1e-6, "{lambda}: {line} vs {surf}");
        }
    }

    #[test]
    fn flux_closed_form_at_zero_field() {
        // ∂_λF at λ = 0 is −2ΓC_ℓC_r/K³; integrate it over the disk independently.
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.35, 0.7);
        let s = LoopSurface::from_params(&p);
        let area_integral = s
            .integrate(&n, |tl, tr| {
                let aux = Auxiliaries::new(&p, tl, tr).unwrap();
                Ok(-2.0 * aux.gamma * aux.c_left * aux.c_right / aux.k.powi(3))
            })
            .unwrap();
        let expected = -area_integral / p.period().unwrap();
        let j = geometric_cumulant(&p, Order::First, Route::SurfaceAnalytic, &n).unwrap();
        assert!(j > 0.0);
        assert!(rel(j, expected) < 1e-8, "{j} vs {expected}");
    }

    #[test]
    fn orientation_flips_sign() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.7, 0.0);
        let d = p.drive();
        let reversed = p
            .with_drive(DriveProtocol {
                phi_left: d.phi_right,
                phi_right: d.phi_left,
                ..*d
            })
            .unwrap();
        for order in Order::both() {
            let a = geometric_cumulant(&p, order, Route::SurfaceAnalytic, &n).unwrap();
            let b = geometric_cumulant(&reversed, order, Route::SurfaceAnalytic, &n).unwrap();
            assert!((a + b).abs() < 1e-10 * a.abs());
        }
    }

    #[test]
    fn pumped_charge_is_frequency_independent() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.7, 0.0);
        let q = |omega: f64| {
            let d = DriveProtocol::quadrature(100.0, omega, FRAC_PI_4);
            let p = p.with_drive(d).unwrap();
            geometric_cumulant(&p, Order::First, Route::SurfaceAnalytic, &n).unwrap() * p.period().unwrap()
        };
        assert!(rel(q(10.0), q(100.0)) < 1e-12);
    }

    #[test]
    fn equal_phases_have_no_geometry() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.7, 0.0)
            .with_drive(DriveProtocol {
                amplitude: 100.0,
                omega: 100.0,
                phi_left: 0.4,
                phi_right: 0.4,
            })
            .unwrap();
        let scale = crate::cumulants::dynamic_cumulant(&p, Order::First, &n).unwrap().abs();
        for route in Route::ALL {
            for order in Order::both() {
                let j = geometric_cumulant(&p, order, route, &n).unwrap();
                assert!(j.abs() <= 1e-10 * scale, "{route:?} {order:?}: {j}");
            }
        }
    }

    #[test]
    fn printed_forms_are_reported_with_residuals() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.7, 0.0);
        let flux = geometric_flux_closed(&p, &n).unwrap();
        assert!(flux.printed < 0.0 && flux.authoritative > 0.0);
        assert!(flux.residual > 0.0);
        let noise = geometric_noise_closed(&p, &n).unwrap();
        assert!(noise.residual.is_finite());
    }

    #[test]
    fn low_temperature_regime_is_enforced() {
        let p = preset(300.0, 250.0, 1.0, 1.0);
        assert!(matches!(
            low_temperature_limit_check(&p, 0.5, &[(1.0, 1.0), (2.0, 1.0)]),
            Err(Error::Regime { .. })
        ));
        let cold = p.with_drive(DriveProtocol::quadrature(5.0, 100.0, FRAC_PI_4)).unwrap();
        let cold = cold.with_temperatures(20.0, 20.0).unwrap();
        let fit = low_temperature_limit_check(&cold, 0.0, &[]).unwrap();
        assert_eq!(fit.points, 0);
    }
}
