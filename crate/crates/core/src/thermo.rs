// SPDX-License-Identifier: Apache-2.0

//! Affinity, Gallavotti–Cohen residual, uncertainty relations and minimum
//! entropy production. Entropies are in units of k_B.

use serde::{Deserialize, Serialize};

use crate::cumulants::{dynamic_cgf, dynamic_cumulant, integrate, period_window, Numerics, Order, QuadratureSpec};
use crate::geometry::{geometric_cumulant, Route};
use crate::model::{bose_occupation, ModelParams, Side};
use crate::{Error, Result};

/// Below this |𝒜| the affinity counts as zero.
pub const AFFINITY_ZERO: f64 = 1e-8;
/// Slack allowed on uncertainty-relation inequalities.
pub const TUR_SLACK: f64 = 1e-9;

fn period_integral<F>(params: &ModelParams, quad: &QuadratureSpec, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    match period_window(params).filter(|_| params.drive().amplitude > 0.0) {
        Some((a, b)) => Ok(integrate(quad, a, b, f)?.value),
        None => f(0.0),
    }
}

fn log_ratio(numerator: f64, denominator: f64) -> Result<f64> {
    for value in [numerator, denominator] {
        if !(value > 0.0) {
            return Err(Error::Domain {
                what: "affinity period integral",
                value,
            });
        }
    }
    Ok((numerator / denominator).ln())
}

/// Affinity conjugate to the counted current,
/// `𝒜 = log(∫β_ℓα_r dt / ∫α_ℓβ_r dt)`. Positive when bosons flow left → right;
/// `θ₀(1/T_r − 1/T_ℓ)` for static unsqueezed reservoirs.
pub fn affinity(params: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    let forward = period_integral(params, quad, |t| {
        let r = params.rates_at(t);
        Ok(r.left.beta * r.right.alpha)
    })?;
    let backward = period_integral(params, quad, |t| {
        let r = params.rates_at(t);
        Ok(r.left.alpha * r.right.beta)
    })?;
    log_ratio(forward, backward)
}

/// Printed affinity `log(∫X_ℓ⁻X_r⁺ dt / ∫X_ℓ⁺X_r⁻ dt)` with
/// `X_ν^± = cosh(2x_ν)(2n_ν ± 1)`. Kept for comparison only.
pub fn affinity_printed(params: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    let x = |side: Side, t: f64, sign: f64| -> Result<f64> {
        let n = bose_occupation(params.theta0(), params.temperature(side, t))?;
        Ok(params.bath(side).squeeze_factor() * (2.0 * n + sign))
    };
    let numerator = period_integral(params, quad, |t| Ok(x(Side::Left, t, -1.0)? * x(Side::Right, t, 1.0)?))?;
    let denominator = period_integral(params, quad, |t| Ok(x(Side::Left, t, 1.0)? * x(Side::Right, t, -1.0)?))?;
    log_ratio(numerator, denominator)
}

/// Bisects the affinity in `x_ℓ` over `[lo, hi]` to width `tol`.
pub fn locate_affinity_zero(params: &ModelParams, lo: f64, hi: f64, tol: f64, quad: &QuadratureSpec) -> Result<f64> {
    let at = |x: f64| -> Result<f64> { affinity(&params.with_squeeze(x, params.right().squeeze)?, quad) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (at(a)?, at(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Domain {
            what: "affinity bracket without sign change",
            value: fa * fb,
        });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = at(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// `max_λ |S_d(λ) − S_d(−λ − 𝒜)|` over the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GcResidual {
    pub max_residual: f64,
    pub affinity: f64,
    /// `max_λ |S_d(λ)|` over the grid.
    pub scale: f64,
}

pub fn gc_symmetry_residual(params: &ModelParams, lambdas: &[f64], numerics: &Numerics) -> Result<GcResidual> {
    let a = affinity(params, &numerics.quadrature)?;
    gc_symmetry_residual_with(params, lambdas, a, numerics)
}

/// Residual for an externally chosen affinity.
pub fn gc_symmetry_residual_with(
    params: &ModelParams,
    lambdas: &[f64],
    affinity: f64,
    numerics: &Numerics,
) -> Result<GcResidual> {
    let mut max_residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &lambda in lambdas {
        let s = dynamic_cgf(params, lambda, &numerics.quadrature)?;
        let mirrored = dynamic_cgf(params, -lambda - affinity, &numerics.quadrature)?;
        max_residual = max_residual.max((s - mirrored).abs());
        scale = scale.max(s.abs());
    }
    Ok(GcResidual {
        max_residual,
        affinity,
        scale,
    })
}

/// Uniform grid on `[−𝒜 − 1, 1]`.
pub fn gc_grid(affinity: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = (-affinity - 1.0, 1.0);
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    let steps = count.max(2) - 1;
    (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect()
}

/// Geometric correction `g(Ω) = 1/(1 + j_g⁽¹⁾/j_d⁽¹⁾)²`.
pub fn tur_correction(dynamic_flux: f64, geometric_flux: f64, affinity: f64) -> Result<f64> {
    if affinity.abs() < AFFINITY_ZERO {
        return Err(Error::UndefinedCorrection { dynamic_flux, affinity });
    }
    if geometric_flux == 0.0 {
        return Ok(1.0);
    }
    let g = (1.0 + geometric_flux / dynamic_flux).powi(-2);
    if dynamic_flux == 0.0 || !g.is_finite() {
        return Err(Error::UndefinedCorrection { dynamic_flux, affinity });
    }
    Ok(g)
}

/// `Σ_min = 2(j_d⁽¹⁾ + j_g⁽¹⁾)²/(j_d⁽²⁾ + j_g⁽²⁾)·g(Ω)` in k_B/ps.
pub fn min_entropy(c: &Cumulants, g: f64) -> Result<f64> {
    let noise = c.total(Order::Second);
    if !(noise > 0.0) {
        return Err(Error::Domain {
            what: "total noise",
            value: noise,
        });
    }
    Ok(2.0 * c.total(Order::First).powi(2) / noise * g)
}

/// Left side of the corrected uncertainty relation for a given entropy rate.
pub fn modified_tur_lhs(c: &Cumulants, sigma: f64, g: f64) -> f64 {
    c.total(Order::Second) * sigma / (c.total(Order::First).powi(2) * g)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cumulants {
    pub dynamic_flux: f64,
    pub dynamic_noise: f64,
    pub geometric_flux: f64,
    pub geometric_noise: f64,
}

impl Cumulants {
    pub fn compute(params: &ModelParams, route: Route, numerics: &Numerics) -> Result<Self> {
        Ok(Cumulants {
            dynamic_flux: dynamic_cumulant(params, Order::First, numerics)?,
            dynamic_noise: dynamic_cumulant(params, Order::Second, numerics)?,
            geometric_flux: geometric_cumulant(params, Order::First, route, numerics)?,
            geometric_noise: geometric_cumulant(params, Order::Second, route, numerics)?,
        })
    }

    pub fn total(&self, order: Order) -> f64 {
        match order {
            Order::First => self.dynamic_flux + self.geometric_flux,
            Order::Second => self.dynamic_noise + self.geometric_noise,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TurFlag {
    AffinityZero,
    GUndefined,
}

impl TurFlag {
    pub fn name(self) -> &'static str {
        match self {
            TurFlag::AffinityZero => "affinity_zero",
            TurFlag::GUndefined => "g_undefined",
        }
    }
}

/// Uncertainty-relation quantities at one parameter point. Inequality
/// fields are withheld (`None`) whenever a flag is raised.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TurReport {
    pub cumulants: Cumulants,
    /// Total noise over total flux.
    pub fano: f64,
    pub affinity: f64,
    pub g_omega: Option<f64>,
    pub sigma_min: Option<f64>,
    /// `F·𝒜`.
    pub standard_lhs: Option<f64>,
    /// Corrected relation evaluated at `Σ = Σ_min`.
    pub modified_lhs: Option<f64>,
    pub flags: Vec<TurFlag>,
}

impl TurReport {
    pub fn from_parts(cumulants: Cumulants, affinity: f64) -> Self {
        let fano = cumulants.total(Order::Second) / cumulants.total(Order::First);
        let mut flags = Vec::new();
        if affinity.abs() < AFFINITY_ZERO {
            flags.push(TurFlag::AffinityZero);
        }
        let g = tur_correction(cumulants.dynamic_flux, cumulants.geometric_flux, affinity).ok();
        let sigma = g.and_then(|g| min_entropy(&cumulants, g).ok());
        if g.is_none() || sigma.is_none() {
            flags.push(TurFlag::GUndefined);
        }
        if !flags.is_empty() {
            return TurReport {
                cumulants,
                fano,
                affinity,
                g_omega: None,
                sigma_min: None,
                standard_lhs: None,
                modified_lhs: None,
                flags,
            };
        }
        let (g, sigma) = (g.unwrap_or(f64::NAN), sigma.unwrap_or(f64::NAN));
        TurReport {
            cumulants,
            fano,
            affinity,
            g_omega: Some(g),
            sigma_min: Some(sigma),
            standard_lhs: Some(fano * affinity),
            modified_lhs: Some(modified_tur_lhs(&cumulants, sigma, g)),
            flags,
        }
    }

    /// True unless an unflagged inequality falls below 2 − slack.
    pub fn modified_holds(&self) -> bool {
        self.modified_lhs.is_none_or(|v| v >= 2.0 - TUR_SLACK)
    }

    pub fn standard_holds(&self) -> bool {
        self.standard_lhs.is_none_or(|v| v >= 2.0 - TUR_SLACK)
    }
}

pub fn tur_report(params: &ModelParams, route: Route, numerics: &Numerics) -> Result<TurReport> {
    let cumulants = Cumulants::compute(params, route, numerics)?;
    Ok(TurReport::from_parts(
        cumulants,
        affinity(params, &numerics.quadrature)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, DriveProtocol};
    use proptest::prelude::*;
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

    #[test]
    fn static_affinity_closed_form() {
        let q = QuadratureSpec::default();
        let p = preset(300.0, 250.0, 0.0, 0.0).reference();
        let expected = p.theta0() * (1.0 / 250.0 - 1.0 / 300.0);
        assert!((affinity(&p, &q).unwrap() - expected).abs() < 1e-13);
        let eq = preset(300.0, 300.0, 0.0, 0.0).reference();
        assert_eq!(affinity(&eq, &q).unwrap(), 0.0);
    }

    #[test]
    fn printed_affinity_differs_from_corrected() {
        let q = QuadratureSpec::default();
        let p = preset(300.0, 250.0, 0.0, 0.0).reference();
        let printed = affinity_printed(&p, &q).unwrap();
        let corrected = affinity(&p, &q).unwrap();
        assert!(printed > 0.0 && (printed - corrected).abs() > 0.1);
        // identically zero at equal base temperatures, whatever the squeezing
        let eq = preset(300.0, 300.0, 1.3, 0.0);
        assert!(affinity_printed(&eq, &q).unwrap().abs() < 1e-14);
    }

    #[test]
    fn static_gc_symmetry_is_exact() {
        let n = Numerics::default();
        let p = preset(300.0, 250.0, 0.0, 0.0).reference();
        let a = affinity(&p, &n.quadrature).unwrap();
        let r = gc_symmetry_residual(&p, &gc_grid(a, 41), &n).unwrap();
        assert!(r.max_residual <= 1e-10, "{}", r.max_residual);
    }

    #[test]
    fn gc_residual_decreases_beyond_unit_squeezing() {
        let n = Numerics::default();
        let residuals: Vec<f64> = [1.0, 1.5, 2.0, 2.5, 3.0]
            .iter()
            .map(|&x| {
                let p = preset(300.0, 250.0, x, x);
                let a = affinity(&p, &n.quadrature).unwrap();
                gc_symmetry_residual(&p, &gc_grid(a, 41), &n).unwrap().max_residual
            })
            .collect();
        assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    }

    #[test]
    fn affinity_zero_on_the_squeezing_diagonal() {
        let q = QuadratureSpec::default();
        let p = preset(300.0, 300.0, 0.0, 0.7);
        let root = locate_affinity_zero(&p, 0.3, 1.2, 1e-10, &q).unwrap();
        assert!((root - 0.7).abs() < 1e-8, "{root}");
        // with an unsqueezed right reservoir there is no crossing
        let p = preset(300.0, 300.0, 0.0, 0.0);
        assert!(locate_affinity_zero(&p, 0.1, 2.0, 1e-10, &q).is_err());
    }

    #[test]
    fn correction_factor_rules() {
        assert_eq!(tur_correction(1.0, 0.0, 0.5).unwrap(), 1.0);
        assert!(tur_correction(1.0, 0.2, 0.5).unwrap() < 1.0);
        assert!(tur_correction(-1.0, 0.2, -0.5).unwrap() > 1.0);
        assert!(matches!(
            tur_correction(0.0, 0.2, 1e-9),
            Err(Error::UndefinedCorrection { .. })
        ));
    }

    #[test]
    fn flagged_report_withholds_inequalities() {
        let c = Cumulants {
            dynamic_flux: 1e-17,
            dynamic_noise: 3.0,
            geometric_flux: 0.2,
            geometric_noise: 0.01,
        };
        let r = TurReport::from_parts(c, 0.0);
        assert_eq!(r.flags, vec![TurFlag::AffinityZero, TurFlag::GUndefined]);
        assert!(r.g_omega.is_none() && r.modified_lhs.is_none() && r.standard_lhs.is_none());
    }

    #[test]
    fn min_entropy_vanishes_without_flux() {
        let c = Cumulants {
            dynamic_noise: 2.0,
            ..Cumulants::default()
        };
        assert_eq!(min_entropy(&c, 1.0).unwrap(), 0.0);
        assert!(min_entropy(&Cumulants::default(), 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn standard_tur_holds_for_static_reservoirs(
            tl in 50.0f64..600.0, tr in 50.0f64..600.0, gl in 1.0f64..2000.0, gr in 1.0f64..2000.0,
        ) {
            prop_assume!((tl - tr).abs() > 1.0);
            let p = ModelParams::from_omega0_thz(
                7.4 * PI,
                BathSpec::new(gl, 0.0, tl).unwrap(),
                BathSpec::new(gr, 0.0, tr).unwrap(),
                DriveProtocol::undriven(),
            ).unwrap();
            let n = Numerics::default();
            let r = tur_report(&p, Route::default(), &n).unwrap();
            prop_assert!(r.flags.is_empty());
            prop_assert!(r.standard_holds(), "{:?}", r.standard_lhs);
            prop_assert!(r.modified_holds());
            prop_assert_eq!(r.cumulants.dynamic_flux.signum(), r.affinity.signum());
        }
    }
}
