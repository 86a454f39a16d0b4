// SPDX-License-Identifier: Apache-2.0

//! Composite Gauss–Legendre quadrature with panel doubling, and a polar
//! product rule over the region enclosed by an elliptic drive orbit.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Composite Gauss–Legendre rule over one drive period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Initial number of equal panels (≥ 8).
    pub panels: usize,
    /// Gauss–Legendre points per panel.
    pub points: usize,
    /// Relative tolerance on the change under panel doubling.
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panels: 32,
            points: 8,
            tol: 1e-8,
            max_panels: 4096,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 8 {
            return Err(invalid("panels", format!("need at least 8, got {}", self.panels)));
        }
        if self.points == 0 {
            return Err(invalid("points", "need at least one point per panel".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid("tol", format!("must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_panels < self.panels {
            return Err(invalid("max_panels", "must be at least the initial panel count".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Change observed at the final doubling.
    pub change: f64,
    pub panels: usize,
}

/// Reference nodes and weights on [−1, 1].
fn legendre_rule(points: usize) -> Vec<(f64, f64)> {
    let degree = NonZeroUsize::new(points).expect("positive point count");
    GaussLegendre::new(degree).as_node_weight_pairs().to_vec()
}

/// Integrates `f` over `[a, b]`, doubling panels until the relative change
/// (measured against ∫|f|) drops below `spec.tol`.
pub fn integrate<F>(spec: &QuadratureSpec, a: f64, b: f64, mut f: F) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let rule = legendre_rule(spec.points);
    let mut panels = spec.panels;
    let (mut previous, _) = composite(&rule, a, b, panels, &mut f)?;
    loop {
        panels *= 2;
        let (value, magnitude) = composite(&rule, a, b, panels, &mut f)?;
        let change = (value - previous).abs();
        if change <= spec.tol * magnitude || magnitude == 0.0 {
            return Ok(Integral { value, change, panels });
        }
        if panels * 2 > spec.max_panels {
            return Err(Error::Quadrature {
                tol: spec.tol,
                panels,
                change: change / magnitude,
            });
        }
        previous = value;
    }
}

fn composite<F>(rule: &[(f64, f64)], a: f64, b: f64, panels: usize, f: &mut F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut sum = 0.0;
    let mut magnitude = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * width;
        for &(x, w) in rule {
            let v = f(mid + half * x)?;
            sum += w * v;
            magnitude += w * v.abs();
        }
    }
    Ok((sum * half, magnitude * half))
}

/// Product rule over `ρ ∈ [0, 1]` (Gauss–Legendre) × `s ∈ [0, 2π)`
/// (trapezoid, spectrally accurate for periodic integrands).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskSpec {
    pub radial: usize,
    pub angular: usize,
    pub tol: f64,
    pub max_radial: usize,
}

impl Default for DiskSpec {
    fn default() -> Self {
        DiskSpec {
            radial: 12,
            angular: 32,
            tol: 1e-8,
            max_radial: 384,
        }
    }
}

impl DiskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial < 2 || self.angular < 4 {
            return Err(invalid("disk", "need at least 2 radial and 4 angular nodes".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid("disk.tol", format!("must lie in (0, 1), got {}", self.tol)));
        }
        Ok(())
    }
}

/// Integrates `f(ρ, s)` over the unit polar rectangle, doubling both node
/// counts until the relative change (against ∫|f|) is below `spec.tol`.
/// The integrand must include any Jacobian factor.
pub fn integrate_polar<F>(spec: &DiskSpec, mut f: F) -> Result<Integral>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let (mut radial, mut angular) = (spec.radial, spec.angular);
    let (mut previous, _) = polar(radial, angular, &mut f)?;
    loop {
        radial *= 2;
        angular *= 2;
        let (value, magnitude) = polar(radial, angular, &mut f)?;
        let change = (value - previous).abs();
        if change <= spec.tol * magnitude || magnitude == 0.0 {
            return Ok(Integral {
                value,
                change,
                panels: radial * angular,
            });
        }
        if radial * 2 > spec.max_radial {
            return Err(Error::Quadrature {
                tol: spec.tol,
                panels: radial * angular,
                change: change / magnitude,
            });
        }
        previous = value;
    }
}

fn polar<F>(radial: usize, angular: usize, f: &mut F) -> Result<(f64, f64)>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let rule = legendre_rule(radial);
    let ds = std::f64::consts::TAU / angular as f64;
    let mut sum = 0.0;
    let mut magnitude = 0.0;
    for &(x, w) in &rule {
        let rho = 0.5 * (x + 1.0);
        let mut ring = 0.0;
        let mut ring_abs = 0.0;
        for j in 0..angular {
            let v = f(rho, j as f64 * ds)?;
            ring += v;
            ring_abs += v.abs();
        }
        sum += 0.5 * w * ring * ds;
        magnitude += 0.5 * w * ring_abs * ds;
    }
    Ok((sum, magnitude))
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn polynomial_and_periodic_integrands() {
        let spec = QuadratureSpec::default();
        let r = integrate(&spec, 0.0, 2.0, |x| Ok(x.powi(5))).unwrap();
        assert!((r.value - 64.0 / 6.0).abs() < 1e-12);
        let r = integrate(&spec, 0.0, TAU, |x| Ok((x.cos() * 3.0).exp())).unwrap();
        // 2π I₀(3), I₀(3) = 4.880792585865024
        assert!((r.value - TAU * 4.880_792_585_865_024).abs() < 1e-10);
    }

    #[test]
    fn gives_up_on_singular_integrand() {
        let spec = QuadratureSpec {
            max_panels: 64,
            ..QuadratureSpec::default()
        };
        let r = integrate(&spec, 0.0, 1.0, |x: f64| Ok(1.0 / x.sqrt()));
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn disk_area_and_moment() {
        let spec = DiskSpec::default();
        // area of the unit disk with Jacobian ρ
        let r = integrate_polar(&spec, |rho, _| Ok(rho)).unwrap();
        assert!((r.value - PI).abs() < 1e-13);
        // ∫ x² over the unit disk = π/4
        let r = integrate_polar(&spec, |rho, s| Ok(rho * (rho * s.cos()).powi(2))).unwrap();
        assert!((r.value - PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn spec_validation() {
        let bad = QuadratureSpec {
            panels: 4,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
        assert!(QuadratureSpec::default().validate().is_ok());
    }
}
