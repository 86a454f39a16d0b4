// SPDX-License-Identifier: Apache-2.0

//! Per-point summary of every cumulant, the affinity, the uncertainty
//! relations and the geometric route cross-check.

use serde::Serialize;

use crate::cumulants::{reference_cumulant, Numerics, Order};
use crate::geometry::{geometric_cumulant, Route};
use crate::model::ModelParams;
use crate::thermo::{affinity, Cumulants, TurReport};
use crate::{Error, Result};

/// Relative tolerance for agreement between geometric routes.
pub const ROUTE_TOLERANCE: f64 = 1e-4;

/// Geometric cumulant of one order along every route.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouteCheck {
    pub order: u32,
    pub line: f64,
    pub surface_analytic: f64,
    pub surface_first_principles: f64,
    /// Largest pairwise difference over the largest magnitude.
    pub disagreement: f64,
    pub passed: bool,
}

impl RouteCheck {
    /// `floor` is the smallest scale the spread is divided by.
    pub fn from_values(order: Order, values: [f64; 3], floor: f64) -> Self {
        let scale = values.iter().fold(floor, |m, v| m.max(v.abs()));
        let mut spread: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                spread = spread.max((values[i] - values[j]).abs());
            }
        }
        let disagreement = if scale > 0.0 { spread / scale } else { 0.0 };
        RouteCheck {
            order: order.as_u32(),
            line: values[0],
            surface_analytic: values[1],
            surface_first_principles: values[2],
            disagreement,
            passed: disagreement <= ROUTE_TOLERANCE,
        }
    }

    pub fn evaluate(params: &ModelParams, order: Order, floor: f64, numerics: &Numerics) -> Result<Self> {
        let mut values = [0.0; 3];
        for (v, route) in values.iter_mut().zip(Route::ALL) {
            *v = geometric_cumulant(params, order, route, numerics)?;
        }
        Ok(Self::from_values(order, values, floor))
    }
}

/// Relative floor applied to the noise cross-check, as a fraction of the
/// geometric flux.
pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulantReport {
    pub params: ModelParams,
    pub cumulants: Cumulants,
    /// `j⁽ⁿ⁾/j_o⁽ⁿ⁾` for the dynamic and geometric parts; `None` when the
    /// reference vanishes.
    pub scaled_dynamic: [Option<f64>; 2],
    pub scaled_geometric: [Option<f64>; 2],
    pub affinity: f64,
    pub tur: TurReport,
    pub routes: Vec<RouteCheck>,
}

impl CumulantReport {
    pub fn evaluate(params: &ModelParams, numerics: &Numerics) -> Result<Self> {
        let cumulants = Cumulants::compute(params, Route::default(), numerics)?;
        let mut scaled_dynamic = [None; 2];
        let mut scaled_geometric = [None; 2];
        let noise_reference = reference_cumulant(params, Order::Second, numerics)?;
        for (i, order) in Order::both().into_iter().enumerate() {
            let reference = match order {
                Order::First => reference_cumulant(params, order, numerics)?,
                Order::Second => noise_reference,
            };
            let zero = match order {
                Order::First => reference.abs() <= 1e-10 * noise_reference,
                Order::Second => reference == 0.0,
            };
            if !zero {
                let (d, g) = match order {
                    Order::First => (cumulants.dynamic_flux, cumulants.geometric_flux),
                    Order::Second => (cumulants.dynamic_noise, cumulants.geometric_noise),
                };
                scaled_dynamic[i] = Some(d / reference);
                scaled_geometric[i] = Some(g / reference);
            }
        }
        let affinity = affinity(params, &numerics.quadrature)?;
        let tur = TurReport::from_parts(cumulants, affinity);
        let floor = NOISE_FLOOR * cumulants.geometric_flux.abs();
        let routes = vec![
            RouteCheck::evaluate(params, Order::First, 0.0, numerics)?,
            RouteCheck::evaluate(params, Order::Second, floor, numerics)?,
        ];
        Ok(CumulantReport {
            params: *params,
            cumulants,
            scaled_dynamic,
            scaled_geometric,
            affinity,
            tur,
            routes,
        })
    }

    pub fn routes_agree(&self) -> bool {
        self.routes.iter().all(|r| r.passed)
    }

    /// Scaled cumulant or the reference-zero error.
    pub fn scaled(&self, geometric: bool, order: Order) -> Result<f64> {
        let i = (order.as_u32() - 1) as usize;
        let v = if geometric {
            self.scaled_geometric[i]
        } else {
            self.scaled_dynamic[i]
        };
        v.ok_or(Error::ReferenceZero { order: order.as_u32() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, DriveProtocol};
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn report_at_the_reference_preset() {
        let p = ModelParams::from_omega0_thz(
            7.4 * PI,
            BathSpec::new(1000.0, 0.7, 300.0).unwrap(),
            BathSpec::new(1000.0, 0.0, 250.0).unwrap(),
            DriveProtocol::quadrature(100.0, 100.0, FRAC_PI_4),
        )
        .unwrap();
        let r = CumulantReport::evaluate(&p, &Numerics::default()).unwrap();
        assert!(r.routes_agree(), "{:?}", r.routes);
        assert!(r.tur.flags.is_empty());
        assert!(r.scaled(false, Order::First).unwrap() > 1.0);

        let eq = p.with_temperatures(300.0, 300.0).unwrap();
        let r = CumulantReport::evaluate(&eq, &Numerics::default()).unwrap();
        assert_eq!(r.scaled(true, Order::First), Err(Error::ReferenceZero { order: 1 }));
    }

    #[test]
    fn route_check_uses_floor() {
        let c = RouteCheck::from_values(Order::Second, [1e-20, -1e-20, 0.0], 1e-6);
        assert!(c.passed);
        let c = RouteCheck::from_values(Order::First, [1.0, 1.0 + 2e-4, 1.0], 0.0);
        assert!(!c.passed);
    }
}
