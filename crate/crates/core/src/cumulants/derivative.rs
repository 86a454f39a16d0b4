// SPDX-License-Identifier: Apache-2.0

//! Central finite differences at the origin with Richardson extrapolation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cumulant order. Only flux and noise are supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn as_u32(self) -> u32 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }

    pub fn from_u32(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidParameter {
                name: "order",
                reason: format!("only orders 1 and 2 are supported, got {n}"),
            }),
        }
    }

    pub fn both() -> [Order; 2] {
        [Order::First, Order::Second]
    }
}

/// Step sequence and acceptance tolerance for derivative estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeScheme {
    steps: Vec<f64>,
    tol: f64,
}

impl Default for DerivativeScheme {
    fn default() -> Self {
        DerivativeScheme::halving(1e-2, 4, 1e-8).expect("default scheme is valid")
    }
}

impl DerivativeScheme {
    /// `levels` steps `base_step, base_step/2, …`.
    pub fn halving(base_step: f64, levels: usize, tol: f64) -> Result<Self> {
        let steps = (0..levels).map(|k| base_step / f64::from(1u32 << k)).collect();
        Self::with_steps(steps, tol)
    }

    pub fn with_steps(steps: Vec<f64>, tol: f64) -> Result<Self> {
        let base = *steps
            .first()
            .ok_or_else(|| invalid("steps", "at least one step required".into()))?;
        if !(1e-5..=1e-2).contains(&base) {
            return Err(invalid("base_step", format!("must lie in [1e-5, 1e-2], got {base}")));
        }
        if steps.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
            return Err(invalid("steps", "must be positive and strictly decreasing".into()));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(invalid("tol", format!("must be positive, got {tol}")));
        }
        Ok(DerivativeScheme { steps, tol })
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn base_step(&self) -> f64 {
        self.steps[0]
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Sample points used by an estimate of the given order, in evaluation
    /// order. Useful for precomputing expensive function values.
    pub fn stencil(&self, order: Order) -> Vec<f64> {
        let mut points = Vec::with_capacity(2 * self.steps.len() + 1);
        if order == Order::Second {
            points.push(0.0);
        }
        for &h in &self.steps {
            points.push(h);
            points.push(-h);
        }
        points
    }
}

/// A derivative estimate with the spread of the last two extrapolants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Estimates `f⁽ⁿ⁾(0)` for n = 1, 2.
pub fn lambda_derivative<F>(mut f: F, order: Order, scheme: &DerivativeScheme) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    let centre = match order {
        Order::First => 0.0,
        Order::Second => f(0.0),
    };
    let steps = scheme.steps();
    let mut raw = Vec::with_capacity(steps.len());
    let mut scale: f64 = 0.0;
    for &h in steps {
        let (up, down) = (f(h), f(-h));
        let quotient = match order {
            Order::First => (up - down) / (2.0 * h),
            Order::Second => (up - 2.0 * centre + down) / (h * h),
        };
        if scale == 0.0 {
            let hn = match order {
                Order::First => h,
                Order::Second => h * h,
            };
            scale = ((up - centre).abs() + (down - centre).abs()) / hn;
        }
        raw.push(quotient);
    }
    richardson(&raw, steps, scale, scheme.tol())
}

/// Neville tableau for an error series in even powers of the step.
fn richardson(raw: &[f64], steps: &[f64], scale: f64, tol: f64) -> Result<Estimate> {
    let n = raw.len();
    let mut table = raw.to_vec();
    let mut diag = table[0];
    let mut spread = f64::INFINITY;
    for j in 1..n {
        for k in (j..n).rev() {
            let ratio = (steps[k - j] / steps[k]).powi(2);
            table[k] += (table[k] - table[k - 1]) / (ratio - 1.0);
        }
        // table[j] now holds the j-th diagonal entry
        spread = (table[j] - diag).abs();
        diag = table[j];
    }
    if n == 1 {
        spread = 0.0;
    }
    let reference = diag.abs().max(scale);
    if !diag.is_finite() || spread > 100.0 * tol * reference {
        return Err(Error::NonConvergence { spread, tol });
    }
    Ok(Estimate {
        value: diag,
        error: spread,
    })
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_quadratic_are_exact() {
        let s = DerivativeScheme::default();
        let d = lambda_derivative(|x| x, Order::First, &s).unwrap();
        assert!((d.value - 1.0).abs() < 1e-15);
        let d = lambda_derivative(|x| x * x, Order::Second, &s).unwrap();
        assert!((d.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn smooth_functions() {
        let s = DerivativeScheme::default();
        let d = lambda_derivative(|x| (3.0 * x).sin() + x.exp(), Order::First, &s).unwrap();
        assert!((d.value - 4.0).abs() < 1e-11, "{}", d.value);
        let d = lambda_derivative(|x| (2.0 * x).cosh() + x.powi(3), Order::Second, &s).unwrap();
        assert!((d.value - 4.0).abs() < 1e-8, "{}", d.value);
    }

    #[test]
    fn general_step_ratios() {
        let s = DerivativeScheme::with_steps(vec![1e-2, 7e-3, 3e-3, 1e-3], 1e-8).unwrap();
        let d = lambda_derivative(|x| (1.3 * x).exp(), Order::First, &s).unwrap();
        assert!((d.value - 1.3).abs() < 1e-11);
    }

    #[test]
    fn rough_function_is_rejected() {
        let s = DerivativeScheme::default();
        let r = lambda_derivative(|x: f64| x.abs().sqrt(), Order::Second, &s);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn scheme_validation() {
        assert!(DerivativeScheme::halving(0.1, 4, 1e-8).is_err());
        assert!(DerivativeScheme::halving(1e-6, 4, 1e-8).is_err());
        assert!(DerivativeScheme::with_steps(vec![1e-2, 1e-2], 1e-8).is_err());
        assert!(DerivativeScheme::with_steps(vec![], 1e-8).is_err());
    }

    #[test]
    fn stencil_lists_every_sample() {
        let s = DerivativeScheme::halving(1e-2, 2, 1e-8).unwrap();
        assert_eq!(s.stencil(Order::First), vec![1e-2, -1e-2, 5e-3, -5e-3]);
        assert_eq!(s.stencil(Order::Second)[0], 0.0);
    }
}
