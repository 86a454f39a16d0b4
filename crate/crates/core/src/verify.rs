// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks, one [`Outcome`] per criterion.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cli::config::{resolve, RawConfig};
use crate::cli::run_sweep;
use crate::cumulants::{dynamic_cumulant, scaled_cumulant, Kind, Numerics, Order};
use crate::geometry::{geometric_cumulant, low_temperature_limit_check, Route};
use crate::model::{BathSpec, DriveProtocol, ModelParams};
use crate::oracle::{
    finite_horizon_moments, finite_time_cumulant, sample_trajectories, stencil_runs, PropagatorSettings,
};
use crate::report::{RouteCheck, NOISE_FLOOR};
use crate::spectral::{build_generator, dominant_eigenvalue};
use crate::thermo::{affinity, gc_grid, gc_symmetry_residual, locate_affinity_zero, tur_report, Cumulants, TurFlag};
use crate::Result;

/// Result of one acceptance criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u32, name: &'static str, result: Result<(bool, String)>) -> Outcome {
    match result {
        Ok((passed, detail)) => Outcome {
            id,
            name,
            passed,
            detail,
        },
        Err(e) => Outcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Reference parameter set at the given base temperatures and squeezing.
pub fn preset_params(t_left: f64, t_right: f64, x_left: f64, x_right: f64) -> ModelParams {
    ModelParams::from_omega0_thz(
        7.4 * PI,
        BathSpec::new(1000.0, x_left, t_left).expect("valid preset bath"),
        BathSpec::new(1000.0, x_right, t_right).expect("valid preset bath"),
        DriveProtocol::quadrature(100.0, 100.0, FRAC_PI_4),
    )
    .expect("valid preset")
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub const ZERO_EIGENVALUE_DRAWS: usize = 10_000;

pub fn zero_eigenvalue() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let run = (|| -> Result<(bool, String)> {
        for _ in 0..ZERO_EIGENVALUE_DRAWS {
            let bath = |rng: &mut ChaCha8Rng| {
                BathSpec::new(
                    10f64.powf(rng.random_range(0.0..4.0)),
                    rng.random_range(0.0..3.0),
                    rng.random_range(50.0..500.0),
                )
            };
            let (left, right) = (bath(&mut rng)?, bath(&mut rng)?);
            let amplitude = rng.random_range(0.0..0.9) * left.base_temperature.min(right.base_temperature);
            let drive = DriveProtocol {
                amplitude,
                omega: 10f64.powf(rng.random_range(0.0..3.0)),
                phi_left: rng.random_range(0.0..2.0 * PI),
                phi_right: rng.random_range(0.0..2.0 * PI),
            };
            let p = ModelParams::new(rng.random_range(50.0..500.0), left, right, drive)?;
            let t = rng.random_range(0.0..p.period().unwrap_or(1.0));
            let g = build_generator(&p, 0.0, t);
            let r = g.rates();
            let scale = r.emission() + r.absorption();
            worst = worst.max(dominant_eigenvalue(&g).abs() / scale);
        }
        Ok((
            worst <= 1e-12,
            format!("max |zeta0|/rate sum = {worst:.3e} over {ZERO_EIGENVALUE_DRAWS} draws"),
        ))
    })();
    outcome(1, "zero-eigenvalue identity", run)
}

pub fn route_agreement(numerics: &Numerics) -> Outcome {
    let xs = [0.0, 0.35, 0.7];
    let grid: Vec<(f64, f64)> = xs.iter().flat_map(|&a| xs.iter().map(move |&b| (a, b))).collect();
    let run = (|| -> Result<(bool, String)> {
        let checks: Vec<[RouteCheck; 2]> = grid
            .par_iter()
            .map(|&(xl, xr)| {
                let p = preset_params(300.0, 250.0, xl, xr);
                let flux = RouteCheck::evaluate(&p, Order::First, 0.0, numerics)?;
                let floor = NOISE_FLOOR * flux.surface_analytic.abs();
                Ok([flux, RouteCheck::evaluate(&p, Order::Second, floor, numerics)?])
            })
            .collect::<Result<_>>()?;
        let worst = checks.iter().flatten().fold(0.0f64, |m, c| m.max(c.disagreement));
        let passed = checks.iter().flatten().all(|c| c.passed);
        Ok((
            passed,
            format!("max relative disagreement {worst:.3e} over {} points", grid.len()),
        ))
    })();
    outcome(2, "geometric route agreement", run)
}

/// Periods propagated for the per-period oracle cumulants.
pub const ORACLE_PERIODS: usize = 30;
pub const ORACLE_TRAJECTORIES: usize = 100_000;

pub fn oracle_agreement(numerics: &Numerics) -> Outcome {
    let run = (|| -> Result<(bool, String)> {
        let p = preset_params(300.0, 250.0, 0.7, 0.0);
        let settings = PropagatorSettings::default();
        let scheme = &numerics.derivative;
        let mut passed = true;
        let mut detail = Vec::new();
        for order in Order::both() {
            let runs = stencil_runs(&p, order, scheme, ORACLE_PERIODS, &settings)?;
            let oracle = finite_time_cumulant(&runs, order, scheme)?;
            let adiabatic =
                dynamic_cumulant(&p, order, numerics)? + geometric_cumulant(&p, order, Route::default(), numerics)?;
            let rel = relative(oracle, adiabatic);
            passed &= rel <= 1e-2;
            detail.push(format!("n={} rel {rel:.3e}", order.as_u32()));
        }
        let runs = stencil_runs(&p, Order::First, scheme, 1, &settings)?;
        let horizon = runs[0].period * runs[0].periods as f64;
        let expected = finite_horizon_moments(&runs, Order::First, scheme)?;
        let batch = sample_trajectories(&p, ORACLE_TRAJECTORIES, horizon, 2)?;
        let z = (batch.mean() - expected).abs() / batch.mean_standard_error();
        passed &= z <= 3.0;
        detail.push(format!(
            "sampler mean {:.6e} vs {expected:.6e} ({z:.2} SE)",
            batch.mean()
        ));
        Ok((passed, detail.join("; ")))
    })();
    outcome(3, "oracle agreement", run)
}

pub fn exchange_symmetries(numerics: &Numerics) -> Outcome {
    let pairs = [(0.7, 0.0), (0.35, 1.2), (1.5, 0.2)];
    let run = (|| -> Result<(bool, String)> {
        let mut detail = Vec::new();
        let mut passed = true;
        for (tr, expect_hold) in [(300.0, true), (250.0, false)] {
            // sign: +1 symmetric, −1 antisymmetric, in the order
            // dynamic flux, dynamic noise, geometric flux, geometric noise
            let signs = [-1.0, 1.0, 1.0, -1.0];
            let mut worst = [0.0f64; 4];
            for &(a, b) in &pairs {
                let c = Cumulants::compute(&preset_params(300.0, tr, a, b), Route::default(), numerics)?;
                let m = Cumulants::compute(&preset_params(300.0, tr, b, a), Route::default(), numerics)?;
                let (cv, mv) = (
                    [c.dynamic_flux, c.dynamic_noise, c.geometric_flux, c.geometric_noise],
                    [m.dynamic_flux, m.dynamic_noise, m.geometric_flux, m.geometric_noise],
                );
                for k in 0..4 {
                    let scale = cv[k].abs().max(mv[k].abs());
                    let dev = if scale == 0.0 {
                        0.0
                    } else {
                        (cv[k] - signs[k] * mv[k]).abs() / scale
                    };
                    worst[k] = worst[k].max(dev);
                }
            }
            let ok = if expect_hold {
                worst.iter().all(|&w| w <= 1e-6)
            } else {
                worst.iter().all(|&w| w > 1e-6)
            };
            passed &= ok;
            detail.push(format!(
                "T_r={tr}: deviations [{:.2e}, {:.2e}, {:.2e}, {:.2e}]",
                worst[0], worst[1], worst[2], worst[3]
            ));
        }
        Ok((passed, detail.join("; ")))
    })();
    outcome(4, "exchange symmetries", run)
}

pub fn diagonal_zero(numerics: &Numerics) -> Outcome {
    let run = (|| -> Result<(bool, String)> {
        let reference = geometric_cumulant(
            &preset_params(300.0, 300.0, 0.7, 0.0),
            Order::Second,
            Route::default(),
            numerics,
        )?;
        let mut worst: f64 = 0.0;
        let mut min_flux = f64::INFINITY;
        for x in [0.0, 0.35, 0.7, 1.5] {
            let p = preset_params(300.0, 300.0, x, x);
            worst = worst.max(geometric_cumulant(&p, Order::Second, Route::default(), numerics)?.abs());
            min_flux = min_flux.min(geometric_cumulant(&p, Order::First, Route::default(), numerics)?.abs());
        }
        let ratio = worst / reference.abs();
        Ok((
            ratio <= 1e-8 && min_flux > 0.0,
            format!("max |j_g2|/ref = {ratio:.3e}, min |j_g1| = {min_flux:.3e}"),
        ))
    })();
    outcome(5, "diagonal geometric noise zero", run)
}

pub fn geometricity_decay(numerics: &Numerics) -> Outcome {
    let run = (|| -> Result<(bool, String)> {
        let mut passed = true;
        let mut detail = Vec::new();
        for order in Order::both() {
            let base = scaled_cumulant(&preset_params(300.0, 250.0, 0.0, 0.0), Kind::Geometric, order, numerics)?;
            let squeezed = scaled_cumulant(&preset_params(300.0, 250.0, 3.0, 3.0), Kind::Geometric, order, numerics)?;
            let ratio = (squeezed / base).abs();
            passed &= ratio < 1e-3;
            detail.push(format!("n={} ratio {ratio:.3e}", order.as_u32()));
        }
        Ok((passed, detail.join("; ")))
    })();
    outcome(6, "geometricity decay at strong squeezing", run)
}

pub const GC_GRID_POINTS: usize = 41;

pub fn gc_recovery(numerics: &Numerics) -> Outcome {
    let run = (|| -> Result<(bool, String)> {
        let residual = |p: &ModelParams| -> Result<f64> {
            let a = affinity(p, &numerics.quadrature)?;
            Ok(gc_symmetry_residual(p, &gc_grid(a, GC_GRID_POINTS), numerics)?.max_residual)
        };
        let base = residual(&preset_params(300.0, 250.0, 0.0, 0.0))?;
        let squeezed = residual(&preset_params(300.0, 250.0, 3.0, 3.0))?;
        let ratio = squeezed / base;
        let stat = residual(&preset_params(300.0, 250.0, 0.0, 0.0).reference())?;
        Ok((
            ratio < 1e-3 && stat <= 1e-10,
            format!("x=3 / x=0 residual ratio {ratio:.3e}; static residual {stat:.3e}"),
        ))
    })();
    outcome(7, "fluctuation symmetry recovery", run)
}

/// Static unsqueezed points sampled for the standard relation.
pub const TUR_SAMPLES: usize = 64;

pub fn tur_suite(numerics: &Numerics) -> Outcome {
    let run = (|| -> Result<(bool, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut standard_ok = true;
        let mut min_product = f64::INFINITY;
        for _ in 0..TUR_SAMPLES {
            let (tl, tr) = (rng.random_range(50.0..500.0), rng.random_range(50.0..500.0));
            let p = ModelParams::from_omega0_thz(
                7.4 * PI,
                BathSpec::new(1000.0, 0.0, tl)?,
                BathSpec::new(1000.0, 0.0, tr)?,
                DriveProtocol::undriven(),
            )?;
            let r = tur_report(&p, Route::default(), numerics)?;
            standard_ok &= r.standard_holds();
            if let Some(lhs) = r.standard_lhs {
                min_product = min_product.min(lhs);
            }
        }

        let raw = RawConfig {
            preset: Some("fig4".into()),
            ..RawConfig::default()
        };
        let sweeps = resolve(raw).map_err(|e| crate::Error::InvalidParameter {
            name: "preset",
            reason: e.to_string(),
        })?;
        let mut violations = 0;
        let mut checked = 0;
        for s in &sweeps {
            let points: Vec<ModelParams> = (0..s.len()).map(|i| s.point(i).map(|p| p.0)).collect::<Result<_>>()?;
            let reports = points
                .par_iter()
                .map(|p| tur_report(p, s.route, &s.numerics))
                .collect::<Result<Vec<_>>>()?;
            for r in reports.iter().filter(|r| r.flags.is_empty()) {
                checked += 1;
                if !r.modified_holds() {
                    violations += 1;
                }
            }
        }

        let p = preset_params(300.0, 300.0, 0.0, 0.0);
        let crossing = match locate_affinity_zero(&p, 0.1, 2.0, 1e-6, &numerics.quadrature) {
            Ok(root) => {
                let flagged = [-1e-7, 0.0, 1e-7].iter().all(|d| {
                    p.with_squeeze(root + d, 0.0)
                        .and_then(|q| tur_report(&q, Route::default(), numerics))
                        .map(|r| r.flags.contains(&TurFlag::AffinityZero) && r.g_omega.is_none())
                        .unwrap_or(false)
                });
                (
                    (root - 0.7).abs() < 0.05 && flagged,
                    format!("crossing at x_left = {root:.7}, flagged {flagged}"),
                )
            }
            Err(e) => (false, format!("no crossing on [0.1, 2]: {e}")),
        };
        let passed = standard_ok && violations == 0 && crossing.0;
        Ok((
            passed,
            format!(
                "standard min F*A = {min_product:.4} ({}); modified violations {violations}/{checked}; {}",
                if standard_ok { "holds" } else { "violated" },
                crossing.1
            ),
        ))
    })();
    outcome(8, "uncertainty relations", run)
}

pub fn degenerate_drive(numerics: &Numerics) -> Outcome {
    let run = (|| -> Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        for phi in [0.0, FRAC_PI_4, 2.0] {
            let base = preset_params(300.0, 250.0, 0.7, 0.0);
            let drive = DriveProtocol {
                phi_left: phi,
                phi_right: phi,
                ..*base.drive()
            };
            let p = base.with_drive(drive)?;
            let scale = dynamic_cumulant(&p, Order::First, numerics)?.abs();
            for order in Order::both() {
                for route in Route::ALL {
                    worst = worst.max(geometric_cumulant(&p, order, route, numerics)?.abs() / scale);
                }
            }
        }
        Ok((worst <= 1e-10, format!("max |j_g|/|j_d1| = {worst:.3e}")))
    })();
    outcome(9, "degenerate drive null", run)
}

pub fn low_temperature_scaling() -> Outcome {
    let run = (|| -> Result<(bool, String)> {
        let base = ModelParams::from_omega0_thz(
            7.4 * PI,
            BathSpec::new(1000.0, 2.0, 20.0)?,
            BathSpec::new(1000.0, 0.5, 20.0)?,
            DriveProtocol::quadrature(5.0, 100.0, FRAC_PI_4),
        )?;
        let grid: Vec<(f64, f64)> = (0..13).map(|k| (2.0 + 0.25 * f64::from(k), 0.5)).collect();
        let fit = low_temperature_limit_check(&base, 0.5, &grid)?;
        Ok((
            (fit.exponent - 1.0).abs() <= 0.1,
            format!(
                "fitted exponent {:.4} (rms {:.2e}) over {} points",
                fit.exponent, fit.residual, fit.points
            ),
        ))
    })();
    outcome(10, "low-temperature scaling", run)
}

/// Runs the fig2 preset into two directories and compares every file.
pub fn reproducibility_in(root: &Path) -> Outcome {
    let run = (|| -> std::result::Result<(bool, String), String> {
        let raw = RawConfig {
            preset: Some("fig2".into()),
            ..RawConfig::default()
        };
        let sweeps = resolve(raw).map_err(|e| e.to_string())?;
        let dirs = [root.join("a"), root.join("b")];
        let mut listings: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
        for dir in &dirs {
            let mut files = Vec::new();
            for s in &sweeps {
                for f in run_sweep(s, dir).map_err(|e| e.to_string())?.files {
                    let bytes = std::fs::read(&f).map_err(|e| e.to_string())?;
                    files.push((f.file_name().unwrap_or_default().to_string_lossy().into_owned(), bytes));
                }
            }
            listings.push(files);
        }
        let same = listings[0] == listings[1];
        Ok((same, format!("{} files compared", listings[0].len())))
    })();
    match run {
        Ok((passed, detail)) => Outcome {
            id: 11,
            name: "reproducibility",
            passed,
            detail,
        },
        Err(e) => Outcome {
            id: 11,
            name: "reproducibility",
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn scratch_dir() -> PathBuf {
    std::env::temp_dir().join(format!("geofcs-verify-{}", std::process::id()))
}

pub fn reproducibility() -> Outcome {
    let dir = scratch_dir();
    let outcome = reproducibility_in(&dir);
    let _ = std::fs::remove_dir_all(&dir);
    outcome
}

/// Every criterion in order.
pub fn run_all() -> Vec<Outcome> {
    let n = Numerics::default();
    vec![
        zero_eigenvalue(),
        route_agreement(&n),
        oracle_agreement(&n),
        exchange_symmetries(&n),
        diagonal_zero(&n),
        geometricity_decay(&n),
        gc_recovery(&n),
        tur_suite(&n),
        degenerate_drive(&n),
        low_temperature_scaling(),
        reproducibility(),
    ]
}
