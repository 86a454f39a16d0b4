// SPDX-License-Identifier: Apache-2.0

//! Grid evaluation and output writing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Quantity, SweepConfig};
use super::CliError;
use crate::cumulants::{dynamic_cgf, dynamic_cumulant, reference_cumulant, Numerics, Order};
use crate::geometry::{
    curvature, curvature_first_principles, curvature_printed, geometric_cgf, geometric_cumulant, geometric_flux_closed,
    geometric_noise_closed, PrintedReading, Route,
};
use crate::model::ModelParams;
use crate::oracle::{finite_time_cumulant, sample_trajectories, stencil_runs};
use crate::report::{RouteCheck, NOISE_FLOOR};
use crate::thermo::{affinity, affinity_printed, gc_grid, gc_symmetry_residual, Cumulants, TurReport};
use crate::Error;

/// Points on the λ grid used for the Gallavotti–Cohen residual.
pub const GC_POINTS: usize = 41;

/// One CSV row: numeric cells (`None` = withheld) and flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Row {
    pub cells: Vec<Option<f64>>,
    pub flags: Vec<String>,
}

impl Row {
    fn push(&mut self, v: f64) {
        self.cells.push(Some(v));
    }

    fn push_or_flag(&mut self, v: crate::Result<f64>, flag: &str) -> Result<(), CliError> {
        match v {
            Ok(v) => self.cells.push(Some(v)),
            Err(e) if tolerated(&e) => {
                self.cells.push(None);
                self.flags.push(flag.into());
            }
            Err(e) => return Err(e.into()),
        }
        Ok(())
    }
}

/// Errors that mark a point rather than abort the sweep.
fn tolerated(e: &Error) -> bool {
    matches!(
        e,
        Error::ReferenceZero { .. } | Error::UndefinedCorrection { .. } | Error::Domain { .. }
    )
}

pub fn columns(q: Quantity) -> &'static [&'static str] {
    match q {
        Quantity::Cumulants => &["j_d1", "j_d2", "j_g1", "j_g2", "c_d1", "c_d2", "c_g1", "c_g2"],
        Quantity::Routes => &[
            "j_g1_line",
            "j_g1_surface_analytic",
            "j_g1_surface_first_principles",
            "disagreement_1",
            "j_g2_line",
            "j_g2_surface_analytic",
            "j_g2_surface_first_principles",
            "disagreement_2",
        ],
        Quantity::Cgf => &["s_d", "s_g", "s_g_line"],
        Quantity::Curvature => &["f_analytic", "f_first_principles", "f_printed", "f_printed_swapped"],
        Quantity::Tur => &[
            "affinity",
            "affinity_printed",
            "j_d1",
            "j_g1",
            "j_d2",
            "j_g2",
            "fano",
            "g_omega",
            "sigma_min",
            "standard_lhs",
            "modified_lhs",
        ],
        Quantity::Gc => &["affinity", "gc_residual", "gc_scale"],
        Quantity::ClosedForms => &[
            "j_g1_printed",
            "j_g1",
            "residual_1",
            "j_g2_printed",
            "j_g2",
            "residual_2",
        ],
        Quantity::Oracle => &[
            "j1_propagator",
            "j2_propagator",
            "j1_adiabatic",
            "j2_adiabatic",
            "sampler_mean_rate",
            "sampler_mean_rate_se",
            "sampler_variance_rate",
            "sampler_variance_rate_se",
        ],
    }
}

/// Evaluates one quantity at one grid point.
pub fn evaluate(
    q: Quantity,
    params: &ModelParams,
    lambda: f64,
    config: &SweepConfig,
    index: usize,
) -> Result<Row, CliError> {
    let n: &Numerics = &config.numerics;
    let route = config.route;
    let mut row = Row::default();
    match q {
        Quantity::Cumulants => {
            let c = Cumulants::compute(params, route, n)?;
            let values = [c.dynamic_flux, c.dynamic_noise, c.geometric_flux, c.geometric_noise];
            for v in values {
                row.push(v);
            }
            let noise_ref = reference_cumulant(params, Order::Second, n)?;
            let flux_ref = reference_cumulant(params, Order::First, n)?;
            let refs = [flux_ref, noise_ref];
            let zero = [flux_ref.abs() <= 1e-10 * noise_ref, noise_ref == 0.0];
            let mut scaled = [None; 4];
            for i in 0..2 {
                if zero[i] {
                    row.flags.push(format!("reference_zero_{}", i + 1));
                } else {
                    scaled[i] = Some(values[i] / refs[i]);
                    scaled[i + 2] = Some(values[i + 2] / refs[i]);
                }
            }
            row.cells.extend(scaled);
        }
        Quantity::Routes => {
            let flux = RouteCheck::evaluate(params, Order::First, 0.0, n)?;
            let floor = NOISE_FLOOR * flux.surface_analytic.abs();
            let noise = RouteCheck::evaluate(params, Order::Second, floor, n)?;
            for c in [&flux, &noise] {
                row.push(c.line);
                row.push(c.surface_analytic);
                row.push(c.surface_first_principles);
                row.push(c.disagreement);
                if !c.passed {
                    row.flags.push(format!("route_disagreement_{}", c.order));
                }
            }
        }
        Quantity::Cgf => {
            row.push(dynamic_cgf(params, lambda, &n.quadrature)?);
            row.push(geometric_cgf(params, lambda, route, n)?);
            row.push(geometric_cgf(params, lambda, Route::Line, n)?);
        }
        Quantity::Curvature => {
            let (tl, tr) = (params.left().base_temperature, params.right().base_temperature);
            row.push(curvature(params, lambda, tl, tr)?);
            row.push(curvature_first_principles(params, lambda, tl, tr)?);
            row.push_or_flag(
                curvature_printed(params, lambda, tl, tr, PrintedReading::AsPrinted),
                "printed_domain",
            )?;
            row.push_or_flag(
                curvature_printed(params, lambda, tl, tr, PrintedReading::Swapped),
                "printed_swapped_domain",
            )?;
        }
        Quantity::Tur => {
            let a = affinity(params, &n.quadrature)?;
            let c = Cumulants::compute(params, route, n)?;
            let report = TurReport::from_parts(c, a);
            row.push(a);
            row.push_or_flag(affinity_printed(params, &n.quadrature), "printed_affinity_domain")?;
            for v in [
                c.dynamic_flux,
                c.geometric_flux,
                c.dynamic_noise,
                c.geometric_noise,
                report.fano,
            ] {
                row.push(v);
            }
            row.cells.extend([
                report.g_omega,
                report.sigma_min,
                report.standard_lhs,
                report.modified_lhs,
            ]);
            row.flags.extend(report.flags.iter().map(|f| f.name().to_string()));
            if !report.modified_holds() {
                row.flags.push("modified_tur_violated".into());
            }
        }
        Quantity::Gc => {
            let a = affinity(params, &n.quadrature)?;
            let r = gc_symmetry_residual(params, &gc_grid(a, GC_POINTS), n)?;
            row.push(r.affinity);
            row.push(r.max_residual);
            row.push(r.scale);
        }
        Quantity::ClosedForms => {
            for c in [geometric_flux_closed(params, n)?, geometric_noise_closed(params, n)?] {
                row.push(c.printed);
                row.push(c.authoritative);
                row.push(c.residual);
            }
        }
        Quantity::Oracle => {
            let settings = config.oracle.propagator.clone().unwrap_or_default();
            for order in Order::both() {
                let runs = stencil_runs(params, order, &n.derivative, config.oracle.periods, &settings)?;
                row.push(finite_time_cumulant(&runs, order, &n.derivative)?);
            }
            for order in Order::both() {
                row.push(dynamic_cumulant(params, order, n)? + geometric_cumulant(params, order, route, n)?);
            }
            if config.oracle.trajectories > 0 {
                let unit = crate::oracle::time_unit(params, &settings);
                let horizon = config.oracle.horizon_periods * unit;
                let seed = config.seed.wrapping_add(index as u64);
                let b = sample_trajectories(params, config.oracle.trajectories, horizon, seed)?;
                row.push(b.mean() / horizon);
                row.push(b.mean_standard_error() / horizon);
                row.push(b.variance() / horizon);
                row.push(b.variance_standard_error() / horizon);
            } else {
                row.cells.extend([None; 4]);
            }
        }
    }
    Ok(row)
}

/// Formats a cell with 17 significant digits.
pub fn format_cell(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.16e}"),
        None => String::new(),
    }
}

#[derive(Serialize)]
struct ManifestPoint {
    index: usize,
    coordinates: BTreeMap<&'static str, f64>,
    flags: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a SweepConfig,
    files: Vec<String>,
    points: Vec<ManifestPoint>,
}

/// Outcome of one sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub files: Vec<PathBuf>,
    /// Points whose geometric routes disagreed.
    pub cross_check_failures: usize,
}

/// Evaluates the whole grid and writes one CSV per quantity plus the
/// manifest into `out`.
pub fn run_sweep(config: &SweepConfig, out: &Path) -> Result<SweepOutcome, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let points: Vec<usize> = (0..config.len()).collect();
    let rows: Vec<Vec<Row>> = points
        .par_iter()
        .map(|&i| {
            let (params, lambda) = config.point(i)?;
            config
                .outputs
                .iter()
                .map(|&q| evaluate(q, &params, lambda, config, i))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, CliError>>()?;

    let axis_columns = config.axis_columns();
    let mut files = Vec::new();
    let mut cross_check_failures = 0;
    for (k, &q) in config.outputs.iter().enumerate() {
        let path = out.join(format!("{}_{}.csv", config.name, q.name()));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut header: Vec<&str> = axis_columns.clone();
        header.extend(columns(q));
        header.push("flags");
        w.write_record(&header).map_err(io)?;
        for (i, point_rows) in rows.iter().enumerate() {
            let row = &point_rows[k];
            let mut record: Vec<String> = config
                .coordinates(i)
                .iter()
                .flat_map(|(_, v)| v.iter().map(|&x| format_cell(Some(x))))
                .collect();
            record.extend(row.cells.iter().map(|&c| format_cell(c)));
            record.push(row.flags.join(";"));
            w.write_record(&record).map_err(io)?;
            if q == Quantity::Routes && row.flags.iter().any(|f| f.starts_with("route_disagreement")) {
                cross_check_failures += 1;
            }
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        files.push(path);
    }

    let manifest_points = (0..config.len())
        .map(|i| {
            let mut coordinates = BTreeMap::new();
            for (name, v) in config.coordinates(i) {
                for (c, x) in name.columns().iter().zip(v) {
                    coordinates.insert(*c, *x);
                }
            }
            let mut flags: Vec<String> = rows[i].iter().flat_map(|r| r.flags.iter().cloned()).collect();
            flags.sort();
            flags.dedup();
            ManifestPoint {
                index: i,
                coordinates,
                flags,
            }
        })
        .collect();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        files: files
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
        points: manifest_points,
    };
    let path = out.join(format!("{}_manifest.json", config.name));
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(SweepOutcome {
        files,
        cross_check_failures,
    })
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}
