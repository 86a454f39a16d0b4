// SPDX-License-Identifier: Apache-2.0

//! Sweep configuration: TOML schema, presets and validation.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::cumulants::{DerivativeScheme, DiskSpec, Numerics, QuadratureSpec};
use crate::geometry::Route;
use crate::model::{BathSpec, DriveProtocol, ModelParams};
use crate::oracle::PropagatorSettings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    XLeft,
    XRight,
    Lambda,
    Omega,
    PhiRelative,
    Amplitude,
    /// Explicit `(x_left, x_right)` pairs.
    SqueezePair,
}

impl AxisName {
    /// CSV column headers contributed by the axis.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            AxisName::XLeft => &["x_left"],
            AxisName::XRight => &["x_right"],
            AxisName::Lambda => &["lambda"],
            AxisName::Omega => &["omega"],
            AxisName::PhiRelative => &["phi_relative"],
            AxisName::Amplitude => &["amplitude"],
            AxisName::SqueezePair => &["x_left", "x_right"],
        }
    }
}

/// Quantities that can be written, one CSV each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Cumulants,
    Routes,
    Cgf,
    Curvature,
    Tur,
    Gc,
    ClosedForms,
    Oracle,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Cumulants => "cumulants",
            Quantity::Routes => "routes",
            Quantity::Cgf => "cgf",
            Quantity::Curvature => "curvature",
            Quantity::Tur => "tur",
            Quantity::Gc => "gc",
            Quantity::ClosedForms => "closed_forms",
            Quantity::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub omega0_thz: Option<f64>,
    pub theta0: Option<f64>,
    pub gamma_left: f64,
    pub gamma_right: f64,
    #[serde(default)]
    pub x_left: f64,
    #[serde(default)]
    pub x_right: f64,
    pub t_left: f64,
    pub t_right: f64,
    /// Counting field for CGF and curvature outputs without a λ axis.
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDrive {
    pub amplitude: f64,
    pub omega: f64,
    /// Common offset of the cosine/sine pair.
    pub phase: Option<f64>,
    pub phi_left: Option<f64>,
    pub phi_right: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAxis {
    pub name: AxisName,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
    pub pairs: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNumerics {
    pub quad_panels: Option<usize>,
    pub quad_points: Option<usize>,
    pub quad_tol: Option<f64>,
    pub disk_radial: Option<usize>,
    pub disk_angular: Option<usize>,
    pub disk_tol: Option<f64>,
    pub derivative_base_step: Option<f64>,
    pub derivative_levels: Option<usize>,
    pub derivative_tol: Option<f64>,
    pub route: Option<Route>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Periods per propagation run.
    #[serde(default = "default_periods")]
    pub periods: usize,
    /// Sampled trajectories per point; 0 disables sampling.
    #[serde(default)]
    pub trajectories: usize,
    /// Sampling horizon in periods.
    #[serde(default = "default_horizon")]
    pub horizon_periods: f64,
    #[serde(default)]
    pub propagator: Option<PropagatorSettings>,
}

fn default_periods() -> usize {
    30
}

fn default_horizon() -> f64 {
    1.0
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            periods: default_periods(),
            trajectories: 0,
            horizon_periods: default_horizon(),
            propagator: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub path: Option<PathBuf>,
}

/// The document as written.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub model: Option<RawModel>,
    pub drive: Option<RawDrive>,
    #[serde(default)]
    pub axes: Vec<RawAxis>,
    pub outputs: Option<Vec<Quantity>>,
    pub numerics: Option<RawNumerics>,
    pub oracle: Option<OracleConfig>,
    pub output: Option<RawOutput>,
}

/// One resolved sweep axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: AxisName,
    /// Values in grid order; pairs store two entries per point.
    pub values: Vec<Vec<f64>>,
}

/// A validated sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub name: String,
    pub preset: Option<String>,
    pub params: ModelParams,
    pub lambda: f64,
    pub axes: Vec<Axis>,
    pub outputs: Vec<Quantity>,
    pub numerics: Numerics,
    pub route: Route,
    pub oracle: OracleConfig,
    pub seed: u64,
    #[serde(skip)]
    pub output_path: PathBuf,
}

pub const DEFAULT_LAMBDA: f64 = 0.5;

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Validation(message.into())
}

/// Reads and validates a configuration file. A preset may expand into
/// several sweeps.
pub fn load_config(path: &Path) -> Result<Vec<SweepConfig>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<SweepConfig>, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| invalid(format!("config parse error: {e}")))?;
    resolve(raw)
}

pub fn resolve(raw: RawConfig) -> Result<Vec<SweepConfig>, CliError> {
    match raw.preset.clone() {
        Some(name) => {
            if raw.model.is_some() || raw.drive.is_some() || !raw.axes.is_empty() || raw.outputs.is_some() {
                return Err(invalid(format!(
                    "preset `{name}` fixes model, drive, axes and outputs; remove those sections"
                )));
            }
            let mut sweeps = Vec::new();
            for mut base in preset(&name)? {
                base.numerics = raw.numerics.clone().or(base.numerics);
                base.oracle = raw.oracle.clone().or(base.oracle);
                base.output = raw.output.clone().or(base.output);
                base.seed = raw.seed.or(base.seed);
                base.preset = Some(name.clone());
                sweeps.push(resolve_one(base)?);
            }
            Ok(sweeps)
        }
        None => Ok(vec![resolve_one(raw)?]),
    }
}

fn resolve_one(raw: RawConfig) -> Result<SweepConfig, CliError> {
    let model = raw.model.ok_or_else(|| invalid("missing [model] section"))?;
    let theta0 = match (model.omega0_thz, model.theta0) {
        (Some(w), None) => crate::model::theta_from_omega_thz(w),
        (None, Some(t)) => t,
        _ => return Err(invalid("model: give exactly one of omega0_thz and theta0")),
    };
    let drive = match raw.drive {
        None => DriveProtocol::undriven(),
        Some(d) => match (d.phase, d.phi_left, d.phi_right) {
            (Some(p), None, None) => DriveProtocol::quadrature(d.amplitude, d.omega, p),
            (None, Some(l), Some(r)) => DriveProtocol {
                amplitude: d.amplitude,
                omega: d.omega,
                phi_left: l,
                phi_right: r,
            },
            (None, None, None) => DriveProtocol::quadrature(d.amplitude, d.omega, 0.0),
            _ => return Err(invalid("drive: give either `phase` or both `phi_left` and `phi_right`")),
        },
    };
    let params = ModelParams::new(
        theta0,
        BathSpec::new(model.gamma_left, model.x_left, model.t_left).map_err(validation)?,
        BathSpec::new(model.gamma_right, model.x_right, model.t_right).map_err(validation)?,
        drive,
    )
    .map_err(validation)?;

    if raw.axes.len() > 2 {
        return Err(invalid(format!("at most 2 sweep axes, got {}", raw.axes.len())));
    }
    let mut axes = Vec::with_capacity(raw.axes.len());
    let mut columns = BTreeSet::new();
    for a in raw.axes {
        let axis = resolve_axis(a)?;
        for c in axis.name.columns() {
            if !columns.insert(*c) {
                return Err(invalid(format!("duplicate sweep axis `{c}`")));
            }
        }
        axes.push(axis);
    }

    let outputs = raw.outputs.unwrap_or_else(|| vec![Quantity::Cumulants]);
    if outputs.is_empty() {
        return Err(invalid("outputs must name at least one quantity"));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = outputs.iter().find(|q| !seen.insert(**q)) {
        return Err(invalid(format!("duplicate output `{}`", dup.name())));
    }

    let (numerics, route) = resolve_numerics(raw.numerics.unwrap_or_default())?;
    let oracle = raw.oracle.unwrap_or_default();
    if oracle.periods < 2 {
        return Err(invalid("oracle.periods must be at least 2"));
    }
    if !(oracle.horizon_periods > 0.0) {
        return Err(invalid("oracle.horizon_periods must be positive"));
    }

    let config = SweepConfig {
        name: raw.name.unwrap_or_else(|| "sweep".into()),
        preset: raw.preset,
        params,
        lambda: model.lambda.unwrap_or(DEFAULT_LAMBDA),
        axes,
        outputs,
        numerics,
        route,
        oracle,
        seed: raw.seed.unwrap_or(0),
        output_path: raw.output.and_then(|o| o.path).unwrap_or_else(|| PathBuf::from("out")),
    };
    // every grid point must be a valid model
    for index in 0..config.len() {
        config.point(index).map_err(validation)?;
    }
    Ok(config)
}

fn validation(e: crate::Error) -> CliError {
    CliError::Validation(e.to_string())
}

fn resolve_axis(a: RawAxis) -> Result<Axis, CliError> {
    let label = a.name.columns().join("/");
    let values: Vec<Vec<f64>> = match (a.name, &a.pairs, &a.values) {
        (AxisName::SqueezePair, Some(pairs), None) => pairs.iter().map(|p| p.to_vec()).collect(),
        (AxisName::SqueezePair, _, _) => return Err(invalid("squeeze_pair axis takes `pairs` only")),
        (_, Some(_), _) => return Err(invalid(format!("axis `{label}` does not take `pairs`"))),
        (_, None, Some(v)) => {
            if a.min.is_some() || a.max.is_some() || a.count.is_some() {
                return Err(invalid(format!(
                    "axis `{label}`: give either `values` or min/max/count"
                )));
            }
            v.iter().map(|&x| vec![x]).collect()
        }
        (_, None, None) => {
            let (min, max, count) = match (a.min, a.max, a.count) {
                (Some(lo), Some(hi), Some(n)) => (lo, hi, n),
                _ => return Err(invalid(format!("axis `{label}` needs min, max and count"))),
            };
            if count < 2 {
                return Err(invalid(format!("axis `{label}` count must be at least 2, got {count}")));
            }
            if !(min.is_finite() && max.is_finite() && max > min) {
                return Err(invalid(format!("axis `{label}` needs finite min < max")));
            }
            (0..count)
                .map(|k| vec![min + (max - min) * k as f64 / (count - 1) as f64])
                .collect()
        }
    };
    if values.len() < 2 {
        return Err(invalid(format!("axis `{label}` needs at least 2 values")));
    }
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid(format!("axis `{label}` has non-finite values")));
    }
    Ok(Axis { name: a.name, values })
}

fn resolve_numerics(raw: RawNumerics) -> Result<(Numerics, Route), CliError> {
    let q = QuadratureSpec::default();
    let quadrature = QuadratureSpec {
        panels: raw.quad_panels.unwrap_or(q.panels),
        points: raw.quad_points.unwrap_or(q.points),
        tol: raw.quad_tol.unwrap_or(q.tol),
        max_panels: q.max_panels.max(raw.quad_panels.unwrap_or(0)),
    };
    let d = DiskSpec::default();
    let disk = DiskSpec {
        radial: raw.disk_radial.unwrap_or(d.radial),
        angular: raw.disk_angular.unwrap_or(d.angular),
        tol: raw.disk_tol.unwrap_or(d.tol),
        max_radial: d.max_radial.max(raw.disk_radial.unwrap_or(0)),
    };
    let derivative = DerivativeScheme::halving(
        raw.derivative_base_step.unwrap_or(1e-2),
        raw.derivative_levels.unwrap_or(4),
        raw.derivative_tol.unwrap_or(1e-8),
    )
    .map_err(validation)?;
    let numerics = Numerics {
        quadrature,
        derivative,
        disk,
    };
    numerics.validate().map_err(validation)?;
    Ok((numerics, raw.route.unwrap_or_default()))
}

impl SweepConfig {
    /// Number of grid points (1 without axes).
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of grid point `index`; the last axis varies fastest.
    pub fn coordinates(&self, index: usize) -> Vec<(AxisName, &[f64])> {
        let mut rest = index;
        let mut coords = vec![(AxisName::Lambda, &[][..]); self.axes.len()];
        for (i, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            coords[i] = (axis.name, &axis.values[rest % n][..]);
            rest /= n;
        }
        coords
    }

    /// Model and counting field at grid point `index`.
    pub fn point(&self, index: usize) -> crate::Result<(ModelParams, f64)> {
        let mut params = self.params;
        let mut lambda = self.lambda;
        for (name, v) in self.coordinates(index) {
            let mut drive = *params.drive();
            params = match name {
                AxisName::XLeft => params.with_squeeze(v[0], params.right().squeeze)?,
                AxisName::XRight => params.with_squeeze(params.left().squeeze, v[0])?,
                AxisName::SqueezePair => params.with_squeeze(v[0], v[1])?,
                AxisName::Lambda => {
                    lambda = v[0];
                    params
                }
                AxisName::Omega => {
                    drive.omega = v[0];
                    params.with_drive(drive)?
                }
                AxisName::PhiRelative => {
                    drive.phi_right = drive.phi_left - v[0];
                    params.with_drive(drive)?
                }
                AxisName::Amplitude => {
                    drive.amplitude = v[0];
                    params.with_drive(drive)?
                }
            };
        }
        Ok((params, lambda))
    }

    pub fn axis_columns(&self) -> Vec<&'static str> {
        self.axes
            .iter()
            .flat_map(|a| a.name.columns().iter().copied())
            .collect()
    }
}

/// Names accepted by `preset`.
pub const PRESETS: [&str; 4] = ["fig1cd", "fig2", "fig3", "fig4"];

/// Site frequency of every preset, angular THz.
pub const PRESET_OMEGA0_THZ: f64 = 7.4 * PI;

fn preset_model(t_left: f64, t_right: f64, x_right: f64) -> RawModel {
    RawModel {
        omega0_thz: Some(PRESET_OMEGA0_THZ),
        theta0: None,
        gamma_left: 1000.0,
        gamma_right: 1000.0,
        x_left: 0.0,
        x_right,
        t_left,
        t_right,
        lambda: None,
    }
}

fn preset_drive() -> RawDrive {
    RawDrive {
        amplitude: 100.0,
        omega: 100.0,
        phase: Some(FRAC_PI_4),
        phi_left: None,
        phi_right: None,
    }
}

fn range(name: AxisName, min: f64, max: f64, count: usize) -> RawAxis {
    RawAxis {
        name,
        min: Some(min),
        max: Some(max),
        count: Some(count),
        values: None,
        pairs: None,
    }
}

/// Frozen sweeps behind each preset.
pub fn preset(name: &str) -> Result<Vec<RawConfig>, CliError> {
    let base = |name: &str, model: RawModel, axes: Vec<RawAxis>, outputs: Vec<Quantity>| RawConfig {
        name: Some(name.into()),
        model: Some(model),
        drive: Some(preset_drive()),
        axes,
        outputs: Some(outputs),
        ..RawConfig::default()
    };
    let grid = || {
        vec![
            range(AxisName::XLeft, 0.0, 2.0, 11),
            range(AxisName::XRight, 0.0, 2.0, 11),
        ]
    };
    match name {
        "fig1cd" => Ok(vec![base(
            "fig1cd",
            preset_model(300.0, 250.0, 0.0),
            vec![
                RawAxis {
                    name: AxisName::SqueezePair,
                    min: None,
                    max: None,
                    count: None,
                    values: None,
                    pairs: Some(vec![[0.0, 0.0], [0.7, 0.0], [1.5, 1.5], [PI, PI]]),
                },
                range(AxisName::Lambda, -3.0, 3.0, 61),
            ],
            vec![Quantity::Cgf, Quantity::Curvature],
        )]),
        "fig2" => Ok(vec![base(
            "fig2",
            preset_model(300.0, 300.0, 0.0),
            grid(),
            vec![Quantity::Cumulants, Quantity::ClosedForms],
        )]),
        "fig3" => Ok(vec![base(
            "fig3",
            preset_model(300.0, 250.0, 0.0),
            grid(),
            vec![Quantity::Cumulants, Quantity::ClosedForms],
        )]),
        "fig4" => Ok(vec![
            base(
                "fig4a",
                preset_model(300.0, 300.0, 0.7),
                vec![range(AxisName::XLeft, 0.0, 2.0, 41)],
                vec![Quantity::Tur],
            ),
            base("fig4c", preset_model(300.0, 300.0, 0.0), grid(), vec![Quantity::Tur]),
        ]),
        other => Err(invalid(format!(
            "unknown preset `{other}`; expected one of {PRESETS:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in PRESETS {
            let sweeps = parse_config(&format!("preset = \"{name}\"")).unwrap();
            assert!(!sweeps.is_empty());
            for s in &sweeps {
                assert_eq!(s.params.left().gamma, 1000.0);
                assert_eq!(s.params.drive().amplitude, 100.0);
            }
        }
    }

    #[test]
    fn grid_order_is_row_major() {
        let s = &parse_config("preset = \"fig2\"").unwrap()[0];
        assert_eq!(s.len(), 121);
        let (p, _) = s.point(12).unwrap();
        assert!((p.left().squeeze - 0.2).abs() < 1e-15 && (p.right().squeeze - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_documents() {
        let model =
            "[model]\nomega0_thz = 23.2\ngamma_left = 1000.0\ngamma_right = 1000.0\nt_left = 50.0\nt_right = 300.0\n";
        let drive = "[drive]\namplitude = 100.0\nomega = 100.0\nphase = 0.78\n";
        let err = parse_config(&format!("{model}{drive}")).unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        let dup = "[[axes]]\nname = \"x_left\"\nmin = 0.0\nmax = 1.0\ncount = 3\n".repeat(2);
        let ok_model = model.replace("50.0", "300.0");
        let err = parse_config(&format!("{ok_model}{drive}{dup}")).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = parse_config("bogus = 1").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}
