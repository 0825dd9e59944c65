//! Run configuration (TOML). Unknown keys are rejected; every section except
//! `[grid]` may be omitted.
//!
//! ```toml
//! [grid]
//! nx = 32
//! ny = 32
//! Lx = 1.0
//! Ly = 1.0
//!
//! [ambient]
//! preset = "compressive"
//! amplitude = 0.001
//!
//! [metric]
//! C1 = 0.01
//! C2 = 6.0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ambient::{r_of, u_star_norm, AmbientField, Preset};
use crate::error::{Error, Result};
use crate::generator::Physics;
use crate::grid::Grid;
use crate::lab::LabParams;
use crate::metric::xi_root;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: Option<usize>,
    ny: Option<usize>,
    #[serde(rename = "Lx")]
    lx: Option<f64>,
    #[serde(rename = "Ly")]
    ly: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPhysics {
    nu: f64,
    lambda: f64,
    eta: f64,
    stabilization: f64,
}

impl Default for RawPhysics {
    fn default() -> Self {
        let p = Physics::default();
        Self { nu: p.nu, lambda: p.lambda, eta: p.eta, stabilization: p.stabilization }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawAmbient {
    preset: String,
    amplitude: f64,
}

impl Default for RawAmbient {
    fn default() -> Self {
        Self { preset: "zero".into(), amplitude: 0.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMetric {
    #[serde(rename = "C1")]
    c1: f64,
    #[serde(rename = "C2")]
    c2: f64,
    delta: f64,
}

impl Default for RawMetric {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0, delta: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventConfig {
    pub a_list: Vec<f64>,
    pub b_list: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self {
            a_list: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            b_list: vec![0.0, 1.0, -1.0, 10.0, -10.0],
            samples: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { dt: 0.05, t_end: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub emit_plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("fsilab-out"), emit_plots: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    /// multiplier on every check threshold
    pub tolerance: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { tolerance: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DissipativityConfig {
    pub samples: usize,
}

impl Default for DissipativityConfig {
    fn default() -> Self {
        Self { samples: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub count: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { count: 8 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: Option<RawGrid>,
    #[serde(default)]
    physics: RawPhysics,
    #[serde(default)]
    ambient: RawAmbient,
    #[serde(default)]
    metric: RawMetric,
    #[serde(default)]
    resolvent: ResolventConfig,
    #[serde(default)]
    evolve: EvolveConfig,
    #[serde(default)]
    output: OutputConfig,
    #[serde(default)]
    check: CheckConfig,
    #[serde(default)]
    dissipativity: DissipativityConfig,
    #[serde(default)]
    spectrum: SpectrumConfig,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Grid,
    pub physics: Physics,
    pub preset: Preset,
    pub amplitude: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
    pub resolvent: ResolventConfig,
    pub evolve: EvolveConfig,
    pub output: OutputConfig,
    pub check: CheckConfig,
    pub dissipativity: DissipativityConfig,
    pub spectrum: SpectrumConfig,
}

impl RunConfig {
    pub fn lab_params(&self) -> LabParams {
        let mut params = LabParams::new(self.grid).with_ambient(self.preset, self.amplitude).with_constants(self.c1, self.c2);
        params.physics = self.physics;
        params
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let rg = raw.grid.ok_or_else(|| invalid("missing [grid] section"))?;
    let nx = rg.nx.ok_or_else(|| invalid("grid.nx is required"))?;
    let ny = rg.ny.ok_or_else(|| invalid("grid.ny is required"))?;
    let grid = Grid::new(nx, ny, rg.lx.unwrap_or(1.0), rg.ly.unwrap_or(1.0)).map_err(|e| invalid(e.to_string()))?;

    let p = raw.physics;
    let physics = Physics { nu: p.nu, lambda: p.lambda, eta: p.eta, stabilization: p.stabilization };
    physics.validate().map_err(|e| invalid(e.to_string()))?;

    let preset: Preset = raw.ambient.preset.parse().map_err(|e: Error| invalid(e.to_string()))?;
    let amplitude = raw.ambient.amplitude;
    let m = raw.metric;
    if !(m.delta > 0.0 && m.delta.is_finite()) {
        return Err(invalid(format!("metric.delta must be positive, got {}", m.delta)));
    }
    // surface an inadmissible ambient flow before any assembly
    let ambient = AmbientField::preset(preset, amplitude, &grid).map_err(|e| invalid(e.to_string()))?;
    xi_root(m.c1, m.c2, r_of(u_star_norm(&ambient))).map_err(|e| invalid(e.to_string()))?;

    let r = raw.resolvent;
    if r.a_list.is_empty() || r.a_list.iter().any(|a| !(*a > 0.0 && a.is_finite())) || r.a_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("resolvent.a_list must be nonempty, positive and strictly decreasing"));
    }
    if r.b_list.is_empty() || r.b_list.iter().any(|b| !b.is_finite()) {
        return Err(invalid("resolvent.b_list must be nonempty and finite"));
    }
    if r.samples == 0 {
        return Err(invalid("resolvent.samples must be >= 1"));
    }
    let ev = raw.evolve;
    if !(ev.dt > 0.0 && ev.dt.is_finite()) || !(ev.t_end >= 0.0 && ev.t_end.is_finite()) {
        return Err(invalid(format!("evolve needs dt > 0 and T >= 0, got dt = {}, T = {}", ev.dt, ev.t_end)));
    }
    if !(raw.check.tolerance >= 0.0 && raw.check.tolerance.is_finite()) {
        return Err(invalid("check.tolerance must be >= 0"));
    }
    if raw.dissipativity.samples == 0 {
        return Err(invalid("dissipativity.samples must be >= 1"));
    }
    if raw.spectrum.count == 0 {
        return Err(invalid("spectrum.count must be >= 1"));
    }
    Ok(RunConfig {
        grid,
        physics,
        preset,
        amplitude,
        c1: m.c1,
        c2: m.c2,
        delta: m.delta,
        resolvent: r,
        evolve: ev,
        output: raw.output,
        check: raw.check,
        dissipativity: raw.dissipativity,
        spectrum: raw.spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse_config("[grid]\nnx = 8\nny = 9\n").unwrap();
        assert_eq!((c.grid.nx, c.grid.ny), (8, 9));
        assert_eq!(c.preset, Preset::Zero);
        assert_eq!(c.resolvent, ResolventConfig::default());
        assert_eq!(c.check.tolerance, 1.0);
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        let e = parse_config("[grid]\nnx = 8\nny = 8\nfoo = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse(ref m) if m.contains("foo")), "{e}");
    }

    #[test]
    fn empty_grid_section_is_invalid() {
        assert!(matches!(parse_config("[grid]\n"), Err(Error::Config(_))));
        assert!(matches!(parse_config(""), Err(Error::Config(_))));
    }

    #[test]
    fn large_amplitude_rejected() {
        let e = parse_config("[grid]\nnx = 8\nny = 8\n[ambient]\npreset = \"compressive\"\namplitude = 10.0\n").unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("too large")), "{e}");
    }
}
