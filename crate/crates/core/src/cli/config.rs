//! Run configuration: a TOML file (or a metadata JSON file, whose `config`
//! entry is a fully resolved configuration).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::liouville::{GapMethod, SpectralOptions, ITERATIVE_MAX_N};
use crate::meanfield::BlochVector;
use crate::params::{ModelParams, SweepParam};
use crate::sweep::{Axis, Direction, GridSpec, HysteresisSolver, HysteresisSpec, MeanFieldOptions, DEFAULT_THRESHOLD};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "DICKE_PHASE_OUTPUT_DIR";
/// Output directory when neither flag, config nor environment set one.
pub const DEFAULT_OUTPUT_DIR: &str = "output";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    MfFixedPoints,
    MfEvolve,
    MfPhaseDiagram,
    Multistability,
    QuantumSteady,
    QuantumGap,
    QuantumEvolve,
    Hysteresis,
    Boundaries,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::MfFixedPoints => "mf-fixed-points",
            Task::MfEvolve => "mf-evolve",
            Task::MfPhaseDiagram => "mf-phase-diagram",
            Task::Multistability => "multistability",
            Task::QuantumSteady => "quantum-steady",
            Task::QuantumGap => "quantum-gap",
            Task::QuantumEvolve => "quantum-evolve",
            Task::Hysteresis => "hysteresis",
            Task::Boundaries => "boundaries",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
}

/// Mean-field solver block; the RNG seed is the top-level `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeanFieldConfig {
    pub n_seeds: usize,
    pub tilt: f64,
    pub chunk_time: f64,
    pub max_time: f64,
    pub capture_distance: f64,
    pub cycle_window: f64,
    pub sample_interval: f64,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        let d = MeanFieldOptions::default();
        MeanFieldConfig {
            n_seeds: d.n_seeds,
            tilt: d.tilt,
            chunk_time: d.chunk_time,
            max_time: d.max_time,
            capture_distance: d.capture_distance,
            cycle_window: d.cycle_window,
            sample_interval: d.sample_interval,
        }
    }
}

impl MeanFieldConfig {
    pub fn options(&self, seed: u64) -> MeanFieldOptions {
        MeanFieldOptions {
            n_seeds: self.n_seeds,
            rng_seed: seed,
            tilt: self.tilt,
            chunk_time: self.chunk_time,
            max_time: self.max_time,
            capture_distance: self.capture_distance,
            cycle_window: self.cycle_window,
            sample_interval: self.sample_interval,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.n_seeds == 0 {
            return Err("meanfield.n_seeds must be at least 1".into());
        }
        for (name, v) in [
            ("chunk_time", self.chunk_time),
            ("max_time", self.max_time),
            ("capture_distance", self.capture_distance),
            ("cycle_window", self.cycle_window),
            ("sample_interval", self.sample_interval),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("meanfield.{name} must be positive, got {v}"));
            }
        }
        if !(self.tilt > 0.0 && self.tilt < 1.0) {
            return Err(format!("meanfield.tilt must lie in (0, 1), got {}", self.tilt));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    /// One or more initial Bloch vectors (normalized before use).
    pub initial: Vec<[f64; 3]>,
    pub t_end: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// Leading fraction of each trajectory ignored by limit-cycle detection.
    #[serde(default = "default_transient")]
    pub transient_fraction: f64,
}

fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_sample_interval() -> f64 {
    0.05
}
fn default_transient() -> f64 {
    0.5
}

/// Initial density matrix of a quantum evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialRho {
    /// `|j, -j>`.
    Ground,
    /// `|j, +j>`.
    Top,
    MaximallyMixed,
    /// Spin coherent state along the given Bloch vector.
    Coherent([f64; 3]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumEvolveConfig {
    #[serde(default = "default_initial_rho")]
    pub initial: InitialRho,
    pub t_end: f64,
    #[serde(default = "default_quantum_tol")]
    pub tol: f64,
    #[serde(default = "default_quantum_sample")]
    pub sample_interval: f64,
}

fn default_initial_rho() -> InitialRho {
    InitialRho::Ground
}
fn default_quantum_tol() -> f64 {
    1e-9
}
fn default_quantum_sample() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "default_gap_method")]
    pub method: GapMethod,
    #[serde(default = "default_n_eigs")]
    pub n_eigs: usize,
    #[serde(default = "default_spectral_tol")]
    pub tol: f64,
    #[serde(default = "default_zero_factor")]
    pub zero_tolerance_factor: f64,
}

fn default_gap_method() -> GapMethod {
    GapMethod::Auto
}
fn default_n_eigs() -> usize {
    SpectralOptions::default().n_eigs
}
fn default_spectral_tol() -> f64 {
    SpectralOptions::default().tol
}
fn default_zero_factor() -> f64 {
    SpectralOptions::default().zero_tolerance_factor
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            method: default_gap_method(),
            n_eigs: default_n_eigs(),
            tol: default_spectral_tol(),
            zero_tolerance_factor: default_zero_factor(),
        }
    }
}

impl SpectralConfig {
    pub fn options(&self) -> SpectralOptions {
        SpectralOptions { n_eigs: self.n_eigs, tol: self.tol, zero_tolerance_factor: self.zero_tolerance_factor }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub p_count: usize,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    pub solver: HysteresisSolver,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_initial_bloch")]
    pub initial: [f64; 3],
}

fn default_direction() -> Direction {
    Direction::Both
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_initial_bloch() -> [f64; 3] {
    BlochVector::SOUTH_POLE.to_array()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundariesConfig {
    #[serde(rename = "V_min")]
    pub v_min: f64,
    #[serde(rename = "V_max")]
    pub v_max: f64,
    pub count: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, format: OutputFormat::Csv }
    }
}

/// A batch run. Exactly one task; the blocks it needs must be present and
/// blocks it does not use are rejected, as are unknown keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    /// Seed of the multi-start fixed-point search; generated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield: Option<MeanFieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_evolve: Option<QuantumEvolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hysteresis: Option<HysteresisConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<BoundariesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

/// Reads a TOML config, or a metadata JSON file written by a previous run.
pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
        let cfg = match value.get("config") {
            Some(c) => c.clone(),
            None => value,
        };
        serde_json::from_value(cfg).map_err(|e| format!("invalid config: {e}"))
    } else {
        toml::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }
}

fn require<'a, T>(block: &'a Option<T>, name: &str, task: Task) -> Result<&'a T, String> {
    block.as_ref().ok_or_else(|| format!("task {} requires a [{name}] block", task.name()))
}

impl RunConfig {
    fn block_names(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("model", self.model.is_some()),
            ("grid", self.grid.is_some()),
            ("meanfield", self.meanfield.is_some()),
            ("evolve", self.evolve.is_some()),
            ("spectral", self.spectral.is_some()),
            ("quantum_evolve", self.quantum_evolve.is_some()),
            ("hysteresis", self.hysteresis.is_some()),
            ("boundaries", self.boundaries.is_some()),
        ]
    }

    /// Blocks the task may use: (name, required).
    fn allowed_blocks(&self) -> &'static [(&'static str, bool)] {
        match self.task {
            Task::MfFixedPoints => &[("model", true), ("meanfield", false)],
            Task::MfEvolve => &[("model", true), ("evolve", true)],
            Task::MfPhaseDiagram | Task::Multistability => &[("model", true), ("grid", true), ("meanfield", false)],
            Task::QuantumSteady => &[("model", true), ("grid", false)],
            Task::QuantumGap => &[("model", true), ("grid", false), ("spectral", false)],
            Task::QuantumEvolve => &[("model", true), ("quantum_evolve", true)],
            Task::Hysteresis => &[("model", true), ("hysteresis", true)],
            Task::Boundaries => &[("boundaries", true)],
        }
    }

    /// Materializes every default: seed, workers, optional task blocks and
    /// the output block. `seed_source` supplies a seed when none is given.
    pub fn resolve(mut self, seed_source: impl FnOnce() -> u64) -> RunConfig {
        if self.seed.is_none() {
            self.seed = Some(seed_source());
        }
        if self.workers.is_none() {
            self.workers = Some(1);
        }
        let allowed = self.allowed_blocks();
        let has = |name: &str| allowed.iter().any(|(n, _)| *n == name);
        if has("meanfield") && self.meanfield.is_none() {
            self.meanfield = Some(MeanFieldConfig::default());
        }
        if has("spectral") && self.spectral.is_none() {
            self.spectral = Some(SpectralConfig::default());
        }
        if self.output.is_none() {
            self.output = Some(OutputConfig::default());
        }
        self
    }

    /// Checks block presence and every value invariant.
    pub fn validate(&self) -> Result<(), String> {
        let allowed = self.allowed_blocks();
        for (name, present) in self.block_names() {
            let entry = allowed.iter().find(|(n, _)| *n == name);
            match (entry, present) {
                (None, true) => return Err(format!("task {} does not use a [{name}] block", self.task.name())),
                (Some((_, true)), false) => {
                    return Err(format!("task {} requires a [{name}] block", self.task.name()))
                }
                _ => {}
            }
        }
        if self.workers == Some(0) {
            return Err("workers must be at least 1".into());
        }
        if let Some(m) = &self.model {
            m.validate().map_err(|e| format!("[model]: {}", strip(e)))?;
        }
        if let Some(mf) = &self.meanfield {
            mf.validate()?;
        }
        if let Some(s) = &self.spectral {
            if s.n_eigs < 2 {
                return Err("spectral.n_eigs must be at least 2".into());
            }
            if !(s.tol > 0.0) || !(s.zero_tolerance_factor > 0.0) {
                return Err("spectral tolerances must be positive".into());
            }
        }
        let quantum = matches!(self.task, Task::QuantumSteady | Task::QuantumGap | Task::QuantumEvolve);
        if quantum {
            let model = require(&self.model, "model", self.task)?;
            let n = model.n.ok_or_else(|| format!("task {} requires model.N", self.task.name()))?;
            if n > ITERATIVE_MAX_N {
                return Err(format!("model.N must not exceed {ITERATIVE_MAX_N}, got {n}"));
            }
        }
        if let Some(g) = self.grid_spec() {
            g.validate().map_err(|e| format!("[grid]: {}", strip(e)))?;
            if self.task == Task::Multistability {
                let mut names: Vec<&str> = g.axes().iter().map(|a| a.param.name()).collect();
                names.sort();
                if names != ["g", "p"] {
                    return Err("multistability needs grid axes g and p".into());
                }
            }
        }
        match self.task {
            Task::MfEvolve => {
                let e = require(&self.evolve, "evolve", self.task)?;
                if e.initial.is_empty() {
                    return Err("evolve.initial must list at least one state".into());
                }
                for s in &e.initial {
                    let b = BlochVector::from_array(*s);
                    if !(b.is_finite() && b.norm() > 0.0) {
                        return Err(format!("evolve.initial entry {s:?} must be a nonzero finite vector"));
                    }
                }
                if !(e.t_end > 0.0) || !(e.sample_interval > 0.0) {
                    return Err("evolve.t_end and evolve.sample_interval must be positive".into());
                }
                for (name, tol) in [("rel_tol", e.rel_tol), ("abs_tol", e.abs_tol)] {
                    if !(tol > 0.0 && tol <= 1e-3) {
                        return Err(format!("evolve.{name} must lie in (0, 1e-3], got {tol}"));
                    }
                }
                if !(0.0..1.0).contains(&e.transient_fraction) {
                    return Err("evolve.transient_fraction must lie in [0, 1)".into());
                }
            }
            Task::QuantumEvolve => {
                let q = require(&self.quantum_evolve, "quantum_evolve", self.task)?;
                if !(q.t_end > 0.0) || !(q.sample_interval > 0.0) {
                    return Err("quantum_evolve.t_end and sample_interval must be positive".into());
                }
                if !(q.tol > 0.0 && q.tol <= 1e-3) {
                    return Err(format!("quantum_evolve.tol must lie in (0, 1e-3], got {}", q.tol));
                }
                if let InitialRho::Coherent(v) = q.initial {
                    let b = BlochVector::from_array(v);
                    if !(b.is_finite() && b.norm() > 0.0) {
                        return Err("quantum_evolve.initial coherent direction must be nonzero".into());
                    }
                }
            }
            Task::Hysteresis => {
                let spec = self.hysteresis_spec().expect("model and hysteresis present");
                spec.validate().map_err(|e| format!("[hysteresis]: {}", strip(e)))?;
            }
            Task::Boundaries => {
                let b = require(&self.boundaries, "boundaries", self.task)?;
                crate::sweep::analytic_boundaries(b.v_min, b.v_max, b.count, b.gamma)
                    .map_err(|e| format!("[boundaries]: {}", strip(e)))?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Option<GridSpec> {
        let g = self.grid.as_ref()?;
        let model = self.model?;
        Some(GridSpec::new(g.axis1, g.axis2, model))
    }

    pub fn hysteresis_spec(&self) -> Option<HysteresisSpec> {
        let h = self.hysteresis.as_ref()?;
        let model = self.model?;
        Some(HysteresisSpec {
            base: model,
            p_min: h.p_min,
            p_max: h.p_max,
            p_count: h.p_count,
            direction: h.direction,
            solver: h.solver.clone(),
            threshold: h.threshold,
            initial: BlochVector::from_array(h.initial),
        })
    }

    pub fn seed_value(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn worker_count(&self) -> usize {
        self.workers.unwrap_or(1)
    }
}

fn strip(e: crate::error::Error) -> String {
    match e {
        crate::error::Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

/// The parameter scanned by a one-dimensional grid, for column naming.
pub fn axis_names(grid: &GridSpec) -> Vec<SweepParam> {
    grid.axes().iter().map(|a| a.param).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXED: &str = r#"
task = "mf-fixed-points"
[model]
V = -5.0
g = 1.0
p = 1.0
"#;

    #[test]
    fn minimal_config_resolves_defaults() {
        let cfg = parse_config(FIXED).unwrap().resolve(|| 17);
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, Some(17));
        assert_eq!(cfg.model.unwrap().gamma, 1.0);
        assert_eq!(cfg.meanfield.as_ref().unwrap().n_seeds, 200);
        assert_eq!(cfg.workers, Some(1));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config(&format!("{FIXED}\nfoo = 1\n")).is_err());
        assert!(parse_config(&FIXED.replace("p = 1.0", "p = 1.0\nq = 2.0")).is_err());
        assert!(parse_config("task = \"mf-fixed-point\"\n").is_err());
    }

    #[test]
    fn invalid_values_name_the_invariant() {
        let cfg = parse_config(&FIXED.replace("p = 1.0", "p = 1.5")).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.contains("0 <= p <= 1"), "{err}");
    }

    #[test]
    fn block_presence_is_checked() {
        let cfg = parse_config("task = \"mf-phase-diagram\"\n[model]\nV = -5.0\ng = 0.0\np = 1.0\n").unwrap();
        assert!(cfg.validate().unwrap_err().contains("[grid]"));
        let cfg = parse_config(&format!("{FIXED}\n[boundaries]\nV_min = -1.0\nV_max = 0.0\ncount = 3\n")).unwrap();
        assert!(cfg.validate().unwrap_err().contains("does not use"));
        let cfg = parse_config("task = \"quantum-steady\"\n[model]\nV = -5.0\ng = 1.0\np = 1.0\n").unwrap();
        assert!(cfg.validate().unwrap_err().contains("model.N"));
    }

    #[test]
    fn metadata_json_is_accepted() {
        let cfg = parse_config(FIXED).unwrap().resolve(|| 3);
        let meta = serde_json::json!({ "version": "x", "config": cfg });
        let back = parse_config(&serde_json::to_string_pretty(&meta).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
