//! Run configuration: JSON config files, experiment presets, and the
//! resolution of flags + file + preset into one fully-determined run.
//!
//! All numeric fields in config files are decimal strings so that files
//! are locale-proof and survive round-trips through the manifest
//! byte-for-byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cgm::measures::{Measure1D, TransformPair};
use cgm::params::{ParamFamily, ParamPair};
use cgm::shape::ShapeSpec;

use crate::CliError;

/// Raw run configuration as written in a config file; every field is
/// optional and numerics are decimal strings. The resolved echo of this
/// structure is embedded in each run manifest.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    /// Worker threads; excluded from the manifest echo because artifacts
    /// are thread-count invariant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<String>,
    /// Output directory; excluded from the manifest echo because artifact
    /// location is not part of the experiment identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    /// Grid extents, `"MxN"` or a single square extent `"N"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<String>,
    /// Block size for the block-constant growth command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    /// Number of leading blocks for the block-constant growth command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<String>,
    /// Certified series tail bound for the block-constant reference limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsConfig>,
}

/// Explicit parameter families; overrides any preset's families.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: FamilyConfig,
    pub b: FamilyConfig,
}

/// One parameter family in config form. All numbers are decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    /// `value` at every index, materialized up to `cap`.
    Constant { value: String, cap: String },
    /// Explicit row-independent sequence.
    Values { values: Vec<String> },
    /// Constant `base` with finitely many 1-based overrides.
    Defects {
        base: String,
        cap: String,
        defects: Vec<(String, String)>,
    },
    /// `values[k]` on the `k`-th block of `block` consecutive indices.
    Blocks { values: Vec<String>, block: String },
}

impl FamilyConfig {
    fn build(&self, side: &str) -> Result<ParamFamily, CliError> {
        Ok(match self {
            FamilyConfig::Constant { value, cap } => ParamFamily::constant(
                parse_f64(&format!("params.{side}.value"), value)?,
                parse_usize(&format!("params.{side}.cap"), cap)?,
            )?,
            FamilyConfig::Values { values } => {
                let parsed = values
                    .iter()
                    .map(|v| parse_f64(&format!("params.{side}.values"), v))
                    .collect::<Result<Vec<_>, _>>()?;
                ParamFamily::row_constant(parsed)?
            }
            FamilyConfig::Defects { base, cap, defects } => {
                let parsed = defects
                    .iter()
                    .map(|(i, v)| {
                        Ok((
                            parse_usize(&format!("params.{side}.defects"), i)?,
                            parse_f64(&format!("params.{side}.defects"), v)?,
                        ))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                ParamFamily::constant_with_defects(
                    parse_f64(&format!("params.{side}.base"), base)?,
                    parse_usize(&format!("params.{side}.cap"), cap)?,
                    &parsed,
                )?
            }
            FamilyConfig::Blocks { values, block } => {
                let parsed = values
                    .iter()
                    .map(|v| parse_f64(&format!("params.{side}.values"), v))
                    .collect::<Result<Vec<_>, _>>()?;
                ParamFamily::block_constant(
                    parsed,
                    parse_usize(&format!("params.{side}.block"), block)?,
                )?
            }
        })
    }
}

/// Loads a config file. A manifest produced by an earlier run is accepted
/// as well: its embedded `config` object is used, so re-running a
/// manifest reproduces the run.
pub fn load_config_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("config", format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
    let config_value = match &value {
        serde_json::Value::Object(map) if map.contains_key("config_hash") => map
            .get("config")
            .cloned()
            .ok_or_else(|| CliError::new("config", "manifest is missing its config echo"))?,
        _ => value,
    };
    serde_json::from_value(config_value)
        .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))
}

pub fn parse_f64(field: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| CliError::new("config", format!("{field} = {s:?}: {e}")))?;
    if !v.is_finite() {
        return Err(CliError::new(
            "config",
            format!("{field} = {s:?} is not finite"),
        ));
    }
    Ok(v)
}

pub fn parse_usize(field: &str, s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|e| CliError::new("config", format!("{field} = {s:?}: {e}")))
}

pub fn parse_u64(field: &str, s: &str) -> Result<u64, CliError> {
    s.trim()
        .parse()
        .map_err(|e| CliError::new("config", format!("{field} = {s:?}: {e}")))
}

/// Parses `"MxN"` (or a single square extent `"N"`) into `(m, n)`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
    match parts.as_slice() {
        [sq] => {
            let n = parse_usize("grid", sq)?;
            Ok((n, n))
        }
        [m, n] => Ok((parse_usize("grid", m)?, parse_usize("grid", n)?)),
        _ => Err(CliError::new(
            "config",
            format!("grid = {s:?} is not of the form MxN"),
        )),
    }
}

/// Built-in experiments. The first four reproduce the reference
/// simulations (shared base randomness, total rate `a_m(i) + b_n(j)` with
/// the b-side fixed at 0.5); the last one drives the block-constant
/// growth comparison with squared integer parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Homogeneous rate 1.
    Rost,
    /// One zero a-row at index 100 (total rate 0.5 there).
    Fig1b,
    /// a-rows 0.25 at 50 and 0 at 100 (total rates 0.75 and 0.5).
    Fig1c,
    /// Extent-dependent a-rows: -0.25 at 50 while m < 100, 0 at 100 once
    /// m >= 100 (total rates 0.25 and 0.5).
    Fig1d,
    /// Block-constant squares `a_k = b_k = k^2`.
    RainsSquares,
}

impl Preset {
    pub fn from_name(name: &str) -> Result<Self, CliError> {
        Ok(match name {
            "rost" => Preset::Rost,
            "fig1b" => Preset::Fig1b,
            "fig1c" => Preset::Fig1c,
            "fig1d" => Preset::Fig1d,
            "rains-squares" => Preset::RainsSquares,
            _ => {
                return Err(CliError::new(
                    "unknown-preset",
                    format!(
                        "unknown preset {name:?}; available: rost, fig1b, fig1c, fig1d, rains-squares"
                    ),
                ))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Rost => "rost",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig1d => "fig1d",
            Preset::RainsSquares => "rains-squares",
        }
    }

    /// Default grid and horizon for the `simulate` command.
    fn simulation_defaults(self) -> ((usize, usize), f64) {
        match self {
            Preset::Rost | Preset::Fig1b | Preset::Fig1c => ((4000, 4000), 1000.0),
            // The extent-dependent families require one passage solve per
            // site, so the canonical grid is budgeted accordingly.
            Preset::Fig1d => ((128, 128), 250.0),
            Preset::RainsSquares => ((2000, 2000), 300.0),
        }
    }

    /// Exact parameter families, materialized to cover `(m, n)`.
    pub fn families(self, m: usize, n: usize) -> Result<ParamPair, CliError> {
        let pair = match self {
            Preset::Rost => ParamPair::new(
                ParamFamily::constant(0.5, m)?,
                ParamFamily::constant(0.5, n)?,
            )?,
            Preset::Fig1b => ParamPair::new(
                ParamFamily::constant_with_defects(0.5, m.max(128), &[(100, 0.0)])?,
                ParamFamily::constant(0.5, n)?,
            )?,
            Preset::Fig1c => ParamPair::new(
                ParamFamily::constant_with_defects(0.5, m.max(128), &[(50, 0.25), (100, 0.0)])?,
                ParamFamily::constant(0.5, n)?,
            )?,
            Preset::Fig1d => ParamPair::new(
                ParamFamily::triangular_from(m, |row, i| {
                    if i == 50 && row < 100 {
                        -0.25
                    } else if i == 100 && row >= 100 {
                        0.0
                    } else {
                        0.5
                    }
                })?,
                ParamFamily::constant(0.5, n)?,
            )?,
            Preset::RainsSquares => {
                let (block, blocks) = (100usize, 20usize);
                let base: Vec<f64> = (1..=blocks.max(m.div_ceil(block)))
                    .map(|k| (k * k) as f64)
                    .collect();
                ParamPair::new(
                    ParamFamily::block_constant(base.clone(), block)?,
                    ParamFamily::block_constant(base, block)?,
                )?
            }
        };
        Ok(pair)
    }

    /// Exact limiting shape data, where the preset has a nondegenerate
    /// limit shape.
    pub fn limit_spec(self) -> Result<ShapeSpec, CliError> {
        let half = || Measure1D::point_mass(0.5, 1.0);
        let spec = match self {
            Preset::Rost => ShapeSpec::new(TransformPair::new(half()?, half()?, 0.5, 0.5)?, 0.5, 0.5)?,
            // One vanishing a-row drags the limiting a-minimum to 0 while
            // the running minima first hold at 0.5, producing the flat
            // segment and the vertical-axis spike.
            Preset::Fig1b | Preset::Fig1c | Preset::Fig1d => {
                ShapeSpec::new(TransformPair::new(half()?, half()?, 0.0, 0.5)?, 0.5, 0.5)?
            }
            Preset::RainsSquares => {
                return Err(CliError::new(
                    "domain",
                    "preset rains-squares has no nondegenerate limit shape; use the rains command",
                ))
            }
        };
        Ok(spec)
    }
}

/// A fully-determined run: every knob has a concrete value and `echo`
/// holds the canonical config for hashing and the manifest.
pub struct Resolved {
    pub command: String,
    pub preset: Option<Preset>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub t: f64,
    pub grid: (usize, usize),
    pub grid_explicit: bool,
    pub replicas: usize,
    pub block: usize,
    pub blocks: usize,
    pub tail: f64,
    params: Option<ParamsConfig>,
    pub echo: RunConfig,
}

fn default_grid(command: &str) -> (usize, usize) {
    match command {
        "verify-burke" => (50, 50),
        "verify-tails" | "verify-exit" => (200, 200),
        _ => (256, 256),
    }
}

fn default_replicas(command: &str) -> usize {
    match command {
        "verify-burke" | "verify-expsum" => 10_000,
        "verify-permutation" => 20_000,
        "verify-tails" => 2_000,
        _ => 1_000,
    }
}

/// Merges precedence (flags already overlaid into `merged` by the caller)
/// and fills defaults: explicit fields beat preset defaults, which beat
/// per-command defaults.
pub fn resolve(command: String, merged: RunConfig) -> Result<Resolved, CliError> {
    let preset = merged
        .preset
        .as_deref()
        .map(Preset::from_name)
        .transpose()?;
    let seed = merged
        .seed
        .as_deref()
        .map(|s| parse_u64("seed", s))
        .transpose()?
        .unwrap_or(1);
    let threads = merged
        .threads
        .as_deref()
        .map(|s| parse_usize("threads", s))
        .transpose()?;
    let out = PathBuf::from(merged.out.as_deref().unwrap_or("cgm-out"));

    let preset_sim = preset.map(Preset::simulation_defaults);
    let (grid, grid_explicit) = match merged.grid.as_deref() {
        Some(s) => (parse_grid(s)?, true),
        None => match (command.as_str(), preset_sim) {
            ("simulate", Some((g, _))) => (g, false),
            _ => (default_grid(&command), false),
        },
    };
    let t = match merged.t.as_deref() {
        Some(s) => parse_f64("t", s)?,
        None => match (command.as_str(), preset_sim) {
            ("simulate", Some((_, t))) => t,
            _ => 100.0,
        },
    };
    let replicas = merged
        .replicas
        .as_deref()
        .map(|s| parse_usize("replicas", s))
        .transpose()?
        .unwrap_or_else(|| default_replicas(&command));
    let block = merged
        .block
        .as_deref()
        .map(|s| parse_usize("block", s))
        .transpose()?
        .unwrap_or(100);
    let blocks = merged
        .blocks
        .as_deref()
        .map(|s| parse_usize("blocks", s))
        .transpose()?
        .unwrap_or(20);
    let tail = merged
        .tail
        .as_deref()
        .map(|s| parse_f64("tail", s))
        .transpose()?
        .unwrap_or(2e-6);

    let is_rains = command == "rains";
    let echo = RunConfig {
        command: Some(command.clone()),
        preset: preset.map(|p| p.name().to_string()),
        seed: Some(seed.to_string()),
        threads: None,
        out: None,
        t: Some(t.to_string()),
        grid: Some(format!("{}x{}", grid.0, grid.1)),
        replicas: Some(replicas.to_string()),
        block: is_rains.then(|| block.to_string()),
        blocks: is_rains.then(|| blocks.to_string()),
        tail: is_rains.then(|| tail.to_string()),
        params: merged.params.clone(),
    };

    Ok(Resolved {
        command,
        preset,
        seed,
        threads,
        out,
        t,
        grid,
        grid_explicit,
        replicas,
        block,
        blocks,
        tail,
        params: merged.params,
        echo,
    })
}

impl Resolved {
    /// Parameter families for this run: explicit `params` win, then the
    /// preset's families, then the homogeneous rate-1 default.
    pub fn families(&self) -> Result<ParamPair, CliError> {
        let (m, n) = self.grid;
        self.families_covering(m, n)
    }

    /// Families sized to cover `(m, n)` when the command derives its own
    /// extent (e.g. a cluster box computed from `t` rather than the grid).
    /// Explicit `params` carry their own caps and are returned as given.
    pub fn families_covering(&self, m: usize, n: usize) -> Result<ParamPair, CliError> {
        if let Some(p) = &self.params {
            return Ok(ParamPair::new(p.a.build("a")?, p.b.build("b")?)?);
        }
        match self.preset {
            Some(preset) => preset.families(m, n),
            None => Ok(ParamPair::new(
                ParamFamily::constant(0.5, m)?,
                ParamFamily::constant(0.5, n)?,
            )?),
        }
    }

    /// Limit-shape data: the preset's exact limit when one is active,
    /// otherwise the finite-size geometry of the run's families.
    pub fn shape_spec(&self) -> Result<ShapeSpec, CliError> {
        if self.params.is_none() {
            if let Some(preset) = self.preset {
                return preset.limit_spec();
            }
        }
        let (m, n) = self.grid;
        Ok(ShapeSpec::from_params(&self.families()?, m, n)?)
    }
}
