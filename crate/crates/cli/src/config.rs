//! Run-configuration parsing: TOML sections with unit-suffixed values,
//! unknown keys rejected, resolved into SI quantities and core types.

use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::quantity::{parse, Dimension};
use dressedlat_core::shaping::{HyperfinePair, HyperfineState, MicrowaveDrive};
use dressedlat_core::waveform::{CombRamp, Envelope, PhaseMode};
use dressedlat_core::{AtomSpecies, FieldModel, Manifold, RfComb, UnfoldOptions};

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub species: Option<SpeciesSection>,
    pub field: Option<FieldSection>,
    pub comb: Option<CombSection>,
    pub drive: Option<DriveSection>,
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub mass: Option<String>,
    #[serde(default)]
    pub manifolds: Vec<ManifoldSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSection {
    pub f: f64,
    pub g_f: f64,
    pub e_offset: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub variant: Option<String>,
    pub gradient: Option<String>,
    pub gradient_x: Option<String>,
    pub gradient_z: Option<String>,
    pub offset: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CombSection {
    #[serde(default)]
    pub frequencies: Vec<String>,
    pub rabi: Option<toml::Value>,
    pub ramp: Option<RampSection>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RampSection {
    pub period: Option<String>,
    #[serde(default)]
    pub amplitude: Vec<String>,
    #[serde(default)]
    pub phase: Vec<String>,
    pub phase_mode: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub rabi: Option<String>,
    pub detuning: Option<String>,
    pub state_a: Option<String>,
    pub state_b: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: Option<String>,
    pub max: Option<String>,
    pub points: Option<usize>,
    pub x_min: Option<String>,
    pub x_max: Option<String>,
    pub x_points: Option<usize>,
    pub z_min: Option<String>,
    pub z_max: Option<String>,
    pub z_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub eta: f64,
    pub gravity: bool,
    pub stark: bool,
    pub levels: String,
    pub manifold_f: Option<f64>,
    pub m_pair: Option<[f64; 2]>,
    pub acceleration: Option<String>,
    pub omega_min: Option<String>,
    pub omega_max: Option<String>,
    pub d_min: Option<String>,
    pub d_max: Option<String>,
    pub resolution: Option<usize>,
    pub frames: Option<usize>,
    pub frame_step: Option<String>,
    pub duration: Option<String>,
    pub sample_rate: Option<String>,
    pub window: Option<usize>,
    pub flat_halfwidth: Option<String>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            eta: 10.0,
            gravity: false,
            stark: true,
            levels: "two".into(),
            manifold_f: None,
            m_pair: None,
            acceleration: None,
            omega_min: None,
            omega_max: None,
            d_min: None,
            d_max: None,
            resolution: None,
            frames: None,
            frame_step: None,
            duration: None,
            sample_rate: None,
            window: None,
            flat_halfwidth: None,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<String>,
    #[serde(default)]
    pub formats: Vec<String>,
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
}

// ---------------------------------------------------------------------------
// resolution into core types
// ---------------------------------------------------------------------------

pub struct ResolvedSpecies {
    pub species: AtomSpecies,
}

pub fn resolve_species(cfg: &RawConfig) -> Result<ResolvedSpecies> {
    let section = cfg
        .species
        .as_ref()
        .ok_or_else(|| CliError::config("missing [species] section"))?;
    if let Some(preset) = &section.preset {
        let species = AtomSpecies::preset(preset)
            .ok_or_else(|| CliError::config(format!("unknown species preset {preset:?}")))?;
        return Ok(ResolvedSpecies { species });
    }
    let name = section
        .name
        .clone()
        .ok_or_else(|| CliError::config("species needs `preset` or `name`"))?;
    let mass = parse(
        section
            .mass
            .as_deref()
            .ok_or_else(|| CliError::config("explicit species needs `mass`"))?,
        Dimension::Mass,
    )?;
    if section.manifolds.is_empty() {
        return Err(CliError::config("explicit species needs at least one [[species.manifolds]]"));
    }
    let manifolds = section
        .manifolds
        .iter()
        .map(|m| {
            let e_offset = match &m.e_offset {
                Some(text) => parse(text, Dimension::Energy)?,
                None => 0.0,
            };
            Manifold::new(m.f, m.g_f, e_offset).map_err(CliError::numeric)
        })
        .collect::<Result<Vec<_>>>()?;
    let species = AtomSpecies::new(name, mass, manifolds).map_err(CliError::numeric)?;
    Ok(ResolvedSpecies { species })
}

pub fn resolve_field(cfg: &RawConfig) -> Result<FieldModel> {
    let section = cfg
        .field
        .as_ref()
        .ok_or_else(|| CliError::config("missing [field] section"))?;
    let offset = match &section.offset {
        Some(text) => parse(text, Dimension::Field)?,
        None => 0.0,
    };
    let variant = section.variant.as_deref().unwrap_or("linear");
    match variant {
        "linear" | "linear1d" => {
            let gradient = parse(
                section
                    .gradient
                    .as_deref()
                    .ok_or_else(|| CliError::config("linear field needs `gradient`"))?,
                Dimension::Gradient,
            )?;
            FieldModel::linear(gradient, offset).map_err(|e| CliError::config(e.to_string()))
        }
        "quadrupole" | "quadrupole2d" => {
            let gx = parse(
                section
                    .gradient_x
                    .as_deref()
                    .ok_or_else(|| CliError::config("quadrupole field needs `gradient_x`"))?,
                Dimension::Gradient,
            )?;
            let gz = parse(
                section
                    .gradient_z
                    .as_deref()
                    .ok_or_else(|| CliError::config("quadrupole field needs `gradient_z`"))?,
                Dimension::Gradient,
            )?;
            FieldModel::quadrupole(gx, gz, offset).map_err(|e| CliError::config(e.to_string()))
        }
        other => Err(CliError::config(format!("unknown field variant {other:?}"))),
    }
}

pub fn resolve_comb(cfg: &RawConfig) -> Result<RfComb> {
    let section = cfg
        .comb
        .as_ref()
        .ok_or_else(|| CliError::config("missing [comb] section"))?;
    if section.frequencies.is_empty() {
        return Err(CliError::config("comb needs at least one entry in `frequencies`"));
    }
    let omegas = section
        .frequencies
        .iter()
        .map(|s| parse(s, Dimension::Frequency))
        .collect::<Result<Vec<_>>>()?;
    for (i, w) in omegas.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(CliError::config(format!(
                "comb frequencies must be strictly ascending: entry {} ({}) vs entry {} ({})",
                i,
                section.frequencies[i],
                i + 1,
                section.frequencies[i + 1],
            )));
        }
    }
    let rabi_values: Vec<f64> = match &section.rabi {
        Some(toml::Value::String(s)) => vec![parse(s, Dimension::Frequency)?; omegas.len()],
        Some(toml::Value::Array(items)) => {
            if items.len() != omegas.len() {
                return Err(CliError::config(format!(
                    "{} rabi entries for {} comb components",
                    items.len(),
                    omegas.len()
                )));
            }
            items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => parse(s, Dimension::Frequency),
                    other => Err(CliError::config(format!(
                        "rabi entries must be unit-suffixed strings, got {other}"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some(other) => {
            return Err(CliError::config(format!(
                "`rabi` must be a string or list of strings, got {other}"
            )))
        }
        None => return Err(CliError::config("comb needs `rabi`")),
    };
    let components = omegas
        .into_iter()
        .zip(rabi_values)
        .map(|(omega, rabi)| dressedlat_core::CombComponent { omega, rabi })
        .collect();
    RfComb::new(components).map_err(|e| CliError::config(e.to_string()))
}

fn parse_envelope(text: &str) -> Result<Envelope> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    match parts.as_slice() {
        ["const", v] => Ok(Envelope::Constant(
            v.parse().map_err(|_| CliError::config(format!("bad envelope {text:?}")))?,
        )),
        ["linear", a, b, dur, dur_unit] => Ok(Envelope::Linear {
            start: a.parse().map_err(|_| CliError::config(format!("bad envelope {text:?}")))?,
            end: b.parse().map_err(|_| CliError::config(format!("bad envelope {text:?}")))?,
            duration: parse(&format!("{dur} {dur_unit}"), Dimension::Time)?,
        }),
        ["sine", offset, amp, freq, freq_unit, phase] => Ok(Envelope::Sine {
            offset: offset
                .parse()
                .map_err(|_| CliError::config(format!("bad envelope {text:?}")))?,
            amplitude: amp
                .parse()
                .map_err(|_| CliError::config(format!("bad envelope {text:?}")))?,
            omega: parse(&format!("{freq} {freq_unit}"), Dimension::Frequency)?,
            phase: phase
                .parse()
                .map_err(|_| CliError::config(format!("bad envelope {text:?}")))?,
        }),
        _ => Err(CliError::config(format!(
            "unknown envelope {text:?}; use \"const A\", \"linear A B DUR UNIT\", or \
             \"sine OFFSET AMP FREQ UNIT PHASE\""
        ))),
    }
}

pub fn resolve_ramp(cfg: &RawConfig) -> Result<CombRamp> {
    let comb = resolve_comb(cfg)?;
    let section = cfg
        .comb
        .as_ref()
        .and_then(|c| c.ramp.as_ref())
        .ok_or_else(|| CliError::config("missing [comb.ramp] section"))?;
    let period = parse(
        section
            .period
            .as_deref()
            .ok_or_else(|| CliError::config("ramp needs `period`"))?,
        Dimension::Time,
    )?;
    let mut ramp = CombRamp::new(comb, period).map_err(|e| CliError::config(e.to_string()))?;
    if !section.amplitude.is_empty() {
        let envelopes = section
            .amplitude
            .iter()
            .map(|s| parse_envelope(s))
            .collect::<Result<Vec<_>>>()?;
        ramp = ramp.with_amplitudes(envelopes).map_err(|e| CliError::config(e.to_string()))?;
    }
    if !section.phase.is_empty() {
        let envelopes = section
            .phase
            .iter()
            .map(|s| parse_envelope(s))
            .collect::<Result<Vec<_>>>()?;
        ramp = ramp.with_phase_offsets(envelopes).map_err(|e| CliError::config(e.to_string()))?;
    }
    match section.phase_mode.as_deref() {
        None | Some("continuous") => {}
        Some("reset") => ramp = ramp.with_phase_mode(PhaseMode::ResetEachRamp),
        Some(other) => {
            return Err(CliError::config(format!(
                "unknown phase_mode {other:?} (use \"continuous\" or \"reset\")"
            )))
        }
    }
    Ok(ramp)
}

pub fn resolve_grid_1d(cfg: &RawConfig) -> Result<Vec<f64>> {
    let section = cfg
        .grid
        .as_ref()
        .ok_or_else(|| CliError::config("missing [grid] section"))?;
    let lo = parse(
        section.min.as_deref().ok_or_else(|| CliError::config("grid needs `min`"))?,
        Dimension::Length,
    )?;
    let hi = parse(
        section.max.as_deref().ok_or_else(|| CliError::config("grid needs `max`"))?,
        Dimension::Length,
    )?;
    let points = section.points.ok_or_else(|| CliError::config("grid needs `points`"))?;
    linspace(lo, hi, points)
}

pub fn resolve_grid_2d(cfg: &RawConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let section = cfg
        .grid
        .as_ref()
        .ok_or_else(|| CliError::config("missing [grid] section"))?;
    let need = |v: &Option<String>, key: &str| -> Result<f64> {
        parse(
            v.as_deref().ok_or_else(|| CliError::config(format!("2D grid needs `{key}`")))?,
            Dimension::Length,
        )
    };
    let x = linspace(
        need(&section.x_min, "x_min")?,
        need(&section.x_max, "x_max")?,
        section.x_points.ok_or_else(|| CliError::config("2D grid needs `x_points`"))?,
    )?;
    let z = linspace(
        need(&section.z_min, "z_min")?,
        need(&section.z_max, "z_max")?,
        section.z_points.ok_or_else(|| CliError::config("2D grid needs `z_points`"))?,
    )?;
    Ok((x, z))
}

fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(CliError::config(format!("grid needs at least 2 points, got {points}")));
    }
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(CliError::config(format!("grid max ({hi}) must exceed min ({lo})")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

pub fn resolve_unfold_options(cfg: &RawConfig) -> UnfoldOptions {
    UnfoldOptions {
        stark: cfg.analysis.stark,
        gravity: cfg.analysis.gravity,
        m_pair: cfg.analysis.m_pair.map(|p| (p[0], p[1])),
        rabi_profile: None,
    }
}

pub struct ResolvedDrive {
    pub pair: HyperfinePair,
    pub drive: MicrowaveDrive,
}

pub fn resolve_drive(cfg: &RawConfig, species: &AtomSpecies) -> Result<ResolvedDrive> {
    let section = cfg
        .drive
        .as_ref()
        .ok_or_else(|| CliError::config("missing [drive] section"))?;
    let parse_state = |text: &Option<String>, key: &str| -> Result<HyperfineState> {
        let text = text
            .as_deref()
            .ok_or_else(|| CliError::config(format!("drive needs `{key}` as \"F,mF\"")))?;
        let (f_str, m_str) = text
            .split_once(',')
            .ok_or_else(|| CliError::config(format!("state {text:?} must be \"F,mF\"")))?;
        let f: f64 = f_str
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("bad F in state {text:?}")))?;
        let m: f64 = m_str
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("bad mF in state {text:?}")))?;
        let manifold = species
            .manifold_with_f(f)
            .ok_or_else(|| CliError::config(format!("species has no F = {f} manifold")))?;
        HyperfineState::new(*manifold, m).map_err(|e| CliError::config(e.to_string()))
    };
    let a = parse_state(&section.state_a, "state_a")?;
    let b = parse_state(&section.state_b, "state_b")?;
    let pair =
        HyperfinePair::new(species.clone(), a, b).map_err(|e| CliError::config(e.to_string()))?;
    let rabi = parse(
        section.rabi.as_deref().ok_or_else(|| CliError::config("drive needs `rabi`"))?,
        Dimension::Frequency,
    )?;
    let detuning = parse(
        section.detuning.as_deref().ok_or_else(|| CliError::config("drive needs `detuning`"))?,
        Dimension::Frequency,
    )?;
    let drive =
        MicrowaveDrive::detuned_from(&pair, detuning, rabi).map_err(|e| CliError::config(e.to_string()))?;
    Ok(ResolvedDrive { pair, drive })
}

pub fn analysis_quantity(
    value: &Option<String>,
    key: &str,
    dimension: Dimension,
) -> Result<f64> {
    parse(
        value
            .as_deref()
            .ok_or_else(|| CliError::config(format!("analysis needs `{key}`")))?,
        dimension,
    )
}
