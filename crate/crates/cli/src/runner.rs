//! Subcommand dispatch: resolves the configuration, runs the computation
//! modules, and emits CSV data files, SVG plots, and a checksummed manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::{self, RawConfig};
use crate::error::{CliError, Result};
use crate::quantity::Dimension;
use crate::svg::{self, ChartOptions, HeatData, Series};
use dressedlat_core::constants::{self, G_EARTH, HBAR, MU_B};
use dressedlat_core::dressing::AdiabaticPotentialGrid;
use dressedlat_core::lattice;
use dressedlat_core::shaping;
use dressedlat_core::waveform::{self, WaveformFormat};
use dressedlat_core::{AtomSpecies, FieldModel, Manifold, RfComb};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Potentials,
    Map2d,
    Comb,
    Regime,
    Evolve,
    Spectra,
    Shaping,
    LatticeParams,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Potentials => "potentials",
            Self::Map2d => "map2d",
            Self::Comb => "comb",
            Self::Regime => "regime",
            Self::Evolve => "evolve",
            Self::Spectra => "spectra",
            Self::Shaping => "shaping",
            Self::LatticeParams => "lattice-params",
        }
    }
}

/// What a run produced: the manifest text (also written to `manifest.txt`)
/// and the emitted files.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: String,
    pub files: Vec<PathBuf>,
}

struct Emitter {
    dir: PathBuf,
    csv: bool,
    svg: bool,
    raw: bool,
    records: Vec<(String, String)>,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(dir: &Path, formats: &[String]) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(CliError::io)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            csv: formats.iter().any(|f| f == "csv"),
            svg: formats.iter().any(|f| f == "svg"),
            raw: formats.iter().any(|f| f == "raw"),
            records: Vec::new(),
            files: Vec::new(),
        })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(CliError::io)?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").unwrap();
        }
        self.records.push((name.to_string(), hex));
        self.files.push(path);
        Ok(())
    }

    fn csv_file(&mut self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        if !self.csv {
            return Ok(());
        }
        let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        self.write_bytes(name, text.as_bytes())
    }

    fn svg_file(&mut self, name: &str, content: &str) -> Result<()> {
        if !self.svg {
            return Ok(());
        }
        self.write_bytes(name, content.as_bytes())
    }
}

/// Runs a subcommand against parsed configuration text. `out_dir` and
/// `formats` override the `[output]` section when given.
pub fn run(
    subcommand: Subcommand,
    config_text: &str,
    out_dir: Option<&Path>,
    formats: Option<Vec<String>>,
) -> Result<RunOutcome> {
    let cfg = config::parse_config(config_text)?;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => match std::env::var("DRESSEDLAT_OUT") {
            Ok(d) => PathBuf::from(d),
            Err(_) => PathBuf::from(cfg.output.directory.clone().unwrap_or_else(|| "out".into())),
        },
    };
    let formats = formats.unwrap_or_else(|| {
        if cfg.output.formats.is_empty() {
            vec!["csv".into(), "svg".into()]
        } else {
            cfg.output.formats.clone()
        }
    });
    for f in &formats {
        if !matches!(f.as_str(), "csv" | "svg" | "raw") {
            return Err(CliError::config(format!(
                "unknown output format {f:?} (use csv, svg, raw)"
            )));
        }
    }
    let mut emitter = Emitter::new(&dir, &formats)?;
    let mut echo = Vec::new();
    echo.push(format!("subcommand: {}", subcommand.name()));
    echo.push(format!("constants: {}", constants::SNAPSHOT));

    match subcommand {
        Subcommand::Potentials | Subcommand::Comb => {
            run_potentials(&cfg, &mut emitter, &mut echo)?
        }
        Subcommand::Map2d => run_map2d(&cfg, &mut emitter, &mut echo)?,
        Subcommand::Regime => run_regime(&cfg, &mut emitter, &mut echo)?,
        Subcommand::Evolve => run_evolve(&cfg, &mut emitter, &mut echo)?,
        Subcommand::Spectra => run_spectra(&cfg, &mut emitter, &mut echo)?,
        Subcommand::Shaping => run_shaping(&cfg, &mut emitter, &mut echo)?,
        Subcommand::LatticeParams => run_lattice_params(&cfg, &mut emitter, &mut echo)?,
    }

    let mut manifest = String::new();
    for line in &echo {
        manifest.push_str(line);
        manifest.push('\n');
    }
    for (name, digest) in &emitter.records {
        manifest.push_str(&format!("file: {name} sha256={digest}\n"));
    }
    let manifest_path = emitter.dir.join("manifest.txt");
    std::fs::write(&manifest_path, manifest.as_bytes()).map_err(CliError::io)?;
    let mut files = emitter.files;
    files.push(manifest_path);
    Ok(RunOutcome { manifest, files })
}

fn echo_species(echo: &mut Vec<String>, species: &AtomSpecies) {
    echo.push(format!("species: {} mass_kg={:e}", species.name, species.mass));
    for m in &species.manifolds {
        echo.push(format!(
            "manifold: F={} g_F={} E_offset_J={:e}",
            m.f, m.g_f, m.e_offset
        ));
    }
}

fn echo_field(echo: &mut Vec<String>, field: &FieldModel) {
    match field {
        FieldModel::Linear1D { gradient, offset } => {
            echo.push(format!("field: linear gradient_T_m={gradient:e} offset_T={offset:e}"));
        }
        FieldModel::Quadrupole2D { gradient_x, gradient_z, offset } => {
            echo.push(format!(
                "field: quadrupole gradient_x_T_m={gradient_x:e} gradient_z_T_m={gradient_z:e} offset_T={offset:e}"
            ));
        }
    }
}

fn echo_comb(echo: &mut Vec<String>, comb: &RfComb) {
    for (i, c) in comb.components().iter().enumerate() {
        echo.push(format!(
            "comb[{i}]: omega_rad_s={:e} rabi_rad_s={:e}",
            c.omega, c.rabi
        ));
    }
    for w in comb.validity_warnings() {
        echo.push(format!("warning: {w}"));
    }
}

fn select_manifold<'a>(cfg: &RawConfig, species: &'a AtomSpecies) -> Result<&'a Manifold> {
    match cfg.analysis.manifold_f {
        Some(f) => species
            .manifold_with_f(f)
            .ok_or_else(|| CliError::config(format!("species has no F = {f} manifold"))),
        None => Ok(species.ground_manifold()),
    }
}

fn compute_potentials(
    cfg: &RawConfig,
    grid: &[f64],
    field: &FieldModel,
    comb: &RfComb,
    species: &AtomSpecies,
) -> Result<AdiabaticPotentialGrid> {
    let options = config::resolve_unfold_options(cfg);
    match cfg.analysis.levels.as_str() {
        "two" => dressedlat_core::unfold_adiabatic(grid, field, comb, species, &options)
            .map_err(CliError::numeric),
        "multi" => {
            let manifold = select_manifold(cfg, species)?;
            dressedlat_core::multilevel_potentials(grid, field, comb, species, manifold, &options)
                .map_err(CliError::numeric)
        }
        other => Err(CliError::config(format!(
            "unknown analysis.levels {other:?} (use \"two\" or \"multi\")"
        ))),
    }
}

fn potentials_csv(grid: &AdiabaticPotentialGrid) -> (String, Vec<String>) {
    let mut header = String::from("z_m");
    for b in 0..grid.branch_count() {
        write!(header, ",branch_{b}_J").unwrap();
    }
    let rows = grid
        .positions
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mut row = format!("{z:e}");
            for b in 0..grid.branch_count() {
                write!(row, ",{:e}", grid.branches[b][i]).unwrap();
            }
            row
        })
        .collect();
    (header, rows)
}

fn branch_series(grid: &AdiabaticPotentialGrid) -> Vec<Series> {
    grid.branches
        .iter()
        .enumerate()
        .map(|(b, values)| Series {
            name: format!("branch {b}"),
            points: grid.positions.iter().cloned().zip(values.iter().cloned()).collect(),
        })
        .collect()
}

fn run_potentials(cfg: &RawConfig, emitter: &mut Emitter, echo: &mut Vec<String>) -> Result<()> {
    let species = config::resolve_species(cfg)?.species;
    let field = config::resolve_field(cfg)?;
    let comb = config::resolve_comb(cfg)?;
    let grid = config::resolve_grid_1d(cfg)?;
    let out = compute_potentials(cfg, &grid, &field, &comb, &species)?;
    echo_species(echo, &species);
    echo_field(echo, &field);
    echo_comb(echo, &comb);
    echo.push(format!(
        "analysis: stark={} gravity={} levels={}",
        out.stark_corrected, out.gravity, cfg.analysis.levels
    ));
    let (header, rows) = potentials_csv(&out);
    emitter.csv_file("potentials.csv", &header, &rows)?;
    emitter.svg_file(
        "potentials.svg",
        &svg::line_chart(
            &ChartOptions {
                title: "Adiabatic potentials".into(),
                x_label: "z (m)".into(),
                y_label: "V (J)".into(),
                ..Default::default()
            },
            &branch_series(&out),
        ),
    )
}

fn run_map2d(cfg: &RawConfig, emitter: &mut Emitter, echo: &mut Vec<String>) -> Result<()> {
    let species = config::resolve_species(cfg)?.species;
    let field = config::resolve_field(cfg)?;
    let comb = config::resolve_comb(cfg)?;
    let (x, z) = config::resolve_grid_2d(cfg)?;
    let manifold = *select_manifold(cfg, &species)?;
    let options = config::resolve_unfold_options(cfg);
    let force_two = cfg.analysis.levels == "two" && (manifold.f - 0.5).abs() > 1e-9;
    let options = if force_two && options.m_pair.is_none() {
        return Err(CliError::config(
            "two-level map over F > 1/2 needs analysis.m_pair",
        ));
    } else {
        options
    };
    let map = dressedlat_core::potential_map_2d(&x, &z, &field, &comb, &species, &manifold, &options)
        .map_err(CliError::numeric)?;
    echo_species(echo, &species);
    echo_field(echo, &field);
    echo_comb(echo, &comb);
    echo.push(format!("grid: {}x{} points", map.x.len(), map.z.len()));

    let mut header = String::from("x_m,z_m");
    for b in 0..map.branches.len() {
        write!(header, ",branch_{b}_J").unwrap();
    }
    let mut rows = Vec::with_capacity(map.x.len() * map.z.len());
    for (ix, xv) in map.x.iter().enumerate() {
        for (iz, zv) in map.z.iter().enumerate() {
            let mut row = format!("{xv:e},{zv:e}");
            for b in 0..map.branches.len() {
                write!(row, ",{:e}", map.value(b, ix, iz)).unwrap();
            }
            rows.push(row);
        }
    }
    emitter.csv_file("map2d.csv", &header, &rows)?;

    let top = map.branches.len() - 1;
    let heat = HeatData {
        x: map.x.clone(),
        y: map.z.clone(),
        values: map.branches[top].clone(),
    };
    emitter.svg_file(
        "map2d.svg",
        &svg::heat_chart(
            &ChartOptions {
                title: format!("Adiabatic potential, branch {top}"),
                x_label: "x (m)".into(),
                y_label: "z (m)".into(),
                ..Default::default()
            },
            &heat,
            &[],
        ),
    )
}

fn run_regime(cfg: &RawConfig, emitter: &mut Emitter, echo: &mut Vec<String>) -> Result<()> {
    let species = config::resolve_species(cfg)?.species;
    let field = config::resolve_field(cfg)?;
    let FieldModel::Linear1D { gradient, .. } = field else {
        return Err(CliError::config("regime diagram needs a linear field"));
    };
    let manifold = select_manifold(cfg, &species)?;
    let g_f = manifold.g_f;
    let a = &cfg.analysis;
    let omega_range = (
        config::analysis_quantity(&a.omega_min, "omega_min", Dimension::Frequency)?,
        config::analysis_quantity(&a.omega_max, "omega_max", Dimension::Frequency)?,
    );
    let d_range = (
        config::analysis_quantity(&a.d_min, "d_min", Dimension::Length)?,
        config::analysis_quantity(&a.d_max, "d_max", Dimension::Length)?,
    );
    let resolution = a.resolution.unwrap_or(64);
    let accel = match &a.acceleration {
        Some(text) => crate::quantity::parse(text, Dimension::Acceleration)?,
        None => G_EARTH,
    };
    let diagram = lattice::regime_diagram(
        &species,
        g_f,
        omega_range,
        d_range,
        (resolution, resolution),
        gradient,
        accel,
        a.eta,
    )
    .map_err(CliError::numeric)?;
    echo_species(echo, &species);
    echo_field(echo, &field);
    echo.push(format!(
        "regime: eta={} accel_m_s2={accel:e} resolution={resolution}",
        a.eta
    ));

    let header = "omega_rad_s,d_m,adiabaticity_ratio,depth_J,recoil_J,bloch_ratio,adiabatic,deep,bloch_safe";
    let mut rows = Vec::with_capacity(diagram.omega_axis.len() * diagram.d_axis.len());
    for (iw, w) in diagram.omega_axis.iter().enumerate() {
        for (id, d) in diagram.d_axis.iter().enumerate() {
            let c = &diagram.cells[iw * diagram.d_axis.len() + id];
            rows.push(format!(
                "{w:e},{d:e},{:e},{:e},{:e},{:e},{},{},{}",
                c.adiabaticity_ratio,
                c.depth,
                c.recoil,
                c.bloch_ratio,
                c.adiabatic as u8,
                c.deep as u8,
                c.bloch_safe as u8
            ));
        }
    }
    emitter.csv_file("regime.csv", header, &rows)?;

    let mut boundary_rows = Vec::new();
    for (name, curve) in [
        ("adiabatic", &diagram.adiabatic_boundary),
        ("depth_equals_recoil", &diagram.depth_boundary),
        ("bloch", &diagram.bloch_boundary),
    ] {
        for (w, d) in curve {
            boundary_rows.push(format!("{name},{w:e},{d:e}"));
        }
    }
    emitter.csv_file("regime_boundaries.csv", "curve,omega_rad_s,d_m", &boundary_rows)?;

    let heat = HeatData {
        x: diagram.omega_axis.clone(),
        y: diagram.d_axis.clone(),
        values: diagram
            .cells
            .iter()
            .map(|c| c.adiabatic as u8 as f64 + c.deep as u8 as f64 + c.bloch_safe as u8 as f64)
            .collect(),
    };
    let overlays: Vec<Series> = [
        ("adiabaticity = eta", &diagram.adiabatic_boundary),
        ("depth = recoil", &diagram.depth_boundary),
        ("bloch = eta", &diagram.bloch_boundary),
    ]
    .into_iter()
    .map(|(name, curve)| Series { name: name.into(), points: curve.clone() })
    .collect();
    emitter.svg_file(
        "regime.svg",
        &svg::heat_chart(
            &ChartOptions {
                title: "Operating regimes".into(),
                x_label: "Rabi frequency (rad/s)".into(),
                y_label: "lattice constant (m)".into(),
                x_log: true,
                y_log: true,
            },
            &heat,
            &overlays,
        ),
    )
}

fn run_evolve(cfg: &RawConfig, emitter: &mut Emitter, echo: &mut Vec<String>) -> Result<()> {
    let species = config::resolve_species(cfg)?.species;
    let field = config::resolve_field(cfg)?;
    let ramp = config::resolve_ramp(cfg)?;
    let grid = config::resolve_grid_1d(cfg)?;
    let options = config::resolve_unfold_options(cfg);
    let frames = cfg.analysis.frames.unwrap_or(9);
    let step = match &cfg.analysis.frame_step {
        Some(text) => crate::quantity::parse(text, Dimension::Time)?,
        None => ramp.period() / 8.0,
    };
    let times: Vec<f64> = (0..frames).map(|k| k as f64 * step).collect();
    let sequence = waveform::moving_potentials(&ramp, &field, &species, &grid, &times, &options)
        .map_err(CliError::numeric)?;
    echo_species(echo, &species);
    echo_field(echo, &field);
    echo_comb(echo, ramp.base());
    echo.push(format!(
        "ramp: period_s={:e} frames={frames} frame_step_s={step:e}",
        ramp.period()
    ));

    let branch_count = sequence[0].branch_count();
    let mut header = String::from("time_s,z_m");
    for b in 0..branch_count {
        write!(header, ",branch_{b}_J").unwrap();
    }
    let mut rows = Vec::new();
    for (t, frame) in times.iter().zip(&sequence) {
        for (i, z) in frame.positions.iter().enumerate() {
            let mut row = format!("{t:e},{z:e}");
            for b in 0..branch_count {
                write!(row, ",{:e}", frame.branches[b][i]).unwrap();
            }
            rows.push(row);
        }
    }
    emitter.csv_file("evolve.csv", &header, &rows)?;

    let series: Vec<Series> = times
        .iter()
        .zip(&sequence)
        .map(|(t, frame)| Series {
            name: format!("t = {t:e} s"),
            points: frame
                .positions
                .iter()
                .cloned()
                .zip(frame.branches[branch_count - 1].iter().cloned())
                .collect(),
        })
        .collect();
    emitter.svg_file(
        "evolve.svg",
        &svg::line_chart(
            &ChartOptions {
                title: "Moving adiabatic potentials (top branch)".into(),
                x_label: "z (m)".into(),
                y_label: "V (J)".into(),
                ..Default::default()
            },
            &series,
        ),
    )
}

fn run_spectra(cfg: &RawConfig, emitter: &mut Emitter, echo: &mut Vec<String>) -> Result<()> {
    let ramp = config::resolve_ramp(cfg)?;
    let duration = match &cfg.analysis.duration {
        Some(text) => crate::quantity::parse(text, Dimension::Time)?,
        None => ramp.period(),
    };
    let sample_rate = match &cfg.analysis.sample_rate {
        Some(text) => {
            // sampling rates are ordinary frequencies, not angular
            crate::quantity::parse(text, Dimension::Frequency)? / std::f64::consts::TAU
        }
        None => waveform::MIN_SAMPLES_PER_CYCLE * ramp.max_instantaneous_hz().1,
    };
    let window = cfg.analysis.window.unwrap_or(1000);
    let signal =
        waveform::synthesize(&ramp, duration, sample_rate).map_err(CliError::numeric)?;
    let spectrum = waveform::overall_spectrum(&signal).map_err(CliError::numeric)?;
    let gram = waveform::stepwise_spectrum(&signal, window).map_err(CliError::numeric)?;
    echo_comb(echo, ramp.base());
    echo.push(format!(
        "waveform: period_s={:e} duration_s={duration:e} sample_rate_hz={sample_rate:e} samples={} window={window}",
        ramp.period(),
        signal.samples.len()
    ));

    let rows: Vec<String> = signal
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| format!("{:e},{s:e}", signal.start_time + k as f64 / signal.sample_rate))
        .collect();
    emitter.csv_file("waveform.csv", "time_s,amplitude", &rows)?;
    if emitter.raw {
        let path = emitter.dir.join("waveform.f64");
        waveform::export_waveform(&signal, &path, WaveformFormat::RawF64, "comb ramp")
            .map_err(CliError::io)?;
        let bytes = std::fs::read(&path).map_err(CliError::io)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").unwrap();
        }
        emitter.records.push(("waveform.f64".into(), hex));
        emitter.files.push(path);
    }

    let rows: Vec<String> = spectrum
        .frequencies
        .iter()
        .zip(&spectrum.magnitudes)
        .map(|(f, m)| format!("{f:e},{m:e}"))
        .collect();
    emitter.csv_file("spectrum.csv", "freq_rad_s,magnitude", &rows)?;

    let mut rows = Vec::new();
    for (w, start) in gram.window_starts.iter().enumerate() {
        for (k, f) in gram.frequency_bins.iter().enumerate() {
            rows.push(format!("{start:e},{f:e},{:e}", gram.magnitudes[w][k]));
        }
    }
    emitter.csv_file("spectrogram.csv", "window_start_s,freq_rad_s,magnitude", &rows)?;

    emitter.svg_file(
        "spectrum.svg",
        &svg::line_chart(
            &ChartOptions {
                title: "Overall spectrum".into(),
                x_label: "frequency (rad/s)".into(),
                y_label: "magnitude".into(),
                ..Default::default()
            },
            &[Series {
                name: "record".into(),
                points: spectrum
                    .frequencies
                    .iter()
                    .cloned()
                    .zip(spectrum.magnitudes.iter().cloned())
                    .collect(),
            }],
        ),
    )?;
    let heat = HeatData {
        x: gram.window_starts.clone(),
        y: gram.frequency_bins.clone(),
        values: {
            let mut v = Vec::with_capacity(gram.window_starts.len() * gram.frequency_bins.len());
            for w in 0..gram.window_starts.len() {
                v.extend(gram.magnitudes[w].iter().cloned());
            }
            v
        },
    };
    emitter.svg_file(
        "spectrogram.svg",
        &svg::heat_chart(
            &ChartOptions {
                title: "Stepwise spectrum".into(),
                x_label: "window start (s)".into(),
                y_label: "frequency (rad/s)".into(),
                ..Default::default()
            },
            &heat,
            &[],
        ),
    )
}

fn run_shaping(cfg: &RawConfig, emitter: &mut Emitter, echo: &mut Vec<String>) -> Result<()> {
    let species = config::resolve_species(cfg)?.species;
    let field = config::resolve_field(cfg)?;
    let resolved = config::resolve_drive(cfg, &species)?;
    let grid = config::resolve_grid_1d(cfg)?;
    let out = shaping::microwave_dressed_potentials(&resolved.pair, &resolved.drive, &field, &grid)
        .map_err(CliError::numeric)?;
    echo_species(echo, &species);
    echo_field(echo, &field);
    echo.push(format!(
        "drive: omega_rad_s={:e} rabi_rad_s={:e} lower=({},{}) upper=({},{})",
        resolved.drive.omega,
        resolved.drive.rabi,
        resolved.pair.lower.manifold.f,
        resolved.pair.lower.m_f,
        resolved.pair.upper.manifold.f,
        resolved.pair.upper.m_f
    ));

    let mut rows = Vec::with_capacity(out.positions.len());
    for (i, z) in out.positions.iter().enumerate() {
        let b = field.magnitude(&[*z]).map_err(CliError::numeric)?;
        let delta = shaping::pair_detuning(&resolved.pair, &resolved.drive, b);
        rows.push(format!(
            "{z:e},{delta:e},{:e},{:e}",
            out.branches[0][i], out.branches[1][i]
        ));
    }
    emitter.csv_file("shaping.csv", "z_m,detuning_rad_s,lower_J,upper_J", &rows)?;

    let halfwidth = match &cfg.analysis.flat_halfwidth {
        Some(text) => crate::quantity::parse(text, Dimension::Length)?,
        None => 20e-6,
    };
    let mut metric_rows = Vec::new();
    let flatness = shaping::flatness_metric(&out, 1, (-halfwidth, halfwidth));
    if let Ok(f) = &flatness {
        metric_rows.push(format!("flatness_central_ptp,{f:e},J"));
        metric_rows.push(format!("flatness_halfwidth,{halfwidth:e},m"));
    }
    if let Some(b_res) = shaping::resonance_field(&resolved.pair, &resolved.drive) {
        metric_rows.push(format!("resonance_field,{b_res:e},T"));
        if let FieldModel::Linear1D { gradient, offset } = field {
            if b_res >= offset && gradient > 0.0 {
                let ring = (b_res * b_res - offset * offset).sqrt() / gradient;
                metric_rows.push(format!("resonance_position,{ring:e},m"));
                // barrier of the flat-bottom branch: rise from the centre to the ring
                let centre = out
                    .positions
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                    .map(|(i, _)| i)
                    .unwrap();
                let at_ring = out
                    .positions
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        (a.1 - ring).abs().partial_cmp(&(b.1 - ring).abs()).unwrap()
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                let barrier = out.branches[1][at_ring] - out.branches[1][centre];
                metric_rows.push(format!("upper_barrier,{barrier:e},J"));
                if let (Ok(f), true) = (&flatness, barrier > 0.0) {
                    metric_rows.push(format!("flatness_fraction,{:e},dimensionless", f / barrier));
                }
            }
        }
    }
    match shaping::trap_depth(&out, 0) {
        Ok(depth) => {
            metric_rows.push(format!("lower_trap_depth,{:e},J", depth.joules));
            metric_rows.push(format!("lower_trap_depth_uK,{:e},uK", depth.microkelvin));
            metric_rows.push(format!("lower_trap_minimum,{:e},m", depth.minimum_position));
        }
        Err(_) => metric_rows.push("lower_trap_depth,untrapped,".into()),
    }
    emitter.csv_file("shaping_metrics.csv", "name,value,unit", &metric_rows)?;

    emitter.svg_file(
        "shaping.svg",
        &svg::line_chart(
            &ChartOptions {
                title: "Microwave-dressed potentials".into(),
                x_label: "z (m)".into(),
                y_label: "V (J)".into(),
                ..Default::default()
            },
            &branch_series(&out),
        ),
    )
}

fn run_lattice_params(cfg: &RawConfig, emitter: &mut Emitter, echo: &mut Vec<String>) -> Result<()> {
    let species = config::resolve_species(cfg)?.species;
    let field = config::resolve_field(cfg)?;
    let FieldModel::Linear1D { gradient, .. } = field else {
        return Err(CliError::config("lattice-params needs a linear field"));
    };
    let comb = config::resolve_comb(cfg)?;
    if comb.len() < 2 {
        return Err(CliError::config("lattice-params needs at least two comb components"));
    }
    let spacing_first = comb.omega(1) - comb.omega(0);
    for w in comb.components().windows(2) {
        let s = w[1].omega - w[0].omega;
        if (s - spacing_first).abs() > 1e-9 * spacing_first {
            return Err(CliError::config(
                "lattice-params needs a uniformly spaced comb",
            ));
        }
    }
    let rabi = comb.rabi(0);
    let manifold = select_manifold(cfg, &species)?;
    let g_f = manifold.g_f;
    let ramp_period = match cfg.comb.as_ref().and_then(|c| c.ramp.as_ref()) {
        Some(ramp) => Some(crate::quantity::parse(
            ramp.period
                .as_deref()
                .ok_or_else(|| CliError::config("ramp needs `period`"))?,
            Dimension::Time,
        )?),
        None => None,
    };
    let accel = match &cfg.analysis.acceleration {
        Some(text) => crate::quantity::parse(text, Dimension::Acceleration)?,
        None => G_EARTH,
    };
    let params = lattice::lattice_params(&species, g_f, spacing_first, rabi, gradient, ramp_period)
        .map_err(CliError::numeric)?;
    echo_species(echo, &species);
    echo_field(echo, &field);
    echo_comb(echo, &comb);

    let eta = cfg.analysis.eta;
    let mut rows = vec![
        format!("delta_omega,{spacing_first:e},rad/s"),
        format!("rabi,{rabi:e},rad/s"),
        format!("gradient,{gradient:e},T/m"),
        format!("lattice_constant,{:e},m", params.lattice_constant),
        format!("modulation_depth,{:e},J", params.depth),
        format!("lattice_forms,{},bool", (params.depth > 0.0) as u8),
        format!("recoil_energy,{:e},J", params.recoil),
        format!("bragg_velocity,{:e},m/s", params.bragg_velocity),
    ];
    let margin = lattice::adiabaticity_margin(&species, rabi, params.lattice_constant, gradient, g_f)
        .map_err(CliError::numeric)?;
    rows.push(format!("adiabaticity_ratio,{margin:e},dimensionless"));
    rows.push(format!("adiabatic,{},bool", (margin >= eta) as u8));
    let lz = lattice::landau_zener_probability(rabi, params.bragg_velocity, gradient, g_f)
        .map_err(CliError::numeric)?;
    rows.push(format!("landau_zener_at_bragg,{lz:e},probability"));
    let bloch = lattice::bloch_margin(&species, params.depth.max(0.0), params.lattice_constant, accel)
        .map_err(CliError::numeric)?;
    rows.push(format!("bloch_ratio,{bloch:e},dimensionless"));
    rows.push(format!("bloch_safe,{},bool", (bloch >= eta) as u8));
    rows.push(format!("acceleration,{accel:e},m/s^2"));
    rows.push(format!("eta,{eta},dimensionless"));
    if let Some(t_n) = ramp_period {
        rows.push(format!("ramp_period,{t_n:e},s"));
        rows.push(format!(
            "propagation_velocity,{:e},m/s",
            params.propagation_velocity.unwrap()
        ));
        let b_brg = lattice::bragg_gradient(&species, spacing_first, t_n, g_f)
            .map_err(CliError::numeric)?;
        rows.push(format!("bragg_gradient,{b_brg:e},T/m"));
    }
    emitter.csv_file("lattice_params.csv", "name,value,unit", &rows)?;
    Ok(())
}

/// Quick sanity used by the acceptance suite: the resonance-ring radii of a
/// linear field, one per comb component that is reachable.
pub fn resonance_positions(field: &FieldModel, comb: &RfComb, g_f: f64) -> Vec<f64> {
    let FieldModel::Linear1D { gradient, offset } = *field else {
        return Vec::new();
    };
    comb.components()
        .iter()
        .filter_map(|c| {
            let b_res = HBAR * c.omega / (MU_B * g_f.abs());
            (b_res >= offset && gradient > 0.0)
                .then(|| (b_res * b_res - offset * offset).sqrt() / gradient)
        })
        .collect()
}
