//! Time-dependent frequency-comb ramps, phase-continuous multi-tone
//! synthesis, overall and stepwise discrete Fourier analysis, frame-by-frame
//! moving adiabatic potentials, and waveform export for playback on
//! arbitrary-waveform generators.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::comb::{CombComponent, RfComb};
use crate::dressing::{unfold_adiabatic, AdiabaticPotentialGrid, UnfoldOptions};
use crate::error::{CoreError, Result};
use crate::field::FieldModel;
use crate::species::AtomSpecies;

/// Sampling guard: at least this many samples per oscillation of the fastest
/// instantaneous component.
pub const MIN_SAMPLES_PER_CYCLE: f64 = 8.0;

/// Per-component modulation law, evaluated at absolute time (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Constant(f64),
    /// start + (end − start)·t/duration, clamped past `duration`.
    Linear { start: f64, end: f64, duration: f64 },
    /// offset + amplitude·sin(omega·t + phase), omega in rad/s.
    Sine { offset: f64, amplitude: f64, omega: f64, phase: f64 },
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Linear { start, end, duration } => {
                let frac = (t / duration).clamp(0.0, 1.0);
                start + (end - start) * frac
            }
            Self::Sine { offset, amplitude, omega, phase } => {
                offset + amplitude * (omega * t + phase).sin()
            }
        }
    }
}

/// Behaviour of the synthesis phase at ramp resets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// Integrated phase, continuous across resets.
    #[default]
    Continuous,
    /// Phase restarts from the offset at every ramp period.
    ResetEachRamp,
}

/// A repeating linear frequency ramp of a comb: each component sweeps toward
/// its upper neighbour over one period; the topmost sweeps by the mean
/// adjacent spacing so a uniform comb maps onto itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CombRamp {
    base: RfComb,
    period: f64,
    amplitude: Vec<Envelope>,
    phase_offset: Vec<Envelope>,
    phase_mode: PhaseMode,
}

impl CombRamp {
    pub fn new(base: RfComb, period: f64) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(CoreError::DomainError(format!("ramp period must be positive, got {period}")));
        }
        let n = base.len();
        Ok(Self {
            base,
            period,
            amplitude: vec![Envelope::Constant(1.0); n],
            phase_offset: vec![Envelope::Constant(0.0); n],
            phase_mode: PhaseMode::Continuous,
        })
    }

    pub fn with_amplitudes(mut self, envelopes: Vec<Envelope>) -> Result<Self> {
        if envelopes.len() != self.base.len() {
            return Err(CoreError::DomainError(format!(
                "{} amplitude envelopes for {} components",
                envelopes.len(),
                self.base.len()
            )));
        }
        self.amplitude = envelopes;
        Ok(self)
    }

    pub fn with_phase_offsets(mut self, envelopes: Vec<Envelope>) -> Result<Self> {
        if envelopes.len() != self.base.len() {
            return Err(CoreError::DomainError(format!(
                "{} phase envelopes for {} components",
                envelopes.len(),
                self.base.len()
            )));
        }
        self.phase_offset = envelopes;
        Ok(self)
    }

    pub fn with_phase_mode(mut self, mode: PhaseMode) -> Self {
        self.phase_mode = mode;
        self
    }

    pub fn base(&self) -> &RfComb {
        &self.base
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn component_count(&self) -> usize {
        self.base.len()
    }

    /// Sweep rate of component n (rad/s per s).
    fn rate(&self, n: usize) -> f64 {
        let span = if n + 1 < self.base.len() {
            self.base.omega(n + 1) - self.base.omega(n)
        } else {
            self.base.mean_spacing()
        };
        span / self.period
    }

    /// Instantaneous angular frequencies ω_n(t) = ω_n(0) + rate_n·(t mod t_n).
    pub fn instantaneous_frequencies(&self, t: f64) -> Vec<f64> {
        let tau = t.rem_euclid(self.period);
        (0..self.base.len())
            .map(|n| self.base.omega(n) + self.rate(n) * tau)
            .collect()
    }

    /// Largest instantaneous ordinary frequency over a ramp period (Hz).
    pub fn max_instantaneous_hz(&self) -> (usize, f64) {
        let mut best = (0usize, 0.0f64);
        for n in 0..self.base.len() {
            let peak = (self.base.omega(n) + self.rate(n) * self.period) / std::f64::consts::TAU;
            if peak > best.1 {
                best = (n, peak);
            }
        }
        best
    }

    /// Integrated phase of component n at time t, closed form: the ramp's
    /// phase is piecewise quadratic, whole cycles contribute
    /// Φ_n = t_n·(ω_n(0) + rate·t_n/2).
    pub fn phase(&self, n: usize, t: f64) -> f64 {
        let cycles = (t / self.period).floor();
        let tau = t - cycles * self.period;
        let w0 = self.base.omega(n);
        let rate = self.rate(n);
        let within = w0 * tau + 0.5 * rate * tau * tau;
        let whole = match self.phase_mode {
            PhaseMode::Continuous => {
                cycles * (w0 * self.period + 0.5 * rate * self.period * self.period)
            }
            PhaseMode::ResetEachRamp => 0.0,
        };
        self.phase_offset[n].eval(t) + whole + within
    }

    /// The comb frozen at time t: instantaneous frequencies with
    /// envelope-scaled Rabi frequencies (amplitude scales the drive field,
    /// hence the coupling; the magnitude is used).
    pub fn comb_at(&self, t: f64) -> Result<RfComb> {
        let omegas = self.instantaneous_frequencies(t);
        let comps: Vec<CombComponent> = omegas
            .iter()
            .enumerate()
            .map(|(n, &omega)| CombComponent {
                omega,
                rabi: self.base.rabi(n) * self.amplitude[n].eval(t).abs(),
            })
            .collect();
        RfComb::new(comps)
    }

    pub fn amplitude(&self, n: usize, t: f64) -> f64 {
        self.amplitude[n].eval(t)
    }
}

/// A real sampled waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSignal {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    pub start_time: f64,
}

/// One-sided magnitude spectrum of a full record.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Bin frequencies (rad/s), 0..=Nyquist.
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Length of the analyzed record (for Parseval bookkeeping).
    pub record_len: usize,
}

/// Consecutive non-overlapping window DFT magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub window_starts: Vec<f64>,
    /// Bin frequencies (rad/s), spacing 2π·sample_rate/window_length.
    pub frequency_bins: Vec<f64>,
    /// `magnitudes[w][k]` for window w, bin k.
    pub magnitudes: Vec<Vec<f64>>,
    pub window_length: usize,
}

impl Spectrogram {
    /// Frequency of the strongest bin within ±`half_width` bins of `center`.
    pub fn peak_near(&self, window: usize, center: f64, half_width: usize) -> f64 {
        let spacing = self.frequency_bins[1] - self.frequency_bins[0];
        let k0 = (center / spacing).round() as isize;
        let lo = (k0 - half_width as isize).max(0) as usize;
        let hi = ((k0 + half_width as isize) as usize).min(self.frequency_bins.len() - 1);
        let mut best = lo;
        for k in lo..=hi {
            if self.magnitudes[window][k] > self.magnitudes[window][best] {
                best = k;
            }
        }
        self.frequency_bins[best]
    }
}

/// Samples s(t_k) = Σ_n A_n(t_k)·sin(φ_n(t_k)) over `duration` at
/// `sample_rate`, with the closed-form piecewise-quadratic phase. Fails if
/// the rate undersamples any component's fastest instantaneous oscillation.
pub fn synthesize(ramp: &CombRamp, duration: f64, sample_rate: f64) -> Result<WaveformSignal> {
    if !duration.is_finite() || duration <= 0.0 || !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(CoreError::DomainError("duration and sample rate must be positive".into()));
    }
    let (component, max_hz) = ramp.max_instantaneous_hz();
    let needed = MIN_SAMPLES_PER_CYCLE * max_hz;
    if sample_rate < needed {
        return Err(CoreError::Undersampled { component, rate: sample_rate, max_hz, needed });
    }
    let count = (duration * sample_rate).round() as usize;
    let mut samples = Vec::with_capacity(count);
    for k in 0..count {
        let t = k as f64 / sample_rate;
        let mut s = 0.0;
        for n in 0..ramp.component_count() {
            s += ramp.amplitude(n, t) * ramp.phase(n, t).sin();
        }
        samples.push(s);
    }
    Ok(WaveformSignal { sample_rate, samples, start_time: 0.0 })
}

fn dft_magnitudes(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> =
        samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().take(n / 2 + 1).map(|c| c.norm()).collect()
}

/// One-sided DFT magnitude spectrum of the full record.
pub fn overall_spectrum(signal: &WaveformSignal) -> Result<Spectrum> {
    let n = signal.samples.len();
    if n < 2 {
        return Err(CoreError::WindowTooShort(n));
    }
    let spacing = std::f64::consts::TAU * signal.sample_rate / n as f64;
    let magnitudes = dft_magnitudes(&signal.samples);
    let frequencies = (0..magnitudes.len()).map(|k| k as f64 * spacing).collect();
    Ok(Spectrum { frequencies, magnitudes, record_len: n })
}

/// DFT magnitudes over consecutive non-overlapping windows; a trailing
/// partial window is dropped.
pub fn stepwise_spectrum(signal: &WaveformSignal, window_length: usize) -> Result<Spectrogram> {
    if window_length < 2 {
        return Err(CoreError::WindowTooShort(window_length));
    }
    if window_length > signal.samples.len() {
        return Err(CoreError::WindowTooLong {
            window: window_length,
            samples: signal.samples.len(),
        });
    }
    let spacing = std::f64::consts::TAU * signal.sample_rate / window_length as f64;
    let bins: Vec<f64> = (0..window_length / 2 + 1).map(|k| k as f64 * spacing).collect();
    let count = signal.samples.len() / window_length;
    let mut starts = Vec::with_capacity(count);
    let mut magnitudes = Vec::with_capacity(count);
    for w in 0..count {
        let seg = &signal.samples[w * window_length..(w + 1) * window_length];
        starts.push(signal.start_time + (w * window_length) as f64 / signal.sample_rate);
        magnitudes.push(dft_magnitudes(seg));
    }
    Ok(Spectrogram {
        window_starts: starts,
        frequency_bins: bins,
        magnitudes,
        window_length,
    })
}

/// Quasi-static movie of the adiabatic potentials: at each requested time the
/// comb is frozen via the ramp law and unfolded independently.
pub fn moving_potentials(
    ramp: &CombRamp,
    field: &FieldModel,
    species: &AtomSpecies,
    grid: &[f64],
    times: &[f64],
    options: &UnfoldOptions,
) -> Result<Vec<AdiabaticPotentialGrid>> {
    times
        .iter()
        .map(|&t| {
            let comb = ramp.comb_at(t)?;
            unfold_adiabatic(grid, field, &comb, species, options)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// export / import
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformFormat {
    Csv,
    RawF64,
}

const RAW_MAGIC: &str = "dressedlat-waveform-f64 v1";

/// Writes the signal to `destination`. CSV carries `time_s,amplitude` rows
/// under `#`-prefixed header lines; the raw format is the same header block,
/// a blank line, then the bare samples as little-endian IEEE-754 f64.
pub fn export_waveform(
    signal: &WaveformSignal,
    destination: &Path,
    format: WaveformFormat,
    description: &str,
) -> Result<()> {
    let mut file = std::fs::File::create(destination)
        .map_err(|e| CoreError::DomainError(format!("cannot write {destination:?}: {e}")))?;
    let header = |kind: &str| {
        format!(
            "{kind}\nsample_rate_hz: {}\nsamples: {}\nstart_time_s: {}\ndescription: {}\n",
            signal.sample_rate,
            signal.samples.len(),
            signal.start_time,
            description.replace('\n', " ")
        )
    };
    let io_err = |e: std::io::Error| CoreError::DomainError(format!("write failed: {e}"));
    match format {
        WaveformFormat::Csv => {
            let mut out = String::new();
            for line in header("# dressedlat-waveform-csv v1").lines() {
                if line.starts_with('#') {
                    out.push_str(line);
                } else {
                    out.push_str("# ");
                    out.push_str(line);
                }
                out.push('\n');
            }
            out.push_str("time_s,amplitude\n");
            for (k, s) in signal.samples.iter().enumerate() {
                let t = signal.start_time + k as f64 / signal.sample_rate;
                out.push_str(&format!("{t},{s}\n"));
            }
            file.write_all(out.as_bytes()).map_err(io_err)?;
        }
        WaveformFormat::RawF64 => {
            file.write_all(header(RAW_MAGIC).as_bytes()).map_err(io_err)?;
            file.write_all(b"\n").map_err(io_err)?;
            for s in &signal.samples {
                file.write_all(&s.to_le_bytes()).map_err(io_err)?;
            }
        }
    }
    Ok(())
}

/// Reads back a waveform written by [`export_waveform`].
pub fn import_waveform(source: &Path, format: WaveformFormat) -> Result<WaveformSignal> {
    let err = |m: String| CoreError::DomainError(m);
    match format {
        WaveformFormat::Csv => {
            let file = std::fs::File::open(source)
                .map_err(|e| err(format!("cannot read {source:?}: {e}")))?;
            let mut sample_rate = None;
            let mut start_time = 0.0;
            let mut samples = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| err(format!("read failed: {e}")))?;
                if let Some(rest) = line.strip_prefix('#') {
                    let rest = rest.trim();
                    if let Some(v) = rest.strip_prefix("sample_rate_hz:") {
                        sample_rate = Some(parse_f64(v.trim())?);
                    } else if let Some(v) = rest.strip_prefix("start_time_s:") {
                        start_time = parse_f64(v.trim())?;
                    }
                    continue;
                }
                if line.starts_with("time_s") || line.is_empty() {
                    continue;
                }
                let (_, amp) = line
                    .split_once(',')
                    .ok_or_else(|| err(format!("bad csv row: {line}")))?;
                samples.push(parse_f64(amp)?);
            }
            Ok(WaveformSignal {
                sample_rate: sample_rate
                    .ok_or_else(|| err("missing sample_rate_hz header".into()))?,
                samples,
                start_time,
            })
        }
        WaveformFormat::RawF64 => {
            let bytes = std::fs::read(source)
                .map_err(|e| err(format!("cannot read {source:?}: {e}")))?;
            let split = bytes
                .windows(2)
                .position(|w| w == b"\n\n")
                .ok_or_else(|| err("missing blank line after raw header".into()))?;
            let header = std::str::from_utf8(&bytes[..split])
                .map_err(|_| err("raw header is not utf-8".into()))?;
            if !header.starts_with(RAW_MAGIC) {
                return Err(err("not a raw waveform file".into()));
            }
            let mut sample_rate = None;
            let mut start_time = 0.0;
            let mut count = None;
            for line in header.lines() {
                if let Some(v) = line.strip_prefix("sample_rate_hz:") {
                    sample_rate = Some(parse_f64(v.trim())?);
                } else if let Some(v) = line.strip_prefix("start_time_s:") {
                    start_time = parse_f64(v.trim())?;
                } else if let Some(v) = line.strip_prefix("samples:") {
                    count = Some(v.trim().parse::<usize>().map_err(|e| err(e.to_string()))?);
                }
            }
            let payload = &bytes[split + 2..];
            let count = count.ok_or_else(|| err("missing samples header".into()))?;
            if payload.len() != 8 * count {
                return Err(err(format!(
                    "payload holds {} bytes, header promises {}",
                    payload.len(),
                    8 * count
                )));
            }
            let samples = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Ok(WaveformSignal {
                sample_rate: sample_rate
                    .ok_or_else(|| err("missing sample_rate_hz header".into()))?,
                samples,
                start_time,
            })
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| CoreError::DomainError(format!("bad number {s:?}: {e}")))
}
