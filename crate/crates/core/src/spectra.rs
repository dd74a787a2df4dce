//! 2D spectra from factored pathway amplitudes.
//!
//! The half-sided transform of `e^{−iΩτ}` is `i/(ω − Ω)`, so broadened grids
//! are evaluated analytically per pathway. Conjugate-branch pathways carry
//! reflected frequencies, which puts rephasing peaks at ω₁ < 0; use
//! [`SpectrumGrid::flip_omega1`] to move them into the positive quadrant.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pathway::ExperimentKind;
use crate::response::{IntervalArg, PathwayAmplitude};
use crate::C64;

/// Peaks closer than this (rad/fs) on both axes are one stick.
pub const STICK_MERGE_TOLERANCE: f64 = 1e-9;

/// Default search radius (rad/fs) when looking a stick up by position.
pub const PEAK_LOOKUP_TOLERANCE: f64 = 1e-6;

/// One uniformly sampled frequency axis in rad/fs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let a = AxisSpec { min, max, points };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::NonFinite("axis bounds"));
        }
        if self.points < 2 {
            return Err(Error::invalid(format!(
                "an axis needs at least 2 points, got {}",
                self.points
            )));
        }
        if self.max <= self.min {
            return Err(Error::invalid(format!(
                "axis maximum {} must exceed minimum {}",
                self.max, self.min
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.max
                } else {
                    self.min + step * k as f64
                }
            })
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }
}

/// Which intervals the two grid axes transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisPair {
    Omega1Omega3,
    Omega2Omega3,
}

impl AxisPair {
    pub fn for_kind(kind: ExperimentKind) -> AxisPair {
        match kind {
            ExperimentKind::TwoQuantum => AxisPair::Omega2Omega3,
            _ => AxisPair::Omega1Omega3,
        }
    }

    pub fn labels(self) -> (&'static str, &'static str) {
        match self {
            AxisPair::Omega1Omega3 => ("omega1", "omega3"),
            AxisPair::Omega2Omega3 => ("omega2", "omega3"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGridSpec {
    pub x: AxisSpec,
    pub y: AxisSpec,
}

impl FrequencyGridSpec {
    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Experiment(ExperimentKind),
    FullFourier,
}

/// Complex spectrum on a rectangular grid, row-major with x as the outer
/// index: `values[i * y.len() + j] = S(x[i], y[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub kind: GridKind,
    pub pair: AxisPair,
    /// Value of the interval held fixed (fs).
    pub tau_fixed: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<C64>,
    /// True once the x axis has been mirrored (x → −x).
    pub omega1_flipped: bool,
}

impl SpectrumGrid {
    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.y.len() + j]
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.im).collect()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    pub fn scaled(&self, factor: C64) -> SpectrumGrid {
        SpectrumGrid {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Mirror the x axis: the value at −x moves to x, axis order stays
    /// ascending.
    pub fn flip_omega1(&self) -> SpectrumGrid {
        let ny = self.ny();
        let x: Vec<f64> = self.x.iter().rev().map(|v| -v).collect();
        let mut values = Vec::with_capacity(self.values.len());
        for i in (0..self.nx()).rev() {
            values.extend_from_slice(&self.values[i * ny..(i + 1) * ny]);
        }
        SpectrumGrid {
            x,
            values,
            omega1_flipped: !self.omega1_flipped,
            ..self.clone()
        }
    }

    /// Index of the grid point nearest to (x, y).
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        (nearest_index(&self.x, x), nearest_index(&self.y, y))
    }
}

fn nearest_index(axis: &[f64], v: f64) -> usize {
    let mut best = 0;
    for (k, a) in axis.iter().enumerate() {
        if (a - v).abs() < (axis[best] - v).abs() {
            best = k;
        }
    }
    best
}

/// Transformed interval indices for `kind` as (x axis, y axis).
fn transformed(kind: ExperimentKind) -> (usize, usize, usize) {
    let [a, b] = kind.transformed_intervals();
    (a, b, kind.fixed_interval())
}

/// Value of the broadened spectrum at one point.
pub fn spectrum_value(amps: &[PathwayAmplitude], kind: ExperimentKind, x: f64, y: f64, tau_fixed: f64) -> C64 {
    let (ix, iy, ifix) = transformed(kind);
    let mut args = [IntervalArg::Time(0.0); 3];
    args[ix] = IntervalArg::Freq(x);
    args[iy] = IntervalArg::Freq(y);
    args[ifix] = IntervalArg::Time(tau_fixed);
    amps.iter().map(|a| a.evaluate(args)).sum()
}

fn check_fixed(tau_fixed: f64) -> Result<()> {
    if !tau_fixed.is_finite() {
        return Err(Error::NonFinite("fixed delay"));
    }
    if tau_fixed < 0.0 {
        return Err(Error::invalid(format!("fixed delay must be non-negative, got {tau_fixed}")));
    }
    Ok(())
}

/// Broadened spectrum on a uniform grid.
pub fn spectrum_grid(
    amps: &[PathwayAmplitude],
    spec: &FrequencyGridSpec,
    tau_fixed: f64,
    kind: ExperimentKind,
    exec: Execution,
) -> Result<SpectrumGrid> {
    spec.validate()?;
    spectrum_on_axes(amps, kind, &spec.x.values(), &spec.y.values(), tau_fixed, exec)
}

/// Broadened spectrum on arbitrary (possibly nonuniform) axes.
pub fn spectrum_on_axes(
    amps: &[PathwayAmplitude],
    kind: ExperimentKind,
    x: &[f64],
    y: &[f64],
    tau_fixed: f64,
    exec: Execution,
) -> Result<SpectrumGrid> {
    check_fixed(tau_fixed)?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid("grid axes must be non-empty"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("grid axis"));
    }
    let (ix, iy, ifix) = transformed(kind);
    for a in amps {
        for k in [ix, iy] {
            if a.omega[k].im == 0.0 {
                return Err(Error::ZeroLinewidth { interval: k + 1 });
            }
        }
    }
    // fold the fixed-interval propagator into the amplitude once
    let terms: Vec<(C64, C64, C64)> = amps
        .iter()
        .map(|a| {
            let c = a.amp * IntervalArg::Time(tau_fixed).factor(a.omega[ifix]);
            (c, a.omega[ix], a.omega[iy])
        })
        .collect();
    let ny = y.len();
    let mut values = vec![C64::new(0.0, 0.0); x.len() * ny];
    exec.fill_rows(&mut values, ny, |i, row| {
        let wx = x[i];
        for (j, cell) in row.iter_mut().enumerate() {
            let wy = y[j];
            let mut acc = C64::new(0.0, 0.0);
            for &(c, ox, oy) in &terms {
                // i/(wx − ox) · i/(wy − oy) = −1 / ((wx − ox)(wy − oy))
                acc -= c / ((wx - ox) * (wy - oy));
            }
            *cell = acc;
        }
    });
    Ok(SpectrumGrid {
        kind: GridKind::Experiment(kind),
        pair: AxisPair::for_kind(kind),
        tau_fixed,
        x: x.to_vec(),
        y: y.to_vec(),
        values,
        omega1_flipped: false,
    })
}

/// Sum a rephasing and a nonrephasing grid after flipping the rephasing
/// ω₁ axis into the positive quadrant.
pub fn full_fourier(rephasing: &SpectrumGrid, nonrephasing: &SpectrumGrid) -> Result<SpectrumGrid> {
    if rephasing.kind != GridKind::Experiment(ExperimentKind::Rephasing) {
        return Err(Error::GridMismatch("first grid must be rephasing".into()));
    }
    if nonrephasing.kind != GridKind::Experiment(ExperimentKind::NonRephasing) {
        return Err(Error::GridMismatch("second grid must be nonrephasing".into()));
    }
    let r = if rephasing.omega1_flipped {
        rephasing.clone()
    } else {
        rephasing.flip_omega1()
    };
    if nonrephasing.omega1_flipped {
        return Err(Error::GridMismatch("nonrephasing grid must not be flipped".into()));
    }
    if r.tau_fixed != nonrephasing.tau_fixed {
        return Err(Error::GridMismatch(format!(
            "waiting times differ: {} vs {}",
            r.tau_fixed, nonrephasing.tau_fixed
        )));
    }
    axes_match("omega1", &r.x, &nonrephasing.x)?;
    axes_match("omega3", &r.y, &nonrephasing.y)?;
    Ok(SpectrumGrid {
        kind: GridKind::FullFourier,
        pair: AxisPair::Omega1Omega3,
        tau_fixed: r.tau_fixed,
        x: nonrephasing.x.clone(),
        y: nonrephasing.y.clone(),
        values: r
            .values
            .iter()
            .zip(&nonrephasing.values)
            .map(|(a, b)| a + b)
            .collect(),
        omega1_flipped: false,
    })
}

fn axes_match(name: &str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "{name} axes have {} and {} points",
            a.len(),
            b.len()
        )));
    }
    for (u, v) in a.iter().zip(b) {
        if (u - v).abs() > 1e-12 * (1.0 + u.abs().max(v.abs())) {
            return Err(Error::GridMismatch(format!("{name} axes differ at {u} vs {v}")));
        }
    }
    Ok(())
}

/// One pathway contribution to a stick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StickComponent {
    pub amp: C64,
    /// Frequency of the interval held fixed.
    pub omega_fixed: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickPeak {
    /// Position on the first transformed axis (rad/fs).
    pub omega_x: f64,
    /// Position on the emission axis (rad/fs).
    pub omega_y: f64,
    /// Summed amplitude with the fixed delay at zero.
    pub amp0: C64,
    /// Summed amplitude at the spectrum's fixed delay.
    pub amplitude: C64,
    pub components: Vec<StickComponent>,
}

impl StickPeak {
    pub fn amplitude_at(&self, tau_fixed: f64) -> C64 {
        self.components
            .iter()
            .map(|c| c.amp * IntervalArg::Time(tau_fixed).factor(c.omega_fixed))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickSpectrum {
    pub kind: ExperimentKind,
    pub pair: AxisPair,
    pub tau_fixed: f64,
    /// Sorted by (omega_x, omega_y).
    pub peaks: Vec<StickPeak>,
}

impl StickSpectrum {
    /// Peaks whose components do not cancel: some component sum exceeds
    /// `rel_tol` times the largest component magnitude at zero delay.
    pub fn significant_peaks(&self, rel_tol: f64) -> Vec<&StickPeak> {
        let scale = self
            .peaks
            .iter()
            .flat_map(|p| p.components.iter().map(|c| c.amp.norm()))
            .fold(0.0, f64::max);
        self.peaks
            .iter()
            .filter(|p| {
                // components sharing a fixed-interval frequency can cancel
                let mut groups: Vec<(C64, C64)> = Vec::new();
                for c in &p.components {
                    match groups
                        .iter_mut()
                        .find(|(w, _)| (*w - c.omega_fixed).norm() <= STICK_MERGE_TOLERANCE)
                    {
                        Some((_, a)) => *a += c.amp,
                        None => groups.push((c.omega_fixed, c.amp)),
                    }
                }
                groups.iter().any(|(_, a)| a.norm() > rel_tol * scale)
            })
            .collect()
    }

    pub fn find_peak(&self, x: f64, y: f64, tolerance: f64) -> Result<&StickPeak> {
        self.peaks
            .iter()
            .filter(|p| (p.omega_x - x).abs() <= tolerance && (p.omega_y - y).abs() <= tolerance)
            .min_by(|a, b| {
                let da = (a.omega_x - x).hypot(a.omega_y - y);
                let db = (b.omega_x - x).hypot(b.omega_y - y);
                da.total_cmp(&db)
            })
            .ok_or(Error::PeakNotFound { x, y, tolerance })
    }
}

/// Undamped stick spectrum. Each stick collects the pathways sharing a
/// position (Re Ω on the two transformed intervals).
pub fn stick_spectrum(amps: &[PathwayAmplitude], kind: ExperimentKind, tau_fixed: f64) -> Result<StickSpectrum> {
    check_fixed(tau_fixed)?;
    let (ix, iy, ifix) = transformed(kind);
    for a in amps {
        for k in [ix, iy] {
            if a.omega[k].im != 0.0 {
                return Err(Error::NonzeroLinewidth {
                    interval: k + 1,
                    gamma: -a.omega[k].im,
                });
            }
        }
    }
    let mut peaks: Vec<StickPeak> = Vec::new();
    for a in amps {
        let (x, y) = (a.omega[ix].re, a.omega[iy].re);
        let comp = StickComponent {
            amp: a.amp,
            omega_fixed: a.omega[ifix],
        };
        match peaks.iter_mut().find(|p| {
            (p.omega_x - x).abs() <= STICK_MERGE_TOLERANCE && (p.omega_y - y).abs() <= STICK_MERGE_TOLERANCE
        }) {
            Some(p) => p.components.push(comp),
            None => peaks.push(StickPeak {
                omega_x: x,
                omega_y: y,
                amp0: C64::new(0.0, 0.0),
                amplitude: C64::new(0.0, 0.0),
                components: vec![comp],
            }),
        }
    }
    for p in &mut peaks {
        p.amp0 = p.components.iter().map(|c| c.amp).sum();
        p.amplitude = p.amplitude_at(tau_fixed);
    }
    peaks.sort_by(|a, b| {
        a.omega_x
            .total_cmp(&b.omega_x)
            .then(a.omega_y.total_cmp(&b.omega_y))
    });
    Ok(StickSpectrum {
        kind,
        pair: AxisPair::for_kind(kind),
        tau_fixed,
        peaks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// Amplitude of the nearest undamped stick.
    Stick,
    /// Broadened grid value at the exact position.
    Broadened,
}

/// Spectrum value at a fixed (x, y) as a function of the fixed-interval
/// delay (τ₂ for R and nR, τ₁ for 2Q). No offset is applied.
pub fn waiting_time_trace(
    amps: &[PathwayAmplitude],
    kind: ExperimentKind,
    peak: (f64, f64),
    delays: &[f64],
    mode: TraceMode,
) -> Result<Vec<C64>> {
    for &t in delays {
        check_fixed(t)?;
    }
    match mode {
        TraceMode::Stick => {
            let sticks = stick_spectrum(amps, kind, 0.0)?;
            let p = sticks.find_peak(peak.0, peak.1, PEAK_LOOKUP_TOLERANCE)?;
            Ok(delays.iter().map(|&t| p.amplitude_at(t)).collect())
        }
        TraceMode::Broadened => {
            let (ix, iy, _) = transformed(kind);
            for a in amps {
                for k in [ix, iy] {
                    if a.omega[k].im == 0.0 {
                        return Err(Error::ZeroLinewidth { interval: k + 1 });
                    }
                }
            }
            Ok(delays
                .iter()
                .map(|&t| spectrum_value(amps, kind, peak.0, peak.1, t))
                .collect())
        }
    }
}

/// Angular frequency (rad/fs, non-negative) of the strongest nonzero
/// Fourier component of a uniformly sampled trace, after removing its mean.
/// Also returns the bin width.
pub fn dominant_frequency(trace: &[C64], dt: f64) -> Result<(f64, f64)> {
    let n = trace.len();
    if n < 4 {
        return Err(Error::invalid("trace too short for a spectrum"));
    }
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::invalid("sample spacing must be positive"));
    }
    let mean: C64 = trace.iter().sum::<C64>() / n as f64;
    let mut buf: Vec<C64> = trace.iter().map(|v| v - mean).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut best = 1;
    for k in 1..n {
        if buf[k].norm_sqr() > buf[best].norm_sqr() {
            best = k;
        }
    }
    let bin = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let signed = if best <= n / 2 { best as f64 } else { best as f64 - n as f64 };
    Ok((signed.abs() * bin, bin))
}

/// Spectrum obtained by sampling the time-domain signal on an n×n grid of
/// the two transformed delays and applying a 2D FFT with trapezoid end
/// weights. Only meant as a cross-check of the analytic transform.
pub fn fft_spectrum(
    amps: &[PathwayAmplitude],
    kind: ExperimentKind,
    tau_fixed: f64,
    n: usize,
    dt: f64,
) -> Result<SpectrumGrid> {
    check_fixed(tau_fixed)?;
    if n < 4 || dt <= 0.0 || !dt.is_finite() {
        return Err(Error::invalid("fft grid needs n >= 4 and dt > 0"));
    }
    let (ix, iy, ifix) = transformed(kind);
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut tau = [0.0; 3];
            tau[ix] = i as f64 * dt;
            tau[iy] = j as f64 * dt;
            tau[ifix] = tau_fixed;
            let mut w = 1.0;
            if i == 0 {
                w *= 0.5;
            }
            if j == 0 {
                w *= 0.5;
            }
            data[i * n + j] = w * amps.iter().map(|a| a.time_domain(tau)).sum::<C64>();
        }
    }
    // kernel e^{+iωt}: an unnormalised inverse FFT along each axis
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i] * dt * dt;
        }
    }
    // reorder bins to ascending frequency
    let bin = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let order: Vec<usize> = (n / 2 + 1..n).chain(0..=n / 2).collect();
    let axis: Vec<f64> = order
        .iter()
        .map(|&k| if k > n / 2 { (k as f64 - n as f64) * bin } else { k as f64 * bin })
        .collect();
    let mut values = Vec::with_capacity(n * n);
    for &i in &order {
        for &j in &order {
            values.push(data[i * n + j]);
        }
    }
    Ok(SpectrumGrid {
        kind: GridKind::Experiment(kind),
        pair: AxisPair::for_kind(kind),
        tau_fixed,
        x: axis.clone(),
        y: axis,
        values,
        omega1_flipped: false,
    })
}
