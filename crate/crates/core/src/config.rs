//! Run configuration. Every dimensional quantity carries its unit.
//!
//! ```json
//! {
//!   "system": { "dimer": {
//!     "omega_a": { "value": 365, "unit": "THz" },
//!     "omega_b": { "value": 397, "unit": "THz" },
//!     "coupling": { "value": 66, "unit": "meV" },
//!     "mu_a": -1.1, "mu_b": 1.5 } },
//!   "experiments": ["rephasing", "nonrephasing"],
//!   "waiting_times": { "list": { "values": [0], "unit": "fs" } },
//!   "grid": "stick",
//!   "outputs": ["sticks", "pathways"],
//!   "output_dir": "out"
//! }
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{build_exciton_dimer, ExcitonSystem, MixingAngleReport, PopulationRelaxation, SiteDimerParams};
use crate::pathway::ExperimentKind;
use crate::response::FieldSet;
use crate::spectra::{AxisSpec, FrequencyGridSpec};
use crate::units::{FrequencyUnit, UnitContext};

/// A frequency-like value (energy, ordinary or angular frequency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: FrequencyUnit,
}

impl Quantity {
    pub fn rad_per_fs(&self, u: &UnitContext) -> f64 {
        u.to_rad_per_fs(self.value, self.unit)
    }

    pub fn mev(&self, u: &UnitContext) -> f64 {
        u.rad_per_fs_to_mev(self.rad_per_fs(u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeUnit {
    #[serde(rename = "fs")]
    Fs,
    #[serde(rename = "ps")]
    Ps,
}

impl TimeUnit {
    fn to_fs(self, v: f64) -> f64 {
        match self {
            TimeUnit::Fs => v,
            TimeUnit::Ps => v * 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateUnit {
    #[serde(rename = "fs^-1")]
    PerFs,
    #[serde(rename = "ps^-1")]
    PerPs,
    /// Linewidth ħΓ as an energy.
    #[serde(rename = "meV")]
    MeV,
}

impl RateUnit {
    fn to_per_fs(self, v: f64, u: &UnitContext) -> f64 {
        match self {
            RateUnit::PerFs => v,
            RateUnit::PerPs => v * 1e-3,
            RateUnit::MeV => u.mev_to_rad_per_fs(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rate {
    pub value: f64,
    pub unit: RateUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RatesConfig {
    /// Γ_ab = coherence for a ≠ b, Γ_aa = population.
    Uniform { coherence: Rate, population: Rate },
    /// Γ_ab = γ_a + γ_b.
    PerLevel {
        gamma: Vec<f64>,
        unit: RateUnit,
        #[serde(default)]
        population_relaxation: PopulationRelaxation,
    },
    Matrix { values: Vec<Vec<f64>>, unit: RateUnit },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimerConfig {
    pub omega_a: Quantity,
    pub omega_b: Quantity,
    pub coupling: Quantity,
    pub mu_a: f64,
    pub mu_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biexciton_shift: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSystem {
    pub labels: Vec<String>,
    pub energies: Vec<f64>,
    pub energy_unit: FrequencyUnit,
    pub band: Vec<u8>,
    pub mu_plus: Vec<Vec<f64>>,
}

/// Exactly one of `dimer` and `explicit` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimer: Option<DimerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitSystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DelaySpec {
    List { values: Vec<f64>, unit: TimeUnit },
    /// start, start + step, … up to and including stop (within step/1e6).
    Range { start: f64, stop: f64, step: f64, unit: TimeUnit },
}

impl DelaySpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let out: Vec<f64> = match self {
            DelaySpec::List { values, unit } => values.iter().map(|&v| unit.to_fs(v)).collect(),
            DelaySpec::Range { start, stop, step, unit } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err(Error::Config("delay range must be finite".into()));
                }
                if *step <= 0.0 || stop < start {
                    return Err(Error::Config(format!(
                        "delay range needs step > 0 and stop >= start (got {start}..{stop} by {step})"
                    )));
                }
                let n = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize + 1;
                if n > 1_000_000 {
                    return Err(Error::Config(format!("delay range has {n} points")));
                }
                (0..n).map(|k| unit.to_fs(start + step * k as f64)).collect()
            }
        };
        if out.is_empty() {
            return Err(Error::Config("delay list is empty".into()));
        }
        if let Some(t) = out.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::Config(format!("delays must be finite and non-negative, got {t}")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub unit: FrequencyUnit,
}

impl AxisConfig {
    fn resolve(&self, u: &UnitContext) -> Result<AxisSpec> {
        AxisSpec::new(
            u.to_rad_per_fs(self.min, self.unit),
            u.to_rad_per_fs(self.max, self.unit),
            self.points,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Axes in the displayed (positive) quadrant; rephasing grids are computed
/// at −ω₁ and mirrored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x: AxisConfig,
    pub y: AxisConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StickMarker {
    Stick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridMode {
    Stick(StickMarker),
    Grid(GridConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Real,
    Imag,
    Abs,
    Sticks,
    Pathways,
    Diagrams,
    Traces,
}

/// Peak position in the displayed quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TracePeak {
    pub x: f64,
    pub y: f64,
    pub unit: FrequencyUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub amplitude: [f64; 3],
    /// Carrier phases in rad.
    pub phase: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub experiments: Vec<ExperimentKind>,
    /// τ₂ for rephasing and nonrephasing, τ₁ for two-quantum.
    pub waiting_times: DelaySpec,
    pub grid: GridMode,
    pub outputs: BTreeSet<OutputKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace_peaks: Vec<TracePeak>,
    /// Delays for traces; defaults to `waiting_times`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_delays: Option<DelaySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldConfig>,
    pub output_dir: PathBuf,
}

/// Everything a run needs, in internal units.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub system: ExcitonSystem,
    pub dimer: Option<(SiteDimerParams, MixingAngleReport)>,
    pub experiments: Vec<ExperimentKind>,
    pub waiting_times: Vec<f64>,
    pub grid: Option<FrequencyGridSpec>,
    pub outputs: BTreeSet<OutputKind>,
    /// Displayed-quadrant positions in rad/fs.
    pub trace_peaks: Vec<(f64, f64)>,
    pub trace_delays: Vec<f64>,
    pub fields: FieldSet,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical (re-serialised) configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Validate and convert to internal units without touching the disk.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let u = UnitContext::default();
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let (system, dimer) = self.system.build(&u).map_err(cfg)?;
        if self.experiments.is_empty() {
            return Err(Error::Config("at least one experiment is required".into()));
        }
        let mut seen = BTreeSet::new();
        for k in &self.experiments {
            if !seen.insert(*k) {
                return Err(Error::Config(format!("experiment {k} listed twice")));
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("no outputs requested".into()));
        }
        let waiting_times = self.waiting_times.resolve()?;
        let grid = match &self.grid {
            GridMode::Stick(_) => None,
            GridMode::Grid(g) => Some(FrequencyGridSpec {
                x: g.x.resolve(&u)?,
                y: g.y.resolve(&u)?,
            }),
        };
        let grid_outputs = [OutputKind::Real, OutputKind::Imag, OutputKind::Abs];
        if grid.is_none() && grid_outputs.iter().any(|k| self.outputs.contains(k)) {
            return Err(Error::Config(
                "real/imag/abs outputs need a frequency grid; stick mode writes sticks".into(),
            ));
        }
        if self.outputs.contains(&OutputKind::Traces) && self.trace_peaks.is_empty() {
            return Err(Error::Config("traces requested but trace_peaks is empty".into()));
        }
        let trace_peaks = self
            .trace_peaks
            .iter()
            .map(|p| {
                let (x, y) = (u.to_rad_per_fs(p.x, p.unit), u.to_rad_per_fs(p.y, p.unit));
                if x.is_finite() && y.is_finite() {
                    Ok((x, y))
                } else {
                    Err(Error::Config("trace peak must be finite".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let trace_delays = match &self.trace_delays {
            Some(d) => d.resolve()?,
            None => waiting_times.clone(),
        };
        let fields = match &self.fields {
            None => FieldSet::default(),
            Some(f) => {
                if f.amplitude.iter().chain(&f.phase).any(|v| !v.is_finite()) {
                    return Err(Error::Config("field amplitudes and phases must be finite".into()));
                }
                FieldSet::from_polar(f.amplitude, f.phase)
            }
        };
        Ok(ResolvedConfig {
            system,
            dimer,
            experiments: self.experiments.clone(),
            waiting_times,
            grid,
            outputs: self.outputs.clone(),
            trace_peaks,
            trace_delays,
            fields,
        })
    }
}

impl SystemConfig {
    pub fn build(&self, u: &UnitContext) -> Result<(ExcitonSystem, Option<(SiteDimerParams, MixingAngleReport)>)> {
        let (sys, dimer) = match (&self.dimer, &self.explicit) {
            (Some(d), None) => {
                let params = SiteDimerParams {
                    omega_a: d.omega_a.rad_per_fs(u),
                    omega_b: d.omega_b.rad_per_fs(u),
                    coupling: d.coupling.mev(u),
                    mu_a: d.mu_a,
                    mu_b: d.mu_b,
                    biexciton_shift: d.biexciton_shift.map(|q| q.mev(u)).unwrap_or(0.0),
                };
                let (sys, report) = build_exciton_dimer(&params)?;
                (sys, Some((params, report)))
            }
            (None, Some(e)) => {
                let energies = e
                    .energies
                    .iter()
                    .map(|&v| u.to_rad_per_fs(v, e.energy_unit))
                    .collect();
                let sys = ExcitonSystem::new(e.labels.clone(), energies, e.band.clone(), e.mu_plus.clone())?;
                (sys, None)
            }
            _ => {
                return Err(Error::Config(
                    "system needs exactly one of \"dimer\" or \"explicit\"".into(),
                ))
            }
        };
        let sys = match &self.rates {
            None => sys,
            Some(RatesConfig::Uniform { coherence, population }) => {
                let c = coherence.unit.to_per_fs(coherence.value, u);
                let p = population.unit.to_per_fs(population.value, u);
                let n = sys.n_levels();
                let m = (0..n)
                    .map(|a| (0..n).map(|b| if a == b { p } else { c }).collect())
                    .collect();
                sys.with_rate_matrix(m)?
            }
            Some(RatesConfig::PerLevel {
                gamma,
                unit,
                population_relaxation,
            }) => {
                let g: Vec<f64> = gamma.iter().map(|&v| unit.to_per_fs(v, u)).collect();
                sys.set_rates(&g, *population_relaxation)?
            }
            Some(RatesConfig::Matrix { values, unit }) => {
                let m = values
                    .iter()
                    .map(|row| row.iter().map(|&v| unit.to_per_fs(v, u)).collect())
                    .collect();
                sys.with_rate_matrix(m)?
            }
        };
        Ok((sys, dimer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = r#"{
        "system": { "dimer": {
            "omega_a": { "value": 365, "unit": "THz" },
            "omega_b": { "value": 397, "unit": "THz" },
            "coupling": { "value": 66, "unit": "meV" },
            "mu_a": -1.1, "mu_b": 1.5 } },
        "experiments": ["rephasing", "nonrephasing"],
        "waiting_times": { "range": { "start": 0, "stop": 100, "step": 25, "unit": "fs" } },
        "grid": "stick",
        "outputs": ["sticks"],
        "output_dir": "out"
    }"#;

    #[test]
    fn parses_and_resolves() {
        let c = RunConfig::from_json(FIG2).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.waiting_times, vec![0.0, 25.0, 50.0, 75.0, 100.0]);
        assert!(r.grid.is_none());
        let (p, _) = r.dimer.unwrap();
        assert!((p.coupling - 66.0).abs() < 1e-12);
        assert_eq!(c.hash(), RunConfig::from_json(FIG2).unwrap().hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn rejects_negative_points_and_unknown_fields() {
        let bad = FIG2.replace(
            r#""grid": "stick""#,
            r#""grid": { "x": { "min": 2, "max": 3, "points": -4, "unit": "rad/fs" },
                         "y": { "min": 2, "max": 3, "points": 4, "unit": "rad/fs" } }"#,
        );
        assert!(matches!(RunConfig::from_json(&bad), Err(Error::Config(_))));
        let extra = FIG2.replace(r#""grid": "stick""#, r#""grid": "stick", "colour": "red""#);
        assert!(matches!(RunConfig::from_json(&extra), Err(Error::Config(_))));
        let unitless = FIG2.replace(r#"{ "value": 66, "unit": "meV" }"#, "66");
        assert!(RunConfig::from_json(&unitless).is_err());
    }

    #[test]
    fn stick_mode_cannot_emit_grids() {
        let c = RunConfig::from_json(&FIG2.replace(r#"["sticks"]"#, r#"["abs"]"#)).unwrap();
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn rate_units() {
        let u = UnitContext::default();
        assert_eq!(RateUnit::PerPs.to_per_fs(20.0, &u), 0.02);
        assert!((RateUnit::MeV.to_per_fs(13.164238, &u) - 0.02).abs() < 1e-9);
    }
}
