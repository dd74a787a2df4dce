//! A full simulation run: config in, files plus a metadata record out.
//!
//! Every check that can fail (schema, linewidth against grid mode, trace
//! peak lookup) runs before the output directory is touched, so a rejected
//! config leaves no files behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{OutputKind, ResolvedConfig, RunConfig};
use crate::error::Result;
use crate::exec::Execution;
use crate::model::{ExcitonSystem, MixingAngleReport, SiteDimerParams};
use crate::output::{self, Normalization};
use crate::pathway::{classify_pathway, enumerate_pathways, render_diagram, ExperimentKind, Pathway, PathwayClass};
use crate::response::{factor_pathway, PathwayAmplitude};
use crate::spectra::{
    full_fourier, spectrum_grid, spectrum_on_axes, stick_spectrum, waiting_time_trace, AxisPair, AxisSpec, FrequencyGridSpec,
    SpectrumGrid, StickSpectrum, TraceMode,
};
use crate::units::{Resolved, UnitContext, HBAR_MEV_FS};

pub const METADATA_FILE: &str = "metadata.json";

const FREQUENCY_NOTE: &str =
    "THz values are ordinary frequencies nu with omega = 2 pi nu; meV values are hbar*omega";
const OMEGA1_NOTE: &str = "grids and traces use the displayed quadrant (rephasing omega1 mirrored to positive); \
     stick positions are raw Re(Omega), so rephasing sticks sit at omega1 < 0";

/// Files written by a run, relative to `output_dir`, in write order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
}

#[derive(Debug, Serialize)]
struct LevelRecord {
    label: String,
    band: u8,
    energy: Resolved,
}

#[derive(Debug, Serialize)]
struct SystemRecord {
    levels: Vec<LevelRecord>,
    mu_plus: Vec<Vec<f64>>,
    /// Γ_ab in fs⁻¹.
    rates_per_fs: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct MixingRecord {
    theta_rad: f64,
    omega_bar: Resolved,
    delta: Resolved,
    omega_alpha: Resolved,
    omega_beta: Resolved,
    omega_f: Resolved,
    splitting: Resolved,
    mu_alpha_g: f64,
    mu_beta_g: f64,
    mu_f_alpha: f64,
    mu_f_beta: f64,
}

#[derive(Debug, Serialize)]
struct DimerRecord {
    omega_a: Resolved,
    omega_b: Resolved,
    coupling: Resolved,
    biexciton_shift: Resolved,
    mu_a: f64,
    mu_b: f64,
    mixing: MixingRecord,
}

#[derive(Debug, Serialize)]
struct AxisRecord {
    min: Resolved,
    max: Resolved,
    points: usize,
}

#[derive(Debug, Serialize)]
struct PeakRecord {
    x: Resolved,
    y: Resolved,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    hbar_mev_fs: f64,
    frequency_units: &'static str,
    omega1_convention: &'static str,
    system: SystemRecord,
    dimer: Option<DimerRecord>,
    experiments: &'a [ExperimentKind],
    waiting_times_fs: &'a [f64],
    grid: Option<[AxisRecord; 2]>,
    trace_peaks: Vec<PeakRecord>,
    trace_delays_fs: &'a [f64],
    heatmaps: BTreeMap<String, Normalization>,
    files: Vec<String>,
}

fn system_record(sys: &ExcitonSystem, u: &UnitContext) -> SystemRecord {
    let r = |w| u.resolve(w, crate::units::FrequencyUnit::RadPerFs);
    SystemRecord {
        levels: (0..sys.n_levels())
            .map(|a| LevelRecord {
                label: sys.label(a).to_string(),
                band: sys.band(a),
                energy: r(sys.energies()[a]),
            })
            .collect(),
        mu_plus: sys.mu_plus().to_vec(),
        rates_per_fs: sys.rates().to_vec(),
    }
}

fn dimer_record(p: &SiteDimerParams, m: &MixingAngleReport, u: &UnitContext) -> DimerRecord {
    use crate::units::FrequencyUnit::{MeV, RadPerFs};
    let r = |w| u.resolve(w, RadPerFs);
    DimerRecord {
        omega_a: r(p.omega_a),
        omega_b: r(p.omega_b),
        coupling: u.resolve(p.coupling, MeV),
        biexciton_shift: u.resolve(p.biexciton_shift, MeV),
        mu_a: p.mu_a,
        mu_b: p.mu_b,
        mixing: MixingRecord {
            theta_rad: m.theta,
            omega_bar: r(m.omega_bar),
            delta: r(m.delta),
            omega_alpha: r(m.omega_alpha),
            omega_beta: r(m.omega_beta),
            omega_f: r(m.omega_f),
            splitting: r(m.splitting()),
            mu_alpha_g: m.mu_alpha_g,
            mu_beta_g: m.mu_beta_g,
            mu_f_alpha: m.mu_f_alpha,
            mu_f_beta: m.mu_f_beta,
        },
    }
}

fn axis_record(a: &AxisSpec, u: &UnitContext) -> AxisRecord {
    use crate::units::FrequencyUnit::RadPerFs;
    AxisRecord {
        min: u.resolve(a.min, RadPerFs),
        max: u.resolve(a.max, RadPerFs),
        points: a.points,
    }
}

#[derive(Debug, Serialize)]
struct PathwayRecord<'a> {
    index: usize,
    class: PathwayClass,
    pathway: &'a Pathway,
    amplitude: PathwayAmplitude,
}

/// Pathways with their class and factored amplitude, as pretty JSON.
pub fn pathways_json(sys: &ExcitonSystem, pathways: &[Pathway], amps: &[PathwayAmplitude]) -> Result<Vec<u8>> {
    let records: Vec<PathwayRecord> = pathways
        .iter()
        .zip(amps)
        .enumerate()
        .map(|(index, (pw, a))| PathwayRecord {
            index,
            class: classify_pathway(sys, pw),
            pathway: pw,
            amplitude: *a,
        })
        .collect();
    output::json_bytes(&records)
}

#[derive(Debug, Serialize)]
struct StickFile<'a> {
    kind: ExperimentKind,
    x_axis: &'static str,
    y_axis: &'static str,
    omega1_convention: &'static str,
    spectra: &'a [StickSpectrum],
}

/// Per-experiment data shared by all outputs.
struct Prepared {
    kind: ExperimentKind,
    pathways: Vec<Pathway>,
    amps: Vec<PathwayAmplitude>,
    traces: Option<Vec<Vec<crate::C64>>>,
}

/// Displayed-quadrant x → the raw transform variable.
fn raw_x(kind: ExperimentKind, x: f64) -> f64 {
    if kind == ExperimentKind::Rephasing {
        -x
    } else {
        x
    }
}

fn prepare(r: &ResolvedConfig) -> Result<Vec<Prepared>> {
    let mut out = Vec::new();
    for &kind in &r.experiments {
        let pathways = enumerate_pathways(&r.system, kind);
        let amps: Vec<PathwayAmplitude> = pathways
            .iter()
            .map(|p| factor_pathway(&r.system, p, &r.fields))
            .collect();
        // surface linewidth/grid-mode mismatches with the spectra error text
        match &r.grid {
            Some(g) => {
                spectrum_on_axes(&amps, kind, &[raw_x(kind, g.x.min)], &[g.y.min], 0.0, Execution::Sequential)?;
            }
            None => {
                stick_spectrum(&amps, kind, 0.0)?;
            }
        }
        if r.grid.is_some() && r.outputs.contains(&OutputKind::Sticks) {
            stick_spectrum(&amps, kind, 0.0)?;
        }
        let traces = if r.outputs.contains(&OutputKind::Traces) {
            let mode = if r.grid.is_some() {
                TraceMode::Broadened
            } else {
                TraceMode::Stick
            };
            let t = r
                .trace_peaks
                .iter()
                .map(|&(x, y)| waiting_time_trace(&amps, kind, (raw_x(kind, x), y), &r.trace_delays, mode))
                .collect::<Result<Vec<_>>>()?;
            Some(t)
        } else {
            None
        };
        out.push(Prepared {
            kind,
            pathways,
            amps,
            traces,
        });
    }
    Ok(out)
}

fn fmt_delay(t: f64) -> String {
    format!("{t}")
}

/// Writes files under `dir` and keeps the manifest and heatmap records.
struct Sink {
    dir: PathBuf,
    files: Vec<String>,
    heatmaps: BTreeMap<String, Normalization>,
}

impl Sink {
    fn put(&mut self, name: String, bytes: &[u8]) -> Result<()> {
        output::write_file(&self.dir.join(&name), bytes)?;
        self.files.push(name);
        Ok(())
    }

    fn grid(&mut self, stem: &str, grid: &SpectrumGrid, outputs: &std::collections::BTreeSet<OutputKind>) -> Result<()> {
        let (lx, ly) = grid.pair.labels();
        let corner = format!("{lx}\\{ly} [rad/fs]");
        let parts: [(OutputKind, &str, fn(&SpectrumGrid) -> Vec<f64>); 3] = [
            (OutputKind::Real, "real", SpectrumGrid::real),
            (OutputKind::Imag, "imag", SpectrumGrid::imag),
            (OutputKind::Abs, "abs", SpectrumGrid::modulus),
        ];
        for (kind, suffix, get) in parts {
            if !outputs.contains(&kind) {
                continue;
            }
            let values = get(grid);
            self.put(
                format!("{stem}_{suffix}.csv"),
                &output::grid_csv_bytes(&corner, &grid.x, &grid.y, &values)?,
            )?;
            let (levels, norm) = output::heatmap_levels(&values, grid.nx(), grid.ny());
            let name = format!("{stem}_{suffix}.pgm");
            self.put(name.clone(), &output::pgm_bytes(grid.nx(), grid.ny(), &levels))?;
            self.heatmaps.insert(name, norm);
        }
        Ok(())
    }
}

fn displayed_grid(
    amps: &[PathwayAmplitude],
    kind: ExperimentKind,
    spec: &FrequencyGridSpec,
    tau: f64,
    exec: Execution,
) -> Result<SpectrumGrid> {
    if kind == ExperimentKind::Rephasing {
        let x: Vec<f64> = spec.x.values().iter().rev().map(|v| -v).collect();
        Ok(spectrum_on_axes(amps, kind, &x, &spec.y.values(), tau, exec)?.flip_omega1())
    } else {
        spectrum_grid(amps, spec, tau, kind, exec)
    }
}

/// Run `cfg`, writing into `output_dir` (or the config's own directory).
pub fn run(cfg: &RunConfig, output_dir: Option<&Path>, exec: Execution) -> Result<Manifest> {
    let resolved = cfg.resolve()?;
    let prepared = prepare(&resolved)?;
    let dir = output_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    let mut sink = Sink {
        dir: dir.clone(),
        files: Vec::new(),
        heatmaps: BTreeMap::new(),
    };
    let r = &resolved;
    let sys = &r.system;

    for p in &prepared {
        let name = p.kind.to_string();
        let fixed = p.kind.fixed_interval() + 1;
        if let Some(spec) = &r.grid {
            for &t in &r.waiting_times {
                let grid = displayed_grid(&p.amps, p.kind, spec, t, exec)?;
                sink.grid(&format!("{name}_tau{fixed}_{}fs", fmt_delay(t)), &grid, &r.outputs)?;
            }
        }
        if r.outputs.contains(&OutputKind::Sticks) {
            let spectra = r
                .waiting_times
                .iter()
                .map(|&t| stick_spectrum(&p.amps, p.kind, t))
                .collect::<Result<Vec<_>>>()?;
            let (x_axis, y_axis) = AxisPair::for_kind(p.kind).labels();
            let file = StickFile {
                kind: p.kind,
                x_axis,
                y_axis,
                omega1_convention: OMEGA1_NOTE,
                spectra: &spectra,
            };
            sink.put(format!("{name}_sticks.json"), &output::json_bytes(&file)?)?;
        }
        if r.outputs.contains(&OutputKind::Pathways) {
            sink.put(format!("{name}_pathways.json"), &pathways_json(sys, &p.pathways, &p.amps)?)?;
        }
        if r.outputs.contains(&OutputKind::Diagrams) {
            let text: Vec<String> = p.pathways.iter().map(|pw| render_diagram(sys, pw).to_string()).collect();
            sink.put(format!("{name}_diagrams.txt"), text.join("\n").as_bytes())?;
        }
        if let Some(traces) = &p.traces {
            let labels: Vec<String> = r
                .trace_peaks
                .iter()
                .enumerate()
                .map(|(k, _)| format!("peak{k}"))
                .collect();
            sink.put(
                format!("{name}_traces.csv"),
                &output::trace_csv_bytes(&r.trace_delays, &labels, traces)?,
            )?;
        }
    }

    // absorptive-style sum when both orderings share the grid
    let find = |k| prepared.iter().find(|p| p.kind == k);
    if let (Some(spec), Some(rp), Some(np)) = (
        &r.grid,
        find(ExperimentKind::Rephasing),
        find(ExperimentKind::NonRephasing),
    ) {
        for &t in &r.waiting_times {
            let rg = displayed_grid(&rp.amps, rp.kind, spec, t, exec)?;
            let ng = displayed_grid(&np.amps, np.kind, spec, t, exec)?;
            let total = full_fourier(&rg, &ng)?;
            sink.grid(&format!("full_fourier_tau2_{}fs", fmt_delay(t)), &total, &r.outputs)?;
        }
    }

    let u = UnitContext::default();
    let mut files = sink.files.clone();
    files.push(METADATA_FILE.to_string());
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        hbar_mev_fs: HBAR_MEV_FS,
        frequency_units: FREQUENCY_NOTE,
        omega1_convention: OMEGA1_NOTE,
        system: system_record(sys, &u),
        dimer: r.dimer.as_ref().map(|(p, m)| dimer_record(p, m, &u)),
        experiments: &r.experiments,
        waiting_times_fs: &r.waiting_times,
        grid: r.grid.as_ref().map(|g| [axis_record(&g.x, &u), axis_record(&g.y, &u)]),
        trace_peaks: r
            .trace_peaks
            .iter()
            .map(|&(x, y)| PeakRecord {
                x: u.resolve(x, crate::units::FrequencyUnit::RadPerFs),
                y: u.resolve(y, crate::units::FrequencyUnit::RadPerFs),
            })
            .collect(),
        trace_delays_fs: &r.trace_delays,
        heatmaps: sink.heatmaps.clone(),
        files: files.clone(),
    };
    sink.put(METADATA_FILE.to_string(), &output::json_bytes(&meta)?)?;
    Ok(Manifest { output_dir: dir, files })
}
