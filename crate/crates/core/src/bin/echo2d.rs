use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use echo2d::config::RunConfig;
use echo2d::exec::{init_thread_pool, threads_from_env, Execution};
use echo2d::pathway::{classify_pathway, enumerate_pathways, render_diagram, ExperimentKind};
use echo2d::response::pathway_amplitudes;
use echo2d::spectra::{waiting_time_trace, TraceMode};
use echo2d::triangle::{check_system, random_triangle, seeded_rng, uniform_dephasing, TriangleReport};
use echo2d::units::{FrequencyUnit, UnitContext};
use echo2d::{Error, Result};

#[derive(Parser)]
#[command(name = "echo2d", version, about = "Third-order 2D spectra of few-level excitonic systems")]
struct Cli {
    /// Evaluate grids on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and write spectra, pathways and metadata.
    Simulate {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
    /// List the Liouville pathways of each configured experiment.
    Pathways {
        config: PathBuf,
        #[arg(long)]
        kind: Option<ExperimentKind>,
        /// Emit a JSON list per experiment instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Print double-sided Feynman diagrams.
    Diagram {
        config: PathBuf,
        #[arg(long)]
        kind: Option<ExperimentKind>,
        /// Only the pathway with this index.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Waiting-time traces at the config's trace peaks, as CSV on stdout.
    Trace {
        config: PathBuf,
        #[arg(long)]
        kind: Option<ExperimentKind>,
    },
    /// Compare pathway sum, dense propagation and closed-form dimer spectra.
    OracleCheck {
        /// Check this dimer instead of random ones.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        sets: usize,
        #[arg(long, default_value_t = 20)]
        probes: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Express a frequency-like value in meV, THz and rad/fs.
    ConvertUnits {
        value: f64,
        unit: FrequencyUnit,
    },
}

fn kinds(cfg: &RunConfig, only: Option<ExperimentKind>) -> Vec<ExperimentKind> {
    match only {
        Some(k) => vec![k],
        None => cfg.experiments.clone(),
    }
}

fn run(cli: Cli) -> Result<()> {
    init_thread_pool(threads_from_env()?);
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Simulate { config, output_dir } => {
            let cfg = RunConfig::from_file(&config)?;
            let manifest = echo2d::run::run(&cfg, output_dir.as_deref(), exec)?;
            for f in &manifest.files {
                println!("{}", manifest.output_dir.join(f).display());
            }
        }
        Command::Pathways { config, kind, json } => {
            let cfg = RunConfig::from_file(&config)?;
            let r = cfg.resolve()?;
            for k in kinds(&cfg, kind) {
                let paths = enumerate_pathways(&r.system, k);
                let amps = pathway_amplitudes(&r.system, k, &r.fields);
                if json {
                    let bytes = echo2d::run::pathways_json(&r.system, &paths, &amps)?;
                    print!("{}", String::from_utf8_lossy(&bytes));
                    continue;
                }
                println!("# {k}: {} pathways", paths.len());
                for (i, (p, a)) in paths.iter().zip(&amps).enumerate() {
                    let elems: Vec<String> = p.elements
                        .iter()
                        .map(|e| format!("{}{}", r.system.label(e.ket), r.system.label(e.bra)))
                        .collect();
                    println!(
                        "{i:3}  F{}  {:3}  {}  amp {:+.6e}{:+.6e}i",
                        p.r_index,
                        classify_pathway(&r.system, p).abbreviation(),
                        elems.join(" -> "),
                        a.amp.re,
                        a.amp.im
                    );
                }
            }
        }
        Command::Diagram { config, kind, index } => {
            let cfg = RunConfig::from_file(&config)?;
            let r = cfg.resolve()?;
            for k in kinds(&cfg, kind) {
                let paths = enumerate_pathways(&r.system, k);
                if let Some(i) = index {
                    if i >= paths.len() {
                        return Err(Error::Config(format!("{k} has {} pathways, no index {i}", paths.len())));
                    }
                }
                for (i, p) in paths.iter().enumerate() {
                    if index.is_none_or(|want| want == i) {
                        println!("[{i}] {}", render_diagram(&r.system, p));
                    }
                }
            }
        }
        Command::Trace { config, kind } => {
            let cfg = RunConfig::from_file(&config)?;
            let r = cfg.resolve()?;
            if r.trace_peaks.is_empty() {
                return Err(Error::Config("config has no trace_peaks".into()));
            }
            let mode = if r.grid.is_some() {
                TraceMode::Broadened
            } else {
                TraceMode::Stick
            };
            let mut header = vec!["kind".to_string(), "tau_fs".to_string()];
            for k in 0..r.trace_peaks.len() {
                header.push(format!("peak{k}_re"));
                header.push(format!("peak{k}_im"));
            }
            println!("{}", header.join(","));
            for k in kinds(&cfg, kind) {
                let amps = pathway_amplitudes(&r.system, k, &r.fields);
                let traces = r
                    .trace_peaks
                    .iter()
                    .map(|&(x, y)| {
                        let x = if k == ExperimentKind::Rephasing { -x } else { x };
                        waiting_time_trace(&amps, k, (x, y), &r.trace_delays, mode)
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (n, t) in r.trace_delays.iter().enumerate() {
                    let mut row = vec![k.to_string(), format!("{t:?}")];
                    for tr in &traces {
                        row.push(format!("{:?}", tr[n].re));
                        row.push(format!("{:?}", tr[n].im));
                    }
                    println!("{}", row.join(","));
                }
            }
        }
        Command::OracleCheck {
            config,
            seed,
            sets,
            probes,
            tolerance,
        } => {
            let report: TriangleReport = match config {
                Some(path) => {
                    let r = RunConfig::from_file(&path)?.resolve()?;
                    if r.dimer.is_none() {
                        return Err(Error::Config("oracle-check needs a dimer system".into()));
                    }
                    // closed forms assume a uniform coherence rate; keep the
                    // config's when it has one, else use a generic width
                    let sys = if r.system.rates().iter().flatten().all(|&g| g == 0.0) {
                        uniform_dephasing(&r.system, 0.02)?
                    } else {
                        r.system.clone()
                    };
                    check_system(&sys, probes, &mut seeded_rng(seed))?
                }
                None => random_triangle(seed, sets, probes)?,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            let dev = report.max_deviation();
            println!("max pairwise deviation: {dev:e}");
            if dev.is_nan() || dev > tolerance {
                return Err(Error::OracleMismatch {
                    deviation: dev,
                    tolerance,
                });
            }
        }
        Command::ConvertUnits { value, unit } => {
            let r = UnitContext::default().resolve(value, unit);
            println!("{:?} meV", r.mev);
            println!("{:?} THz", r.thz);
            println!("{:?} rad/fs", r.rad_per_fs);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("echo2d: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
