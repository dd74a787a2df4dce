use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use echo2d::config::RunConfig;
use echo2d::exec::Execution;
use echo2d::output::{read_grid_csv, read_pgm, Normalization};
use echo2d::pathway::ExperimentKind;
use echo2d::response::pathway_amplitudes;
use echo2d::spectra::spectrum_on_axes;

const GRID_CONFIG: &str = r#"{
  "system": {
    "dimer": {
      "omega_a": { "value": 365, "unit": "THz" },
      "omega_b": { "value": 397, "unit": "THz" },
      "coupling": { "value": 66, "unit": "meV" },
      "mu_a": -1.1, "mu_b": 1.5
    },
    "rates": { "uniform": {
      "coherence": { "value": 0.02, "unit": "fs^-1" },
      "population": { "value": 0, "unit": "fs^-1" } } }
  },
  "experiments": ["rephasing", "nonrephasing", "two_quantum"],
  "waiting_times": { "list": { "values": [0, 37.5], "unit": "fs" } },
  "grid": {
    "x": { "min": 1400, "max": 1750, "points": 33, "unit": "meV" },
    "y": { "min": 1400, "max": 1750, "points": 29, "unit": "meV" }
  },
  "outputs": ["real", "imag", "abs", "pathways", "diagrams", "traces"],
  "trace_peaks": [{ "x": 1482.2, "y": 1669.1, "unit": "meV" }],
  "trace_delays": { "range": { "start": 0, "stop": 20, "step": 2.5, "unit": "fs" } },
  "output_dir": "ignored"
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_echo2d"));
    c.env_remove("ECHO2D_THREADS");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn simulate(config: &Path, out: &Path, threads: Option<&str>, sequential: bool) -> Output {
    let mut c = bin();
    if let Some(t) = threads {
        c.env("ECHO2D_THREADS", t);
    }
    if sequential {
        c.arg("--sequential");
    }
    c.arg("simulate").arg(config).arg("-o").arg(out).output().unwrap()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "grid.json", GRID_CONFIG);
    let runs = [(Some("1"), false), (Some("3"), false), (None, false), (None, true)];
    let mut reference = None;
    for (k, (threads, seq)) in runs.into_iter().enumerate() {
        let out = tmp.path().join(format!("run{k}"));
        let o = simulate(&cfg, &out, threads, seq);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let contents = dir_contents(&out);
        match &reference {
            None => reference = Some(contents),
            Some(r) => assert!(r == &contents, "run {k} differs"),
        }
    }
}

#[test]
fn grid_files_round_trip_and_heatmaps_follow_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), "grid.json", GRID_CONFIG);
    let out = tmp.path().join("out");
    assert!(simulate(&cfg_path, &out, None, false).status.success());

    let cfg = RunConfig::from_json(GRID_CONFIG).unwrap();
    let r = cfg.resolve().unwrap();
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config_hash"], cfg.hash());
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    for unit in ["meV", "THz", "rad/fs"] {
        assert!(meta["dimer"]["coupling"][unit].is_number());
        assert!(meta["system"]["levels"][1]["energy"][unit].is_number());
    }

    // nonrephasing real part computed directly equals the CSV exactly
    let spec = r.grid.unwrap();
    let amps = pathway_amplitudes(&r.system, ExperimentKind::NonRephasing, &r.fields);
    let direct = spectrum_on_axes(
        &amps,
        ExperimentKind::NonRephasing,
        &spec.x.values(),
        &spec.y.values(),
        37.5,
        Execution::Sequential,
    )
    .unwrap();
    let table = read_grid_csv(&out.join("nonrephasing_tau2_37.5fs_real.csv")).unwrap();
    assert_eq!(table.x, direct.x);
    assert_eq!(table.y, direct.y);
    assert_eq!(table.values, direct.real());

    // every PGM decodes back onto its CSV within one grey level
    let heatmaps: std::collections::BTreeMap<String, Normalization> =
        serde_json::from_value(meta["heatmaps"].clone()).unwrap();
    assert!(!heatmaps.is_empty());
    for (name, norm) in &heatmaps {
        let csv = read_grid_csv(&out.join(name.replace(".pgm", ".csv"))).unwrap();
        let img = read_pgm(&out.join(name)).unwrap();
        assert_eq!((img.width, img.height), (csv.x.len(), csv.y.len()));
        let min = csv.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = csv.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((norm.min, norm.max), (min, max));
        let step = (max - min) / norm.maxval as f64;
        for row in 0..img.height {
            for col in 0..img.width {
                let j = img.height - 1 - row;
                let v = csv.values[col * csv.y.len() + j];
                let back = norm.value(img.levels[row * img.width + col]);
                assert!((back - v).abs() <= 0.5 * step + 1e-12 * max.abs().max(min.abs()));
            }
        }
    }
    let listed: Vec<String> = serde_json::from_value(meta["files"].clone()).unwrap();
    for f in &listed {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(listed.iter().any(|f| f.starts_with("full_fourier_tau2_0fs")));
    assert!(listed.iter().any(|f| f.starts_with("two_quantum_tau1_37.5fs")));
}

#[test]
fn schema_errors_exit_2_and_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = [
        GRID_CONFIG.replace(r#""points": 33"#, r#""points": -33"#),
        GRID_CONFIG.replace(r#""mu_a": -1.1"#, r#""mu_a": -1.1, "mu_c": 2"#),
        GRID_CONFIG.replace(r#""unit": "meV" },"#, r#""unit": "eV" },"#),
        GRID_CONFIG.replace(r#""experiments": ["rephasing", "nonrephasing", "two_quantum"]"#, r#""experiments": []"#),
        "{ not json".to_string(),
    ];
    for (k, text) in bad.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("bad{k}.json"), text);
        let out = tmp.path().join(format!("out{k}"));
        let o = simulate(&cfg, &out, None, false);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists(), "case {k} wrote files");
    }
}

#[test]
fn linewidth_mode_mismatch_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = GRID_CONFIG.replace(r#""value": 0.02"#, r#""value": 0"#);
    let cfg = write_config(tmp.path(), "zero.json", &text);
    let out = tmp.path().join("out");
    let o = simulate(&cfg, &out, None, false);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero linewidth"));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "grid.json", GRID_CONFIG);
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = simulate(&cfg, &blocker.join("sub"), None, false);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write"));
}

#[test]
fn bad_thread_cap_is_rejected() {
    let o = bin().env("ECHO2D_THREADS", "0").args(["convert-units", "1", "meV"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_check_exit_codes() {
    let ok = bin().args(["oracle-check", "--seed", "5", "--sets", "3", "--probes", "4"]).output().unwrap();
    assert!(ok.status.success());
    let again = bin().args(["oracle-check", "--seed", "5", "--sets", "3", "--probes", "4"]).output().unwrap();
    assert_eq!(ok.stdout, again.stdout);
    let strict = bin()
        .args(["oracle-check", "--seed", "5", "--sets", "3", "--probes", "4", "--tolerance", "0"])
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn inspection_subcommands_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "grid.json", GRID_CONFIG);
    for args in [
        vec!["pathways"],
        vec!["diagram", "--kind", "rephasing", "--index", "0"],
        vec!["trace", "--kind", "nonrephasing"],
    ] {
        let o = bin().args(&args).arg(&cfg).output().unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stdout.is_empty());
    }
    let o = bin().args(["diagram", "--index", "99"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let trace = bin().args(["trace", "--kind", "nonrephasing"]).arg(&cfg).output().unwrap();
    assert_eq!(String::from_utf8(trace.stdout).unwrap().lines().count(), 1 + 9);
    let o = bin().args(["pathways", "--json", "--kind", "rephasing"]).arg(&cfg).output().unwrap();
    let list: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(list.as_array().unwrap().len(), 12);
}

#[test]
fn convert_units_prints_all_three() {
    let o = bin().args(["convert-units", "66", "meV"]).output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    let thz: f64 = text
        .lines()
        .find(|l| l.ends_with("THz"))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((thz - 15.958).abs() < 1e-3, "{thz}");
    let bad = bin().args(["convert-units", "1", "eV"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn stick_json_round_trips_exactly() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference_sticks.json")).unwrap();
    let cfg = RunConfig::from_json(&text).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    echo2d::run::run(&cfg, Some(tmp.path()), Execution::Parallel).unwrap();
    let r = cfg.resolve().unwrap();
    for kind in [ExperimentKind::Rephasing, ExperimentKind::NonRephasing] {
        let doc: serde_json::Value =
            serde_json::from_slice(&std::fs::read(tmp.path().join(format!("{kind}_sticks.json"))).unwrap()).unwrap();
        let back: Vec<echo2d::spectra::StickSpectrum> = serde_json::from_value(doc["spectra"].clone()).unwrap();
        let amps = pathway_amplitudes(&r.system, kind, &r.fields);
        let direct = echo2d::spectra::stick_spectrum(&amps, kind, 0.0).unwrap();
        assert_eq!(back, vec![direct]);
        assert_eq!(back[0].peaks.len(), 4);

        let paths: serde_json::Value =
            serde_json::from_slice(&std::fs::read(tmp.path().join(format!("{kind}_pathways.json"))).unwrap()).unwrap();
        let listed: Vec<echo2d::Pathway> = paths
            .as_array()
            .unwrap()
            .iter()
            .map(|p| serde_json::from_value(p["pathway"].clone()).unwrap())
            .collect();
        assert_eq!(listed, echo2d::pathway::enumerate_pathways(&r.system, kind));
    }
    let traces = std::fs::read_to_string(tmp.path().join("rephasing_traces.csv")).unwrap();
    assert_eq!(traces.lines().count(), 1 + 1001);
}
