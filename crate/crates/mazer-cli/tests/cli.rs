//! End-to-end tests of the `mazer` binary: figure presets, validation,
//! determinism, and the sidecar round trip.

use std::path::Path;
use std::process::{Command, Output};

fn mazer(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mazer"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).expect("artifact exists");
    assert!(!text.contains('\r'), "LF line endings only");
    let mut lines = text.lines();
    let header: Vec<String> =
        lines.next().expect("header").split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect::<Vec<_>>())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], idx: usize) -> Vec<f64> {
    rows.iter().map(|r| r[idx].parse::<f64>().expect("parseable float")).collect()
}

#[test]
fn packet_preset_fig6a_reproduces_quoted_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(dir.path(), &["packet", "--preset", "fig6a", "--output", "fig6a.csv"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = read_csv(&dir.path().join("fig6a.csv"));
    assert_eq!(header, ["t_over_tcl", "density_cavity", "density_free"]);
    assert_eq!(rows.len(), 801);

    let t = column(&rows, 0);
    let cavity = column(&rows, 1);
    let free = column(&rows, 2);
    let argmax =
        |v: &[f64]| v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let cavity_peak = t[argmax(&cavity)];
    let free_peak = t[argmax(&free)];
    assert!(
        (cavity_peak - (-0.98)).abs() < 0.05,
        "cavity peak at {cavity_peak}, expected -0.98 ± 0.05"
    );
    assert!((free_peak - 1.0).abs() < 0.01, "free peak at {free_peak}, expected 1.00 ± 0.01");

    // sidecar resolves the preset parameters
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fig6a.params.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["k_bar"].as_f64(), Some(0.1));
    assert_eq!(sidecar["sigma"].as_f64(), Some(0.01));
    assert_eq!(sidecar["length_k0l"].as_f64(), Some(std::f64::consts::FRAC_PI_2));
    assert_eq!(sidecar["photons_n"].as_u64(), Some(0));
    assert_eq!(sidecar["channel"].as_str(), Some("excited"));
}

#[test]
fn phase_sweep_fig4_is_negative_for_ultracold_atoms() {
    let dir = tempfile::tempdir().unwrap();
    // coarser grid than the preset default keeps the test quick
    let out = mazer(
        dir.path(),
        &[
            "phase-sweep",
            "--preset",
            "fig4",
            "--k-min",
            "0.05",
            "--k-max",
            "10",
            "--dk",
            "0.05",
            "--output",
            "fig4.csv",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("fig4.csv"));
    assert_eq!(header, ["k_bar", "t_ph_over_tcl", "T_abs2", "flag"]);
    let k = column(&rows, 0);
    let tph = column(&rows, 1);
    for (k, tph) in k.iter().zip(&tph) {
        if *k < 0.3 {
            assert!(*tph < 0.0, "t_ph/t_cl = {tph} at ultracold k̄ = {k} should be negative");
        }
    }
    // classical limit for fast atoms
    let last = tph.last().unwrap();
    assert!((last - 1.0).abs() < 0.02, "t_ph/t_cl = {last} at k̄ = 10");
    // no flagged points on this sweep
    assert!(rows.iter().all(|r| r[3] == "0"));
}

#[test]
fn amplitudes_row_is_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(
        dir.path(),
        &[
            "amplitudes",
            "--k",
            "1.4142136",
            "--L",
            "3.1415927",
            "--n",
            "0",
            "--output",
            "amp.csv",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("amp.csv"));
    assert_eq!(rows.len(), 1);
    let unitarity_idx = header.iter().position(|c| c == "unitarity_sum").unwrap();
    let sum: f64 = rows[0][unitarity_idx].parse().unwrap();
    assert!((sum - 1.0).abs() < 1e-12, "unitarity sum = {sum}");
}

#[test]
fn split_report_emits_channel_peaks_and_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(
        dir.path(),
        &["split-report", "--preset", "fig8", "--t-samples", "401", "--output", "fig8.json"],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig8.json")).unwrap())
            .unwrap();
    let excited_peak = report["excited"]["peak_t_over_tcl"].as_f64().unwrap();
    let ground_peak = report["ground"]["peak_t_over_tcl"].as_f64().unwrap();
    assert!((excited_peak - (-0.98)).abs() < 0.05);
    assert!((ground_peak - 0.45).abs() < 0.05);
    assert!(report["delay_over_tcl"].as_f64().unwrap() > 1.0);
    assert!(!report["split"].as_bool().unwrap());
    let we = report["excited"]["transmitted_weight"].as_f64().unwrap();
    let wg = report["ground"]["transmitted_weight"].as_f64().unwrap();
    assert!(wg > we, "ground weight {wg} should dominate excited weight {we}");
}

#[test]
fn identical_configs_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = mazer(
            dir.path(),
            &[
                "packet",
                "--preset",
                "fig6a",
                "--t-samples",
                "201",
                "--output",
                name,
            ],
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same config must produce byte-identical CSV");
}

#[test]
fn sidecar_round_trip_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(
        dir.path(),
        &["packet", "--preset", "fig6b", "--t-samples", "201", "--output", "run1.csv"],
    );
    assert!(out.status.success());
    let out = mazer(
        dir.path(),
        &["rerun", "--config", "run1.params.json", "--output", "run2.csv"],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read(dir.path().join("run1.csv")).unwrap();
    let b = std::fs::read(dir.path().join("run2.csv")).unwrap();
    assert_eq!(a, b, "rerun from sidecar must reproduce the artifact");
}

#[test]
fn invalid_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(
        dir.path(),
        &["packet", "--L", "1.0", "--k-bar", "-1", "--sigma", "0.1"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("must be positive"));

    let out = mazer(dir.path(), &["packet", "--preset", "fig6a", "--sigma", "0.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("may not override"));

    let out = mazer(dir.path(), &["packet"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--L is required"));
}

#[test]
fn empty_invocation_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(dir.path(), &[]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "expected usage text, got: {stderr}");
}

#[test]
fn json_format_emits_table_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(
        dir.path(),
        &[
            "amplitudes",
            "--k",
            "2.0",
            "--L",
            "1.0",
            "--format",
            "json",
            "--output",
            "amp.json",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("amp.json")).unwrap())
            .unwrap();
    assert_eq!(doc["columns"][0].as_str(), Some("k"));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn phase_function_preset_fig5_has_negative_ultracold_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = mazer(
        dir.path(),
        &[
            "phase-function",
            "--preset",
            "fig5",
            "--k-min",
            "0.05",
            "--k-max",
            "0.3",
            "--dk",
            "0.005",
            "--output",
            "fig5.csv",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("fig5.csv"));
    assert_eq!(header, ["k", "phi", "phase_function"]);
    let pf = column(&rows, 2);
    assert!(
        pf.windows(2).all(|w| w[1] < w[0]),
        "phase function must decrease across the ultracold segment"
    );
}
