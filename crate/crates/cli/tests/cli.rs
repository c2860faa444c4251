//! End-to-end tests of the `simploscore` binary: artifacts, exit codes,
//! determinism, and config precedence.

use std::path::{Path, PathBuf};
use std::process::Command;

use simploscore_testkit::{write_format0, ScoreSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simploscore"))
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write_midi(dir: &Path, name: &str, spec: &ScoreSpec) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, write_format0(spec)).unwrap();
    path
}

/// Two chords and a closing note: a small but 3-dimensional piece.
fn toy_chords() -> ScoreSpec {
    ScoreSpec::new(480)
        .time_signature(4, 4)
        .note_beats((0, 1), (1, 1), 55, 80)
        .note_beats((0, 1), (1, 1), 60, 80)
        .note_beats((0, 1), (1, 1), 64, 80)
        .note_beats((0, 1), (1, 1), 67, 80)
        .note_beats((1, 1), (1, 1), 60, 80)
        .note_beats((1, 1), (1, 1), 64, 80)
        .note_beats((1, 1), (1, 1), 67, 80)
        .note_beats((2, 1), (1, 1), 65, 80)
}

/// Four quarter-note measures where the second half exactly repeats the
/// first; the theme starts and ends on the same pitch so the repeat's
/// bridge transition is degenerate and χ freezes over measures 2-3.
fn repeated_section() -> ScoreSpec {
    let theme: [[u8; 4]; 2] = [[60, 62, 64, 66], [60, 64, 62, 60]];
    let mut spec = ScoreSpec::new(480).time_signature(4, 4);
    for rep in 0..2u32 {
        for (m, measure) in theme.iter().enumerate() {
            for (b, &pitch) in measure.iter().enumerate() {
                let beat = (rep * 2 + m as u32) * 4 + b as u32;
                spec = spec.note_beats((beat, 1), (1, 1), pitch, 80);
            }
        }
    }
    spec
}

/// Triad-only score whose complex is a pure 2-complex at every measure
/// snapshot; under angle-deficit curvature ΣK = χ exactly.
fn pure_two_score() -> ScoreSpec {
    let mut spec = ScoreSpec::new(480).time_signature(4, 4);
    let chords: [(u32, [u8; 3]); 8] = [
        (0, [60, 64, 67]),
        (1, [60, 67, 72]),
        (2, [64, 67, 72]),
        (4, [60, 64, 72]),
        (8, [72, 76, 79]),
        (9, [60, 76, 79]),
        (12, [64, 76, 79]),
        (16, [67, 76, 79]),
    ];
    for (beat, tri) in chords {
        for p in tri {
            spec = spec.note_beats((beat, 1), (1, 1), p, 80);
        }
    }
    spec
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

#[test]
fn analyze_writes_report_with_topology() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "toy.mid", &toy_chords());
    let out_dir = dir.path().join("out");

    let res = run(&[
        "analyze",
        midi.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--export-matrices",
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert!(res.stdout.contains("chi="), "stdout: {}", res.stdout);

    let report = read_json(&out_dir.join("toy.analysis.json"));
    // the four-note chord makes the complex 3-dimensional
    assert_eq!(report["dimension"], serde_json::json!(3));
    let topo = &report["topology"];
    assert_eq!(topo["simplex_counts"][0], serde_json::json!(5));
    assert_eq!(topo["betti"], topo["betti_spectral"]);
    assert!(topo["euler"].is_i64());
    assert_eq!(report["meter"]["beats_per_measure"], serde_json::json!("4"));

    // csv side products
    assert!(out_dir.join("toy.notes.csv").exists());
    assert!(out_dir.join("toy.curvature.csv").exists());
    assert!(out_dir.join("toy.B1.csv").exists());
    assert!(out_dir.join("toy.B2.csv").exists());
    assert!(out_dir.join("toy.B3.csv").exists());
}

#[test]
fn analyze_empty_piece_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "empty.mid", &ScoreSpec::new(480).time_signature(4, 4));
    let res = run(&["analyze", midi.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.code, 1);
    assert!(res.stderr.contains("empty piece"), "stderr: {}", res.stderr);
}

#[test]
fn analyze_malformed_file_exits_1_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.mid");
    std::fs::write(&path, b"this is not midi at all").unwrap();
    let res = run(&["analyze", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.code, 1);
    assert!(
        res.stderr.contains("MThd") || res.stderr.contains("byte"),
        "stderr: {}",
        res.stderr
    );
}

#[test]
fn evolve_cumulative_shows_plateau_rows() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "repeat.mid", &repeated_section());
    let out_dir = dir.path().join("out");
    let res = run(&[
        "evolve",
        midi.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "csv,json,svg",
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert!(res.stdout.contains("plateaus=[2..3]"), "stdout: {}", res.stdout);

    let csv = std::fs::read_to_string(out_dir.join("repeat.evolution.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 5); // header + 4 measures
    let euler_col = rows[0].split(',').position(|h| h == "euler").unwrap();
    let euler: Vec<&str> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(euler_col).unwrap())
        .collect();
    assert_ne!(euler[0], euler[1], "first theme measures must change χ");
    assert_eq!(euler[1], euler[2], "repeat must freeze χ");
    assert_eq!(euler[2], euler[3], "repeat must freeze χ");
    assert!(out_dir.join("repeat.evolution.svg").exists());
    assert!(out_dir.join("repeat.evolution.json").exists());
}

#[test]
fn evolve_sliding_full_width_matches_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "toy.mid", &toy_chords());
    let out_dir = dir.path().join("out");

    let res = run(&[
        "evolve",
        midi.to_str().unwrap(),
        "--mode",
        "sliding",
        "--window",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let series = read_json(&out_dir.join("toy.evolution.json"));
    assert_eq!(series["steps"].as_array().unwrap().len(), 1);

    let res = run(&[
        "analyze",
        midi.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0);
    let report = read_json(&out_dir.join("toy.analysis.json"));
    assert_eq!(
        series["steps"][0]["simplex_counts"],
        report["topology"]["simplex_counts"]
    );
    assert_eq!(series["steps"][0]["betti"], report["topology"]["betti"]);
    assert_eq!(series["steps"][0]["euler"], report["topology"]["euler"]);
}

#[test]
fn evolve_invalid_window_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "toy.mid", &toy_chords());
    let res = run(&[
        "evolve",
        midi.to_str().unwrap(),
        "--mode",
        "sliding",
        "--window",
        "0",
    ]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);

    let res = run(&[
        "evolve",
        midi.to_str().unwrap(),
        "--mode",
        "sliding",
        "--window",
        "99",
    ]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
    assert!(res.stderr.contains("exceeds"), "stderr: {}", res.stderr);
}

#[test]
fn evolve_outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "toy.mid", &toy_chords());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let res = run(&[
            "evolve",
            midi.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--format",
            "csv,json,svg",
        ]);
        assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    }
    for artifact in ["toy.evolution.csv", "toy.evolution.json", "toy.evolution.svg"] {
        let a = std::fs::read(out_a.join(artifact)).unwrap();
        let b = std::fs::read(out_b.join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between runs");
    }
}

#[test]
fn fit_linear_series_recovers_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("series.csv");
    let mut csv = String::from("t_norm,euler_norm\n");
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        csv.push_str(&format!("{t},{}\n", -1.05 * t + 0.96));
    }
    std::fs::write(&csv_path, csv).unwrap();

    let out_dir = dir.path().join("out");
    let res = run(&[
        "fit",
        csv_path.to_str().unwrap(),
        "--model",
        "linear",
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "json,svg",
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let report = read_json(&out_dir.join("series.fit.json"));
    let params = report["fit"]["params"].as_array().unwrap();
    assert!((params[0].as_f64().unwrap() + 1.05).abs() < 1e-9);
    assert!((params[1].as_f64().unwrap() - 0.96).abs() < 1e-9);
    assert!((report["fit"]["r_squared"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(out_dir.join("series.fit.svg").exists());
}

#[test]
fn fit_quartic_recovers_reported_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("quartic.csv");
    let truth = [-12.87, 22.68, -10.56, -0.36, 1.02];
    let mut csv = String::from("t_norm,euler_norm\n");
    for i in 0..=100 {
        let t = i as f64 / 100.0;
        let y = truth.iter().fold(0.0, |acc, &c| acc * t + c);
        csv.push_str(&format!("{t},{y}\n"));
    }
    std::fs::write(&csv_path, csv).unwrap();

    let out_dir = dir.path().join("out");
    let res = run(&[
        "fit",
        csv_path.to_str().unwrap(),
        "--model",
        "poly:4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let report = read_json(&out_dir.join("quartic.fit.json"));
    let params = report["fit"]["params"].as_array().unwrap();
    for (got, want) in params.iter().zip(truth) {
        assert!(
            (got.as_f64().unwrap() - want).abs() < 1e-6 * want.abs().max(1.0),
            "{got} vs {want}"
        );
    }
}

#[test]
fn fit_exponential_series() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("exp.csv");
    let mut csv = String::from("t_norm,euler_norm\n");
    for i in 0..=60 {
        let t = i as f64 / 60.0;
        csv.push_str(&format!("{t},{}\n", (-2.44 * t).exp()));
    }
    std::fs::write(&csv_path, csv).unwrap();

    let out_dir = dir.path().join("out");
    let res = run(&[
        "fit",
        csv_path.to_str().unwrap(),
        "--model",
        "exp",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let report = read_json(&out_dir.join("exp.fit.json"));
    let alpha = report["fit"]["params"][1].as_f64().unwrap();
    assert!((alpha + 2.44).abs() < 1e-6, "alpha = {alpha}");
}

#[test]
fn fit_missing_column_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("series.csv");
    std::fs::write(&csv_path, "step,euler\n0,1\n1,2\n2,3\n").unwrap();
    let res = run(&["fit", csv_path.to_str().unwrap()]);
    assert_eq!(res.code, 1);
    assert!(
        res.stderr.contains("missing column `t_norm`"),
        "stderr: {}",
        res.stderr
    );
}

#[test]
fn gauss_bonnet_pure_two_complex_has_unit_slope() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "pure2.mid", &pure_two_score());
    let out_dir = dir.path().join("out");
    let res = run(&[
        "gauss-bonnet",
        midi.to_str().unwrap(),
        "--curvature",
        "angle_deficit",
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "csv,json,svg",
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let report = read_json(&out_dir.join("pure2.gauss_bonnet.json"));
    assert_eq!(report["series"]["slope"], serde_json::json!(1.0));
    assert_eq!(report["series"]["intercept"], serde_json::json!(0.0));
    assert_eq!(report["series"]["degenerate"], serde_json::json!(false));
    assert!(out_dir.join("pure2.gauss_bonnet.svg").exists());
    assert!(res.stdout.contains("ratio_alpha_slope_over_2pi"));
}

#[test]
fn gauss_bonnet_constant_euler_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    // four measures of the same lone note: χ stays 1
    let mut spec = ScoreSpec::new(480).time_signature(4, 4);
    for m in 0..4u32 {
        spec = spec.note_beats((4 * m, 1), (1, 1), 60, 80);
    }
    let midi = write_midi(dir.path(), "const.mid", &spec);
    let out_dir = dir.path().join("out");
    let res = run(&[
        "gauss-bonnet",
        midi.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert!(res.stdout.contains("slope undefined"), "stdout: {}", res.stdout);
    let report = read_json(&out_dir.join("const.gauss_bonnet.json"));
    assert_eq!(report["series"]["degenerate"], serde_json::json!(true));
    assert_eq!(report["series"]["slope"], serde_json::Value::Null);
}

#[test]
fn plot_renders_selected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("series.csv");
    std::fs::write(
        &csv_path,
        "t_norm,euler_norm,sumKv\n0,1,0\n0.5,0.5,-3\n1,0.25,-7\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let res = run(&[
        "plot",
        csv_path.to_str().unwrap(),
        "--y-cols",
        "euler_norm,sumKv",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let svg = std::fs::read_to_string(out_dir.join("series.plot.svg")).unwrap();
    assert!(svg.contains("euler_norm"));
    assert!(svg.contains("sumKv"));
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "toy.mid", &toy_chords());
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "format = \"csv\"\n").unwrap();

    let out_a = dir.path().join("a");
    let res = run(&[
        "evolve",
        midi.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert!(out_a.join("toy.evolution.csv").exists());
    assert!(!out_a.join("toy.evolution.json").exists());

    let out_b = dir.path().join("b");
    let res = run(&[
        "evolve",
        midi.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert!(!out_b.join("toy.evolution.csv").exists());
    assert!(out_b.join("toy.evolution.json").exists());
}

#[test]
fn batch_mode_processes_all_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_midi(dir.path(), "a.mid", &toy_chords());
    let b = write_midi(dir.path(), "b.mid", &repeated_section());
    let bad = dir.path().join("c.mid");
    std::fs::write(&bad, b"garbage").unwrap();

    let out_dir = dir.path().join("out");
    let res = run(&[
        "analyze",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        bad.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    // the bad file degrades the exit code but good files still produce output
    assert_eq!(res.code, 1);
    assert!(out_dir.join("a.analysis.json").exists());
    assert!(out_dir.join("b.analysis.json").exists());
    assert_eq!(res.stdout.lines().count(), 2);
}

#[test]
fn colliding_input_stems_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("sub");
    std::fs::create_dir_all(&sub).unwrap();
    let a = write_midi(dir.path(), "x.mid", &toy_chords());
    let b = write_midi(&sub, "x.mid", &toy_chords());
    let res = run(&["analyze", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(res.code, 2);
    assert!(res.stderr.contains("collide"), "stderr: {}", res.stderr);
}

#[test]
fn unknown_flag_value_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let midi = write_midi(dir.path(), "toy.mid", &toy_chords());
    for args in [
        vec!["evolve", midi.to_str().unwrap(), "--mode", "backwards"],
        vec!["analyze", midi.to_str().unwrap(), "--curvature", "ollivier"],
        vec!["analyze", midi.to_str().unwrap(), "--epsilon-beats", "abc"],
        vec!["analyze", midi.to_str().unwrap(), "--format", "yaml"],
    ] {
        let res = run(&args);
        assert_eq!(res.code, 2, "args {args:?}, stderr: {}", res.stderr);
    }
}
