use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use specdens_cli::ingest_csv;
use specdens_cli::io::parse_table;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_specdens"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_category(out: &Output) -> String {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("JSON error line");
    let v: Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["schema_version"], 1);
    v["error"]["category"].as_str().unwrap().to_owned()
}

fn tmp() -> (tempfile::TempDir, PathBuf) {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_path_buf();
    (d, p)
}

#[test]
fn presets_cover_the_registry() {
    let (_d, dir) = tmp();
    let text = ok(&dir, &["presets"]);
    for nm in [530, 580, 630, 680, 730, 780] {
        assert!(text.contains(&format!("rhodopsin-{nm}nm")), "{nm}");
    }
    assert!(text.contains("model: subohmic omega_c=7.926 rad/ps s=0.489"));
    let doc: Value = serde_json::from_str(&ok(&dir, &["presets", "--json"])).unwrap();
    assert_eq!(doc["schema_version"], 1);
    let all = doc["presets"].as_array().unwrap();
    assert_eq!(all.len(), 15);
    assert!(all.iter().all(|p| !p["provenance"].as_str().unwrap().is_empty()));
}

#[test]
fn synth_is_deterministic_and_exact() {
    let (_d, dir) = tmp();
    let args = [
        "synth",
        "--preset",
        "coumarin343-subohmic",
        "--tmax-ps",
        "3",
        "--npoints",
        "50",
        "--noise",
        "0.01",
        "--seed",
        "7",
    ];
    let a = ok(&dir, &args);
    let b = ok(&dir, &args);
    assert_eq!(a, b);
    assert!(a.starts_with("t_ps,S,sigma\n"));
    let c = ok(
        &dir,
        &[
            "synth",
            "--preset",
            "coumarin343-subohmic",
            "--tmax-ps",
            "3",
            "--npoints",
            "50",
            "--noise",
            "0.01",
            "--seed",
            "8",
        ],
    );
    assert_ne!(a, c);

    ok(
        &dir,
        &[
            "synth",
            "--model",
            "subohmic",
            "--omega-c",
            "6.25846",
            "--s",
            "0.785158",
            "--tmax-ps",
            "3",
            "--npoints",
            "7",
            "--output",
            "clean.csv",
        ],
    );
    let data = ingest_csv(&dir.join("clean.csv")).unwrap();
    let p = specdens::SubOhmicParams::shape_only(6.25846, 0.785158).unwrap();
    for (&t, &v) in data.times().iter().zip(data.values()) {
        assert_eq!(v, p.stokes(t).unwrap());
    }
}

#[test]
fn fit_recovers_synthetic_parameters() {
    let (_d, dir) = tmp();
    ok(&dir, &["synth", "--preset", "rhodopsin-580nm", "--tmax-ps", "2", "--npoints", "200", "--output", "r.csv"]);
    ok(&dir, &["fit", "--input", "r.csv", "--model", "subohmic", "--output", "fit.json"]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("fit.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["model"], "subohmic");
    assert_eq!(doc["converged"], true);
    let wc = doc["params"]["omega_c"].as_f64().unwrap();
    let s = doc["params"]["s"].as_f64().unwrap();
    assert!((wc / 17.878 - 1.0).abs() < 1e-6 && (s / 0.554 - 1.0).abs() < 1e-6, "{wc} {s}");
    for key in ["uncertainties", "residual_rms", "window", "diagnostics"] {
        assert!(doc.get(key).is_some(), "{key}");
    }
    let again = ok(&dir, &["fit", "--input", "r.csv", "--model", "subohmic"]);
    assert_eq!(again, std::fs::read_to_string(dir.join("fit.json")).unwrap());
}

#[test]
fn baseline_preset_fit() {
    let (_d, dir) = tmp();
    ok(
        &dir,
        &[
            "synth",
            "--preset",
            "mplum-ph7",
            "--b0",
            "0.5",
            "--tmax-ps",
            "0.15",
            "--npoints",
            "200",
            "--output",
            "m.csv",
        ],
    );
    let text = ok(&dir, &["fit", "--input", "m.csv", "--model", "subohmic-baseline"]);
    let doc: Value = serde_json::from_str(&text).unwrap();
    let b0 = doc["params"]["b0"].as_f64().unwrap();
    assert!((b0 - 0.5).abs() < 1e-6, "{b0}");
}

#[test]
fn huang_rhys_classification() {
    let (_d, dir) = tmp();
    let text = ok(&dir, &["hr", "--model", "subohmic", "--omega-c", "5", "--s", "0.5"]);
    assert!(text.starts_with("infrared-divergent"), "{text}");
    let doc: Value =
        serde_json::from_str(&ok(&dir, &["hr", "--model", "subohmic", "--omega-c", "2", "--s", "2", "--json"]))
            .unwrap();
    assert_eq!(doc["classification"], "finite");
    // 2 δ_s Γ(1) (ω_c/ω_ph)
    assert!((doc["value"].as_f64().unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn invert_forward_round_trip_and_reingest() {
    let (_d, dir) = tmp();
    ok(
        &dir,
        &["synth", "--preset", "coumarin343-subohmic", "--tmax-ps", "3.2", "--npoints", "3000", "--output", "s.csv"],
    );
    ok(
        &dir,
        &[
            "invert",
            "--input",
            "s.csv",
            "--lambda",
            "2",
            "--tail",
            "algebraic",
            "--omega-min",
            "0.01",
            "--omega-max",
            "200",
            "--omega-points",
            "2000",
            "--omega-spacing",
            "linear",
            "--output",
            "k.csv",
        ],
    );
    let k = std::fs::read_to_string(dir.join("k.csv")).unwrap();
    let table = parse_table(&k).unwrap();
    assert_eq!(table.header, ["omega_radps", "K", "J"]);
    assert_eq!(table.rows.len(), 2000);

    ok(&dir, &["forward", "--input", "k.csv", "--tmax-ps", "3", "--npoints", "31", "--output", "f.csv"]);
    let back = ingest_csv(&dir.join("f.csv")).unwrap();
    let p = specdens::SubOhmicParams::shape_only(6.25846, 0.785158).unwrap();
    for (&t, &v) in back.times().iter().zip(back.values()) {
        assert!((v - p.stokes(t).unwrap()).abs() < 0.02, "t={t}: {v}");
    }

    ok(&dir, &["forward", "--preset", "coumarin343-gb", "--tmax-ps", "1", "--npoints", "11", "--output", "g.csv"]);
    assert!(ingest_csv(&dir.join("g.csv")).is_ok());
}

#[test]
fn lineshape_and_spectrum_outputs() {
    let (_d, dir) = tmp();
    let g = ok(
        &dir,
        &[
            "lineshape",
            "--preset",
            "rhodopsin-630nm",
            "--delta-s",
            "0.3",
            "--temperature-K",
            "300",
            "--tmax-ps",
            "1",
            "--npoints",
            "11",
        ],
    );
    let table = parse_table(&g).unwrap();
    assert_eq!(table.header, ["t_ps", "re_g", "im_g"]);
    assert_eq!(table.rows[0].1, vec![Some(0.0), Some(0.0), Some(0.0)]);
    let spec = ok(
        &dir,
        &["spectrum", "--preset", "rhodopsin-630nm", "--delta-s", "0.3", "--temperature-K", "300", "--tmax-ps", "2"],
    );
    let table = parse_table(&spec).unwrap();
    assert_eq!(table.header, ["omega_radps", "intensity"]);
    let peak = table.rows.iter().map(|(_, r)| r[1].unwrap()).fold(f64::MIN, f64::max);
    assert_eq!(peak, 1.0);

    let out = run(
        &dir,
        &[
            "spectrum",
            "--preset",
            "rhodopsin-630nm",
            "--delta-s",
            "0.001",
            "--temperature-K",
            "300",
            "--tmax-ps",
            "0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error_category(&out), "numerical");
}

#[test]
fn usage_errors() {
    let (_d, dir) = tmp();
    std::fs::write(dir.join("d.csv"), "t_ps,S\n0,1\n1,0.5\n2,0.2\n").unwrap();
    for args in [
        vec!["invert", "--input", "d.csv"],
        vec!["invert", "--input", "d.csv", "--lambda", "1", "--lambda-arb"],
        vec!["fit", "--input", "d.csv", "--bogus"],
        vec!["synth", "--preset", "mrfp", "--omega-c", "2", "--tmax-ps", "1"],
        vec!["synth", "--model", "subohmic", "--omega-c", "2", "--tmax-ps", "1"],
        vec!["nonsense"],
    ] {
        let out = run(&dir, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_category(&out), "usage", "{args:?}");
    }
}

#[test]
fn lookup_and_input_errors() {
    let (_d, dir) = tmp();
    let out = run(&dir, &["synth", "--preset", "nope", "--tmax-ps", "1"]);
    assert_eq!(out.status.code(), Some(7));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("rhodopsin-530nm"));

    std::fs::write(dir.join("z.csv"), "t_ps,S,sigma\n0,1,0\n1,0.5,0\n").unwrap();
    let out = run(&dir, &["fit", "--input", "z.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_category(&out), "input");

    std::fs::write(dir.join("bad.csv"), "t_ps,S\n0,1\n0.5,x\n").unwrap();
    let out = run(&dir, &["fit", "--input", "bad.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn compare_ranks_models() {
    let (_d, dir) = tmp();
    ok(&dir, &["synth", "--preset", "coumarin343-gb", "--tmax-ps", "3", "--npoints", "200", "--output", "c.csv"]);
    let doc: Value = serde_json::from_str(&ok(&dir, &["compare", "--input", "c.csv"])).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["best"], "gauss-biexp");
    assert_eq!(doc["entries"].as_array().unwrap().len(), 2);
}
