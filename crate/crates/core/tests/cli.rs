use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spindec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spindec"))
        .args(args)
        .current_dir(dir)
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn curve(dir: &Path, name: &str) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    let (t, a) = spindec::cli::read_curve(&text, name).unwrap();
    t.into_iter().zip(a).collect()
}

const SMALL_RUN: &str = r#"
[bath]
radius = "20 A"
seed = 3

[engine]
method = "cce"
order = 2
r_dipole = "8 A"

[time]
t_max = "1 ms"
points = 21

[output]
dir = "out"
prefix = "small"
"#;

#[test]
fn misspelled_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[engine]\nordr = 2\n");
    let out = spindec(dir.path(), &["simulate", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ordr") && err.contains("order"), "stderr: {err}");
}

#[test]
fn bad_unit_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[field]\nb = [\"0 G\", \"0 G\", \"5 ms\"]\n");
    let out = spindec(dir.path(), &["simulate", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_stamped() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", SMALL_RUN);
    let a = spindec(dir.path(), &["simulate", "--config", "run.toml"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = std::fs::read(dir.path().join("out/small.csv")).unwrap();
    let b = spindec(dir.path(), &["simulate", "--config", "run.toml", "--set", "output.prefix=again"]);
    assert!(b.status.success());
    let second = std::fs::read_to_string(dir.path().join("out/again.csv")).unwrap();
    let first = String::from_utf8(first).unwrap();
    let body = |s: &str| s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&first), body(&second));
    assert!(first.contains("# seed = "));
    assert!(first.contains("#   [engine]"));
    let summary = json(dir.path(), "out/small.json");
    assert_eq!(summary["provenance"]["command"], "simulate");
}

#[test]
fn generate_then_simulate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", SMALL_RUN);
    let g = spindec(dir.path(), &["generate", "--config", "run.toml"]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let s = spindec(dir.path(), &["simulate", "--config", "run.toml"]);
    assert!(s.status.success());
    let f = spindec(
        dir.path(),
        &[
            "simulate",
            "--config",
            "run.toml",
            "--set",
            "bath.source=\"file\"",
            "--set",
            "bath.file=\"out/small_bath.xyz\"",
            "--set",
            "output.prefix=\"from_file\"",
        ],
    );
    assert!(f.status.success(), "{}", String::from_utf8_lossy(&f.stderr));
    let a = curve(dir.path(), "out/small.csv");
    let b = curve(dir.path(), "out/from_file.csv");
    assert_eq!(a.len(), b.len());
    for ((_, x), (_, y)) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn fit_subcommand_reads_curve() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("t_ms,abs_L\n");
    for k in 0..60 {
        let t = 0.05 * k as f64;
        text.push_str(&format!("{t},{}\n", (-(t / 1.3f64).powf(2.5)).exp()));
    }
    write(dir.path(), "c.csv", &text);
    let out = spindec(dir.path(), &["fit", "c.csv"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["t2"].as_f64().unwrap() - 1.3).abs() < 1e-6);
    assert!((v["n"].as_f64().unwrap() - 2.5).abs() < 1e-6);

    write(dir.path(), "flat.csv", "t_ms,abs_L\n0,1\n1,1\n2,0.999\n");
    let flat = spindec(dir.path(), &["fit", "flat.csv"]);
    assert_eq!(flat.status.code(), Some(3));
}

#[test]
fn white_noise_gives_simple_exponential() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "noise.toml",
        r#"
[noise]
model = "white"
s0 = 1.0
sequences = ["ramsey", "hahn", "cpmg-4"]

[time]
t_max = "8 ms"
points = 161
"#,
    );
    let out = spindec(dir.path(), &["noise", "--config", "noise.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.path(), "out/run_noise.json");
    for s in v["sequences"].as_array().unwrap() {
        let n = s["fit"]["n"].as_f64().unwrap();
        assert!((n - 1.0).abs() <= 0.01, "{}: n = {n}", s["sequence"]);
    }
}

#[test]
fn static_noise_ramsey_gaussian_hahn_flat() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "noise.toml",
        r#"
[noise]
model = "static"
variance = 2.0
sequences = ["ramsey", "hahn"]

[time]
t_max = "3 ms"
points = 31
"#,
    );
    let out = spindec(dir.path(), &["noise", "--config", "noise.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for (t, l) in curve(dir.path(), "out/run_noise_ramsey.csv") {
        assert!((l - (-t * t).exp()).abs() < 1e-10, "t = {t}");
    }
    for (_, l) in curve(dir.path(), "out/run_noise_hahn.csv") {
        assert!((l - 1.0).abs() < 1e-12);
    }
}

#[test]
fn tabulated_spectrum_round_trips_lorentzian() {
    let dir = tempfile::tempdir().unwrap();
    let (v, tc) = (1.5f64, 0.4f64);
    let mut table = String::from("omega S\n");
    let n = 20001;
    let w_max = 4000.0;
    for k in 0..n {
        let w = w_max * k as f64 / (n - 1) as f64;
        table.push_str(&format!("{w:?} {:?}\n", 2.0 * v * tc / (1.0 + (w * tc).powi(2))));
    }
    write(dir.path(), "s.dat", &table);
    let common = "[time]\nt_max = \"2 ms\"\npoints = 21\n[noise]\nsequences = [\"ramsey\", \"hahn\"]\n";
    write(
        dir.path(),
        "tab.toml",
        &format!("{common}model = \"tabulated\"\nfile = \"s.dat\"\n[output]\nprefix = \"tab\"\n"),
    );
    write(
        dir.path(),
        "lor.toml",
        &format!("{common}model = \"lorentzian\"\nvariance = {v:?}\ntau_c = \"{tc:?} ms\"\n[output]\nprefix = \"lor\"\n"),
    );
    for cfg in ["tab.toml", "lor.toml"] {
        let out = spindec(dir.path(), &["noise", "--config", cfg]);
        assert!(out.status.success(), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for seq in ["ramsey", "hahn"] {
        let a = curve(dir.path(), &format!("out/tab_noise_{seq}.csv"));
        let b = curve(dir.path(), &format!("out/lor_noise_{seq}.csv"));
        for ((t, x), (_, y)) in a.iter().zip(&b) {
            assert!((x - y).abs() < 2e-3, "{seq} t = {t}: {x} vs {y}");
        }
    }
}

#[test]
fn converge_reports_ensemble_spread() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", SMALL_RUN);
    let out = spindec(
        dir.path(),
        &["converge", "--config", "run.toml", "--set", "converge.realizations=20", "--set", "converge.orders=[1, 2]"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.path(), "out/small_converge.json");
    let e = &v["ensemble"];
    assert_eq!(e["realizations"], 20);
    let (q1, med, q3) = (
        e["t2_q1"].as_f64().unwrap(),
        e["t2_median"].as_f64().unwrap(),
        e["t2_q3"].as_f64().unwrap(),
    );
    assert!(q1 <= med && med <= q3 && q1 > 0.0);
    assert!((e["t2_iqr"].as_f64().unwrap() - (q3 - q1)).abs() < 1e-12);
}

#[test]
fn oracle_compare_small_bath() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", SMALL_RUN);
    write(dir.path(), "three.xyz", "13C 1.2 -0.8 2.5\n13C -2.9 1.7 0.4\n13C 0.6 3.3 -2.2\n");
    let out = spindec(
        dir.path(),
        &[
            "oracle-compare",
            "--config",
            "run.toml",
            "--set",
            "bath.source=\"file\"",
            "--set",
            "bath.file=\"three.xyz\"",
            "--set",
            "engine.method=\"gcce\"",
            "--set",
            "engine.order=3",
            "--set",
            "engine.r_dipole=\"20 A\"",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.path(), "out/small_oracle.json");
    assert!(v["max_abs_delta"].as_f64().unwrap() < 1e-6, "{}", v["max_abs_delta"]);
}

#[test]
fn oracle_compare_refuses_large_bath() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", SMALL_RUN);
    let out = spindec(dir.path(), &["oracle-compare", "--config", "run.toml", "--set", "bath.radius=\"40 A\""]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
