use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pstloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pstloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = pstloc(args);
    assert!(
        out.status.success(),
        "pstloc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn couplings_n4() {
    let csv = ok(&["couplings", "--N", "4", "--stdout", "-q"]);
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "i,coupling");
    let rows = data_rows(&csv);
    let expected = [(1, 0.75f64.sqrt()), (2, 1.0), (3, 0.75f64.sqrt())];
    assert_eq!(rows.len(), 3);
    for (row, (i, j)) in rows.iter().zip(expected) {
        assert_eq!(row[0], i.to_string());
        assert!((row[1].parse::<f64>().unwrap() - j).abs() < 1e-15);
    }
    assert!(csv.starts_with("# couplings N=4 law=pst; manifest: {"));
}

#[test]
fn unperturbed_fidelity_surface_is_perfect() {
    let csv = ok(&[
        "fidelity-surface",
        "--N",
        "50",
        "--E",
        "0.0",
        "--seed",
        "1",
        "--stdout",
        "-q",
    ]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    let f_tm: f64 = rows[0][2].parse().unwrap();
    let f_max: f64 = rows[0][4].parse().unwrap();
    assert!((f_tm - 1.0).abs() < 1e-9, "{f_tm}");
    assert!((f_max - 1.0).abs() < 1e-9, "{f_max}");
    assert!((rows[0][7].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn column_count_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "eigen-report",
        "--N",
        "20",
        "--E",
        "1",
        "--seed",
        "3",
        "--realizations",
        "4",
        "--out",
        out,
        "-q",
    ]);
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let text = read(&path);
            let width = text
                .lines()
                .find(|l| !l.starts_with('#'))
                .unwrap()
                .split(',')
                .count();
            assert!(
                data_rows(&text).iter().all(|r| r.len() == width),
                "{}",
                path.display()
            );
        }
    }
}

#[test]
fn reruns_and_worker_counts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |sub: &str, workers: &str| {
        vec![
            "steady-state".to_string(),
            "--N".into(),
            "30".into(),
            "--E".into(),
            "0.5,1.5".into(),
            "--seed".into(),
            "11".into(),
            "--realizations".into(),
            "12".into(),
            "--workers".into(),
            workers.into(),
            "--out".into(),
            dir.path().join(sub).to_str().unwrap().into(),
            "-q".into(),
        ]
    };
    for (sub, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let a = args(sub, workers);
        ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
    }
    for file in [
        "steady_state_N30_E0.5.csv",
        "steady_state_single_N30_E1.5.csv",
        "manifest.json",
    ] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        assert_eq!(
            a,
            fs::read(dir.path().join("b").join(file)).unwrap(),
            "{file}"
        );
        assert_eq!(
            a,
            fs::read(dir.path().join("c").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn negative_strength_names_e() {
    let out = pstloc(&["steady-state", "--N", "10", "--E", "-0.1", "--seed", "1"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("`E`"), "{err}");
}

#[test]
fn config_errors_are_single_line_and_named() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("N = 1\nE = 0.5\nseed = 1\n", "`N`"),
        ("N = 10\nE = 0.5\n", "`master_seed`"),
        ("N = 10\nE = 0.5\nseed = 1\ncolour = 3\n", "`colour`"),
        (
            "N = 10\nE = 0.5\nseed = 1\nn_realizations = \"many\"\n",
            "`n_realizations`",
        ),
    ];
    for (k, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("c{k}.toml"));
        fs::write(&path, text).unwrap();
        let out = pstloc(&["steady-state", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.contains(field), "{err}");
    }
    let out = pstloc(&["steady-state", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "N = 20\nE = 1.0\ninjection = \"end\"\nseed = 42\nn_realizations = 100\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&[
        "steady-state",
        "--config",
        cfg.to_str().unwrap(),
        "--realizations",
        "10",
        "--out",
        out.to_str().unwrap(),
        "-q",
    ]);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["n_realizations"], 10);
    assert_eq!(manifest["master_seed"], 42);
    assert!(read(&out.join("steady_state_N20_E1.csv")).contains("realizations=10"));
}

#[test]
fn manifest_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    ok(&[
        "delta-fit",
        "--N",
        "40",
        "--E",
        "0.3",
        "--J-max",
        "0.7",
        "--seed",
        "5",
        "--realizations",
        "6",
        "--injection",
        "centre",
        "--fit-range",
        "2,8",
        "--out",
        first.to_str().unwrap(),
        "-q",
    ]);
    let manifest = first.join("manifest.json");
    ok(&[
        "delta-fit",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
        "-q",
    ]);
    for file in ["delta_fit.csv", "manifest.json"] {
        assert_eq!(read(&first.join(file)), read(&second.join(file)), "{file}");
    }
    let value: serde_json::Value = serde_json::from_str(&read(&manifest)).unwrap();
    for key in [
        "chain",
        "E",
        "n_realizations",
        "master_seed",
        "rng_algorithm",
        "code_version",
    ] {
        assert!(value.get(key).is_some(), "{key}");
    }
}

#[test]
fn evolve_conserves_probability() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "evolve",
        "--N",
        "8",
        "--E",
        "0.3",
        "--seed",
        "2",
        "--samples",
        "5",
        "--out",
        out,
        "-q",
    ]);
    let rows = data_rows(&read(&dir.path().join("evolve_N8_E0.3.csv")));
    assert_eq!(rows.len(), 5 * 8);
    for block in rows.chunks(8) {
        let total: f64 = block.iter().map(|r| r[3].parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    let fid = data_rows(&read(&dir.path().join("evolve_fidelity_N8_E0.3.csv")));
    assert_eq!(fid[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(fid[4][1].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn stdout_needs_a_single_table() {
    let out = pstloc(&[
        "evolve", "--N", "8", "--E", "0.3", "--seed", "2", "--stdout", "-q",
    ]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}
