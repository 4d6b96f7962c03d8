use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lindblad"))
}

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(format!("{name}.json"))
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn block_shapes(r: &serde_json::Value) -> Vec<(u64, u64)> {
    r["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| (b["n"].as_u64().unwrap(), b["m"].as_u64().unwrap()))
        .collect()
}

/// Parses the `[i,j]  value` lines that follow `header`.
fn entries_after(text: &str, header: &str) -> Vec<(usize, usize, String)> {
    text.split(header)
        .nth(1)
        .unwrap()
        .lines()
        .skip(1)
        .take_while(|l| l.starts_with("  ["))
        .map(|l| {
            let (idx, v) = l.trim().split_once("  ").unwrap();
            let (i, j) = idx.trim_matches(|c| c == '[' || c == ']').split_once(',').unwrap();
            (i.parse().unwrap(), j.parse().unwrap(), v.trim().to_string())
        })
        .collect()
}

#[test]
fn analyze_two_qubit() {
    let r = json(&run(&["analyze", &model("two_qubit")]));
    assert_eq!(r["steady_dim"], 4);
    assert!(r["dissipation_gap"].as_f64().unwrap() > 0.0);
    assert_eq!(block_shapes(&r), vec![(2, 1)]);
    assert!(r["residuals"].as_array().unwrap().iter().all(|x| x["pass"] == true));
    assert_eq!(r["model"]["hash"].as_str().unwrap().len(), 64);
}

#[test]
fn analyze_dephasing() {
    let r = json(&run(&["analyze", &model("dephasing")]));
    assert_eq!(r["steady_dim"], 2);
    assert_eq!(block_shapes(&r), vec![(1, 1), (1, 1)]);
}

#[test]
fn analyze_with_state_reports_coefficients() {
    let r = json(&run(&["analyze", &model("two_qubit"), "--state", "ket(00)"]));
    let table = r["coefficients"]["table"].as_array().unwrap();
    assert_eq!(table.len(), 4);
    let total: f64 = table.iter().map(|c| c["re"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn malformed_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "spaces": [{"kind": "qubit"}], "jump_operators": ["Z1 *"]}"#).unwrap();
    let o = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("jump_operators[0]") && err.contains("column 5"), "{err}");

    std::fs::write(&bad, "{").unwrap();
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "no/such/model.json"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_stable() {
    let a = run(&["analyze", &model("driven_two_qubit")]);
    let b = run(&["analyze", &model("driven_two_qubit")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn batch_mode_keeps_path_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("all.json");
    let pattern = format!("{}/*.json", PathBuf::from(model("dephasing")).parent().unwrap().display());
    let o = run(&["analyze", "--models", &pattern, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let all: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let sources: Vec<&str> = all.as_array().unwrap().iter().map(|r| r["model"]["source"].as_str().unwrap()).collect();
    let mut sorted = sources.clone();
    sorted.sort();
    assert_eq!(sources, sorted);
    assert!(sources.len() >= 5);

    // a single analysis of the same file agrees with its batch entry
    let single = json(&run(&["analyze", sources[0]]));
    assert_eq!(single, all[0]);
}

fn csv_rows(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im"));
    lines
        .map(|l| {
            let (re, im) = l.split_once(',').unwrap();
            (re.parse().unwrap(), im.parse().unwrap())
        })
        .collect()
}

fn assert_multiset(got: &[(f64, f64)], want: &[(f64, f64)]) {
    assert_eq!(got.len(), want.len());
    let mut used = vec![false; got.len()];
    for w in want {
        let k = (0..got.len())
            .find(|&k| !used[k] && (got[k].0 - w.0).abs() < 1e-9 && (got[k].1 - w.1).abs() < 1e-9)
            .unwrap_or_else(|| panic!("{w:?} missing from {got:?}"));
        used[k] = true;
    }
}

#[test]
fn spectrum_csv() {
    let o = run(&["spectrum", &model("dephasing")]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    assert_multiset(&rows, &[(0.0, 0.0), (0.0, 0.0), (-4.0, 0.0), (-4.0, 0.0)]);
    // 17 significant digits
    assert!(stdout(&o).lines().nth(1).unwrap().split(',').all(|f| f.split('e').next().unwrap().replace(['-', '.'], "").len() == 17));

    let o = run(&["spectrum", &model("qubit_precession")]);
    assert_multiset(&csv_rows(&stdout(&o)), &[(0.0, 0.0), (0.0, 0.0), (0.0, 2.0), (0.0, -2.0)]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = run(&["spectrum", &model("two_photon"), "--csv", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 400);
    assert!(rows.iter().all(|r| r.0 <= 1e-9));
}

#[test]
fn predict_examples() {
    let o = run(&["predict", &model("two_qubit"), "--state", "ket(00)"]);
    assert_eq!(entries_after(&stdout(&o), "rho_ss"), vec![(1, 1, "1".to_string())]);

    let o = run(&["predict", &model("dephasing"), "--state", "ket(0)"]);
    assert_eq!(entries_after(&stdout(&o), "rho_ss"), vec![(0, 0, "1".to_string())]);

    let o = run(&["predict", &model("two_photon"), "--state", "coherent(1,0)"]);
    let e = entries_after(&stdout(&o), "rho_ss");
    let get = |i: usize, j: usize| -> f64 {
        e.iter().find(|x| x.0 == i && x.1 == j).unwrap().2.parse().unwrap()
    };
    let r00 = 0.5 * (1.0 + (-2.0f64).exp());
    // e^{-1} I_0(1)
    let r01 = (-1.0f64).exp() * 1.2660658777520082;
    assert!((get(0, 0) - r00).abs() < 1e-6);
    assert!((get(0, 1) - r01).abs() < 1e-6);
    assert!((get(1, 1) - (1.0 - r00)).abs() < 1e-6);
}

#[test]
fn predict_rejects_bad_states() {
    for state in ["ket(2)", "ket(0,0)", "coherent(1,0)", "psi", "ket(x)"] {
        let o = run(&["predict", &model("dephasing"), "--state", state]);
        assert_eq!(o.status.code(), Some(2), "{state}");
    }
}

#[test]
fn predict_with_matrix_file_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.json");
    // |+><+| on the first qubit, |0><0| on the second
    std::fs::write(
        &path,
        "[[0.5, 0, 0.5, 0], [0, 0, 0, 0], [0.5, 0, 0.5, 0], [0, 0, 0, 0]]",
    )
    .unwrap();
    let o = run(&["predict", &model("detuned_two_qubit"), "--state", path.to_str().unwrap(), "--time", "1.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rho_inf(t = 1.5)"));
}

#[test]
fn verify_examples() {
    let cases = [
        ("dephasing", "ket(1)"),
        ("two_qubit", "ket(00)"),
        ("driven_two_qubit", "ket(10)"),
        ("two_photon", "coherent(1,0.5)"),
        ("d_photon_3", "coherent(0.8,0)"),
        ("detuned_two_qubit", "ket(11)"),
    ];
    for (m, state) in cases {
        let o = run(&["verify", &model(m), "--state", state, "--tol", "1e-6"]);
        assert_eq!(o.status.code(), Some(0), "{m}: {}", stdout(&o));
        assert!(stdout(&o).contains("PASS"));
    }
    let o = run(&["verify", &model("two_qubit"), "--state", "ket(00)", "--t-final", "0.01", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));

    // ket(01) is already steady
    let o = run(&["verify", &model("two_qubit"), "--state", "ket(01)", "--t-final", "0.01", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn structure_examples() {
    let o = run(&["structure", &model("driven_two_qubit")]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.split_whitespace().collect::<Vec<_>>()[..3] == ["0", "2", "2"]), "{text}");
    assert!(text.contains("0.666667  0.333333i"), "{text}");
    assert!(text.contains("-0.333333i  0.333333"), "{text}");

    let o = run(&["structure", &model("d_photon_3")]);
    let text = stdout(&o);
    assert!(text.contains("D = 9"));
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| l.contains('[') && l.trim_start().starts_with(char::is_numeric))
        .collect();
    assert_eq!(rows.len(), 1, "{text}");
    assert_eq!(rows[0].split_whitespace().take(3).collect::<Vec<_>>(), ["0", "3", "1"]);
}

#[test]
fn symmetries() {
    let o = run(&["symmetries", &model("dephasing")]);
    let text = stdout(&o);
    // Z / sqrt(2) is the traceless generator
    let z = text.split("generator 1:").nth(1).unwrap();
    assert!(z.starts_with(" strong=true"), "{text}");
    assert!(z.contains("[0,0]  0.707107") && z.contains("[1,1]  -0.707107"), "{text}");

    let o = run(&["symmetries", &model("d_photon_3")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn catalog_names_work_as_model_arguments() {
    let r = json(&run(&["analyze", "two_qubit"]));
    assert_eq!(r["steady_dim"], 4);
    let file = json(&run(&["analyze", &model("two_qubit")]));
    assert_eq!(r["model"]["hash"], file["model"]["hash"]);
}

#[test]
fn help_documents_defaults() {
    let o = run(&["analyze", "--help"]);
    let text = stdout(&o);
    for flag in ["--tol", "--interior-margin", "--seed", "--models", "--out"] {
        assert!(text.contains(flag), "{flag}");
    }
    assert!(text.contains("default: 1e-9") || text.contains("default: 0.000000001"), "{text}");
}
