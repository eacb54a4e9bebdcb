use std::process::{Command, Output};

fn piestim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piestim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn parse_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_six_qubits() {
    let out = piestim(&["sweep", "--n", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("r,f_sym,f_prod,f_unknown,f_known\n"));
    assert!(!text.contains('\r'));
    let rows = parse_rows(&text);
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[100], vec![1.0, 0.875, 0.875, 0.875, 0.875]);
    let half = &rows[50];
    assert_eq!(half[0], 0.5);
    assert!((half[1] - 0.6875).abs() < 1e-11);
    assert!((half[3] - 0.791666666667).abs() < 1e-11);
    assert!((half[4] - 0.8625).abs() < 1e-11);
    assert!(half[1] < half[2] && half[2] < half[3]);
    assert!((rows[0][4] - 0.85).abs() < 1e-11);
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "0,0.500000000000,0.500000000000,0.593750000000,0.850000000000"
    );
}

#[test]
fn sweep_is_deterministic_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = piestim(&[
            "sweep",
            "--n",
            "9",
            "--steps",
            "37",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_json_mirrors_csv() {
    let out = piestim(&["sweep", "--n", "4", "--steps", "5", "--format", "json"]);
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 5);
    let keys: Vec<&str> = rows[0]
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.as_str())
        .collect();
    for k in ["r", "f_sym", "f_prod", "f_unknown", "f_known"] {
        assert!(keys.contains(&k));
    }
    assert_eq!(rows[4]["r"], 1.0);
}

#[test]
fn bad_configs_exit_with_one() {
    for args in [
        &["sweep", "--n", "6", "--r-min", "0.5", "--r-max", "0.5"][..],
        &["sweep", "--n", "6", "--steps", "1"],
        &["sweep", "--n", "0"],
        &[
            "optimal-state",
            "--n",
            "1",
            "--r",
            "0.5",
            "--structure",
            "known",
        ],
        &[
            "optimal-state",
            "--n",
            "4",
            "--r",
            "1.5",
            "--structure",
            "unknown",
        ],
        &["shrink", "--n", "3", "--m", "2"],
        &["verify", "--n", "9"],
        &["sweep"],
    ] {
        let out = piestim(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = piestim(&["sweep", "--n", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn optimal_state_tables() {
    let out = piestim(&[
        "optimal-state",
        "--n",
        "6",
        "--r",
        "0.1",
        "--structure",
        "unknown",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# structure=unknown\n"));
    assert!(text.contains("6,3,0.175000000000,antiparallel,1.00000000000\n"));
    assert!(text.contains("2,1,0.825000000000,parallel,1.00000000000\n"));

    let pure = stdout(&piestim(&[
        "optimal-state",
        "--n",
        "6",
        "--r",
        "1",
        "--structure",
        "unknown",
    ]));
    let table: Vec<&str> = pure.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        table,
        [
            "two_j,j,weight,orientation,bloch_length",
            "6,3,1.00000000000,parallel,1.00000000000"
        ]
    );

    let out = piestim(&[
        "optimal-state",
        "--n",
        "5",
        "--r",
        "0.5",
        "--structure",
        "known",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sectors = v["sectors"].as_array().unwrap();
    assert!((sectors[0]["weight"].as_f64().unwrap() - 5.5 / 8.0).abs() < 1e-12);
    assert!((sectors[1]["weight"].as_f64().unwrap() - 2.5 / 8.0).abs() < 1e-12);
    assert_eq!(sectors[1]["j"], "3/2");
    for key in ["weight_sum", "negative_weight", "length_excess", "bloch"] {
        assert!(v["residuals"][key].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn shrink_values() {
    assert_eq!(
        stdout(&piestim(&["shrink", "--n", "1", "--m", "2"])),
        "shrink=0.666666666667\n"
    );
    assert_eq!(
        stdout(&piestim(&["shrink", "--n", "3", "--m", "inf"])),
        "shrink=0.600000000000\nfidelity=0.800000000000\n"
    );
    assert_eq!(
        stdout(&piestim(&["shrink", "--n", "4", "--m", "4"])),
        "shrink=1.00000000000\n"
    );
}

#[test]
fn verify_runs_and_reports() {
    let out = piestim(&["verify", "--n", "4"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS product_fidelity_vs_closed_form"));
    assert!(!text.contains("FAIL"));

    let out = piestim(&["verify", "--n", "2", "--seed", "3", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 3);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn coarse_quadrature_fails_verification() {
    let out = piestim(&["verify", "--n", "4", "--quadrature-order", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
