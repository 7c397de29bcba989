use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratiocut"))
        .args(args)
        .env_remove("RATIOCUT_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn eval_at_origin_is_eight() {
    let o = run(&["eval", "--cut", "0.5,0.5,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!((json(&o)["value"].as_f64().unwrap() - 8.0).abs() < 1e-12);
}

#[test]
fn malformed_input_exits_1() {
    assert_eq!(code(&run(&["eval", "--bogus"])), 1);
    assert_eq!(code(&run(&["eval", "--cut", "0.5,0.5"])), 1);
    assert_eq!(
        code(&run(&["eval", "--sigma", "a9=1", "--cut", "0.5,0.5,0"])),
        1
    );
    assert_eq!(code(&run(&["predict", "--order", "third"])), 1);
}

#[test]
fn arc_leaving_the_domain_exits_2() {
    let o = run(&["eval", "--cut", "0.9,0.9,1.8"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("arc leaves the domain"));
}

#[test]
fn gate_violation_exits_2_unless_extended() {
    let args = ["eval", "--sigma", "eps_t=0.3", "--cut", "0.5,0.5,0"];
    assert_eq!(code(&run(&args)), 2);
    let o = run(&[&["--extend-gate"], &args[..]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn optimize_and_predict_agree_to_second_order() {
    for (sigma, tol) in [("", 1e-9), ("a1=0.1", 50.0 * 0.01)] {
        let opt = json(&run(&["optimize", "--sigma", sigma]));
        let pred = json(&run(&["predict", "--sigma", sigma]));
        let d: f64 = ["q", "p", "theta"]
            .iter()
            .map(|k| (opt["cut"][k].as_f64().unwrap() - pred["cut"][k].as_f64().unwrap()).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(d <= tol, "{sigma}: {d}");
    }
    let origin = json(&run(&["optimize"]));
    assert!((origin["cut"]["q"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn sweep_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(&[
            "--out",
            d.path().to_str().unwrap(),
            "sweep",
            "--spec",
            "a1=-eps_t/5:0:0.05:6",
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), 5);
    assert_eq!(fa, fb);
    let csv =
        String::from_utf8(fa.iter().find(|f| f.0.ends_with(".csv")).unwrap().1.clone()).unwrap();
    assert!(csv.starts_with(
        "param,rc_opt,rc_approx,abs_err,q_opt,p_opt,theta_opt,q_pred,p_pred,theta_pred"
    ));
    let svg = &fa
        .iter()
        .find(|f| f.0.ends_with("_extremal.svg"))
        .unwrap()
        .1;
    assert!(String::from_utf8_lossy(svg).contains("stroke-dasharray"));
}

#[test]
fn sweep_flags_rows_beyond_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "--out",
        out,
        "--format",
        "csv",
        "sweep",
        "--spec",
        "eps_t:-0.5:0:11",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["flagged"], 5);
    let csv = fs::read_to_string(dir.path().join("sweep_eps_t.csv")).unwrap();
    assert_eq!(
        csv.lines().filter(|l| l.contains("out of regime")).count(),
        5
    );
    let o = run(&[
        "--out",
        out,
        "--extend-gate",
        "sweep",
        "--spec",
        "eps_t:-0.5:0:11",
    ]);
    assert_eq!(json(&o)["flagged"], 0);
}

#[test]
fn verify_passes_and_names_tampered_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["--out", out, "verify", "--quick"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("verify.json").exists());

    let o = run(&["--out", out, "verify", "--quick", "--set", "a1*a2:q=5"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("a1*a2"));

    let o = run(&["--out", out, "verify", "--quick", "--printed"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("a2*A_WR"));
}

#[test]
fn iterate_rectangle_stays_straight() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "iterate",
        "--steps",
        "6",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines = fs::read_to_string(dir.path().join("trajectory.jsonl")).unwrap();
    let recs: Vec<Value> = lines
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(recs.len(), 6);
    for r in &recs {
        assert_eq!(r["theta"].as_f64(), Some(0.0));
        for key in [
            "step",
            "sigma",
            "cut",
            "rc_value",
            "iq",
            "aspect",
            "bulge",
            "side",
            "transform",
        ] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
    assert!(dir.path().join("trajectory.svg").exists());
}

#[test]
fn iterate_triangle_fails_at_step_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "iterate",
        "--domain",
        "triangle",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("step 0"));
}

#[test]
fn graphcut_is_seeded_and_near_the_midline() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut reports = Vec::new();
    for d in [&a, &b] {
        let o = run(&[
            "--out",
            d.path().to_str().unwrap(),
            "--seed",
            "4",
            "graphcut",
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        reports.push(json(&o));
    }
    assert_eq!(files(a.path()), files(b.path()));
    let x = reports[0]["interface_x"].as_f64().unwrap();
    assert!((x - 1.0).abs() <= 0.2, "interface at {x}");
    assert_eq!(reports[0]["monotone"], true);
}

#[test]
fn disconnected_graph_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "graphcut",
        "--n",
        "300",
        "--radius",
        "0.01",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not connected"));
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ratiocut.conf");
    fs::write(&cfg, "# widened gate\ngate = 0.5\n").unwrap();
    let args = ["eval", "--sigma", "eps_t=0.3", "--cut", "0.5,0.5,0"];
    let o = run(&[&["--config", cfg.to_str().unwrap()], &args[..]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // a flag overrides the file
    let o = run(&[
        &["--config", cfg.to_str().unwrap(), "--gate", "0.25"],
        &args[..],
    ]
    .concat());
    assert_eq!(code(&o), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_ratiocut"))
        .args(args)
        .env("RATIOCUT_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);

    fs::write(&cfg, "colour = blue\n").unwrap();
    let o = run(&[&["--config", cfg.to_str().unwrap()], &args[..]].concat());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unknown key"));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run(&[
        "--out",
        blocker.to_str().unwrap(),
        "iterate",
        "--steps",
        "1",
    ]);
    assert_eq!(code(&o), 4);
    let o = run(&[
        "--config",
        dir.path().join("missing").to_str().unwrap(),
        "coefficients",
    ]);
    assert_eq!(code(&o), 4);
}

#[test]
fn coefficients_match_the_checked_in_table() {
    let o = run(&["coefficients"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["printed"]["1"][0], "8");
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../coefficients.json");
    let stored: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(doc, stored);
}
