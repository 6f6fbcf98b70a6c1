use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gfic_mc::{draw_dpanel, DpanelDgp};
use gfic_numerics::rng::substream;
use gfic_panel::{save_panel, PanelDataset};
use nalgebra::DMatrix;
use tempfile::TempDir;

fn gfic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn synthetic(dir: &Path, n: usize) -> PathBuf {
    let dgp = DpanelDgp {
        theta: 0.5,
        gamma: vec![0.3],
        sigma_x_eta: 0.2,
        sigma_xv: 0.05,
        t: 5,
        n,
    };
    let p = draw_dpanel(&dgp, &mut substream(5, &[])).unwrap();
    let path = dir.join("panel.csv");
    save_panel(&p, &path).unwrap();
    path
}

#[test]
fn select_scores_every_candidate() {
    let dir = TempDir::new().unwrap();
    let data = synthetic(dir.path(), 300);
    let o = gfic(&["select", "--data", data.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0]
        .starts_with("candidate,lag,exog,status,periods,mu_hat,avar,sq_bias,gfic,gfic_plus,j"));
    assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 1);
    // the unlagged candidates use one more period
    assert!(lines[1].starts_with("LP,1,predetermined,ok,3,"));
    assert!(lines[3].starts_with("P,0,predetermined,ok,4,"));
}

#[test]
fn single_candidate_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let data = synthetic(dir.path(), 200);
    let o = gfic(&[
        "select",
        "--data",
        data.to_str().unwrap(),
        "--candidates",
        "LP",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["selected"], "LP");
    assert_eq!(v["candidates"].as_array().unwrap().len(), 1);
}

#[test]
fn infeasible_candidate_is_marked_and_others_scored() {
    let dir = TempDir::new().unwrap();
    let data = synthetic(dir.path(), 200);
    let o = gfic(&[
        "select",
        "--data",
        data.to_str().unwrap(),
        "--candidates",
        "LP,LS,P,S,4P",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["candidates"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows[4]["status"]
        .as_str()
        .unwrap()
        .starts_with("infeasible"));
    assert!(rows[..4].iter().all(|r| r["status"] == "ok"));
}

#[test]
fn simulate_is_repeatable_and_writes_both_formats() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = gfic(&[
            "simulate",
            "--design",
            "table1",
            "--reps",
            "2",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(a.with_extension("json")).unwrap(),
        std::fs::read(b.with_extension("json")).unwrap()
    );
    let o = gfic(&[
        "simulate", "--design", "table1", "--reps", "1", "--out", "-",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("design,cell,gamma2,procedure,metric"));
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_gfic"))
            .args(["simulate", "--design", "refe", "--reps", "40"])
            .env("GFIC_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "simulate", "design": "slopehet", "reps": 3, "seed": 4}"#,
    )
    .unwrap();
    let o = gfic(&["simulate", "--config", cfg.to_str().unwrap(), "--reps", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let first = text.lines().nth(1).unwrap();
    // reps_ok column
    assert!(first.contains(",2,0,"), "{first}");

    std::fs::write(&cfg, r#"{"design": "table1", "repz": 3}"#).unwrap();
    let o = gfic(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("repz"));

    std::fs::write(&cfg, r#"{"command": "select"}"#).unwrap();
    let o = gfic(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--design",
        "table1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(
        gfic(&["simulate", "--design", "table9"]).status.code(),
        Some(2)
    );
    assert_eq!(gfic(&["simulate"]).status.code(), Some(2));
    assert_eq!(gfic(&["ci", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(
        gfic(&["select", "--window", "1980-1975"]).status.code(),
        Some(2)
    );
    assert_eq!(
        gfic(&["select", "--data", "/nonexistent/panel.csv"])
            .status
            .code(),
        Some(3)
    );
    let o = gfic(&["replicate", "cigarettes"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--data"));

    // constant regressor: the instrument cross-product is singular
    let dir = TempDir::new().unwrap();
    let y = DMatrix::from_fn(30, 5, |i, t| ((i * 7 + t * 3) % 11) as f64);
    let x = DMatrix::zeros(30, 5);
    let path = dir.path().join("flat.csv");
    save_panel(&PanelDataset::from_matrices(y, x).unwrap(), &path).unwrap();
    let o = gfic(&["select", "--data", path.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn intervals(o: &Output) -> Vec<(f64, f64)> {
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    v["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| (i["lower"].as_f64().unwrap(), i["upper"].as_f64().unwrap()))
        .collect()
}

#[test]
fn two_step_interval_contains_one_step() {
    let dir = TempDir::new().unwrap();
    let data = synthetic(dir.path(), 300);
    let o = gfic(&[
        "ci",
        "--data",
        data.to_str().unwrap(),
        "--method",
        "both",
        "--alpha",
        "0.05",
        "--alpha1",
        "0.05",
        "--alpha2",
        "0.05",
        "--draws",
        "2000",
        "--grid-directions",
        "16",
        "--grid-shells",
        "2",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let iv = intervals(&o);
    let ((l1, u1), (l2, u2)) = (iv[0], iv[1]);
    assert!(l1 <= u1);
    assert!(l2 <= l1 && u1 <= u2, "{iv:?}");
}

#[test]
fn noiseless_panel_gives_zero_width_interval() {
    let (n, t) = (40, 5);
    let x = DMatrix::from_fn(n, t, |i, s| {
        (((i * 13 + s * 7) % 17) as f64 - 8.0) / 4.0 + (i as f64 * 0.37).sin()
    });
    let mut y = DMatrix::zeros(n, t);
    for i in 0..n {
        let eta = (i % 5) as f64;
        for s in 0..t {
            let lag = if s > 0 { y[(i, s - 1)] } else { 0.0 };
            y[(i, s)] = 0.5 * x[(i, s)] + 0.3 * lag + eta;
        }
    }
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("exact.csv");
    save_panel(&PanelDataset::from_matrices(y, x).unwrap(), &path).unwrap();
    let o = gfic(&[
        "ci",
        "--data",
        path.to_str().unwrap(),
        "--candidates",
        "LP",
        "--weights",
        "LP",
        "--method",
        "both",
        "--grid-directions",
        "8",
        "--grid-shells",
        "1",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for (l, u) in intervals(&o) {
        assert!((u - l).abs() < 1e-9, "[{l}, {u}]");
        assert!((l - 0.5).abs() < 1e-9);
    }
}

#[test]
fn replicate_layouts() {
    let o = gfic(&["replicate", "table1", "--reps", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("gamma2,SR L2,SR L2 se,SR L1,SR L1 se,SR GFIC,SR GFIC se,LR L2"));
    let o = gfic(&["replicate", "refe", "--reps", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("rho,gamma,RE,RE se,FE,FE se,GFIC,GFIC se,AVG,AVG se"));
}

#[test]
fn cigarette_table_when_available() {
    let Ok(path) = std::env::var("GFIC_CIGAR_CSV") else {
        eprintln!("GFIC_CIGAR_CSV not set; skipping");
        return;
    };
    let o = gfic(&[
        "replicate",
        "cigarettes",
        "--data",
        &path,
        "--window",
        "1975:1980",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8);
    assert!(text.contains("1975:1980,bias2,---,"));
}
