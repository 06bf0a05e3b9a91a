use std::fs;
use std::process::{Command, Output};

fn rsaccr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsaccr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SWAP: &str = r#"{
  "schema": "rsaccr-1",
  "trades": [{
    "id": "swap-1", "currency": "USD", "margined": false,
    "legs": [
      {"direction": "pay", "kind": {"type": "fixed", "rate": 0.0},
       "notional": [[0.0, 100000000.0]], "frequency": 0.25, "start": 0.0, "end": 10.0},
      {"direction": "receive", "kind": {"type": "floating", "tenor": 0.25},
       "notional": [[0.0, 100000000.0]], "frequency": 0.25, "start": 0.0, "end": 10.0}
    ]
  }]
}"#;

#[test]
fn table2_scenario_pretty() {
    let o = rsaccr(&["scenario", "table2", "--method", "saccr", "--out", "-"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("3,934,693"), "{s}");
    assert!(s.contains("3,654,794"), "{s}");
}

#[test]
fn table3_scenario_csv() {
    let o = rsaccr(&[
        "scenario",
        "table3",
        "--method",
        "saccr,rsaccr",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    let line = s.lines().nth(1).unwrap();
    let cols: Vec<&str> = line.split(',').collect();
    assert_eq!(cols[0], "ATM - FRAs");
    let sa: f64 = cols[1].parse().unwrap();
    assert!((sa / 1_646_936.0 - 1.0).abs() < 0.005, "{sa}");
    assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn run_portfolio_with_mc_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    fs::write(&p, SWAP).unwrap();
    let out = dir.path().join("r.json");
    let contrib = dir.path().join("c.csv");
    let profile = dir.path().join("e.csv");
    let args = [
        "run",
        "--portfolio",
        p.to_str().unwrap(),
        "--mc-paths",
        "1024",
        "--model",
        "hw1f",
        "--out",
        out.to_str().unwrap(),
        "--contributions",
        contrib.to_str().unwrap(),
        "--profile",
        profile.to_str().unwrap(),
    ];
    let o = rsaccr(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(&out).unwrap();
    assert!(first.trim_start().starts_with('{'));
    assert!(first.contains("\"Netting set\""));
    assert!(first.contains("\"stderr\""));
    assert!(fs::read_to_string(&contrib)
        .unwrap()
        .starts_with("trade_id,hedging_set,bucket"));
    let prof = fs::read_to_string(&profile).unwrap();
    assert!(prof.starts_with("t,epe,stderr"));
    assert_eq!(prof.lines().count(), 53);

    // reruns are byte-identical
    assert!(rsaccr(&args).status.success());
    assert_eq!(fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn empty_portfolio_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.json");
    fs::write(&p, r#"{"schema": "rsaccr-1", "trades": []}"#).unwrap();
    let o = rsaccr(&[
        "run",
        "--portfolio",
        p.to_str().unwrap(),
        "--mc-paths",
        "64",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let row: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "Netting set");
    for v in &row[1..8] {
        assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{s}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"schema": "other", "trades": []}"#).unwrap();
    let o = rsaccr(&[
        "run",
        "--portfolio",
        bad.to_str().unwrap(),
        "--method",
        "saccr",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));

    let p = dir.path().join("p.json");
    fs::write(&p, SWAP).unwrap();
    let o = rsaccr(&[
        "run",
        "--portfolio",
        p.to_str().unwrap(),
        "--curves",
        "/no/such/dir",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("market data"));

    let cms = SWAP.replace(
        r#"{"type": "floating", "tenor": 0.25}"#,
        r#"{"type": "cms", "swap_tenor": 10.0, "tenor": 0.25}"#,
    );
    let c = dir.path().join("cms.json");
    fs::write(&c, cms).unwrap();
    let o = rsaccr(&[
        "run",
        "--portfolio",
        c.to_str().unwrap(),
        "--method",
        "mc",
        "--mc-paths",
        "64",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let o = rsaccr(&["scenario", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rsaccr(&["scenario", "table2", "--method", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_scenarios() {
    let o = rsaccr(&["scenario", "--list"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for n in ["table2", "moneyness", "zero_addon"] {
        assert!(s.lines().any(|l| l == n));
    }
}
