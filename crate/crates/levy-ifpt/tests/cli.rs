use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levy_ifpt::cli::{CvaOut, QidOut, RootsOut, SolveOut, WhOut};
use levy_ifpt::config::{parse_json, CurveFile, CvaFile, FrailtyFile, ModelFile};
use levy_ifpt::output::to_json;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn levy_ifpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-ifpt")).args(args).output().unwrap()
}

fn stdout_of(args: &[&str]) -> String {
    let out = levy_ifpt(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn brownian_model() -> String {
    let path = scratch("brownian.json");
    std::fs::write(&path, r#"{"kind": "brownian", "eta": -1}"#).unwrap();
    path.to_string_lossy().into_owned()
}

/// Parses and re-serialises, which must reproduce the text exactly.
fn round_trip<T: Serialize + DeserializeOwned>(text: &str) -> T {
    let value: T = serde_json::from_str(text).unwrap();
    assert_eq!(to_json(&value).unwrap(), text);
    value
}

#[test]
fn brownian_roots_and_factors() {
    let m = brownian_model();
    let text = stdout_of(&["roots", "--model", &m, "--q", "1.5"]);
    assert_eq!(
        text,
        "{\"q\":1.5000000000000000e0,\"plus\":[3.0000000000000000e0],\"minus\":[-1.0000000000000000e0],\
         \"phi_bar\":null,\"confluent\":false}\n"
    );
    round_trip::<RootsOut>(&text);

    let killed: RootsOut = round_trip(&stdout_of(&["roots", "--model", &m, "--q", "-0.375"]));
    assert_eq!(killed.phi_bar, Some(0.5));
    assert_eq!(killed.plus[0].0.re, 1.5);

    let wh: WhOut = round_trip(&stdout_of(&["wh", "--model", &m, "--q", "1.5", "--theta", "0.5"]));
    // Ψ⁺ = 3/(3 - iθ), Ψ⁻ = 1/(1 + iθ)
    assert!((wh.plus.0.re - 36.0 / 37.0).abs() < 1e-15 && (wh.plus.0.im - 6.0 / 37.0).abs() < 1e-15);
    assert!((wh.minus.0.re - 0.8).abs() < 1e-15 && (wh.minus.0.im + 0.4).abs() < 1e-15);
    assert!(wh.residual < 1e-15);
}

#[test]
fn invariant_law_and_density_file() {
    let m = brownian_model();
    let csv = scratch("density.csv");
    let text = stdout_of(&["qid", "--model", &m, "--lambda", "0.375", "--density-csv", csv.to_str().unwrap()]);
    let q: QidOut = round_trip(&text);
    assert_eq!(q.phi_bar, 0.5);
    assert!((q.mean - 8.0 / 3.0).abs() < 1e-14);
    let rows: Vec<Vec<f64>> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 10);
    for r in rows {
        let want = 0.75 * ((-0.5 * r[0]).exp() - (-1.5 * r[0]).exp());
        assert!((r[1] - want).abs() < 1e-14, "{r:?}");
    }
}

#[test]
fn time_change_of_a_weibull_curve() {
    let out = scratch("solve.json");
    let args = [
        "solve",
        "--model",
        &data("kou.json"),
        "--curve",
        &data("weibull.json"),
        "--lambda",
        "0.03",
        "--t-max",
        "2",
        "--points",
        "5",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(stdout_of(&args), "");
    let s: SolveOut = round_trip(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(s.timechange.len(), 5);
    for [t, i] in s.timechange {
        assert!((i - t * t / 0.03).abs() < 1e-9 * (1.0 + i), "{t}: {i}");
    }
}

#[test]
fn cva_output_round_trips() {
    let c: CvaOut = round_trip(&stdout_of(&["cva", "--spec", &data("cva.json")]));
    assert!((c.pi - 0.2074161908683409).abs() < 1e-6 * c.pi);
    assert!(c.pi <= c.diagnostics.call_price);
    assert!(c.diagnostics.mc.is_none());
}

#[test]
fn validation_report_is_csv() {
    let args = [
        "validate",
        "--model",
        &data("kou_steep.json"),
        "--curve",
        &data("weibull.json"),
        "--normalize",
        "1",
        "--paths",
        "5000",
        "--points",
        "4",
    ];
    let text = stdout_of(&args);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["t", "target_survival", "mc_survival", "se"]);
    assert_eq!(lines.count(), 4);
}

#[test]
fn input_files_round_trip() {
    for name in ["kou.json", "kou_steep.json"] {
        let m: ModelFile = parse_json(&std::fs::read_to_string(data(name)).unwrap(), name).unwrap();
        assert_eq!(parse_json::<ModelFile>(&to_json(&m).unwrap(), name).unwrap(), m);
    }
    for name in ["weibull.json", "table.json"] {
        let c: CurveFile = parse_json(&std::fs::read_to_string(data(name)).unwrap(), name).unwrap();
        assert_eq!(parse_json::<CurveFile>(&to_json(&c).unwrap(), name).unwrap(), c);
    }
    let f: FrailtyFile = parse_json(&std::fs::read_to_string(data("frailty.json")).unwrap(), "frailty").unwrap();
    assert_eq!(parse_json::<FrailtyFile>(&to_json(&f).unwrap(), "frailty").unwrap(), f);
    let c: CvaFile = parse_json(&std::fs::read_to_string(data("cva.json")).unwrap(), "cva").unwrap();
    assert_eq!(parse_json::<CvaFile>(&to_json(&c).unwrap(), "cva").unwrap(), c);
}

#[test]
fn exit_codes() {
    let m = brownian_model();
    // λ above λ* = 1/2
    assert_eq!(levy_ifpt(&["qid", "--model", &m, "--lambda", "0.6"]).status.code(), Some(2));
    assert_eq!(levy_ifpt(&["roots", "--model", &m, "--q", "1", "--bogus"]).status.code(), Some(2));
    assert_eq!(levy_ifpt(&["qid", "--model", "/nonexistent.json", "--lambda", "0.1"]).status.code(), Some(2));
    let bad = scratch("bad_model.json");
    std::fs::write(&bad, r#"{"kind": "brownian", "eta": -1, "extra": 0}"#).unwrap();
    let out = levy_ifpt(&["roots", "--model", bad.to_str().unwrap(), "--q", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(levy_ifpt(&["--help"]).status.code(), Some(0));

    // a truncated Fourier grid is a numerical failure, not bad input
    let text = std::fs::read_to_string(data("cva.json")).unwrap();
    let mut spec: CvaFile = parse_json(&text, "cva").unwrap();
    spec.numerics.xi_max = 5.0;
    let short = scratch("cva_short.json");
    std::fs::write(&short, to_json(&spec).unwrap()).unwrap();
    assert_eq!(levy_ifpt(&["cva", "--spec", short.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn seeded_runs_repeat() {
    let args = ["frailty", "--spec", &data("frailty.json"), "--paths", "3000", "--seed", "7"];
    assert_eq!(stdout_of(&args), stdout_of(&args));
    let other = ["frailty", "--spec", &data("frailty.json"), "--paths", "3000", "--seed", "8"];
    assert_ne!(stdout_of(&args), stdout_of(&other));
}
