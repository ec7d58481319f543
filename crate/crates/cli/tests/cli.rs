use std::process::{Command, Output};

use serde_json::Value;

fn gdcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdcalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

#[test]
fn table_n1_is_d() {
    let o = gdcalc(&["gd-table", "--n", "1"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    let table = gdcalc::BracketTable::from_json(&r["artifacts"]["table"]).unwrap();
    assert_eq!(table.entry(1, 1), &gdcalc::PsiDO::d());
    assert_eq!(r["command"], "gd-table");
    assert!(r.get("wall_time_ms").is_none());
}

#[test]
fn table_n2_text() {
    let o = gdcalc(&["gd-table", "--n", "2", "--format", "text"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("J[1][1] = (2)·d^1\n"), "{text}");
    assert!(text.ends_with("result: pass\n"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["gd-table", "--n", "0"][..],
        &["gd-table", "--n", "5"],
        &["verify", "kw", "--n", "4"],
        &["verify", "nonsense"],
        &["verify", "kw", "--sign", "2"],
        &["verify", "jacobi", "--family", "nope"],
        &["verify", "jacobi", "--n", "3", "--family", "gd2"],
        &[],
    ] {
        let o = gdcalc(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn cap_override_warns() {
    let o = gdcalc(&["gd-table", "--n", "5", "--no-cap"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(code(&gdcalc(&["verify", "kw", "--n", "3"])), 0);
    assert_eq!(
        code(&gdcalc(&["verify", "mult", "--p", "1", "--q", "2"])),
        0
    );
    let neg = gdcalc(&["verify", "kw", "--n", "2", "--sign", "+1"]);
    assert_eq!(code(&neg), 1);
    let r = json(&neg);
    assert_eq!(r["passed"], false);
    assert_eq!(r["parameters"]["sign"], "+1");
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        &["verify", "kw", "--n", "2"][..],
        &["verify", "super-kw"],
        &["verify", "invariants", "--seed", "9", "--trials", "3"],
        &["gd-table", "--n", "3"],
    ] {
        let a = gdcalc(args);
        let b = gdcalc(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn timing_is_opt_in() {
    let r = json(&gdcalc(&["verify", "kw", "--n", "1", "--timing"]));
    assert!(r["wall_time_ms"].is_u64());
}

#[test]
fn sequential_build_matches() {
    gdcalc::exec::set_mode(gdcalc::exec::Mode::Sequential);
    let (seq, _, c1) = gdcalc_cli::run(["gdcalc", "verify", "kw", "--n", "3"]);
    gdcalc::exec::set_mode(gdcalc::exec::Mode::Parallel);
    let (par, _, c2) = gdcalc_cli::run(["gdcalc", "verify", "kw", "--n", "3"]);
    assert_eq!((seq, c1), (par, c2));
}
