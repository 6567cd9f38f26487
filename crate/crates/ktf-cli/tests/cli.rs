//! End-to-end checks of the `ktf-kit` binary: output format and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn ktf_kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktf-kit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ktf-kit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn kloosterman_level_one_value() {
    let o = ktf_kit(&["kloosterman", "--a", "1", "--b", "1", "--n", "1", "--c", "3", "--modulus", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-1");
}

#[test]
fn kloosterman_routes_agree() {
    let args = ["kloosterman", "--a", "2", "--b", "-3", "--n", "1", "--c", "45", "--modulus", "9", "--character", "9:1"];
    let mut out = Vec::new();
    for mode in ["direct", "factored"] {
        let mut a = args.to_vec();
        a.extend(["--mode", mode]);
        let o = ktf_kit(&a);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        out.push(stdout(&o));
    }
    assert_eq!(out[0], out[1]);
}

#[test]
fn help_lists_every_subcommand() {
    let o = ktf_kit(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for sub in [
        "kloosterman",
        "gauss",
        "weil-scan",
        "transform-roundtrip",
        "zagier",
        "eisenstein",
        "ktf",
        "crosscheck",
        "equidist",
        "load-check",
    ] {
        assert!(text.contains(sub), "missing {sub}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ktf_kit(&["kloosterman", "--a", "1"]).status.code(), Some(2));
    assert_eq!(ktf_kit(&["no-such-command"]).status.code(), Some(2));
    // Character modulus does not divide the sum's modulus.
    let o = ktf_kit(&["kloosterman", "--a", "1", "--b", "1", "--c", "10", "--modulus", "3", "--character", "3:1"]);
    assert_eq!(o.status.code(), Some(2));
    // Odd nebentypus is rejected by the trace formula.
    let o = ktf_kit(&["ktf", "--N", "3", "--omega", "3:1", "--h", "gaussian:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn weil_scan_csv_header() {
    let o = ktf_kit(&["weil-scan", "--max-c", "6", "--max-N", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,character,c,sums,max_abs,max_ratio1,max_ratio2,within_bounds"));
    assert!(lines.all(|l| l.ends_with(",true")));
}

#[test]
fn eisenstein_listing_and_json() {
    let o = ktf_kit(&["eisenstein", "--N", "6", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5);
    let o = ktf_kit(&["eisenstein", "--N", "4", "--s", "1.5", "--z-im", "1.2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v.as_array().unwrap() {
        assert!(row["rel_delta"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn crosscheck_report_and_output_file() {
    let path = scratch("cross.json", "");
    let o = ktf_kit(&[
        "crosscheck", "--N", "12", "--n", "5", "--m1", "2", "--m2", "3", "--h", "gaussian:1", "--terms", "10",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["max_rel"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn load_check_accepts_and_rejects() {
    let good = scratch(
        "good.csv",
        "# two forms\nt_re,t_im,a_m1_re,a_m1_im,a_m2_re,a_m2_im,norm_sq,lambda_re,lambda_im\n\
         9.5336952613,0,1,0,1,0,2.5,1,0\n12.1730083995,0,-1,0,-1,0,3,-1,0\n",
    );
    let o = ktf_kit(&["load-check", "--path", good.to_str().unwrap(), "--h", "gaussian:4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"], 2);

    let bad_header = scratch("bad_header.csv", "t,a\n1,2\n");
    assert_eq!(ktf_kit(&["load-check", "--path", bad_header.to_str().unwrap()]).status.code(), Some(4));
    let bad_value = scratch(
        "bad_value.csv",
        "t_re,t_im,a_m1_re,a_m1_im,a_m2_re,a_m2_im,norm_sq,lambda_re,lambda_im\n1,0,1,0,1,0,-2,0,0\n",
    );
    assert_eq!(ktf_kit(&["load-check", "--path", bad_value.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(ktf_kit(&["load-check", "--path", "/nonexistent/spectral.csv"]).status.code(), Some(4));
}

#[test]
fn zagier_routes_within_tolerance() {
    let o = ktf_kit(&["zagier", "--h", "gaussian:1", "--a", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ktf_kit(&["zagier", "--h", "gaussian:1", "--a", "0.3", "--rel-tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn roundtrip_table() {
    let o = ktf_kit(&["transform-roundtrip", "--h", "gaussian:1", "--t-max", "2", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 6);
}
