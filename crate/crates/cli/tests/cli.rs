use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cellscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellscale"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_records(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn exponent_csv_and_json_agree() {
    let csv_text = stdout(&cellscale(&["exponent", "--psi", "3"]));
    let json_text = stdout(&cellscale(&["exponent", "--psi", "3", "--format", "json"]));
    let rows = csv_records(&csv_text);
    let json: Vec<serde_json::Value> = serde_json::from_str(&json_text).unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(json.len(), 8);
    for (r, j) in rows.iter().zip(&json) {
        assert_eq!(r[0], *j["proto"].as_str().unwrap());
        assert_eq!(r[1], *j["direction"].as_str().unwrap());
        assert_eq!(r[2].parse::<f64>().unwrap(), j["exponent"].as_f64().unwrap());
    }
    let imh = rows.iter().find(|r| &r[0] == "imh" && &r[1] == "dl").unwrap();
    assert_eq!(&imh[2], "1.75");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# regime probe\npsi = 2.5\nbeta = 0.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&cellscale(&["regime", "--config", cfg]));
    assert!(from_file.contains("power-limited"));
    let overridden = stdout(&cellscale(&["regime", "--config", cfg, "--psi", "0.5"]));
    assert!(overridden.contains("bandwidth-limited-I,"));

    fs::write(dir.path().join("bad.cfg"), "psii = 1\n").unwrap();
    let bad = cellscale(&["regime", "--config", dir.path().join("bad.cfg").to_str().unwrap()]);
    assert!(!bad.status.success());
}

#[test]
fn invalid_exponents_exit_nonzero() {
    let out = cellscale(&["exponent", "--rho", "0.2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}

#[test]
fn simulate_is_reproducible_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let dump = dir.path().join("net.json");
    let run = |p: &Path, extra: &[&str]| {
        let mut args = vec!["simulate", "--n", "1024", "--proto", "imh", "--seed", "9", "--out", p.to_str().unwrap()];
        args.extend_from_slice(extra);
        stdout(&cellscale(&args))
    };
    let sa = run(&a, &["--dump-realization", dump.to_str().unwrap()]);
    let sb = run(&b, &[]);
    assert_eq!(sa, sb);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let summary = &csv_records(&sa)[0];
    assert_eq!(&summary[14], "true");
    let nodes = csv_records(&fs::read_to_string(&a).unwrap());
    assert_eq!(nodes.len(), 1024);
    let net: serde_json::Value = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(net["nodes"].as_array().unwrap().len(), 1024);
}

#[test]
fn relays_below_threshold_are_reported_unused() {
    let out = stdout(&cellscale(&["simulate", "--n", "1024", "--proto", "irh", "--rho", "0.5"]));
    let mut r = csv::Reader::from_reader(out.as_bytes());
    let col = r.headers().unwrap().iter().position(|h| h == "rn_used").unwrap();
    assert_eq!(&r.records().next().unwrap().unwrap()[col], "false");
}

#[test]
fn sweep_writes_the_fixed_schema() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("sweep.csv");
    let out = stdout(&cellscale(&[
        "sweep", "--proto", "ish", "--n-min", "256", "--n-max", "1024", "--trials", "2", "--beta", "0.5",
        "--gamma", "0", "--out", table.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,trial,seed,proto,direction,mode,min_rate,failures");
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(out.starts_with("proto,direction,mode,slope,"));
}

#[test]
fn figure_emits_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fig.svg");
    let overlay = dir.path().join("measured.csv");
    fs::write(&overlay, "proto,psi,exponent\nish,0,-0.5\n").unwrap();
    stdout(&cellscale(&[
        "figure", "--format", "svg", "--out", svg.to_str().unwrap(), "--overlay", overlay.to_str().unwrap(),
    ]));
    let doc = fs::read_to_string(&svg).unwrap();
    assert!(doc.starts_with("<svg"));
    assert_eq!(doc.matches("<polyline").count(), 4);
    let rows = csv_records(&fs::read_to_string(svg.with_extension("csv")).unwrap());
    assert!(rows.iter().any(|r| &r[0] == "irh"));
}
