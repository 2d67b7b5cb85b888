use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};

fn cmtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmtrace")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn entries(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == "out")).collect();
    v.sort();
    v
}

#[test]
fn exit_codes() {
    assert_eq!(cmtrace(&["bogus"]).status.code(), Some(2));
    assert_eq!(cmtrace(&["reduce", "--form", "1,1,-3"]).status.code(), Some(2));
    assert_eq!(cmtrace(&["--precision", "10", "trace", "--D", "3"]).status.code(), Some(2));
    assert_eq!(cmtrace(&["trace", "--D", "3", "--range", "1:4"]).status.code(), Some(2));
    assert_eq!(cmtrace(&["--no-cache", "--precision", "64", "trace", "--D", "20000"]).status.code(), Some(3));
    assert_eq!(cmtrace(&["--no-cache", "verify", "poincare", "--cmax", "1"]).status.code(), Some(1));
    assert_eq!(cmtrace(&["--no-cache", "verify", "zagier", "--dmax", "500"]).status.code(), Some(0));
}

#[test]
fn trace_of_three() {
    let o = cmtrace(&["--no-cache", "trace", "--f", "J", "--D", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"trace\":\"-248\""));
}

#[test]
fn reduce_reports_matrix() {
    let o = cmtrace(&["reduce", "--form", "7,13,7"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outputs"]["reduced"], serde_json::json!([1, 1, 7]));
    assert_eq!(v["outputs"]["D"], 27);
}

#[test]
fn classnum_csv() {
    let o = cmtrace(&["--no-cache", "--format", "csv", "classnum", "--range", "1:8"]);
    assert_eq!(stdout(&o), "D,H,forms,fundamental\n3,1/3,1,true\n4,1/2,1,true\n7,1,1,true\n8,1,1,true\n");
}

#[test]
fn trace_row_schema() {
    let o = cmtrace(&["--no-cache", "trace", "--D", "4"]);
    let line = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    let mut want = vec!["D", "p", "f", "trace", "residual", "precision"];
    want.sort();
    assert_eq!(sorted, want);
    // field order on the wire follows the declaration
    let pos: Vec<usize> = ["\"D\"", "\"p\"", "\"f\"", "\"trace\"", "\"residual\"", "\"precision\""].iter().map(|k| line.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(v["trace"], "492");
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn csv_and_json_carry_the_same_rows() {
    let json = stdout(&cmtrace(&["--no-cache", "trace", "--range", "3:40"]));
    let csv_text = stdout(&cmtrace(&["--no-cache", "--format", "csv", "trace", "--range", "3:40"]));
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let lines: Vec<&str> = json.lines().collect();
    assert_eq!(rows.len(), lines.len());
    for (r, line) in rows.iter().zip(&lines) {
        let l: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(r[0], l["D"].to_string());
        assert_eq!(&r[3], l["trace"].as_str().unwrap());
        // compare the printed digits rather than a reparsed float
        let residual = line.split("\"residual\":").nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(&r[4], residual);
    }
}

#[test]
fn thread_count_does_not_change_tables() {
    for cmd in [&["trace", "--range", "3:200"][..], &["duke", "--range", "500:600"], &["forms", "--D", "191", "--level", "5"]] {
        let mut a = vec!["--no-cache", "--threads", "1"];
        a.extend_from_slice(cmd);
        let mut b = vec!["--no-cache", "--threads", "3"];
        b.extend_from_slice(cmd);
        assert_eq!(cmtrace(&a).stdout, cmtrace(&b).stdout, "{cmd:?}");
    }
}

#[test]
fn cache_hits_and_repairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["--cache-dir", d, "series", "--name", "g", "--trunc", "30"];
    let first = cmtrace(&args);
    assert!(first.status.success());
    let files = entries(dir.path());
    assert_eq!(files.len(), 1);

    let second = cmtrace(&args);
    assert_eq!(first.stdout, second.stdout);
    let uncached = cmtrace(&["--no-cache", "series", "--name", "g", "--trunc", "30"]);
    assert_eq!(first.stdout, uncached.stdout);

    // a well-formed entry is served as stored
    let text = std::fs::read_to_string(&files[0]).unwrap();
    let header = text.lines().next().unwrap();
    let key = header.split(' ').nth(1).unwrap();
    let body = "{\"exponent\":\"-1\",\"coeff\":\"planted\"}\n";
    let digest: String = Sha256::digest(body.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    std::fs::write(&files[0], format!("cmtrace-cache {key} {digest}\n{body}")).unwrap();
    assert_eq!(stdout(&cmtrace(&args)), body);

    // a body that no longer matches its checksum is dropped and recomputed
    std::fs::write(&files[0], format!("cmtrace-cache {key} {digest}\ngarbage\n")).unwrap();
    let repaired = cmtrace(&args);
    assert_eq!(repaired.stdout, first.stdout);
    assert!(String::from_utf8_lossy(&repaired.stderr).contains("corrupt"));
    assert_eq!(stdout(&cmtrace(&args)).as_bytes(), &first.stdout[..]);

    // different inputs get a separate entry
    cmtrace(&["--cache-dir", d, "series", "--name", "g", "--trunc", "31"]);
    assert_eq!(entries(dir.path()).len(), 2);
}

#[test]
fn version_is_part_of_the_key() {
    use cmtrace::cli::cache::{cache_key, CACHE_VERSION};
    let now = cache_key("series", "g 30", None, CACHE_VERSION);
    assert_ne!(now, cache_key("series", "g 30", None, "9.9.9+1"));
    assert_ne!(now, cache_key("series", "g 30", Some(256), CACHE_VERSION));
    assert_ne!(now, cache_key("series", "g 3", None, CACHE_VERSION));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let o = cmtrace(&["--no-cache", "--out", path.to_str().unwrap(), "trace", "--dmax", "20"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), cmtrace(&["--no-cache", "trace", "--dmax", "20"]).stdout);
}
