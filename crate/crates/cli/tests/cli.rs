use std::process::{Command, Output};

fn lp2dt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lp2dt"))
        .args(args)
        .env_remove("LP2DT_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_rows(o: &Output) -> Vec<(u64, String)> {
    let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r[0].as_u64().unwrap(), r[1].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn compute_rank_one() {
    let o = lp2dt(&["compute", "--rank", "1", "--c1", "0", "--order", "8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json_rows(&o);
    let even: Vec<_> = rows.iter().filter(|(d, _)| d % 2 == 0).map(|(d, v)| (*d, v.as_str())).collect();
    assert_eq!(even, [(0, "1/1"), (2, "3/1"), (4, "9/1"), (6, "22/1"), (8, "51/1")]);
    assert!(rows.iter().filter(|(d, _)| d % 2 == 1).all(|(_, v)| v == "0/1"));
}

#[test]
fn compute_rank_two() {
    let o = lp2dt(&["compute", "--rank", "2", "--c1", "1", "--order", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "r,l,delta,dt\n2,1,0,0\n2,1,1,0\n2,1,2,0\n2,1,3,1\n");
}

#[test]
fn formats_agree() {
    let args = ["compute", "--rank", "2", "--c1", "-1", "--order", "11"];
    let json = json_rows(&lp2dt(&[&args[..], &["--format", "json"]].concat()));
    let csv = stdout(&lp2dt(&[&args[..], &["--format", "csv"]].concat()));
    let text = stdout(&lp2dt(&[&args[..], &["--format", "text"]].concat()));
    let csv_rows: Vec<(u64, String)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<_> = l.split(',').collect();
            (f[2].parse().unwrap(), format!("{}/1", f[3]))
        })
        .collect();
    assert_eq!(json, csv_rows);
    let text_rows: Vec<(u64, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().parse().unwrap(), format!("{}/1", it.next().unwrap()))
        })
        .collect();
    assert_eq!(json, text_rows);
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let base = ["compute", "--rank", "3", "--c1", "1", "--order", "10", "--format", "json", "--raw"];
    let one = lp2dt(&[&base[..], &["--jobs", "1"]].concat());
    let four = lp2dt(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn usage_errors() {
    assert_eq!(lp2dt(&["compute", "--rank", "0", "--c1", "0", "--order", "2"]).status.code(), Some(1));
    assert_eq!(lp2dt(&["compute", "--rank", "2", "--c1", "0"]).status.code(), Some(1));
    assert_eq!(lp2dt(&["compute", "--rank", "5", "--c1", "0", "--order", "1"]).status.code(), Some(1));
    assert_eq!(lp2dt(&["compute", "--rank", "2", "--c1", "1", "--order", "1", "--jobs", "0"]).status.code(), Some(1));
    assert_eq!(lp2dt(&["bogus"]).status.code(), Some(1));
}

const WORKED: &str = r#"{
  "gram": [[0, 1], [1, 0]],
  "nu_bar": ["1/3", "1/2"],
  "c": [["1", "-1"]],
  "c_prime": [["1", "0"]]
}"#;

#[test]
fn theta_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("xi.json");
    std::fs::write(&path, WORKED).unwrap();
    let o = lp2dt(&["theta", path.to_str().unwrap(), "--prec", "1", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2*q^(1/3) - 2*q^(2/3) + 2*q^(5/6) + O(q^1)\nMATCH\n");

    let bad = WORKED.replace("\"1/3\", \"1/2\"", "\"0\", \"0\"");
    std::fs::write(&path, bad).unwrap();
    let o = lp2dt(&["theta", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(iv)"));
}

#[test]
fn joyce_coefficients() {
    let o = lp2dt(&["joyce", "1,0,2", "1,1,-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("S = -1\n"));
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lp2dt"))
        .args(["compute", "--rank", "2", "--c1", "1", "--order", "3"])
        .env("LP2DT_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("dt_r2_l1.json").exists());
    std::fs::write(dir.path().join("dt_r2_l1.json"), "{\"version\": \"0\"}").unwrap();
    let o = lp2dt(&["compute", "--rank", "2", "--c1", "1", "--order", "3", "--cache-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quick_selftest_passes() {
    let o = lp2dt(&["selftest", "--quick"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.lines().all(|l| l.starts_with("[PASS]")), "{out}");
}
