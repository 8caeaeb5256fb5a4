use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .current_dir(cwd)
        .env("LAB_THREADS", "2")
        .output()
        .expect("lab runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("ok.ini"), "[experiment]\nid = E1\nsamples = 10\n[output]\ndir = ok\n").unwrap();
    let o = lab(&["run", "ok.ini", "--plot"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("ok/report.json").exists());
    assert!(d.join("ok/plots/manifest.json").exists());

    // an impossible tolerance fails the run without being a config error
    fs::write(
        d.join("strict.ini"),
        "[experiment]\nid = E2\nsamples = 2\n[fractal]\ndepths = 2..4\n[tolerance]\nmin_slope = 2\n[output]\ndir = strict\n",
    )
    .unwrap();
    let o = lab(&["run", "strict.ini"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL min_direction_slope"));

    fs::write(d.join("bad.ini"), "[experiment]\nid = E1\nseeed = 3\n").unwrap();
    let o = lab(&["run", "bad.ini"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment.seeed"));

    let o = lab(&["run", "missing.ini"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_from_report_path() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("c.ini"), "[experiment]\nid = E1\nsamples = 5\n[output]\ndir = r\n").unwrap();
    assert_eq!(lab(&["run", "c.ini"], d).status.code(), Some(0));
    let o = lab(&["plot", "r/report.json", "--out", "figs"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(d.join("figs/exponent_vs_scale.dat").exists());
    assert!(stdout(&o).lines().last().unwrap().ends_with("manifest.json"));
}

#[test]
fn directions_fractals_projection_and_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = lab(
        &["gen-directions", "--kind", "d0", "--seq", "paper", "--depth", "64", "--count", "3", "--seed", "4", "--out", "dirs.jsonl"],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(d.join("dirs.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 3);
    let again = lab(&["gen-directions", "--depth", "64", "--count", "3", "--seed", "4"], d);
    assert_eq!(stdout(&again), text);

    assert_eq!(lab(&["gen-fractal", "--preset", "four-corner", "--depth", "3", "--out", "fc.txt"], d).status.code(), Some(0));
    assert!(fs::read_to_string(d.join("fc.txt")).unwrap().starts_with("6 2 64\n"));
    assert_eq!(
        lab(&["gen-fractal", "--preset", "four-corner", "--depth", "3", "--format", "binary", "--out", "fc.dps"], d).status.code(),
        Some(0)
    );
    assert_eq!(&fs::read(d.join("fc.dps")).unwrap()[..4], b"DPS1");

    assert_eq!(lab(&["project", "--input", "fc.dps", "--e", "1,0", "--out", "px.txt"], d).status.code(), Some(0));
    let o = lab(&["boxdim", "--input", "px.txt", "--scales", "2,4,6", "--anchors", "4,6"], d);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("2\t2\n4\t4\n6\t8\n"), "{out}");
    assert!(out.contains("slope\t0.5\n"));
    assert!(out.contains("lower_estimate\t0.5"));

    let o = lab(&["project", "--input", "fc.txt", "--from-direction", "dirs.jsonl:2", "--out", "pd.txt"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(lab(&["project", "--input", "fc.txt", "--e", "1,1", "--out", "no.txt"], d).status.code() == Some(2));
}

fn write_profile(path: &Path, dim: u8, values: &[i64]) {
    let body: Vec<String> = values.iter().map(i64::to_string).collect();
    fs::write(path, format!("{} {dim}\n{}\n", values.len() - 1, body.join(" "))).unwrap();
}

#[test]
fn certify_statements() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let tight: Vec<i64> = (0..=100).map(|r: i64| 2 * (r - 50).max(0)).collect();
    let ideal: Vec<i64> = (0..=100).collect();
    write_profile(&d.join("x.txt"), 2, &tight);
    write_profile(&d.join("e.txt"), 1, &ideal);

    let o = lab(&["certify", "--profile", "x.txt", "--direction", "e.txt", "--statement", "prop6.1"], d);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["statement_id"], "prop6.1");
    assert_eq!(v["raw_bound"], 50);

    let o = lab(&["certify", "--profile", "e.txt", "--direction", "e.txt", "--statement", "prop5.4", "--sigma", "1/2"], d);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["statement_id"], "prop5.4");

    for st in ["thm3.1", "thm3.2"] {
        let o = lab(&["certify", "--profile", "x.txt", "--direction", "e.txt", "--statement", st], d);
        assert_eq!(o.status.code(), Some(0), "{st}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["statement_id"], st);
    }

    // a masked direction breaks the hypothesis: exit 1, certificate still printed
    let line: Vec<i64> = (0..=400).collect();
    write_profile(&d.join("line.txt"), 2, &line);
    let o = lab(&["gen-directions", "--kind", "d0", "--seq", "geo:4", "--seq-len", "2", "--depth", "400", "--seed", "2", "--out", "m.jsonl"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = lab(
        &["certify", "--profile", "line.txt", "--direction", "m.jsonl", "--statement", "prop5.4", "--variant", "exact", "--seq", "geo:4", "--b-min", "1"],
        d,
    );
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("inapplicable"));

    let o = lab(&["certify", "--profile", "nope.txt", "--direction", "e.txt", "--statement", "thm3.2"], d);
    assert_eq!(o.status.code(), Some(2));
}
