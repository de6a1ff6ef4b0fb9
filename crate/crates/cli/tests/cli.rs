use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const GM_MIN: [&str; 10] = ["--p", "5", "--q", "1", "--m", "6", "--s", "1", "--k", "4"];

fn gm_ext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gm-ext")).args(args).env_remove("GM_EXT_JOBS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(extra).copied().collect()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn classify_prints_verdict_and_exit_code() {
    let o = gm_ext(&with(&["classify", "--N", "3"], &GM_MIN));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "EXISTS_MINIMAL_GROWTH Thm2.2(i) u~r^-1 v~r^-1");

    let o = gm_ext(&with(&["classify", "--N", "2"], &GM_MIN));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "NONEXISTENCE Thm2.1(i)");

    // sigma is undefined for p < 1, but p <= N/(N-2) already settles it
    let o = gm_ext(&["classify", "--p", "0.5", "--q", "1", "--m", "6", "--s", "1", "--k", "4"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));

    // sigma >= 1 with p > q + N/(N-2)
    let o = gm_ext(&["classify", "--p", "4", "--q", "1", "--m", "6", "--s", "1", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("INCONCLUSIVE"));
}

#[test]
fn classify_json_carries_profiles() {
    let o = gm_ext(&with(&["classify", "--json"], &GM_MIN));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tag"], "Thm2.2(i)");
    assert_eq!(v["u"]["power"], -1.0);
    assert_eq!(v["sigma"], "0.75");
}

#[test]
fn malformed_configuration_exits_64() {
    assert_eq!(gm_ext(&["classify", "--p", "5"]).status.code(), Some(64));
    assert_eq!(gm_ext(&with(&["classify", "--kind", "FOO"], &GM_MIN)).status.code(), Some(64));
    assert_eq!(gm_ext(&["classify", "--bogus", "1"]).status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    fs::write(&file, "p = 5\nq = 1\nunknown = 3\n").unwrap();
    let o = gm_ext(&["classify", "--config", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("unknown key"), "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    fs::write(&file, "# minimal growth\nN = 3\np = 5\nq = 1\nm = 6\ns = 1\nk = 4\n").unwrap();
    let path = file.to_str().unwrap();
    assert_eq!(gm_ext(&["classify", "--config", path]).status.code(), Some(0));
    let o = gm_ext(&["classify", "--config", path, "--N", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_writes_artifacts_and_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = gm_ext(&with(&["solve", "--R", "1e6", "--n", "2049", "--out", a.to_str().unwrap()], &GM_MIN));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let csv = fs::read_to_string(a.join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,v,residual_u,residual_v"));
    assert_eq!(lines.count(), 2049);

    let m = manifest(&a);
    assert_eq!(m["verdict"]["tag"], "Thm2.2(i)");
    assert_eq!(m["config"]["R"], 1e6);
    assert_eq!(m["config"]["lambda"], "auto");
    for field in ["u", "v"] {
        let power = m["fits"][field]["power"].as_f64().unwrap();
        assert!((power + 1.0).abs() < 0.05, "{field}: {power}");
        assert_eq!(m["fits"][field]["pass"], true);
    }
    assert!(m["residuals"][0].as_f64().unwrap() < 1e-8);
    assert!(m["residuals"][1].as_f64().unwrap() < 1e-8);
    assert_eq!(m["box_check"]["holds"], true);
    let lambda = m["lambda"].as_f64().unwrap();
    let threshold = m["schedule"]["threshold"].as_f64().unwrap();
    assert!((lambda - threshold / 2.0).abs() <= 1e-15 * threshold);

    let b = dir.path().join("b");
    let o = gm_ext(&["solve", "--manifest", a.join("manifest.json").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(a.join("solution.csv")).unwrap(), fs::read(b.join("solution.csv")).unwrap());
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
}

#[test]
fn doubled_truncation_is_stable_against_reference() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = gm_ext(&with(&["solve", "--R", "1e6", "--n", "2049", "--out", a.to_str().unwrap()], &GM_MIN));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // same spacing: ln(2e6) / ln(1e6) * 2048 intervals
    let reference = a.join("manifest.json");
    let o = gm_ext(&with(
        &["solve", "--R", "2e6", "--n", "2150", "--out", b.to_str().unwrap(), "--reference", reference.to_str().unwrap()],
        &GM_MIN,
    ));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = &manifest(&b)["reference"];
    assert!(r["max_delta"].as_f64().unwrap() < 0.01, "{r}");
    assert_eq!(r["stable"], true);
}

#[test]
fn solve_refuses_nonexistence_and_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = gm_ext(&["solve", "--p", "5", "--q", "1", "--m", "2", "--s", "1", "--k", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gm-ext probe"), "{}", stderr(&o));
    assert!(!out.exists());
    let o = gm_ext(&["solve", "--p", "4", "--q", "1", "--m", "6", "--s", "1", "--k", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_70_with_tag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = gm_ext(&with(&["solve", "--R", "1e6", "--n", "2049", "--max-iter", "2", "--out", out.to_str().unwrap()], &GM_MIN));
    assert_eq!(o.status.code(), Some(70));
    assert!(stderr(&o).contains("NO_CONVERGENCE"), "{}", stderr(&o));
}

#[test]
fn sweep_shows_the_region_boundary() {
    let o = gm_ext(&["sweep", "--p", "3:7:9", "--q", "0.5:3:6", "--m", "6", "--s", "1", "--k", "4", "--jobs", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 54);
    for row in &rows {
        let p: f64 = row[2].parse().unwrap();
        let q: f64 = row[3].parse().unwrap();
        // across p = q + 3 the verdict leaves minimal growth
        if row[8] == "Thm2.2(i)" {
            assert!(p > q + 3.0, "{row:?}");
        }
        if p <= 3.0 {
            assert_eq!(row[7], "NONEXISTENCE", "{row:?}");
        }
    }
    assert!(rows.iter().any(|r| r[8] == "Thm2.2(i)"));
    // row order does not depend on the pool size
    let serial = gm_ext(&["sweep", "--p", "3:7:9", "--q", "0.5:3:6", "--m", "6", "--s", "1", "--k", "4", "--jobs", "1"]);
    assert_eq!(serial.stdout, o.stdout);
}

#[test]
fn sweep_across_the_critical_m_switches_profile_shape() {
    let o = gm_ext(&["sweep", "--p", "5", "--q", "1", "--m", "3:5:9", "--s", "1", "--k", "4"]);
    let text = stdout(&o);
    let kinds: Vec<String> = text.lines().skip(1).map(|l| l.split(',').nth(12).unwrap().to_string()).collect();
    assert_eq!(kinds[0], "PURE_POWER");
    assert_eq!(kinds[4], "POWER_LOG");
    assert_eq!(kinds[8], "PURE_POWER");
}

#[test]
fn empty_range_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atlas.csv");
    let o = gm_ext(&["sweep", "--p", "3:7:0", "--q", "1", "--m", "6", "--s", "1", "--k", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("N,kind,p,q,m,s,k,outcome,tag,"));
}

#[test]
fn sweep_records_cell_failures_inline() {
    let o = gm_ext(&["sweep", "--p", "-1:5:3", "--q", "1", "--m", "6", "--s", "1", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains("INVALID_PARAMETER"), "{}", rows[0]);
    assert!(rows[2].contains("Thm2.2(i)"));
}

#[test]
fn sweep_solve_fills_fit_columns() {
    let o = gm_ext(&["sweep", "--p", "5", "--q", "1", "--m", "6", "--s", "1", "--k", "4", "--R", "1e6", "--n", "2049", "--solve"]);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let fit_u: f64 = row[15].parse().unwrap();
    let fit_v: f64 = row[16].parse().unwrap();
    assert!((fit_u + 1.0).abs() < 0.05 && (fit_v + 1.0).abs() < 0.05, "{row:?}");
    assert_eq!(row[17], "");
}

#[test]
fn jobs_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_gm-ext"))
        .args(["sweep", "--p", "5", "--q", "1", "--m", "6", "--s", "1", "--k", "4"])
        .env("GM_EXT_JOBS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
}

fn write_power_csv(path: &Path, power: i32) {
    let n = 1025;
    let mut text = String::from("r,w\n");
    for i in 0..n {
        let r = (i as f64 * 1e4f64.ln() / (n - 1) as f64).exp();
        text += &format!("{r:e},{:e}\n", r.powi(power));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn fit_recovers_a_synthetic_power_law() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    write_power_csv(&path, -2);
    let o = gm_ext(&["fit", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.starts_with("w: power -2.000000"), "{line}");
    let rms: f64 = line.split("rms ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(rms < 1e-12, "{line}");
    assert!(stderr(&o).is_empty());
}

#[test]
fn fit_warns_about_boundary_layers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    write_power_csv(&path, -2);
    let o = gm_ext(&["fit", path.to_str().unwrap(), "--window", "1.2:1e3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("boundary layer"), "{}", stderr(&o));
}

#[test]
fn fit_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("no_r.csv", "x,u\n1,2\n2,3\n"),
        ("text.csv", "r,u\n1,2\nx,3\n"),
        ("ragged.csv", "r,u\n1,2\n2\n"),
        ("not_log.csv", "r,u\n1,1\n2,1\n10,1\n"),
    ];
    for (name, body) in cases {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let o = gm_ext(&["fit", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(65), "{name}: {}", stderr(&o));
    }
    let missing = dir.path().join("missing.csv");
    assert_eq!(gm_ext(&["fit", missing.to_str().unwrap()]).status.code(), Some(74));
}

#[test]
fn fit_on_a_slow_inhibitor_run_matches_its_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let args = ["--p", "6", "--q", "2", "--m", "3", "--s", "1", "--k", "4"];
    let o = gm_ext(&with(&with(&["solve"], &args), &["--R", "1e8", "--n", "4097", "--out", out.to_str().unwrap()]));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = out.join("solution.csv");
    let o = gm_ext(&with(&with(&["fit", csv.to_str().unwrap()], &args), &[]));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("EXISTS_MINIMAL_GROWTH Thm2.2(iii)"), "{text}");
    let v_check = text.lines().skip_while(|l| !l.starts_with("v:")).nth(1).unwrap();
    assert!(v_check.contains("vs r^-0.5: PASS"), "{text}");
}

#[test]
fn probe_reports_floors_and_refuses_existence() {
    let o = gm_ext(&["probe", "--p", "5", "--q", "1", "--m", "2", "--s", "1", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("obstruction Thm2.1(ii)"), "{text}");
    assert_eq!(text.lines().filter(|l| l.contains("floor min")).count(), 3);
    assert!(text.contains("floor across R:"));

    let o = gm_ext(&with(&["probe"], &GM_MIN));
    assert_eq!(o.status.code(), Some(2));
}
