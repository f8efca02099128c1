use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mmsot(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmsot")).env("MMSOT_OUT", out).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn solve(out: &Path, space: &str, mu0: &str, mu1: &str) -> Output {
    let (s, a, b) = (fixture(space), fixture(mu0), fixture(mu1));
    mmsot(out, &["solve", "--space", s.to_str().unwrap(), "--mu0", a.to_str().unwrap(), "--mu1", b.to_str().unwrap()])
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn solve_between_diracs() {
    let dir = TempDir::new().unwrap();
    let o = solve(dir.path(), "path.json", "dirac_a.json", "dirac_c.json");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "w2 = 3"), "{s}");
    assert!(s.contains("W2^2 = 9"));
    assert!(s.contains("plan: induced by a map"));
    let plan = read(dir.path(), "plan.csv");
    assert_eq!(plan.lines().next(), Some("source_id,target_id,mass,squared_cost"));
    assert_eq!(plan.lines().count(), 2);
    let cert: serde_json::Value = serde_json::from_str(&read(dir.path(), "certificate.json")).unwrap();
    assert_eq!(cert["w2_squared_exact"], "9");
    assert_eq!(cert["certifies"], true);
    let geo: serde_json::Value = serde_json::from_str(&read(dir.path(), "geodesics.json")).unwrap();
    assert!(geo.to_string().contains("\"b\""), "the geodesic a → c passes through b");
}

#[test]
fn solve_tripod_branch_instance() {
    let dir = TempDir::new().unwrap();
    let o = solve(dir.path(), "tripod.json", "thirds_leg_a.json", "leaves_bc.json");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    // (5/4)² + (3/2)² + (7/4)² over three
    assert!(s.contains("W2^2 = 55/24"), "{s}");
    assert!(s.contains("not induced by a map"), "{s}");
}

#[test]
fn malformed_space_exits_2_with_line() {
    let dir = TempDir::new().unwrap();
    let o = solve(dir.path(), "malformed.json", "dirac_a.json", "dirac_c.json");
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("malformed.json") && e.contains("line 7"), "{e}");
}

#[test]
fn mass_mismatch_exits_3() {
    let dir = TempDir::new().unwrap();
    let half = dir.path().join("half.json");
    fs::write(&half, r#"{"weights": {"a": "1/2"}}"#).unwrap();
    let (s, b) = (fixture("path.json"), fixture("dirac_c.json"));
    let o = mmsot(
        dir.path(),
        &["solve", "--space", s.to_str().unwrap(), "--mu0", half.to_str().unwrap(), "--mu1", b.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = solve(dir.path(), "absent.json", "dirac_a.json", "dirac_c.json");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_scenario_exits_4() {
    let dir = TempDir::new().unwrap();
    let o = mmsot(dir.path(), &["scenario", "moebius"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("moebius"));
    let o = mmsot(dir.path(), &["scenario", "tripod", "--gadget", "bogus"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn gadget_on_other_scenario_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(mmsot(dir.path(), &["scenario", "fan", "--gadget", "mild1d_branch"]).status.code(), Some(2));
}

#[test]
fn scenario_tripod_gadget() {
    let dir = TempDir::new().unwrap();
    let o = mmsot(dir.path(), &["scenario", "tripod", "--gadget", "micro1d_two_diracs"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("findings: 2/2 hold"), "{s}");
    for f in ["mu0.json", "mu1.json", "plan.csv", "manifest.json", "space.json", "report.md"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(read(dir.path(), "report.md").contains("217/96"));
}

#[test]
fn scenario_fan_depth_12() {
    let dir = TempDir::new().unwrap();
    let o = mmsot(dir.path(), &["scenario", "fan", "--depth", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("findings: 4/4 hold"), "{s}");
    // 4096 - 158 words of 4096 lie within 3/10 of the mean
    assert!(s.contains("1969/2048"), "{s}");
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["name"], "fan");
    assert_eq!(manifest["parameters"]["depth"], 12);
    // the fan is too large to export densely
    assert!(!dir.path().join("space.json").exists());
    assert!(dir.path().join("fan_map.svg").exists());
}

#[test]
fn scenario_cusp_writes_report() {
    let dir = TempDir::new().unwrap();
    let o = mmsot(dir.path(), &["scenario", "cusp", "--grid", "1/32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read(dir.path(), "report.md");
    assert!(report.starts_with("# scenario cusp"));
    assert!(report.contains("## Findings (3/3 hold)"), "{report}");
    let defect = read(dir.path(), "defect.csv");
    assert_eq!(defect.lines().next(), Some("lambda,epsilon_hat,verdict"));
    assert_eq!(defect.lines().count(), 5);
}

#[test]
fn scenario_cusp_needs_divisible_grid_for_transport() {
    let dir = TempDir::new().unwrap();
    let o = mmsot(dir.path(), &["scenario", "cusp", "--grid", "1/30", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("[FAIL] uniform measures admit several optimal maps"));
}

#[test]
fn scenarios_hold_with_defaults() {
    for name in ["interval", "circle", "polyline", "tripod"] {
        let dir = TempDir::new().unwrap();
        let o = mmsot(dir.path(), &["scenario", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let s = stdout(&o);
        let last = s.lines().rfind(|l| l.starts_with("findings:")).unwrap();
        let (k, n) = last["findings: ".len()..].trim_end_matches(" hold").split_once('/').unwrap();
        assert_eq!(k, n, "{name}: {s}");
    }
}

#[test]
fn tangent_verdicts() {
    let dir = TempDir::new().unwrap();
    let o = mmsot(dir.path(), &["--no-plots", "scenario", "polyline"]);
    assert_eq!(o.status.code(), Some(0));
    let poly = dir.path().join("space.json");
    let o = mmsot(dir.path(), &["tangent", "--space", poly.to_str().unwrap(), "--point", "p1"]);
    assert!(stdout(&o).contains("verdict: line-tangent-consistent"), "{}", stdout(&o));
    assert!(dir.path().join("defect.svg").exists());

    let tri = fixture("tripod.json");
    let o = mmsot(dir.path(), &["tangent", "--space", tri.to_str().unwrap(), "--point", "o", "--schedule", "1,2"]);
    assert!(stdout(&o).contains("verdict: obstructed"), "{}", stdout(&o));

    let seg = fixture("segment.json");
    let o = mmsot(dir.path(), &["tangent", "--space", seg.to_str().unwrap(), "--point", "p", "--schedule", "8,16"]);
    assert!(stdout(&o).contains("verdict: inconclusive (degenerate ball"), "{}", stdout(&o));
}

#[test]
fn missing_point_exits_5() {
    let dir = TempDir::new().unwrap();
    let tri = fixture("tripod.json");
    let o = mmsot(dir.path(), &["tangent", "--space", tri.to_str().unwrap(), "--point", "zz"]);
    assert_eq!(o.status.code(), Some(5));
    let o = mmsot(dir.path(), &["curvature", "--space", tri.to_str().unwrap(), "--point", "zz"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn curvature_smoke() {
    let dir = TempDir::new().unwrap();
    let o = mmsot(dir.path(), &["scenario", "interval", "--no-plots"]);
    assert_eq!(o.status.code(), Some(0));
    let space = dir.path().join("space.json");
    let o = mmsot(dir.path(), &["curvature", "--space", space.to_str().unwrap(), "--point", "a~b#32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: nonincreasing"), "{}", stdout(&o));
    let o = mmsot(
        dir.path(),
        &["curvature", "--space", space.to_str().unwrap(), "--point", "a~b#32", "--profile", "constant:1"],
    );
    assert!(stdout(&o).contains("verdict: fails (ratio rises at r = "), "{}", stdout(&o));
    let ratio = read(dir.path(), "ratio.csv");
    assert_eq!(ratio.lines().next(), Some("r,ball_mass,w(r),ratio"));
    assert!(read(dir.path(), "polar.csv").starts_with("lo,hi,points,mass,density\n"));
    let o = mmsot(dir.path(), &["curvature", "--space", space.to_str().unwrap(), "--point", "a", "--profile", "cubic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gh_smoke() {
    let dir = TempDir::new().unwrap();
    let (x, y) = (fixture("triangle.json"), fixture("segment.json"));
    let o = mmsot(dir.path(), &["gh", "--x", x.to_str().unwrap(), "--y", y.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // three points at mutual distance 1 against two: any correspondence pairs two
    // of the three with one point, distortion 1
    assert!(stdout(&o).lines().any(|l| l == "gh = 0.5"), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "gh.json")).unwrap();
    assert_eq!(doc["gh"], 0.5);
}

#[test]
fn outputs_are_deterministic() {
    let runs: Vec<TempDir> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            let o = mmsot(dir.path(), &["scenario", "tripod"]);
            assert_eq!(o.status.code(), Some(0));
            let o = solve(dir.path(), "tripod.json", "thirds_leg_a.json", "leaves_bc.json");
            assert_eq!(o.status.code(), Some(0));
            dir
        })
        .collect();
    let mut names: Vec<String> =
        fs::read_dir(runs[0].path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert!(names.len() >= 7, "{names:?}");
    for name in names {
        assert_eq!(
            fs::read(runs[0].path().join(&name)).unwrap(),
            fs::read(runs[1].path().join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn out_flag_overrides_env() {
    let (env_dir, flag_dir) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let o = mmsot(env_dir.path(), &["--out", flag_dir.path().to_str().unwrap(), "scenario", "interval"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.path().join("report.md").exists());
    assert!(!env_dir.path().join("report.md").exists());
}
