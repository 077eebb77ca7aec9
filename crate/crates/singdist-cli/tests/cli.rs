use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_singdist"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Tag balance plus the root element; enough to catch truncated or interleaved output.
fn assert_svg(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.trim_start().starts_with("<svg") || text.trim_start().starts_with("<?xml"), "{}", path.display());
    assert!(text.trim_end().ends_with("</svg>"), "{}", path.display());
    assert!(!text.contains("NaN") && !text.contains("inf"), "non-finite coordinates in {}", path.display());
    let opens = text.matches("<g").count() - text.matches("<g/").count();
    assert_eq!(opens, text.matches("</g>").count(), "{}", path.display());
}

#[test]
fn two_pose_sweep_writes_all_outputs() {
    let dir = scratch("two_pose");
    let out = bin()
        .args(["sweep", "--interp", "preliminary", "--poses", "2", "--workers", "2"])
        .arg("--input")
        .arg(data("example.json"))
        .arg("--out")
        .arg(dir.join("out"))
        .env("SINGDIST_CACHE", dir.join("cache"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["distances.csv", "distances.svg", "distance_preliminary.svg", "kpi.csv", "kpi.svg", "summary.json"] {
        assert!(dir.join("out").join(f).is_file(), "missing {f}");
    }
    let csv = std::fs::read_to_string(dir.join("out/distances.csv")).unwrap();
    let overall: Vec<&str> = csv.lines().filter(|l| l.contains(",overall,")).collect();
    assert_eq!(overall.len(), 2);
    let kpi = std::fs::read_to_string(dir.join("out/kpi.csv")).unwrap();
    assert_eq!(kpi.lines().count(), 3);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["ab_initio"][0]["achieved"], 50);
    // The environment variable redirects the start-solution cache.
    assert!(std::fs::read_dir(dir.join("cache")).unwrap().count() > 0);
    for f in ["distances.svg", "distance_preliminary.svg", "kpi.svg"] {
        assert_svg(&dir.join("out").join(f));
    }
}

#[test]
fn collapsed_design_is_a_config_error() {
    let dir = scratch("collapsed");
    let input = dir.join("bad.json");
    std::fs::write(
        &input,
        r#"{"design": {"x2": 0, "x3": 0, "y3": 0, "x5": 3, "x6": 1, "y6": 2},
            "motion": {"a0": [5.5, 1.5], "a1": [0, -1.5], "b1": [-3, 0], "v": 0, "w": 6.283185307179586, "n": 4}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "--interp", "preliminary"])
        .arg("--input")
        .arg(&input)
        .arg("--out")
        .arg(dir.join("out"))
        .arg("--cache")
        .arg(dir.join("cache"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_flags_are_config_errors() {
    let dir = scratch("flags");
    let run = |extra: &[&str]| {
        let out = bin()
            .args(["single", "--phi", "1.0"])
            .args(extra)
            .arg("--input")
            .arg(data("example.json"))
            .arg("--cache")
            .arg(dir.join("cache"))
            .output()
            .unwrap();
        code(&out)
    };
    assert_eq!(run(&["--interp", "bar-nothing"]), 2);
    assert_eq!(run(&["--interp", "bar-rigid", "--branches", "no-such-branch"]), 2);
    assert_eq!(run(&["--interp", "bar-bar", "--branches", "collapsed-platform"]), 2);
    assert_eq!(run(&["--workers", "0"]), 2);
}

#[test]
fn single_pose_draws_closest_configuration() {
    let dir = scratch("single");
    let out = bin()
        .args(["single", "--interp", "preliminary", "--phi", "0.8471710528"])
        .arg("--input")
        .arg(data("example.json"))
        .arg("--svg")
        .arg(dir.join("svg"))
        .env("SINGDIST_CACHE", dir.join("cache"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("preliminary φ = 0.8471710528: distance 0.75"), "{stdout}");
    assert_svg(&dir.join("svg/closest_preliminary.svg"));
}

#[test]
fn rrr_sweep_runs() {
    let dir = scratch("rrr");
    let out = bin()
        .args(["sweep", "--interp", "3rrr", "--poses", "2"])
        .arg("--input")
        .arg(data("rrr_example.json"))
        .arg("--out")
        .arg(dir.join("out"))
        .env("SINGDIST_CACHE", dir.join("cache"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("out/distances.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",3rrr,overall,")).count(), 2);
    assert_svg(&dir.join("out/distance_3rrr.svg"));
}
