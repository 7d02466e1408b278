use std::path::Path;
use std::process::{Command, Output};

fn iso3bp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iso3bp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no '{key}' in {text}"))
        .trim()
        .to_string()
}

const P0: [&str; 6] = ["--t", "2.6733789255846", "--a", "4.3170475352787", "--b", "1.490359743"];

#[test]
fn refine_seed_reaches_the_curve() {
    let mut args = vec!["refine-seed", "--kind", "odd-even"];
    args.extend(P0);
    let o = iso3bp(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let residual: f64 = field(&text, "residual").parse().unwrap();
    assert!(residual < 1e-9);

    let point = field(&text, "point");
    let coords: Vec<&str> = point.trim_matches(|c| c == '(' || c == ')').split(", ").collect();
    let again = iso3bp(&[
        "refine-seed", "--t", coords[0], "--a", coords[1], "--b", coords[2],
    ]);
    assert_eq!(field(&stdout(&again), "iterations"), "0");
    assert_eq!(field(&stdout(&again), "point"), point);
}

#[test]
fn garbage_seed_is_a_numerical_failure() {
    let o = iso3bp(&["refine-seed", "--t", "2.6733789255846", "--a", "0", "--b", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("iso3bp: no-convergence:"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(iso3bp(&["refine-seed", "--t", "1"]).status.code(), Some(2));
    assert_eq!(iso3bp(&["no-such-command"]).status.code(), Some(2));
    let o = iso3bp(&["render", "/nonexistent/branch.txt", "--plot", "ab"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_iso3bp"))
        .env("ISO3BP_THREADS", "many")
        .args(["verify-tables", "--rows", "22"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn integrate_writes_the_csv_columns() {
    let o = iso3bp(&["integrate", "--a", "2", "--b", "1", "--t-end", "3", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t,F,R,Fdot,Rdot,Theta");
    assert_eq!(text.lines().count(), 5);

    let o = iso3bp(&["integrate", "--a", "2", "--b", "1", "--t-end", "3", "--samples", "4", "--extended"]);
    let head = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(head, "t,F,R,Fdot,Rdot,Theta,x6,x7,x8,x9,x10,x11,x12,x13,x14,x15");
}

#[test]
fn trace_render_and_analyse_a_short_branch() {
    let dir = tempfile::tempdir().unwrap();
    let branch = dir.path().join("s1.txt");
    let branch_s = branch.to_str().unwrap();
    let mut args = vec!["trace-branch", "--k", "5", "--max-pillars", "4", "--out", branch_s];
    args.extend(P0);
    let o = iso3bp(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(&stderr(&o), "termination"), "max-pillars");
    assert_eq!(field(&stderr(&o), "pillars"), "4");
    let text = std::fs::read_to_string(&branch).unwrap();
    assert!(text.starts_with("iso3bp-branch 1\nkind odd-even\n"));

    let render = |out: &Path| {
        let o = iso3bp(&["render", branch_s, "--plot", "ab", "--markers", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let first = render(&dir.path().join("a.svg"));
    assert!(first.starts_with(b"<svg"));
    assert_eq!(first, render(&dir.path().join("b.svg")));

    // the short branch does not reach the crossing
    let o = iso3bp(&["find-bifurcation", branch_s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no-interior-minimum"), "{}", stderr(&o));

    let o = iso3bp(&["locate-periodic", branch_s, "--p", "100", "--q", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("target-out-of-range"), "{}", stderr(&o));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, text.replace("kind odd-even", "kind sideways")).unwrap();
    let o = iso3bp(&["find-bifurcation", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse"), "{}", stderr(&o));
}

#[test]
fn render_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eq.csv");
    let o = iso3bp(&[
        "integrate", "--a", "4.743416490252569", "--b", "0", "--t-end", "13.2", "--samples", "200",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = iso3bp(&["render", csv.to_str().unwrap(), "--plot", "xy"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = stdout(&o);
    let bounds = svg
        .split("data-label=\"body 2\" data-bounds=\"")
        .nth(1)
        .and_then(|s| s.split('"').next())
        .unwrap();
    let b: Vec<f64> = bounds.split(' ').map(|v| v.parse().unwrap()).collect();
    assert!((b[2] - b[0] - 20.0).abs() < 1e-3 && (b[3] - b[1] - 20.0).abs() < 1e-3, "{b:?}");
}

#[test]
fn verify_selected_rows() {
    let o = iso3bp(&["verify-tables", "--rows", "22,44"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("advisory"));
    assert!(text.contains("1/2 rows pass"));
}
