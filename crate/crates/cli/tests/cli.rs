use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(rel: &str) -> String {
    root().join("corpus").join(rel).to_string_lossy().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renorm")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn golden(name: &str, args: &[&str]) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stdout(args), want, "golden {name}");
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

fn fish_integrand(dir: &Path) -> String {
    let json = stdout(&["amplitude", "--theory", "phi4", "--graph", &corpus("phi4/fish.json")]);
    let p = dir.join("fish.json");
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().to_string()
}

#[test]
fn validate_summary() {
    let out = stdout(&["validate", &corpus("phi3/bubble_s0.json")]);
    assert_eq!(out.lines().next(), Some("L=1, 1PI=yes, ω=2"));
    let out = stdout(&["validate", "--theory", "phi4", &corpus("phi4/sunset.json")]);
    assert!(out.starts_with("L=2, 1PI=yes, ω=2"), "{out}");
}

#[test]
fn golden_outputs() {
    let nested = corpus("phi3/nested_self_energy.json");
    golden("validate_bubble.txt", &["validate", &corpus("phi3/bubble_s0.json")]);
    golden(
        "coproduct_nested_pair.txt",
        &["coproduct", "--space", "d", "--graph", &nested, "--pair", "edges=c2,c3", "--index", "0"],
    );
    golden("coproduct_overlapping.txt", &["coproduct", "--graph", &corpus("phi3/overlapping_self_energy.json")]);
    golden("pairs_nested.txt", &["pairs", "--graph", &nested]);
    golden("birkhoff_nested.txt", &["birkhoff", "--graph", &nested, "--window", "-2..1"]);
    golden("bubble.dot", &["export-dot", &corpus("phi3/bubble_s0.json")]);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let fish = fish_integrand(dir.path());
    let nested = corpus("phi3/nested_self_energy.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["coproduct", "--graph", &nested],
        vec!["birkhoff", "--graph", &nested, "--character", "synthetic:5", "--scheme", "taylor"],
        vec!["laurent", "--integrand", &fish, "--center", "4"],
        vec!["check", "--corpus", "PLACEHOLDER", "--suite", "coassociativity"],
    ];
    let corpus_dir = corpus("phi3");
    for mut args in cases {
        for a in args.iter_mut() {
            if *a == "PLACEHOLDER" {
                *a = &corpus_dir;
            }
        }
        assert_eq!(run(&args).stdout, run(&args).stdout, "{args:?}");
    }
}

#[test]
fn laurent_pole_of_the_bubble() {
    let dir = tempfile::tempdir().unwrap();
    let fish = fish_integrand(dir.path());
    let out = stdout(&["laurent", "--integrand", &fish, "--center", "4", "--window", "-2..2"]);
    let coeff = |n: i64| -> f64 {
        let tag = format!("a[{n}] = ");
        let line = out.lines().find(|l| l.starts_with(&tag)).unwrap();
        line[tag.len()..].parse().unwrap()
    };
    // π^{D/2} Γ(2 − D/2) at D = 4 + z has residue −2π² at z = 0.
    let oracle = -2.0 * PI * PI;
    assert!((coeff(-1) - oracle).abs() <= 1e-3 * oracle.abs(), "{out}");
    assert!(coeff(-2).abs() < 1e-6);
}

#[test]
fn integrate_modes() {
    let dir = tempfile::tempdir().unwrap();
    let fish = fish_integrand(dir.path());
    let out = stdout(&["integrate", "--integrand", &fish, "--d", "3"]);
    let v: f64 = out.trim().strip_prefix("value: ").unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((v - PI * PI).abs() < 1e-6 * PI * PI, "{out}");

    let form = dir.path().join("form.json");
    std::fs::write(&form, r#"{"matrix": [["2","1"],["1","3"]]}"#).unwrap();
    let form = form.to_string_lossy().to_string();
    let out = stdout(&["integrate", "--gaussian", &form, "--keep", "0", "--d", "2"]);
    assert!(out.contains("exponential: [[5/3]]"), "{out}");
    // ∫ exp(−3y²) d²y = π/3.
    assert!(out.contains(&format!("value: {} 0i", doubling::rational::fmt_sig(PI / 3.0, 12))), "{out}");
    let norm = stdout(&["integrate", "--gaussian", &form, "--keep", "0", "--d", "2", "--measure", "normalized"]);
    let want = PI / 3.0 / (2.0 * PI).powi(2);
    assert!(norm.contains(&format!("value: {} 0i", doubling::rational::fmt_sig(want, 12))), "{norm}");
}

#[test]
fn exit_codes_and_error_json() {
    let bubble = corpus("phi3/bubble_s0.json");
    let out = run(&["validate", &bubble, "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "parse");

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let out = run(&["validate", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["coproduct", "--space", "d", "--graph", &bubble, "--pair", "edges=nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "precondition");
    assert!(error_json(&out)["detail"].as_str().unwrap().contains("nope"));

    // φ³ graphs are not in φ⁴.
    let out = run(&["validate", "--theory", "phi4", &bubble]);
    assert_eq!(out.status.code(), Some(2));

    let fish = fish_integrand(dir.path());
    let out = run(&["integrate", "--integrand", &fish, "--d", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"], "numeric");
}

#[test]
fn check_reports_counts() {
    let out = stdout(&["check-group", "--corpus", &corpus("phi4")]);
    assert!(out.contains("failed: 0"), "{out}");
    let passed: usize = out.lines().find_map(|l| l.strip_prefix("passed: ")).unwrap().parse().unwrap();
    assert!(passed > 0);
}

#[test]
fn dot_export_lists_every_edge_and_leg() {
    let out = stdout(&["export-dot", &corpus("phi3/triangle.json")]);
    assert!(out.starts_with("graph \"triangle\" {"));
    assert_eq!(out.matches(" -- ").count(), 6);
    assert_eq!(out.matches("shape=point").count(), 3);
}
