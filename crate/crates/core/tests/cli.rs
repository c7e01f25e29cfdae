use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frw-chiellini"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn assert_clean_csv(text: &str, header: &str) {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    let width = header.split(',').count();
    let mut rows = 0;
    for line in lines {
        let fields: Vec<_> = line.split(',').collect();
        assert_eq!(fields.len(), width, "row {line}");
        for f in &fields[..width - 1] {
            if !f.is_empty() {
                let x: f64 = f.parse().unwrap_or_else(|_| panic!("bad number {f:?}"));
                assert!(x.is_finite());
            }
        }
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn eval_writes_quantity_csv() {
    let o = run(&["eval", "--scenario", scenario("closed_harmonic.txt").to_str().unwrap(), "--quantity", "damped"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_clean_csv(&text, "eta,value,deriv1,deriv2,flag");
    assert!(!text.contains("NaN") && !text.contains("inf"));
}

#[test]
fn eval_flat_deceleration_is_gamma_bar() {
    let o = run(&["eval", "--scenario", scenario("flat_radiation.txt").to_str().unwrap(), "--quantity", "q"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_clean_csv(&text, "eta,a,a1,a2,H,q,rho,flag");
    for line in text.lines().skip(1) {
        let q: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!((q - 1.0).abs() < 1e-12);
    }
}

#[test]
fn eval_out_writes_named_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "eval",
        "--scenario",
        scenario("flat_damped.txt").to_str().unwrap(),
        "--quantity",
        "g",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("flat_damped_g.csv")).unwrap();
    assert_clean_csv(&text, "eta,value,deriv1,deriv2,flag");
}

#[test]
fn compare_passes_on_every_scenario() {
    let cases = [
        ("flat_radiation.txt", "scale-factor"),
        ("flat_damped.txt", "damped-ep"),
        ("flat_damped.txt", "undamped-scaled"),
        ("closed_ep_equilibrium.txt", "ep"),
        ("closed_harmonic.txt", "reduced-damped"),
        ("closed_dust_damping.txt", "linear-u"),
    ];
    for (file, eq) in cases {
        let o = run(&["compare", "--scenario", scenario(file).to_str().unwrap(), "--equation", eq]);
        let text = stdout(&o);
        assert!(o.status.success(), "{file} {eq}: {text}{}", String::from_utf8_lossy(&o.stderr));
        assert!(text.contains("result: PASS"));
    }
}

#[test]
fn compare_fails_with_impossible_tolerance() {
    let o = run(&[
        "compare",
        "--scenario",
        scenario("flat_damped.txt").to_str().unwrap(),
        "--equation",
        "damped-ep",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("result: FAIL"));
}

#[test]
fn figures_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["figures", "--out", d.path().to_str().unwrap(), "--samples", "120"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 11);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs between runs");
        let text = String::from_utf8(x).unwrap();
        assert!(!text.contains("NaN"), "{name:?}");
    }
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let broken = run(&["validate", "--inject-fault", "flip-damping-sign"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stdout(&broken).contains("FAIL chiellini-condition"));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(run(&["eval", "--scenario", "/no/such/file", "--quantity", "q"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let s = scenario("flat_damped.txt");
    assert_eq!(run(&["compare", "--scenario", s.to_str().unwrap(), "--equation", "bogus"]).status.code(), Some(2));
}

#[test]
fn scenario_keys_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    };
    let base = "curvature = open\ngamma = 4/3\nc1 = 1\neta_min = 0.1\neta_max = 1\nsamples = 10\n";
    let good = write("good.txt", base);
    assert_eq!(run(&["eval", "--scenario", good.to_str().unwrap(), "--quantity", "u"]).status.code(), Some(0));

    let unknown = write("unknown.txt", &format!("{base}colour = blue\n"));
    let o = run(&["eval", "--scenario", unknown.to_str().unwrap(), "--quantity", "u"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let duplicate = write("dup.txt", &format!("{base}c1 = 2\n"));
    assert_eq!(run(&["eval", "--scenario", duplicate.to_str().unwrap(), "--quantity", "u"]).status.code(), Some(2));

    let missing = write("missing.txt", "curvature = open\ngamma = 4/3\n");
    assert_eq!(run(&["eval", "--scenario", missing.to_str().unwrap(), "--quantity", "u"]).status.code(), Some(2));

    let reversed = write("rev.txt", &base.replace("eta_max = 1", "eta_max = 0.05"));
    assert_eq!(run(&["eval", "--scenario", reversed.to_str().unwrap(), "--quantity", "u"]).status.code(), Some(2));
}
