use std::path::Path;
use std::process::{Command, Output};

fn wavespeed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavespeed"))
        .args(args)
        .env_remove("WAVESPEED_OUT")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

fn c_hat(text: &str) -> f64 {
    field(text, "c_hat")
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn classify_exit_codes() {
    let neg = wavespeed(&["classify", "11", "1", "3", "3"]);
    assert_eq!(neg.status.code(), Some(0));
    let text = stdout(&neg);
    assert_eq!(field(&text, "verdict"), "negative");
    let fired: Vec<&str> = field(&text, "fired").split(", ").collect();
    assert!(fired.contains(&"S1") && fired.contains(&"N1"), "{fired:?}");
    assert!(text.contains("kstar: 1.04545454545 < k* < 2.77200187266"));

    let sym = wavespeed(&["classify", "1", "1", "2", "2"]);
    assert_eq!(sym.status.code(), Some(2));
    assert_eq!(field(&stdout(&sym), "fired"), "none");

    let pos = wavespeed(&["classify", "0.4113", "1", "10.469", "25.733"]);
    assert_eq!(pos.status.code(), Some(1));
    assert_eq!(field(&stdout(&pos), "fired"), "pos1");

    let weak = wavespeed(&["classify", "1", "1", "1", "2"]);
    assert_eq!(weak.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&weak.stderr).contains("strong competition violated"));

    for bad in [
        &["classify", "-1", "1", "2", "2"][..],
        &["classify", "x", "1", "2", "2"],
        &["classify", "1", "1", "2"],
        &["frobnicate"],
    ] {
        assert_eq!(wavespeed(bad).status.code(), Some(64), "{bad:?}");
    }
    assert_eq!(wavespeed(&["--help"]).status.code(), Some(0));
}

#[test]
fn certify_paths() {
    let ok = wavespeed(&["certify", "11", "1", "3", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    assert!(field(&text, "candidate").starts_with("p = 2.77200187266"));
    assert_eq!(field(&text, "certified"), "true");

    let deg = wavespeed(&["certify", "--degenerate", "0.05", "1", "8", "2"]);
    assert_eq!(deg.status.code(), Some(0));
    let text = stdout(&deg);
    assert!(text.contains("jump phi'") && text.contains("jump psi'"));

    // above the envelope the same construction fails
    let over = wavespeed(&["certify", "--degenerate", "0.09", "1", "8", "2"]);
    assert_eq!(over.status.code(), Some(1));

    let none = wavespeed(&["certify", "1", "1", "1.1", "5"]);
    assert_eq!(none.status.code(), Some(4));
    assert!(stdout(&none).contains("hint: the reflected tuple"));

    let low = wavespeed(&["certify", "--degenerate", "0.05", "1", "3", "2"]);
    assert_eq!(low.status.code(), Some(4));

    let given = wavespeed(&["certify", "11", "1", "3", "3", "--p", "0.5", "--a", "1"]);
    assert_eq!(given.status.code(), Some(64));
    assert_eq!(
        wavespeed(&["certify", "11", "1", "3", "3", "--p", "2"])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn speed_reports() {
    let neg = wavespeed(&["speed", "11", "1", "3", "3", "--L", "100", "--t-end", "200"]);
    assert_eq!(neg.status.code(), Some(0));
    let text = stdout(&neg);
    assert!(c_hat(&text) < 0.0);
    assert_eq!(field(&text, "converged"), "true");
    assert!(field(&text, "theory").starts_with("negative"));
    assert!(!text.contains("DISAGREEMENT"));

    let sym = wavespeed(&["speed", "1", "1", "2", "2", "--L", "100", "--t-end", "200"]);
    assert!(c_hat(&stdout(&sym)).abs() <= 0.02);

    let rough = wavespeed(&["speed", "1.5", "1", "2", "2", "--dt", "4", "--t-end", "16"]);
    assert_eq!(rough.status.code(), Some(3));
    assert_eq!(field(&stdout(&rough), "converged"), "false");

    assert_eq!(
        wavespeed(&["speed", "11", "1", "3", "3", "--dt", "0"])
            .status
            .code(),
        Some(64)
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn scan_writes_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = [
        "scan", "--plane", "sym", "--xrange", "1:10", "--yrange", "1:4", "--nx", "91", "--ny", "31",
    ];
    let run = |out: &Path| {
        let mut full = args.to_vec();
        full.extend(["--out", out.to_str().unwrap()]);
        wavespeed(&full)
    };
    let first = run(&a);
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    for label in ["N1", "N2", "S1", "S2", "neg3", "pos1", "degenerate"] {
        assert!(
            text.lines()
                .any(|l| l.split_whitespace().next() == Some(label)),
            "{label}"
        );
    }
    assert_eq!(run(&b).status.code(), Some(0));
    let csv = read(&a.join("scan_sym.csv"));
    assert_eq!(csv, read(&b.join("scan_sym.csv")));
    assert_eq!(csv.lines().count(), 91 * 31 + 1);
    assert!(read(&a.join("scan_sym.svg")).trim_end().ends_with("</svg>"));

    let bad = wavespeed(&["scan", "--xrange", "5:1", "--out", a.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(64));
    let bad = wavespeed(&["scan", "--xrange", "5-1"]);
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn scan_config_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let from_file = dir.path().join("file");
    let from_env = dir.path().join("env");
    std::fs::write(
        &cfg,
        format!(
            "# k1d plane\nplane = k1d\nk2 = 3\nnx = 12\nny = 7\nlog = true\nout = {}\n",
            from_file.display()
        ),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = wavespeed(&["--config", cfg, "scan"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(&from_file.join("scan_k1d.csv"));
    assert_eq!(csv.lines().count(), 12 * 7 + 1);

    // flag beats file
    let out = wavespeed(&["scan", "--config", cfg, "--nx", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        read(&from_file.join("scan_k1d.csv")).lines().count(),
        5 * 7 + 1
    );

    // environment beats file for the output directory
    let out = Command::new(env!("CARGO_BIN_EXE_wavespeed"))
        .args(["--config", cfg, "scan"])
        .env("WAVESPEED_OUT", &from_env)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(from_env.join("scan_k1d.svg").exists());

    let broken = dir.path().join("broken.cfg");
    std::fs::write(&broken, "nx = many\n").unwrap();
    let out = wavespeed(&["--config", broken.to_str().unwrap(), "scan"]);
    assert_eq!(out.status.code(), Some(64));
    std::fs::write(&broken, "colour = red\n").unwrap();
    let out = wavespeed(&["--config", broken.to_str().unwrap(), "scan"]);
    assert_eq!(out.status.code(), Some(64));
}
