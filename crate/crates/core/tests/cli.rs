use std::process::{Command, Output};

fn staircase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_staircase"))
        .args(args)
        .env_remove("STAIRCASE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn code_info_example_parameters() {
    let o = staircase(&["code-info", "--nu", "8", "--t", "2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for line in ["n = 256", "k = 239", "a = 128", "R = 0.8672", "d_min = 6"] {
        assert!(s.contains(line), "{s}");
    }
    let o = staircase(&["code-info", "--nu", "4", "--t", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"], 11);
    assert_eq!(v["a"], 8);
    assert_eq!(v["R"], 0.375);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["code-info", "--nu", "8", "--t", "2", "--a-check", "64"],
        vec!["code-info", "--nu", "4", "--t", "3"],
        vec!["simulate", "--preset", "example1"],
        vec!["simulate", "--preset", "nope", "--p", "0.01"],
        vec!["simulate", "--p", "0.6"],
        vec!["sweep", "--p-list", "0.01,0.03,0.02"],
        vec!["simulate", "--p", "0.01", "--config", "/nonexistent/file"],
        vec!["frobnicate"],
    ] {
        let o = staircase(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn selftest_exit_codes() {
    let ok = staircase(&["selftest"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = staircase(&["selftest", "--corrupt-generator"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).contains("FAIL bdd-oracle"));
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate",
        "--preset",
        "example1",
        "--decoder",
        "anchor",
        "--p",
        "0.004",
        "--seed",
        "7",
        "--max-blocks",
        "300",
    ];
    let a = staircase(&args);
    let b = staircase(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let s = stdout(&a);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("anchor,8,2,128,8,7,1,1,0.004,"));
}

#[test]
fn sweep_rows_and_threads() {
    let base = [
        "sweep",
        "--nu",
        "6",
        "--t",
        "2",
        "--W",
        "4",
        "--ell",
        "2",
        "--decoders",
        "conventional,anchor,genie",
        "--p-list",
        "0.03,0.035",
        "--max-blocks",
        "200",
        "--seed",
        "11",
    ];
    let one = staircase(&[&base[..], &["--threads", "1"]].concat());
    let three = staircase(&[&base[..], &["--threads", "3"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(stdout(&one).lines().count(), 1 + 6);
}

#[test]
fn seed_precedence_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "preset = example1\nW = 5\np = 0.003\nmax_blocks = 20\nformat = json\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_staircase"));
        c.args(["simulate", "--config", cfg])
            .args(extra)
            .env_remove("STAIRCASE_SEED");
        if let Some(e) = env {
            c.env("STAIRCASE_SEED", e);
        }
        let o = c.output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()[0].clone()
    };
    let v = run(&[], Some("31"));
    assert_eq!(
        (v["seed"].as_u64(), v["W"].as_u64(), v["T"].as_u64()),
        (Some(31), Some(5), Some(1))
    );
    let v = run(&["--seed", "4", "--W", "6", "--T", "inf"], Some("31"));
    assert_eq!(
        (v["seed"].as_u64(), v["W"].as_u64(), v["T"].as_str()),
        (Some(4), Some(6), Some("inf"))
    );

    let out = dir.path().join("rows.csv");
    let o = staircase(&[
        "simulate",
        "--config",
        cfg,
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("decoder,nu,t,a,W,ell,T,t_eff_last,p,eb_n0_db,seed,blocks,"));
}

#[test]
fn eb_n0_axis() {
    let o = staircase(&[
        "simulate",
        "--preset",
        "example1",
        "--eb-n0-db",
        "7",
        "--max-blocks",
        "10",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v[0]["eb_n0_db"].as_f64().unwrap() - 7.0).abs() < 1e-9);
    assert!(v[0]["p"].as_f64().unwrap() > 0.0);
}

#[test]
fn help_lists_preset() {
    let o = staircase(&["--help"]);
    let s = stdout(&o);
    assert!(s.contains("example1"));
    assert!(s.contains("STAIRCASE_SEED"));
}
