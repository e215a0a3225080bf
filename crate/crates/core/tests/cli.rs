use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use icpmac::datagen::{read_dataset_csv, simplex_codebook, write_dataset_csv};
use icpmac::format::fmt10;
use icpmac::harness::builtin;
use icpmac::{bound_data_dependent, sent_signal, Coefficients, Environment, SupportSet};
use ndarray::array;

fn icpmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icpmac"))
        .args(args)
        .env_remove("ICPMAC_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut v = serde_json::to_value(builtin("fig1a").unwrap()).unwrap();
    v["trials"] = 25.into();
    v["grid"] = serde_json::json!({"sample_sizes": [2, 20]});
    v["output"] = dir.join("out.csv").to_str().unwrap().into();
    edit(&mut v);
    let path = dir.join("config.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |_| {});
    let out = icpmac(&["experiment", p(&config)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = dir.path().join("out.csv");
    assert_eq!(stdout(&out), format!("{}\ntrials: 50\n", csv.display()));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with(icpmac::harness::CSV_HEADER));
}

#[test]
fn experiment_overrides_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |_| {});
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for target in [&a, &b] {
        let out = icpmac(&["experiment", p(&config), "--seed", "7", "--trials", "10", "--output", p(target), "--keep-trials"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let trials = std::fs::read_to_string(dir.path().join("a.trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 10 * 2);
    let diag = std::fs::read_to_string(dir.path().join("a.diagnostics.csv")).unwrap();
    assert!(diag.contains(icpmac::harness::MII_TEST_NOTE));
    assert!(std::fs::read_to_string(&a).unwrap().contains(",10,7,"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |v| v["generator"] = "sem-unknown".into());
    let mut files = Vec::new();
    for threads in ["1", "4"] {
        let target = dir.path().join(format!("t{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_icpmac"))
            .args(["experiment", p(&config), "--output", p(&target)])
            .env("ICPMAC_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(0));
        files.push(std::fs::read(target).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(fn(&mut serde_json::Value), &str); 4] = [
        (|v| v["trials"] = 0.into(), "trials"),
        (|v| v["colour"] = "red".into(), "colour"),
        (|v| v["decoders"][0]["method"] = "lingam".into(), "decoders[0]"),
        (|v| v["sigma"] = "one".into(), "sigma"),
    ];
    for (edit, field) in cases {
        let config = write_config(dir.path(), edit);
        let out = icpmac(&["experiment", p(&config)]);
        assert_eq!(out.status.code(), Some(2), "{field}");
        assert!(stderr(&out).contains(field), "{field}: {}", stderr(&out));
    }
}

#[test]
fn io_errors_exit_1() {
    let out = icpmac(&["experiment", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |v| v["output"] = "/nonexistent/dir/out.csv".into());
    assert_eq!(icpmac(&["experiment", p(&config)]).status.code(), Some(1));
}

#[test]
fn bad_thread_variable_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |_| {});
    let out = Command::new(env!("CARGO_BIN_EXE_icpmac"))
        .args(["experiment", p(&config)])
        .env("ICPMAC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn dataset(dir: &Path, envs: &[Environment]) -> (PathBuf, PathBuf) {
    let (x, y) = (dir.join("x.csv"), dir.join("y.csv"));
    write_dataset_csv(envs, &x, &y).unwrap();
    (x, y)
}

#[test]
fn bounds_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let env = simplex_codebook::<f64>(0, 4).unwrap();
    let w = Coefficients::ones(3);
    let y = sent_signal(&env, &w, SupportSet::EMPTY).unwrap();
    let env = env.with_response(y).unwrap();
    let mut twin = env.clone();
    twin.env_id = 1;
    let (x, yp) = dataset(dir.path(), &[env.clone(), twin]);
    let out = icpmac(&["bounds", "--x", p(&x), "--y", p(&yp), "--w", "1,1,1", "--sigma-min", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "env,prop1,prop2,cor1,prop3,cor2");
    assert_eq!(lines[1][1..], lines[2][1..]);
    let expected = fmt10(bound_data_dependent(&env, &w, 1.0).unwrap());
    let overall: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(overall[0], "overall");
    assert_eq!(overall[1], expected);

    let declared = icpmac(&["bounds", "--x", p(&x), "--w", "1,1,1", "--sigma-min", "1", "--p-e", "1", "--q-e", "0.75"]);
    assert_eq!(declared.status.code(), Some(0));
    for (a, b) in stdout(&declared).lines().zip(text.lines()).skip(1) {
        for (u, v) in a.split(',').zip(b.split(',')).skip(1) {
            let (u, v): (f64, f64) = (u.parse().unwrap(), v.parse().unwrap());
            assert!((u - v).abs() <= 1e-9 * v, "{a} vs {b}");
        }
    }
}

#[test]
fn bounds_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    let env = simplex_codebook::<f64>(0, 4).unwrap();
    let (x, _) = dataset(dir.path(), &[env.with_response(array![0.0, 0.0, 0.0, 0.0]).unwrap()]);
    let missing_w = icpmac(&["bounds", "--x", p(&x), "--sigma-min", "1"]);
    assert_eq!(missing_w.status.code(), Some(2));
    assert!(stderr(&missing_w).contains("Usage"));
    let wrong_len = icpmac(&["bounds", "--x", p(&x), "--w", "1,1", "--sigma-min", "1"]);
    assert_eq!(wrong_len.status.code(), Some(2));
    let half_budget = icpmac(&["bounds", "--x", p(&x), "--w", "1,1,1", "--sigma-min", "1", "--p-e", "1"]);
    assert_eq!(half_budget.status.code(), Some(2));
    std::fs::write(&x, "env,row,x1\n0,0,abc\n").unwrap();
    let malformed = icpmac(&["bounds", "--x", p(&x), "--w", "1", "--sigma-min", "1"]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(stderr(&malformed).contains(":2:"), "{}", stderr(&malformed));
}

fn noiseless(truth: SupportSet) -> Vec<Environment> {
    let w = Coefficients::new(vec![0.9, 1.3, 0.6]).unwrap();
    let xs = [
        array![[0.31, -1.27, 2.05], [1.13, 0.42, -0.71], [-0.57, 0.93, 0.22], [0.8, 0.1, -0.4]],
        array![[1.31, 0.27, -0.05], [0.13, 1.42, 0.71], [0.57, -0.93, 1.22], [-0.8, 0.6, 0.4]],
    ];
    xs.into_iter()
        .enumerate()
        .map(|(e, x)| {
            let env = Environment::new(e, x).unwrap();
            let y = sent_signal(&env, &w, truth).unwrap();
            env.with_response(y).unwrap()
        })
        .collect()
}

#[test]
fn decode_commands() {
    let dir = tempfile::tempdir().unwrap();
    let truth = SupportSet::from_indices([1, 3]).unwrap();
    let (x, y) = dataset(dir.path(), &noiseless(truth));
    let run = |extra: &[&str]| {
        let mut args = vec!["decode", "--x", p(&x), "--y", p(&y)];
        args.extend_from_slice(extra);
        icpmac(&args)
    };
    for method in ["icp_mdd_known", "mii_known"] {
        let out = run(&["--method", method, "--w", "0.9,1.3,0.6"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        if method == "icp_mdd_known" {
            assert_eq!(stdout(&out), "[1,3]\n");
        }
    }
    // Only exact fits reach a zero threshold, however large p is.
    for level in ["0.05", "1e6"] {
        assert_eq!(stdout(&run(&["--method", "icp_mdd", "--p", level])), "[1,3]\n");
    }
    assert_eq!(run(&["--method", "icp_mdd"]).status.code(), Some(2));
    assert_eq!(run(&["--method", "icp_mdd_known"]).status.code(), Some(2));
    assert_eq!(run(&["--method", "lingam"]).status.code(), Some(2));
}

#[test]
fn decode_reports_abstention() {
    let dir = tempfile::tempdir().unwrap();
    let x0 = array![[1.0, 0.0], [0.0, 1.0]];
    let envs = [
        Environment::new(0, x0.clone()).unwrap().with_response(array![1.0, 0.0]).unwrap(),
        Environment::new(1, x0).unwrap().with_response(array![0.0, 1.0]).unwrap(),
    ];
    let (x, y) = dataset(dir.path(), &envs);
    let out = icpmac(&["decode", "--x", p(&x), "--y", p(&y), "--method", "icp_mdd_known", "--w", "1,1"]);
    assert_eq!(stdout(&out), "NONE\n");
}

#[test]
fn dataset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let envs = noiseless(SupportSet::from_indices([2]).unwrap());
    let (x, y) = dataset(dir.path(), &envs);
    let back = read_dataset_csv(&x, Some(&y)).unwrap();
    assert_eq!(back.len(), envs.len());
    for (a, b) in envs.iter().zip(&back) {
        assert_eq!(a.env_id, b.env_id);
        for (u, v) in a.x().iter().chain(a.y().unwrap()).zip(b.x().iter().chain(b.y().unwrap())) {
            assert_eq!(fmt10(*u), fmt10(*v));
        }
    }
}

#[test]
fn huge_level_accepts_everything() {
    let dir = tempfile::tempdir().unwrap();
    let envs: Vec<Environment> = noiseless(SupportSet::from_indices([1, 3]).unwrap())
        .into_iter()
        .map(|env| {
            let y = env.y().unwrap() + &array![0.05, -0.03, 0.02, 0.04];
            env.with_response(y).unwrap()
        })
        .collect();
    let (x, y) = dataset(dir.path(), &envs);
    let out = icpmac(&["decode", "--x", p(&x), "--y", p(&y), "--method", "icp_mdd", "--p", "1e6"]);
    assert_eq!(stdout(&out), "[]\n");
}
