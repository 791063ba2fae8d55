use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfspace"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn print_matrix_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["condition", "--sigma1", "1", "--sigma2", "1", "--rho", "-0.8", "--eta", "1,2", "--print-matrix"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let m: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let s = 5f64.sqrt();
    let expected = [[-1.0 / s, -2.0 / s], [2.0 / s, 1.0 / s]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((m[i][j] - expected[i][j]).abs() < 1e-12, "{m:?}");
        }
    }
}

#[test]
fn enumeration_checks_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["check", "enum", "--n", "6", "--increments", "default2d"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("mismatched_pairs,0"));
    write(tmp.path(), "inc.csv", "weight,x1\n1/3,1\n0.5,-1\n1/6,0\n");
    let o = run(&["check", "enum", "--n", "5", "--increments", "inc.csv", "--format", "json"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], true);
    assert_eq!(v["summaries"]["sequences"], 243);
}

#[test]
fn zero_process_gives_constant_rows() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "zero.json", r#"{"drift": [0.0], "sigma": [[0.0]]}"#);
    let o = run(&["simulate", "--spec", "zero.json", "--horizon", "1", "--step", "0.25"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "t,x1,alive\n0,0,1\n0.25,0,1\n0.5,0,1\n0.75,0,1\n1,0,1\n");
}

#[test]
fn flags_override_config_and_seed_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bm.json", r#"{"drift": [0.0, 0.0], "sigma": [[1.0, 0.0], [0.0, 1.0]]}"#);
    write(tmp.path(), "cfg.json", r#"{"spec": "bm.json", "horizon": 2.0, "step": 0.25, "seed": 4}"#);
    let a = run(&["--config", "cfg.json", "simulate", "--horizon", "1"], tmp.path());
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a).lines().count(), 6);
    let b = run(&["--config", "cfg.json", "simulate", "--horizon", "1", "--seed", "4"], tmp.path());
    let c = run(&["--config", "cfg.json", "simulate", "--horizon", "1", "--seed", "5"], tmp.path());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    write(tmp.path(), "inline.json", r#"{"spec": {"drift": [0.0], "sigma": [[1.0]]}, "horizon": 1.0, "step": 0.5}"#);
    let d = run(&["--config", "inline.json", "simulate"], tmp.path());
    assert!(d.status.success(), "{}", stderr(&d));
}

fn single_line_error(o: &Output, needle: &str) {
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(o);
    assert_eq!(e.trim_end().lines().count(), 1, "{e}");
    assert!(e.contains(needle), "{e}");
}

#[test]
fn validation_errors_exit_one_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "zero.json", r#"{"drift": [0.0], "sigma": [[0.0]]}"#);
    write(tmp.path(), "bad.json", r#"{"horizon": 1.0, "bogus": 2}"#);
    single_line_error(&run(&["--config", "bad.json", "simulate", "--spec", "zero.json", "--step", "1"], tmp.path()), "bogus");
    single_line_error(&run(&["simulate", "--spec", "zero.json", "--horizon", "x", "--step", "1"], tmp.path()), "--horizon");
    single_line_error(&run(&["simulate", "--spec", "zero.json", "--horizon", "-1", "--step", "1"], tmp.path()), "horizon");
    single_line_error(&run(&["simulate", "--spec", "zero.json", "--horizon", "1"], tmp.path()), "step");
    single_line_error(&run(&["simulate", "--spec", "zero.json", "--horizon", "1", "--step", "1", "--nope"], tmp.path()), "--nope");
    write(tmp.path(), "neg.json", r#"{"drift": [0.0], "sigma": [[-1.0]]}"#);
    single_line_error(&run(&["simulate", "--spec", "neg.json", "--horizon", "1", "--step", "1"], tmp.path()), "sigma");
    write(tmp.path(), "typo.json", r#"{"drift": [0.0], "sigma": [[1.0]], "jump": null}"#);
    single_line_error(&run(&["simulate", "--spec", "typo.json", "--horizon", "1", "--step", "1"], tmp.path()), "jump");
    single_line_error(&run(&["condition", "--sigma1", "1", "--sigma2", "1", "--rho", "-0.8", "--eta", "1,2,3", "--print-matrix"], tmp.path()), "eta");
    single_line_error(&run(&["--threads", "0", "check", "enum", "--n", "2"], tmp.path()), "threads");
}

#[test]
fn failed_hard_check_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["check", "sparre", "--n-steps", "4", "--n-mc", "2000", "--alpha", "0.9999999"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run(&["check", "sparre", "--n-steps", "4", "--n-mc", "2000", "--alpha", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn split_reads_simulated_paths_in_both_formats() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bm.json", r#"{"drift": [0.0, 0.0], "sigma": [[1.0, 0.0], [0.0, 1.0]]}"#);
    let o = run(&["--out", "p", "simulate", "--spec", "bm.json", "--horizon", "1", "--step", "0.01"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["--out", "p", "--format", "json", "simulate", "--spec", "bm.json", "--horizon", "1", "--step", "0.01"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for file in ["p/simulate_0_path.csv", "p/simulate_0_path.json"] {
        let o = run(&["--format", "json", "split", "--mode", "infimum", "--eta", "1,2", "--path", file], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        let tau = v["tau_index"].as_u64().unwrap() as usize;
        assert_eq!(v["pre"]["points"].as_array().unwrap().len(), tau + 1);
        assert_eq!(v["post"]["points"].as_array().unwrap().len(), 101 - tau);
    }
    let o = run(&["--out", "s", "split", "--mode", "max-norm", "--path", "p/simulate_0_path.csv"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<String> = files(&tmp.path().join("s")).into_iter().map(|f| f.0).collect();
    assert_eq!(names, ["split_0_post.csv", "split_0_pre.csv"]);
}

#[test]
fn conditioned_paths_stay_in_the_half_space() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["--format", "json", "condition", "--sigma1", "1", "--sigma2", "2", "--rho", "0.3", "--eta", "1,-1", "--n-paths", "3", "--horizon", "1", "--step", "0.01"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let paths = v["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 3);
    for p in paths {
        for x in p["points"].as_array().unwrap().iter().skip(1) {
            assert!(x[0].as_f64().unwrap() - x[1].as_f64().unwrap() > 0.0);
        }
    }
    assert_eq!(v["config"]["options"]["n_paths"], 3);
}

#[test]
fn experiment_outputs_are_byte_identical_and_thread_independent() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bm.json", r#"{"drift": [0.0, 0.0], "sigma": [[1.0, -0.8], [-0.8, 1.0]]}"#);
    let zoom = ["experiment", "zoom", "--spec", "bm.json", "--eta", "1,2", "--n", "10", "--step", "0.01", "--n-rep", "60", "--n-perm", "99"];
    let maxnorm = ["experiment", "maxnorm", "--rho", "-0.8", "--n", "10", "--step", "0.005", "--n-rep", "60", "--n-perm", "99", "--kde-points", "11"];
    for (k, threads) in ["1", "2", "1"].iter().enumerate() {
        let out = format!("run{k}");
        for args in [&zoom[..], &maxnorm[..]] {
            let mut a = vec!["--seed", "11", "--threads", threads, "--out", &out, "--format", "json"];
            a.extend_from_slice(args);
            let o = run(&a, tmp.path());
            assert!(o.status.success(), "{}", stderr(&o));
        }
    }
    let first = files(&tmp.path().join("run0"));
    assert!(first.iter().any(|f| f.0 == "zoom_11_report.json"));
    assert!(first.iter().any(|f| f.0 == "maxnorm_11_kde_prelimit.csv"));
    assert!(first.iter().any(|f| f.0 == "zoom_11_post.csv"));
    assert_eq!(first, files(&tmp.path().join("run1")));
    assert_eq!(first, files(&tmp.path().join("run2")));
    let report: serde_json::Value = serde_json::from_slice(&first.iter().find(|f| f.0 == "zoom_11_report.json").unwrap().1).unwrap();
    assert_eq!(report["parameters"]["cli"]["options"]["n_rep"], 60);
    assert_eq!(report["master_seed"], 11);
}

#[test]
fn initial_jump_experiment_runs() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "cp.json",
        r#"{"drift": [-1.0], "sigma": [[0.0]], "jumps": {"rate": 2.0, "law": {"type": "finite", "params": {"atoms": [[1.0], [2.0]], "probs": [0.5, 0.5]}}}}"#,
    );
    let o = run(&["experiment", "initial-jump", "--spec", "cp.json", "--eta", "1", "--horizon", "20", "--step", "0.01", "--n-rep", "200"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("test.chi2_corrected.p_value"));
    let bm = r#"{"drift": [0.0], "sigma": [[1.0]]}"#;
    write(tmp.path(), "bm.json", bm);
    let o = run(&["experiment", "initial-jump", "--spec", "bm.json", "--eta", "1", "--horizon", "1", "--step", "0.01", "--n-rep", "10"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}
