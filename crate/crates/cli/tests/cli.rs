use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CRITERIA: &str = r#"
kind = "criteria"
output = "crit"

[criteria]
gamma = 0.5
bubble_diameters = [4.0]
dimensions = [1]
bootstrap_distances = [8.0]

[bath]
n_bath = 5
J0 = 2.0
alpha = 0.5
W_Gf = 4.0
h_bounds = { lo = 0.5, hi = 1.5 }
"#;

const BATH: &str = r#"
kind = "bath-liom-sweep"
n_realizations = 2
master_seed = 3
output = "bath"

[bath]
n_bath = 2
J0 = 1.0
alpha = 0.75
W_Gf = 4.0
h_bounds = { lo = 0.5, hi = 1.5 }

[sweep]
variable = "n_loc"
values = [0, 1, 2]
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn glab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn criteria_prints_table_and_writes_files() {
    let dir = scratch("cli_criteria");
    let cfg = write_config(&dir, CRITERIA);
    let out_dir = dir.join("out");
    let out = glab(&["criteria", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("quantity\tdimension\tparameter\tvalue"));
    assert!(out_dir.join("crit.csv").exists());
    assert!(out_dir.join("crit.json").exists());
}

#[test]
fn seed_override_changes_results_and_reruns_match() {
    let dir = scratch("cli_seed");
    let cfg = write_config(&dir, BATH);
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.join(sub);
        let out = glab(&["bath-liom-sweep", "--config", &cfg, "--seed", seed, "--jobs", "2", "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_dir.join("bath.csv")).unwrap()
    };
    let a = run("5", "a");
    let b = run("5", "b");
    let c = run("6", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let json = fs::read_to_string(dir.join("a").join("bath.json")).unwrap();
    assert!(json.contains("\"master_seed\": 5"));
}

#[test]
fn exit_codes() {
    let dir = scratch("cli_exit");
    let bad = write_config(&dir, "kind = \"criteria\"\nnonsense = true\n");
    assert_eq!(glab(&["criteria", "--config", &bad]).status.code(), Some(2));

    let cfg = write_config(&dir, BATH);
    let out = glab(&["chain-spectrum", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bath-liom-sweep"));

    let big = write_config(&dir, &BATH.replace("master_seed = 3", "master_seed = 3\nmax_dim = 4"));
    assert_eq!(glab(&["bath-liom-sweep", "--config", &big]).status.code(), Some(3));

    let blocker = dir.join("occupied");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(&dir, CRITERIA);
    let out = glab(&["criteria", "--config", &cfg, "--out", blocker.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(glab(&["no-such-command"]).status.code(), Some(2));
}
