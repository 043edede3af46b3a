use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;

use glab::harness::{
    derive_seed, run_experiment, write_record, ExperimentConfig, HarnessError, Table,
};

const BATH: &str = r#"
kind = "bath-liom-sweep"
n_realizations = 4
master_seed = 7
output = "small_bath"

[bath]
n_bath = 3
J0 = 1.0
alpha = 0.75
W_Gf = 4.0
h_bounds = { lo = 0.5, hi = 1.5 }

[sweep]
variable = "n_loc"
values = [0, 1, 2, 3]
"#;

const DISTANCE: &str = r#"
kind = "distance-sweep"
n_realizations = 3
master_seed = 8
output = "small_distance"

[bath]
n_bath = 3
n_loc = 3
J0 = 1.0
alpha = 0.75
W_Gf = 4.0
h_bounds = { lo = 0.5, hi = 1.5 }
"#;

const CHAIN: &str = r#"
kind = "chain-spectrum"
n_realizations = 3
master_seed = 9
output = "small_chain"

[chain]
n_sites = 6
gamma = 1e-2
h_bounds = { lo = -1.0, hi = 1.0 }
Gamma_bounds = { lo = 0.5, hi = 1.5 }
J_bounds = { lo = -1.0, hi = 1.0 }

[sweep]
variable = "gamma"
values = [1e-2, 1.0]
"#;

const SW: &str = r#"
kind = "sw-step"
master_seed = 10
output = "small_sw"

[chain]
n_sites = 4
gamma = 1e-3
h_bounds = { lo = 2.0, hi = 3.0 }
Gamma_bounds = { lo = 0.5, hi = 1.5 }
J_bounds = { lo = -0.25, hi = 0.25 }

[sw]
steps = 2

[sweep]
variable = "gamma"
values = [1e-2, 1e-3]
"#;

const PERCOLATION: &str = r#"
kind = "percolation-1d"
n_realizations = 2
master_seed = 11
output = "small_percolation"

[chain]
n_sites = 1000
gamma = 1e-3
h_bounds = { lo = -1.0, hi = 1.0 }
Gamma_bounds = { lo = 0.5, hi = 1.5 }
J_bounds = { lo = -0.25, hi = 0.25 }

[sweep]
variable = "epsilon"
values = [1e-2, 0.1]
"#;

const CRITERIA: &str = r#"
kind = "criteria"
output = "small_criteria"

[criteria]
gamma = 0.5
bubble_diameters = [4.0]
dimensions = [1, 2]
bootstrap_distances = [8.0]

[bath]
n_bath = 5
J0 = 2.0
alpha = 0.5
W_Gf = 4.0
h_bounds = { lo = 0.5, hi = 1.5 }
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run_to(text: &str, dir: &PathBuf) -> Vec<(String, Vec<u8>)> {
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let record = run_experiment(&cfg).unwrap();
    write_record(&record, dir).unwrap();
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    for (k, text) in [BATH, DISTANCE, CHAIN, SW, PERCOLATION, CRITERIA].iter().enumerate() {
        let a = run_to(text, &scratch(&format!("rerun_a{k}")));
        let b = run_to(text, &scratch(&format!("rerun_b{k}")));
        assert!(!a.is_empty());
        assert_eq!(a, b, "config {k}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let one = run_to(BATH, &scratch("jobs_1"));
    let two = run_to(&BATH.replace("master_seed = 7", "master_seed = 7\njobs = 2"), &scratch("jobs_2"));
    let strip = |files: Vec<(String, Vec<u8>)>| {
        files.into_iter().filter(|(n, _)| n.ends_with(".csv")).collect::<Vec<_>>()
    };
    assert_eq!(strip(one), strip(two));
}

#[test]
fn output_columns_follow_the_schema() {
    let expect: [(&str, &str, &[&str]); 6] = [
        (BATH, "small_bath", &["sweep_value", "n_ok", "D_mean", "D_stderr", "r_mean", "r_stderr", "sumrule_max_residual"]),
        (DISTANCE, "small_distance", &["distance", "n_ok", "D_mean", "D_stderr", "sumrule_max_residual"]),
        (CHAIN, "small_chain", &["sweep_value", "n_ok", "r_mean", "r_stderr", "resonant_density_mean", "resonant_density_stderr"]),
        (SW, "small_sw", &["sweep_value", "realization", "step", "epsilon", "offdiag_norm", "perturbative_norm", "resonant_norm"]),
        (PERCOLATION, "small_percolation", &["sweep_value", "n_ok", "density_mean", "density_stderr", "mean_block_length", "max_block_length", "blocks_per_site", "union_bound"]),
        (CRITERIA, "small_criteria", &["quantity", "dimension", "parameter", "value"]),
    ];
    for (text, stem, columns) in expect {
        let dir = scratch(&format!("schema_{stem}"));
        run_to(text, &dir);
        let table = Table::read_csv(fs::File::open(dir.join(format!("{stem}.csv"))).unwrap()).unwrap();
        assert_eq!(table.columns, columns.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        assert!(!table.rows.is_empty());
        let sidecar: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.join(format!("{stem}.json"))).unwrap()).unwrap();
        assert_eq!(sidecar["csv"], format!("{stem}.csv"));
        assert_eq!(sidecar["columns"].as_array().unwrap().len(), columns.len());
        assert!(sidecar["config"].is_object());
    }
}

#[test]
fn bath_sweep_records_seeds_and_realizations() {
    let dir = scratch("bath_rows");
    run_to(BATH, &dir);
    let rows = Table::read_csv(fs::File::open(dir.join("small_bath_realizations.csv")).unwrap()).unwrap();
    assert_eq!(rows.rows.len(), 16);
    let seeds: Vec<f64> = rows.column("seed").unwrap();
    assert_eq!(seeds.len(), 16);
    let sidecar: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("small_bath.json")).unwrap()).unwrap();
    let s = &sidecar["seeds"];
    assert_eq!(s[2][3].as_u64().unwrap(), derive_seed(7, 3, 2));
    let table = Table::read_csv(fs::File::open(dir.join("small_bath.csv")).unwrap()).unwrap();
    assert!(table.column("sumrule_max_residual").unwrap().iter().all(|&x| x <= 1e-8));
    let d = table.column("D_mean").unwrap();
    assert_eq!(d.len(), 4);
    assert!(d.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn derived_seeds_do_not_collide() {
    let mut seen = HashSet::new();
    for sweep in 0..100u32 {
        for r in 0..100u32 {
            assert!(seen.insert(derive_seed(20240501, r, sweep)));
        }
    }
    assert_ne!(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
}

#[test]
fn config_errors_map_to_exit_codes() {
    let unknown = BATH.replace("master_seed = 7", "master_seed = 7\nbogus = 1");
    let e = ExperimentConfig::from_toml_str(&unknown).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let bad_alpha = BATH.replace("alpha = 0.75", "alpha = 1.5");
    let e = ExperimentConfig::from_toml_str(&bad_alpha).and_then(|c| run_experiment(&c)).unwrap_err();
    assert!(matches!(e, HarnessError::Config(_)));
    let too_big = BATH.replace("master_seed = 7", "master_seed = 7\nmax_dim = 32");
    let e = ExperimentConfig::from_toml_str(&too_big).and_then(|c| run_experiment(&c)).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    let missing = ExperimentConfig::from_file(std::path::Path::new("/nonexistent/cfg.toml")).unwrap_err();
    assert_eq!(missing.exit_code(), 2);
}

#[test]
fn shipped_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::from_file(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            cfg.validate().unwrap();
            count += 1;
        }
    }
    assert!(count >= 8);
}
