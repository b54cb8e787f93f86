use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zakdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zakdd")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL_BER: &str = r#"{
  "params": { "m": 11, "n": 13, "nu_p": 30000 },
  "chirp": { "q": 5 },
  "channel": { "nu_max": 815, "trials": 6 },
  "powers": { "rho_d_db": 20, "pdr_db": [0, 10] },
  "modes": ["spread", "guard7x7"],
  "seed": 42
}"#;

#[test]
fn lattice_run_lists_known_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/lattice.json");
    let run = zakdd(&["lattice", "--config", config, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(out.join("lattice.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "k,l");
    assert_eq!(rows.len() - 1, 143);
    assert!(rows.contains(&"3,19") && rows.contains(&"8,3"));
    assert!(out.join("lattice.json").exists());
}

#[test]
fn sweeps_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ber.json", SMALL_BER);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let run = zakdd(&["ber_sweep", "--config", &config, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        outputs.push(fs::read_to_string(out.join("ber_sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let header = outputs[0].lines().next().unwrap();
    assert!(header.starts_with("seed,trial,nu_max,PDR_dB,rho_d_dB,mode,q,NMSE,BER,SIR_dB,throughput"));
    // Two modes, two PDR points, six trials each.
    assert_eq!(outputs[0].lines().count(), 1 + 2 * 2 * 6);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ber.json", SMALL_BER);
    let read = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let run = zakdd(&["ber_sweep", "--config", &config, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(run.status.success());
        let csv = fs::read_to_string(out.join("ber_sweep.csv")).unwrap();
        let sidecar = fs::read_to_string(out.join("ber_sweep.json")).unwrap();
        (csv, sidecar)
    };
    let (a, side) = read("7", "a");
    let (b, _) = read("8", "b");
    assert_ne!(a, b);
    assert!(a.lines().nth(1).unwrap().starts_with("7,0,"));
    assert!(side.contains("\"seed\": 7"));
}

#[test]
fn missing_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", r#"{ "params": { "m": 11, "n": 13 }, "seed": 1 }"#);
    let run = zakdd(&["lattice", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("nu_p"));
}

#[test]
fn invalid_values_and_usage_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let even = write_config(dir.path(), "even.json", r#"{ "params": { "m": 12, "n": 13, "nu_p": 1000 }, "seed": 1 }"#);
    let run = zakdd(&["lattice", "--config", &even]);
    assert_eq!(run.status.code(), Some(2));

    let run = zakdd(&["no_such_experiment", "--config", &even]);
    assert_eq!(run.status.code(), Some(2));
}
