use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_bogolab");

fn bogolab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn noninteracting_compare_row() {
    let out = bogolab(&[
        "compare",
        "--set",
        "n_particles=4",
        "--set",
        "modes=8",
        "--set",
        "coupling=0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "g,N,M,E_exact,E_gp,E_bog,gap1_exact,eps1_bog,depletion_bog,fc_exact,fc_bog,mu,status\n\
         0,4,8,2,2,2,1,1,0,1,1,0.5,ok\n"
    );
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "n_particles = 3\nmodes = 6\ncoupling_start = 0\ncoupling_stop = 0.3\ncoupling_steps = 3\n",
    );
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let set = format!("output_path={}", path.display());
        let out = bogolab(&["compare", "--config", &config, "--set", &set]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 5);
}

#[test]
fn overrides_win_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "n_particles = 2\nmodes = 3\ncoupling = 0.5\n");
    let out = bogolab(&["compare", "--config", &config, "--set", "coupling=0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("0,2,3,1,1,1,"), "{text}");
}

#[test]
fn json_output_uses_comparison_keys() {
    let out = bogolab(&[
        "compare",
        "--set",
        "n_particles=2",
        "--set",
        "modes=3",
        "--set",
        "output_format=json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&String> = v[0].as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        [
            "g",
            "N",
            "M",
            "E_exact",
            "E_gp",
            "E_bog",
            "gap1_exact",
            "eps1_bog",
            "depletion_bog",
            "fc_exact",
            "fc_bog",
            "mu",
            "status"
        ]
    );
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "modes = 4\ncouplng = 0.2\n");
    let out = bogolab(&["compare", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("couplng"), "{err}");

    assert_eq!(bogolab(&["bogoliubov", "--set", "modes=1"]).status.code(), Some(2));
    assert_eq!(bogolab(&["exact", "--set", "gp_tol=-1"]).status.code(), Some(2));
    assert_eq!(bogolab(&["compare", "--set", "coupling"]).status.code(), Some(2));
}

#[test]
fn capacity_exits_3() {
    let out = bogolab(&["exact", "--set", "n_particles=40", "--set", "modes=40"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn instability_exits_4_outside_sweeps() {
    let out = bogolab(&[
        "bogoliubov",
        "--set",
        "n_particles=6",
        "--set",
        "modes=8",
        "--set",
        "coupling=-1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("instability"));
}

#[test]
fn unwritable_output_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("rows.csv");
    let set = format!("output_path={}", path.display());
    let out = bogolab(&["compare", "--set", "n_particles=2", "--set", "modes=3", "--set", &set]);
    assert_eq!(out.status.code(), Some(5));
    assert!(!path.exists());
}

#[test]
fn sweep_tolerates_unstable_rows() {
    let out = bogolab(&[
        "sweep",
        "--set",
        "n_particles=3",
        "--set",
        "modes=4",
        "--set",
        "coupling_start=-4",
        "--set",
        "coupling_stop=0",
        "--set",
        "coupling_steps=1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[..3].iter().any(|r| !r.ends_with(",ok")), "{text}");
    assert!(rows[3..].iter().all(|r| r.ends_with(",ok")), "{text}");
}

#[test]
fn dumps_operator_and_tensor() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("h.csv");
    let tensor = dir.path().join("t.csv");
    let out = bogolab(&[
        "exact",
        "--set",
        "n_particles=2",
        "--set",
        "modes=3",
        "--set",
        "coupling=0.5",
        "--dump-operator",
        op.to_str().unwrap(),
        "--dump-tensor",
        tensor.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(op).unwrap().starts_with("row,col,value\n"));
    assert!(std::fs::read_to_string(tensor).unwrap().starts_with("i,j,k,l,value\n"));
}
