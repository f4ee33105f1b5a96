use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gadgetlab"))
        .args(args)
        .env("GADGETLAB_OUT", dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gadget_verify_writes_csv_with_manifest_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["gadget-verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("gadget_verify.csv")).unwrap();
    assert!(csv.starts_with("# subcommand = gadget-verify\n"));
    assert!(csv.contains("# epsilon = 0.02\n"));
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        data[0],
        "coefficient,closed_form,engine,exact_fit,rel_dev_closed,rel_dev_engine"
    );
    assert_eq!(data.len(), 7);
    let wsx: Vec<&str> = data
        .iter()
        .find(|l| l.starts_with("c_wsx"))
        .unwrap()
        .split(',')
        .collect();
    let closed: f64 = wsx[1].parse().unwrap();
    let fit: f64 = wsx[3].parse().unwrap();
    assert!(((fit - closed) / closed).abs() < 0.1);

    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("gadget-verify.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["subcommand"], "gadget-verify");
    assert_eq!(manifest["parameters"]["epsilon"], "0.02");
    assert_eq!(
        manifest["outputs"]["gadget_verify.csv"]
            .as_str()
            .unwrap()
            .len(),
        64
    );
}

#[test]
fn reruns_are_bit_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "backaction",
        "--regime=lattice",
        "--lambda=16",
        "--n-times=5",
        "--t-max=4",
    ];
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    assert_eq!(run(b.path(), &args).status.code(), Some(0));
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(
        read(a.path(), "backaction.csv"),
        read(b.path(), "backaction.csv")
    );
    assert_eq!(
        read(a.path(), "backaction.manifest.json"),
        read(b.path(), "backaction.manifest.json")
    );
}

#[test]
fn unknown_config_key_exits_2_naming_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# gadget\nepsilon = 0.03\nfrobnicate = 1\n").unwrap();
    let o = run(
        dir.path(),
        &["gadget-verify", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("frobnicate") && err.contains("line 3"),
        "{err}"
    );
}

#[test]
fn type_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "alpha = lots\n").unwrap();
    let o = run(dir.path(), &["gadget-verify", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`alpha`"));
    let o = run(dir.path(), &["thermo", "--l-values=8,x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "a = 0.2\nl = 4\n").unwrap();
    let o = run(
        dir.path(),
        &["coupling-matrix", "-c", cfg.to_str().unwrap(), "--l=3"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("coupling_matrix.csv")).unwrap();
    assert!(csv.contains("# a = 0.2\n") && csv.contains("# l = 3\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 81);
}

#[test]
fn empty_backaction_series_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["backaction", "--regime=fresnel", "--t-max=0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty series"), "{}", stderr(&o));
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["susceptibility", "--h-z=0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(
        dir.path(),
        &["metropolis-fig4", "--l-values=6", "--max-spins=1000"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("exceeds") || stderr(&o).contains("budget"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn help_lists_every_key_with_units() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["metropolis-fig4", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for k in [
        "--temperature <energy>",
        "--sweeps-measure <sweeps>",
        "--seed <integer>",
        "--l-values <plaquettes>",
    ] {
        assert!(text.contains(k), "missing {k}");
    }
}

#[test]
fn small_metropolis_run_records_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "metropolis-fig4",
            "--l-values=2",
            "--sweeps-thermalize=20",
            "--sweeps-measure=40",
            "--seed=7",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("metropolis_fig4.csv")).unwrap();
    assert!(csv.contains("# seed = 7\n"));
    let row = csv.lines().last().unwrap();
    let sx: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!(sx < 0.0);
}

#[test]
fn other_subcommands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["gadget-sweep", "--sweep-values=0.01,0.02"],
        vec!["susceptibility", "--lambda=16", "--r-max=4"],
        vec!["thermo", "--l-values=8,16"],
        vec!["backaction", "--regime=disk"],
        vec!["backaction", "--regime=infinite"],
        vec!["backaction", "--regime=distance", "--height=5"],
    ] {
        let o = run(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
}
