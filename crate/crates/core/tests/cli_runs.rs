use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn npolar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npolar")).args(args).current_dir(dir).output().unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn fig1_preset_sweep_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = npolar(&["fig1", "--trials", "1000", "--seed", "7", "--out", "fig1.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    assert!(text.starts_with("# npolar "));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 13);
    let eq: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(eq.windows(2).all(|w| w[0] <= w[1]), "{eq:?}");
    let script = fs::read_to_string(dir.path().join("fig1.gp")).unwrap();
    assert!(script.contains("'fig1.csv' using 1:2") && script.contains("using 1:3"));
}

#[test]
fn construct_profile_has_the_channel_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = npolar(&["construct", "n=3", "eps=0.5"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let z: Vec<f64> = data_rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(z.len(), 8);
    assert!((z.iter().sum::<f64>() / 8.0 - 0.5).abs() < 1e-12);
}

#[test]
fn selftest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = npolar(&["selftest"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("|A|=5 |B|=3: 0 mismatches") && text.contains("|A|=6 |B|=2: 0 mismatches"), "{text}");
}

#[test]
fn bad_configuration_is_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# sweep\nn = 8\ne_w = 0.1\n").unwrap();
    let out = npolar(&["wiretap-sweep", "--config", "run.cfg", "--out", "s.csv"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`e_w`"));

    let out = npolar(&["relay-sim", "bogus=1", "--out", "r.csv"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`bogus`"));

    let out = npolar(&["construct", "--threads", "0", "--out", "c.csv"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`threads`"));

    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers, vec![std::ffi::OsString::from("run.cfg")]);
}

#[test]
fn failed_write_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let out = npolar(&["construct", "n=3", "--out", "missing/dir/z.csv"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`out`"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["fig1", "--trials", "200"],
        &["wiretap-sweep", "n=8", "rate=0.2", "e_m=0.3", "e_w=0.6", "sweep_start=0.3", "sweep_stop=0.6", "sweep_step=0.05"],
        &["relay-sim", "n=8", "blocks=3", "--trials", "50"],
        &["construct", "channel=bsc", "p=0.2", "n=5", "--trials", "2000"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let mut bodies = Vec::new();
        for threads in ["1", "2", "1"] {
            let name = format!("o{k}_{threads}_{}.csv", bodies.len());
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--threads", threads, "--out", &name]);
            let out = npolar(&full, dir.path());
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            bodies.push(fs::read(dir.path().join(&name)).unwrap());
        }
        assert!(bodies.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}
