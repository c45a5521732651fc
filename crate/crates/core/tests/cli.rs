use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ebcsim::sod::EventStream;

fn ebcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebcsim")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.cfg");
    fs::write(
        &path,
        "# two realizations, three sampling rates\n\
         m_realizations = 2\n\
         w_mean_list = 325\n\
         n_os_list = 0.5, 1.0, 2.0\n\
         n_bits_list = [4, 8]\n\
         n_levels_list = 10, 40, 100\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn sweep_is_reproducible_and_report_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for (dir, threads) in [(&a, "1"), (&b, "2")] {
        let out = ebcsim(&["sweep", "--config", &cfg, "--seed", "5", "--out-dir", dir.to_str().unwrap(), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["fig4_325.csv", "fig5.csv", "fig6.csv", "comparison.csv", "records.csv", "run_manifest.json"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }

    let fig4 = String::from_utf8(read(&a, "fig4_325.csv")).unwrap();
    let mut lines = fig4.lines();
    assert_eq!(lines.next(), Some("system,n_bits,rate_hz,nmse"));
    assert_eq!(lines.count(), 3 + 3 * 2);

    let fig5 = String::from_utf8(read(&a, "fig5.csv")).unwrap();
    assert_eq!(fig5.lines().next(), Some("w_mean,target_nmse,p_rel"));
    assert_eq!(fig5.lines().count(), 1 + 25);
    for line in fig5.lines().skip(1) {
        let p = line.rsplit(',').next().unwrap();
        assert!(p == "NA" || p.parse::<f64>().is_ok(), "{line}");
    }

    let manifest: serde_json::Value = serde_json::from_slice(&read(&a, "run_manifest.json")).unwrap();
    assert_eq!(manifest["master_seed"], 5);
    assert_eq!(manifest["config"]["m_realizations"], 2);
    assert_eq!(manifest["grid_hashes"]["n_bits_list"].as_str().unwrap().len(), 64);

    let out = ebcsim(&["report", "--from", a.to_str().unwrap(), "--out-dir", c.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["fig5.csv", "fig6.csv", "comparison.csv"] {
        assert_eq!(read(&a, name), read(&c, name), "{name}");
    }
}

#[test]
fn json_config_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"m_realizations": 1, "w_mean_list": [775], "n_os_list": [2.0], "n_bits_list": [8], "n_levels_list": [20]}"#,
    )
    .unwrap();
    let out_dir = tmp.path().join("o");
    let out = ebcsim(&["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("fig4_775.csv").exists());
}

#[test]
fn signal_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sig");
    let out = ebcsim(&[
        "signal", "--seed", "3", "--w-mean", "325", "--n-levels", "30", "--n-os", "1.5", "--n-bits", "6",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("t,value"));
    assert_eq!(trace.lines().count(), 1 + 16_000);
    assert!(trace.lines().skip(1).all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap().abs() <= 4.0));

    let events = EventStream::from_text(&fs::read_to_string(dir.join("events.txt")).unwrap(), 1.0).unwrap();
    assert!(events.len() > 100);
    assert!(events.events.windows(2).all(|w| w[0].time < w[1].time));

    let symbols = fs::read_to_string(dir.join("symbols.txt")).unwrap();
    let idx: Vec<u32> = symbols.trim().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(idx.len(), 3000);
    assert!(idx.iter().all(|&i| i < 64));
}

#[test]
fn bad_inputs_fail_with_context() {
    let out = ebcsim(&["sweep", "--w-mean", "120", "--realizations", "1", "--out-dir", "/nonexistent/never"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the open interval"));

    let out = ebcsim(&["report", "--from", "/nonexistent/sweep"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/sweep"));
}
