use std::fs;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};

use twin_platform::reproduce::Campaign;
use twin_platform::server::{Platform, ServeError};

fn twin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twin"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("twin runs")
}

fn reproduce_into(campaign: Campaign, seed: u64, dir: &Path) -> Output {
    twin(&[
        "reproduce",
        campaign.as_str(),
        "--seed",
        &seed.to_string(),
        "--out",
        dir.to_str().unwrap(),
    ])
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reproduce_is_byte_identical_for_a_seed() {
    for c in Campaign::ALL {
        let (a, b, other) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let out = reproduce_into(c, 7, a.path());
        assert!(out.status.success(), "{c}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(reproduce_into(c, 7, b.path()).status.success());
        reproduce_into(c, 8, other.path());
        let (fa, fb, fo) = (read_dir(a.path()), read_dir(b.path()), read_dir(other.path()));
        assert_eq!(fa.len(), 5, "{c}");
        assert_eq!(fa, fb, "{c}: same seed, different output");
        let dataset = |files: &[(String, Vec<u8>)]| files.iter().find(|(n, _)| n.ends_with("dataset.csv")).unwrap().1.clone();
        assert_ne!(dataset(&fa), dataset(&fo), "{c}: seed has no effect");
    }
}

#[test]
fn reproduce_reports_the_published_figures() {
    let dir = tempfile::tempdir().unwrap();
    let out = reproduce_into(Campaign::BhgeMaintenance, 1, dir.path());
    assert!(out.status.success());
    let costs = fs::read_to_string(dir.path().join("bhge-maintenance-costs.txt")).unwrap();
    assert!(costs.contains("total 16.96%"), "{costs}");
    assert!(costs.contains("total 19.62%"), "{costs}");
    assert!(costs.contains("19204.58") && costs.contains("9005.42"));

    let out = reproduce_into(Campaign::BhgeMwp, 1, dir.path());
    assert!(out.status.success());
    let stats = fs::read_to_string(dir.path().join("bhge-mwp-stats.txt")).unwrap();
    assert!(stats.contains("-14.95 [-14.95]"), "{stats}");
    assert!(stats.contains("-22.27 [-22.27]"), "{stats}");

    let out = reproduce_into(Campaign::Carton, 1, dir.path());
    assert!(out.status.success());
    let checks = fs::read_to_string(dir.path().join("carton-checks.txt")).unwrap();
    assert!(!checks.contains("[FAIL]"), "{checks}");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("carton-report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 1);
}

#[test]
fn unknown_campaign_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = twin(&["reproduce", "bhge", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown campaign `bhge`"));
}

const BROKEN: &str = "seed = 1\n[[items]]\nid = \"M1\"\nname = \"press\n";

#[test]
fn malformed_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    fs::write(&path, BROKEN).unwrap();
    match Platform::load(&path) {
        Err(ServeError::Config(e)) => assert_eq!(e.line(), Some(4), "{e}"),
        Err(e) => panic!("expected a config error, got {e}"),
        Ok(_) => panic!("broken config loaded"),
    }

    let out = twin(&["serve", "--scenario", path.to_str().unwrap(), "--port", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn serve_refuses_an_occupied_port() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = twin(&["serve", "--port", &port, "--tick-ms", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&format!("port {port} is already in use")), "{err}");
}
