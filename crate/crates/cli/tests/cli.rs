use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pq_sap::sap::KeyFile;
use tempfile::TempDir;

fn pq_sap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pq-sap"))
        .args(args)
        .current_dir(dir)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = pq_sap(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn keygen(dir: &Path, prefix: &str, params: &str) {
    ok(dir, &["keygen", "--paramset", params, "--seed", prefix, "--out", prefix]);
}

fn send(dir: &Path, prefix: &str, registry: &str, seed: &str) -> (u64, String) {
    let meta = format!("{prefix}.meta.toml");
    let line = ok(dir, &["send", "--meta", &meta, "--registry", registry, "--seed", seed]);
    let (index, addr) = line.trim_end().split_once('\t').unwrap();
    (index.parse().unwrap(), addr.to_string())
}

fn scan(dir: &Path, key: &str, registry: &str, cursor: u64) -> Vec<String> {
    let c = cursor.to_string();
    ok(dir, &["scan", "--viewing-key", key, "--registry", registry, "--cursor", &c])
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn keygen_writes_three_parseable_files() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["keygen", "--paramset", "rlwe512", "--seed", "a", "--out", "alice"]);
    assert!(out.starts_with("params\trlwe512\n"));
    for (suffix, kind) in [("meta", "meta"), ("view", "viewing-key"), ("private", "private")] {
        let text = fs::read_to_string(tmp.path().join(format!("alice.{suffix}.toml"))).unwrap();
        let file = KeyFile::from_toml(&text).unwrap();
        assert_eq!(file.params().name, "rlwe512");
        assert!(text.contains(&format!("kind = \"{kind}\"")), "{text}");
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        for suffix in ["view", "private"] {
            let meta = fs::metadata(tmp.path().join(format!("alice.{suffix}.toml"))).unwrap();
            assert_eq!(meta.permissions().mode() & 0o777, 0o600);
        }
    }
}

#[test]
fn fixed_seed_keygen_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    keygen(a.path(), "k", "kyber768");
    keygen(b.path(), "k", "kyber768");
    for suffix in ["meta", "view", "private"] {
        let name = format!("k.{suffix}.toml");
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn send_then_scan_finds_the_payment() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    keygen(d, "bob", "kyber512");
    keygen(d, "carol", "kyber512");
    send(d, "carol", "reg.tsv", "s0");
    let (index, addr) = send(d, "bob", "reg.tsv", "s1");
    send(d, "carol", "reg.tsv", "s2");
    assert_eq!(index, 1);
    assert_eq!(addr.len(), 40);
    assert_eq!(scan(d, "bob.view.toml", "reg.tsv", 0), [format!("1\t{addr}"), "cursor\t3".into()]);
    // The private file also works as a viewing key.
    assert_eq!(scan(d, "bob.private.toml", "reg.tsv", 0)[0], format!("1\t{addr}"));
}

#[test]
fn empty_registry_and_incremental_rescan() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    keygen(d, "bob", "kyber512");
    fs::write(d.join("reg.tsv"), "#registry\tparams=kyber512\tview_tag=1\n").unwrap();
    assert_eq!(scan(d, "bob.view.toml", "reg.tsv", 0), ["cursor\t0"]);

    let (first, a1) = send(d, "bob", "reg.tsv", "one");
    let lines = scan(d, "bob.view.toml", "reg.tsv", 0);
    assert_eq!(lines, [format!("{first}\t{a1}"), "cursor\t1".into()]);

    let (second, a2) = send(d, "bob", "reg.tsv", "two");
    assert_eq!(scan(d, "bob.view.toml", "reg.tsv", 1), [format!("{second}\t{a2}"), "cursor\t2".into()]);
    assert_eq!(scan(d, "bob.view.toml", "reg.tsv", 2), ["cursor\t2"]);

    let out = pq_sap(d, &["scan", "--viewing-key", "bob.view.toml", "--registry", "reg.tsv", "--cursor", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_record_names_its_index() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    keygen(d, "bob", "kyber512");
    for i in 0..3 {
        send(d, "bob", "reg.tsv", &i.to_string());
    }
    let text = fs::read_to_string(d.join("reg.tsv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let fields: Vec<&str> = lines[2].split('\t').collect();
    lines[2] = format!("{}\t{}!!\t{}", fields[0], &fields[1][2..], fields[2]);
    fs::write(d.join("reg.tsv"), lines.join("\n") + "\n").unwrap();

    let out = pq_sap(d, &["scan", "--viewing-key", "bob.view.toml", "--registry", "reg.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("record 1"), "{err}");
}

#[test]
fn parameter_mismatch_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    keygen(d, "bob", "kyber512");
    keygen(d, "eve", "kyber768");
    send(d, "bob", "reg.tsv", "x");
    let out = pq_sap(d, &["scan", "--viewing-key", "eve.view.toml", "--registry", "reg.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kyber768"));
    let out = pq_sap(d, &["send", "--meta", "eve.meta.toml", "--registry", "reg.tsv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let out = pq_sap(d, &["keygen", "--paramset", "kyber9000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kyber9000"));
    keygen(d, "bob", "kyber512");
    let out = pq_sap(d, &["send", "--meta", "bob.meta.toml", "--registry", "r", "--view-tag", "2byte"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(pq_sap(d, &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn untagged_registry_leaves_the_tag_field_empty() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    keygen(d, "bob", "rlwe512");
    let meta = "bob.meta.toml";
    ok(d, &["send", "--meta", meta, "--registry", "reg.tsv", "--view-tag", "none", "--seed", "a"]);
    let (_, addr) = send(d, "bob", "reg.tsv", "b");
    let text = fs::read_to_string(d.join("reg.tsv")).unwrap();
    assert!(text.starts_with("#registry\tparams=rlwe512\tview_tag=0\n"));
    for line in text.lines().skip(1) {
        assert!(line.ends_with('\t'), "{line:?}");
    }
    let found = scan(d, "bob.view.toml", "reg.tsv", 0);
    assert_eq!(found.len(), 3);
    assert_eq!(found[1], format!("1\t{addr}"));
    // A different mode cannot be appended to an existing registry.
    let out = pq_sap(d, &["send", "--meta", meta, "--registry", "reg.tsv", "--view-tag", "1byte"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_passes_and_detects_injected_fault() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["selftest"]);
    assert!(out.lines().filter(|l| l.starts_with("PASS\t")).count() >= 14);
    assert!(!out.contains("FAIL"));

    let bad = pq_sap(tmp.path(), &["selftest", "--inject-fault", "compress-off-by-one"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text.contains("FAIL\tcompression-bound q=3329"), "{text}");
}

#[test]
fn bench_reports_repeats_and_mean() {
    let tmp = TempDir::new().unwrap();
    let out = ok(
        tmp.path(),
        &["bench", "--paramset", "kyber512", "--announcements", "40,60", "--repeats", "10", "--format", "json"],
    );
    let reports: serde_json::Value = serde_json::from_str(&out).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for (r, n) in reports.iter().zip([40, 60]) {
        assert_eq!(r["paramset"], "kyber512");
        assert_eq!(r["n_announcements"], n);
        assert_eq!(r["vt_mode"], "1byte");
        assert_eq!(r["repeats"], 10);
        let times: Vec<f64> = r["times_ms"].as_array().unwrap().iter().map(|t| t.as_f64().unwrap()).collect();
        assert_eq!(times.len(), 10);
        let mean = times.iter().sum::<f64>() / 10.0;
        assert!((mean - r["mean_ms"].as_f64().unwrap()).abs() < 1e-9);
        assert!(r["stddev_ms"].as_f64().unwrap() >= 0.0);
    }

    let csv = ok(tmp.path(), &["bench", "--announcements", "30", "--repeats", "2", "--view-tag", "none"]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("paramset,n_announcements,vt_mode,repeats,times_ms,mean_ms,stddev_ms")
    );
    assert!(lines.next().unwrap().starts_with("kyber512,30,none,2,"));
}

#[test]
fn bench_fixture_is_a_scannable_registry() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["bench", "--announcements", "25", "--repeats", "1", "--registry", "fixture.tsv"]);
    let text = fs::read_to_string(d.join("fixture.tsv")).unwrap();
    assert_eq!(text.lines().count(), 26);
    let out = pq_sap(d, &["bench", "--announcements", "5,6", "--registry", "f2.tsv"]);
    assert_eq!(out.status.code(), Some(2));
}
