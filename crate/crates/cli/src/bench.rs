//! Scan-time benchmark over synthetic registries.
//!
//! A fixture is one recipient, one announcement addressed to them and
//! `n - 1` decoys, all derived from the seed. Each repeat times a full scan
//! of the fixture with a monotonic clock; one untimed warm-up scan runs
//! first and also checks that exactly the target is found.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use pq_sap::lattice::sample::{domain, Xof};
use pq_sap::lattice::ParamSet;
use pq_sap::registry::Registry;
use pq_sap::sap::{generate_meta, scan_parallel, ViewTagWidth, ViewingKey};

use crate::error::{CliError, CliResult, Context};

/// The announcement counts measured when none are given.
pub const DEFAULT_GRID: [usize; 5] = [5000, 10000, 20000, 40000, 80000];

pub struct Fixture {
    pub registry: Registry,
    pub viewing_key: ViewingKey,
    pub target: u64,
}

fn derived(seed: &[u8], label: &[u8]) -> [u8; 32] {
    Xof::with_index(seed, domain::CLI_ENTROPY, label)
        .take(32)
        .try_into()
        .expect("32 bytes")
}

fn build_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn build_fixture(params: &ParamSet, n: usize, width: ViewTagWidth, seed: &[u8]) -> CliResult<Fixture> {
    if n == 0 {
        return Err(CliError::Usage("--announcements must be at least 1".into()));
    }
    let (keys, meta) = generate_meta(&derived(seed, b"recipient"), params).context(|| "recipient keys".into())?;
    let mut registry = Registry::in_memory(params, width);
    let ids = registry
        .synth_fill(n - 1, &[(meta, derived(seed, b"target"))], seed, build_threads())
        .context(|| "building the fixture registry".into())?;
    Ok(Fixture {
        registry,
        viewing_key: keys.viewing_key(),
        target: ids[0],
    })
}

fn scan_fixture(fixture: &Fixture, threads: usize) -> CliResult<pq_sap::sap::ScanOutcome> {
    let width = fixture.registry.view_tag_width();
    scan_parallel(&fixture.viewing_key, fixture.registry.entries(), width, threads).context(|| "scan".into())
}

/// One timed scan of the whole fixture, in milliseconds. Fails unless exactly
/// the target is found.
pub fn time_scan(fixture: &Fixture, threads: usize) -> CliResult<f64> {
    let start = Instant::now();
    let out = black_box(scan_fixture(fixture, threads)?);
    let elapsed = start.elapsed();
    let found: Vec<u64> = out.matches.iter().map(|m| m.index).collect();
    if found != [fixture.target] {
        return Err(CliError::Verification(format!(
            "fixture scan returned {found:?}, expected [{}]",
            fixture.target
        )));
    }
    Ok((elapsed.as_secs_f64() * 1e3).max(f64::MIN_POSITIVE))
}

/// Per-repeat scan times in milliseconds, after one untimed warm-up scan.
pub fn time_scans(fixture: &Fixture, repeats: usize, threads: usize) -> CliResult<Vec<f64>> {
    if repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    time_scan(fixture, threads)?;
    (0..repeats).map(|_| time_scan(fixture, threads)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub paramset: String,
    pub n_announcements: usize,
    pub vt_mode: String,
    pub repeats: usize,
    pub times_ms: Vec<f64>,
    pub mean_ms: f64,
    /// Sample standard deviation; 0 for a single repeat.
    pub stddev_ms: f64,
}

impl BenchReport {
    pub fn new(params: &ParamSet, n: usize, width: ViewTagWidth, times_ms: Vec<f64>) -> Self {
        let count = times_ms.len() as f64;
        let mean = times_ms.iter().sum::<f64>() / count;
        let var = if times_ms.len() > 1 {
            times_ms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (count - 1.0)
        } else {
            0.0
        };
        BenchReport {
            paramset: params.name.to_string(),
            n_announcements: n,
            vt_mode: width.as_str().to_string(),
            repeats: times_ms.len(),
            times_ms,
            mean_ms: mean,
            stddev_ms: var.sqrt(),
        }
    }
}

pub fn run(
    params: &ParamSet,
    n: usize,
    width: ViewTagWidth,
    repeats: usize,
    seed: &[u8],
    threads: usize,
) -> CliResult<(BenchReport, Fixture)> {
    let fixture = build_fixture(params, n, width, seed)?;
    let times = time_scans(&fixture, repeats, threads)?;
    Ok((BenchReport::new(params, n, width, times), fixture))
}

pub const CSV_HEADER: &str = "paramset,n_announcements,vt_mode,repeats,times_ms,mean_ms,stddev_ms";

/// CSV with the per-repeat times joined by `;` in one column.
pub fn to_csv(reports: &[BenchReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let times: Vec<String> = r.times_ms.iter().map(|t| format!("{t:.3}")).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{:.3},{:.3}\n",
            r.paramset,
            r.n_announcements,
            r.vt_mode,
            r.repeats,
            times.join(";"),
            r.mean_ms,
            r.stddev_ms
        ));
    }
    out
}

pub fn to_json(reports: &[BenchReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pq_sap::lattice::params::KYBER512;

    #[test]
    fn report_statistics() {
        let r = BenchReport::new(&KYBER512, 10, ViewTagWidth::OneByte, vec![1.0, 2.0, 3.0, 6.0]);
        assert_eq!(r.mean_ms, 3.0);
        // sample variance: (4 + 1 + 0 + 9) / 3
        assert!((r.stddev_ms - (14.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(r.repeats, 4);
        let one = BenchReport::new(&KYBER512, 10, ViewTagWidth::None, vec![5.0]);
        assert_eq!(one.stddev_ms, 0.0);
        assert_eq!(one.vt_mode, "none");
    }

    #[test]
    fn csv_and_json_schema() {
        let r = BenchReport::new(&KYBER512, 10, ViewTagWidth::FullHash, vec![1.5, 2.5]);
        let csv = to_csv(std::slice::from_ref(&r));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "kyber512,10,fullhash,2,1.500;2.500,2.000,0.707");
        let json: serde_json::Value = serde_json::from_str(&to_json(&[r])).unwrap();
        let obj = json[0].as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(
            keys,
            ["mean_ms", "n_announcements", "paramset", "repeats", "stddev_ms", "times_ms", "vt_mode"]
        );
    }

    #[test]
    fn small_bench_finds_target() {
        let (report, fixture) = run(&KYBER512, 50, ViewTagWidth::OneByte, 3, b"t", 1).unwrap();
        assert_eq!(report.times_ms.len(), 3);
        assert!(report.times_ms.iter().all(|&t| t > 0.0));
        assert_eq!(fixture.registry.len(), 50);
        let again = build_fixture(&KYBER512, 50, ViewTagWidth::OneByte, b"t").unwrap();
        assert_eq!(again.registry.to_bytes(), fixture.registry.to_bytes());
        assert!(build_fixture(&KYBER512, 0, ViewTagWidth::OneByte, b"t").is_err());
    }
}
