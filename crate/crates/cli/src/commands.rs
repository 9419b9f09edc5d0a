use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::rngs::OsRng;
use rand::RngCore;

use pq_sap::lattice::sample::{domain, Xof};
use pq_sap::registry::Registry;
use pq_sap::sap::{generate_meta, scan_parallel, send, KeyFile};

use crate::bench;
use crate::error::{io_err, CliError, CliResult, Context};
use crate::selftest;
use crate::{BenchArgs, Command, Format, KeygenArgs, ScanArgs, SelftestArgs, SendArgs};

pub(crate) fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Keygen(a) => keygen(a, out),
        Command::Send(a) => send_cmd(a, out),
        Command::Scan(a) => scan_cmd(a, out, err),
        Command::Bench(a) => bench_cmd(a, out),
        Command::Selftest(a) => selftest_cmd(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(io_err(Path::new("<stdout>")))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &[u8], private: bool) -> CliResult<()> {
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    if private {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut f = opts.open(path).map_err(io_err(path))?;
    #[cfg(unix)]
    if private {
        // the mode above only applies when the file is newly created
        use std::os::unix::fs::PermissionsExt;
        f.set_permissions(fs::Permissions::from_mode(0o600)).map_err(io_err(path))?;
    }
    f.write_all(contents).map_err(io_err(path))?;
    f.sync_all().map_err(io_err(path))
}

fn load_keyfile(path: &Path) -> CliResult<KeyFile> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    KeyFile::from_toml(&text).context(|| path.display().to_string())
}

fn random_bytes() -> Vec<u8> {
    let mut b = vec![0u8; 32];
    OsRng.fill_bytes(&mut b);
    b
}

fn keygen(a: KeygenArgs, out: &mut dyn Write) -> CliResult<()> {
    let seed = a.seed.map_or_else(random_bytes, String::into_bytes);
    let (keys, meta) = generate_meta(&seed, &a.paramset).context(|| "key generation".into())?;
    let files = [
        ("meta", with_suffix(&a.out, ".meta.toml"), KeyFile::Meta(meta), false),
        ("viewing-key", with_suffix(&a.out, ".view.toml"), KeyFile::Viewing(keys.viewing_key()), true),
        ("private", with_suffix(&a.out, ".private.toml"), KeyFile::Private(keys), true),
    ];
    let mut report = format!("params\t{}\n", a.paramset.name);
    for (label, path, file, private) in files {
        write_file(&path, file.to_toml().as_bytes(), private)?;
        report.push_str(&format!("{label}\t{}\n", path.display()));
    }
    emit(out, &report)
}

fn send_cmd(a: SendArgs, out: &mut dyn Write) -> CliResult<()> {
    let meta = load_keyfile(&a.meta)?.meta();
    let entropy: Option<[u8; 32]> = a.seed.map(|s| {
        Xof::with_index(s.as_bytes(), domain::CLI_ENTROPY, b"send")
            .take(32)
            .try_into()
            .expect("32 bytes")
    });
    let path = &a.registry;
    let mut registry = if path.exists() {
        Registry::open_for_append(path)
    } else {
        Registry::create(path, meta.params(), a.view_tag.unwrap_or_default())
    }
    .context(|| path.display().to_string())?;
    if registry.params() != meta.params() {
        return Err(CliError::Core {
            context: path.display().to_string(),
            source: pq_sap::Error::ParamMismatch {
                expected: registry.params().name.into(),
                actual: meta.params().name.into(),
            },
        });
    }
    if let Some(w) = a.view_tag {
        if w != registry.view_tag_width() {
            return Err(CliError::Usage(format!(
                "registry {} uses view tag mode {}, not {w}",
                path.display(),
                registry.view_tag_width()
            )));
        }
    }
    let (ann, stealth) = send(&meta, entropy.as_ref(), registry.view_tag_width()).context(|| "send".into())?;
    let index = registry.publish(ann).context(|| path.display().to_string())?;
    emit(out, &format!("{index}\t{}\n", stealth.address))
}

fn scan_cmd(a: ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let key = load_keyfile(&a.viewing_key)?.viewing_key().ok_or_else(|| {
        CliError::Usage(format!(
            "{} is a meta-address; scanning needs a viewing-key or private file",
            a.viewing_key.display()
        ))
    })?;
    let path = &a.registry;
    let registry = Registry::open(path).context(|| path.display().to_string())?;
    if registry.params() != key.params() {
        return Err(CliError::Core {
            context: path.display().to_string(),
            source: pq_sap::Error::ParamMismatch {
                expected: key.params().name.into(),
                actual: registry.params().name.into(),
            },
        });
    }
    let pending = registry.iterate_since(a.cursor).context(|| "cursor".into())?;
    let outcome = scan_parallel(&key, pending, registry.view_tag_width(), a.threads).context(|| "scan".into())?;
    for s in &outcome.skipped {
        let _ = writeln!(err, "warning: skipped announcement {}: {}", s.index, s.reason);
    }
    let mut text = String::new();
    for m in &outcome.matches {
        text.push_str(&format!("{}\t{}\n", m.index, m.address.address));
    }
    text.push_str(&format!("cursor\t{}\n", registry.len()));
    emit(out, &text)
}

fn bench_cmd(a: BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.registry.is_some() && a.announcements.len() != 1 {
        return Err(CliError::Usage("--registry needs exactly one --announcements value".into()));
    }
    let mut reports = Vec::new();
    for &n in &a.announcements {
        let (report, fixture) = bench::run(&a.paramset, n, a.view_tag, a.repeats, a.seed.as_bytes(), a.threads)?;
        if let Some(path) = &a.registry {
            write_file(path, &fixture.registry.to_bytes(), false)?;
        }
        reports.push(report);
    }
    let text = match a.format {
        Format::Csv => bench::to_csv(&reports),
        Format::Json => bench::to_json(&reports),
    };
    emit(out, &text)
}

fn selftest_cmd(a: SelftestArgs, out: &mut dyn Write) -> CliResult<()> {
    let checks = selftest::run(a.inject_fault);
    let mut text = String::new();
    for c in &checks {
        match &c.failure {
            None => text.push_str(&format!("PASS\t{}\n", c.name)),
            Some(why) => text.push_str(&format!("FAIL\t{}\t{why}\n", c.name)),
        }
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    text.push_str(&format!("selftest: {}/{} passed\n", checks.len() - failed, checks.len()));
    emit(out, &text)?;
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} selftest checks failed")));
    }
    Ok(())
}
