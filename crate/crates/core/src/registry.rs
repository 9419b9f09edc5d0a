//! Append-only announcement registry.
//!
//! On disk a registry is UTF-8 text, one record per `\n`-terminated line:
//!
//! ```text
//! #registry\tparams=<name>\tview_tag=<0|1|32>
//! <index>\t<base64 ciphertext>\t<hex view tag>
//! ```
//!
//! Indices start at 0 and are dense. The base64 alphabet is the standard one
//! with padding; the tag field is empty when view tags are off. A reader
//! ignores a final line that has no terminating newline, since that is a
//! write still in progress.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::thread;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::kem::KemCiphertext;
use crate::lattice::params::ParamSet;
use crate::lattice::sample::{domain, xof, Xof};
use crate::sap::{generate_meta, Announcement, Sender, StealthMetaAddress, ViewTagWidth};

const MAGIC: &str = "#registry";

/// Number of throwaway meta-addresses decoys are spread over.
pub const DECOY_POOL: usize = 64;

pub struct Registry {
    params: ParamSet,
    width: ViewTagWidth,
    entries: Vec<Announcement>,
    sink: Option<(PathBuf, File)>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("params", &self.params.name)
            .field("width", &self.width)
            .field("len", &self.entries.len())
            .field("path", &self.sink.as_ref().map(|(p, _)| p))
            .finish()
    }
}

fn header_line(params: &ParamSet, width: ViewTagWidth) -> String {
    format!("{MAGIC}\tparams={}\tview_tag={}\n", params.name, width.bytes())
}

fn record_line(a: &Announcement) -> String {
    format!(
        "{}\t{}\t{}\n",
        a.index,
        B64.encode(a.ephemeral.to_bytes()),
        hex::encode(&a.view_tag)
    )
}

fn parse_header(line: &str) -> Result<(ParamSet, ViewTagWidth)> {
    let mut fields = line.split('\t');
    if fields.next() != Some(MAGIC) {
        return Err(Error::Format("not a registry file (bad header)".into()));
    }
    let (mut params, mut width) = (None, None);
    for f in fields {
        match f.split_once('=') {
            Some(("params", v)) => params = Some(ParamSet::by_name(v)?),
            Some(("view_tag", v)) => {
                let w: usize = v
                    .parse()
                    .map_err(|_| Error::Format(format!("bad view_tag width {v:?}")))?;
                width = Some(ViewTagWidth::from_bytes(w)?);
            }
            _ => return Err(Error::Format(format!("unknown header field {f:?}"))),
        }
    }
    match (params, width) {
        (Some(p), Some(w)) => Ok((p, w)),
        _ => Err(Error::Format("registry header needs params and view_tag".into())),
    }
}

fn parse_record(line: &str, expected: u64, params: &ParamSet, width: ViewTagWidth) -> Result<Announcement> {
    let corrupt = |reason: String| Error::CorruptRecord { index: expected, reason };
    let mut fields = line.split('\t');
    let (Some(idx), Some(ct), Some(tag), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
        return Err(corrupt("expected three tab-separated fields".into()));
    };
    let index: u64 = idx.parse().map_err(|_| corrupt(format!("bad index {idx:?}")))?;
    if index != expected {
        return Err(corrupt(format!("index {index} out of sequence")));
    }
    let bytes = B64.decode(ct).map_err(|e| corrupt(format!("ciphertext: {e}")))?;
    let ephemeral = KemCiphertext::from_bytes(&bytes, params).map_err(|e| corrupt(e.to_string()))?;
    let view_tag = hex::decode(tag).map_err(|e| corrupt(format!("view tag: {e}")))?;
    if view_tag.len() != width.bytes() {
        return Err(corrupt(format!("view tag has {} bytes, header says {}", view_tag.len(), width.bytes())));
    }
    Ok(Announcement { index, ephemeral, view_tag })
}

/// Parses registry text. Returns the registry and the byte length of the
/// complete lines consumed.
fn parse(text: &[u8]) -> Result<(ParamSet, ViewTagWidth, Vec<Announcement>, usize)> {
    let complete = text.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let body = std::str::from_utf8(&text[..complete]).map_err(|_| Error::Format("registry is not UTF-8".into()))?;
    let mut lines = body.lines();
    let header = lines.next().ok_or_else(|| Error::Format("registry has no header".into()))?;
    let (params, width) = parse_header(header)?;
    let mut entries = Vec::new();
    for line in lines {
        let next = entries.len() as u64;
        entries.push(parse_record(line, next, &params, width)?);
    }
    Ok((params, width, entries, complete))
}

impl Registry {
    pub fn in_memory(params: &ParamSet, width: ViewTagWidth) -> Self {
        Registry {
            params: *params,
            width,
            entries: Vec::new(),
            sink: None,
        }
    }

    /// Creates a new, empty registry file. Fails if `path` exists.
    pub fn create(path: &Path, params: &ParamSet, width: ViewTagWidth) -> Result<Self> {
        params.validate()?;
        let mut file = OpenOptions::new().write(true).create_new(true).open(path)?;
        file.write_all(header_line(params, width).as_bytes())?;
        file.sync_all()?;
        Ok(Registry {
            sink: Some((path.to_path_buf(), file)),
            ..Registry::in_memory(params, width)
        })
    }

    /// Reads a snapshot of the registry at `path`.
    pub fn open(path: &Path) -> Result<Self> {
        let mut text = Vec::new();
        File::open(path)?.read_to_end(&mut text)?;
        let (params, width, entries, _) = parse(&text)?;
        Ok(Registry {
            params,
            width,
            entries,
            sink: None,
        })
    }

    /// Opens `path` for appending. An unterminated trailing line left by an
    /// interrupted writer is discarded.
    pub fn open_for_append(path: &Path) -> Result<Self> {
        let mut file = OpenOptions::new().read(true).write(true).open(path)?;
        let mut text = Vec::new();
        file.read_to_end(&mut text)?;
        let (params, width, entries, complete) = parse(&text)?;
        if complete < text.len() {
            file.set_len(complete as u64)?;
            file.sync_all()?;
        }
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Registry {
            params,
            width,
            entries,
            sink: Some((path.to_path_buf(), file)),
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn view_tag_width(&self) -> ViewTagWidth {
        self.width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path(&self) -> Option<&Path> {
        self.sink.as_ref().map(|(p, _)| p.as_path())
    }

    pub fn entries(&self) -> &[Announcement] {
        &self.entries
    }

    fn check(&self, a: &Announcement) -> Result<()> {
        if a.params() != &self.params {
            return Err(Error::ParamMismatch {
                expected: self.params.name.into(),
                actual: a.params().name.into(),
            });
        }
        if a.view_tag.len() != self.width.bytes() {
            return Err(Error::Format(format!(
                "view tag has {} bytes, registry uses {}",
                a.view_tag.len(),
                self.width.bytes()
            )));
        }
        Ok(())
    }

    /// Appends announcements, assigning consecutive indices. File-backed
    /// registries are synced before this returns.
    pub fn publish_all(&mut self, batch: Vec<Announcement>) -> Result<Vec<u64>> {
        for a in &batch {
            self.check(a)?;
        }
        let start = self.entries.len() as u64;
        let mut numbered: Vec<Announcement> = batch;
        for (i, a) in numbered.iter_mut().enumerate() {
            a.index = start + i as u64;
        }
        if let Some((_, file)) = &mut self.sink {
            let mut buf = String::new();
            for a in &numbered {
                buf.push_str(&record_line(a));
            }
            file.write_all(buf.as_bytes())?;
            file.flush()?;
            file.sync_data()?;
        }
        let ids = numbered.iter().map(|a| a.index).collect();
        self.entries.extend(numbered);
        Ok(ids)
    }

    pub fn publish(&mut self, a: Announcement) -> Result<u64> {
        Ok(self.publish_all(vec![a])?[0])
    }

    /// Entries `[cursor, len)`.
    pub fn iterate_since(&self, cursor: u64) -> Result<&[Announcement]> {
        let len = self.entries.len() as u64;
        if cursor > len {
            return Err(Error::CursorOutOfRange { cursor, len });
        }
        Ok(&self.entries[cursor as usize..])
    }

    /// The exact file contents for this registry.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = header_line(&self.params, self.width);
        for a in &self.entries {
            out.push_str(&record_line(a));
        }
        out.into_bytes()
    }

    /// Appends `n_decoys` announcements to throwaway recipients, with the
    /// `targets` (meta-address, entropy) sends interleaved at positions drawn
    /// from `seed`. Everything is a function of the inputs. Returns the
    /// indices assigned to the targets, in order.
    pub fn synth_fill(
        &mut self,
        n_decoys: usize,
        targets: &[(StealthMetaAddress, [u8; 32])],
        seed: &[u8],
        threads: usize,
    ) -> Result<Vec<u64>> {
        let params = self.params;
        let width = self.width;
        for (m, _) in targets {
            crate::kem::param_check(&params, m.params())?;
        }
        let decoys = synth_decoys(&params, width, n_decoys, seed, threads.max(1))?;

        let total = n_decoys + targets.len();
        let pos_seed: [u8; 32] = xof(seed, domain::DECOY_POSITIONS, 32).try_into().expect("32 bytes");
        let mut rng = ChaCha20Rng::from_seed(pos_seed);
        let mut positions = sample(&mut rng, total, targets.len()).into_vec();
        positions.sort_unstable();

        let mut batch = Vec::with_capacity(total);
        let mut decoys = decoys.into_iter();
        let mut next_target = targets.iter().zip(&positions).peekable();
        for slot in 0..total {
            match next_target.peek() {
                Some((_, &p)) if p == slot => {
                    let ((meta, entropy), _) = next_target.next().expect("peeked");
                    batch.push(crate::sap::send(meta, Some(entropy), width)?.0);
                }
                _ => batch.push(decoys.next().expect("one decoy per free slot")),
            }
        }
        let ids = self.publish_all(batch)?;
        Ok(positions.iter().map(|&p| ids[p]).collect())
    }
}

/// Decoy `j` goes to pool member `j mod DECOY_POOL` with entropy derived from `j`.
fn synth_decoys(
    params: &ParamSet,
    width: ViewTagWidth,
    n: usize,
    seed: &[u8],
    threads: usize,
) -> Result<Vec<Announcement>> {
    let pool = DECOY_POOL.min(n);
    let build = |member: usize| -> Result<Vec<(usize, Announcement)>> {
        let meta_seed = Xof::with_index(seed, domain::DECOY, &[&b"meta"[..], &(member as u64).to_le_bytes()].concat()).take(32);
        let (_, meta) = generate_meta(&meta_seed, params)?;
        let sender = Sender::new(&meta)?;
        (member..n)
            .step_by(DECOY_POOL)
            .map(|j| {
                let entropy: [u8; 32] = Xof::with_index(seed, domain::DECOY, &[&b"send"[..], &(j as u64).to_le_bytes()].concat())
                    .take(32)
                    .try_into()
                    .expect("32 bytes");
                Ok((j, sender.send(Some(&entropy), width)?.0))
            })
            .collect()
    };
    let members: Vec<usize> = (0..pool).collect();
    let per_thread = pool.div_ceil(threads).max(1);
    let groups: Vec<Result<Vec<(usize, Announcement)>>> = thread::scope(|scope| {
        let handles: Vec<_> = members
            .chunks(per_thread)
            .map(|chunk| {
                let build = &build;
                scope.spawn(move || -> Result<Vec<(usize, Announcement)>> {
                    let mut out = Vec::new();
                    for &m in chunk {
                        out.extend(build(m)?);
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("decoy worker panicked")).collect()
    });
    let mut slots: Vec<Option<Announcement>> = vec![None; n];
    for group in groups {
        for (j, a) in group? {
            slots[j] = Some(a);
        }
    }
    Ok(slots.into_iter().map(|a| a.expect("every decoy generated")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::params::{KYBER512, KYBER768, RLWE512};
    use crate::sap::{scan, send};

    fn one(meta: &StealthMetaAddress, i: u8, w: ViewTagWidth) -> Announcement {
        send(meta, Some(&[i; 32]), w).unwrap().0
    }

    #[test]
    fn publish_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reg.tsv");
        let (_, m) = generate_meta(b"r", &KYBER512).unwrap();
        let mut reg = Registry::create(&path, &KYBER512, ViewTagWidth::OneByte).unwrap();
        let mut size = std::fs::metadata(&path).unwrap().len();
        for i in 0..3u8 {
            assert_eq!(reg.publish(one(&m, i, ViewTagWidth::OneByte)).unwrap(), i as u64);
            let now = std::fs::metadata(&path).unwrap().len();
            assert!(now > size);
            size = now;
        }
        let back = Registry::open(&path).unwrap();
        assert_eq!(back.entries(), reg.entries());
        assert_eq!(std::fs::read(&path).unwrap(), reg.to_bytes());
        assert!(Registry::create(&path, &KYBER512, ViewTagWidth::OneByte).is_err());
    }

    #[test]
    fn rejects_wrong_shape() {
        let (_, m) = generate_meta(b"r", &KYBER768).unwrap();
        let mut reg = Registry::in_memory(&KYBER512, ViewTagWidth::OneByte);
        assert!(matches!(reg.publish(one(&m, 0, ViewTagWidth::OneByte)), Err(Error::ParamMismatch { .. })));
        let (_, m) = generate_meta(b"r", &KYBER512).unwrap();
        assert!(reg.publish(one(&m, 0, ViewTagWidth::None)).is_err());
        assert!(reg.is_empty());
    }

    #[test]
    fn cursor_ranges() {
        let (_, m) = generate_meta(b"c", &KYBER512).unwrap();
        let mut reg = Registry::in_memory(&KYBER512, ViewTagWidth::None);
        for i in 0..5 {
            reg.publish(one(&m, i, ViewTagWidth::None)).unwrap();
        }
        assert_eq!(reg.iterate_since(0).unwrap().len(), 5);
        assert!(reg.iterate_since(5).unwrap().is_empty());
        let full = reg.iterate_since(0).unwrap();
        assert_eq!(reg.iterate_since(2).unwrap(), &full[2..]);
        assert!(matches!(reg.iterate_since(6), Err(Error::CursorOutOfRange { cursor: 6, len: 5 })));
    }

    #[test]
    fn partial_tail_is_ignored_and_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reg.tsv");
        let (_, m) = generate_meta(b"p", &KYBER512).unwrap();
        let mut reg = Registry::create(&path, &KYBER512, ViewTagWidth::None).unwrap();
        reg.publish(one(&m, 0, ViewTagWidth::None)).unwrap();
        drop(reg);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"1\tAAAA").unwrap();
        drop(f);
        assert_eq!(Registry::open(&path).unwrap().len(), 1);
        let mut reg = Registry::open_for_append(&path).unwrap();
        assert_eq!(reg.publish(one(&m, 1, ViewTagWidth::None)).unwrap(), 1);
        assert_eq!(Registry::open(&path).unwrap().len(), 2);
    }

    #[test]
    fn corrupt_records_name_their_index() {
        let (_, m) = generate_meta(b"x", &KYBER512).unwrap();
        let mut reg = Registry::in_memory(&KYBER512, ViewTagWidth::OneByte);
        for i in 0..3 {
            reg.publish(one(&m, i, ViewTagWidth::OneByte)).unwrap();
        }
        let text = String::from_utf8(reg.to_bytes()).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let broken = lines[2].replacen('\t', "\t!", 1);
        lines[2] = &broken;
        let bad = lines.join("\n") + "\n";
        let err = parse(bad.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::CorruptRecord { index: 1, .. }), "{err:?}");
        let skipped = text.replacen("\n1\t", "\n7\t", 1);
        assert!(matches!(parse(skipped.as_bytes()), Err(Error::CorruptRecord { index: 1, .. })));
        assert!(parse(b"").is_err());
        assert!(parse(b"#registry\tparams=kyber512\tview_tag=2\n").is_err());
        assert!(parse(b"hello\n").is_err());
    }

    #[test]
    fn synth_fill_is_deterministic_and_finds_targets() {
        let (keys, meta) = generate_meta(b"target", &KYBER512).unwrap();
        let targets = vec![(meta.clone(), [1u8; 32]), (meta, [2u8; 32])];
        let mut a = Registry::in_memory(&KYBER512, ViewTagWidth::OneByte);
        let ids = a.synth_fill(300, &targets, b"seed", 4).unwrap();
        assert_eq!(a.len(), 302);
        let mut b = Registry::in_memory(&KYBER512, ViewTagWidth::OneByte);
        assert_eq!(b.synth_fill(300, &targets, b"seed", 1).unwrap(), ids);
        assert_eq!(a.to_bytes(), b.to_bytes());
        let mut c = Registry::in_memory(&KYBER512, ViewTagWidth::OneByte);
        c.synth_fill(300, &targets, b"other", 2).unwrap();
        assert_ne!(a.to_bytes(), c.to_bytes());

        let out = scan(&keys.viewing_key(), a.entries(), ViewTagWidth::OneByte).unwrap();
        assert_eq!(out.matches.iter().map(|m| m.index).collect::<Vec<_>>(), ids);
    }

    #[test]
    fn synth_fill_counts() {
        let (_, meta) = generate_meta(b"t", &RLWE512).unwrap();
        let mut r = Registry::in_memory(&RLWE512, ViewTagWidth::None);
        r.synth_fill(5000, &[(meta, [0; 32])], b"count", 8).unwrap();
        assert_eq!(r.len(), 5001);
        let mut empty = Registry::in_memory(&RLWE512, ViewTagWidth::None);
        assert!(empty.synth_fill(0, &[], b"none", 1).unwrap().is_empty());
        assert!(empty.is_empty());
    }
}
