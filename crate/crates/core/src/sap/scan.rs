//! Recipient-side registry scanning.
//!
//! Each announcement is decapsulated with the viewing secret. With a view
//! tag configured, the tag of the recovered secret is compared first and the
//! stealth public key is only rebuilt for announcements that pass. Without a
//! tag, `P` is rebuilt for every announcement. Ownership is then confirmed
//! by the re-encryption check inside decapsulation, which stands in for
//! looking the candidate address up on chain.

use std::thread;

use crate::error::Result;
use crate::kem::{decaps_checked, EncryptionKey, SharedSecret};
use crate::lattice::params::ParamSet;
use crate::lattice::poly::{expand_matrix, ModuleVector, PublicMatrix};
use crate::sap::{compute_view_tag, stealth_pubkey_with, Announcement, StealthAddress, ViewTagWidth, ViewingKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanMatch {
    pub index: u64,
    pub secret: SharedSecret,
    pub address: StealthAddress,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedAnnouncement {
    pub index: u64,
    pub reason: String,
}

/// Instrumentation counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanStats {
    pub examined: u64,
    /// Announcements whose tag matched (all of them when no tag is used).
    pub tag_passed: u64,
    /// Stealth public keys computed.
    pub derived: u64,
    pub skipped: u64,
}

impl ScanStats {
    fn merge(&mut self, other: &ScanStats) {
        self.examined += other.examined;
        self.tag_passed += other.tag_passed;
        self.derived += other.derived;
        self.skipped += other.skipped;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanOutcome {
    pub matches: Vec<ScanMatch>,
    pub skipped: Vec<SkippedAnnouncement>,
    pub stats: ScanStats,
}

/// A viewing key with its public matrices expanded once.
pub struct Scanner<'a> {
    key: &'a ViewingKey,
    width: ViewTagWidth,
    view: EncryptionKey,
    a_spend: PublicMatrix,
    t_spend: ModuleVector,
}

impl<'a> Scanner<'a> {
    pub fn new(key: &'a ViewingKey, width: ViewTagWidth) -> Result<Self> {
        let params = key.params();
        Ok(Scanner {
            key,
            width,
            view: EncryptionKey::new(key.view_secret().public_key())?,
            a_spend: expand_matrix(key.spend_key().rho(), params)?,
            t_spend: key.spend_key().decompressed_t(),
        })
    }

    pub fn params(&self) -> &ParamSet {
        self.key.params()
    }

    fn check(&self, ann: &Announcement, out: &mut ScanOutcome) {
        out.stats.examined += 1;
        let skip = |out: &mut ScanOutcome, reason: String| {
            out.stats.skipped += 1;
            out.skipped.push(SkippedAnnouncement { index: ann.index, reason });
        };
        if ann.params() != self.params() {
            return skip(
                out,
                format!("ciphertext is for {}, key is {}", ann.params().name, self.params().name),
            );
        }
        if ann.view_tag.len() != self.width.bytes() {
            return skip(
                out,
                format!("view tag has {} bytes, expected {}", ann.view_tag.len(), self.width.bytes()),
            );
        }
        let d = decaps_checked(self.key.view_secret(), &ann.ephemeral, Some(&self.view));
        if self.width != ViewTagWidth::None && compute_view_tag(&d.secret, self.width) != ann.view_tag {
            return;
        }
        out.stats.tag_passed += 1;
        let address = match stealth_pubkey_with(&self.a_spend, &self.t_spend, &d.secret, self.params()) {
            Ok(a) => a,
            Err(e) => return skip(out, e.to_string()),
        };
        out.stats.derived += 1;
        if d.valid {
            out.matches.push(ScanMatch {
                index: ann.index,
                secret: d.secret,
                address,
            });
        }
    }

    pub fn scan(&self, announcements: &[Announcement]) -> ScanOutcome {
        let mut out = ScanOutcome::default();
        for ann in announcements {
            self.check(ann, &mut out);
        }
        out
    }

    /// Splits the input into `threads` contiguous chunks. Results are
    /// ordered by announcement index.
    pub fn scan_parallel(&self, announcements: &[Announcement], threads: usize) -> ScanOutcome {
        let threads = threads.max(1);
        if threads == 1 || announcements.len() < 2 {
            return self.scan(announcements);
        }
        let chunk = announcements.len().div_ceil(threads);
        let parts: Vec<ScanOutcome> = thread::scope(|scope| {
            let handles: Vec<_> = announcements
                .chunks(chunk)
                .map(|c| scope.spawn(move || self.scan(c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scan worker panicked"))
                .collect()
        });
        let mut out = ScanOutcome::default();
        for part in parts {
            out.matches.extend(part.matches);
            out.skipped.extend(part.skipped);
            out.stats.merge(&part.stats);
        }
        out.matches.sort_by_key(|m| m.index);
        out.skipped.sort_by_key(|s| s.index);
        out
    }
}

pub fn scan(key: &ViewingKey, announcements: &[Announcement], width: ViewTagWidth) -> Result<ScanOutcome> {
    Ok(Scanner::new(key, width)?.scan(announcements))
}

pub fn scan_parallel(
    key: &ViewingKey,
    announcements: &[Announcement],
    width: ViewTagWidth,
    threads: usize,
) -> Result<ScanOutcome> {
    Ok(Scanner::new(key, width)?.scan_parallel(announcements, threads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::params::{KYBER512, KYBER768, RLWE512};
    use crate::sap::{generate_meta, send};

    fn announce(meta: &crate::sap::StealthMetaAddress, i: u64, w: ViewTagWidth) -> (Announcement, StealthAddress) {
        let mut e = [0u8; 32];
        e[..8].copy_from_slice(&i.to_le_bytes());
        let (mut a, addr) = send(meta, Some(&e), w).unwrap();
        a.index = i;
        (a, addr)
    }

    #[test]
    fn three_announcements_one_match() {
        let (keys, mine) = generate_meta(b"me", &KYBER512).unwrap();
        let (_, other) = generate_meta(b"other", &KYBER512).unwrap();
        for w in [ViewTagWidth::None, ViewTagWidth::OneByte, ViewTagWidth::FullHash] {
            let (a0, _) = announce(&other, 0, w);
            let (a1, addr) = announce(&mine, 1, w);
            let (a2, _) = announce(&other, 2, w);
            let out = scan(&keys.viewing_key(), &[a0, a1, a2], w).unwrap();
            assert_eq!(out.matches.len(), 1);
            assert_eq!(out.matches[0].index, 1);
            assert_eq!(out.matches[0].address, addr);
            assert_eq!(out.stats.examined, 3);
            if w == ViewTagWidth::None {
                assert_eq!(out.stats.derived, 3);
            }
        }
    }

    #[test]
    fn no_matches() {
        let (keys, _) = generate_meta(b"me", &KYBER512).unwrap();
        let (_, other) = generate_meta(b"other", &KYBER512).unwrap();
        let anns: Vec<_> = (0..4).map(|i| announce(&other, i, ViewTagWidth::OneByte).0).collect();
        assert!(scan(&keys.viewing_key(), &anns, ViewTagWidth::OneByte).unwrap().matches.is_empty());
        assert!(scan(&keys.viewing_key(), &[], ViewTagWidth::OneByte).unwrap().matches.is_empty());
    }

    #[test]
    fn malformed_entries_are_skipped() {
        let (keys, mine) = generate_meta(b"me", &KYBER512).unwrap();
        let (_, foreign) = generate_meta(b"x", &KYBER768).unwrap();
        let (a0, _) = announce(&foreign, 0, ViewTagWidth::OneByte);
        let (mut a1, _) = announce(&mine, 1, ViewTagWidth::OneByte);
        a1.view_tag.push(0);
        let (a2, _) = announce(&mine, 2, ViewTagWidth::OneByte);
        let out = scan(&keys.viewing_key(), &[a0, a1, a2], ViewTagWidth::OneByte).unwrap();
        assert_eq!(out.skipped.iter().map(|s| s.index).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(out.matches.len(), 1);
        assert_eq!(out.matches[0].index, 2);
    }

    #[test]
    fn decoys_with_statistical_tag_filter() {
        // N decoys and m real sends; tag-stage false positives ~ Binomial(N, 1/256).
        let (keys, mine) = generate_meta(b"stat", &KYBER512).unwrap();
        let n = 10_000u64;
        let m = 10u64;
        let decoys: Vec<_> = (0..8)
            .map(|i| generate_meta(&[i as u8], &KYBER512).unwrap().1)
            .collect();
        let mut anns = Vec::new();
        let mut want = Vec::new();
        for i in 0..n + m {
            if i % 1000 == 500 {
                let (a, addr) = announce(&mine, i, ViewTagWidth::OneByte);
                want.push((i, addr));
                anns.push(a);
            } else {
                anns.push(announce(&decoys[(i % 8) as usize], i, ViewTagWidth::OneByte).0);
            }
        }
        assert_eq!(want.len() as u64, m);
        let vk = keys.viewing_key();
        let out = scan_parallel(&vk, &anns, ViewTagWidth::OneByte, 4).unwrap();
        let got: Vec<_> = out.matches.iter().map(|x| (x.index, x.address.clone())).collect();
        assert_eq!(got, want);
        let false_pos = out.stats.tag_passed - m;
        let p = 1.0 / 256.0;
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((false_pos as f64 - mean).abs() <= 3.0 * sigma, "false positives {false_pos}");
        // serial and parallel agree exactly
        assert_eq!(out, scan(&vk, &anns, ViewTagWidth::OneByte).unwrap());
    }

    #[test]
    fn parallel_ordering_with_many_threads() {
        let (keys, mine) = generate_meta(b"par", &RLWE512).unwrap();
        let anns: Vec<_> = (0..7).map(|i| announce(&mine, i, ViewTagWidth::None).0).collect();
        for t in [1, 2, 3, 16] {
            let out = scan_parallel(&keys.viewing_key(), &anns, ViewTagWidth::None, t).unwrap();
            assert_eq!(out.matches.iter().map(|m| m.index).collect::<Vec<_>>(), (0..7).collect::<Vec<_>>());
        }
    }
}
