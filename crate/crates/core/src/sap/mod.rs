//! Stealth address protocols over the three lattice variants.
//!
//! A recipient publishes a meta-address `(K, V)`. A sender encapsulates to
//! `V`, obtaining `(R, S)`, and pays to the address of
//! `P = A_K·y + Decompress(t_K) [+ e1_S]`, where `y` (and for RLWE/LWE the
//! noise `e1_S`) is expanded from `S`. The recipient decapsulates every `R`
//! with the viewing secret, filters on the view tag, and rebuilds `P`. Only
//! the holder of the spend secret `k` can form `p = k + y`, which satisfies
//! `P = A_K·p + e1` for the recomputable noise `e1 = Decompress(t_K) − A_K·k [+ e1_S]`.

mod keyfile;
mod scan;

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kem::{self, KemCiphertext, KemSecretKey, PkePublicKey, SharedSecret};
use crate::lattice::arith::Modulus;
use crate::lattice::params::{ParamSet, Variant};
use crate::lattice::poly::{expand_matrix, ModuleVector, PublicMatrix};
use crate::lattice::sample::{domain, xof, Xof};

pub use keyfile::{KeyFile, KeyFileKind};
pub use scan::{scan, scan_parallel, ScanMatch, ScanOutcome, ScanStats, Scanner, SkippedAnnouncement};

/// How many bytes of `SHA-256(S)` accompany each announcement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ViewTagWidth {
    None,
    #[default]
    OneByte,
    FullHash,
}

impl ViewTagWidth {
    pub const fn bytes(self) -> usize {
        match self {
            ViewTagWidth::None => 0,
            ViewTagWidth::OneByte => 1,
            ViewTagWidth::FullHash => 32,
        }
    }

    pub fn from_bytes(width: usize) -> Result<Self> {
        match width {
            0 => Ok(ViewTagWidth::None),
            1 => Ok(ViewTagWidth::OneByte),
            32 => Ok(ViewTagWidth::FullHash),
            w => Err(Error::ViewTagWidth(w)),
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            ViewTagWidth::None => "none",
            ViewTagWidth::OneByte => "1byte",
            ViewTagWidth::FullHash => "fullhash",
        }
    }
}

impl fmt::Display for ViewTagWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ViewTagWidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "0" => Ok(ViewTagWidth::None),
            "1byte" | "1" => Ok(ViewTagWidth::OneByte),
            "fullhash" | "32" => Ok(ViewTagWidth::FullHash),
            _ => Err(Error::Domain(format!(
                "view tag mode must be none, 1byte or fullhash, got {s:?}"
            ))),
        }
    }
}

/// A 20-byte account address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(pub [u8; 20]);

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

/// The public half `(K, V)` a recipient advertises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StealthMetaAddress {
    spend: PkePublicKey,
    view: PkePublicKey,
}

impl StealthMetaAddress {
    pub fn new(spend: PkePublicKey, view: PkePublicKey) -> Result<Self> {
        kem::param_check(spend.params(), view.params())?;
        Ok(StealthMetaAddress { spend, view })
    }

    pub fn params(&self) -> &ParamSet {
        self.spend.params()
    }

    pub fn spend_key(&self) -> &PkePublicKey {
        &self.spend
    }

    pub fn view_key(&self) -> &PkePublicKey {
        &self.view
    }
}

/// Delegated scanning capability: the viewing secret and both public keys,
/// without the spend secret.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewingKey {
    view: KemSecretKey,
    spend: PkePublicKey,
}

impl ViewingKey {
    pub fn new(view: KemSecretKey, spend: PkePublicKey) -> Result<Self> {
        kem::param_check(view.params(), spend.params())?;
        Ok(ViewingKey { view, spend })
    }

    pub fn params(&self) -> &ParamSet {
        self.view.params()
    }

    pub fn view_secret(&self) -> &KemSecretKey {
        &self.view
    }

    pub fn spend_key(&self) -> &PkePublicKey {
        &self.spend
    }

    pub fn meta(&self) -> StealthMetaAddress {
        StealthMetaAddress {
            spend: self.spend.clone(),
            view: self.view.public_key().clone(),
        }
    }
}

/// Both decapsulation keys of a recipient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecipientKeys {
    spend: KemSecretKey,
    view: KemSecretKey,
}

impl RecipientKeys {
    pub fn new(spend: KemSecretKey, view: KemSecretKey) -> Result<Self> {
        kem::param_check(spend.params(), view.params())?;
        Ok(RecipientKeys { spend, view })
    }

    pub fn params(&self) -> &ParamSet {
        self.spend.params()
    }

    pub fn spend_secret(&self) -> &KemSecretKey {
        &self.spend
    }

    pub fn view_secret(&self) -> &KemSecretKey {
        &self.view
    }

    pub fn meta(&self) -> StealthMetaAddress {
        StealthMetaAddress {
            spend: self.spend.public_key().clone(),
            view: self.view.public_key().clone(),
        }
    }

    pub fn viewing_key(&self) -> ViewingKey {
        ViewingKey {
            view: self.view.clone(),
            spend: self.spend.public_key().clone(),
        }
    }
}

/// One registry entry: the ephemeral ciphertext `R` and its view tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Announcement {
    /// Sequence number in the registry; assigned on publish.
    pub index: u64,
    pub ephemeral: KemCiphertext,
    pub view_tag: Vec<u8>,
}

impl Announcement {
    pub fn params(&self) -> &ParamSet {
        self.ephemeral.params()
    }
}

/// Stealth public key `P` and its derived address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StealthAddress {
    pub pubkey: ModuleVector,
    pub address: Address,
}

/// Stealth secret `p` with the noise `e1` that completes `P = A_K·p + e1`.
#[derive(Clone, PartialEq, Eq)]
pub struct StealthPrivateKey {
    pub p: ModuleVector,
    pub e1: ModuleVector,
    pub params: ParamSet,
}

impl fmt::Debug for StealthPrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StealthPrivateKey")
            .field("params", &self.params.name)
            .finish_non_exhaustive()
    }
}

/// Values expanded from the shared secret.
pub(crate) struct SharedDerivation {
    pub y: ModuleVector,
    /// Extra deterministic noise for the RLWE and LWE variants.
    pub e1: Option<ModuleVector>,
}

impl SharedDerivation {
    pub(crate) fn new(s: &SharedSecret, params: &ParamSet) -> Result<Self> {
        let q = Modulus::new(params.q)?;
        let y = ModuleVector::sample_cbd(
            &mut Xof::new(s.as_bytes(), domain::SAP_Y),
            params.eta1,
            params.k,
            params.n,
            q,
        )?;
        let e1 = match params.variant {
            Variant::Mlwe => None,
            Variant::Rlwe | Variant::Lwe => Some(ModuleVector::sample_cbd(
                &mut Xof::new(s.as_bytes(), domain::SAP_E1),
                params.eta2,
                params.k,
                params.n,
                q,
            )?),
        };
        Ok(SharedDerivation { y, e1 })
    }
}

/// Two independent KEM key pairs derived from one seed.
pub fn generate_meta(seed: &[u8], params: &ParamSet) -> Result<(RecipientKeys, StealthMetaAddress)> {
    let spend_seed: [u8; 96] = xof(seed, domain::META_SPEND, 96).try_into().expect("96 bytes");
    let view_seed: [u8; 96] = xof(seed, domain::META_VIEW, 96).try_into().expect("96 bytes");
    let (_, spend) = kem::cca_keygen(&spend_seed, params)?;
    let (_, view) = kem::cca_keygen(&view_seed, params)?;
    let keys = RecipientKeys { spend, view };
    let meta = keys.meta();
    Ok((keys, meta))
}

/// First `width` bytes of `SHA-256(S)`.
pub fn compute_view_tag(s: &SharedSecret, width: ViewTagWidth) -> Vec<u8> {
    let digest = Sha256::digest(s.as_bytes());
    digest[..width.bytes()].to_vec()
}

/// First 20 bytes of `SHA-256` over the full-width encoding of `P`.
pub fn address_from_pubkey(pubkey: &ModuleVector) -> Address {
    let bits = pubkey
        .elems()
        .first()
        .map(|e| crate::lattice::params::ceil_log2(e.modulus().value()))
        .unwrap_or(16);
    let bytes = pubkey.to_bytes(bits).expect("reduced coefficients fit the full width");
    let digest = Sha256::digest(bytes);
    Address(digest[..20].try_into().expect("20 bytes"))
}

pub(crate) fn stealth_pubkey_with(
    a_spend: &PublicMatrix,
    t_spend: &ModuleVector,
    s: &SharedSecret,
    params: &ParamSet,
) -> Result<StealthAddress> {
    let d = SharedDerivation::new(s, params)?;
    let mut pubkey = a_spend.mul_vec(&d.y)?.add(t_spend)?;
    if let Some(e1) = &d.e1 {
        pubkey = pubkey.add(e1)?;
    }
    let address = address_from_pubkey(&pubkey);
    Ok(StealthAddress { pubkey, address })
}

/// The address a payment under shared secret `S` goes to.
pub fn derive_stealth_pubkey(spend: &PkePublicKey, s: &SharedSecret) -> Result<StealthAddress> {
    let a = expand_matrix(spend.rho(), spend.params())?;
    stealth_pubkey_with(&a, &spend.decompressed_t(), s, spend.params())
}

/// `p = k + y` together with its reconstruction noise.
pub fn derive_stealth_privkey(spend: &KemSecretKey, s: &SharedSecret) -> Result<StealthPrivateKey> {
    let params = *spend.params();
    let pk = spend.public_key();
    let k = spend.pke_secret().s();
    let a = expand_matrix(pk.rho(), &params)?;
    let d = SharedDerivation::new(s, &params)?;
    let p = k.add(&d.y)?;
    let mut e1 = pk.decompressed_t().sub(&a.mul_vec(k)?)?;
    if let Some(extra) = &d.e1 {
        e1 = e1.add(extra)?;
    }
    Ok(StealthPrivateKey { p, e1, params })
}

/// A meta-address with its public matrices expanded, for repeated sends.
pub struct Sender {
    meta: StealthMetaAddress,
    view_hash: [u8; 32],
    view: kem::EncryptionKey,
    a_spend: PublicMatrix,
    t_spend: ModuleVector,
}

impl Sender {
    pub fn new(meta: &StealthMetaAddress) -> Result<Self> {
        let params = meta.params();
        Ok(Sender {
            meta: meta.clone(),
            view_hash: kem::hash_h(&[&meta.view.to_bytes()]),
            view: kem::EncryptionKey::new(&meta.view)?,
            a_spend: expand_matrix(meta.spend.rho(), params)?,
            t_spend: meta.spend.decompressed_t(),
        })
    }

    pub fn meta(&self) -> &StealthMetaAddress {
        &self.meta
    }

    /// See [`send`].
    pub fn send(&self, entropy: Option<&[u8; 32]>, width: ViewTagWidth) -> Result<(Announcement, StealthAddress)> {
        let (ephemeral, s) = kem::encaps_with(&self.view, &self.view_hash, entropy)?;
        let address = stealth_pubkey_with(&self.a_spend, &self.t_spend, &s, self.meta.params())?;
        let view_tag = compute_view_tag(&s, width);
        Ok((
            Announcement {
                index: 0,
                ephemeral,
                view_tag,
            },
            address,
        ))
    }
}

/// Sender side: encapsulate to `V`, derive the address from `K`.
///
/// The returned announcement carries index 0 until it is published.
pub fn send(
    meta: &StealthMetaAddress,
    entropy: Option<&[u8; 32]>,
    width: ViewTagWidth,
) -> Result<(Announcement, StealthAddress)> {
    Sender::new(meta)?.send(entropy, width)
}

/// Rebuilds both halves of the stealth key pair for a scanned secret.
pub fn recover_spend(keys: &RecipientKeys, s: &SharedSecret) -> Result<(StealthAddress, StealthPrivateKey)> {
    let address = derive_stealth_pubkey(keys.spend.public_key(), s)?;
    let private = derive_stealth_privkey(&keys.spend, s)?;
    Ok((address, private))
}

/// Exact check of `P = A·p + e1` in `R_q^k`.
pub fn verify_key_pair(
    pubkey: &ModuleVector,
    p: &ModuleVector,
    e1: &ModuleVector,
    rho: &[u8; 32],
    params: &ParamSet,
) -> Result<bool> {
    for v in [pubkey, p, e1] {
        if v.len() != params.k {
            return Err(Error::DimensionMismatch {
                expected: params.k,
                actual: v.len(),
            });
        }
        if let Some(bad) = v.elems().iter().find(|e| e.len() != params.n) {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                actual: bad.len(),
            });
        }
    }
    let a = expand_matrix(rho, params)?;
    Ok(&a.mul_vec(p)?.add(e1)? == pubkey)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::params::{ALL, KYBER512, KYBER768, LWE640, RLWE1024, RLWE512};
    use crate::lattice::poly::RingElement;
    use std::collections::HashSet;

    fn meta(seed: &str, p: &ParamSet) -> (RecipientKeys, StealthMetaAddress) {
        generate_meta(seed.as_bytes(), p).unwrap()
    }

    #[test]
    fn view_tag_widths() {
        let s = SharedSecret::from_bytes([7; 32]);
        assert!(compute_view_tag(&s, ViewTagWidth::None).is_empty());
        assert_eq!(compute_view_tag(&s, ViewTagWidth::OneByte).len(), 1);
        let full = compute_view_tag(&s, ViewTagWidth::FullHash);
        assert_eq!(full, Sha256::digest([7u8; 32]).to_vec());
        assert_eq!(compute_view_tag(&s, ViewTagWidth::OneByte)[0], full[0]);
        assert!(ViewTagWidth::from_bytes(2).is_err());
        for w in [ViewTagWidth::None, ViewTagWidth::OneByte, ViewTagWidth::FullHash] {
            assert_eq!(w.as_str().parse::<ViewTagWidth>().unwrap(), w);
            assert_eq!(ViewTagWidth::from_bytes(w.bytes()).unwrap(), w);
        }
        assert!("2byte".parse::<ViewTagWidth>().is_err());
    }

    #[test]
    fn meta_generation() {
        let (keys, m) = meta("alice", &KYBER768);
        let (keys2, m2) = meta("alice", &KYBER768);
        assert_eq!(keys, keys2);
        assert_eq!(m, m2);
        assert_ne!(m.spend_key(), m.view_key());
        assert_eq!(keys.meta(), m);
        let (_, other) = meta("bob", &KYBER768);
        assert_ne!(other, m);
    }

    #[test]
    fn spend_and_view_keys_always_differ() {
        for i in 0..1000u32 {
            let (_, m) = generate_meta(&i.to_le_bytes(), &KYBER512).unwrap();
            assert_ne!(m.spend_key().to_bytes(), m.view_key().to_bytes());
        }
    }

    #[test]
    fn end_to_end_each_set() {
        for p in ALL {
            let (keys, m) = meta(p.name, &p);
            let (ann, sent) = send(&m, Some(&[1; 32]), ViewTagWidth::OneByte).unwrap();
            assert_eq!(ann.view_tag.len(), 1);
            let out = scan(&keys.viewing_key(), std::slice::from_ref(&ann), ViewTagWidth::OneByte).unwrap();
            assert_eq!(out.matches.len(), 1, "{}", p.name);
            let found = &out.matches[0];
            assert_eq!(found.address, sent);
            let (addr, sk) = recover_spend(&keys, &found.secret).unwrap();
            assert_eq!(addr, sent);
            assert!(verify_key_pair(&addr.pubkey, &sk.p, &sk.e1, m.spend_key().rho(), &p).unwrap());
        }
    }

    #[test]
    fn send_is_deterministic_in_entropy() {
        let (_, m) = meta("det", &RLWE512);
        let a = send(&m, Some(&[9; 32]), ViewTagWidth::FullHash).unwrap();
        let b = send(&m, Some(&[9; 32]), ViewTagWidth::FullHash).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.view_tag.len(), 32);
        let c = send(&m, Some(&[10; 32]), ViewTagWidth::FullHash).unwrap();
        assert_ne!(a.1.address, c.1.address);
    }

    #[test]
    fn sender_and_recipient_agree_on_pubkey() {
        for p in [KYBER512, RLWE1024, LWE640] {
            let (keys, m) = meta("agree", &p);
            for i in 0..3u8 {
                let (c, s) = kem::encaps(m.view_key(), Some(&[i; 32])).unwrap();
                let s2 = kem::decaps(keys.view_secret(), &c);
                assert_eq!(s, s2);
                let a = derive_stealth_pubkey(m.spend_key(), &s).unwrap();
                let b = derive_stealth_pubkey(keys.viewing_key().spend_key(), &s2).unwrap();
                assert_eq!(a, b);
                assert_eq!(a, derive_stealth_pubkey(m.spend_key(), &s).unwrap());
            }
        }
    }

    #[test]
    fn cached_sender_matches_uncached_derivation() {
        for p in [KYBER768, LWE640] {
            let (keys, m) = meta("cache", &p);
            let sender = Sender::new(&m).unwrap();
            let (ann, addr) = sender.send(Some(&[8; 32]), ViewTagWidth::OneByte).unwrap();
            let s = kem::decaps(keys.view_secret(), &ann.ephemeral);
            assert_eq!(derive_stealth_pubkey(m.spend_key(), &s).unwrap(), addr);
            assert_eq!(compute_view_tag(&s, ViewTagWidth::OneByte), ann.view_tag);
        }
    }

    #[test]
    fn stealth_private_key_properties() {
        for p in [KYBER512, KYBER768, RLWE512, LWE640] {
            let (keys, m) = meta("priv", &p);
            for i in 0..5u8 {
                let s = SharedSecret::from_bytes([i; 32]);
                let (addr, sk) = recover_spend(&keys, &s).unwrap();
                assert!(verify_key_pair(&addr.pubkey, &sk.p, &sk.e1, m.spend_key().rho(), &p).unwrap());
                // |p| <= |k| + |y| <= 2 eta
                assert!(sk.p.inf_norm() <= 2 * p.eta1, "{}", p.name);
                // perturbing p breaks the identity
                let mut bad = sk.p.clone();
                let q = Modulus::new(p.q).unwrap();
                let first = &mut bad.elems_mut()[0];
                let mut coeffs = first.coeffs().to_vec();
                coeffs[0] = ((coeffs[0] as u32 + 1) % p.q) as u16;
                *first = RingElement::from_coeffs(coeffs, q).unwrap();
                assert!(!verify_key_pair(&addr.pubkey, &bad, &sk.e1, m.spend_key().rho(), &p).unwrap());
            }
        }
    }

    #[test]
    fn zero_y_gives_spend_secret() {
        // Oracle for p = k + y, checked against the spend secret directly.
        let (keys, _) = meta("zero", &KYBER512);
        let s = SharedSecret::from_bytes([3; 32]);
        let d = SharedDerivation::new(&s, &KYBER512).unwrap();
        let sk = derive_stealth_privkey(keys.spend_secret(), &s).unwrap();
        assert_eq!(sk.p.sub(&d.y).unwrap(), *keys.spend_secret().pke_secret().s());
        let q = Modulus::new(KYBER512.q).unwrap();
        let zero = ModuleVector::zero(KYBER512.k, KYBER512.n, q);
        assert_eq!(keys.spend_secret().pke_secret().s().add(&zero).unwrap(), *keys.spend_secret().pke_secret().s());
    }

    #[test]
    fn compensating_perturbation_matches_brute_force() {
        // Shift p by delta and e1 by -A·delta; the identity must still hold, and
        // the product A·(p + delta) is recomputed coefficientwise by schoolbook.
        let p = KYBER512;
        let (keys, m) = meta("comp", &p);
        let s = SharedSecret::from_bytes([5; 32]);
        let (addr, sk) = recover_spend(&keys, &s).unwrap();
        let q = Modulus::new(p.q).unwrap();
        let delta = ModuleVector::new(vec![
            RingElement::monomial(p.n, 3, q),
            RingElement::monomial(p.n, 200, q).neg(),
        ])
        .unwrap();
        let a = expand_matrix(m.spend_key().rho(), &p).unwrap();
        let p2 = sk.p.add(&delta).unwrap();
        let e2 = sk.e1.sub(&a.mul_vec(&delta).unwrap()).unwrap();
        assert!(verify_key_pair(&addr.pubkey, &p2, &e2, m.spend_key().rho(), &p).unwrap());
        let PublicMatrix::Module(mat) = &a else { panic!("module matrix expected") };
        for row in 0..p.k {
            let mut acc = e2.elems()[row].clone();
            for col in 0..p.k {
                acc = acc.add(&mat.get(row, col).schoolbook_mul(&p2.elems()[col]).unwrap()).unwrap();
            }
            assert_eq!(acc, addr.pubkey.elems()[row]);
        }
    }

    #[test]
    fn verify_rejects_bad_dimensions() {
        let p = KYBER768;
        let q = Modulus::new(p.q).unwrap();
        let good = ModuleVector::zero(3, 256, q);
        let short = ModuleVector::zero(2, 256, q);
        assert!(matches!(
            verify_key_pair(&good, &short, &good, &[0; 32], &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn addresses_are_distinct_across_sends() {
        let (_, m) = meta("distinct", &KYBER512);
        let mut seen = HashSet::new();
        for i in 0..1000u32 {
            let mut e = [0u8; 32];
            e[..4].copy_from_slice(&i.to_le_bytes());
            let (_, addr) = send(&m, Some(&e), ViewTagWidth::None).unwrap();
            assert_eq!(addr.address, address_from_pubkey(&addr.pubkey));
            assert!(seen.insert(addr.address));
        }
    }

    #[test]
    fn address_from_distinct_pubkeys() {
        let q = Modulus::new(3329).unwrap();
        let mut seen = HashSet::new();
        for i in 0..10_000usize {
            let mut v = ModuleVector::zero(2, 256, q);
            v.elems_mut()[i % 2] = RingElement::monomial(256, (i / 2) % 256, q);
            let mut c = v.elems()[0].coeffs().to_vec();
            c[255] = (i / 512) as u16;
            v.elems_mut()[0] = RingElement::from_coeffs(c, q).unwrap();
            let a = address_from_pubkey(&v);
            assert_eq!(a, address_from_pubkey(&v));
            assert_eq!(a.0.len(), 20);
            assert!(seen.insert(a), "collision at {i}");
        }
    }

    #[test]
    fn address_bytes_are_uniform() {
        // chi-square over byte values of 10^4 addresses (200k bytes, 255 dof);
        // the 0.01 upper critical value is 310.46.
        let (_, m) = meta("chi", &KYBER512);
        let mut counts = [0u64; 256];
        let mut seen = HashSet::new();
        for i in 0..10_000u32 {
            let mut e = [0u8; 32];
            e[28..].copy_from_slice(&i.to_be_bytes());
            let (_, addr) = send(&m, Some(&e), ViewTagWidth::None).unwrap();
            assert!(seen.insert(addr.address));
            for b in addr.address.0 {
                counts[b as usize] += 1;
            }
        }
        let expected = 200_000.0 / 256.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 310.46, "chi2 = {chi2}");
    }

    #[test]
    fn view_tag_collision_rate() {
        // 10^5 independent pairs; collisions ~ Binomial(n, 1/256).
        let n = 100_000u32;
        let mut hits = 0u32;
        for i in 0..n {
            let a = SharedSecret::from_bytes(xof(&i.to_le_bytes(), 0xc0, 32).try_into().unwrap());
            let b = SharedSecret::from_bytes(xof(&i.to_le_bytes(), 0xc1, 32).try_into().unwrap());
            if compute_view_tag(&a, ViewTagWidth::OneByte) == compute_view_tag(&b, ViewTagWidth::OneByte) {
                hits += 1;
            }
        }
        let p = 1.0 / 256.0;
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - mean).abs() <= 3.0 * sigma, "hits = {hits}");
    }

    #[test]
    fn mixed_params_rejected() {
        let (a, _) = meta("a", &KYBER512);
        let (b, _) = meta("b", &KYBER768);
        assert!(RecipientKeys::new(a.spend_secret().clone(), b.view_secret().clone()).is_err());
        assert!(StealthMetaAddress::new(a.meta().spend_key().clone(), b.meta().view_key().clone()).is_err());
    }
}
