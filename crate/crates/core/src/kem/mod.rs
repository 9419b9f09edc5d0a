//! IND-CCA key encapsulation built from the CPA scheme with the
//! Fujisaki–Okamoto transform and implicit rejection.
//!
//! One code path serves all three lattice variants; the parameter set picks
//! the matrix shape and message codec.

mod pke;

use std::fmt;

use rand::rngs::OsRng;
use rand::RngCore;
use sha3::{Digest, Sha3_256, Sha3_512};

use crate::error::{Error, Result};
use crate::lattice::params::ParamSet;

pub use pke::{cpa_decrypt, cpa_encrypt, cpa_keygen, KemCiphertext, Message, PkePublicKey, PkeSecretKey};
pub(crate) use pke::{param_check, EncryptionKey};

/// `H`: SHA3-256 over the concatenation of `parts`.
pub fn hash_h(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha3_256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

/// `G`: SHA3-512 split into two 32-byte halves.
pub fn hash_g(parts: &[&[u8]]) -> ([u8; 32], [u8; 32]) {
    let mut h = Sha3_512::new();
    for p in parts {
        h.update(p);
    }
    let out = h.finalize();
    (
        out[..32].try_into().expect("32 bytes"),
        out[32..].try_into().expect("32 bytes"),
    )
}

/// A 32-byte session key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SharedSecret([u8; 32]);

impl SharedSecret {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        SharedSecret(bytes)
    }
}

impl fmt::Debug for SharedSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SharedSecret({:02x}{:02x}..)", self.0[0], self.0[1])
    }
}

/// Decapsulation key `(s, z, pk)`.
#[derive(Clone, PartialEq, Eq)]
pub struct KemSecretKey {
    s: PkeSecretKey,
    z: [u8; 32],
    pk: PkePublicKey,
    pk_hash: [u8; 32],
}

impl fmt::Debug for KemSecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KemSecretKey")
            .field("params", &self.pk.params().name)
            .finish_non_exhaustive()
    }
}

impl KemSecretKey {
    fn new(s: PkeSecretKey, z: [u8; 32], pk: PkePublicKey) -> Self {
        let pk_hash = hash_h(&[&pk.to_bytes()]);
        KemSecretKey { s, z, pk, pk_hash }
    }

    pub fn params(&self) -> &ParamSet {
        self.pk.params()
    }

    pub fn public_key(&self) -> &PkePublicKey {
        &self.pk
    }

    pub fn pke_secret(&self) -> &PkeSecretKey {
        &self.s
    }

    /// `s ∥ z ∥ pk`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.s.to_bytes();
        out.extend_from_slice(&self.z);
        out.extend_from_slice(&self.pk.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &ParamSet) -> Result<Self> {
        if bytes.len() != params.kem_sk_bytes() {
            return Err(Error::Format(format!(
                "{} secret key is {} bytes, got {}",
                params.name,
                params.kem_sk_bytes(),
                bytes.len()
            )));
        }
        let (s, rest) = bytes.split_at(params.pke_sk_bytes());
        let (z, pk) = rest.split_at(32);
        Ok(KemSecretKey::new(
            PkeSecretKey::from_bytes(s, params)?,
            z.try_into().expect("32 bytes"),
            PkePublicKey::from_bytes(pk, params)?,
        ))
    }
}

/// Generates a key pair from `ρ ∥ σ ∥ z`.
pub fn cca_keygen(seed: &[u8; 96], params: &ParamSet) -> Result<(PkePublicKey, KemSecretKey)> {
    let cpa_seed: [u8; 64] = seed[..64].try_into().expect("64 bytes");
    let (pk, s) = cpa_keygen(&cpa_seed, params)?;
    let z = seed[64..].try_into().expect("32 bytes");
    Ok((pk.clone(), KemSecretKey::new(s, z, pk)))
}

/// Key generation from OS randomness.
pub fn cca_keygen_random(params: &ParamSet) -> Result<(PkePublicKey, KemSecretKey)> {
    let mut seed = [0u8; 96];
    OsRng.fill_bytes(&mut seed);
    cca_keygen(&seed, params)
}

/// Encapsulates to `pk`. `m_seed` fixes the internal message for
/// reproducible output; `None` draws it from the OS.
pub fn encaps(pk: &PkePublicKey, m_seed: Option<&[u8; 32]>) -> Result<(KemCiphertext, SharedSecret)> {
    let pk_hash = hash_h(&[&pk.to_bytes()]);
    encaps_with(&EncryptionKey::new(pk)?, &pk_hash, m_seed)
}

pub(crate) fn encaps_with(
    ek: &EncryptionKey,
    pk_hash: &[u8; 32],
    m_seed: Option<&[u8; 32]>,
) -> Result<(KemCiphertext, SharedSecret)> {
    let m = match m_seed {
        Some(m) => *m,
        None => {
            let mut m = [0u8; 32];
            OsRng.fill_bytes(&mut m);
            m
        }
    };
    let (k_bar, coins) = hash_g(&[pk_hash, &m]);
    let c = pke::encrypt_prepared(ek, &m, Some(&coins))?;
    let key = hash_h(&[&k_bar, &hash_h(&[&c.to_bytes()])]);
    Ok((c, SharedSecret(key)))
}

/// Result of a decapsulation together with whether the re-encryption check
/// passed. The flag must never leave the key holder.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Decapsulation {
    pub secret: SharedSecret,
    pub valid: bool,
}

/// Always returns a key. Malformed or tampered ciphertexts yield the
/// pseudorandom rejection key `H(z ∥ H(c))`.
pub fn decaps(sk: &KemSecretKey, c: &KemCiphertext) -> SharedSecret {
    decaps_checked(sk, c, None).secret
}

pub(crate) fn decaps_checked(
    sk: &KemSecretKey,
    c: &KemCiphertext,
    ek: Option<&EncryptionKey>,
) -> Decapsulation {
    let c_bytes = c.to_bytes();
    let c_hash = hash_h(&[&c_bytes]);
    let reject = hash_h(&[&sk.z, &c_hash]);
    let honest = (|| -> Result<([u8; 32], bool)> {
        param_check(sk.params(), c.params())?;
        let m = cpa_decrypt(&sk.s, c)?;
        let (k_bar, coins) = hash_g(&[&sk.pk_hash, &m]);
        let expanded;
        let ek = match ek {
            Some(ek) if ek.public_key() == &sk.pk => ek,
            _ => {
                expanded = EncryptionKey::new(&sk.pk)?;
                &expanded
            }
        };
        let c2 = pke::encrypt_prepared(ek, &m, Some(&coins))?;
        let same = ct_eq(&c2.to_bytes(), &c_bytes);
        Ok((hash_h(&[&k_bar, &c_hash]), same))
    })();
    match honest {
        Ok((key, valid)) => Decapsulation {
            secret: SharedSecret(ct_select(valid, &key, &reject)),
            valid,
        },
        Err(_) => Decapsulation {
            secret: SharedSecret(reject),
            valid: false,
        },
    }
}

fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let diff = a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y));
    diff == 0
}

fn ct_select(take_first: bool, a: &[u8; 32], b: &[u8; 32]) -> [u8; 32] {
    let mask = (take_first as u8).wrapping_neg();
    let mut out = [0u8; 32];
    for i in 0..32 {
        out[i] = (a[i] & mask) | (b[i] & !mask);
    }
    out
}
