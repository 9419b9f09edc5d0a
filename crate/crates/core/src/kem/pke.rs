//! IND-CPA public-key encryption: key generation, encryption, decryption.

use std::fmt;

use rand::rngs::OsRng;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::lattice::arith::{compress_unchecked, round_div, Modulus};
use crate::lattice::params::{ParamSet, Variant, LWE_BITS_PER_ENTRY, MESSAGE_BITS};
use crate::lattice::poly::{
    expand_matrix, pairing_prepared, CompressedPoly, CompressedVector, ModuleVector, Prepared,
    PublicMatrix, RingElement,
};
use crate::lattice::sample::{domain, Xof};

/// A 256-bit plaintext.
pub type Message = [u8; 32];

pub(crate) fn param_check(expected: &ParamSet, actual: &ParamSet) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ParamMismatch {
            expected: expected.name.into(),
            actual: actual.name.into(),
        })
    }
}

/// Public key `(t, ρ)` with `t` compressed to `d_t` bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PkePublicKey {
    params: ParamSet,
    t: CompressedVector,
    rho: [u8; 32],
}

impl PkePublicKey {
    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn t(&self) -> &CompressedVector {
        &self.t
    }

    pub fn rho(&self) -> &[u8; 32] {
        &self.rho
    }

    /// `Decompress_q(t, d_t)`.
    pub fn decompressed_t(&self) -> ModuleVector {
        self.t.decompress(Modulus::new_unchecked(self.params.q))
    }

    /// `serialize(t, d_t) ∥ ρ`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.params.pk_bytes());
        self.t
            .write_bytes(&mut out)
            .expect("public key coefficients fit their width");
        out.extend_from_slice(&self.rho);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &ParamSet) -> Result<Self> {
        params.validate()?;
        if bytes.len() != params.pk_bytes() {
            return Err(Error::Format(format!(
                "{} public key is {} bytes, got {}",
                params.name,
                params.pk_bytes(),
                bytes.len()
            )));
        }
        let (t_bytes, rho) = bytes.split_at(bytes.len() - 32);
        let q = Modulus::new(params.q)?;
        let t = CompressedVector::from_bytes(t_bytes, params.d_t, params.k, params.n, q)?;
        Ok(PkePublicKey {
            params: *params,
            t,
            rho: rho.try_into().expect("32-byte tail"),
        })
    }
}

/// Secret vector `s` with CBD coefficients, stored reduced mod `q`.
#[derive(Clone)]
pub struct PkeSecretKey {
    params: ParamSet,
    s: ModuleVector,
    s_hat: Prepared,
}

impl PartialEq for PkeSecretKey {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.s == other.s
    }
}

impl Eq for PkeSecretKey {}

impl fmt::Debug for PkeSecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PkeSecretKey")
            .field("params", &self.params.name)
            .finish_non_exhaustive()
    }
}

impl PkeSecretKey {
    fn new(params: ParamSet, s: ModuleVector) -> Self {
        let s_hat = s.prepare();
        PkeSecretKey { params, s, s_hat }
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn s(&self) -> &ModuleVector {
        &self.s
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.s
            .to_bytes(self.params.coeff_bits())
            .expect("reduced coefficients fit the full width")
    }

    /// Rejects encodings whose coefficients exceed `η₁` in norm.
    pub fn from_bytes(bytes: &[u8], params: &ParamSet) -> Result<Self> {
        params.validate()?;
        let q = Modulus::new(params.q)?;
        let s = ModuleVector::from_bytes(bytes, params.coeff_bits(), params.k, params.n, q)?;
        if s.inf_norm() > params.eta1 {
            return Err(Error::Format("secret coefficients exceed eta".into()));
        }
        Ok(PkeSecretKey::new(*params, s))
    }
}

/// Ciphertext `(u, v)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KemCiphertext {
    params: ParamSet,
    u: CompressedVector,
    v: CompressedPoly,
}

impl KemCiphertext {
    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn u(&self) -> &CompressedVector {
        &self.u
    }

    pub fn v(&self) -> &CompressedPoly {
        &self.v
    }

    /// Replaces the components, keeping the width invariants.
    pub fn from_parts(params: &ParamSet, u: CompressedVector, v: CompressedPoly) -> Result<Self> {
        let ok = u.len() == params.k
            && u.polys().iter().all(|p| p.bits() == params.d_u && p.len() == params.n)
            && v.bits() == params.d_v
            && v.len() == params.v_len();
        if !ok {
            return Err(Error::Format(format!("ciphertext shape does not match {}", params.name)));
        }
        Ok(KemCiphertext { params: *params, u, v })
    }

    /// `serialize(u, d_u) ∥ serialize(v, d_v)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.params.ct_bytes());
        self.u.write_bytes(&mut out).expect("u fits d_u");
        self.v.write_bytes(&mut out).expect("v fits d_v");
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &ParamSet) -> Result<Self> {
        params.validate()?;
        if bytes.len() != params.ct_bytes() {
            return Err(Error::Format(format!(
                "{} ciphertext is {} bytes, got {}",
                params.name,
                params.ct_bytes(),
                bytes.len()
            )));
        }
        let q = Modulus::new(params.q)?;
        let split = (params.k * params.n * params.d_u as usize).div_ceil(8);
        let (ub, vb) = bytes.split_at(split);
        Ok(KemCiphertext {
            params: *params,
            u: CompressedVector::from_bytes(ub, params.d_u, params.k, params.n, q)?,
            v: CompressedPoly::from_bytes(vb, params.d_v, params.v_len(), q)?,
        })
    }
}

fn message_bit(m: &Message, i: usize) -> u16 {
    ((m[i / 8] >> (i % 8)) & 1) as u16
}

/// Lifts a message into the `v` domain.
///
/// * MLWE: bit `i` → coefficient `i` scaled by `⌈q/2⌋`.
/// * RLWE: bit `i` is repeated at coefficients `i + 256·j`.
/// * LWE: 4-bit nibbles scaled by `q/16`, one per block entry.
pub(crate) fn encode_message(m: &Message, params: &ParamSet) -> RingElement {
    let q = Modulus::new_unchecked(params.q);
    let half = round_div(params.q as u64, 2) as u16;
    let coeffs = match params.variant {
        Variant::Mlwe | Variant::Rlwe => (0..params.n)
            .map(|c| message_bit(m, c % MESSAGE_BITS) * half)
            .collect(),
        Variant::Lwe => {
            let step = params.q >> LWE_BITS_PER_ENTRY;
            (0..params.v_len())
                .map(|e| {
                    let nibble = (m[e / 2] >> (4 * (e % 2))) & 0x0f;
                    (nibble as u32 * step) as u16
                })
                .collect()
        }
    };
    RingElement::from_raw(coeffs, q)
}

/// Inverse of [`encode_message`] on a noisy input.
pub(crate) fn decode_message(w: &RingElement, params: &ParamSet) -> Message {
    let mut m = [0u8; 32];
    let q = w.modulus();
    let qv = params.q;
    match params.variant {
        Variant::Mlwe => {
            for (i, &c) in w.coeffs().iter().enumerate() {
                let bit = compress_unchecked(c as u32, 1, qv) as u8;
                m[i / 8] |= bit << (i % 8);
            }
        }
        Variant::Rlwe => {
            let half = round_div(qv as u64, 2) as u32;
            for i in 0..MESSAGE_BITS {
                let (mut to_zero, mut to_half) = (0u64, 0u64);
                for c in w.coeffs().iter().skip(i).step_by(MESSAGE_BITS) {
                    to_zero += q.centered(*c as u32).unsigned_abs() as u64;
                    to_half += q.centered(q.sub(*c as u32, half)).unsigned_abs() as u64;
                }
                m[i / 8] |= ((to_half < to_zero) as u8) << (i % 8);
            }
        }
        Variant::Lwe => {
            for (e, &c) in w.coeffs().iter().enumerate() {
                let nibble = compress_unchecked(c as u32, LWE_BITS_PER_ENTRY, qv) as u8;
                m[e / 2] |= nibble << (4 * (e % 2));
            }
        }
    }
    m
}

/// Deterministic key generation from `ρ ∥ σ`.
pub fn cpa_keygen(seed: &[u8; 64], params: &ParamSet) -> Result<(PkePublicKey, PkeSecretKey)> {
    params.validate()?;
    let q = Modulus::new(params.q)?;
    let rho: [u8; 32] = seed[..32].try_into().expect("32 bytes");
    let sigma = &seed[32..];
    let a = expand_matrix(&rho, params)?;
    let s = ModuleVector::sample_cbd(
        &mut Xof::new(sigma, domain::KEYGEN_SECRET),
        params.eta1,
        params.k,
        params.n,
        q,
    )?;
    let e = ModuleVector::sample_cbd(
        &mut Xof::new(sigma, domain::KEYGEN_ERROR),
        params.eta1,
        params.k,
        params.n,
        q,
    )?;
    let t = a.mul_vec(&s)?.add(&e)?;
    Ok((
        PkePublicKey {
            params: *params,
            t: CompressedVector::compress(&t, params.d_t),
            rho,
        },
        PkeSecretKey::new(*params, s),
    ))
}

/// A public key with `A` expanded and `t` decompressed and prepared, for
/// repeated encryption.
pub(crate) struct EncryptionKey {
    pk: PkePublicKey,
    a: PublicMatrix,
    t_hat: Prepared,
}

impl EncryptionKey {
    pub(crate) fn new(pk: &PkePublicKey) -> Result<Self> {
        Ok(EncryptionKey {
            pk: pk.clone(),
            a: expand_matrix(&pk.rho, &pk.params)?,
            t_hat: pk.decompressed_t().prepare(),
        })
    }

    pub(crate) fn public_key(&self) -> &PkePublicKey {
        &self.pk
    }
}

/// Encryption with explicit coins, or fresh OS randomness when `coins` is `None`.
pub fn cpa_encrypt(pk: &PkePublicKey, m: &Message, coins: Option<&[u8; 32]>) -> Result<KemCiphertext> {
    encrypt_prepared(&EncryptionKey::new(pk)?, m, coins)
}

pub(crate) fn encrypt_prepared(ek: &EncryptionKey, m: &Message, coins: Option<&[u8; 32]>) -> Result<KemCiphertext> {
    let params = &ek.pk.params;
    let l = match coins {
        Some(l) => *l,
        None => {
            let mut l = [0u8; 32];
            OsRng.fill_bytes(&mut l);
            l
        }
    };
    let q = Modulus::new(params.q)?;
    let r = ModuleVector::sample_cbd(&mut Xof::new(&l, domain::ENC_R), params.eta1, params.k, params.n, q)?;
    let e1 = ModuleVector::sample_cbd(&mut Xof::new(&l, domain::ENC_E1), params.eta2, params.k, params.n, q)?;
    let e2 = ModuleVector::sample_cbd(&mut Xof::new(&l, domain::ENC_E2), params.eta2, 1, params.v_len(), q)?;
    let r_hat = r.prepare();
    let u = ek.a.mul_prepared(&r_hat, true)?.add(&e1)?;
    let v = pairing_prepared(params.variant, &r_hat, &ek.t_hat)?
        .add(&e2.elems()[0])?
        .add(&encode_message(m, params))?;
    Ok(KemCiphertext {
        params: *params,
        u: CompressedVector::compress(&u, params.d_u),
        v: CompressedPoly::compress(&v, params.d_v),
    })
}

pub fn cpa_decrypt(sk: &PkeSecretKey, c: &KemCiphertext) -> Result<Message> {
    param_check(&sk.params, &c.params)?;
    let q = Modulus::new(sk.params.q)?;
    let u = c.u.decompress(q);
    let v = c.v.decompress(q);
    let w = v.sub(&pairing_prepared(sk.params.variant, &u.prepare(), &sk.s_hat)?)?;
    Ok(decode_message(&w, &sk.params))
}
