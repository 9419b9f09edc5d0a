//! Deterministic byte streams and the samplers that consume them.
//!
//! The XOF is SHAKE-128 over `seed ∥ domain ∥ index`; distinct domain bytes
//! give independent streams from the same seed. See [`domain`] for the tags
//! used across the crate.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake128, Shake128Reader};

use crate::error::{Error, Result};
use crate::lattice::arith::Modulus;
use crate::lattice::params::ceil_log2;

/// Single-byte domain separators appended to XOF seeds.
pub mod domain {
    pub const MATRIX: u8 = 0x01;
    pub const KEYGEN_SECRET: u8 = 0x02;
    pub const KEYGEN_ERROR: u8 = 0x03;
    pub const ENC_R: u8 = 0x04;
    pub const ENC_E1: u8 = 0x05;
    pub const ENC_E2: u8 = 0x06;
    pub const SAP_Y: u8 = 0x10;
    pub const SAP_E1: u8 = 0x11;
    pub const META_SPEND: u8 = 0x20;
    pub const META_VIEW: u8 = 0x21;
    pub const DECOY: u8 = 0x30;
    pub const DECOY_POSITIONS: u8 = 0x31;
    pub const CLI_ENTROPY: u8 = 0x40;
}

/// An unbounded, deterministic byte stream.
pub struct Xof {
    reader: Shake128Reader,
}

impl Xof {
    pub fn new(seed: &[u8], domain: u8) -> Self {
        Self::with_index(seed, domain, &[])
    }

    pub fn with_index(seed: &[u8], domain: u8, index: &[u8]) -> Self {
        let mut h = Shake128::default();
        h.update(seed);
        h.update(&[domain]);
        h.update(index);
        Xof {
            reader: h.finalize_xof(),
        }
    }

    pub fn fill(&mut self, out: &mut [u8]) {
        self.reader.read(out);
    }

    pub fn take(&mut self, len: usize) -> Vec<u8> {
        let mut out = vec![0u8; len];
        self.fill(&mut out);
        out
    }
}

/// Convenience wrapper: the first `len` bytes of `xof(seed, domain)`.
pub fn xof(seed: &[u8], domain: u8, len: usize) -> Vec<u8> {
    Xof::new(seed, domain).take(len)
}

/// Centred binomial samples `Σ (a_i - b_i)`, each from `2η` consecutive
/// little-endian bits of `bytes`.
pub fn cbd_sample(bytes: &[u8], eta: u32, count: usize) -> Result<Vec<i32>> {
    if eta == 0 || eta > 16 {
        return Err(Error::Domain(format!("eta {eta} outside [1, 16]")));
    }
    let needed = cbd_bytes(eta, count);
    if bytes.len() < needed {
        return Err(Error::StreamUnderflow {
            needed,
            available: bytes.len(),
        });
    }
    let mut bits = BitReader::new(bytes);
    let mask = (1u64 << eta) - 1;
    Ok((0..count)
        .map(|_| {
            let a = bits.read(eta).unwrap_or(0) & mask;
            let b = bits.read(eta).unwrap_or(0) & mask;
            a.count_ones() as i32 - b.count_ones() as i32
        })
        .collect())
}

/// Bytes consumed by `count` samples of `B_η`.
pub const fn cbd_bytes(eta: u32, count: usize) -> usize {
    (2 * eta as usize * count).div_ceil(8)
}

/// Draws `count` CBD samples from the stream and reduces them mod `q`.
pub(crate) fn cbd_from_xof(xof: &mut Xof, eta: u32, count: usize, q: Modulus) -> Result<Vec<u16>> {
    let bytes = xof.take(cbd_bytes(eta, count));
    Ok(cbd_sample(&bytes, eta, count)?
        .into_iter()
        .map(|x| q.reduce_signed(x as i64) as u16)
        .collect())
}

/// Upper limit on rejected candidates before giving up.
const MAX_REJECTIONS: usize = 1 << 20;

/// Uniform residues mod `q` by rejection sampling `⌈log₂ q⌉`-bit
/// little-endian candidates.
pub fn sample_uniform(xof: &mut Xof, q: u32, count: usize) -> Result<Vec<u16>> {
    let width = ceil_log2(q);
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0usize;
    let mut buf = [0u8; 168];
    let mut acc: u64 = 0;
    let mut have: u32 = 0;
    let mask = (1u64 << width) - 1;
    while out.len() < count {
        xof.fill(&mut buf);
        for &byte in &buf {
            acc |= (byte as u64) << have;
            have += 8;
            while have >= width {
                let cand = (acc & mask) as u32;
                acc >>= width;
                have -= width;
                if cand < q {
                    out.push(cand as u16);
                    if out.len() == count {
                        return Ok(out);
                    }
                } else {
                    rejected += 1;
                    if rejected > MAX_REJECTIONS {
                        return Err(Error::SamplerExhausted(rejected));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Little-endian bit reader over a byte slice.
pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u64,
    have: u32,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            acc: 0,
            have: 0,
        }
    }

    /// Reads `bits ≤ 32` bits, or `None` if the input is exhausted.
    pub(crate) fn read(&mut self, bits: u32) -> Option<u64> {
        while self.have < bits {
            let b = *self.bytes.get(self.pos)?;
            self.pos += 1;
            self.acc |= (b as u64) << self.have;
            self.have += 8;
        }
        let v = self.acc & ((1u64 << bits) - 1);
        self.acc >>= bits;
        self.have -= bits;
        Some(v)
    }
}
