//! Scalar arithmetic over `Z_q`: reduction, centred representatives and
//! lossy coefficient compression. Everything here is exact integer math.

use crate::error::{Error, Result};
use crate::lattice::params::ceil_log2;

/// A modulus `q` with `2 ≤ q ≤ 2^16` and a precomputed Barrett constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    q: u32,
    barrett: u64,
}

impl Modulus {
    pub fn new(q: u32) -> Result<Self> {
        if !(2..=1 << 16).contains(&q) {
            return Err(Error::Domain(format!("modulus {q} outside [2, 2^16]")));
        }
        Ok(Self::new_unchecked(q))
    }

    pub(crate) const fn new_unchecked(q: u32) -> Self {
        Modulus {
            q,
            barrett: (1u64 << 32) / q as u64,
        }
    }

    #[inline]
    pub const fn value(&self) -> u32 {
        self.q
    }

    /// Reduces any `x < 2^32`.
    #[inline]
    pub fn reduce(&self, x: u32) -> u32 {
        let quot = ((x as u64 * self.barrett) >> 32) as u32;
        // The quotient estimate is short by at most two.
        let r = x - quot * self.q;
        csub(csub(r, self.q), self.q)
    }

    #[inline]
    pub fn reduce_u64(&self, x: u64) -> u32 {
        (x % self.q as u64) as u32
    }

    #[inline]
    pub fn reduce_signed(&self, x: i64) -> u32 {
        x.rem_euclid(self.q as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        csub(a + b, self.q)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        csub(a + self.q - b, self.q)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a * b)
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse for prime `q`, via Fermat.
    pub fn inv(&self, a: u32) -> u32 {
        self.pow(a, self.q as u64 - 2)
    }

    /// Centred representative: `(-q/2, q/2]` for even `q`,
    /// `[-(q-1)/2, (q-1)/2]` for odd `q`.
    #[inline]
    pub fn centered(&self, x: u32) -> i32 {
        let r = self.reduce(x) as i32;
        r - (self.q as i32 & -((r > (self.q / 2) as i32) as i32))
    }
}

/// `x - q` if `x ≥ q`, else `x`, without a data-dependent branch.
/// Needs `x < 2^31`.
#[inline(always)]
pub(crate) fn csub(x: u32, q: u32) -> u32 {
    let t = x.wrapping_sub(q);
    t.wrapping_add(q & 0u32.wrapping_sub(t >> 31))
}

/// `r mod q` in `[0, q)`, correct for negative `r`.
pub fn mod_reduce(r: i64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    Ok(r.rem_euclid(q as i64) as u64)
}

/// Symmetric reduction `r mod± q`.
pub fn symmetric_mod(r: i64, q: u64) -> Result<i64> {
    if q < 2 {
        return Err(Error::Domain(format!("symmetric reduction needs q >= 2, got {q}")));
    }
    let r = mod_reduce(r, q)? as i64;
    // For odd q this keeps (q-1)/2 positive and maps (q+1)/2 to -(q-1)/2.
    Ok(if r > (q / 2) as i64 { r - q as i64 } else { r })
}

/// `⌈a / b⌋` with halves rounded up, for `a ≥ 0`, `b > 0`.
#[inline]
pub(crate) const fn round_div(a: u64, b: u64) -> u64 {
    (2 * a + b) / (2 * b)
}

fn check_width(d: u32, q: u32) -> Result<()> {
    if q < 2 {
        return Err(Error::Domain(format!("modulus {q} too small")));
    }
    if d == 0 || d >= ceil_log2(q) {
        return Err(Error::Domain(format!(
            "compression width {d} must lie in [1, {})",
            ceil_log2(q)
        )));
    }
    Ok(())
}

/// `Compress_q(x, d) = ⌈2^d · x / q⌋ mod 2^d`.
pub fn compress(x: u32, d: u32, q: u32) -> Result<u32> {
    check_width(d, q)?;
    if x >= q {
        return Err(Error::Domain(format!("{x} is not reduced mod {q}")));
    }
    Ok(compress_unchecked(x, d, q))
}

/// `Decompress_q(y, d) = ⌈q · y / 2^d⌋ mod q`.
pub fn decompress(y: u32, d: u32, q: u32) -> Result<u32> {
    check_width(d, q)?;
    if y >> d != 0 {
        return Err(Error::Domain(format!("{y} does not fit in {d} bits")));
    }
    Ok(decompress_unchecked(y, d, q))
}

#[inline]
pub(crate) fn compress_unchecked(x: u32, d: u32, q: u32) -> u32 {
    let v = round_div((x as u64) << d, q as u64);
    (v & ((1u64 << d) - 1)) as u32
}

#[inline]
pub(crate) fn decompress_unchecked(y: u32, d: u32, q: u32) -> u32 {
    let v = round_div(q as u64 * y as u64, 1u64 << d);
    (v % q as u64) as u32
}

/// The round-trip error bound `⌈q / 2^(d+1)⌋`.
pub fn compression_error_bound(d: u32, q: u32) -> u32 {
    round_div(q as u64, 1u64 << (d + 1)) as u32
}
