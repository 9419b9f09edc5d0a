//! Named lattice parameter bundles.
//!
//! Every protocol object carries the [`ParamSet`] it was built under, and the
//! three lattice flavours share one code path selected by [`Variant`]:
//!
//! | name       | variant | n    | k | q      | η₁ | η₂ | d_t | d_u | d_v |
//! |------------|---------|------|---|--------|----|----|-----|-----|-----|
//! | kyber512   | MLWE    | 256  | 2 | 3329   | 3  | 2  | 10  | 10  | 4   |
//! | kyber768   | MLWE    | 256  | 3 | 3329   | 2  | 2  | 10  | 10  | 4   |
//! | kyber1024  | MLWE    | 256  | 4 | 3329   | 2  | 2  | 11  | 11  | 5   |
//! | rlwe512    | RLWE    | 512  | 1 | 12289  | 8  | 8  | 14  | 14  | 4   |
//! | rlwe1024   | RLWE    | 1024 | 1 | 12289  | 8  | 8  | 14  | 14  | 4   |
//! | lwe640     | LWE     | 640  | 8 | 2^15   | 4  | 4  | 15  | 15  | 15  |
//! | lwe976     | LWE     | 976  | 8 | 2^16   | 4  | 4  | 16  | 16  | 16  |
//! | lwe1344    | LWE     | 1344 | 8 | 2^16   | 4  | 4  | 16  | 16  | 16  |
//!
//! A bit-width equal to ⌈log₂ q⌉ means the component is stored uncompressed.
//! For the LWE sets `k` is the number of secret columns (the secret is an
//! `n × k` matrix) rather than a module rank.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which lattice structure a parameter set instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Module-LWE over `R_q^k`, `R_q = Z_q[x]/(x^256 + 1)`.
    Mlwe,
    /// Ring-LWE, a rank-one module over a larger ring.
    Rlwe,
    /// Plain LWE with an unstructured `n × n` matrix.
    Lwe,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Mlwe => "MLWE",
            Variant::Rlwe => "RLWE",
            Variant::Lwe => "LWE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamSet {
    pub name: &'static str,
    pub variant: Variant,
    /// Ring degree (MLWE/RLWE) or matrix dimension (LWE).
    pub n: usize,
    /// Module rank (MLWE), 1 (RLWE) or number of secret columns (LWE).
    pub k: usize,
    pub q: u32,
    /// CBD parameter for secrets, key noise and the encryption randomness `r`.
    pub eta1: u32,
    /// CBD parameter for the encryption errors `e1`, `e2`.
    pub eta2: u32,
    pub d_t: u32,
    pub d_u: u32,
    pub d_v: u32,
    /// Default view-tag width in bytes.
    pub vt_bytes: usize,
}

pub const KYBER512: ParamSet = ParamSet {
    name: "kyber512",
    variant: Variant::Mlwe,
    n: 256,
    k: 2,
    q: 3329,
    eta1: 3,
    eta2: 2,
    d_t: 10,
    d_u: 10,
    d_v: 4,
    vt_bytes: 1,
};

pub const KYBER768: ParamSet = ParamSet {
    name: "kyber768",
    k: 3,
    eta1: 2,
    ..KYBER512
};

pub const KYBER1024: ParamSet = ParamSet {
    name: "kyber1024",
    k: 4,
    eta1: 2,
    d_t: 11,
    d_u: 11,
    d_v: 5,
    ..KYBER512
};

pub const RLWE512: ParamSet = ParamSet {
    name: "rlwe512",
    variant: Variant::Rlwe,
    n: 512,
    k: 1,
    q: 12289,
    eta1: 8,
    eta2: 8,
    d_t: 14,
    d_u: 14,
    d_v: 4,
    vt_bytes: 1,
};

pub const RLWE1024: ParamSet = ParamSet {
    name: "rlwe1024",
    n: 1024,
    ..RLWE512
};

pub const LWE640: ParamSet = ParamSet {
    name: "lwe640",
    variant: Variant::Lwe,
    n: 640,
    k: 8,
    q: 1 << 15,
    eta1: 4,
    eta2: 4,
    d_t: 15,
    d_u: 15,
    d_v: 15,
    vt_bytes: 1,
};

pub const LWE976: ParamSet = ParamSet {
    name: "lwe976",
    n: 976,
    q: 1 << 16,
    d_t: 16,
    d_u: 16,
    d_v: 16,
    ..LWE640
};

pub const LWE1344: ParamSet = ParamSet {
    name: "lwe1344",
    n: 1344,
    ..LWE976
};

/// All presets, in the order they are reported by the CLI.
pub const ALL: [ParamSet; 8] = [
    KYBER512, KYBER768, KYBER1024, RLWE512, RLWE1024, LWE640, LWE976, LWE1344,
];

/// Number of message bits carried by one ciphertext.
pub const MESSAGE_BITS: usize = 256;

/// Bits of message per entry of the LWE `k × k` message block.
pub(crate) const LWE_BITS_PER_ENTRY: u32 = 4;

/// ⌈log₂ q⌉ for q ≥ 2.
pub const fn ceil_log2(q: u32) -> u32 {
    32 - (q - 1).leading_zeros()
}

impl ParamSet {
    pub fn by_name(name: &str) -> Result<ParamSet> {
        ALL.iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
            .copied()
            .ok_or_else(|| Error::UnknownParamSet(name.to_string()))
    }

    /// Width of a full, uncompressed coefficient.
    pub const fn coeff_bits(&self) -> u32 {
        ceil_log2(self.q)
    }

    /// Number of coefficients in the `v` component of a ciphertext.
    pub const fn v_len(&self) -> usize {
        match self.variant {
            Variant::Lwe => self.k * self.k,
            _ => self.n,
        }
    }

    /// Number of coefficients per element of a secret/public vector.
    pub const fn elem_len(&self) -> usize {
        self.n
    }

    pub const fn pk_bytes(&self) -> usize {
        packed_len(self.k * self.n, self.d_t) + 32
    }

    pub const fn ct_bytes(&self) -> usize {
        packed_len(self.k * self.n, self.d_u) + packed_len(self.v_len(), self.d_v)
    }

    /// Serialized PKE secret: full-width coefficients.
    pub const fn pke_sk_bytes(&self) -> usize {
        packed_len(self.k * self.n, self.coeff_bits())
    }

    /// Serialized KEM secret: `s ∥ z ∥ pk`.
    pub const fn kem_sk_bytes(&self) -> usize {
        self.pke_sk_bytes() + 32 + self.pk_bytes()
    }

    /// Checks the structural invariants of the set.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(format!("{}: {m}", self.name)));
        if self.q < 2 {
            return bad("q must be at least 2");
        }
        if self.q > 1 << 16 {
            return bad("q must fit in 16 bits");
        }
        if self.n == 0 || self.k == 0 {
            return bad("n and k must be positive");
        }
        if self.eta1 == 0 || self.eta2 == 0 {
            return bad("eta must be positive");
        }
        let full = self.coeff_bits();
        for d in [self.d_t, self.d_u, self.d_v] {
            if d == 0 || d > full {
                return bad("compression width out of range");
            }
        }
        match self.variant {
            Variant::Mlwe => {
                if self.n != 256 || self.q != 3329 {
                    return bad("MLWE sets use n = 256, q = 3329");
                }
                if self.d_t >= full || self.d_u >= full || self.d_v >= full {
                    return bad("MLWE compression widths must be below ceil(log2 q)");
                }
            }
            Variant::Rlwe => {
                if self.k != 1 || !self.n.is_power_of_two() || !self.n.is_multiple_of(MESSAGE_BITS) {
                    return bad("RLWE sets need k = 1 and n a power-of-two multiple of 256");
                }
            }
            Variant::Lwe => {
                if self.k * self.k * LWE_BITS_PER_ENTRY as usize != MESSAGE_BITS {
                    return bad("LWE message block must carry 256 bits");
                }
                if self.d_v < LWE_BITS_PER_ENTRY {
                    return bad("d_v too small for the LWE message encoding");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

impl FromStr for ParamSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamSet::by_name(s)
    }
}

/// Bytes needed to pack `count` values of `bits` bits each.
pub const fn packed_len(count: usize, bits: u32) -> usize {
    (count * bits as usize).div_ceil(8)
}
