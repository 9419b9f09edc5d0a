//! Exact arithmetic over `Z_q` and `R_q = Z_q[x]/(x^n + 1)`, samplers,
//! compression and canonical encodings.
//!
//! Everything in this module is a pure function of its inputs. Constant-time
//! execution is best-effort only: the code avoids secret-dependent branches in
//! the hot paths but makes no guarantee.

pub mod arith;
pub mod encode;
mod ntt;
pub mod params;
pub mod poly;
pub mod sample;

pub use arith::{
    compress, compression_error_bound, decompress, mod_reduce, symmetric_mod, Modulus,
};
pub use encode::{pack_bits, unpack_bits};
pub use params::{ParamSet, Variant};
pub use poly::{
    expand_matrix, pairing, CompressedPoly, CompressedVector, ModuleMatrix, ModuleVector,
    PlainMatrix, PublicMatrix, RingElement,
};
pub use sample::{cbd_sample, sample_uniform, xof, Xof};
