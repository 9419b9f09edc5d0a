//! Post-quantum stealth address protocols over LWE, Ring-LWE and Module-LWE.
//!
//! The crate is layered bottom-up:
//!
//! * [`lattice`]: `Z_q` / `R_q` arithmetic, samplers, compression, encodings.
//! * [`kem`]: IND-CPA encryption and the Fujisaki–Okamoto CCA KEM, one code
//!   path for all three lattice variants.
//! * [`sap`]: meta-addresses, sending, scanning with view tags, stealth key
//!   derivation and viewing-key delegation.
//! * [`registry`]: the append-only announcement log and benchmark fixtures.

pub mod error;
pub mod kem;
pub mod lattice;
pub mod registry;
pub mod sap;

pub use error::{Error, Result};
