//! Built-in consistency checks: the exhaustive compression bound and a
//! KEM and stealth-address round trip for every parameter set.

use pq_sap::kem::{cca_keygen, decaps, encaps, KemCiphertext};
use pq_sap::lattice::params::{ceil_log2, ALL};
use pq_sap::lattice::{compress, compression_error_bound, decompress, symmetric_mod, Variant};
use pq_sap::sap::{generate_meta, recover_spend, scan, send, verify_key_pair, ViewTagWidth};

/// Deliberate defects for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Compression rounds one step too high.
    CompressOffByOne,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub failure: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type CompressFn = fn(u32, u32, u32) -> pq_sap::Result<u32>;

fn faulty_compress(x: u32, d: u32, q: u32) -> pq_sap::Result<u32> {
    Ok((compress(x, d, q)? + 1) % (1 << d))
}

fn compression_bound(q: u32, compress: CompressFn) -> Result<(), String> {
    for d in 1..ceil_log2(q) {
        let bound = compression_error_bound(d, q) as i64;
        for x in 0..q {
            let y = compress(x, d, q).map_err(|e| e.to_string())?;
            let back = decompress(y, d, q).map_err(|e| e.to_string())?;
            let err = symmetric_mod(back as i64 - x as i64, q as u64).map_err(|e| e.to_string())?;
            if err.abs() > bound {
                return Err(format!("q={q} d={d} x={x}: error {err} exceeds {bound}"));
            }
        }
    }
    Ok(())
}

fn kem_round_trip(p: &pq_sap::lattice::ParamSet) -> Result<(), String> {
    let trials = if p.variant == Variant::Lwe { 2 } else { 10 };
    for t in 0..trials {
        let mut seed = [0u8; 96];
        seed[0] = t;
        let (pk, sk) = cca_keygen(&seed, p).map_err(|e| e.to_string())?;
        let (c, k) = encaps(&pk, Some(&[t; 32])).map_err(|e| e.to_string())?;
        if decaps(&sk, &c) != k {
            return Err(format!("trial {t}: shared secrets differ"));
        }
        let mut bytes = c.to_bytes();
        bytes[t as usize] ^= 1;
        // An unparseable ciphertext counts as rejected.
        let Ok(bad) = KemCiphertext::from_bytes(&bytes, p) else {
            continue;
        };
        if decaps(&sk, &bad) == k {
            return Err(format!("trial {t}: tampered ciphertext accepted"));
        }
    }
    Ok(())
}

fn sap_round_trip(p: &pq_sap::lattice::ParamSet) -> Result<(), String> {
    let (keys, meta) = generate_meta(p.name.as_bytes(), p).map_err(|e| e.to_string())?;
    let (ann, sent) = send(&meta, Some(&[7; 32]), ViewTagWidth::OneByte).map_err(|e| e.to_string())?;
    let out = scan(&keys.viewing_key(), &[ann], ViewTagWidth::OneByte).map_err(|e| e.to_string())?;
    let [found] = out.matches.as_slice() else {
        return Err(format!("scan found {} matches", out.matches.len()));
    };
    let (addr, sk) = recover_spend(&keys, &found.secret).map_err(|e| e.to_string())?;
    if addr != sent || found.address != sent {
        return Err("recovered address differs from the sent one".into());
    }
    match verify_key_pair(&addr.pubkey, &sk.p, &sk.e1, meta.spend_key().rho(), p) {
        Ok(true) => Ok(()),
        Ok(false) => Err("P != A p + e1".into()),
        Err(e) => Err(e.to_string()),
    }
}

pub fn run(fault: Option<Fault>) -> Vec<Check> {
    let compress_fn: CompressFn = match fault {
        Some(Fault::CompressOffByOne) => faulty_compress,
        None => compress,
    };
    let mut checks = Vec::new();
    let mut record = |name: String, r: Result<(), String>| {
        checks.push(Check { name, failure: r.err() });
    };
    for q in [3329, 12289] {
        record(format!("compression-bound q={q}"), compression_bound(q, compress_fn));
    }
    for p in ALL {
        record(format!("kem {}", p.name), kem_round_trip(&p));
        record(format!("sap {}", p.name), sap_round_trip(&p));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_check_detects_fault() {
        assert!(compression_bound(3329, compress).is_ok());
        assert!(compression_bound(3329, faulty_compress).is_err());
    }
}
