//! Canonical little-endian bit packing.
//!
//! Values are written as consecutive `bits`-wide fields, value 0 in the
//! lowest bits of byte 0. A trailing partial byte is zero-padded. These bytes
//! are hashed by the KEM and the address derivation, so the layout is part of
//! the wire format.

use crate::error::{Error, Result};
use crate::lattice::sample::BitReader;

pub fn pack_bits(values: &[u16], bits: u32) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity((values.len() * bits as usize).div_ceil(8));
    pack_bits_into(values, bits, &mut out)?;
    Ok(out)
}

pub fn pack_bits_into(values: &[u16], bits: u32, out: &mut Vec<u8>) -> Result<()> {
    if bits == 0 || bits > 16 {
        return Err(Error::Format(format!("unsupported field width {bits}")));
    }
    let mut acc: u64 = 0;
    let mut have = 0u32;
    for &v in values {
        if (v as u32) >> bits != 0 {
            return Err(Error::Format(format!("value {v} does not fit in {bits} bits")));
        }
        acc |= (v as u64) << have;
        have += bits;
        while have >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            have -= 8;
        }
    }
    if have > 0 {
        out.push(acc as u8);
    }
    Ok(())
}

/// Inverse of [`pack_bits`]. `bytes` must be exactly the packed length, and
/// every value must be below `bound`.
pub fn unpack_bits(bytes: &[u8], bits: u32, count: usize, bound: u32) -> Result<Vec<u16>> {
    if bits == 0 || bits > 16 {
        return Err(Error::Format(format!("unsupported field width {bits}")));
    }
    let expected = (count * bits as usize).div_ceil(8);
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes for {count} x {bits}-bit values, got {}",
            bytes.len()
        )));
    }
    let mut reader = BitReader::new(bytes);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let v = reader.read(bits).ok_or_else(|| Error::Format("truncated".into()))? as u32;
        if v >= bound {
            return Err(Error::Format(format!("coefficient {i} = {v} out of range (< {bound})")));
        }
        out.push(v as u16);
    }
    // Padding bits must be zero, otherwise encodings are not canonical.
    let pad = (expected * 8 - count * bits as usize) as u32;
    if pad > 0 && reader.read(pad).unwrap_or(0) != 0 {
        return Err(Error::Format("non-zero padding bits".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sizes_and_zero() {
        assert_eq!(pack_bits(&[0u16; 256], 12).unwrap(), vec![0u8; 384]);
        assert_eq!(pack_bits(&[1, 2], 4).unwrap(), vec![0x21]);
        assert_eq!(pack_bits(&[0xabc, 0x123], 12).unwrap(), vec![0xbc, 0x3a, 0x12]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(pack_bits(&[16], 4).is_err());
        assert!(unpack_bits(&[0u8; 3], 12, 3, 4096).is_err());
        assert!(unpack_bits(&[0xff, 0x0f], 12, 1, 4096).is_ok());
        assert!(unpack_bits(&[0xff, 0xff], 12, 1, 4096).is_err());
        // 0xfff >= 3329
        assert!(unpack_bits(&[0xff, 0xff, 0xff], 12, 2, 3329).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(bits in 1u32..=16, raw in proptest::collection::vec(any::<u16>(), 0..300)) {
            let values: Vec<u16> = raw.iter().map(|v| (*v as u32 & ((1 << bits) - 1)) as u16).collect();
            let bytes = pack_bits(&values, bits).unwrap();
            prop_assert_eq!(bytes.len(), (values.len() * bits as usize).div_ceil(8));
            let back = unpack_bits(&bytes, bits, values.len(), 1 << bits).unwrap();
            prop_assert_eq!(back, values);
        }
    }
}
