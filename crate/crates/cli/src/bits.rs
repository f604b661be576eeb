//! Bit files: bit `i` is bit `i % 8` (least significant first) of byte `i / 8`;
//! unused high bits of the last byte are zero.

use anyhow::{bail, Result};

pub fn pack(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (i % 8);
    }
    out
}

pub fn unpack(bytes: &[u8], n: usize) -> Result<Vec<u8>> {
    if bytes.len() != n.div_ceil(8) {
        bail!("expected {} bytes for {n} bits, found {}", n.div_ceil(8), bytes.len());
    }
    if n % 8 != 0 && bytes[n / 8] >> (n % 8) != 0 {
        bail!("nonzero padding bits in the last byte");
    }
    Ok((0..n).map(|i| bytes[i / 8] >> (i % 8) & 1).collect())
}
