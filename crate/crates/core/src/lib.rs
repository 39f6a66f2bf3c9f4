//! Dual-stream vehicle health monitoring core.
//!
//! Two independent per-window signals are computed from the same telemetry
//! stream and fused by max-pooling:
//!
//! * stream A — reconstruction error of an LSTM autoencoder trained on
//!   normal driving ([`autoencoder`]);
//! * stream B — four closed-form physics stress proxies ([`physics`]).
//!
//! [`fusion`] normalizes both streams against calibration missions and maps
//! the pair onto a four-quadrant maintenance decision. [`telemetry`] owns
//! parsing and windowing, [`synthgen`] generates labeled synthetic missions,
//! and [`stats`] carries the rank statistics used for validation.
//!
//! The crate is `no_std` + `alloc`; everything here is pure computation over
//! slices, suitable for embedded scoring targets. File IO and the CLI live in
//! the companion `dualstream-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod autoencoder;
pub mod fusion;
pub mod physics;
pub mod stats;
pub mod synthgen;
pub mod telemetry;

/// FNV-1a 64-bit hash; used as the model-file trailing checksum and for
/// corpus digests.
pub fn checksum64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::checksum64;

    #[test]
    fn fnv1a_reference_vectors() {
        assert_eq!(checksum64(b""), 0xcbf29ce484222325);
        assert_eq!(checksum64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(checksum64(b"foobar"), 0x85944171f73967e8);
    }
}
