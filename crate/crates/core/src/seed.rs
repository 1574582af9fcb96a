//! Seed splitting.
//!
//! `derive_seed(master, label, index)` is
//!
//! ```text
//! h = splitmix64(master)
//! h = splitmix64(h ^ fnv1a64(label))
//! h = splitmix64(h ^ index)
//! ```
//!
//! The rule is part of the output contract: changing it changes every
//! generated instance.

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ fnv1a64(label.as_bytes()));
    splitmix64(h ^ index)
}
