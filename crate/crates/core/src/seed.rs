//! Stable derivation of per-run seeds.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Seed for one run, depending only on its own identifiers: adding or
/// removing other problems or strategies leaves it unchanged.
pub fn run_seed(master: u64, problem: &str, strategy: &str, repetition: u64) -> u64 {
    let mut h = fnv1a(0xCBF2_9CE4_8422_2325, &master.to_le_bytes());
    // Length prefixes keep ("ab","c") and ("a","bc") apart.
    for part in [problem, strategy] {
        h = fnv1a(h, &(part.len() as u64).to_le_bytes());
        h = fnv1a(h, part.as_bytes());
    }
    h = fnv1a(h, &repetition.to_le_bytes());
    mix64(h)
}
