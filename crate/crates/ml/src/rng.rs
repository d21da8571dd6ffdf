pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of tree `index`: `splitmix64(splitmix64(master) ^ index)`.
pub fn tree_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // First outputs of the reference splitmix64 generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn tree_seeds_distinct() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| tree_seed(42, i)).collect();
        assert_eq!(s.len(), 1000);
    }
}
