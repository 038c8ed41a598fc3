use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of `bytes`.
pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Derives a child seed from a parent seed and a fixed label.
pub(crate) fn fork_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(buf)
}

/// 64-bit FNV-1a, seeded by prefixing the seed bytes. Stable across
/// platforms and toolchains, unlike `DefaultHasher`.
pub(crate) fn fnv1a(seed: u64, parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in seed.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    for part in parts {
        for &b in *part {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
        // part separator
        h ^= 0xff;
        h = h.wrapping_mul(PRIME);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fork_seed_is_label_sensitive() {
        assert_eq!(fork_seed(7, "train"), fork_seed(7, "train"));
        assert_ne!(fork_seed(7, "train"), fork_seed(7, "score"));
        assert_ne!(fork_seed(7, "train"), fork_seed(8, "train"));
    }

    #[test]
    fn fnv_separates_parts() {
        assert_ne!(fnv1a(0, &[b"ab", b"c"]), fnv1a(0, &[b"a", b"bc"]));
    }
}
