//! Signed feature hashing with 32-bit FNV-1a.

const FNV_OFFSET: u32 = 0x811c_9dc5;
const FNV_PRIME: u32 = 0x0100_0193;

/// Separator byte placed between the tokens of an n-gram before hashing.
pub const TOKEN_SEPARATOR: u8 = 0x1f;

pub fn fnv1a32(bytes: &[u8]) -> u32 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u32;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// FNV-1a over the UTF-8 bytes of `tokens` joined by [`TOKEN_SEPARATOR`].
pub fn hash_ngram<S: AsRef<str>>(tokens: &[S]) -> u32 {
    let mut h = FNV_OFFSET;
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            h ^= TOKEN_SEPARATOR as u32;
            h = h.wrapping_mul(FNV_PRIME);
        }
        for &b in t.as_ref().as_bytes() {
            h ^= b as u32;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Column `h mod dims` and sign `+1` when bit 31 of `h` is clear, else `-1`.
pub fn column_and_sign(hash: u32, dims: usize) -> (usize, f64) {
    let col = (hash as u64 % dims as u64) as usize;
    let sign = if hash & 0x8000_0000 == 0 { 1.0 } else { -1.0 };
    (col, sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vectors() {
        // Published FNV-1a 32-bit test vectors.
        assert_eq!(fnv1a32(b""), 0x811c9dc5);
        assert_eq!(fnv1a32(b"a"), 0xe40c292c);
        assert_eq!(fnv1a32(b"foobar"), 0xbf9cf968);
    }

    #[test]
    fn ngram_hash_matches_joined_bytes() {
        let joined = b"the\x1fcat";
        assert_eq!(hash_ngram(&["the", "cat"]), fnv1a32(joined));
        assert_eq!(hash_ngram(&["x"]), fnv1a32(b"x"));
    }

    #[test]
    fn sign_from_top_bit() {
        assert_eq!(column_and_sign(0x8000_0005, 10), (0x8000_0005 % 10, -1.0));
        assert_eq!(column_and_sign(7, 5), (2, 1.0));
    }
}
