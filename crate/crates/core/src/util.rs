//! Small internal helpers: flat bit matrices and deterministic hashing.

use std::hash::{BuildHasherDefault, Hasher};

/// Row-major bit matrix with a fixed number of columns, stored flat.
/// Used for adjacency tests and label/successor masks on hot paths.
#[derive(Debug, Clone)]
pub struct BitMatrix {
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        BitMatrix {
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize) {
        self.words[row * self.words_per_row + col / 64] |= 1u64 << (col % 64);
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.words[row * self.words_per_row + col / 64] & (1u64 << (col % 64)) != 0
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u64] {
        &self.words[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.words[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Append a new zeroed row (grows the matrix by one row).
    pub fn push_row(&mut self) -> usize {
        let n = self.words.len() / self.words_per_row;
        self.words.resize(self.words.len() + self.words_per_row, 0);
        n
    }

    pub fn or_into_row(&mut self, row: usize, src: &[u64]) {
        let base = row * self.words_per_row;
        for (i, w) in src.iter().enumerate() {
            self.words[base + i] |= w;
        }
    }

    pub fn row_is_empty(&self, row: usize) -> bool {
        self.row(row).iter().all(|&w| w == 0)
    }
}

#[inline]
pub fn slice_get_bit(words: &[u64], idx: usize) -> bool {
    words[idx / 64] & (1u64 << (idx % 64)) != 0
}

#[inline]
pub fn slice_set_bit(words: &mut [u64], idx: usize) {
    words[idx / 64] |= 1u64 << (idx % 64);
}

/// splitmix64 finalizer; deterministic across runs and platforms.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

/// Hasher for u64 keys that are already well-distributed or get mixed here.
/// Avoids SipHash overhead in node-index lookups.
#[derive(Default)]
pub struct U64Mix(u64);

impl Hasher for U64Mix {
    #[inline]
    fn finish(&self) -> u64 {
        self.0
    }
    #[inline]
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = mix64(self.0 ^ b as u64);
        }
    }
    #[inline]
    fn write_u64(&mut self, i: u64) {
        self.0 = mix64(self.0 ^ i);
    }
    #[inline]
    fn write_u32(&mut self, i: u32) {
        self.0 = mix64(self.0 ^ i as u64);
    }
    #[inline]
    fn write_usize(&mut self, i: usize) {
        self.0 = mix64(self.0 ^ i as u64);
    }
}

pub type U64MixState = BuildHasherDefault<U64Mix>;
