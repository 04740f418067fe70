//! Bit-packed columns and row masks.
//!
//! Bits are packed least-significant-bit first into `u64` words, so the
//! little-endian byte image of a column is exactly the on-disk layout.

/// One binary column, `len` bits long. Bits past `len` in the last word are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitColumn {
    words: Vec<u64>,
    len: usize,
}

#[inline]
pub(crate) fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitColumn {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; word_count(len)], len }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        for b in bits {
            if len.is_multiple_of(64) {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1u64 << (len % 64);
            }
            len += 1;
        }
        Self { words, len }
    }

    /// Builds a column from raw words, clearing any bits past `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(word_count(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, row: usize) -> bool {
        debug_assert!(row < self.len);
        (self.words[row >> 6] >> (row & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, value: bool) {
        let bit = 1u64 << (row & 63);
        if value {
            self.words[row >> 6] |= bit;
        } else {
            self.words[row >> 6] &= !bit;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// LSB-first byte image, `ceil(len / 8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let words = bytes
            .chunks(8)
            .map(|chunk| {
                let mut buf = [0u8; 8];
                buf[..chunk.len()].copy_from_slice(chunk);
                u64::from_le_bytes(buf)
            })
            .collect();
        Self::from_words(words, len)
    }
}

/// Set of matching rows, refined by intersecting with columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    words: Vec<u64>,
    len: usize,
}

impl Mask {
    pub fn all(len: usize) -> Self {
        let mut words = vec![u64::MAX; word_count(len)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Keeps rows where `col` is set (`value = true`) or clear (`value = false`).
    pub fn restrict(&mut self, col: &BitColumn, value: bool) {
        debug_assert_eq!(col.len, self.len);
        if value {
            for (m, c) in self.words.iter_mut().zip(&col.words) {
                *m &= c;
            }
        } else {
            // the mask's own tail bits are already clear, so !c cannot leak past len
            for (m, c) in self.words.iter_mut().zip(&col.words) {
                *m &= !c;
            }
        }
    }

    pub fn intersect(&mut self, other: &Mask) {
        for (m, o) in self.words.iter_mut().zip(&other.words) {
            *m &= o;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Sum of `weights[row]` over matching rows.
    pub fn weighted_sum(&self, weights: &[f64]) -> f64 {
        self.iter_ones().map(|r| weights[r]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_image_is_lsb_first() {
        let col = BitColumn::from_bools([true, false, false, true, false, false, false, false, true]);
        assert_eq!(col.to_bytes(), vec![0b0000_1001, 0b0000_0001]);
        assert_eq!(BitColumn::from_bytes(&col.to_bytes(), 9), col);
    }

    #[test]
    fn negated_restrict_respects_length() {
        let col = BitColumn::zeros(70);
        let mut m = Mask::all(70);
        m.restrict(&col, false);
        assert_eq!(m.count_ones(), 70);
        assert_eq!(m.iter_ones().last(), Some(69));
    }

    #[test]
    fn iter_ones_matches_get() {
        let bits: Vec<bool> = (0..200).map(|i| i % 3 == 0 || i % 7 == 0).collect();
        let col = BitColumn::from_bools(bits.iter().copied());
        let mut m = Mask::all(200);
        m.restrict(&col, true);
        let ones: Vec<usize> = m.iter_ones().collect();
        let expected: Vec<usize> = (0..200).filter(|&i| bits[i]).collect();
        assert_eq!(ones, expected);
        assert_eq!(col.count_ones(), expected.len() as u64);
    }
}
