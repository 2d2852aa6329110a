//! Fixed-width bit rows with the word-parallel rightward closure used by the
//! front evolutions.

const WORD: usize = 64;

/// A row of `len` bits, position 0 = lowest bit of the first word.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for BitRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitRow[len={}, ones={}]", self.len, self.count_ones())
    }
}

impl BitRow {
    pub fn new(len: usize) -> Self {
        BitRow {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Zero any bits at positions >= len in the last word.
    pub fn mask_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] & (1u64 << (i % WORD)) != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] |= 1u64 << (i % WORD);
    }

    pub fn set_range(&mut self, lo: usize, hi_incl: usize) {
        for i in lo..=hi_incl.min(self.len.saturating_sub(1)) {
            self.set(i);
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn min_set(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * WORD + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn max_set(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(k * WORD + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    pub fn and_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and(&self, other: &BitRow) -> BitRow {
        let mut out = self.clone();
        out.and_assign(other);
        out
    }

    /// True iff `self & other` has any common bit.
    pub fn intersects(&self, other: &BitRow) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    /// True iff `self & other` restricted to positions in `[lo, hi]` is nonempty.
    pub fn intersects_in_range(&self, other: &BitRow, lo: usize, hi_incl: usize) -> bool {
        if lo > hi_incl || lo >= self.len {
            return false;
        }
        let hi = hi_incl.min(self.len - 1);
        let (w0, w1) = (lo / WORD, hi / WORD);
        for k in w0..=w1 {
            let mut m = self.words[k] & other.words[k];
            if k == w0 {
                m &= !0u64 << (lo % WORD);
            }
            if k == w1 {
                let r = hi % WORD;
                if r < 63 {
                    m &= (1u64 << (r + 1)) - 1;
                }
            }
            if m != 0 {
                return true;
            }
        }
        false
    }

    /// True iff every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitRow) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + b)
                }
            })
        })
    }

    /// Rightward closure of `base` through `mask | base`: position x is in the
    /// result iff some y <= x is in `base` and every position in (y, x] is in
    /// `mask | base`. Computed word-parallel via binary-addition carries: with
    /// M = mask|base and S = base, the carries of M + S mark exactly the
    /// positions reached by propagating each source through its run of M.
    pub fn smear_right(mask: &BitRow, base: &BitRow) -> BitRow {
        debug_assert_eq!(mask.len, base.len);
        let mut out = BitRow::new(mask.len);
        let mut carry = 0u64;
        for k in 0..mask.words.len() {
            let m = mask.words[k] | base.words[k];
            let s = base.words[k];
            let (t1, o1) = m.overflowing_add(s);
            let (t, o2) = t1.overflowing_add(carry);
            let reached = (t ^ m ^ s) & m;
            out.words[k] = reached | s;
            carry = (o1 | o2) as u64;
        }
        out.mask_tail();
        out
    }
}
