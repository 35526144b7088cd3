use std::fmt;

/// Fixed-capacity bit set used for predicate valuations and masks.
#[derive(Clone, Default)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let word = i / 64;
        if word >= self.words.len() {
            self.words.resize(word + 1, 0);
        }
        if value {
            self.words[word] |= 1 << (i % 64);
        } else {
            self.words[word] &= !(1 << (i % 64));
        }
    }

    /// Bitwise AND, truncated to the shorter operand.
    pub fn and(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

impl BitSet {
    fn significant(&self) -> &[u64] {
        let len = self.words.iter().rposition(|&w| w != 0).map_or(0, |i| i + 1);
        &self.words[..len]
    }
}

// Equality and hashing ignore trailing zero words.
impl PartialEq for BitSet {
    fn eq(&self, other: &Self) -> bool {
        self.significant() == other.significant()
    }
}

impl Eq for BitSet {}

impl std::hash::Hash for BitSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.significant().hash(state);
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_and() {
        let mut a = BitSet::new(10);
        a.set(3, true);
        a.set(100, true);
        assert!(a.get(3) && a.get(100) && !a.get(4));
        let mut b = BitSet::new(10);
        b.set(3, true);
        assert_eq!(a.and(&b), b);
        assert_eq!(a.ones().collect::<Vec<_>>(), vec![3, 100]);
        a.set(100, false);
        assert_eq!(a, b);
    }
}
