use std::fmt;

/// Set of mutant vertices, stored as a bitset of length `n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MutantState {
    n: usize,
    words: Vec<u64>,
}

impl MutantState {
    pub fn empty(n: usize) -> Self {
        MutantState {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for u in 0..n {
            s.insert(u);
        }
        s
    }

    pub fn from_vertices<I: IntoIterator<Item = usize>>(n: usize, vertices: I) -> Self {
        let mut s = Self::empty(n);
        for u in vertices {
            s.insert(u);
        }
        s
    }

    /// Interprets bit `u` of `mask` as membership of vertex `u`. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask states need n <= 64");
        let mut s = Self::empty(n);
        if n > 0 {
            let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn contains(&self, u: usize) -> bool {
        debug_assert!(u < self.n);
        self.words[u / 64] >> (u % 64) & 1 == 1
    }

    pub fn insert(&mut self, u: usize) {
        assert!(u < self.n, "vertex {u} outside 0..{}", self.n);
        self.words[u / 64] |= 1 << (u % 64);
    }

    pub fn remove(&mut self, u: usize) {
        assert!(u < self.n, "vertex {u} outside 0..{}", self.n);
        self.words[u / 64] &= !(1 << (u % 64));
    }

    pub fn toggle(&mut self, u: usize) {
        assert!(u < self.n, "vertex {u} outside 0..{}", self.n);
        self.words[u / 64] ^= 1 << (u % 64);
    }

    /// Number of mutants.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_extinct(&self) -> bool {
        self.count() == 0
    }

    pub fn is_fixed(&self) -> bool {
        self.count() == self.n
    }

    pub fn is_absorbing(&self) -> bool {
        let c = self.count();
        c == 0 || c == self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.contains(u))
    }
}

impl fmt::Debug for MutantState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
