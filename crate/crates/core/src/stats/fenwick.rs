/// Binary indexed tree of counts over ranks `1..=len`.
#[derive(Clone, Debug)]
pub(crate) struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    pub(crate) fn new(len: usize) -> Self {
        Self { tree: vec![0; len + 1] }
    }

    pub(crate) fn add(&mut self, rank: usize, delta: i64) {
        let mut i = rank;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted items with rank ≤ `rank`.
    pub(crate) fn prefix(&self, rank: usize) -> i64 {
        let mut i = rank.min(self.tree.len() - 1);
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_counts() {
        let mut f = Fenwick::new(8);
        for r in [3, 3, 1, 8, 5] {
            f.add(r, 1);
        }
        assert_eq!(f.prefix(0), 0);
        assert_eq!(f.prefix(1), 1);
        assert_eq!(f.prefix(3), 3);
        assert_eq!(f.prefix(7), 4);
        assert_eq!(f.prefix(8), 5);
        f.add(3, -1);
        assert_eq!(f.prefix(3), 2);
    }
}
