use serde::{Deserialize, Serialize};

use super::HVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    /// Basis `e_1, e_2, ...` of `l^2(N)`.
    Natural,
    /// Basis `e_n, n in Z`, stored in the order `0, 1, -1, 2, -2, ...`.
    Integer,
}

/// Map between the abstract basis index set and storage positions.
///
/// Storage positions are 0-based. The integer enumeration is prefix-stable:
/// growing `dim` only appends positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndexing {
    kind: IndexKind,
    dim: usize,
}

impl BasisIndexing {
    /// Panics if `dim == 0`.
    pub fn new(kind: IndexKind, dim: usize) -> Self {
        assert!(dim > 0, "truncation dimension must be positive");
        Self { kind, dim }
    }

    pub fn natural(dim: usize) -> Self {
        Self::new(IndexKind::Natural, dim)
    }

    pub fn integer(dim: usize) -> Self {
        Self::new(IndexKind::Integer, dim)
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_dim(&self, dim: usize) -> Self {
        Self::new(self.kind, dim)
    }

    /// Storage position of basis index `index`, if retained.
    pub fn position(&self, index: i64) -> Option<usize> {
        let pos = match self.kind {
            IndexKind::Natural => {
                if index < 1 {
                    return None;
                }
                (index - 1) as usize
            }
            IndexKind::Integer => {
                if index > 0 {
                    (2 * index - 1) as usize
                } else {
                    (-2 * index) as usize
                }
            }
        };
        (pos < self.dim).then_some(pos)
    }

    /// Basis index stored at position `pos`. Panics if `pos >= dim`.
    pub fn index_at(&self, pos: usize) -> i64 {
        assert!(pos < self.dim, "position {pos} outside truncation {}", self.dim);
        let p = pos as i64;
        match self.kind {
            IndexKind::Natural => p + 1,
            IndexKind::Integer => {
                if p % 2 == 1 {
                    (p + 1) / 2
                } else {
                    -(p / 2)
                }
            }
        }
    }

    /// Smallest and largest retained basis index.
    pub fn index_range(&self) -> (i64, i64) {
        match self.kind {
            IndexKind::Natural => (1, self.dim as i64),
            IndexKind::Integer => {
                let last = (self.dim - 1) as i64;
                (-(last / 2), (last + 1) / 2)
            }
        }
    }

    pub fn contains(&self, index: i64) -> bool {
        self.position(index).is_some()
    }

    /// Number of leading positive indices `1..=L` that are all retained.
    pub fn positive_count(&self) -> usize {
        self.index_range().1.max(0) as usize
    }

    /// Unit basis vector `e_index`.
    pub fn basis_vector(&self, index: i64) -> Option<HVector> {
        self.position(index).map(|p| HVector::unit(self.dim, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_enumeration_order() {
        let ix = BasisIndexing::integer(7);
        let order: Vec<i64> = (0..7).map(|p| ix.index_at(p)).collect();
        assert_eq!(order, vec![0, 1, -1, 2, -2, 3, -3]);
        assert_eq!(ix.index_range(), (-3, 3));
        assert_eq!(BasisIndexing::integer(128).index_range(), (-63, 64));
    }

    #[test]
    fn enumeration_is_a_bijection() {
        for kind in [IndexKind::Natural, IndexKind::Integer] {
            let ix = BasisIndexing::new(kind, 33);
            let (lo, hi) = ix.index_range();
            let mut seen = [false; 33];
            for k in lo..=hi {
                let p = ix.position(k).unwrap();
                assert!(!seen[p]);
                seen[p] = true;
                assert_eq!(ix.index_at(p), k);
            }
            assert!(seen.iter().all(|s| *s));
            assert!(ix.position(hi + 1).is_none());
        }
    }

    #[test]
    fn growing_truncation_keeps_positions() {
        let small = BasisIndexing::integer(9);
        let large = BasisIndexing::integer(40);
        for p in 0..9 {
            assert_eq!(small.index_at(p), large.index_at(p));
        }
    }
}
