use crate::{Error, Result};

/// `S_{i,j} = (lo, hi]`, the `j`-th of `2^i` slices of `(m, n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub m: u64,
    pub n: u64,
    pub i: u32,
    pub j: u64,
    pub lo: u64,
    pub hi: u64,
}

impl Segment {
    pub fn len(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, k: u64) -> bool {
        self.lo < k && k <= self.hi
    }
}

/// `h = ceil(log2(n - m))`, the level at which slices hold at most one integer.
pub fn depth(m: u64, n: u64) -> u32 {
    debug_assert!(n > m);
    let width = n - m;
    if width <= 1 {
        0
    } else {
        u64::BITS - (width - 1).leading_zeros()
    }
}

/// Offset of the `j`-th boundary at level `i`: `floor(j (n - m) / 2^i)`.
fn boundary(width: u64, i: u32, j: u64) -> u64 {
    ((u128::from(j) * u128::from(width)) >> i) as u64
}

pub fn segment(m: u64, n: u64, i: u32, j: u64) -> Result<Segment> {
    if n <= m {
        return Err(Error::InvalidInterval { lo: m, hi: n });
    }
    let h = depth(m, n);
    if i > h || j >> i != 0 {
        return Err(Error::SegmentOutOfRange { i, j, depth: h });
    }
    let width = n - m;
    Ok(Segment {
        m,
        n,
        i,
        j,
        lo: m + boundary(width, i, j),
        hi: m + boundary(width, i, j + 1),
    })
}

/// Index of the leaf slice at level `depth(m, n)` holding `k` in `(m, n]`.
pub fn leaf_index(m: u64, n: u64, k: u64) -> u64 {
    debug_assert!(m < k && k <= n);
    let h = depth(m, n);
    let width = u128::from(n - m);
    // smallest j with floor((j + 1) width / 2^h) >= k - m
    let scaled = u128::from(k - m) << h;
    (scaled.div_ceil(width) - 1) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(m: u64, n: u64, i: u32, j: u64) -> (u64, u64) {
        let s = segment(m, n, i, j).unwrap();
        (s.lo, s.hi)
    }

    #[test]
    fn examples() {
        assert_eq!(bounds(10, 26, 2, 1), (14, 18));
        assert_eq!(bounds(4, 8, 0, 0), (4, 8));
        assert_eq!(bounds(0, 5, 1, 0), (0, 2));
        assert_eq!(bounds(0, 5, 1, 1), (2, 5));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            segment(4, 8, 1, 2),
            Err(Error::SegmentOutOfRange { .. })
        ));
        assert!(matches!(
            segment(4, 8, 3, 0),
            Err(Error::SegmentOutOfRange { .. })
        ));
        assert!(matches!(
            segment(8, 8, 0, 0),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn depth_values() {
        assert_eq!(depth(4, 5), 0);
        assert_eq!(depth(4, 6), 1);
        assert_eq!(depth(4, 8), 2);
        assert_eq!(depth(0, 5), 3);
        assert_eq!(depth(0, 1 << 20), 20);
        assert_eq!(depth(0, (1 << 20) + 1), 21);
    }

    #[test]
    fn levels_tile_and_leaves_are_unit() {
        for m in [0u64, 7, 1000] {
            for width in 1..=1000u64 {
                let n = m + width;
                let h = depth(m, n);
                for i in 0..=h {
                    let mut next = m;
                    for j in 0..(1u64 << i) {
                        let s = segment(m, n, i, j).unwrap();
                        assert_eq!(s.lo, next, "m={m} n={n} i={i} j={j}");
                        assert!(s.hi >= s.lo);
                        if i == h {
                            assert!(s.len() <= 1);
                        }
                        next = s.hi;
                    }
                    assert_eq!(next, n);
                }
            }
        }
    }

    #[test]
    fn children_split_parent() {
        for width in 1..=300u64 {
            let (m, n) = (50, 50 + width);
            let h = depth(m, n);
            for i in 0..h {
                for j in 0..(1u64 << i) {
                    let parent = segment(m, n, i, j).unwrap();
                    let left = segment(m, n, i + 1, 2 * j).unwrap();
                    let right = segment(m, n, i + 1, 2 * j + 1).unwrap();
                    assert_eq!(
                        (left.lo, left.hi, right.hi),
                        (parent.lo, right.lo, parent.hi)
                    );
                }
            }
        }
    }

    #[test]
    fn leaf_index_finds_the_slice() {
        for width in 1..=500u64 {
            let (m, n) = (3, 3 + width);
            let h = depth(m, n);
            for k in m + 1..=n {
                let s = segment(m, n, h, leaf_index(m, n, k)).unwrap();
                assert!(s.contains(k), "k={k} in ({m},{n}]");
            }
        }
    }
}
