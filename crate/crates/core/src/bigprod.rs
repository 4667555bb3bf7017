//! Product trees and remainder walks over big integers and [`MatPair`]s.

use rug::ops::RemRounding;
use rug::Integer;

use crate::matpair::MatPair;
use crate::par;
use crate::{Error, Result};

/// Ranges shorter than this are folded step by step.
const RANGE_LEAF: u64 = 32;

/// A bottom-up balanced product tree.
///
/// `levels[0]` holds the root, the last level holds the leaves in input
/// order. A node at index `c` of level `d + 1` has its parent at index
/// `c / 2` of level `d`; an unpaired last node is promoted unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree<T> {
    levels: Vec<Vec<T>>,
}

pub type ProductTree = Tree<Integer>;
pub type MatProductTree = Tree<MatPair>;

impl<T: Clone + Send + Sync> Tree<T> {
    /// Build the tree with `op(left, right)` as the node product.
    pub fn build<F>(leaves: Vec<T>, op: F) -> Result<Self>
    where
        F: Fn(&T, &T) -> T + Sync + Send,
    {
        if leaves.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut levels = vec![leaves];
        while levels.last().map_or(0, Vec::len) > 1 {
            let below = levels.last().expect("nonempty");
            let pairs = below.len().div_ceil(2);
            let next = par::map_range(pairs, |i| match below.get(2 * i + 1) {
                Some(right) => op(&below[2 * i], right),
                None => below[2 * i].clone(),
            });
            levels.push(next);
        }
        levels.reverse();
        Ok(Tree { levels })
    }

    pub fn root(&self) -> &T {
        &self.levels[0][0]
    }

    pub fn leaves(&self) -> &[T] {
        self.levels.last().expect("tree has a root")
    }

    /// Levels from the root (index 0) down to the leaves.
    pub fn levels(&self) -> &[Vec<T>] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Product tree of positive integers.
pub fn product_tree(leaves: &[Integer]) -> Result<ProductTree> {
    if leaves.iter().any(|x| *x <= 0) {
        return Err(Error::Precondition(
            "product tree leaves must be positive".into(),
        ));
    }
    Tree::build(leaves.to_vec(), |x, y| Integer::from(x * y))
}

/// Order-sensitive product tree of matrices.
pub fn mat_product_tree(leaves: Vec<MatPair>) -> Result<MatProductTree> {
    Tree::build(leaves, MatPair::combine)
}

/// `C_lo C_(lo+1) ... C_hi`, the identity when `lo > hi`.
///
/// The range is split in half recursively so that operands of similar size
/// meet at every level.
pub fn mat_product_range(lo: u64, hi: u64) -> MatPair {
    assert!(lo >= 1, "C_0 is not part of the matrix factorial");
    if lo > hi {
        return MatPair::identity();
    }
    range_product(lo, hi)
}

fn range_product(lo: u64, hi: u64) -> MatPair {
    let len = hi - lo + 1;
    if len <= RANGE_LEAF {
        let mut acc = MatPair::new(lo, 1);
        for k in lo + 1..=hi {
            acc.push_step(k);
        }
        return acc;
    }
    let mid = lo + len / 2 - 1;
    let (left, right) = if len >= par::SPLIT_GRAIN {
        par::join(|| range_product(lo, mid), || range_product(mid + 1, hi))
    } else {
        (range_product(lo, mid), range_product(mid + 1, hi))
    };
    left.combine(&right)
}

/// Values that can be reduced modulo a positive integer.
pub trait Reduce: Sized + Send + Sync {
    fn reduce_by(&self, modulus: &Integer) -> Self;
}

impl Reduce for Integer {
    fn reduce_by(&self, modulus: &Integer) -> Self {
        Integer::from(self.rem_euc(modulus))
    }
}

impl Reduce for MatPair {
    fn reduce_by(&self, modulus: &Integer) -> Self {
        self.reduced_unchecked(modulus)
    }
}

/// Reduce `value` modulo every leaf of `moduli`, walking from the root down.
///
/// Only the level being produced and its parent level are alive at any time.
pub fn remainder_walk<V: Reduce>(value: &V, moduli: &ProductTree) -> Result<Vec<V>> {
    let levels = moduli.levels();
    if levels.iter().flatten().any(|m| *m <= 0) {
        return Err(Error::ZeroModulus);
    }
    let mut current = vec![value.reduce_by(&levels[0][0])];
    for level in &levels[1..] {
        let parents = &current;
        current = par::map_range(level.len(), |c| parents[c / 2].reduce_by(&level[c]));
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(values: &[u64]) -> Vec<Integer> {
        values.iter().map(|&v| Integer::from(v)).collect()
    }

    #[test]
    fn product_tree_examples() {
        assert_eq!(*product_tree(&ints(&[3, 5, 7])).unwrap().root(), 105);
        assert_eq!(*product_tree(&ints(&[5, 7])).unwrap().root(), 35);
        let tree = product_tree(&ints(&[2, 3, 5, 7, 11, 13])).unwrap();
        assert_eq!(*tree.root(), 30030);
        assert_eq!(tree.leaves(), ints(&[2, 3, 5, 7, 11, 13]).as_slice());
        assert_eq!(tree.levels()[1], ints(&[210, 143]));
        assert!(matches!(product_tree(&[]), Err(Error::EmptyInput)));
        assert!(product_tree(&ints(&[3, 0])).is_err());
    }

    #[test]
    fn single_leaf_tree() {
        let tree = product_tree(&ints(&[11])).unwrap();
        assert_eq!(tree.depth(), 0);
        assert_eq!(*tree.root(), 11);
        assert_eq!(
            remainder_walk(&Integer::from(100), &tree).unwrap(),
            ints(&[1])
        );
    }

    #[test]
    fn odd_leaf_is_promoted() {
        let tree = product_tree(&ints(&[2, 3, 5])).unwrap();
        assert_eq!(tree.levels()[1], ints(&[6, 5]));
    }

    #[test]
    fn mat_product_range_examples() {
        assert_eq!(mat_product_range(1, 4), MatPair::new(24, 10));
        assert_eq!(mat_product_range(5, 8), MatPair::new(1680, 246));
        assert_eq!(mat_product_range(9, 8), MatPair::identity());
        assert_eq!(
            mat_product_range(1, 4).combine(&mat_product_range(5, 8)),
            MatPair::new(40320, 5914)
        );
    }

    #[test]
    fn mat_product_tree_root_is_ordered_product() {
        let leaves: Vec<MatPair> = (1..=9).map(|k| MatPair::c_of(k).unwrap()).collect();
        let tree = mat_product_tree(leaves).unwrap();
        assert_eq!(*tree.root(), mat_product_range(1, 9));
    }

    #[test]
    fn remainder_walk_examples() {
        let tree = product_tree(&ints(&[5, 7])).unwrap();
        assert_eq!(
            remainder_walk(&Integer::from(34), &tree).unwrap(),
            ints(&[4, 6])
        );
        assert_eq!(
            remainder_walk(&MatPair::new(24, 10), &tree).unwrap(),
            vec![MatPair::new(4, 0), MatPair::new(3, 3)]
        );
    }
}
