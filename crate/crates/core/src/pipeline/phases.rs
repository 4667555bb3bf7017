//! The four phases of an interval scan over `(m, n]`.
//!
//! 1. `P_{i,j}`: product of the primes in each slice `S_{i,j}`.
//! 2. `M_m mod P_{0,0}` from the prefix checkpoint.
//! 3. Block products `A_{i,j}` of the `C_k` over each slice, stored reduced.
//! 4. Top-down descent `R_{i,j} = M_m A_{i,0} ... A_{i,j-1} mod P_{i,j}`;
//!    every leaf holding a prime `p` yields `!p mod p`.

use std::sync::Mutex;

use rug::Integer;

use super::checkpoint::Checkpoint;
use super::segment::{depth, leaf_index, segment, Segment};
use super::tree::SparseLevels;
use super::ResidueRecord;
use crate::bigprod::mat_product_range;
use crate::matpair::{balance, MatPair};
use crate::par;
use crate::primes::primes_in;
use crate::{Error, Result};

/// Prime moduli `P_{i,j}` for every slice that contains a prime.
///
/// Slices without primes have `P = 1` and are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuliTree {
    m: u64,
    n: u64,
    h: u32,
    nodes: SparseLevels<Integer>,
}

impl ModuliTree {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Leaf level `h`.
    pub fn depth(&self) -> u32 {
        self.h
    }

    /// `P_{i,j}` when it exceeds 1.
    pub fn get(&self, i: u32, j: u64) -> Option<&Integer> {
        self.nodes.get(i, j)
    }

    /// `P_{i,j}`, including the trivial value 1.
    pub fn value(&self, i: u32, j: u64) -> Integer {
        self.get(i, j).cloned().unwrap_or_else(|| Integer::from(1))
    }

    pub fn root(&self) -> Integer {
        self.value(0, 0)
    }

    pub fn segment(&self, i: u32, j: u64) -> Segment {
        segment(self.m, self.n, i, j).expect("node inside the tree")
    }

    pub fn nodes(&self) -> &SparseLevels<Integer> {
        &self.nodes
    }

    /// Primes of `(m, n]`, read off the leaves.
    pub fn primes(&self) -> Vec<u64> {
        self.nodes
            .level(self.h)
            .iter()
            .map(|(_, p)| p.to_u64().expect("leaf moduli are word-sized primes"))
            .collect()
    }
}

/// Phase 1: sieve `(m, n]` and multiply the primes up the slice tree.
pub fn phase1_moduli(m: u64, n: u64) -> Result<ModuliTree> {
    if n <= m {
        return Err(Error::InvalidInterval { lo: m, hi: n });
    }
    let primes = primes_in(m, n);
    moduli_from_primes(m, n, &primes.primes)
}

/// Phase 1 over an explicit ascending list of primes in `(m, n]`.
pub fn moduli_from_primes(m: u64, n: u64, primes: &[u64]) -> Result<ModuliTree> {
    if n <= m {
        return Err(Error::InvalidInterval { lo: m, hi: n });
    }
    let h = depth(m, n);
    let mut leaves = Vec::with_capacity(primes.len());
    for &p in primes {
        if p <= m || p > n {
            return Err(Error::Precondition(format!("prime {p} outside ({m}, {n}]")));
        }
        let j = leaf_index(m, n, p);
        if leaves.last().is_some_and(|&(prev, _)| prev >= j) {
            return Err(Error::Precondition(
                "primes must be strictly ascending".into(),
            ));
        }
        leaves.push((j, Integer::from(p)));
    }
    let mut levels = vec![leaves];
    for _ in 0..h {
        let below = levels.last().expect("leaf level");
        // runs of siblings sharing a parent
        let mut groups = Vec::new();
        let mut at = 0;
        while at < below.len() {
            let parent = below[at].0 >> 1;
            let end = if below.get(at + 1).is_some_and(|(j, _)| j >> 1 == parent) {
                at + 2
            } else {
                at + 1
            };
            groups.push((parent, at, end));
            at = end;
        }
        let next = par::map(&groups, |&(parent, start, end)| {
            let value = if end - start == 2 {
                Integer::from(&below[start].1 * &below[start + 1].1)
            } else {
                below[start].1.clone()
            };
            (parent, value)
        });
        levels.push(next);
    }
    levels.reverse();
    Ok(ModuliTree {
        m,
        n,
        h,
        nodes: SparseLevels::from_levels(levels),
    })
}

/// Phase 2: `M_m mod P_{0,0}`, extending `checkpoint` (or an empty prefix)
/// to `m`. Returns the reduced prefix and the extended checkpoint.
pub fn phase2_prefix(
    m: u64,
    p00: &Integer,
    checkpoint: Option<Checkpoint>,
) -> Result<(MatPair, Checkpoint)> {
    let base = match checkpoint {
        Some(cp) => {
            cp.validate()?;
            cp
        }
        None => Checkpoint::empty(),
    };
    if base.m() > m {
        return Err(Error::CheckpointAhead {
            have: base.m(),
            want: m,
        });
    }
    let extended = base.extend_to(m, mat_product_range)?;
    let prefix = extended.product_mod(p00)?;
    Ok((prefix, extended))
}

/// Reduced block products from phase 3.
///
/// Each node is stored modulo its parent's modulus (the root modulo
/// `P_{0,0}`): the descent needs a left block reduced modulo its right
/// sibling's prime product, and both siblings' products divide the parent's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockTable {
    nodes: SparseLevels<MatPair>,
}

impl BlockTable {
    /// `A_{i,j} mod P_{i,j}`, or `None` when the slice holds no prime.
    pub fn get(&self, moduli: &ModuliTree, i: u32, j: u64) -> Option<MatPair> {
        let modulus = moduli.get(i, j)?;
        let stored = self.nodes.get(i, j)?;
        Some(stored.reduced_unchecked(modulus))
    }

    /// `A_{i,j}` modulo the parent modulus, as used by the descent.
    pub fn stored(&self, i: u32, j: u64) -> Option<&MatPair> {
        self.nodes.get(i, j)
    }

    /// Every block with a nontrivial modulus, as `(i, j, A_{i,j} mod P_{i,j})`.
    pub fn reduced_blocks(&self, moduli: &ModuliTree) -> Vec<(u32, u64, MatPair)> {
        self.nodes
            .iter()
            .filter_map(|(i, j, _)| self.get(moduli, i, j).map(|a| (i, j, a)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Phase 3, also handing back the exact product `A_{0,0} = C_(m+1) ... C_n`
/// for the next prefix checkpoint.
pub fn phase3_blocks_with_product(moduli: &ModuliTree) -> (BlockTable, MatPair) {
    let h = moduli.depth();
    let sink: Vec<Mutex<Vec<(u64, MatPair)>>> = (0..=h).map(|_| Mutex::new(Vec::new())).collect();
    let root = block_product(moduli, 0, 0, &sink);
    if let Some(p00) = moduli.get(0, 0) {
        sink[0]
            .lock()
            .expect("sink lock")
            .push((0, root.reduced_unchecked(p00)));
    }
    let levels = sink
        .into_iter()
        .map(|level| {
            let mut level = level.into_inner().expect("sink lock");
            level.sort_unstable_by_key(|(j, _)| *j);
            level
        })
        .collect();
    let table = BlockTable {
        nodes: SparseLevels::from_levels(levels),
    };
    (table, root)
}

/// Phase 3: `A_{i,j} mod P_{i,j}` for every slice containing a prime.
pub fn phase3_blocks(moduli: &ModuliTree) -> BlockTable {
    phase3_blocks_with_product(moduli).0
}

/// Exact `A_{i,j}`, recording both children reduced modulo `P_{i,j}`.
fn block_product(
    moduli: &ModuliTree,
    i: u32,
    j: u64,
    sink: &[Mutex<Vec<(u64, MatPair)>>],
) -> MatPair {
    let seg = moduli.segment(i, j);
    let modulus = match moduli.get(i, j) {
        Some(p) if i < moduli.depth() => p,
        // nothing below needs storing
        _ => return mat_product_range(seg.lo + 1, seg.hi),
    };
    let (left, right) = if seg.len() >= par::SPLIT_GRAIN {
        par::join(
            || block_product(moduli, i + 1, 2 * j, sink),
            || block_product(moduli, i + 1, 2 * j + 1, sink),
        )
    } else {
        (
            block_product(moduli, i + 1, 2 * j, sink),
            block_product(moduli, i + 1, 2 * j + 1, sink),
        )
    };
    {
        let mut level = sink[i as usize + 1].lock().expect("sink lock");
        level.push((2 * j, left.reduced_unchecked(modulus)));
        level.push((2 * j + 1, right.reduced_unchecked(modulus)));
    }
    left.combine(&right)
}

/// Phase 4: descend from `R_{0,0} = M_m mod P_{0,0}` to the prime leaves.
///
/// A leaf `(p - 1, p]` receives `R = M_(p-1) mod p`; one more step by `C_p`
/// gives `!p = b-entry of M_p`, and since `p = 0 mod p` that entry is
/// `R.a + R.b`.
pub fn phase4_descend(
    r00: &MatPair,
    blocks: &BlockTable,
    moduli: &ModuliTree,
) -> Result<Vec<ResidueRecord>> {
    let Some(p00) = moduli.get(0, 0) else {
        return Ok(Vec::new());
    };
    let h = moduli.depth();
    let mut current = vec![(0u64, r00.reduced_unchecked(p00))];
    for i in 0..h {
        let children: Vec<Vec<Result<(u64, MatPair)>>> = par::map_owned(current, |(j, r)| {
            let mut out = Vec::with_capacity(2);
            if let Some(left_mod) = moduli.get(i + 1, 2 * j) {
                out.push(Ok((2 * j, r.reduced_unchecked(left_mod))));
            }
            if let Some(right_mod) = moduli.get(i + 1, 2 * j + 1) {
                let item = match blocks.stored(i + 1, 2 * j) {
                    Some(left_block) => Ok((
                        2 * j + 1,
                        r.combine(left_block).reduced_unchecked(right_mod),
                    )),
                    None => Err(Error::Inconsistent(format!(
                        "missing block A_({}, {})",
                        i + 1,
                        2 * j
                    ))),
                };
                out.push(item);
            }
            out
        });
        current = children.into_iter().flatten().collect::<Result<_>>()?;
    }
    current
        .into_iter()
        .map(|(j, r)| {
            let seg = moduli.segment(h, j);
            let modulus = moduli.get(h, j).expect("descent follows stored moduli");
            if seg.len() != 1 || *modulus != seg.hi {
                return Err(Error::Inconsistent(format!(
                    "leaf ({}, {}] carries modulus {modulus}",
                    seg.lo, seg.hi
                )));
            }
            let p = seg.hi;
            let residue = Integer::from(&r.a + &r.b) % modulus;
            let residue = residue.to_u64().expect("reduced below p");
            Ok(ResidueRecord {
                p,
                residue: balance(residue, p)?,
            })
        })
        .collect()
}
