//! Multipoint evaluation by transposed remainder descent.
//!
//! With `P_v(x) = prod_{i in v} (1 - x_i x)` over the points of a subtree `v`
//! and `rf` the reversal of `f` to length `n`,
//!
//! ```text
//! f(x_i) = [x^(n-1)] rf(x) / (1 - x_i x).
//! ```
//!
//! Descending from the root, a node only needs the top `|v|` coefficients of
//! `rf / P_v`, and a child's window is a middle product of its parent's
//! window with the sibling's subproduct. One power series inverse at the
//! root replaces the per-node divisions of the classical remainder tree.

use super::field::Field;
use super::ntt;
use super::poly::PolyModP;
use crate::par;

/// Values of `f` at `points`, in input order.
pub fn multipoint_eval(f: &PolyModP, points: &[u64]) -> Vec<u64> {
    let field = f.field();
    multipoint_eval_many(&field, &[f.coeffs()], points)
        .pop()
        .expect("one polynomial")
}

/// Values of every polynomial in `fs` at `points`, sharing the tree.
pub fn multipoint_eval_many(field: &Field, fs: &[&[u64]], points: &[u64]) -> Vec<Vec<u64>> {
    if points.is_empty() {
        return fs.iter().map(|_| Vec::new()).collect();
    }
    let p = field.modulus();
    if points.len() <= 8 || fs.iter().all(|f| f.len() <= 8) {
        return fs
            .iter()
            .map(|f| points.iter().map(|&x| horner(field, f, x % p)).collect())
            .collect();
    }
    let tree = SubproductTree::new(field, points);
    let k = points.len();
    let n = fs.iter().map(|f| f.len()).max().unwrap_or(0).max(k);
    let inverse = series_inverse(field, tree.root(), n);
    let windows: Vec<Vec<u64>> = fs
        .iter()
        .map(|f| {
            let mut reversed = vec![0u64; n];
            for (i, &c) in f.iter().enumerate() {
                reversed[n - 1 - i] = c % p;
            }
            let mut w = ntt::mul(field, &reversed, &inverse);
            w.resize(n, 0);
            w.split_off(n - k)
        })
        .collect();
    tree.descend(field, windows)
}

fn horner(field: &Field, f: &[u64], x: u64) -> u64 {
    f.iter().rev().fold(0, |acc, &c| {
        field.add(field.mul(acc, x), c % field.modulus())
    })
}

/// Levels of `prod (1 - x_i x)`, leaves first. Each node keeps its full
/// length `|v| + 1`; node `c` of a level has parent `c / 2`, an unpaired
/// last node is promoted.
struct SubproductTree {
    levels: Vec<Vec<Vec<u64>>>,
}

impl SubproductTree {
    fn new(field: &Field, points: &[u64]) -> Self {
        let leaves: Vec<Vec<u64>> = points
            .iter()
            .map(|&x| vec![1, field.neg(x % field.modulus())])
            .collect();
        let mut levels = vec![leaves];
        while levels.last().map_or(0, Vec::len) > 1 {
            let below = levels.last().expect("level");
            let next = par::map_range(below.len().div_ceil(2), |i| match below.get(2 * i + 1) {
                Some(right) => ntt::mul(field, &below[2 * i], right),
                None => below[2 * i].clone(),
            });
            levels.push(next);
        }
        SubproductTree { levels }
    }

    fn root(&self) -> &[u64] {
        &self.levels.last().expect("root")[0]
    }

    /// `windows[f]` holds the root window of polynomial `f`; returns values.
    fn descend(&self, field: &Field, windows: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
        let count = windows.len();
        // per node, the windows of every polynomial
        let mut current: Vec<Vec<Vec<u64>>> = vec![windows];
        for depth in (0..self.levels.len() - 1).rev() {
            let children = &self.levels[depth];
            let parents = current;
            let next: Vec<Vec<Vec<Vec<u64>>>> =
                par::map_owned(parents.into_iter().enumerate().collect(), |(v, ws)| {
                    let left = 2 * v;
                    let right = 2 * v + 1;
                    if right >= children.len() {
                        return vec![ws];
                    }
                    let (pl, pr) = (&children[left], &children[right]);
                    let (kl, kr) = (pl.len() - 1, pr.len() - 1);
                    let refs: Vec<&[u64]> = ws.iter().map(Vec::as_slice).collect();
                    let size = (kl + kr).next_power_of_two();
                    let into_left = ntt_middle(field, pr, &refs, size, kr, kl);
                    let into_right = ntt_middle(field, pl, &refs, size, kl, kr);
                    vec![into_left, into_right]
                });
            current = next.into_iter().flatten().collect();
        }
        let mut out = vec![Vec::with_capacity(current.len()); count];
        for ws in current {
            for (dst, w) in out.iter_mut().zip(ws) {
                dst.push(w[0]);
            }
        }
        out
    }
}

/// `(w * sibling)[skip .. skip + keep]` for each window `w`, using a cyclic
/// product of length `size >= len(w)`: wrapped terms only land below `skip`.
fn ntt_middle(
    field: &Field,
    sibling: &[u64],
    windows: &[&[u64]],
    size: usize,
    skip: usize,
    keep: usize,
) -> Vec<Vec<u64>> {
    let products = if sibling.len().min(windows[0].len()) <= ntt::SCHOOLBOOK_CUTOFF {
        windows
            .iter()
            .map(|w| ntt::schoolbook(field, sibling, w))
            .collect()
    } else {
        ntt::cyclic_convolve_many(field, sibling, windows, size)
    };
    products
        .into_iter()
        .map(|mut prod| {
            prod.truncate(skip + keep);
            prod.split_off(skip)
        })
        .collect()
}

/// `1 / g mod x^n` for `g(0) = 1`, by Newton iteration.
pub(crate) fn series_inverse(field: &Field, g: &[u64], n: usize) -> Vec<u64> {
    assert_eq!(g.first(), Some(&1), "series must start with 1");
    let mut inv = vec![1u64];
    while inv.len() < n {
        let l = inv.len();
        let target = (2 * l).min(n);
        let g_part = &g[..g.len().min(target)];
        // error term: coefficients l..target of g * inv; wrapped terms land below l
        let size = target.next_power_of_two();
        let gi = cyclic_or_full(field, g_part, &inv, size);
        let err: Vec<u64> = (l..target)
            .map(|i| gi.get(i).copied().unwrap_or(0))
            .collect();
        let corr = cyclic_or_full(field, &err, &inv, (2 * l).next_power_of_two());
        inv.extend((0..target - l).map(|i| field.neg(corr.get(i).copied().unwrap_or(0))));
    }
    inv.truncate(n);
    inv
}

fn cyclic_or_full(field: &Field, f: &[u64], g: &[u64], size: usize) -> Vec<u64> {
    if f.len().min(g.len()) <= ntt::SCHOOLBOOK_CUTOFF {
        ntt::schoolbook(field, f, g)
    } else {
        ntt::cyclic_convolve_many(field, f, &[g], size)
            .pop()
            .expect("one product")
    }
}
