//! Segmented sieve of Eratosthenes over half-open intervals `(lo, hi]`.
//!
//! Base primes up to `isqrt(hi)` are sieved once and shared; the interval is
//! then cut into windows that are marked independently over odd numbers only.

use serde::{Deserialize, Serialize};

use crate::par;

pub const DEFAULT_WINDOW: u64 = 1 << 20;

/// The primes `p` with `lo < p <= hi`, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeList {
    pub lo: u64,
    pub hi: u64,
    pub primes: Vec<u64>,
}

impl PrimeList {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u64> {
        self.primes.iter()
    }
}

impl IntoIterator for PrimeList {
    type Item = u64;
    type IntoIter = std::vec::IntoIter<u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.primes.into_iter()
    }
}

pub fn primes_in(lo: u64, hi: u64) -> PrimeList {
    primes_in_with_window(lo, hi, DEFAULT_WINDOW)
}

/// Primes in `(lo, hi]` using sieve windows of `window` integers.
pub fn primes_in_with_window(lo: u64, hi: u64, window: u64) -> PrimeList {
    assert!(hi >= lo, "primes_in: hi < lo");
    let window = window.max(64);
    let mut primes = Vec::new();
    // windows cover [start, end) with start > lo
    let start = lo + 1;
    let end = hi.saturating_add(1);
    if start >= end {
        return PrimeList { lo, hi, primes };
    }
    if start <= 2 && 2 < end {
        primes.push(2);
    }
    let base = small_odd_primes(hi.isqrt());
    let count = (end - start).div_ceil(window);
    let windows: Vec<(u64, u64)> = (0..count)
        .map(|w| {
            let s = start + w * window;
            (s, (s + window).min(end))
        })
        .collect();
    let found = par::map(&windows, |&(s, e)| sieve_window(s, e, &base));
    for chunk in found {
        primes.extend(chunk);
    }
    PrimeList { lo, hi, primes }
}

/// Odd primes up to and including `limit`.
fn small_odd_primes(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    // composite[i] describes 2i + 1
    let half = (limit as usize - 1) / 2 + 1;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| 2 * i as u64 + 1)
        .collect()
}

/// Odd primes in `[start, end)` given every odd prime up to `isqrt(end - 1)`.
fn sieve_window(start: u64, end: u64, base: &[u64]) -> Vec<u64> {
    // bit t represents the odd number first + 2t
    let first = if start.is_multiple_of(2) {
        start + 1
    } else {
        start
    };
    if first >= end {
        return Vec::new();
    }
    let slots = (end - first).div_ceil(2) as usize;
    let mut bits = vec![0u64; slots.div_ceil(64)];
    let last = end - 1;
    for &p in base {
        let square = p * p;
        if square > last {
            break;
        }
        let mut multiple = if square >= first {
            square
        } else {
            first.div_ceil(p) * p
        };
        if multiple % 2 == 0 {
            multiple += p;
        }
        let mut t = ((multiple - first) / 2) as usize;
        while t < slots {
            bits[t / 64] |= 1 << (t % 64);
            t += p as usize;
        }
    }
    let mut out = Vec::new();
    for t in 0..slots {
        if bits[t / 64] & (1 << (t % 64)) == 0 {
            let n = first + 2 * t as u64;
            if n > 1 {
                out.push(n);
            }
        }
    }
    out
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut shift = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        shift += 1;
    }
    let mul = |x: u64, y: u64| (u128::from(x) * u128::from(y) % u128::from(n)) as u64;
    'witness: for &w in &WITNESSES {
        let mut x = 1u64;
        let mut base = w;
        let mut e = d;
        while e > 0 {
            if e & 1 == 1 {
                x = mul(x, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..shift {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn trial_division(n: u64) -> bool {
        if n < 4 {
            return n >= 2;
        }
        !n.is_multiple_of(2)
            && (3..)
                .step_by(2)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    fn oracle(lo: u64, hi: u64) -> Vec<u64> {
        (lo + 1..=hi).filter(|&n| trial_division(n)).collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(primes_in(4, 8).primes, vec![5, 7]);
        assert!(primes_in(24, 28).is_empty());
        assert_eq!(primes_in(0, 10).primes, vec![2, 3, 5, 7]);
        assert_eq!(primes_in(1, 2).primes, vec![2]);
        assert_eq!(primes_in(2, 3).primes, vec![3]);
        assert!(primes_in(0, 1).is_empty());
        assert!(primes_in(17, 17).is_empty());
    }

    #[test]
    fn count_to_one_million_agrees_with_trial_division() {
        let sieved = primes_in(0, 1_000_000);
        assert_eq!(sieved.len(), 78_498);
        assert_eq!(sieved.primes, oracle(0, 1_000_000));
    }

    #[test]
    fn tiny_windows_match_default() {
        for window in [64, 100, 1000] {
            assert_eq!(
                primes_in_with_window(1000, 20_000, window),
                primes_in(1000, 20_000)
            );
        }
    }

    #[test]
    fn random_intervals_agree_with_trial_division() {
        let mut rng = seeded_rng();
        for _ in 0..100 {
            let a = rng.gen_range(0..1_000_000_000u64);
            let got = primes_in(a, a + 10_000).primes;
            assert_eq!(got, oracle(a, a + 10_000), "interval ({a}, {}]", a + 10_000);
        }
    }

    #[test]
    fn segments_concatenate() {
        let mut rng = seeded_rng();
        for _ in 0..50 {
            let a = rng.gen_range(0..100_000u64);
            let b = a + rng.gen_range(0..5_000u64);
            let c = b + rng.gen_range(0..5_000u64);
            let mut joined = primes_in(a, b).primes;
            joined.extend(primes_in(b, c).primes);
            assert_eq!(joined, primes_in(a, c).primes);
        }
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
        assert!(is_prime(22_370_028_691));
        assert!(is_prime(885_831_128_921));
        assert!(!is_prime(22_370_028_691 * 3));
    }

    fn seeded_rng() -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(0x5eed)
    }
}
