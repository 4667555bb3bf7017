//! Exact convolution over `Z/pZ` for arbitrary `p < 2^62`.
//!
//! Inputs are lifted to integers, convolved modulo up to three NTT-friendly
//! primes near `2^61`, and recombined with Garner's algorithm straight into
//! `Z/pZ`. The number of primes is the smallest whose product exceeds the
//! largest possible coefficient of the integer convolution.

use std::sync::{Arc, OnceLock, RwLock};

use super::field::{Field, Montgomery};
use crate::par;

/// `c 2^k + 1` primes with 2-adic order at least 55.
const NTT_PRIMES: [u64; 3] = [
    4_179_340_454_199_820_289, // 29 * 2^57 + 1
    2_485_986_994_308_513_793, // 69 * 2^55 + 1
    1_945_555_039_024_054_273, // 27 * 2^56 + 1
];

/// Below this length on either side a product is done by schoolbook.
pub const SCHOOLBOOK_CUTOFF: usize = 16;

struct NttPrime {
    mont: Montgomery,
    /// primitive root of unity of order 2^two_adicity, plain form
    root: u64,
    two_adicity: u32,
    tables: RwLock<Arc<Twiddles>>,
}

/// Montgomery-form twiddles: `fwd[len + j] = w_(2 len)^j`, `inv` likewise
/// with the inverse root, for every power of two `len < size`.
struct Twiddles {
    size: usize,
    fwd: Vec<u64>,
    inv: Vec<u64>,
}

impl NttPrime {
    fn new(q: u64) -> Self {
        let mont = Montgomery::new(q);
        let two_adicity = (q - 1).trailing_zeros();
        let odd = (q - 1) >> two_adicity;
        let generator = primitive_root(&mont, odd);
        let root = mont.pow(generator, odd);
        NttPrime {
            mont,
            root,
            two_adicity,
            tables: RwLock::new(Arc::new(Twiddles {
                size: 1,
                fwd: vec![0; 2],
                inv: vec![0; 2],
            })),
        }
    }

    fn twiddles(&self, size: usize) -> Arc<Twiddles> {
        {
            let current = self.tables.read().expect("twiddle lock");
            if current.size >= size {
                return Arc::clone(&current);
            }
        }
        let mut guard = self.tables.write().expect("twiddle lock");
        if guard.size < size {
            *guard = Arc::new(self.build_twiddles(size.max(2 * guard.size)));
        }
        Arc::clone(&guard)
    }

    fn build_twiddles(&self, size: usize) -> Twiddles {
        assert!(size.is_power_of_two());
        let log = size.trailing_zeros();
        assert!(
            log <= self.two_adicity,
            "transform of length {size} not supported"
        );
        let m = &self.mont;
        let mut fwd = vec![0u64; size.max(2)];
        let mut inv = vec![0u64; size.max(2)];
        let mut len = 1;
        while len < size {
            // primitive (2 len)-th root
            let w = m.pow(
                self.root,
                1u64 << (self.two_adicity - len.trailing_zeros() - 1),
            );
            let w_inv = m.pow(w, m.modulus() - 2);
            let (w, w_inv) = (m.to_mont(w), m.to_mont(w_inv));
            let mut cur = m.to_mont(1);
            let mut cur_inv = cur;
            for j in 0..len {
                fwd[len + j] = cur;
                inv[len + j] = cur_inv;
                cur = m.mul(cur, w);
                cur_inv = m.mul(cur_inv, w_inv);
            }
            len *= 2;
        }
        Twiddles { size, fwd, inv }
    }

    /// Decimation in frequency: natural order in, bit-reversed out.
    fn forward(&self, a: &mut [u64], tw: &Twiddles) {
        let m = &self.mont;
        let n = a.len();
        let mut len = n / 2;
        while len >= 1 {
            let w = &tw.fwd[len..2 * len];
            for chunk in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = chunk.split_at_mut(len);
                for ((x, y), &wj) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let (u, v) = (*x, *y);
                    *x = m.add(u, v);
                    *y = m.mul(m.sub(u, v), wj);
                }
            }
            len /= 2;
        }
    }

    /// Decimation in time with inverse roots: bit-reversed in, natural out,
    /// scaled by `n`.
    fn inverse(&self, a: &mut [u64], tw: &Twiddles) {
        let m = &self.mont;
        let n = a.len();
        let mut len = 1;
        while len < n {
            let w = &tw.inv[len..2 * len];
            for chunk in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = chunk.split_at_mut(len);
                for ((x, y), &wj) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let u = *x;
                    let v = m.mul(*y, wj);
                    *x = m.add(u, v);
                    *y = m.sub(u, v);
                }
            }
            len *= 2;
        }
    }

    /// Cyclic convolutions of `f` with each of `gs` modulo `x^size - 1` and `q`.
    fn cyclic(&self, f: &[u64], gs: &[&[u64]], size: usize) -> Vec<Vec<u64>> {
        let m = &self.mont;
        let q = m.modulus();
        let tw = self.twiddles(size);
        let load = |src: &[u64]| {
            let mut buf = vec![0u64; size];
            for (i, &c) in src.iter().enumerate() {
                // sources are already folded to at most `size` terms
                buf[i] = if c >= q { c % q } else { c };
            }
            buf
        };
        let mut fa = load(f);
        self.forward(&mut fa, &tw);
        // (x y R^-1) after the pointwise step; undo R^-1 and 1/size together
        let size_inv = m.pow(size as u64 % q, q - 2);
        let scale = m.to_mont(m.to_mont(size_inv));
        gs.iter()
            .map(|g| {
                let mut ga = load(g);
                self.forward(&mut ga, &tw);
                for (x, &y) in ga.iter_mut().zip(&fa) {
                    *x = m.mul(*x, y);
                }
                self.inverse(&mut ga, &tw);
                for x in &mut ga {
                    *x = m.mul(*x, scale);
                }
                ga
            })
            .collect()
    }
}

fn primitive_root(m: &Montgomery, odd: u64) -> u64 {
    let q = m.modulus();
    let mut factors = vec![2u64];
    let mut rest = odd;
    let mut d = 3;
    while d * d <= rest {
        if rest.is_multiple_of(d) {
            factors.push(d);
            while rest.is_multiple_of(d) {
                rest /= d;
            }
        }
        d += 2;
    }
    if rest > 1 {
        factors.push(rest);
    }
    (2..)
        .find(|&g| factors.iter().all(|&f| m.pow(g, (q - 1) / f) != 1))
        .expect("a primitive root exists")
}

fn ntt_primes() -> &'static [NttPrime; 3] {
    static PRIMES: OnceLock<[NttPrime; 3]> = OnceLock::new();
    PRIMES.get_or_init(|| NTT_PRIMES.map(NttPrime::new))
}

/// Garner constants for recombining into `Z/pZ`.
struct Crt {
    count: usize,
    /// q0^-1 mod q1, q0^-1 mod q2, q1^-1 mod q2 in Montgomery form
    inv01: u64,
    inv02: u64,
    inv12: u64,
    /// q0 mod p and q0 q1 mod p, prepared for `Field::mul_prepared`
    q0_p: u64,
    q01_p: u64,
}

impl Crt {
    fn new(field: &Field, count: usize) -> Self {
        let [p0, p1, p2] = ntt_primes();
        let (q0, q1) = (p0.mont.modulus(), p1.mont.modulus());
        let inv_mod = |x: u64, t: &Montgomery| t.to_mont(t.pow(x % t.modulus(), t.modulus() - 2));
        let p = field.modulus();
        let q0_p = q0 % p;
        let q1_p = q1 % p;
        Crt {
            count,
            inv01: inv_mod(q0, &p1.mont),
            inv02: inv_mod(q0, &p2.mont),
            inv12: inv_mod(q1, &p2.mont),
            q0_p: field.prepare(q0_p),
            q01_p: field.prepare(field.mul(q0_p, q1_p)),
        }
    }

    #[inline]
    fn combine(&self, field: &Field, r: [u64; 3]) -> u64 {
        let [_, p1, p2] = ntt_primes();
        let (m1, m2) = (&p1.mont, &p2.mont);
        let base = r[0] % field.modulus();
        if self.count == 1 {
            return base;
        }
        // x = r0 + q0 t1 + q0 q1 t2
        let t1 = m1.mul(m1.sub(r[1], r[0] % m1.modulus()), self.inv01);
        let mut x = field.add(base, field.mul_prepared(t1, self.q0_p));
        if self.count == 3 {
            let q2 = m2.modulus();
            let d = m2.mul(m2.sub(r[2], r[0] % q2), self.inv02);
            let t2 = m2.mul(m2.sub(d, t1 % q2), self.inv12);
            x = field.add(x, field.mul_prepared(t2, self.q01_p));
        }
        x
    }
}

/// How many NTT primes are needed for sums of `terms` products of residues
/// below `p`.
fn primes_needed(p: u64, terms: usize) -> usize {
    let max = u128::from(p - 1);
    let bound_bits = 128 - (max * max).leading_zeros() + usize::BITS - terms.leading_zeros();
    // each NTT prime carries more than 60 bits
    let count = (bound_bits as usize).div_ceil(60).max(1);
    assert!(
        count <= 3,
        "coefficient bound of {bound_bits} bits exceeds the NTT basis"
    );
    count
}

/// Fold `src` modulo `x^size - 1`, reducing into `[0, p)` where terms collide.
fn fold<'a>(field: &Field, src: &'a [u64], size: usize) -> std::borrow::Cow<'a, [u64]> {
    if src.len() <= size {
        return std::borrow::Cow::Borrowed(src);
    }
    let mut out = src[..size].to_vec();
    for (i, &c) in src[size..].iter().enumerate() {
        let at = i % size;
        out[at] = field.add(out[at], c);
    }
    std::borrow::Cow::Owned(out)
}

/// Cyclic convolutions `f * g mod (x^size - 1)` over `Z/pZ` for every `g`,
/// sharing the transform of `f`. `size` must be a power of two.
pub fn cyclic_convolve_many(field: &Field, f: &[u64], gs: &[&[u64]], size: usize) -> Vec<Vec<u64>> {
    assert!(size.is_power_of_two());
    let f = fold(field, f, size);
    let gs: Vec<_> = gs.iter().map(|g| fold(field, g, size)).collect();
    let g_refs: Vec<&[u64]> = gs.iter().map(|g| g.as_ref()).collect();
    let longest_g = g_refs.iter().map(|g| g.len()).max().unwrap_or(0);
    let terms = f.len().min(longest_g).max(1);
    let count = primes_needed(field.modulus(), terms);
    let primes = ntt_primes();
    let per_prime: Vec<Vec<Vec<u64>>> =
        par::map_range(count, |k| primes[k].cyclic(&f, &g_refs, size));
    let crt = Crt::new(field, count);
    (0..g_refs.len())
        .map(|gi| {
            (0..size)
                .map(|i| {
                    let mut r = [0u64; 3];
                    for (k, slot) in r.iter_mut().enumerate().take(count) {
                        *slot = per_prime[k][gi][i];
                    }
                    crt.combine(field, r)
                })
                .collect()
        })
        .collect()
}

/// Full products `f * g` for every `g`, sharing work on `f`.
pub fn mul_many(field: &Field, f: &[u64], gs: &[&[u64]]) -> Vec<Vec<u64>> {
    if f.is_empty() {
        return gs.iter().map(|_| Vec::new()).collect();
    }
    let shortest = gs.iter().map(|g| g.len()).min().unwrap_or(0);
    if f.len().min(shortest) <= SCHOOLBOOK_CUTOFF {
        return gs.iter().map(|g| schoolbook(field, f, g)).collect();
    }
    let longest = gs.iter().map(|g| g.len()).max().unwrap_or(0);
    let size = (f.len() + longest - 1).next_power_of_two();
    let mut out = cyclic_convolve_many(field, f, gs, size);
    for (o, g) in out.iter_mut().zip(gs) {
        o.truncate(f.len() + g.len() - 1);
    }
    out
}

pub fn mul(field: &Field, f: &[u64], g: &[u64]) -> Vec<u64> {
    mul_many(field, f, &[g]).pop().expect("one product")
}

/// Quadratic product with 128-bit accumulation.
pub fn schoolbook(field: &Field, f: &[u64], g: &[u64]) -> Vec<u64> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let (short, long) = if f.len() <= g.len() { (f, g) } else { (g, f) };
    let mut out = vec![0u64; f.len() + g.len() - 1];
    // at most 16 products below 2^124 fit in an accumulator
    for chunk_start in (0..short.len()).step_by(SCHOOLBOOK_CUTOFF) {
        let chunk = &short[chunk_start..(chunk_start + SCHOOLBOOK_CUTOFF).min(short.len())];
        for (k, slot) in out.iter_mut().enumerate().skip(chunk_start) {
            let mut acc: u128 = 0;
            for (i, &a) in chunk.iter().enumerate() {
                let Some(j) = (k - chunk_start).checked_sub(i) else {
                    break;
                };
                if let Some(&b) = long.get(j) {
                    acc += u128::from(a) * u128::from(b);
                }
            }
            *slot = field.add(*slot, field.reduce_u128(acc));
        }
    }
    out
}
