//! Word-sized modular arithmetic.

use crate::{Error, Result};

/// Largest modulus accepted anywhere in the verifier.
pub const MAX_MODULUS: u64 = 1 << 62;

/// Montgomery arithmetic modulo an odd `q < 2^62` with `R = 2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Montgomery {
    q: u64,
    /// `-q^-1 mod 2^64`
    q_neg_inv: u64,
    /// `R^2 mod q`
    r2: u64,
}

#[allow(clippy::wrong_self_convention)]
impl Montgomery {
    pub fn new(q: u64) -> Self {
        assert!(
            q % 2 == 1 && q > 1 && q < MAX_MODULUS,
            "bad Montgomery modulus {q}"
        );
        let mut inv = q;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(q.wrapping_mul(inv)));
        }
        debug_assert_eq!(q.wrapping_mul(inv), 1);
        let r = (1u128 << 64) % u128::from(q);
        let r2 = (r * r % u128::from(q)) as u64;
        Montgomery {
            q,
            q_neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `t R^-1 mod q` for `t < q 2^64`.
    #[inline(always)]
    pub fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.q_neg_inv);
        let u = ((t + u128::from(m) * u128::from(self.q)) >> 64) as u64;
        if u >= self.q {
            u - self.q
        } else {
            u
        }
    }

    /// `a b R^-1 mod q`.
    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(u128::from(a) * u128::from(b))
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    /// `a R mod q`.
    #[inline]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.q, self.r2)
    }

    #[inline]
    pub fn from_mont(&self, a: u64) -> u64 {
        self.redc(u128::from(a))
    }

    /// `a^e mod q` on plain residues.
    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = self.to_mont(a);
        let mut acc = self.to_mont(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        self.from_mont(acc)
    }
}

/// Arithmetic in `Z/pZ` on plain residues in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field {
    p: u64,
    mont: Option<Montgomery>,
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..MAX_MODULUS).contains(&p) {
            return Err(Error::UnsupportedModulus(p));
        }
        let mont = (p % 2 == 1).then(|| Montgomery::new(p));
        Ok(Field { p, mont })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match &self.mont {
            Some(m) => m.mul(m.mul(a, b), m.r2),
            None => (u128::from(a) * u128::from(b) % u128::from(self.p)) as u64,
        }
    }

    /// Precompute a multiplier for [`Field::mul_prepared`].
    pub fn prepare(&self, c: u64) -> u64 {
        match &self.mont {
            Some(m) => m.to_mont(c),
            None => c % self.p,
        }
    }

    /// `a c mod p` for `prepared = prepare(c)`, one reduction.
    #[inline(always)]
    pub fn mul_prepared(&self, a: u64, prepared: u64) -> u64 {
        match &self.mont {
            Some(m) => m.mul(a, prepared),
            None => (u128::from(a) * u128::from(prepared) % u128::from(self.p)) as u64,
        }
    }

    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        (x % u128::from(self.p)) as u64
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}
