//! The matrix factorial in reduced two-entry form.
//!
//! Every matrix in this crate is upper triangular with bottom row `[0, 1]`,
//! so only the top row `(a, b)` is stored. `C_k = (k, 1)` and
//! `M_n = C_1 ... C_n = (n!, !n)`.

use std::fmt;

use rug::ops::RemRounding;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Top row `(a, b)` of the matrix `[[a, b], [0, 1]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatPair {
    pub a: Integer,
    pub b: Integer,
}

impl MatPair {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>) -> Self {
        MatPair {
            a: a.into(),
            b: b.into(),
        }
    }

    /// `(1, 0)`, the identity matrix and the empty product `M_0`.
    pub fn identity() -> Self {
        MatPair::new(1, 0)
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 && self.b == 0
    }

    /// The step matrix `C_k = [[k, 1], [0, 1]]`.
    pub fn c_of(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroIndex);
        }
        Ok(MatPair::new(k, 1))
    }

    /// Matrix product `self * rhs`, i.e. `(x.a y.a, x.a y.b + x.b)`.
    pub fn combine(&self, rhs: &MatPair) -> MatPair {
        let a = Integer::from(&self.a * &rhs.a);
        let mut b = Integer::from(&self.a * &rhs.b);
        b += &self.b;
        MatPair { a, b }
    }

    /// `self * C_k` without materialising `C_k`.
    pub fn push_step(&mut self, k: u64) {
        self.b += &self.a;
        self.a *= k;
    }

    /// Entry-wise reduction into `[0, modulus)`.
    pub fn reduce(&self, modulus: &Integer) -> Result<MatPair> {
        check_modulus(modulus)?;
        Ok(self.reduced_unchecked(modulus))
    }

    /// Product reduced modulo `modulus`.
    pub fn combine_mod(&self, rhs: &MatPair, modulus: &Integer) -> Result<MatPair> {
        check_modulus(modulus)?;
        Ok(self.combine(rhs).reduced_unchecked(modulus))
    }

    pub(crate) fn reduced_unchecked(&self, modulus: &Integer) -> MatPair {
        MatPair {
            a: Integer::from((&self.a).rem_euc(modulus)),
            b: Integer::from((&self.b).rem_euc(modulus)),
        }
    }

    /// Approximate heap footprint in bits, used for diagnostics.
    pub fn significant_bits(&self) -> u64 {
        u64::from(self.a.significant_bits()) + u64::from(self.b.significant_bits())
    }
}

impl Default for MatPair {
    fn default() -> Self {
        MatPair::identity()
    }
}

impl fmt::Display for MatPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

fn check_modulus(modulus: &Integer) -> Result<()> {
    if *modulus <= 0 {
        Err(Error::ZeroModulus)
    } else {
        Ok(())
    }
}

/// `(0! + 1! + ... + (p-1)!) mod p` by direct summation.
///
/// `p` need not be prime. This is the O(p) reference every faster route is
/// checked against.
pub fn left_factorial_oracle(p: u64) -> u64 {
    assert!(p >= 2, "left factorial oracle needs p >= 2");
    let modulus = u128::from(p);
    let mut factorial: u128 = 1;
    let mut sum: u128 = 0;
    for k in 0..p {
        sum += factorial;
        if sum >= modulus {
            sum -= modulus;
        }
        factorial = factorial * u128::from(k + 1) % modulus;
    }
    sum as u64
}

/// Signed representative of a residue, as reported in near-miss tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BalancedResidue {
    pub value: i64,
    pub modulus: u64,
}

impl BalancedResidue {
    /// The canonical residue in `[0, p)`.
    pub fn canonical(&self) -> u64 {
        if self.value < 0 {
            self.modulus - self.value.unsigned_abs()
        } else {
            self.value as u64
        }
    }

    pub fn magnitude(&self) -> u64 {
        self.value.unsigned_abs()
    }
}

impl fmt::Display for BalancedResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Map `r` in `[0, p)` to `r` or `r - p`, whichever lies in
/// `[-(p-1)/2, (p-1)/2]` for odd `p`.
pub fn balance(residue: u64, modulus: u64) -> Result<BalancedResidue> {
    if modulus == 0 {
        return Err(Error::ZeroModulus);
    }
    if residue >= modulus {
        return Err(Error::Unreduced { residue, modulus });
    }
    if modulus > i64::MAX as u64 {
        return Err(Error::UnsupportedModulus(modulus));
    }
    let value = if residue <= (modulus - 1) / 2 {
        residue as i64
    } else {
        -((modulus - residue) as i64)
    };
    Ok(BalancedResidue { value, modulus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(a: u64, b: u64) -> MatPair {
        MatPair::new(a, b)
    }

    fn small_primes(limit: u64) -> Vec<u64> {
        (2..limit)
            .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn c_of_examples() {
        assert_eq!(MatPair::c_of(1).unwrap(), pair(1, 1));
        assert_eq!(MatPair::c_of(5).unwrap(), pair(5, 1));
        assert_eq!(
            MatPair::c_of(1_000_000_000).unwrap(),
            pair(1_000_000_000, 1)
        );
        assert!(matches!(MatPair::c_of(0), Err(Error::ZeroIndex)));
    }

    #[test]
    fn combine_examples() {
        assert_eq!(pair(1, 0).combine(&pair(5, 1)), pair(5, 1));
        assert_eq!(pair(1, 1).combine(&pair(2, 1)), pair(2, 2));
        assert_eq!(pair(210, 36).combine(&pair(8, 1)), pair(1680, 246));
    }

    #[test]
    fn push_step_matches_combine() {
        let mut x = pair(210, 36);
        x.push_step(8);
        assert_eq!(x, pair(210, 36).combine(&MatPair::c_of(8).unwrap()));
    }

    #[test]
    fn reduce_examples() {
        let m35 = Integer::from(35);
        assert_eq!(pair(24, 10).reduce(&m35).unwrap(), pair(24, 10));
        assert_eq!(pair(1680, 246).reduce(&m35).unwrap(), pair(0, 1));
        assert_eq!(pair(7, 7).reduce(&Integer::from(7)).unwrap(), pair(0, 0));
        assert!(matches!(
            pair(7, 7).reduce(&Integer::new()),
            Err(Error::ZeroModulus)
        ));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(left_factorial_oracle(3), 1);
        assert_eq!(left_factorial_oracle(5), 4);
        assert_eq!(left_factorial_oracle(7), 6);
        assert_eq!(left_factorial_oracle(11), 1);
        // composite moduli are accepted: !4 = 10
        assert_eq!(left_factorial_oracle(4), 2);
    }

    #[test]
    fn balance_examples() {
        assert_eq!(balance(4, 5).unwrap().value, -1);
        assert_eq!(balance(0, 7).unwrap().value, 0);
        assert_eq!(balance(6, 11).unwrap().value, -5);
        assert_eq!(balance(5, 11).unwrap().value, 5);
        assert_eq!(balance(0, 2).unwrap().value, 0);
        assert!(matches!(balance(7, 7), Err(Error::Unreduced { .. })));
    }

    #[test]
    fn factorial_identity_against_direct_sums() {
        let mut acc = MatPair::identity();
        let mut factorial = Integer::from(1);
        let mut left = Integer::from(0);
        for n in 1..=200u64 {
            // !n = !(n-1) + (n-1)!, n! = n (n-1)!
            left += &factorial;
            factorial *= n;
            acc = acc.combine(&MatPair::c_of(n).unwrap());
            assert_eq!(acc.a, factorial, "n! at n = {n}");
            assert_eq!(acc.b, left, "!n at n = {n}");
        }
    }

    #[test]
    fn oracle_matches_matrix_factorial_for_primes_below_10k() {
        let primes = small_primes(10_000);
        let mut acc = MatPair::identity();
        let mut k = 0;
        for &p in &primes {
            while k < p {
                k += 1;
                acc.push_step(k);
            }
            let m = Integer::from(p);
            let reduced = acc.reduce(&m).unwrap();
            assert_eq!(reduced.b, left_factorial_oracle(p), "p = {p}");
        }
    }

    fn arb_pair() -> impl Strategy<Value = MatPair> {
        (any::<u64>(), any::<u64>()).prop_map(|(a, b)| pair(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn combine_is_associative(x in arb_pair(), y in arb_pair(), z in arb_pair()) {
            prop_assert_eq!(x.combine(&y).combine(&z), x.combine(&y.combine(&z)));
        }

        #[test]
        fn identity_is_neutral(x in arb_pair()) {
            prop_assert_eq!(MatPair::identity().combine(&x), x.clone());
            prop_assert_eq!(x.combine(&MatPair::identity()), x);
        }

        #[test]
        fn reduce_commutes_with_combine(x in arb_pair(), y in arb_pair(), m in 1u64..) {
            let m = Integer::from(m);
            let direct = x.combine(&y).reduce(&m).unwrap();
            let early = x.reduce(&m).unwrap().combine(&y.reduce(&m).unwrap()).reduce(&m).unwrap();
            prop_assert_eq!(direct, early);
        }

        #[test]
        fn balance_round_trips(p in (1u64..1 << 40).prop_map(|k| 2 * k + 1), r in any::<u64>()) {
            let r = r % p;
            let balanced = balance(r, p).unwrap();
            prop_assert!(balanced.magnitude() <= (p - 1) / 2);
            prop_assert_eq!(balanced.value.rem_euclid(p as i64) as u64, r);
            prop_assert_eq!(balanced.canonical(), r);
        }
    }
}
