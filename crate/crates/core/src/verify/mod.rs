//! Single-prime residues in `O(p^(1/2 + eps))`.
//!
//! With `s = isqrt(p - 1)`, the polynomial matrix `G(x) = C(x+1) ... C(x+s)`
//! evaluated at `x = 0, s, ..., (s-1)s` yields the `s` consecutive blocks of
//! `C_1 ... C_(s^2)`. Folding them and the few remaining `C_k` gives
//! `M_(p-1) mod p = ((p-1)!, !(p-1))`; Wilson's theorem checks the first entry
//! and `!p = (p-1)! + !(p-1)` gives the residue.

mod field;
mod multipoint;
mod ntt;
mod poly;

pub use field::{Field, MAX_MODULUS};
pub use multipoint::{multipoint_eval, multipoint_eval_many};
pub use poly::{build_giant_poly, polymul, PolyMatPair, PolyModP};

use crate::matpair::{balance, BalancedResidue};
use crate::{Error, Result};

/// `!p mod p` for an odd prime `p > 3`, balanced.
pub fn verify_residue(p: u64) -> Result<BalancedResidue> {
    if p <= 3 || p.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "verify_residue needs an odd prime p > 3, got {p}"
        )));
    }
    if p >= MAX_MODULUS {
        return Err(Error::UnsupportedModulus(p));
    }
    let (fact, left) = matrix_factorial_mod(p)?;
    if fact != p - 1 {
        return Err(Error::WilsonCheck { p, got: fact });
    }
    let field = Field::new(p)?;
    balance(field.add(fact, left), p)
}

/// `M_(p-1) mod p` as `((p-1)! mod p, !(p-1) mod p)`.
pub fn matrix_factorial_mod(p: u64) -> Result<(u64, u64)> {
    let field = Field::new(p)?;
    let s = (p - 1).isqrt();
    let giant = build_giant_poly(s, p)?;
    let points: Vec<u64> = (0..s).map(|j| j * s).collect();
    let mut values =
        multipoint_eval_many(&field, &[giant.a.coeffs(), giant.b.coeffs()], &points).into_iter();
    let (a_values, b_values) = (
        values.next().expect("two polynomials"),
        values.next().expect("two polynomials"),
    );
    // ascending fold: (a, b) (a', b') = (a a', a b' + b)
    let (mut a, mut b) = (1u64, 0u64);
    for (&ga, &gb) in a_values.iter().zip(&b_values) {
        b = field.add(field.mul(a, gb), b);
        a = field.mul(a, ga);
    }
    for k in s * s + 1..p {
        b = field.add(a, b);
        a = field.mul(a, k);
    }
    Ok((a, b))
}
