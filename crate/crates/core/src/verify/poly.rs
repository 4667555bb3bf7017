//! Dense polynomials over `Z/pZ` and 2x2 upper-triangular polynomial matrices.

use super::field::Field;
use super::ntt;
use crate::par;
use crate::{Error, Result};

/// Coefficients in ascending degree, no trailing zeros; the zero polynomial
/// is the empty list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyModP {
    coeffs: Vec<u64>,
    modulus: u64,
}

impl PolyModP {
    /// Reduces every coefficient and trims trailing zeros.
    pub fn new(coeffs: Vec<u64>, modulus: u64) -> Result<Self> {
        Field::new(modulus)?;
        let coeffs = coeffs.into_iter().map(|c| c % modulus).collect();
        Ok(PolyModP::from_reduced(coeffs, modulus))
    }

    pub(crate) fn from_reduced(mut coeffs: Vec<u64>, modulus: u64) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyModP { coeffs, modulus }
    }

    pub fn zero(modulus: u64) -> Result<Self> {
        PolyModP::new(Vec::new(), modulus)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: u64) -> u64 {
        let field = self.field();
        let x = x % self.modulus;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| field.add(field.mul(acc, x), c))
    }

    pub(crate) fn field(&self) -> Field {
        Field::new(self.modulus).expect("validated on construction")
    }
}

fn same_modulus(f: &PolyModP, g: &PolyModP) -> Result<()> {
    if f.modulus != g.modulus {
        Err(Error::ModulusMismatch(f.modulus, g.modulus))
    } else {
        Ok(())
    }
}

/// Product in `F_p[x]`.
pub fn polymul(f: &PolyModP, g: &PolyModP) -> Result<PolyModP> {
    same_modulus(f, g)?;
    let field = f.field();
    Ok(PolyModP::from_reduced(
        ntt::mul(&field, &f.coeffs, &g.coeffs),
        f.modulus,
    ))
}

/// `[[a(x), b(x)], [0, 1]]` over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatPair {
    pub a: PolyModP,
    pub b: PolyModP,
}

impl PolyMatPair {
    pub fn modulus(&self) -> u64 {
        self.a.modulus
    }

    /// `self * rhs`: `(a a', a b' + b)`, one shared transform of `a`.
    pub fn combine(&self, rhs: &PolyMatPair) -> Result<PolyMatPair> {
        same_modulus(&self.a, &self.b)?;
        same_modulus(&self.a, &rhs.a)?;
        same_modulus(&self.a, &rhs.b)?;
        let field = self.a.field();
        let (a, b) = combine_raw(
            &field,
            (&self.a.coeffs, &self.b.coeffs),
            (&rhs.a.coeffs, &rhs.b.coeffs),
        );
        Ok(PolyMatPair {
            a: PolyModP::from_reduced(a, self.modulus()),
            b: PolyModP::from_reduced(b, self.modulus()),
        })
    }

    /// The scalar matrix at `x`.
    pub fn eval(&self, x: u64) -> (u64, u64) {
        (self.a.eval(x), self.b.eval(x))
    }
}

type RawPair = (Vec<u64>, Vec<u64>);

fn combine_raw(field: &Field, left: (&[u64], &[u64]), right: (&[u64], &[u64])) -> RawPair {
    let mut products = ntt::mul_many(field, left.0, &[right.0, right.1]);
    let mut b = products.pop().expect("two products");
    let a = products.pop().expect("two products");
    if b.len() < left.1.len() {
        b.resize(left.1.len(), 0);
    }
    for (x, &y) in b.iter_mut().zip(left.1) {
        *x = field.add(*x, y);
    }
    (a, b)
}

/// `G(x) = C(x + 1) C(x + 2) ... C(x + s)` with `C(y) = [[y, 1], [0, 1]]`.
///
/// Evaluating at `x = j s` gives the block `C_(js+1) ... C_(js+s)`.
pub fn build_giant_poly(s: u64, p: u64) -> Result<PolyMatPair> {
    if s == 0 {
        return Err(Error::Precondition("block size must be positive".into()));
    }
    if u128::from(s) * u128::from(s) >= u128::from(p) {
        return Err(Error::Precondition(format!("s = {s} needs s^2 < p = {p}")));
    }
    let field = Field::new(p)?;
    let (a, b) = shifted_product(&field, 1, s);
    Ok(PolyMatPair {
        a: PolyModP::from_reduced(a, p),
        b: PolyModP::from_reduced(b, p),
    })
}

/// `C(x + lo) ... C(x + hi)` as raw coefficient vectors.
fn shifted_product(field: &Field, lo: u64, hi: u64) -> RawPair {
    let len = hi - lo + 1;
    if len <= 32 {
        // (a, b) C(x + k) = (a (x + k), a + b)
        let mut a = vec![lo % field.modulus(), 1];
        let mut b = vec![1u64];
        for k in lo + 1..=hi {
            let k = k % field.modulus();
            if b.len() < a.len() {
                b.resize(a.len(), 0);
            }
            for (x, &y) in b.iter_mut().zip(&a) {
                *x = field.add(*x, y);
            }
            a.push(0);
            for i in (0..a.len()).rev() {
                let shifted = if i > 0 { a[i - 1] } else { 0 };
                a[i] = field.add(field.mul(a[i], k), shifted);
            }
        }
        return (a, b);
    }
    let mid = lo + len / 2 - 1;
    let (left, right) = if len >= par::SPLIT_GRAIN {
        par::join(
            || shifted_product(field, lo, mid),
            || shifted_product(field, mid + 1, hi),
        )
    } else {
        (
            shifted_product(field, lo, mid),
            shifted_product(field, mid + 1, hi),
        )
    };
    combine_raw(field, (&left.0, &left.1), (&right.0, &right.1))
}
