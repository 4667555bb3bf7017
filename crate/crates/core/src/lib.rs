//! Left factorial residues `!p mod p` over intervals of primes.
//!
//! The left factorial `!n = 0! + 1! + ... + (n-1)!` rides along with `n!` in
//! the top row of the matrix factorial
//!
//! ```text
//! M_n = C_1 C_2 ... C_n = [[n!, !n], [0, 1]],   C_k = [[k, 1], [0, 1]].
//! ```
//!
//! Two independent routes to `r_p = !p mod p` are provided:
//!
//! * [`pipeline`] scans every prime of an interval `(m, n]` at once with a
//!   product tree of prime moduli, a prefix product `M_m`, block products of
//!   the `C_k`, and a top-down remainder descent.
//! * [`verify`] computes one residue in `O(p^(1/2+eps))` by baby-step /
//!   giant-step over polynomial matrices with fast multipoint evaluation.
//!
//! [`analysis`] turns the residues into Kurepa near-miss reports and
//! socialist-prime checks.

pub mod analysis;
pub mod bigprod;
mod error;
pub mod matpair;
pub mod par;
pub mod pipeline;
pub mod primes;
pub mod verify;

pub use error::{Error, Result};
pub use matpair::{balance, left_factorial_oracle, BalancedResidue, MatPair};
pub use pipeline::{scan_interval, ResidueRecord, ScanOutput};
pub use primes::{primes_in, PrimeList};
pub use verify::verify_residue;
