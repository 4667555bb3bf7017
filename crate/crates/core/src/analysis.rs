//! Kurepa near-miss reports, socialist-prime checks and the heuristic counts.
//!
//! If `!p mod p` behaves like a uniform random residue, a prime `p` has
//! `|r_p| < l` with probability about `(2l - 1) / p`. Summed over the primes
//! of `(2^m, 2^n)` this gives `(2l - 1) ln(n / m)` expected near misses, and
//! the chance of a zero somewhere in the interval is about `1 - m / n`.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::matpair::left_factorial_oracle;
use crate::pipeline::ResidueRecord;
use crate::{Error, Result};

/// Primes with a small balanced residue, plus the heuristic expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearMissReport {
    pub threshold: u64,
    /// `(p, r_p)` with `|r_p| < threshold`, ascending in `p`.
    pub rows: Vec<(u64, i64)>,
    pub observed_count: usize,
    pub expected_count: f64,
    /// `(lo, hi)` used for the expectation.
    pub span: (u64, u64),
    /// Odd primes with `r_p = 0`.
    pub counterexamples: Vec<u64>,
}

impl NearMissReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Plain two-column table of the rows followed by the counts.
    pub fn to_table(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NearMissReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|(p, _)| p.to_string().len())
            .max()
            .unwrap_or(1)
            .max(1);
        writeln!(f, "{:>width$}  r_p", "p")?;
        for (p, r) in &self.rows {
            writeln!(f, "{p:>width$}  {r}")?;
        }
        writeln!(
            f,
            "|r_p| < {}: observed {}, expected {:.1} over ({}, {}]",
            self.threshold, self.observed_count, self.expected_count, self.span.0, self.span.1
        )?;
        if self.counterexamples.is_empty() {
            write!(f, "no Kurepa counterexamples")
        } else {
            let list = self.counterexamples.iter().fold(String::new(), |mut s, p| {
                if !s.is_empty() {
                    s.push_str(", ");
                }
                let _ = write!(s, "{p}");
                s
            });
            write!(f, "Kurepa counterexamples: {list}")
        }
    }
}

/// Near misses over the span covered by `records` (smallest to largest prime).
pub fn kurepa_scan(records: &[ResidueRecord], threshold: u64) -> Result<NearMissReport> {
    let lo = records.iter().map(|r| r.p).min().unwrap_or(0);
    let hi = records.iter().map(|r| r.p).max().unwrap_or(0);
    kurepa_scan_over(records, threshold, lo, hi)
}

/// Near misses with the expectation taken over `(lo, hi]`.
pub fn kurepa_scan_over(
    records: &[ResidueRecord],
    threshold: u64,
    lo: u64,
    hi: u64,
) -> Result<NearMissReport> {
    if threshold == 0 {
        return Err(Error::Precondition("threshold must be at least 1".into()));
    }
    let mut rows: Vec<(u64, i64)> = records
        .iter()
        .filter(|r| r.residue.magnitude() < threshold)
        .map(|r| (r.p, r.residue.value))
        .collect();
    rows.sort_unstable();
    let mut counterexamples: Vec<u64> = records
        .iter()
        .filter(|r| r.is_kurepa_counterexample())
        .map(|r| r.p)
        .collect();
    counterexamples.sort_unstable();
    let expected_count = if lo >= 2 && hi > lo {
        expected_low_residues((lo as f64).log2(), (hi as f64).log2(), threshold)?
    } else {
        0.0
    };
    Ok(NearMissReport {
        threshold,
        observed_count: rows.len(),
        rows,
        expected_count,
        span: (lo, hi),
        counterexamples,
    })
}

/// Necessary condition for a socialist prime `p > 5`: `(r_p - 2)^2 = 1 mod p`,
/// that is `r_p` is 1 or 3.
pub fn socialist_filter(p: u64, r: u64) -> Result<bool> {
    if p <= 5 {
        return Err(Error::Precondition(format!(
            "socialist filter needs p > 5, got {p}"
        )));
    }
    let r = r % p;
    Ok(r == 1 || r == 3)
}

/// Whether `2!, 3!, ..., (p-1)!` are pairwise distinct mod `p`.
pub fn socialist_bruteforce(p: u64) -> bool {
    if p < 3 {
        return true;
    }
    let mut seen = vec![0u64; (p as usize).div_ceil(64)];
    let mut fact = 1u64;
    for k in 2..p {
        fact = (u128::from(fact) * u128::from(k) % u128::from(p)) as u64;
        let (word, bit) = ((fact / 64) as usize, 1u64 << (fact % 64));
        if seen[word] & bit != 0 {
            return false;
        }
        seen[word] |= bit;
    }
    true
}

/// Every prime in `primes` (each `> 5`) that passes the filter, and which of
/// those are also socialist by brute force. Residues come from the oracle.
pub fn socialist_candidates(primes: &[u64]) -> Result<Vec<(u64, bool)>> {
    primes
        .iter()
        .filter(|&&p| p > 5)
        .filter_map(|&p| match socialist_filter(p, left_factorial_oracle(p)) {
            Ok(true) => Some(Ok((p, socialist_bruteforce(p)))),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        })
        .collect()
}

/// `(2l - 1) ln(n_exp / m_exp)` primes in `(2^m_exp, 2^n_exp)` with `|r_p| < l`.
pub fn expected_low_residues(m_exp: f64, n_exp: f64, threshold: u64) -> Result<f64> {
    if !(m_exp > 0.0 && n_exp > m_exp) {
        return Err(Error::Precondition(format!(
            "need 0 < m_exp < n_exp, got {m_exp}, {n_exp}"
        )));
    }
    if threshold == 0 {
        return Err(Error::Precondition("threshold must be at least 1".into()));
    }
    Ok((2.0 * threshold as f64 - 1.0) * (n_exp / m_exp).ln())
}

/// Chance of a Kurepa counterexample in `(2^m_exp, 2^n_exp)`: `1 - m/n`.
pub fn counterexample_probability(m_exp: f64, n_exp: f64) -> Result<f64> {
    if !(m_exp > 0.0 && n_exp >= m_exp) {
        return Err(Error::Precondition(format!(
            "need 0 < m_exp <= n_exp, got {m_exp}, {n_exp}"
        )));
    }
    Ok(1.0 - m_exp / n_exp)
}
