//! Interval scans: every `!p mod p` for the primes of `(m, n]` at once.

mod checkpoint;
mod phases;
mod segment;
mod tree;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use checkpoint::{binary_blocks, Block, Checkpoint, CheckpointStore};
pub use phases::{
    moduli_from_primes, phase1_moduli, phase2_prefix, phase3_blocks, phase3_blocks_with_product,
    phase4_descend, BlockTable, ModuliTree,
};
pub use segment::{depth, leaf_index, segment, Segment};
pub use tree::SparseLevels;

use crate::matpair::{balance, BalancedResidue};
use crate::{Error, Result};

/// Sub-interval width a scan works on at once.
pub const DEFAULT_BLOCK_BUDGET: u64 = 1 << 22;

/// `!p mod p` for one prime, in balanced form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueRecord {
    pub p: u64,
    pub residue: BalancedResidue,
}

impl ResidueRecord {
    /// An odd prime dividing its own left factorial.
    pub fn is_kurepa_counterexample(&self) -> bool {
        self.p % 2 == 1 && self.residue.value == 0
    }
}

#[derive(Clone, Debug)]
pub struct ScanOutput {
    pub records: Vec<ResidueRecord>,
    /// Prefix frontier for `M_n`, ready for a scan starting at `n`.
    pub checkpoint: Checkpoint,
}

impl ScanOutput {
    pub fn counterexamples(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.is_kurepa_counterexample())
            .map(|r| r.p)
            .collect()
    }
}

/// Residues for all primes in `(m, n]`.
///
/// The interval is processed in sub-intervals whose ends fall on multiples of
/// `block_budget`; the prefix checkpoint is threaded through them. Output is
/// sorted by `p` and independent of the split.
pub fn scan_interval(
    m: u64,
    n: u64,
    checkpoint: Option<Checkpoint>,
    block_budget: u64,
) -> Result<ScanOutput> {
    scan_chunks(m, n, checkpoint, block_budget, |_| Ok(()))
}

/// [`scan_interval`] backed by a checkpoint directory: the best stored prefix
/// at or below `m` seeds the scan and every finished sub-interval leaves a
/// new checkpoint behind.
pub fn scan_with_store(
    m: u64,
    n: u64,
    store: &CheckpointStore,
    block_budget: u64,
) -> Result<ScanOutput> {
    let seed = store.best_for(m)?;
    scan_chunks(m, n, seed, block_budget, |cp| store.save(cp).map(drop))
}

fn scan_chunks<F>(
    m: u64,
    n: u64,
    checkpoint: Option<Checkpoint>,
    block_budget: u64,
    mut on_chunk: F,
) -> Result<ScanOutput>
where
    F: FnMut(&Checkpoint) -> Result<()>,
{
    if n <= m {
        return Err(Error::InvalidInterval { lo: m, hi: n });
    }
    if block_budget == 0 {
        return Err(Error::Precondition("block budget must be positive".into()));
    }
    let mut checkpoint = checkpoint;
    let mut records = Vec::new();
    let mut lo = m;
    while lo < n {
        let hi = (lo / block_budget + 1).saturating_mul(block_budget).min(n);
        let (chunk, next) = scan_one(lo, hi, checkpoint.take())?;
        on_chunk(&next)?;
        records.extend(chunk);
        checkpoint = Some(next);
        lo = hi;
    }
    Ok(ScanOutput {
        records,
        checkpoint: checkpoint.expect("at least one sub-interval"),
    })
}

fn scan_one(
    m: u64,
    n: u64,
    checkpoint: Option<Checkpoint>,
) -> Result<(Vec<ResidueRecord>, Checkpoint)> {
    let moduli = phase1_moduli(m, n)?;
    let (r00, prefix) = phase2_prefix(m, &moduli.root(), checkpoint)?;
    let (blocks, interval_product) = phase3_blocks_with_product(&moduli);
    let records = phase4_descend(&r00, &blocks, &moduli)?;
    drop(blocks);
    let mut interval_product = Some(interval_product);
    let next = prefix.extend_to(n, |lo, hi| match interval_product.take() {
        Some(product) if (lo, hi) == (m + 1, n) => product,
        _ => crate::bigprod::mat_product_range(lo, hi),
    })?;
    Ok((records, next))
}

/// Write records as `p,residue` CSV, balanced residues in signed decimal.
pub fn write_csv<W: Write>(records: &[ResidueRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["p", "residue"])?;
    for r in records {
        out.write_record([r.p.to_string(), r.residue.value.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Read `p,residue` CSV back, checking each residue is balanced.
pub fn read_csv<R: Read>(r: R) -> Result<Vec<ResidueRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers()?;
    if headers != vec!["p", "residue"] {
        return Err(Error::Format(format!("unexpected header {headers:?}")));
    }
    let mut records = Vec::new();
    for row in reader.deserialize() {
        let (p, value): (u64, i64) = row?;
        if p < 2 {
            return Err(Error::Format(format!("modulus {p}")));
        }
        let canonical = value.rem_euclid(p as i64) as u64;
        let residue = balance(canonical, p)?;
        if residue.value != value {
            return Err(Error::Format(format!(
                "residue {value} for p = {p} is not balanced"
            )));
        }
        records.push(ResidueRecord { p, residue });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matpair::left_factorial_oracle;

    fn canonical(records: &[ResidueRecord]) -> Vec<(u64, u64)> {
        records
            .iter()
            .map(|r| (r.p, r.residue.canonical()))
            .collect()
    }

    #[test]
    fn small_scan() {
        let out = scan_interval(4, 8, None, DEFAULT_BLOCK_BUDGET).unwrap();
        assert_eq!(canonical(&out.records), vec![(5, 4), (7, 6)]);
        assert_eq!(out.checkpoint, Checkpoint::for_prefix(8));
        assert!(out.counterexamples().is_empty());
    }

    #[test]
    fn scan_to_100() {
        let out = scan_interval(2, 100, None, DEFAULT_BLOCK_BUDGET).unwrap();
        assert_eq!(out.records.len(), 24);
        for r in &out.records {
            assert_eq!(r.residue.canonical(), left_factorial_oracle(r.p));
        }
    }

    #[test]
    fn budget_does_not_change_output() {
        let whole = scan_interval(2, 5000, None, DEFAULT_BLOCK_BUDGET).unwrap();
        for budget in [1, 7, 64, 1000] {
            let split = scan_interval(2, 5000, None, budget).unwrap();
            assert_eq!(split.records, whole.records, "budget {budget}");
            assert_eq!(split.checkpoint, whole.checkpoint);
        }
    }

    #[test]
    fn empty_interval_has_no_records() {
        let out = scan_interval(24, 28, None, DEFAULT_BLOCK_BUDGET).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.checkpoint.m(), 28);
        assert!(scan_interval(5, 5, None, 10).is_err());
        assert!(scan_interval(1, 5, None, 0).is_err());
    }

    #[test]
    fn p2_is_reported_but_not_flagged() {
        let out = scan_interval(1, 3, None, 16).unwrap();
        assert_eq!(canonical(&out.records), vec![(2, 0), (3, 1)]);
        assert!(out.records[0].residue.value == 0);
        assert!(out.counterexamples().is_empty());
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = CheckpointStore::open(dir.path()).unwrap();
        let first = scan_with_store(2, 3000, &store, 1024).unwrap();
        assert_eq!(store.available().unwrap(), vec![1024, 2048, 3000]);
        let second = scan_with_store(3000, 6000, &store, 1024).unwrap();
        let whole = scan_interval(2, 6000, None, 1024).unwrap();
        let mut joined = first.records;
        joined.extend(second.records);
        assert_eq!(joined, whole.records);
    }

    #[test]
    fn csv_round_trip() {
        let out = scan_interval(2, 200, None, DEFAULT_BLOCK_BUDGET).unwrap();
        let mut bytes = Vec::new();
        write_csv(&out.records, &mut bytes).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("p,residue\n3,1\n5,-1\n7,-1\n11,1\n"));
        assert_eq!(read_csv(bytes.as_slice()).unwrap(), out.records);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(read_csv("q,r\n3,1\n".as_bytes()).is_err());
        assert!(read_csv("p,residue\n7,6\n".as_bytes()).is_err());
        assert!(read_csv("p,residue\n7,x\n".as_bytes()).is_err());
    }
}
