//! Unreduced prefix products `C_1 ... C_m`, kept as a binary-counter frontier.
//!
//! For `m = 2^e1 + 2^e2 + ...` (e1 > e2 > ...) the frontier holds one exact
//! block product per set bit: `[1, 2^e1]`, `[2^e1 + 1, 2^e1 + 2^e2]`, and so
//! on. Extending the prefix to a larger `m` reuses every block whose range is
//! unchanged and merges the rest, so the bulk of `M_m` is never recomputed
//! across consecutive scans.
//!
//! On-disk layout, little-endian except the magnitudes:
//!
//! ```text
//! "LFCK" | version: u32 = 1 | m: u64 | blocks: u32
//! per block: start: u64 | end: u64 | len(a): u64 | a (big-endian) | len(b): u64 | b (big-endian)
//! ```

use std::fs::{self, File, TryLockError};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rug::integer::Order;
use rug::Integer;

use crate::bigprod::mat_product_range;
use crate::matpair::MatPair;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LFCK";
pub const VERSION: u32 = 1;

/// Exact product of `C_start ... C_end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: u64,
    pub end: u64,
    pub value: MatPair,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    m: u64,
    blocks: Vec<Block>,
}

/// Block ranges of the binary-counter frontier for `m`.
pub fn binary_blocks(m: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    let mut covered = 0;
    for bit in (0..u64::BITS).rev() {
        let size = 1u64 << bit;
        if m & size != 0 {
            out.push((covered + 1, covered + size));
            covered += size;
        }
    }
    out
}

impl Checkpoint {
    /// The empty prefix `M_0`.
    pub fn empty() -> Self {
        Checkpoint {
            m: 0,
            blocks: Vec::new(),
        }
    }

    /// Compute the frontier for `m` from scratch.
    pub fn for_prefix(m: u64) -> Self {
        Checkpoint::empty()
            .extend_to(m, mat_product_range)
            .expect("extending the empty checkpoint cannot fail")
    }

    /// Wrap existing blocks after checking the frontier structure.
    pub fn from_blocks(m: u64, blocks: Vec<Block>) -> Result<Self> {
        let checkpoint = Checkpoint { m, blocks };
        checkpoint.validate()?;
        Ok(checkpoint)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Ranges must be exactly the binary-counter blocks of `m`.
    pub fn validate(&self) -> Result<()> {
        let expected = binary_blocks(self.m);
        if expected.len() != self.blocks.len() {
            return Err(Error::CorruptCheckpoint(format!(
                "{} blocks for m = {}, expected {}",
                self.blocks.len(),
                self.m,
                expected.len()
            )));
        }
        for (block, &(start, end)) in self.blocks.iter().zip(&expected) {
            if (block.start, block.end) != (start, end) {
                return Err(Error::CorruptCheckpoint(format!(
                    "block [{}, {}] where [{start}, {end}] was expected",
                    block.start, block.end
                )));
            }
            if block.value.a <= 0 || block.value.b < 0 {
                return Err(Error::CorruptCheckpoint(format!(
                    "block [{start}, {end}] holds a non-positive product"
                )));
            }
        }
        Ok(())
    }

    /// Extend the frontier to cover `C_1 ... C_target`.
    ///
    /// `fresh(lo, hi)` must return the exact product `C_lo ... C_hi`; it is
    /// called once per maximal new range inside each target block, in
    /// ascending order.
    pub fn extend_to<F>(self, target: u64, mut fresh: F) -> Result<Checkpoint>
    where
        F: FnMut(u64, u64) -> MatPair,
    {
        if target < self.m {
            return Err(Error::CheckpointAhead {
                have: self.m,
                want: target,
            });
        }
        let old_m = self.m;
        let mut old = self.blocks.into_iter().peekable();
        let mut blocks = Vec::new();
        for (start, end) in binary_blocks(target) {
            let mut value: Option<MatPair> = None;
            while let Some(block) = old.next_if(|b| b.start >= start && b.end <= end) {
                value = Some(match value {
                    None => block.value,
                    Some(acc) => acc.combine(&block.value),
                });
            }
            if end > old_m {
                let piece = fresh(start.max(old_m + 1), end);
                value = Some(match value {
                    None => piece,
                    Some(acc) => acc.combine(&piece),
                });
            }
            let value = value.ok_or_else(|| {
                Error::CorruptCheckpoint(format!("no data for block [{start}, {end}]"))
            })?;
            blocks.push(Block { start, end, value });
        }
        if let Some(stray) = old.next() {
            return Err(Error::CorruptCheckpoint(format!(
                "block [{}, {}] straddles the frontier of m = {target}",
                stray.start, stray.end
            )));
        }
        Ok(Checkpoint { m: target, blocks })
    }

    /// `M_m` exactly.
    pub fn product(&self) -> MatPair {
        self.blocks
            .iter()
            .fold(MatPair::identity(), |acc, block| acc.combine(&block.value))
    }

    /// `M_m mod modulus`, reducing every block before it is folded in.
    pub fn product_mod(&self, modulus: &Integer) -> Result<MatPair> {
        let mut acc = MatPair::identity().reduce(modulus)?;
        for block in &self.blocks {
            let reduced = block.value.reduced_unchecked(modulus);
            acc = acc.combine(&reduced).reduced_unchecked(modulus);
        }
        Ok(acc)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.m.to_le_bytes())?;
        let count = u32::try_from(self.blocks.len()).expect("at most 64 blocks");
        w.write_all(&count.to_le_bytes())?;
        for block in &self.blocks {
            w.write_all(&block.start.to_le_bytes())?;
            w.write_all(&block.end.to_le_bytes())?;
            write_magnitude(&mut w, &block.value.a)?;
            write_magnitude(&mut w, &block.value.b)?;
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Checkpoint> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != MAGIC {
            return Err(Error::CorruptCheckpoint("bad magic".into()));
        }
        let version = read_u32(&mut r, "version")?;
        if version != VERSION {
            return Err(Error::CorruptCheckpoint(format!(
                "unsupported version {version}"
            )));
        }
        let m = read_u64(&mut r, "m")?;
        let count = read_u32(&mut r, "block count")?;
        if count > u64::BITS {
            return Err(Error::CorruptCheckpoint(format!("{count} blocks")));
        }
        let mut blocks = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let start = read_u64(&mut r, "block start")?;
            let end = read_u64(&mut r, "block end")?;
            let a = read_magnitude(&mut r)?;
            let b = read_magnitude(&mut r)?;
            blocks.push(Block {
                start,
                end,
                value: MatPair { a, b },
            });
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::CorruptCheckpoint("trailing bytes".into()));
        }
        Checkpoint::from_blocks(m, blocks)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let file = File::create(&tmp)?;
            let mut w = BufWriter::new(file);
            self.write_to(&mut w)?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let file = File::open(path)?;
        Checkpoint::read_from(BufReader::new(file))
    }
}

fn write_magnitude<W: Write>(w: &mut W, value: &Integer) -> io::Result<()> {
    let bytes = value.to_digits::<u8>(Order::Msf);
    w.write_all(&(bytes.len() as u64).to_le_bytes())?;
    w.write_all(&bytes)
}

fn read_magnitude<R: Read>(r: &mut R) -> Result<Integer> {
    let len = read_u64(r, "magnitude length")?;
    let mut bytes = Vec::new();
    let got = r.take(len).read_to_end(&mut bytes)?;
    if got as u64 != len {
        return Err(Error::CorruptCheckpoint("truncated magnitude".into()));
    }
    Ok(Integer::from_digits(&bytes, Order::Msf))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::CorruptCheckpoint(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, what)?;
    Ok(u64::from_le_bytes(buf))
}

/// Directory of checkpoint files, one per prefix length, guarded by an
/// advisory lock for the lifetime of the value.
#[derive(Debug)]
pub struct CheckpointStore {
    dir: PathBuf,
    _lock: File,
}

impl CheckpointStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let lock = File::options()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(".lock"))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => return Err(Error::StoreLocked(dir)),
            Err(TryLockError::Error(e)) => return Err(Error::Io(e)),
        }
        Ok(CheckpointStore { dir, _lock: lock })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, m: u64) -> PathBuf {
        self.dir.join(format!("prefix-{m:020}.lfck"))
    }

    /// Prefix lengths with a checkpoint file, ascending.
    pub fn available(&self) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(m) = name
                .strip_prefix("prefix-")
                .and_then(|rest| rest.strip_suffix(".lfck"))
                .and_then(|digits| digits.parse().ok())
            {
                out.push(m);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// The stored checkpoint with the largest `m' <= m`, if any.
    ///
    /// A corrupt file is an error, not a reason to fall back to another one.
    pub fn best_for(&self, m: u64) -> Result<Option<Checkpoint>> {
        let Some(&best) = self.available()?.iter().rev().find(|&&have| have <= m) else {
            return Ok(None);
        };
        let checkpoint = Checkpoint::load(&self.path_for(best))?;
        if checkpoint.m() != best {
            return Err(Error::CorruptCheckpoint(format!(
                "file for m = {best} holds m = {}",
                checkpoint.m()
            )));
        }
        Ok(Some(checkpoint))
    }

    pub fn save(&self, checkpoint: &Checkpoint) -> Result<PathBuf> {
        let path = self.path_for(checkpoint.m());
        checkpoint.save(&path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_block_layout() {
        assert_eq!(binary_blocks(0), vec![]);
        assert_eq!(binary_blocks(6), vec![(1, 4), (5, 6)]);
        assert_eq!(binary_blocks(7), vec![(1, 4), (5, 6), (7, 7)]);
        assert_eq!(binary_blocks(8), vec![(1, 8)]);
    }

    #[test]
    fn prefix_products() {
        let cp = Checkpoint::for_prefix(6);
        let ranges: Vec<_> = cp.blocks().iter().map(|b| (b.start, b.end)).collect();
        assert_eq!(ranges, vec![(1, 4), (5, 6)]);
        assert_eq!(cp.product(), MatPair::new(720, 154));
        assert_eq!(Checkpoint::empty().product(), MatPair::identity());
    }

    #[test]
    fn extension_reuses_and_merges() {
        for from in 0..40u64 {
            for to in from..70 {
                let mut calls = Vec::new();
                let cp = Checkpoint::for_prefix(from)
                    .extend_to(to, |lo, hi| {
                        calls.push((lo, hi));
                        mat_product_range(lo, hi)
                    })
                    .unwrap();
                assert_eq!(cp, Checkpoint::for_prefix(to), "{from} -> {to}");
                let fresh: u64 = calls.iter().map(|(lo, hi)| hi - lo + 1).sum();
                assert_eq!(fresh, to - from, "only new factors are multiplied");
            }
        }
    }

    #[test]
    fn extension_backwards_is_rejected() {
        let err = Checkpoint::for_prefix(9).extend_to(8, mat_product_range);
        assert!(matches!(
            err,
            Err(Error::CheckpointAhead { have: 9, want: 8 })
        ));
    }

    #[test]
    fn product_mod_matches_reduced_product() {
        let cp = Checkpoint::for_prefix(8);
        assert_eq!(
            cp.product_mod(&Integer::from(77)).unwrap(),
            MatPair::new(40320 % 77, 5914 % 77)
        );
    }

    #[test]
    fn bytes_round_trip() {
        for m in [0u64, 1, 6, 37, 1000] {
            let cp = Checkpoint::for_prefix(m);
            let bytes = cp.to_bytes();
            let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
            assert_eq!(back, cp);
            assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn layout_is_fixed() {
        let bytes = Checkpoint::for_prefix(1).to_bytes();
        let mut want = Vec::new();
        want.extend_from_slice(b"LFCK");
        want.extend_from_slice(&1u32.to_le_bytes());
        want.extend_from_slice(&1u64.to_le_bytes());
        want.extend_from_slice(&1u32.to_le_bytes());
        want.extend_from_slice(&1u64.to_le_bytes());
        want.extend_from_slice(&1u64.to_le_bytes());
        want.extend_from_slice(&1u64.to_le_bytes());
        want.push(1);
        want.extend_from_slice(&1u64.to_le_bytes());
        want.push(1);
        assert_eq!(bytes, want);
    }

    #[test]
    fn corrupt_inputs_fail_loudly() {
        let good = Checkpoint::for_prefix(6).to_bytes();
        for cut in [0, 3, 10, 20, 30, good.len() - 1] {
            assert!(matches!(
                Checkpoint::read_from(&good[..cut]),
                Err(Error::CorruptCheckpoint(_))
            ));
        }
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(Checkpoint::read_from(bad_magic.as_slice()).is_err());
        let mut bad_version = good.clone();
        bad_version[4] = 2;
        assert!(Checkpoint::read_from(bad_version.as_slice()).is_err());
        let mut trailing = good.clone();
        trailing.push(0);
        assert!(Checkpoint::read_from(trailing.as_slice()).is_err());
        // m = 7 with the blocks of m = 6: structure no longer matches
        let mut wrong_m = good;
        wrong_m[8] = 7;
        assert!(matches!(
            Checkpoint::read_from(wrong_m.as_slice()),
            Err(Error::CorruptCheckpoint(_))
        ));
    }

    #[test]
    fn non_contiguous_blocks_rejected() {
        let blocks = vec![
            Block {
                start: 1,
                end: 4,
                value: mat_product_range(1, 4),
            },
            Block {
                start: 6,
                end: 7,
                value: mat_product_range(6, 7),
            },
        ];
        assert!(Checkpoint::from_blocks(6, blocks).is_err());
    }

    #[test]
    fn store_picks_best_and_locks() {
        let dir = tempfile::tempdir().unwrap();
        let store = CheckpointStore::open(dir.path()).unwrap();
        assert!(store.best_for(100).unwrap().is_none());
        store.save(&Checkpoint::for_prefix(10)).unwrap();
        store.save(&Checkpoint::for_prefix(50)).unwrap();
        assert_eq!(store.available().unwrap(), vec![10, 50]);
        assert_eq!(store.best_for(49).unwrap().unwrap().m(), 10);
        assert_eq!(store.best_for(50).unwrap().unwrap().m(), 50);
        assert!(store.best_for(9).unwrap().is_none());
        assert!(matches!(
            CheckpointStore::open(dir.path()),
            Err(Error::StoreLocked(_))
        ));
        drop(store);
        let reopened = CheckpointStore::open(dir.path()).unwrap();
        std::fs::write(reopened.path_for(60), b"LFCK").unwrap();
        assert!(reopened.best_for(70).is_err());
    }
}
