/// Per-level sparse node storage keyed by `j`, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseLevels<T> {
    levels: Vec<Vec<(u64, T)>>,
}

impl<T> SparseLevels<T> {
    pub(crate) fn from_levels(levels: Vec<Vec<(u64, T)>>) -> Self {
        debug_assert!(levels
            .iter()
            .all(|level| level.windows(2).all(|w| w[0].0 < w[1].0)));
        SparseLevels { levels }
    }

    pub fn get(&self, i: u32, j: u64) -> Option<&T> {
        let level = self.levels.get(i as usize)?;
        level
            .binary_search_by_key(&j, |(k, _)| *k)
            .ok()
            .map(|at| &level[at].1)
    }

    pub fn level(&self, i: u32) -> &[(u64, T)] {
        self.levels.get(i as usize).map_or(&[], Vec::as_slice)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Every stored node as `(i, j, value)`, top level first.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64, &T)> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(i, level)| level.iter().map(move |(j, v)| (i as u32, *j, v)))
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        let t = SparseLevels::from_levels(vec![vec![(0, 'a')], vec![(1, 'b')]]);
        assert_eq!(t.get(0, 0), Some(&'a'));
        assert_eq!(t.get(1, 0), None);
        assert_eq!(t.get(1, 1), Some(&'b'));
        assert_eq!(t.get(5, 0), None);
        assert_eq!(t.len(), 2);
        assert_eq!(
            t.iter().map(|(i, j, _)| (i, j)).collect::<Vec<_>>(),
            [(0, 0), (1, 1)]
        );
    }
}
