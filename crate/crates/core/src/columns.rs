/// A set of raw model column indices, stored as a dense membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnSet {
    mask: Vec<bool>,
}

impl ColumnSet {
    pub fn empty(n_columns: usize) -> Self {
        Self {
            mask: vec![false; n_columns],
        }
    }

    pub fn full(n_columns: usize) -> Self {
        Self {
            mask: vec![true; n_columns],
        }
    }

    /// Panics if an index is out of range.
    pub fn from_indices(n_columns: usize, indices: &[usize]) -> Self {
        let mut set = Self::empty(n_columns);
        for &i in indices {
            set.insert(i);
        }
        set
    }

    pub fn n_columns(&self) -> usize {
        self.mask.len()
    }

    #[inline]
    pub fn contains(&self, column: usize) -> bool {
        self.mask.get(column).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, column: usize) {
        self.mask[column] = true;
    }

    pub fn remove(&mut self, column: usize) {
        self.mask[column] = false;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| if b { Some(i) } else { None })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &ColumnSet) -> bool {
        self.iter().all(|c| other.contains(c))
    }

    pub fn union(&self, other: &ColumnSet) -> ColumnSet {
        let n = self.mask.len().max(other.mask.len());
        let mask = (0..n).map(|i| self.contains(i) || other.contains(i)).collect();
        ColumnSet { mask }
    }
}
