use super::Dataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition {
    /// `lower < x <= upper`.
    Interval {
        lower: f64,
        upper: f64,
    },
    Equals(f64),
}

impl Condition {
    #[inline]
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Condition::Interval { lower, upper } => lower < v && v <= upper,
            Condition::Equals(e) => v == e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub column: usize,
    pub condition: Condition,
}

impl Constraint {
    pub fn interval(column: usize, lower: f64, upper: f64) -> Self {
        Self {
            column,
            condition: Condition::Interval { lower, upper },
        }
    }

    pub fn equals(column: usize, value: f64) -> Self {
        Self {
            column,
            condition: Condition::Equals(value),
        }
    }
}

/// Number of rows satisfying every constraint. Scans column by column,
/// narrowing a row mask.
pub fn count_region(ds: &Dataset, constraints: &[Constraint]) -> usize {
    if constraints.is_empty() {
        return ds.n_rows();
    }
    let mut alive: Vec<usize> = (0..ds.n_rows()).collect();
    for c in constraints {
        let col = ds.column(c.column);
        alive.retain(|&r| c.condition.holds(col[r]));
        if alive.is_empty() {
            break;
        }
    }
    alive.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_impossible_constraints() {
        let ds = Dataset::continuous(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(count_region(&ds, &[]), 3);
        assert_eq!(count_region(&ds, &[Constraint::interval(0, 10.0, 20.0)]), 0);
        assert_eq!(count_region(&ds, &[Constraint::interval(0, 1.0, 5.0)]), 2);
        assert_eq!(
            count_region(&ds, &[Constraint::interval(0, 1.0, 5.0), Constraint::equals(1, 4.0)]),
            1
        );
    }
}
