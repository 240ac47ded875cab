//! Dense, strictly positive functions over a joint state space.

use crate::error::{EunError, Result};
use crate::space::{StateSpace, VarId};

/// A strictly positive table indexed by joint state (a probability or a
/// utility function, possibly unnormalized).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    space: StateSpace,
    values: Vec<f64>,
}

impl JointTable {
    pub fn new(space: StateSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(EunError::TableSize {
                expected: space.len(),
                found: values.len(),
            });
        }
        if let Some((state, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(EunError::NonPositiveTable { state, value });
        }
        Ok(JointTable { space, values })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn at(&self, assignment: &[usize]) -> f64 {
        self.values[self.space.index_of(assignment)]
    }

    /// `T(x) / T(x with `vars` at reference)`, the ceteris-paribus ratio.
    pub fn ratio(&self, index: usize, vars: &[VarId]) -> f64 {
        self.values[index] / self.values[self.space.with_reference(index, vars)]
    }

    pub fn sum(&self) -> f64 {
        neumaier_sum(self.values.iter().copied())
    }
}

/// Compensated summation; deterministic for a fixed input order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `|a - b| <= tol * max(|a|, |b|)`.
pub fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_entries() {
        let err = JointTable::new(StateSpace::binary(1), vec![1.0, 0.0]).unwrap_err();
        assert!(matches!(err, EunError::NonPositiveTable { state: 1, .. }));
        assert!(JointTable::new(StateSpace::binary(1), vec![1.0, f64::NAN]).is_err());
        assert!(JointTable::new(StateSpace::binary(1), vec![1.0]).is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(xs), 2.0);
    }

    #[test]
    fn ratio_moves_to_reference() {
        // u table of the second health/wealth scenario, H most significant.
        let t = JointTable::new(StateSpace::binary(2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.ratio(3, &[VarId(0)]), 2.0);
        assert_eq!(t.ratio(2, &[VarId(0)]), 3.0);
    }
}
