//! Variable identifiers, joint state spaces and (partial) assignments.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{EunError, Result};

/// Default bound on the number of joint states any enumeration may visit.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Position of a variable in its network's declaration list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Mixed-radix indexing of the joint state space.
///
/// States are numbered lexicographically by variable index: variable 0 is the
/// most significant digit, the last variable varies fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    cards: Vec<usize>,
    reference: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl StateSpace {
    /// Builds the space, failing if it holds more than `cap` states.
    pub fn new(cards: Vec<usize>, reference: Vec<usize>, cap: usize) -> Result<Self> {
        assert_eq!(cards.len(), reference.len());
        let states = cards.iter().map(|&c| c as u128).product::<u128>();
        if states > cap as u128 {
            return Err(EunError::StateCapExceeded { states, cap });
        }
        let mut strides = vec![1; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cards[i + 1];
        }
        Ok(StateSpace {
            size: states as usize,
            cards,
            reference,
            strides,
        })
    }

    /// A space over `n` binary variables with reference value 0.
    pub fn binary(n: usize) -> Self {
        StateSpace::new(vec![2; n], vec![0; n], usize::MAX).expect("binary space fits")
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn num_vars(&self) -> usize {
        self.cards.len()
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn card(&self, var: VarId) -> usize {
        self.cards[var.0]
    }

    pub fn reference(&self) -> &[usize] {
        &self.reference
    }

    pub fn stride(&self, var: VarId) -> usize {
        self.strides[var.0]
    }

    pub fn index_of(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    pub fn reference_index(&self) -> usize {
        self.index_of(&self.reference)
    }

    pub fn digit(&self, index: usize, var: VarId) -> usize {
        (index / self.strides[var.0]) % self.cards[var.0]
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.cards.len())
            .map(|i| self.digit(index, VarId(i)))
            .collect()
    }

    /// Index of the state equal to `index` except that `var` takes `value`.
    pub fn with_value(&self, index: usize, var: VarId, value: usize) -> usize {
        let s = self.strides[var.0];
        index - self.digit(index, var) * s + value * s
    }

    /// Index of the state equal to `index` with every variable in `vars` moved
    /// to its reference value.
    pub fn with_reference(&self, index: usize, vars: &[VarId]) -> usize {
        vars.iter().fold(index, |idx, &v| {
            self.with_value(idx, v, self.reference[v.0])
        })
    }

    /// All states agreeing with `partial`, in increasing index order.
    pub fn cylinder(&self, partial: &PartialAssignment) -> impl Iterator<Item = usize> + '_ {
        let fixed: usize = partial.iter().map(|(v, x)| x * self.strides[v.0]).sum();
        let free: Vec<VarId> = (0..self.cards.len())
            .map(VarId)
            .filter(|v| partial.get(*v).is_none())
            .collect();
        let count: usize = free.iter().map(|v| self.cards[v.0]).product();
        (0..count).map(move |mut k| {
            let mut idx = fixed;
            for v in free.iter().rev() {
                let c = self.cards[v.0];
                idx += (k % c) * self.strides[v.0];
                k /= c;
            }
            idx
        })
    }
}

/// One value index per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn value(&self, var: VarId) -> usize {
        self.0[var.0]
    }
}

/// Values for a subset of the variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment(BTreeMap<VarId, usize>);

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: VarId, value: usize) -> Self {
        self.0.insert(var, value);
        self
    }

    pub fn set(&mut self, var: VarId, value: usize) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(v, x)| (*v, *x))
    }

    /// Union of two partial assignments, or `None` if they disagree somewhere.
    pub fn merge(&self, other: &PartialAssignment) -> Option<PartialAssignment> {
        let mut out = self.clone();
        for (v, x) in other.iter() {
            match out.get(v) {
                Some(y) if y != x => return None,
                _ => out.set(v, x),
            }
        }
        Some(out)
    }

    pub fn matches(&self, space: &StateSpace, index: usize) -> bool {
        self.iter().all(|(v, x)| space.digit(index, v) == x)
    }
}

impl FromIterator<(VarId, usize)> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        PartialAssignment(iter.into_iter().collect())
    }
}

/// Enumerates every full assignment of `vars` (given their cardinalities) in
/// lexicographic order, first variable most significant.
pub fn assignments_over(vars: &[VarId], cards: &[usize]) -> Vec<PartialAssignment> {
    let total: usize = vars.iter().map(|v| cards[v.0]).product();
    (0..total)
        .map(|mut k| {
            let mut out = PartialAssignment::new();
            for &v in vars.iter().rev() {
                let c = cards[v.0];
                out.set(v, k % c);
                k /= c;
            }
            out
        })
        .collect()
}
