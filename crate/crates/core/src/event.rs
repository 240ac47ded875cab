//! Events: sets of joint states.

use std::collections::BTreeSet;

use crate::space::{PartialAssignment, StateSpace};

/// A set of joint states of a network.
///
/// Cylinder events keep their defining partial assignment and are enumerated
/// lazily; boolean combinations are materialized as sorted state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Cylinder(PartialAssignment),
    States(Vec<usize>),
}

impl Event {
    /// The tautological event.
    pub fn all() -> Self {
        Event::Cylinder(PartialAssignment::new())
    }

    pub fn cylinder(partial: PartialAssignment) -> Self {
        Event::Cylinder(partial)
    }

    pub fn from_states(states: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = states.into_iter().collect();
        Event::States(set.into_iter().collect())
    }

    pub fn as_cylinder(&self) -> Option<&PartialAssignment> {
        match self {
            Event::Cylinder(p) => Some(p),
            Event::States(_) => None,
        }
    }

    pub fn contains(&self, space: &StateSpace, index: usize) -> bool {
        match self {
            Event::Cylinder(p) => p.matches(space, index),
            Event::States(s) => s.binary_search(&index).is_ok(),
        }
    }

    /// Member states in increasing index order.
    pub fn states(&self, space: &StateSpace) -> Vec<usize> {
        match self {
            Event::Cylinder(p) => space.cylinder(p).collect(),
            Event::States(s) => s.clone(),
        }
    }

    pub fn is_empty(&self, space: &StateSpace) -> bool {
        match self {
            Event::Cylinder(p) => p
                .iter()
                .any(|(v, x)| v.0 >= space.num_vars() || x >= space.card(v)),
            Event::States(s) => s.is_empty(),
        }
    }

    pub fn intersection(&self, other: &Event, space: &StateSpace) -> Event {
        match (self, other) {
            (Event::Cylinder(a), Event::Cylinder(b)) => match a.merge(b) {
                Some(m) => Event::Cylinder(m),
                None => Event::States(Vec::new()),
            },
            (Event::States(s), e) | (e, Event::States(s)) => Event::States(
                s.iter()
                    .copied()
                    .filter(|&i| e.contains(space, i))
                    .collect(),
            ),
        }
    }

    pub fn union(&self, other: &Event, space: &StateSpace) -> Event {
        let mut set: BTreeSet<usize> = self.states(space).into_iter().collect();
        set.extend(other.states(space));
        Event::States(set.into_iter().collect())
    }

    pub fn complement(&self, space: &StateSpace) -> Event {
        Event::States(
            (0..space.len())
                .filter(|&i| !self.contains(space, i))
                .collect(),
        )
    }
}

impl From<PartialAssignment> for Event {
    fn from(p: PartialAssignment) -> Self {
        Event::Cylinder(p)
    }
}
