//! Strategic inference: choosing values of controllable variables to maximize
//! conditional expected utility, and splitting that choice into independent
//! blocks where the graph allows it.

pub mod auction;

use crate::error::{EunError, Result};
use crate::event::Event;
use crate::independence::separates;
use crate::inference::{conditional_event_utility, GivenEvidence};
use crate::model::{Layer, Network, DEFAULT_TOLERANCE};
use crate::space::{assignments_over, PartialAssignment, VarId};

/// Controllable variables `D` and the evidence event `F` they are chosen under.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    decisions: Vec<VarId>,
    evidence: Event,
}

impl DecisionProblem {
    pub fn new(net: &Network, mut decisions: Vec<VarId>, evidence: Event) -> Result<Self> {
        if decisions.is_empty() {
            return Err(EunError::EmptySet("D"));
        }
        decisions.sort();
        decisions.dedup();
        if let Some(v) = decisions.iter().find(|v| v.0 >= net.num_vars()) {
            return Err(EunError::UnknownVariable(v.to_string()));
        }
        match &evidence {
            Event::Cylinder(p) => {
                if let Some(v) = decisions.iter().find(|v| p.get(**v).is_some()) {
                    return Err(EunError::OverlappingSets(net.var(*v).name().to_string()));
                }
            }
            Event::States(s) if s.is_empty() => return Err(EunError::EmptyEvent("evidence")),
            Event::States(_) => {}
        }
        Ok(DecisionProblem {
            decisions,
            evidence,
        })
    }

    pub fn decisions(&self) -> &[VarId] {
        &self.decisions
    }

    pub fn evidence(&self) -> &Event {
        &self.evidence
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionOutcome {
    /// Maximizing assignments, in lexicographic variable-index order.
    pub argmax: Vec<PartialAssignment>,
    /// `max_d u(d | F)`.
    pub utility: f64,
    /// Every evaluated assignment with its conditional expected utility.
    pub evaluated: Vec<(PartialAssignment, f64)>,
}

/// All assignments of the decision variables maximizing `u(d | F)`, ties
/// resolved at relative `DEFAULT_TOLERANCE`.
pub fn optimal_decision(net: &Network, problem: &DecisionProblem) -> Result<DecisionOutcome> {
    let count = problem
        .decisions
        .iter()
        .map(|v| net.cards()[v.0] as u128)
        .product::<u128>();
    if count > net.state_cap() as u128 {
        return Err(EunError::StateCapExceeded {
            states: count,
            cap: net.state_cap(),
        });
    }
    let given = GivenEvidence::new(net, &problem.evidence)?;
    let mut evaluated = Vec::new();
    for d in assignments_over(&problem.decisions, net.cards()) {
        match given.utility(&Event::Cylinder(d.clone())) {
            Ok(u) => evaluated.push((d, u)),
            // d incompatible with non-cylinder evidence
            Err(EunError::EmptyEvent("E ∩ F")) => {}
            Err(e) => return Err(e),
        }
    }
    let utility = evaluated
        .iter()
        .map(|(_, u)| *u)
        .fold(f64::NEG_INFINITY, f64::max);
    if evaluated.is_empty() {
        return Err(EunError::EmptyEvent("evidence admits no decision"));
    }
    let argmax = evaluated
        .iter()
        .filter(|(_, u)| utility - u <= DEFAULT_TOLERANCE * utility.abs())
        .map(|(d, _)| d.clone())
        .collect();
    Ok(DecisionOutcome {
        argmax,
        utility,
        evaluated,
    })
}

/// Splits the decision variables into blocks such that any two blocks are
/// separated by `conditioning` together with the other decision variables,
/// in the graph carrying the arcs of both layers. Separation in the combined
/// graph, not merely in each layer on its own, is what lets one partition of
/// the remaining variables witness independence in both layers at once: a
/// path `d1 –p– r –u– d2` is cut in each layer yet couples the two choices.
/// Blocks are the connected components of the "not separated" relation, so
/// the partition is as fine as the graph allows.
pub fn decompose_decisions(
    net: &Network,
    problem: &DecisionProblem,
    conditioning: &[VarId],
) -> Result<Vec<Vec<VarId>>> {
    let d = &problem.decisions;
    for c in conditioning {
        if c.0 >= net.num_vars() {
            return Err(EunError::UnknownVariable(c.to_string()));
        }
        if d.contains(c) {
            return Err(EunError::OverlappingSets(net.var(*c).name().to_string()));
        }
    }
    let mut combined = net.graph().clone();
    for (a, b) in net.graph().arcs(Layer::Utility) {
        combined.add_arc(Layer::Probability, a, b)?;
    }
    let mut parent: Vec<usize> = (0..d.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let blocked: Vec<VarId> = conditioning
                .iter()
                .copied()
                .chain(d.iter().copied().filter(|v| *v != d[i] && *v != d[j]))
                .collect();
            if !separates(&combined, Layer::Probability, &[d[i]], &[d[j]], &blocked)? {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks: Vec<Vec<VarId>> = Vec::new();
    let mut root_of_block: Vec<usize> = Vec::new();
    for (i, &di) in d.iter().enumerate() {
        let r = find(&mut parent, i);
        match root_of_block.iter().position(|&x| x == r) {
            Some(k) => blocks[k].push(di),
            None => {
                root_of_block.push(r);
                blocks.push(vec![di]);
            }
        }
    }
    Ok(blocks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedSolution {
    /// Concatenation of the first maximizer of every block.
    pub assignment: PartialAssignment,
    /// `u(assignment | F)` evaluated on the whole network.
    pub utility: f64,
    pub blocks: Vec<DecisionOutcome>,
}

/// Optimizes each block separately under the same evidence and joins the
/// results. The evidence must be a cylinder fixing exactly `conditioning`,
/// which is what makes blockwise optima jointly optimal.
pub fn solve_decomposed(
    net: &Network,
    problem: &DecisionProblem,
    conditioning: &[VarId],
    blocks: &[Vec<VarId>],
) -> Result<DecomposedSolution> {
    let fixed: Vec<VarId> = match &problem.evidence {
        Event::Cylinder(p) => p.vars().collect(),
        Event::States(_) => {
            return Err(EunError::InvalidArgument(
                "blockwise optimization needs cylinder evidence".into(),
            ))
        }
    };
    let mut cond = conditioning.to_vec();
    cond.sort();
    if fixed != cond {
        return Err(EunError::InvalidArgument(
            "evidence must fix exactly the conditioning variables".into(),
        ));
    }
    let mut assignment = PartialAssignment::new();
    let mut outcomes = Vec::new();
    for block in blocks {
        let sub = DecisionProblem::new(net, block.clone(), problem.evidence.clone())?;
        let outcome = optimal_decision(net, &sub)?;
        assignment = assignment
            .merge(&outcome.argmax[0])
            .ok_or_else(|| EunError::InvalidArgument("blocks overlap".into()))?;
        outcomes.push(outcome);
    }
    let utility =
        conditional_event_utility(net, &Event::Cylinder(assignment.clone()), &problem.evidence)?;
    Ok(DecomposedSolution {
        assignment,
        utility,
        blocks: outcomes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relevance {
    /// No utility potential touching the set differs from 1.
    PayoffIrrelevant,
    /// Payoff-irrelevant and p-independent of all payoff-relevant variables
    /// given the conditioning set.
    StrategicallyIrrelevant,
    Relevant,
}

fn payoff_irrelevant(net: &Network, v: VarId) -> bool {
    net.potentials(Layer::Utility)
        .iter()
        .filter(|p| p.var() == v || p.conditioning().contains(&v))
        .all(|p| p.is_identity())
}

pub fn classify_relevance(net: &Network, b: &[VarId], conditioning: &[VarId]) -> Result<Relevance> {
    if b.is_empty() {
        return Err(EunError::EmptySet("B"));
    }
    for v in b.iter().chain(conditioning) {
        if v.0 >= net.num_vars() {
            return Err(EunError::UnknownVariable(v.to_string()));
        }
    }
    if let Some(v) = b.iter().find(|v| conditioning.contains(v)) {
        return Err(EunError::OverlappingSets(net.var(*v).name().to_string()));
    }
    if !b.iter().all(|&v| payoff_irrelevant(net, v)) {
        return Ok(Relevance::Relevant);
    }
    let relevant: Vec<VarId> = net
        .structure()
        .var_ids()
        .filter(|v| !b.contains(v) && !conditioning.contains(v) && !payoff_irrelevant(net, *v))
        .collect();
    if relevant.is_empty()
        || separates(net.graph(), Layer::Probability, b, &relevant, conditioning)?
    {
        Ok(Relevance::StrategicallyIrrelevant)
    } else {
        Ok(Relevance::PayoffIrrelevant)
    }
}
