//! Event-level probability, expected utility and value.
//!
//! Utilities are kept relative to `u(x⁰)`. For an event `E` the engine sums
//! two quantities over its states: the probability mass `Σ p(x)/p(x⁰)` and the
//! value mass `Σ p(x)/p(x⁰) · u(x)/u(x⁰)`. Every measure below is a ratio of
//! those sums, so the unknown `p(x⁰)` never has to be materialized.

use crate::error::{EunError, Result};
use crate::event::Event;
use crate::factor::cylinder_sum;
use crate::independence::separates;
use crate::model::{Layer, Network, Totals};
use crate::space::{assignments_over, PartialAssignment, VarId};
use crate::table::{neumaier_sum, rel_eq};

/// Probability, expected utility and value of one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureTriple {
    pub p: f64,
    /// `u(E) / u(x⁰)`
    pub u_rel: f64,
    /// `u(E)` under the normalization `u(True) = 1`
    pub u_norm: f64,
    /// `v(E) = u_norm(E) · p(E)`
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Standing {
    Good,
    Neutral,
    Bad,
}

impl MeasureTriple {
    pub fn standing(&self) -> Standing {
        if self.u_norm > 1.0 {
            Standing::Good
        } else if self.u_norm < 1.0 {
            Standing::Bad
        } else {
            Standing::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Sums {
    mass: f64,
    value: f64,
}

fn check_partial(net: &Network, partial: &PartialAssignment) -> Result<()> {
    for (v, x) in partial.iter() {
        if v.0 >= net.num_vars() {
            return Err(EunError::UnknownVariable(v.to_string()));
        }
        if x >= net.cards()[v.0] {
            return Err(EunError::UnknownValue {
                var: net.var(v).name().to_string(),
                value: x.to_string(),
            });
        }
    }
    Ok(())
}

fn sums(net: &Network, event: &Event, what: &'static str) -> Result<Sums> {
    match event {
        Event::Cylinder(partial) => {
            check_partial(net, partial)?;
            Ok(Sums {
                mass: cylinder_sum(net, &[Layer::Probability], partial)?,
                value: cylinder_sum(net, &Layer::BOTH, partial)?,
            })
        }
        Event::States(states) => {
            if states.is_empty() {
                return Err(EunError::EmptyEvent(what));
            }
            let space = net.space()?;
            let mut state = vec![0; net.num_vars()];
            let (mass, value): (Vec<f64>, Vec<f64>) = states
                .iter()
                .map(|&idx| {
                    for (i, slot) in state.iter_mut().enumerate() {
                        *slot = space.digit(idx, VarId(i));
                    }
                    let lp = net.log_ratio_unchecked(Layer::Probability, &state);
                    let lu = net.log_ratio_unchecked(Layer::Utility, &state);
                    (lp.exp(), (lp + lu).exp())
                })
                .unzip();
            Ok(Sums {
                mass: neumaier_sum(mass),
                value: neumaier_sum(value),
            })
        }
    }
}

fn totals(net: &Network) -> Result<Totals> {
    if let Some(t) = net.totals.get() {
        return Ok(*t);
    }
    let s = sums(net, &Event::all(), "True")?;
    let t = Totals {
        mass: s.mass,
        value: s.value,
    };
    // Concurrent initializers compute identical values; first one wins.
    Ok(*net.totals.get_or_init(|| t))
}

/// `E ∩ F`, without materializing when both are cylinders.
pub fn intersect(net: &Network, e: &Event, f: &Event) -> Result<Event> {
    match (e, f) {
        (Event::Cylinder(a), Event::Cylinder(b)) => Ok(match a.merge(b) {
            Some(m) => Event::Cylinder(m),
            None => Event::States(Vec::new()),
        }),
        _ => Ok(e.intersection(f, &net.space()?)),
    }
}

fn nonempty_intersection(net: &Network, e: &Event, f: &Event, what: &'static str) -> Result<Event> {
    let ef = intersect(net, e, f)?;
    if matches!(&ef, Event::States(s) if s.is_empty()) {
        return Err(EunError::EmptyEvent(what));
    }
    Ok(ef)
}

/// `p(x_M) / p(x⁰)`: the probability ratio summed over all completions.
pub fn marginal_p_ratio(net: &Network, partial: &PartialAssignment) -> Result<f64> {
    check_partial(net, partial)?;
    cylinder_sum(net, &[Layer::Probability], partial)
}

/// `u(x_M) / u(x⁰) = Σ_{x_{N-M}} u(x)/u(x⁰) · p(x_{N-M} | x_M)`.
pub fn marginal_u_ratio(net: &Network, partial: &PartialAssignment) -> Result<f64> {
    let s = sums(net, &Event::Cylinder(partial.clone()), "cylinder")?;
    Ok(s.value / s.mass)
}

/// `p(E)`.
pub fn probability(net: &Network, e: &Event) -> Result<f64> {
    let s = sums(net, e, "E")?;
    Ok(s.mass / totals(net)?.mass)
}

/// `p(E | F) = p(E ∩ F) / p(F)`.
///
/// A disjoint `E` and `F` yields 0 only when `allow_disjoint` is set.
pub fn conditional_probability(
    net: &Network,
    e: &Event,
    f: &Event,
    allow_disjoint: bool,
) -> Result<f64> {
    let fs = sums(net, f, "F")?;
    let ef = intersect(net, e, f)?;
    if matches!(&ef, Event::States(s) if s.is_empty()) {
        return if allow_disjoint {
            Ok(0.0)
        } else {
            Err(EunError::EmptyEvent("E ∩ F"))
        };
    }
    Ok(sums(net, &ef, "E ∩ F")?.mass / fs.mass)
}

/// Probability, relative and normalized expected utility, and value of `E`.
pub fn event_utility(net: &Network, e: &Event) -> Result<MeasureTriple> {
    let s = sums(net, e, "E")?;
    let t = totals(net)?;
    let u_rel = s.value / s.mass;
    let u_true = t.value / t.mass;
    let p = s.mass / t.mass;
    let u_norm = u_rel / u_true;
    Ok(MeasureTriple {
        p,
        u_rel,
        u_norm,
        v: s.value / t.value,
    })
}

/// Conditional expected utilities `u(· | F)` for a fixed `F`, sharing the
/// sums over `F` across queries.
pub(crate) struct GivenEvidence<'a> {
    net: &'a Network,
    f: &'a Event,
    u_f: f64,
}

impl<'a> GivenEvidence<'a> {
    pub(crate) fn new(net: &'a Network, f: &'a Event) -> Result<Self> {
        let fs = sums(net, f, "F")?;
        Ok(GivenEvidence {
            net,
            f,
            u_f: fs.value / fs.mass,
        })
    }

    pub(crate) fn utility(&self, e: &Event) -> Result<f64> {
        let ef = nonempty_intersection(self.net, e, self.f, "E ∩ F")?;
        let s = sums(self.net, &ef, "E ∩ F")?;
        Ok(s.value / s.mass / self.u_f)
    }
}

/// `u(E | F) = u(E ∩ F) / u(F)`.
pub fn conditional_event_utility(net: &Network, e: &Event, f: &Event) -> Result<f64> {
    GivenEvidence::new(net, f)?.utility(e)
}

/// `u(E ∩ F | G)`, `u(E | G)` and `u(F | G)`, sharing the sums over `G`.
pub(crate) fn eu_product_terms(
    net: &Network,
    e: &Event,
    f: &Event,
    g: &Event,
) -> Result<(f64, f64, f64)> {
    let given = GivenEvidence::new(net, g)?;
    let ef = intersect(net, e, f)?;
    Ok((given.utility(&ef)?, given.utility(e)?, given.utility(f)?))
}

/// `v(E)`, or `v(E | F) = v(E ∩ F) / v(F)` when `f` is given.
pub fn value(net: &Network, e: &Event, f: Option<&Event>) -> Result<f64> {
    match f {
        None => Ok(sums(net, e, "E")?.value / totals(net)?.value),
        Some(f) => {
            let fs = sums(net, f, "F")?;
            let ef = nonempty_intersection(net, e, f, "E ∩ F")?;
            Ok(sums(net, &ef, "E ∩ F")?.value / fs.value)
        }
    }
}

/// `u(F | E)` through the utility analogue of Bayes' rule,
///
/// `u(E|F)u(F) / [u(E|F)u(F)p(F|E) + u(E|¬F)u(¬F)p(¬F|E)]`,
///
/// cross-checked against the direct conditional at `DEFAULT_TOLERANCE`.
pub fn utility_bayes(net: &Network, f: &Event, e: &Event) -> Result<f64> {
    let space = net.space()?;
    let not_f = f.complement(&space);
    if not_f.is_empty(&space) {
        return Err(EunError::EmptyEvent("¬F"));
    }
    let u_f = event_utility(net, f)?.u_norm;
    let u_not_f = event_utility(net, &not_f)?.u_norm;
    let u_e_f = conditional_event_utility(net, e, f)?;
    let u_e_not_f = conditional_event_utility(net, e, &not_f)?;
    let p_f_e = conditional_probability(net, f, e, false)?;
    let p_not_f_e = conditional_probability(net, &not_f, e, false)?;
    let numer = u_e_f * u_f;
    let formula = numer / (numer * p_f_e + u_e_not_f * u_not_f * p_not_f_e);
    let direct = conditional_event_utility(net, f, e)?;
    if !rel_eq(formula, direct, crate::model::DEFAULT_TOLERANCE) {
        return Err(EunError::IdentityMismatch {
            what: "modified Bayes rule for utilities",
            lhs: formula,
            rhs: direct,
        });
    }
    Ok(formula)
}

/// Conditional expected utility `u(b | a)` from local ratios only.
///
/// `A` and `B` are the variables fixed by `a` and `b` (both full assignments
/// over their sets). When `A` separates `B` from every remaining variable in
/// both layers,
///
/// `u(b|a) = w(b|a) / Σ_b' w(b'|a) p(b'|a)`, `p(b|a) = q(b|a) / Σ_b' q(b'|a)`,
///
/// where `q` and `w` are ceteris-paribus ratios of `b` against the reference
/// values of `B` given `a`. Only potentials of `A ∪ B` are evaluated, with
/// all other variables held at reference.
pub fn local_conditional_eu(
    net: &Network,
    b: &PartialAssignment,
    a: &PartialAssignment,
) -> Result<f64> {
    check_partial(net, b)?;
    check_partial(net, a)?;
    if b.is_empty() {
        return Err(EunError::EmptySet("B"));
    }
    if let Some(v) = b.vars().find(|v| a.get(*v).is_some()) {
        return Err(EunError::OverlappingSets(net.var(v).name().to_string()));
    }
    if !net.imap_status().is_markov() {
        return Err(EunError::SeparationRequired(
            "network is not verified Markov with respect to its graph".into(),
        ));
    }
    let b_vars: Vec<VarId> = b.vars().collect();
    let a_vars: Vec<VarId> = a.vars().collect();
    let rest: Vec<VarId> = net
        .structure()
        .var_ids()
        .filter(|v| a.get(*v).is_none() && b.get(*v).is_none())
        .collect();
    if !rest.is_empty() {
        for layer in Layer::BOTH {
            if !separates(net.graph(), layer, &b_vars, &rest, &a_vars)? {
                return Err(EunError::SeparationRequired(format!(
                    "conditioning set does not separate B from the remaining variables in the {layer} layer"
                )));
            }
        }
    }
    let local: Vec<VarId> = {
        let mut v: Vec<VarId> = a_vars.iter().chain(&b_vars).copied().collect();
        v.sort();
        v
    };
    let mut state = net.structure().reference();
    for (v, x) in a.iter() {
        state[v.0] = x;
    }
    let cards = net.cards();
    let mut log_local = |layer: Layer, bb: &PartialAssignment| {
        for (v, x) in bb.iter() {
            state[v.0] = x;
        }
        local
            .iter()
            .map(|v| net.potential(layer, *v).value_at(&state, cards).ln())
            .sum::<f64>()
    };
    let count = b_vars.iter().map(|v| cards[v.0] as u128).product::<u128>();
    if count > net.state_cap() as u128 {
        return Err(EunError::StateCapExceeded {
            states: count,
            cap: net.state_cap(),
        });
    }
    let b_ref: PartialAssignment = b_vars
        .iter()
        .map(|v| (*v, net.var(*v).reference()))
        .collect();
    let lq0 = log_local(Layer::Probability, &b_ref);
    let lw0 = log_local(Layer::Utility, &b_ref);
    let w_of = |lw: f64| (lw - lw0).exp();
    let q_of = |lq: f64| (lq - lq0).exp();
    let target_w = w_of(log_local(Layer::Utility, b));
    let mut q_terms = Vec::new();
    let mut wq_terms = Vec::new();
    for bb in assignments_over(&b_vars, cards) {
        let q = q_of(log_local(Layer::Probability, &bb));
        let w = w_of(log_local(Layer::Utility, &bb));
        q_terms.push(q);
        wq_terms.push(w * q);
    }
    let q_total = neumaier_sum(q_terms);
    let expected_w = neumaier_sum(wq_terms) / q_total;
    Ok(target_w / expected_w)
}
