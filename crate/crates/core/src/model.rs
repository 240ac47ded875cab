//! Variables, the two-layer graph, restricted potentials and the joint
//! probability / utility functions they determine.
//!
//! Each node carries one potential per layer. The stored potential of node
//! `i` is the ceteris-paribus ratio of `x_i` against its reference value,
//! conditioned on the layer neighbours ranked below `i` while the neighbours
//! ranked above `i` sit at their reference values. Such tables are free
//! positive parameters: rows where `x_i` is at reference are exactly 1, and
//! the product of all tables of a layer is the joint ratio `f(x) / f(x⁰)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{EunError, Result};
use crate::space::{Assignment, StateSpace, VarId, DEFAULT_STATE_CAP};
use crate::table::{neumaier_sum, rel_eq, JointTable};

/// Default relative tolerance for ratio-invariance checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Probability,
    Utility,
}

impl Layer {
    pub const BOTH: [Layer; 2] = [Layer::Probability, Layer::Utility];
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Probability => "probability",
            Layer::Utility => "utility",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    name: String,
    domain: Vec<String>,
    reference: usize,
}

impl VariableSpec {
    /// `reference` defaults to the first domain label.
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        domain: impl IntoIterator<Item = S>,
        reference: Option<&str>,
    ) -> Result<Self> {
        let name = name.into();
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if domain.len() < 2 {
            return Err(EunError::DegenerateDomain(name));
        }
        let mut seen = BTreeSet::new();
        for label in &domain {
            if !seen.insert(label.as_str()) {
                return Err(EunError::DuplicateLabel {
                    var: name.clone(),
                    label: label.clone(),
                });
            }
        }
        let reference = match reference {
            None => 0,
            Some(r) => {
                domain
                    .iter()
                    .position(|l| l == r)
                    .ok_or_else(|| EunError::UnknownValue {
                        var: name.clone(),
                        value: r.to_string(),
                    })?
            }
        };
        Ok(VariableSpec {
            name,
            domain,
            reference,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn card(&self) -> usize {
        self.domain.len()
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn value_index(&self, label: &str) -> Result<usize> {
        self.domain
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| EunError::UnknownValue {
                var: self.name.clone(),
                value: label.to_string(),
            })
    }
}

/// Rank order of the variables: `order[k]` is the variable ranked `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering(Vec<VarId>);

impl Ordering {
    pub fn identity(n: usize) -> Self {
        Ordering((0..n).map(VarId).collect())
    }

    pub fn new(order: Vec<VarId>) -> Self {
        Ordering(order)
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }

    fn ranks(&self, n: usize) -> Result<Vec<usize>> {
        if self.0.len() != n {
            return Err(EunError::InvalidOrdering(format!(
                "{} entries for {} variables",
                self.0.len(),
                n
            )));
        }
        let mut rank = vec![usize::MAX; n];
        for (k, v) in self.0.iter().enumerate() {
            if v.0 >= n || rank[v.0] != usize::MAX {
                return Err(EunError::InvalidOrdering(format!(
                    "not a permutation (entry {})",
                    v.0
                )));
            }
            rank[v.0] = k;
        }
        Ok(rank)
    }
}

/// Undirected graph with separate probability and utility arc sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EunGraph {
    prob: Vec<BTreeSet<VarId>>,
    util: Vec<BTreeSet<VarId>>,
}

impl EunGraph {
    pub fn new(n: usize) -> Self {
        EunGraph {
            prob: vec![BTreeSet::new(); n],
            util: vec![BTreeSet::new(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.prob.len()
    }

    pub fn add_arc(&mut self, layer: Layer, a: VarId, b: VarId) -> Result<()> {
        let n = self.num_vars();
        for v in [a, b] {
            if v.0 >= n {
                return Err(EunError::UnknownVariable(v.to_string()));
            }
        }
        if a == b {
            return Err(EunError::SelfLoop(a.to_string()));
        }
        let adj = self.adj_mut(layer);
        adj[a.0].insert(b);
        adj[b.0].insert(a);
        Ok(())
    }

    pub fn with_arc(mut self, layer: Layer, a: usize, b: usize) -> Self {
        self.add_arc(layer, VarId(a), VarId(b)).expect("valid arc");
        self
    }

    fn adj_mut(&mut self, layer: Layer) -> &mut Vec<BTreeSet<VarId>> {
        match layer {
            Layer::Probability => &mut self.prob,
            Layer::Utility => &mut self.util,
        }
    }

    pub fn neighbors(&self, layer: Layer, v: VarId) -> &BTreeSet<VarId> {
        match layer {
            Layer::Probability => &self.prob[v.0],
            Layer::Utility => &self.util[v.0],
        }
    }

    pub fn adjacent(&self, layer: Layer, a: VarId, b: VarId) -> bool {
        self.neighbors(layer, a).contains(&b)
    }

    /// Arcs `(a, b)` with `a < b`, sorted.
    pub fn arcs(&self, layer: Layer) -> Vec<(VarId, VarId)> {
        (0..self.num_vars())
            .flat_map(|a| {
                self.neighbors(layer, VarId(a))
                    .iter()
                    .filter(move |b| b.0 > a)
                    .map(move |&b| (VarId(a), b))
            })
            .collect()
    }
}

/// Validated variables, ordering and graph, without potentials.
#[derive(Debug, Clone)]
pub struct Structure {
    vars: Vec<VariableSpec>,
    ordering: Ordering,
    rank: Vec<usize>,
    graph: EunGraph,
    by_name: HashMap<String, VarId>,
}

impl Structure {
    pub fn new(vars: Vec<VariableSpec>, ordering: Ordering, graph: EunGraph) -> Result<Self> {
        let mut by_name = HashMap::new();
        for (i, v) in vars.iter().enumerate() {
            if by_name.insert(v.name.clone(), VarId(i)).is_some() {
                return Err(EunError::DuplicateVariable(v.name.clone()));
            }
        }
        if graph.num_vars() != vars.len() {
            return Err(EunError::InvalidArgument(format!(
                "graph has {} nodes for {} variables",
                graph.num_vars(),
                vars.len()
            )));
        }
        let rank = ordering.ranks(vars.len())?;
        Ok(Structure {
            vars,
            ordering,
            rank,
            graph,
            by_name,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VariableSpec] {
        &self.vars
    }

    pub fn var(&self, v: VarId) -> &VariableSpec {
        &self.vars[v.0]
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len()).map(VarId)
    }

    pub fn lookup(&self, name: &str) -> Result<VarId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| EunError::UnknownVariable(name.to_string()))
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn rank(&self, v: VarId) -> usize {
        self.rank[v.0]
    }

    pub fn graph(&self) -> &EunGraph {
        &self.graph
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(VariableSpec::card).collect()
    }

    pub fn reference(&self) -> Vec<usize> {
        self.vars.iter().map(VariableSpec::reference).collect()
    }

    /// Joint state space, bounded by `cap`.
    pub fn space(&self, cap: usize) -> Result<StateSpace> {
        StateSpace::new(self.cards(), self.reference(), cap)
    }

    /// Layer neighbours ranked below `v`, sorted by variable index.
    pub fn below(&self, layer: Layer, v: VarId) -> Vec<VarId> {
        self.graph
            .neighbors(layer, v)
            .iter()
            .copied()
            .filter(|u| self.rank[u.0] < self.rank[v.0])
            .collect()
    }

    /// Layer neighbours ranked above `v`, sorted by variable index.
    pub fn above(&self, layer: Layer, v: VarId) -> Vec<VarId> {
        self.graph
            .neighbors(layer, v)
            .iter()
            .copied()
            .filter(|u| self.rank[u.0] > self.rank[v.0])
            .collect()
    }

    /// Builds the restricted table of `v` from `f(x_v, conditioning values)`.
    pub fn table_from_fn(
        &self,
        layer: Layer,
        v: VarId,
        mut f: impl FnMut(usize, &[usize]) -> f64,
    ) -> PotentialTable {
        let conditioning = self.below(layer, v);
        let card = self.var(v).card();
        let cond_cards: Vec<usize> = conditioning.iter().map(|u| self.var(*u).card()).collect();
        let rows: usize = cond_cards.iter().product();
        let mut values = Vec::with_capacity(rows * card);
        let mut cond = vec![0; conditioning.len()];
        for r in 0..rows {
            decode_into(r, &cond_cards, &mut cond);
            for x in 0..card {
                values.push(f(x, &cond));
            }
        }
        PotentialTable {
            conditioning,
            values,
        }
    }

    /// Restricted tables of `layer` derived from a joint function given in
    /// log space: entry `(x_v, x_below)` is `f(x) / f(x with v at reference)`
    /// with every other variable at its reference value.
    pub fn derive_tables(
        &self,
        layer: Layer,
        log_f: impl Fn(&[usize]) -> f64,
    ) -> Vec<PotentialTable> {
        let reference = self.reference();
        self.var_ids()
            .map(|v| {
                let conditioning = self.below(layer, v);
                let mut state = reference.clone();
                self.table_from_fn(layer, v, |x, cond| {
                    state.copy_from_slice(&reference);
                    for (u, &c) in conditioning.iter().zip(cond) {
                        state[u.0] = c;
                    }
                    state[v.0] = x;
                    let num = log_f(&state);
                    state[v.0] = reference[v.0];
                    let den = log_f(&state);
                    if x == reference[v.0] {
                        1.0
                    } else {
                        (num - den).exp()
                    }
                })
            })
            .collect()
    }

    /// Whether every node's lower neighbour set is a clique in `layer`; the
    /// product of restricted tables then factorizes over cliques.
    pub fn below_sets_are_cliques(&self, layer: Layer) -> bool {
        self.var_ids().all(|v| {
            let below = self.below(layer, v);
            below.iter().enumerate().all(|(k, &a)| {
                below[k + 1..]
                    .iter()
                    .all(|&b| self.graph.adjacent(layer, a, b))
            })
        })
    }
}

fn decode_into(mut index: usize, cards: &[usize], out: &mut [usize]) {
    for (slot, &c) in out.iter_mut().zip(cards).rev() {
        *slot = index % c;
        index /= c;
    }
}

/// Raw restricted table as supplied to [`Network::new`].
///
/// `conditioning` lists the lower neighbours sorted by variable index. Entry
/// `values[row * card + x]` holds the ratio for value `x` where `row` is the
/// mixed-radix index of the conditioning values, first variable most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    pub conditioning: Vec<VarId>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedPotential {
    var: VarId,
    layer: Layer,
    conditioning: Vec<VarId>,
    card: usize,
    values: Vec<f64>,
    log_values: Vec<f64>,
}

impl RestrictedPotential {
    pub fn var(&self) -> VarId {
        self.var
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn conditioning(&self) -> &[VarId] {
        &self.conditioning
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0)
    }

    /// Row offset of a full joint state (given as per-variable values).
    fn offset(&self, state: &[usize], cards: &[usize]) -> usize {
        let row = self
            .conditioning
            .iter()
            .fold(0, |acc, u| acc * cards[u.0] + state[u.0]);
        row * self.card + state[self.var.0]
    }

    pub fn value_at(&self, state: &[usize], cards: &[usize]) -> f64 {
        self.values[self.offset(state, cards)]
    }

    fn log_at(&self, state: &[usize], cards: &[usize]) -> f64 {
        self.log_values[self.offset(state, cards)]
    }

    pub fn to_table(&self) -> PotentialTable {
        PotentialTable {
            conditioning: self.conditioning.clone(),
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Reject networks whose joint is not Markov with respect to the graph.
    pub strict: bool,
    pub tolerance: f64,
    pub state_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            strict: true,
            tolerance: DEFAULT_TOLERANCE,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl BuildOptions {
    pub fn lenient() -> Self {
        BuildOptions {
            strict: false,
            ..Self::default()
        }
    }
}

/// Outcome of the Markov check performed at build time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImapStatus {
    /// Every lower neighbour set is a clique in both layers.
    Structural,
    /// Verified by exhaustive enumeration (or by construction on import).
    Verified,
    Violated {
        violations: usize,
    },
    /// Lenient build over a space too large to enumerate.
    Unchecked,
}

impl ImapStatus {
    pub fn is_markov(self) -> bool {
        matches!(self, ImapStatus::Structural | ImapStatus::Verified)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Totals {
    /// Σ_x p(x)/p(x⁰)
    pub mass: f64,
    /// Σ_x p(x)/p(x⁰) · u(x)/u(x⁰)
    pub value: f64,
}

#[derive(Debug)]
pub struct Network {
    structure: Structure,
    prob: Vec<RestrictedPotential>,
    util: Vec<RestrictedPotential>,
    cards: Vec<usize>,
    imap: ImapStatus,
    options: BuildOptions,
    pub(crate) totals: OnceLock<Totals>,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Network {
            structure: self.structure.clone(),
            prob: self.prob.clone(),
            util: self.util.clone(),
            cards: self.cards.clone(),
            imap: self.imap,
            options: self.options,
            totals: OnceLock::new(),
        }
    }
}

/// Identity tables for every variable of `layer`.
pub fn identity_tables(structure: &Structure, layer: Layer) -> Vec<PotentialTable> {
    structure
        .var_ids()
        .map(|v| structure.table_from_fn(layer, v, |_, _| 1.0))
        .collect()
}

impl Network {
    /// Validates and assembles a network. `prob` and `util` hold one table
    /// per variable in declaration order.
    pub fn new(
        structure: Structure,
        prob: Vec<PotentialTable>,
        util: Vec<PotentialTable>,
        options: BuildOptions,
    ) -> Result<Self> {
        let cards = structure.cards();
        let prob = Self::check_layer(&structure, Layer::Probability, prob)?;
        let util = Self::check_layer(&structure, Layer::Utility, util)?;
        let mut net = Network {
            structure,
            prob,
            util,
            cards,
            imap: ImapStatus::Unchecked,
            options,
            totals: OnceLock::new(),
        };
        net.imap = if Layer::BOTH
            .iter()
            .all(|&l| net.structure.below_sets_are_cliques(l))
        {
            ImapStatus::Structural
        } else {
            match net.validate_imap(options.tolerance) {
                Ok(report) if report.is_clean() => ImapStatus::Verified,
                Ok(report) => {
                    let violations = report.violations.len();
                    if options.strict {
                        return Err(EunError::NotMarkov { violations });
                    }
                    ImapStatus::Violated { violations }
                }
                Err(e) if options.strict => return Err(e),
                Err(_) => ImapStatus::Unchecked,
            }
        };
        Ok(net)
    }

    /// Assembles a network whose Markov property is known by construction.
    pub(crate) fn new_verified(
        structure: Structure,
        prob: Vec<PotentialTable>,
        util: Vec<PotentialTable>,
        options: BuildOptions,
    ) -> Result<Self> {
        let cards = structure.cards();
        let prob = Self::check_layer(&structure, Layer::Probability, prob)?;
        let util = Self::check_layer(&structure, Layer::Utility, util)?;
        Ok(Network {
            structure,
            prob,
            util,
            cards,
            imap: ImapStatus::Verified,
            options,
            totals: OnceLock::new(),
        })
    }

    fn check_layer(
        structure: &Structure,
        layer: Layer,
        tables: Vec<PotentialTable>,
    ) -> Result<Vec<RestrictedPotential>> {
        if tables.len() != structure.num_vars() {
            return Err(EunError::InvalidArgument(format!(
                "{} {} tables for {} variables",
                tables.len(),
                layer,
                structure.num_vars()
            )));
        }
        let names = |vs: &[VarId]| {
            vs.iter()
                .map(|u| structure.var(*u).name().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        tables
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let v = VarId(i);
                let spec = structure.var(v);
                let expected = structure.below(layer, v);
                if t.conditioning != expected {
                    return Err(EunError::ConditioningMismatch {
                        var: spec.name().to_string(),
                        layer,
                        expected: names(&expected),
                        found: names(&t.conditioning),
                    });
                }
                let card = spec.card();
                let size = card
                    * expected
                        .iter()
                        .map(|u| structure.var(*u).card())
                        .product::<usize>();
                if t.values.len() != size {
                    return Err(EunError::IncompleteTable {
                        var: spec.name().to_string(),
                        layer,
                        expected: size,
                        found: t.values.len(),
                    });
                }
                for (k, &value) in t.values.iter().enumerate() {
                    if !(value.is_finite() && value > 0.0) {
                        return Err(EunError::NonPositive {
                            var: spec.name().to_string(),
                            layer,
                            row: k / card,
                            value,
                        });
                    }
                    if k % card == spec.reference() && value != 1.0 {
                        return Err(EunError::NonUnitReference {
                            var: spec.name().to_string(),
                            layer,
                            row: k / card,
                            value,
                        });
                    }
                }
                Ok(RestrictedPotential {
                    var: v,
                    layer,
                    conditioning: t.conditioning,
                    card,
                    log_values: t.values.iter().map(|x| x.ln()).collect(),
                    values: t.values,
                })
            })
            .collect()
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn graph(&self) -> &EunGraph {
        self.structure.graph()
    }

    pub fn num_vars(&self) -> usize {
        self.structure.num_vars()
    }

    pub fn var(&self, v: VarId) -> &VariableSpec {
        self.structure.var(v)
    }

    pub fn lookup(&self, name: &str) -> Result<VarId> {
        self.structure.lookup(name)
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn imap_status(&self) -> ImapStatus {
        self.imap
    }

    pub fn options(&self) -> &BuildOptions {
        &self.options
    }

    pub fn state_cap(&self) -> usize {
        self.options.state_cap
    }

    /// Same network with a different enumeration cap.
    pub fn with_state_cap(mut self, cap: usize) -> Self {
        self.options.state_cap = cap;
        self.totals = OnceLock::new();
        self
    }

    pub fn potentials(&self, layer: Layer) -> &[RestrictedPotential] {
        match layer {
            Layer::Probability => &self.prob,
            Layer::Utility => &self.util,
        }
    }

    pub fn potential(&self, layer: Layer, v: VarId) -> &RestrictedPotential {
        &self.potentials(layer)[v.0]
    }

    pub fn space(&self) -> Result<StateSpace> {
        self.structure.space(self.options.state_cap)
    }

    pub fn reference_assignment(&self) -> Assignment {
        Assignment(self.structure.reference())
    }

    fn check_assignment(&self, x: &Assignment) -> Result<()> {
        if x.0.len() != self.num_vars() {
            return Err(EunError::InvalidArgument(format!(
                "assignment has {} values for {} variables",
                x.0.len(),
                self.num_vars()
            )));
        }
        for (i, &value) in x.0.iter().enumerate() {
            if value >= self.cards[i] {
                return Err(EunError::UnknownValue {
                    var: self.var(VarId(i)).name().to_string(),
                    value: value.to_string(),
                });
            }
        }
        Ok(())
    }

    /// `log(f(x) / f(x⁰))` for the layer's function, summed in rank order.
    pub(crate) fn log_ratio_unchecked(&self, layer: Layer, state: &[usize]) -> f64 {
        let pots = self.potentials(layer);
        self.structure
            .ordering()
            .as_slice()
            .iter()
            .map(|v| pots[v.0].log_at(state, &self.cards))
            .sum()
    }

    /// `p(x)/p(x⁰)` or `u(x)/u(x⁰)`.
    pub fn joint_ratio(&self, layer: Layer, x: &Assignment) -> Result<f64> {
        self.check_assignment(x)?;
        Ok(self.log_ratio_unchecked(layer, &x.0).exp())
    }

    /// Same product taken directly rather than in log space.
    pub fn joint_ratio_direct(&self, layer: Layer, x: &Assignment) -> Result<f64> {
        self.check_assignment(x)?;
        let pots = self.potentials(layer);
        Ok(self
            .structure
            .ordering()
            .as_slice()
            .iter()
            .map(|v| pots[v.0].value_at(&x.0, &self.cards))
            .product())
    }

    /// Log joint ratio of every state, in state-index order.
    pub(crate) fn log_ratios(&self, layer: Layer, space: &StateSpace) -> Vec<f64> {
        let mut state = vec![0; space.num_vars()];
        (0..space.len())
            .map(|idx| {
                for (i, slot) in state.iter_mut().enumerate() {
                    *slot = space.digit(idx, VarId(i));
                }
                self.log_ratio_unchecked(layer, &state)
            })
            .collect()
    }

    /// Normalized `p` and reference-relative `u` over the full state space.
    pub fn reconstruct_joint(&self) -> Result<ReconstructedJoint> {
        let space = self.space()?;
        let p_ratio: Vec<f64> = self
            .log_ratios(Layer::Probability, &space)
            .into_iter()
            .map(f64::exp)
            .collect();
        let total = neumaier_sum(p_ratio.iter().copied());
        let p: Vec<f64> = p_ratio.iter().map(|r| r / total).collect();
        let u: Vec<f64> = self
            .log_ratios(Layer::Utility, &space)
            .into_iter()
            .map(f64::exp)
            .collect();
        Ok(ReconstructedJoint {
            p: JointTable::new(space.clone(), p)?,
            u: JointTable::new(space, u)?,
        })
    }

    /// Full-mantle ceteris-paribus ratio table of `v`: the ratio of `x_v`
    /// against its reference value given all of its layer neighbours.
    ///
    /// Entries are read at the completion with non-neighbours at reference;
    /// `max_deviation` records the largest relative change over all other
    /// completions. In strict mode any deviation beyond `tolerance` is an
    /// error.
    pub fn full_mantle_potential(
        &self,
        layer: Layer,
        v: VarId,
        strict: bool,
        tolerance: f64,
    ) -> Result<MantlePotential> {
        let space = self.space()?;
        let logs = self.log_ratios(layer, &space);
        let mantle: Vec<VarId> = self.graph().neighbors(layer, v).iter().copied().collect();
        let others: Vec<VarId> = self
            .structure
            .var_ids()
            .filter(|u| *u != v && !mantle.contains(u))
            .collect();
        let card = self.cards[v.0];
        let mantle_cards: Vec<usize> = mantle.iter().map(|u| self.cards[u.0]).collect();
        let rows: usize = mantle_cards.iter().product();
        let mut values = vec![0.0; rows * card];
        let mut max_deviation = 0.0_f64;
        for idx in 0..space.len() {
            let ratio = (logs[idx] - logs[space.with_reference(idx, &[v])]).exp();
            let anchor = space.with_reference(idx, &others);
            let row = mantle
                .iter()
                .fold(0, |acc, u| acc * self.cards[u.0] + space.digit(idx, *u));
            let slot = row * card + space.digit(idx, v);
            if idx == anchor {
                values[slot] = ratio;
            } else {
                let base = (logs[anchor] - logs[space.with_reference(anchor, &[v])]).exp();
                max_deviation = max_deviation.max((ratio - base).abs() / ratio.max(base));
            }
        }
        if strict && max_deviation > tolerance {
            return Err(EunError::NotMarkov { violations: 1 });
        }
        Ok(MantlePotential {
            var: v,
            layer,
            mantle,
            mantle_cards,
            card,
            values,
            max_deviation,
        })
    }

    /// Checks, for every variable and both layers, that the full conditional
    /// ratio depends on the declared neighbours only.
    pub fn validate_imap(&self, tolerance: f64) -> Result<ImapReport> {
        let space = self.space()?;
        let mut violations = Vec::new();
        for layer in Layer::BOTH {
            let logs = self.log_ratios(layer, &space);
            for v in self.structure.var_ids() {
                let nbrs = self.graph().neighbors(layer, v);
                let others: Vec<VarId> = self
                    .structure
                    .var_ids()
                    .filter(|u| *u != v && !nbrs.contains(u))
                    .collect();
                if others.is_empty() {
                    continue;
                }
                let reference = space.reference()[v.0];
                for idx in 0..space.len() {
                    if space.digit(idx, v) == reference {
                        continue;
                    }
                    let anchor = space.with_reference(idx, &others);
                    if anchor == idx {
                        continue;
                    }
                    let found = (logs[idx] - logs[space.with_value(idx, v, reference)]).exp();
                    let expected =
                        (logs[anchor] - logs[space.with_value(anchor, v, reference)]).exp();
                    if !rel_eq(found, expected, tolerance) {
                        violations.push(ImapViolation {
                            var: v,
                            layer,
                            state: Assignment(space.decode(idx)),
                            expected,
                            found,
                        });
                    }
                }
            }
        }
        Ok(ImapReport { violations })
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructedJoint {
    pub p: JointTable,
    /// `u(x)/u(x⁰)`
    pub u: JointTable,
}

impl ReconstructedJoint {
    pub fn table(&self, layer: Layer) -> &JointTable {
        match layer {
            Layer::Probability => &self.p,
            Layer::Utility => &self.u,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MantlePotential {
    pub var: VarId,
    pub layer: Layer,
    pub mantle: Vec<VarId>,
    mantle_cards: Vec<usize>,
    card: usize,
    values: Vec<f64>,
    pub max_deviation: f64,
}

impl MantlePotential {
    /// Ratio for `x` given mantle values listed in `self.mantle` order.
    pub fn value(&self, x: usize, mantle_values: &[usize]) -> f64 {
        let row = mantle_values
            .iter()
            .zip(&self.mantle_cards)
            .fold(0, |acc, (m, c)| acc * c + m);
        self.values[row * self.card + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImapViolation {
    pub var: VarId,
    pub layer: Layer,
    pub state: Assignment,
    /// Ratio at the completion with non-neighbours at reference.
    pub expected: f64,
    pub found: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImapReport {
    pub violations: Vec<ImapViolation>,
}

impl ImapReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Distinct offending variables, sorted.
    pub fn variables(&self) -> Vec<VarId> {
        let set: BTreeSet<VarId> = self.violations.iter().map(|v| v.var).collect();
        set.into_iter().collect()
    }
}
