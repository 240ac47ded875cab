//! Random network generators and a brute-force oracle that works from the
//! generating functions directly, independent of the engine's potentials.
#![allow(dead_code)]

use eun::{
    BuildOptions, EunGraph, Event, JointTable, Layer, Network, Ordering, StateSpace, Structure,
    VarId, VariableSpec,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(v: &[usize]) -> Vec<VarId> {
    v.iter().copied().map(VarId).collect()
}

/// Positive function given as a product of factors over small scopes,
/// stored in log space.
#[derive(Debug, Clone)]
pub struct FactorProduct {
    cards: Vec<usize>,
    scopes: Vec<Vec<usize>>,
    logs: Vec<Vec<f64>>,
}

impl FactorProduct {
    pub fn random(rng: &mut ChaCha8Rng, cards: &[usize], scopes: Vec<Vec<usize>>) -> Self {
        let logs = scopes
            .iter()
            .map(|s| {
                let size: usize = s.iter().map(|&v| cards[v]).product();
                (0..size).map(|_| rng.random_range(-1.5..1.5)).collect()
            })
            .collect();
        FactorProduct {
            cards: cards.to_vec(),
            scopes,
            logs,
        }
    }

    /// Unary factors on every variable plus one pairwise factor per arc.
    pub fn on_graph(rng: &mut ChaCha8Rng, cards: &[usize], graph: &EunGraph, layer: Layer) -> Self {
        let mut scopes: Vec<Vec<usize>> = (0..cards.len()).map(|i| vec![i]).collect();
        scopes.extend(graph.arcs(layer).into_iter().map(|(a, b)| vec![a.0, b.0]));
        Self::random(rng, cards, scopes)
    }

    pub fn log_eval(&self, x: &[usize]) -> f64 {
        self.scopes
            .iter()
            .zip(&self.logs)
            .map(|(s, t)| t[s.iter().fold(0, |acc, &v| acc * self.cards[v] + x[v])])
            .sum()
    }

    /// Pairs of variables sharing a factor.
    pub fn interaction_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for s in &self.scopes {
            for (k, &a) in s.iter().enumerate() {
                for &b in &s[k + 1..] {
                    let p = (a.min(b), a.max(b));
                    if !pairs.contains(&p) {
                        pairs.push(p);
                    }
                }
            }
        }
        pairs.sort();
        pairs
    }

    pub fn table(&self, space: &StateSpace) -> JointTable {
        let values = (0..space.len())
            .map(|i| self.log_eval(&space.decode(i)).exp())
            .collect();
        JointTable::new(space.clone(), values).expect("positive by construction")
    }
}

/// Random factor product over scopes of one to three variables.
pub fn random_hypergraph_product(rng: &mut ChaCha8Rng, cards: &[usize]) -> FactorProduct {
    let n = cards.len();
    let mut scopes: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        let size = rng.random_range(2..=3.min(n));
        let mut s: Vec<usize> = Vec::new();
        while s.len() < size {
            let v = rng.random_range(0..n);
            if !s.contains(&v) {
                s.push(v);
            }
        }
        s.sort();
        scopes.push(s);
    }
    FactorProduct::random(rng, cards, scopes)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p_density: f64, u_density: f64) -> EunGraph {
    let mut g = EunGraph::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p_density) {
                g.add_arc(Layer::Probability, VarId(a), VarId(b)).unwrap();
            }
            if rng.random_bool(u_density) {
                g.add_arc(Layer::Utility, VarId(a), VarId(b)).unwrap();
            }
        }
    }
    g
}

pub fn random_ordering(rng: &mut ChaCha8Rng, n: usize) -> Ordering {
    let mut order: Vec<VarId> = (0..n).map(VarId).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    Ordering::new(order)
}

pub fn variables(rng: &mut ChaCha8Rng, cards: &[usize]) -> Vec<VariableSpec> {
    cards
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let domain: Vec<String> = (0..c).map(|x| x.to_string()).collect();
            let reference = domain[rng.random_range(0..c)].clone();
            VariableSpec::new(format!("X{i}"), domain, Some(&reference)).unwrap()
        })
        .collect()
}

/// A network together with the functions it was derived from.
pub struct Generated {
    pub net: Network,
    pub oracle: Oracle,
    pub p_fn: FactorProduct,
    pub u_fn: FactorProduct,
}

/// Network Markov with respect to `graph` by construction: both layers are
/// pairwise factor products over the layer's arcs, and the stored restricted
/// potentials are derived from them under `ordering`.
pub fn network_on(
    rng: &mut ChaCha8Rng,
    cards: &[usize],
    graph: EunGraph,
    ordering: Ordering,
) -> Generated {
    let p_fn = FactorProduct::on_graph(rng, cards, &graph, Layer::Probability);
    let u_fn = FactorProduct::on_graph(rng, cards, &graph, Layer::Utility);
    let vars = variables(rng, cards);
    let structure = Structure::new(vars, ordering, graph).unwrap();
    let prob = structure.derive_tables(Layer::Probability, |x| p_fn.log_eval(x));
    let util = structure.derive_tables(Layer::Utility, |x| u_fn.log_eval(x));
    let net = Network::new(structure, prob, util, BuildOptions::default())
        .expect("factor products are Markov with respect to their graph");
    let oracle = Oracle::new(net.space().unwrap(), &p_fn, &u_fn);
    Generated {
        net,
        oracle,
        p_fn,
        u_fn,
    }
}

pub fn random_network(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_card: usize,
    p_density: f64,
    u_density: f64,
) -> Generated {
    let cards: Vec<usize> = (0..n).map(|_| rng.random_range(2..=max_card)).collect();
    let graph = random_graph(rng, n, p_density, u_density);
    let ordering = random_ordering(rng, n);
    network_on(rng, &cards, graph, ordering)
}

/// Exact event measures by summation over the generating functions.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub space: StateSpace,
    /// Normalized probabilities.
    pub p: Vec<f64>,
    /// Utilities relative to the reference state.
    pub u: Vec<f64>,
}

impl Oracle {
    pub fn new(space: StateSpace, p_fn: &FactorProduct, u_fn: &FactorProduct) -> Self {
        let states: Vec<Vec<usize>> = (0..space.len()).map(|i| space.decode(i)).collect();
        let raw: Vec<f64> = states.iter().map(|x| p_fn.log_eval(x).exp()).collect();
        let total: f64 = raw.iter().sum();
        let u0 = u_fn.log_eval(space.reference());
        Oracle {
            p: raw.iter().map(|r| r / total).collect(),
            u: states
                .iter()
                .map(|x| (u_fn.log_eval(x) - u0).exp())
                .collect(),
            space,
        }
    }

    pub fn states(&self, e: &Event) -> Vec<usize> {
        e.states(&self.space)
    }

    pub fn p(&self, e: &Event) -> f64 {
        self.states(e).iter().map(|&i| self.p[i]).sum()
    }

    fn pu(&self, e: &Event) -> f64 {
        self.states(e).iter().map(|&i| self.p[i] * self.u[i]).sum()
    }

    /// `u(E)/u(x⁰)`
    pub fn u_rel(&self, e: &Event) -> f64 {
        self.pu(e) / self.p(e)
    }

    /// `u(E)` normalized so that `u(True) = 1`.
    pub fn u(&self, e: &Event) -> f64 {
        self.u_rel(e) / self.u_rel(&Event::all())
    }

    pub fn v(&self, e: &Event) -> f64 {
        self.pu(e) / self.pu(&Event::all())
    }

    pub fn p_given(&self, e: &Event, f: &Event) -> f64 {
        self.p(&e.intersection(f, &self.space)) / self.p(f)
    }

    pub fn u_given(&self, e: &Event, f: &Event) -> f64 {
        self.u_rel(&e.intersection(f, &self.space)) / self.u_rel(f)
    }

    pub fn v_given(&self, e: &Event, f: &Event) -> f64 {
        self.pu(&e.intersection(f, &self.space)) / self.pu(f)
    }

    /// Joint ratio `p(x)/p(x⁰)` or `u(x)/u(x⁰)` of a state index.
    pub fn ratio(&self, layer: Layer, idx: usize) -> f64 {
        let r = self.space.reference_index();
        match layer {
            Layer::Probability => self.p[idx] / self.p[r],
            Layer::Utility => self.u[idx] / self.u[r],
        }
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Random non-empty proper subset of the state space.
pub fn random_state_event(rng: &mut ChaCha8Rng, space: &StateSpace) -> Event {
    loop {
        let states: Vec<usize> = (0..space.len()).filter(|_| rng.random_bool(0.5)).collect();
        if !states.is_empty() && states.len() < space.len() {
            return Event::from_states(states);
        }
    }
}

/// Random cylinder fixing each variable with probability `fix`.
pub fn random_cylinder(rng: &mut ChaCha8Rng, cards: &[usize], fix: f64) -> Event {
    let mut partial = eun::PartialAssignment::new();
    for (i, &c) in cards.iter().enumerate() {
        if rng.random_bool(fix) {
            partial.set(VarId(i), rng.random_range(0..c));
        }
    }
    Event::cylinder(partial)
}
