//! Bayes networks as a front end for the probability layer.

use crate::error::{EunError, Result};
use crate::model::{
    identity_tables, BuildOptions, EunGraph, Layer, Network, Ordering, PotentialTable, Structure,
    VariableSpec,
};
use crate::space::VarId;

/// Tolerance on CPT row sums.
pub const CPT_ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    vars: Vec<VariableSpec>,
    /// Parents of each variable, sorted by index.
    parents: Vec<Vec<VarId>>,
    /// Row-major CPTs: row = parent configuration (first parent most
    /// significant), column = value of the child.
    cpts: Vec<Vec<f64>>,
}

impl BayesNet {
    pub fn new(
        vars: Vec<VariableSpec>,
        edges: &[(VarId, VarId)],
        cpts: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = vars.len();
        let mut parents = vec![Vec::new(); n];
        for &(from, to) in edges {
            for v in [from, to] {
                if v.0 >= n {
                    return Err(EunError::UnknownVariable(v.to_string()));
                }
            }
            if from == to {
                return Err(EunError::SelfLoop(vars[from.0].name().to_string()));
            }
            if !parents[to.0].contains(&from) {
                parents[to.0].push(from);
            }
        }
        for p in &mut parents {
            p.sort();
        }
        if let Some(v) = find_cycle(&parents) {
            return Err(EunError::Cycle(vars[v.0].name().to_string()));
        }
        if cpts.len() != n {
            return Err(EunError::InvalidArgument(format!(
                "{} CPTs for {} variables",
                cpts.len(),
                n
            )));
        }
        for (i, cpt) in cpts.iter().enumerate() {
            let card = vars[i].card();
            let rows: usize = parents[i].iter().map(|p| vars[p.0].card()).product();
            let name = vars[i].name().to_string();
            if cpt.len() != rows * card {
                return Err(EunError::InvalidCpt {
                    var: name,
                    msg: format!("expected {} entries, got {}", rows * card, cpt.len()),
                });
            }
            for (r, row) in cpt.chunks(card).enumerate() {
                if let Some(bad) = row.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                    return Err(EunError::InvalidCpt {
                        var: name,
                        msg: format!("row {r} has non-positive entry {bad}"),
                    });
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > CPT_ROW_TOLERANCE {
                    return Err(EunError::InvalidCpt {
                        var: name,
                        msg: format!("row {r} sums to {total}"),
                    });
                }
            }
        }
        Ok(BayesNet {
            vars,
            parents,
            cpts,
        })
    }

    pub fn vars(&self) -> &[VariableSpec] {
        &self.vars
    }

    pub fn parents(&self, v: VarId) -> &[VarId] {
        &self.parents[v.0]
    }

    /// `log P(x)` as the sum of CPT entries.
    pub fn log_joint(&self, x: &[usize]) -> f64 {
        (0..self.vars.len())
            .map(|i| {
                let row = self.parents[i]
                    .iter()
                    .fold(0, |acc, p| acc * self.vars[p.0].card() + x[p.0]);
                self.cpts[i][row * self.vars[i].card() + x[i]].ln()
            })
            .sum()
    }

    /// Undirected moral graph: parent-child arcs plus arcs between co-parents.
    pub fn moral_graph(&self) -> EunGraph {
        let mut g = EunGraph::new(self.vars.len());
        for (child, parents) in self.parents.iter().enumerate() {
            for (k, &p) in parents.iter().enumerate() {
                g.add_arc(Layer::Probability, p, VarId(child))
                    .expect("parents reference declared variables");
                for &q in &parents[k + 1..] {
                    g.add_arc(Layer::Probability, p, q)
                        .expect("parents reference declared variables");
                }
            }
        }
        g
    }

    /// Network whose probability layer is the moral graph, with restricted
    /// potentials derived from the CPT product, and an empty utility layer.
    pub fn to_network(&self, options: BuildOptions) -> Result<Network> {
        self.to_network_with_utility(
            Ordering::identity(self.vars.len()),
            &[],
            |s| identity_tables(s, Layer::Utility),
            options,
        )
    }

    /// As [`BayesNet::to_network`] with a chosen ordering and a utility layer.
    pub fn to_network_with_utility(
        &self,
        ordering: Ordering,
        util_arcs: &[(VarId, VarId)],
        util: impl FnOnce(&Structure) -> Vec<PotentialTable>,
        options: BuildOptions,
    ) -> Result<Network> {
        let mut graph = self.moral_graph();
        for &(a, b) in util_arcs {
            graph.add_arc(Layer::Utility, a, b)?;
        }
        let structure = Structure::new(self.vars.clone(), ordering, graph)?;
        // enumeration-scale import: refuse spaces beyond the cap
        structure.space(options.state_cap)?;
        let prob = structure.derive_tables(Layer::Probability, |x| self.log_joint(x));
        let util = util(&structure);
        // The CPT product factorizes over the moral graph, so the joint is
        // Markov with respect to it whatever the ordering.
        Network::new_verified(structure, prob, util, options)
    }
}

fn find_cycle(parents: &[Vec<VarId>]) -> Option<VarId> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for p in ps {
            children[p.0].push(c);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut done = 0;
    while let Some(v) = ready.pop() {
        done += 1;
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if done == n {
        None
    } else {
        (0..n).find(|&i| indegree[i] > 0).map(VarId)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(names: &[&str]) -> Vec<VariableSpec> {
        names
            .iter()
            .map(|n| VariableSpec::new(*n, ["0", "1"], None).unwrap())
            .collect()
    }

    #[test]
    fn collider_is_married() {
        let bn = BayesNet::new(
            binary(&["X", "Y", "Z"]),
            &[(VarId(0), VarId(2)), (VarId(1), VarId(2))],
            vec![
                vec![0.5, 0.5],
                vec![0.5, 0.5],
                vec![0.9, 0.1, 0.2, 0.8, 0.3, 0.7, 0.6, 0.4],
            ],
        )
        .unwrap();
        let arcs = bn.moral_graph().arcs(Layer::Probability);
        assert_eq!(
            arcs,
            vec![
                (VarId(0), VarId(1)),
                (VarId(0), VarId(2)),
                (VarId(1), VarId(2))
            ]
        );
    }

    #[test]
    fn rejects_cycles_and_bad_rows() {
        let cyc = BayesNet::new(
            binary(&["A", "B"]),
            &[(VarId(0), VarId(1)), (VarId(1), VarId(0))],
            vec![vec![0.5; 4], vec![0.5; 4]],
        );
        assert!(matches!(cyc, Err(EunError::Cycle(_))));
        let zero = BayesNet::new(binary(&["A"]), &[], vec![vec![1.0, 0.0]]);
        assert!(matches!(zero, Err(EunError::InvalidCpt { .. })));
        let sum = BayesNet::new(binary(&["A"]), &[], vec![vec![0.5, 0.6]]);
        assert!(matches!(sum, Err(EunError::InvalidCpt { .. })));
    }

    #[test]
    fn chain_potentials_are_cpt_ratios() {
        let cpt_y = vec![0.8, 0.2, 0.3, 0.7];
        let bn = BayesNet::new(
            binary(&["X", "Y"]),
            &[(VarId(0), VarId(1))],
            vec![vec![0.6, 0.4], cpt_y.clone()],
        )
        .unwrap();
        let net = bn.to_network(BuildOptions::default()).unwrap();
        let q_y = net.potential(Layer::Probability, VarId(1));
        assert_eq!(q_y.conditioning(), &[VarId(0)]);
        assert!((q_y.values()[1] - 0.2 / 0.8).abs() < 1e-12);
        assert!((q_y.values()[3] - 0.7 / 0.3).abs() < 1e-12);
        // ceteris paribus: Y held at its reference value
        let q_x = net.potential(Layer::Probability, VarId(0));
        assert!((q_x.values()[1] - (0.4 * 0.3) / (0.6 * 0.8)).abs() < 1e-12);
    }
}
