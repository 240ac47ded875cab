//! Dense factors and summed variable elimination.

use crate::error::{EunError, Result};
use crate::model::{Layer, Network};
use crate::space::{PartialAssignment, VarId};

/// Dense table over `scope` (sorted by variable index, last varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    /// The restricted potential of `v`, with evidence variables fixed.
    fn from_potential(net: &Network, layer: Layer, v: VarId, evidence: &PartialAssignment) -> Self {
        let pot = net.potential(layer, v);
        let all_cards = net.cards();
        let mut scope: Vec<VarId> = pot
            .conditioning()
            .iter()
            .copied()
            .chain(std::iter::once(v))
            .filter(|u| evidence.get(*u).is_none())
            .collect();
        scope.sort();
        let cards: Vec<usize> = scope.iter().map(|u| all_cards[u.0]).collect();
        let size: usize = cards.iter().product();
        let mut state = vec![0; all_cards.len()];
        for (u, x) in evidence.iter() {
            state[u.0] = x;
        }
        let values = (0..size)
            .map(|mut k| {
                for (u, c) in scope.iter().zip(&cards).rev() {
                    state[u.0] = k % c;
                    k /= c;
                }
                pot.value_at(&state, all_cards)
            })
            .collect();
        Factor {
            scope,
            cards,
            values,
        }
    }

    fn contains(&self, v: VarId) -> bool {
        self.scope.binary_search(&v).is_ok()
    }

    /// Multiplies `factors` and sums out `var` in one pass.
    fn product_sum_out(
        factors: &[Factor],
        var: VarId,
        all_cards: &[usize],
        cap: usize,
    ) -> Result<Factor> {
        let mut union: Vec<VarId> = factors
            .iter()
            .flat_map(|f| f.scope.iter().copied())
            .collect();
        union.sort();
        union.dedup();
        let cards: Vec<usize> = union.iter().map(|u| all_cards[u.0]).collect();
        let size = cards.iter().map(|&c| c as u128).product::<u128>();
        if size > cap as u128 {
            return Err(EunError::StateCapExceeded { states: size, cap });
        }
        // strides of each union variable inside each factor
        let strides: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| {
                let mut s = 1;
                let mut local = vec![0; f.scope.len()];
                for i in (0..f.scope.len()).rev() {
                    local[i] = s;
                    s *= f.cards[i];
                }
                union
                    .iter()
                    .map(|u| match f.scope.binary_search(u) {
                        Ok(p) => local[p],
                        Err(_) => 0,
                    })
                    .collect()
            })
            .collect();
        let pos = union
            .binary_search(&var)
            .expect("eliminated variable in scope");
        let out_scope: Vec<VarId> = union.iter().copied().filter(|u| *u != var).collect();
        let out_cards: Vec<usize> = out_scope.iter().map(|u| all_cards[u.0]).collect();
        let mut out = vec![0.0; out_cards.iter().product()];
        // output strides, zero for the summed variable
        let mut out_strides = vec![0usize; union.len()];
        let mut s = 1;
        for i in (0..union.len()).rev() {
            if i != pos {
                out_strides[i] = s;
                s *= cards[i];
            }
        }
        let mut digits = vec![0usize; union.len()];
        let mut offsets = vec![0usize; factors.len()];
        let mut out_index = 0;
        let n = union.len();
        for _ in 0..size as usize {
            let prod: f64 = factors
                .iter()
                .zip(&offsets)
                .map(|(f, &o)| f.values[o])
                .product();
            out[out_index] += prod;
            // odometer, last digit fastest
            for i in (0..n).rev() {
                digits[i] += 1;
                out_index += out_strides[i];
                for (o, s) in offsets.iter_mut().zip(&strides) {
                    *o += s[i];
                }
                if digits[i] < cards[i] {
                    break;
                }
                out_index -= out_strides[i] * cards[i];
                for (o, s) in offsets.iter_mut().zip(&strides) {
                    *o -= s[i] * cards[i];
                }
                digits[i] = 0;
            }
        }
        Ok(Factor {
            scope: out_scope,
            cards: out_cards,
            values: out,
        })
    }
}

/// `Σ_{x ∈ cylinder(evidence)} Π_layers Π_i pot_i(x)`, eliminating the free
/// variables in index order.
pub(crate) fn cylinder_sum(
    net: &Network,
    layers: &[Layer],
    evidence: &PartialAssignment,
) -> Result<f64> {
    let mut factors: Vec<Factor> = layers
        .iter()
        .flat_map(|&layer| net.structure().var_ids().map(move |v| (layer, v)))
        .filter(|&(layer, v)| !net.potential(layer, v).is_identity())
        .map(|(layer, v)| Factor::from_potential(net, layer, v, evidence))
        .collect();
    let cap = net.state_cap();
    let cards = net.cards();
    let mut constant = 1.0;
    for v in net.structure().var_ids() {
        if evidence.get(v).is_some() {
            continue;
        }
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        if touching.is_empty() {
            constant *= cards[v.0] as f64;
            continue;
        }
        let f = Factor::product_sum_out(&touching, v, cards, cap)?;
        if f.scope.is_empty() {
            constant *= f.values[0];
        } else {
            factors.push(f);
        }
    }
    // what remains are potentials fully fixed by the evidence
    let fixed: f64 = factors
        .iter()
        .map(|f| {
            debug_assert!(f.scope.is_empty());
            f.values[0]
        })
        .product();
    Ok(constant * fixed)
}
