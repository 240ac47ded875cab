//! Independence queries: graph separation, ratio-invariance tests on tables,
//! perfect-map derivation and conditional expected-utility independence.

use std::collections::VecDeque;

use crate::error::{EunError, Result};
use crate::event::Event;
use crate::inference::eu_product_terms;
use crate::model::{EunGraph, ImapStatus, Layer, Network};
use crate::space::VarId;
use crate::table::{rel_eq, JointTable};

fn check_sets(n: usize, sets: &[(&'static str, &[VarId], bool)]) -> Result<Vec<bool>> {
    let mut seen = vec![false; n];
    for &(name, set, required) in sets {
        if required && set.is_empty() {
            return Err(EunError::EmptySet(name));
        }
        for v in set {
            if v.0 >= n {
                return Err(EunError::UnknownVariable(v.to_string()));
            }
            if seen[v.0] {
                return Err(EunError::OverlappingSets(v.to_string()));
            }
            seen[v.0] = true;
        }
    }
    Ok(seen)
}

fn check_partition(net: &Network, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<()> {
    let seen = check_sets(
        net.num_vars(),
        &[("A", a, true), ("B", b, true), ("C", c, false)],
    )?;
    match seen.iter().position(|s| !s) {
        Some(i) => Err(EunError::NotPartition(net.var(VarId(i)).name().to_string())),
        None => Ok(()),
    }
}

/// Whether every path from `a` to `b` in the layer's subgraph passes through
/// `c`.
pub fn separates(
    graph: &EunGraph,
    layer: Layer,
    a: &[VarId],
    b: &[VarId],
    c: &[VarId],
) -> Result<bool> {
    let n = graph.num_vars();
    check_sets(n, &[("A", a, true), ("B", b, true), ("C", c, false)])?;
    let mut blocked = vec![false; n];
    for v in c {
        blocked[v.0] = true;
    }
    let mut target = vec![false; n];
    for v in b {
        target[v.0] = true;
    }
    let mut visited = vec![false; n];
    let mut queue: VecDeque<VarId> = a.iter().copied().collect();
    for v in a {
        visited[v.0] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &u in graph.neighbors(layer, v) {
            if target[u.0] {
                return Ok(false);
            }
            if !blocked[u.0] && !visited[u.0] {
                visited[u.0] = true;
                queue.push_back(u);
            }
        }
    }
    Ok(true)
}

/// Separation in the given layer for a partition `(A, B, C)` of the network's
/// variables. On a network that passes the Markov check this is exactly
/// p-independence (probability layer) or u-independence (utility layer).
pub fn declared_independent(
    net: &Network,
    layer: Layer,
    a: &[VarId],
    b: &[VarId],
    c: &[VarId],
) -> Result<bool> {
    check_partition(net, a, b, c)?;
    separates(net.graph(), layer, a, b, c)
}

/// Whether the ceteris-paribus ratio `T(x_M, x_rest) / T(x⁰_M, x_rest)` depends
/// on `x_K` only, i.e. is invariant (within relative `tolerance`) to the
/// variables outside `M ∪ K`. With `(M, B, K)` a partition this is the
/// statement "M is independent of B given K" for the table's layer.
pub fn table_independent(
    table: &JointTable,
    m: &[VarId],
    k: &[VarId],
    tolerance: f64,
) -> Result<bool> {
    let space = table.space();
    let seen = check_sets(space.num_vars(), &[("M", m, false), ("K", k, false)])?;
    let varying: Vec<VarId> = (0..space.num_vars())
        .filter(|&i| !seen[i])
        .map(VarId)
        .collect();
    if m.is_empty() || varying.is_empty() {
        return Ok(true);
    }
    for idx in 0..space.len() {
        let anchor = space.with_reference(idx, &varying);
        if anchor == idx {
            continue;
        }
        if !rel_eq(table.ratio(idx, m), table.ratio(anchor, m), tolerance) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Independence of `A` and `B` given `C` for arbitrary disjoint sets: holds
/// iff the remaining variables can be split between the two sides so that the
/// resulting partition satisfies [`table_independent`]. For partitions this
/// coincides with `table_independent(A, C)`.
pub fn generalized_independent(
    table: &JointTable,
    a: &[VarId],
    b: &[VarId],
    c: &[VarId],
    tolerance: f64,
) -> Result<bool> {
    let n = table.space().num_vars();
    let seen = check_sets(n, &[("A", a, true), ("B", b, true), ("C", c, false)])?;
    let rest: Vec<VarId> = (0..n).filter(|&i| !seen[i]).map(VarId).collect();
    if rest.len() >= usize::BITS as usize - 1 {
        return Err(EunError::InvalidArgument(
            "too many remaining variables".into(),
        ));
    }
    for mask in 0..(1usize << rest.len()) {
        let mut side: Vec<VarId> = a.to_vec();
        side.extend(
            rest.iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, v)| *v),
        );
        if table_independent(table, &side, c, tolerance)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether the ratio of `i` changes with `x_j` while everything else is held.
fn interacts(table: &JointTable, i: VarId, j: VarId, tolerance: f64) -> bool {
    let space = table.space();
    let reference = space.reference()[j.0];
    (0..space.len()).any(|idx| {
        space.digit(idx, j) != reference
            && !rel_eq(
                table.ratio(idx, &[i]),
                table.ratio(space.with_value(idx, j, reference), &[i]),
                tolerance,
            )
    })
}

/// Graph whose separation relation reproduces the tables' independencies:
/// arc `{i, j}` in a layer iff the ceteris-paribus ratio of `i` varies with
/// `x_j` for some configuration.
pub fn derive_perfect_map(p: &JointTable, u: &JointTable, tolerance: f64) -> Result<EunGraph> {
    if p.space() != u.space() {
        return Err(EunError::InvalidArgument(
            "probability and utility tables live on different state spaces".into(),
        ));
    }
    let n = p.space().num_vars();
    let mut graph = EunGraph::new(n);
    for (layer, table) in [(Layer::Probability, p), (Layer::Utility, u)] {
        for i in 0..n {
            for j in i + 1..n {
                if interacts(table, VarId(i), VarId(j), tolerance) {
                    graph.add_arc(layer, VarId(i), VarId(j))?;
                }
            }
        }
    }
    Ok(graph)
}

/// Separation of `A` from `B` by `C` in both layers, the graphical condition
/// under which `A` and `B` are conditionally EU independent given `C`.
/// `false` means independence is not guaranteed by the graph, not that the
/// sets are dependent.
pub fn eu_independent_vars(net: &Network, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<bool> {
    check_partition(net, a, b, c)?;
    if let ImapStatus::Violated { violations } = net.imap_status() {
        return Err(EunError::NotMarkov { violations });
    }
    for layer in Layer::BOTH {
        if !separates(net.graph(), layer, a, b, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Numerical check of `u(E ∩ F | G) = u(E | G) · u(F | G)`.
pub fn eu_independent_events(
    net: &Network,
    e: &Event,
    f: &Event,
    g: &Event,
    tolerance: f64,
) -> Result<bool> {
    let (joint, ue, uf) = eu_product_terms(net, e, f, g)?;
    Ok(rel_eq(joint, ue * uf, tolerance))
}
