//! JSON documents for networks and Bayes networks, and the textual event and
//! variable-list syntax used by front ends.
//!
//! A network document looks like
//!
//! ```json
//! {
//!   "format": "eun/1",
//!   "variables": [{"name": "H", "domain": ["0", "1"], "reference": "0"}],
//!   "ordering": ["H"],
//!   "prob_arcs": [],
//!   "util_arcs": [],
//!   "q": {},
//!   "w": {"H": [{"value": "1", "given": {}, "ratio": 3.0}]}
//! }
//! ```
//!
//! A variable missing from `q`/`w` (or mapped to an empty list) has the
//! identity table. A non-empty table must list every non-reference entry;
//! reference entries may be omitted and are implied to be 1.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bayes::BayesNet;
use crate::error::{EunError, Result};
use crate::event::Event;
use crate::model::{
    BuildOptions, EunGraph, Layer, Network, Ordering, PotentialTable, Structure, VariableSpec,
};
use crate::space::{PartialAssignment, VarId};

pub const NETWORK_FORMAT: &str = "eun/1";
pub const BAYES_NET_FORMAT: &str = "eun-bn/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDoc {
    pub name: String,
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioRow {
    pub value: String,
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub format: String,
    pub variables: Vec<VariableDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<String>>,
    #[serde(default)]
    pub prob_arcs: Vec<(String, String)>,
    #[serde(default)]
    pub util_arcs: Vec<(String, String)>,
    #[serde(default)]
    pub q: BTreeMap<String, Vec<RatioRow>>,
    #[serde(default)]
    pub w: BTreeMap<String, Vec<RatioRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptRow {
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesNetDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub variables: Vec<VariableDoc>,
    #[serde(default)]
    pub dag_edges: Vec<(String, String)>,
    pub cpts: BTreeMap<String, Vec<CptRow>>,
}

fn schema(key: impl Into<String>, msg: impl Into<String>) -> EunError {
    EunError::Schema {
        key: key.into(),
        msg: msg.into(),
    }
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => schema(key, inner.to_string()),
            _ => EunError::Syntax {
                line: inner.line(),
                column: inner.column(),
                msg: inner.to_string(),
            },
        }
    })?;
    de.end().map_err(|e| EunError::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    Ok(value)
}

fn build_variables(docs: &[VariableDoc]) -> Result<Vec<VariableSpec>> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| {
            VariableSpec::new(
                d.name.clone(),
                d.domain.iter().cloned(),
                d.reference.as_deref(),
            )
            .map_err(|e| match e {
                EunError::UnknownValue { .. } => {
                    schema(format!("variables[{i}].reference"), e.to_string())
                }
                other => other,
            })
        })
        .collect()
}

fn lookup_name(names: &BTreeMap<&str, VarId>, name: &str, key: &str) -> Result<VarId> {
    names
        .get(name)
        .copied()
        .ok_or_else(|| schema(key, format!("undeclared variable `{name}`")))
}

fn add_arcs(
    graph: &mut EunGraph,
    layer: Layer,
    arcs: &[(String, String)],
    names: &BTreeMap<&str, VarId>,
    key: &str,
) -> Result<()> {
    for (k, (a, b)) in arcs.iter().enumerate() {
        let at = format!("{key}[{k}]");
        let a = lookup_name(names, a, &at)?;
        let b = lookup_name(names, b, &at)?;
        graph.add_arc(layer, a, b)?;
    }
    Ok(())
}

fn label_index(spec: &VariableSpec, label: &str, key: &str) -> Result<usize> {
    spec.value_index(label)
        .map_err(|_| schema(key, format!("`{}` has no value `{label}`", spec.name())))
}

fn build_table(
    structure: &Structure,
    names: &BTreeMap<&str, VarId>,
    layer: Layer,
    v: VarId,
    rows: Option<&Vec<RatioRow>>,
    key: &str,
) -> Result<PotentialTable> {
    let conditioning = structure.below(layer, v);
    let spec = structure.var(v);
    let card = spec.card();
    let cond_cards: Vec<usize> = conditioning
        .iter()
        .map(|u| structure.var(*u).card())
        .collect();
    let size = card * cond_cards.iter().product::<usize>();
    let rows = match rows {
        Some(r) if !r.is_empty() => r,
        _ => {
            return Ok(PotentialTable {
                conditioning,
                values: vec![1.0; size],
            })
        }
    };
    let mut values: Vec<Option<f64>> = vec![None; size];
    for (k, row) in rows.iter().enumerate() {
        let at = format!("{key}[{k}]");
        let x = label_index(spec, &row.value, &format!("{at}.value"))?;
        for name in row.given.keys() {
            let u = lookup_name(names, name, &format!("{at}.given.{name}"))?;
            if !conditioning.contains(&u) {
                return Err(schema(
                    format!("{at}.given.{name}"),
                    format!(
                        "`{name}` is not a lower {layer} neighbour of `{}`",
                        spec.name()
                    ),
                ));
            }
        }
        let mut offset = 0;
        for (u, c) in conditioning.iter().zip(&cond_cards) {
            let uname = structure.var(*u).name();
            let label = row.given.get(uname).ok_or_else(|| {
                schema(
                    format!("{at}.given"),
                    format!("missing conditioning variable `{uname}`"),
                )
            })?;
            offset =
                offset * c + label_index(structure.var(*u), label, &format!("{at}.given.{uname}"))?;
        }
        let slot = &mut values[offset * card + x];
        if slot.is_some() {
            return Err(schema(at, "duplicate entry"));
        }
        *slot = Some(row.ratio);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(k, value)| match value {
            Some(r) => Ok(r),
            None if k % card == spec.reference() => Ok(1.0),
            None => Err(schema(
                key,
                format!(
                    "missing entry for `{}` = `{}` in row {}",
                    spec.name(),
                    spec.domain()[k % card],
                    k / card
                ),
            )),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PotentialTable {
        conditioning,
        values,
    })
}

/// Validates a parsed document and assembles the network.
pub fn document_to_network(doc: &NetworkDocument, options: BuildOptions) -> Result<Network> {
    if doc.format != NETWORK_FORMAT {
        return Err(schema(
            "format",
            format!("expected `{NETWORK_FORMAT}`, got `{}`", doc.format),
        ));
    }
    let vars = build_variables(&doc.variables)?;
    let mut names = BTreeMap::new();
    for (i, v) in doc.variables.iter().enumerate() {
        if names.insert(v.name.as_str(), VarId(i)).is_some() {
            return Err(EunError::DuplicateVariable(v.name.clone()));
        }
    }
    let ordering = match &doc.ordering {
        None => Ordering::identity(vars.len()),
        Some(order) => Ordering::new(
            order
                .iter()
                .enumerate()
                .map(|(k, n)| lookup_name(&names, n, &format!("ordering[{k}]")))
                .collect::<Result<_>>()?,
        ),
    };
    let mut graph = EunGraph::new(vars.len());
    add_arcs(
        &mut graph,
        Layer::Probability,
        &doc.prob_arcs,
        &names,
        "prob_arcs",
    )?;
    add_arcs(
        &mut graph,
        Layer::Utility,
        &doc.util_arcs,
        &names,
        "util_arcs",
    )?;
    let structure = Structure::new(vars, ordering, graph)?;
    let mut layers = Vec::new();
    for (layer, tables, key) in [
        (Layer::Probability, &doc.q, "q"),
        (Layer::Utility, &doc.w, "w"),
    ] {
        for name in tables.keys() {
            lookup_name(&names, name, &format!("{key}.{name}"))?;
        }
        layers.push(
            structure
                .var_ids()
                .map(|v| {
                    let name = structure.var(v).name();
                    build_table(
                        &structure,
                        &names,
                        layer,
                        v,
                        tables.get(name),
                        &format!("{key}.{name}"),
                    )
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let util = layers.pop().expect("two layers");
    let prob = layers.pop().expect("two layers");
    Network::new(structure, prob, util, options)
}

pub fn parse_network(text: &str, options: BuildOptions) -> Result<Network> {
    document_to_network(&from_json(text)?, options)
}

/// Document describing `net`. Reference entries and identity tables are left
/// out; everything else is written at full precision.
pub fn network_to_document(net: &Network) -> NetworkDocument {
    let s = net.structure();
    let name = |v: VarId| s.var(v).name().to_string();
    let tables = |layer: Layer| {
        net.potentials(layer)
            .iter()
            .filter(|p| !p.is_identity())
            .map(|p| {
                let spec = s.var(p.var());
                let card = spec.card();
                let cond_cards: Vec<usize> =
                    p.conditioning().iter().map(|u| s.var(*u).card()).collect();
                let rows = p
                    .values()
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| k % card != spec.reference())
                    .map(|(k, &ratio)| {
                        let mut row = k / card;
                        let mut given = BTreeMap::new();
                        for (u, c) in p.conditioning().iter().zip(&cond_cards).rev() {
                            given.insert(name(*u), s.var(*u).domain()[row % c].clone());
                            row /= c;
                        }
                        RatioRow {
                            value: spec.domain()[k % card].clone(),
                            given,
                            ratio,
                        }
                    })
                    .collect();
                (name(p.var()), rows)
            })
            .collect()
    };
    let arcs = |layer: Layer| {
        net.graph()
            .arcs(layer)
            .into_iter()
            .map(|(a, b)| (name(a), name(b)))
            .collect()
    };
    NetworkDocument {
        format: NETWORK_FORMAT.to_string(),
        variables: s
            .vars()
            .iter()
            .map(|v| VariableDoc {
                name: v.name().to_string(),
                domain: v.domain().to_vec(),
                reference: Some(v.domain()[v.reference()].clone()),
            })
            .collect(),
        ordering: Some(s.ordering().as_slice().iter().map(|v| name(*v)).collect()),
        prob_arcs: arcs(Layer::Probability),
        util_arcs: arcs(Layer::Utility),
        q: tables(Layer::Probability),
        w: tables(Layer::Utility),
    }
}

pub fn serialize_network(net: &Network) -> String {
    let mut text = serde_json::to_string_pretty(&network_to_document(net))
        .expect("network documents always serialize");
    text.push('\n');
    text
}

pub fn document_to_bayes_net(doc: &BayesNetDocument) -> Result<BayesNet> {
    if let Some(f) = &doc.format {
        if f != BAYES_NET_FORMAT {
            return Err(schema(
                "format",
                format!("expected `{BAYES_NET_FORMAT}`, got `{f}`"),
            ));
        }
    }
    let vars = build_variables(&doc.variables)?;
    let mut names = BTreeMap::new();
    for (i, v) in doc.variables.iter().enumerate() {
        if names.insert(v.name.as_str(), VarId(i)).is_some() {
            return Err(EunError::DuplicateVariable(v.name.clone()));
        }
    }
    let mut edges = Vec::with_capacity(doc.dag_edges.len());
    let mut parents = vec![Vec::new(); vars.len()];
    for (k, (from, to)) in doc.dag_edges.iter().enumerate() {
        let at = format!("dag_edges[{k}]");
        let (a, b) = (
            lookup_name(&names, from, &at)?,
            lookup_name(&names, to, &at)?,
        );
        edges.push((a, b));
        if a != b && !parents[b.0].contains(&a) {
            parents[b.0].push(a);
        }
    }
    for name in doc.cpts.keys() {
        lookup_name(&names, name, &format!("cpts.{name}"))?;
    }
    let mut cpts = Vec::with_capacity(vars.len());
    for (i, spec) in vars.iter().enumerate() {
        let key = format!("cpts.{}", spec.name());
        let rows = doc
            .cpts
            .get(spec.name())
            .ok_or_else(|| schema(&key, "missing CPT"))?;
        let ps = &mut parents[i];
        ps.sort();
        let pcards: Vec<usize> = ps.iter().map(|p| vars[p.0].card()).collect();
        let nrows: usize = pcards.iter().product();
        let mut table: Vec<Option<&[f64]>> = vec![None; nrows];
        for (k, row) in rows.iter().enumerate() {
            let at = format!("{key}[{k}]");
            for pname in row.given.keys() {
                let u = lookup_name(&names, pname, &format!("{at}.given.{pname}"))?;
                if !ps.contains(&u) {
                    return Err(schema(
                        format!("{at}.given.{pname}"),
                        format!("`{pname}` is not a parent of `{}`", spec.name()),
                    ));
                }
            }
            let mut r = 0;
            for (p, c) in ps.iter().zip(&pcards) {
                let pname = vars[p.0].name();
                let label = row.given.get(pname).ok_or_else(|| {
                    schema(format!("{at}.given"), format!("missing parent `{pname}`"))
                })?;
                r = r * c + label_index(&vars[p.0], label, &format!("{at}.given.{pname}"))?;
            }
            if row.probs.len() != spec.card() {
                return Err(schema(
                    format!("{at}.probs"),
                    format!(
                        "expected {} probabilities, got {}",
                        spec.card(),
                        row.probs.len()
                    ),
                ));
            }
            if table[r].replace(&row.probs).is_some() {
                return Err(schema(at, "duplicate parent configuration"));
            }
        }
        let mut flat = Vec::with_capacity(nrows * spec.card());
        for (r, row) in table.iter().enumerate() {
            let row = row
                .ok_or_else(|| schema(&key, format!("missing row for parent configuration {r}")))?;
            flat.extend_from_slice(row);
        }
        cpts.push(flat);
    }
    BayesNet::new(vars, &edges, cpts)
}

pub fn parse_bayes_net(text: &str) -> Result<BayesNet> {
    document_to_bayes_net(&from_json(text)?)
}

/// Parses a Bayes-net document and converts it to a network with an empty
/// utility layer.
pub fn bn_to_eun(text: &str, options: BuildOptions) -> Result<Network> {
    parse_bayes_net(text)?.to_network(options)
}

/// Parses `Var=value,Var=value` into a partial assignment.
pub fn parse_assignment(structure: &Structure, text: &str) -> Result<PartialAssignment> {
    let mut partial = PartialAssignment::new();
    if text.trim().is_empty() {
        return Err(EunError::InvalidArgument("empty event".into()));
    }
    for term in text.split(',') {
        let (name, label) = term.split_once('=').ok_or_else(|| {
            EunError::InvalidArgument(format!(
                "event term `{}` is not of the form Var=value",
                term.trim()
            ))
        })?;
        let (name, label) = (name.trim(), label.trim());
        let v = structure.lookup(name)?;
        let x = structure.var(v).value_index(label)?;
        if partial.get(v).is_some() {
            return Err(EunError::InvalidArgument(format!(
                "variable `{name}` assigned twice"
            )));
        }
        partial.set(v, x);
    }
    Ok(partial)
}

/// Parses a cylinder event in `Var=value,...` form.
pub fn parse_event(structure: &Structure, text: &str) -> Result<Event> {
    parse_assignment(structure, text).map(Event::Cylinder)
}

/// Parses a comma-separated variable list; an empty string is the empty set.
pub fn parse_vars(structure: &Structure, text: &str) -> Result<Vec<VarId>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|n| structure.lookup(n.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;

    const HW2: &str = r#"{
      "format": "eun/1",
      "variables": [
        {"name": "H", "domain": ["0", "1"]},
        {"name": "W", "domain": ["0", "1"]}
      ],
      "ordering": ["H", "W"],
      "prob_arcs": [],
      "util_arcs": [["H", "W"]],
      "q": {},
      "w": {
        "H": [{"value": "1", "ratio": 3.0}],
        "W": [
          {"value": "1", "given": {"H": "0"}, "ratio": 2.0},
          {"value": "1", "given": {"H": "1"}, "ratio": 1.3333333333333333}
        ]
      }
    }"#;

    #[test]
    fn minimal_document_is_uniform() {
        let text = r#"{"format": "eun/1",
            "variables": [{"name": "A", "domain": ["a", "b"]}, {"name": "B", "domain": ["x", "y", "z"]}],
            "ordering": ["A", "B"], "prob_arcs": [], "util_arcs": [], "q": {}, "w": {}}"#;
        let net = parse_network(text, BuildOptions::default()).unwrap();
        let joint = net.reconstruct_joint().unwrap();
        assert!(joint
            .p
            .values()
            .iter()
            .all(|&p| (p - 1.0 / 6.0).abs() < 1e-15));
        assert!(joint.u.values().iter().all(|&u| u == 1.0));
    }

    #[test]
    fn health_wealth_document() {
        let net = parse_network(HW2, BuildOptions::default()).unwrap();
        let u = net.reconstruct_joint().unwrap().u;
        for (got, want) in u.values().iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let net = parse_network(HW2, BuildOptions::default()).unwrap();
        let again = parse_network(&serialize_network(&net), BuildOptions::default()).unwrap();
        for layer in Layer::BOTH {
            for (a, b) in net.potentials(layer).iter().zip(again.potentials(layer)) {
                let bits = |p: &[f64]| p.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(a.values()), bits(b.values()));
            }
        }
        assert_eq!(serialize_network(&net), serialize_network(&again));
    }

    #[test]
    fn undeclared_neighbour_names_the_key() {
        let text = HW2.replace(r#""given": {"H": "0"}"#, r#""given": {"Z": "0"}"#);
        match parse_network(&text, BuildOptions::default()) {
            Err(EunError::Schema { key, .. }) => assert_eq!(key, "w.W[0].given.Z"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_syntax_errors() {
        let text = HW2.replace(r#""q": {}"#, r#""q": {}, "extra": 1"#);
        match parse_network(&text, BuildOptions::default()) {
            Err(EunError::Schema { msg, .. }) => assert!(msg.contains("extra")),
            other => panic!("unexpected {other:?}"),
        }
        match parse_network("{\n  \"format\": ", BuildOptions::default()) {
            Err(EunError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let wrong = HW2.replace("eun/1", "eun/2");
        assert!(matches!(
            parse_network(&wrong, BuildOptions::default()),
            Err(EunError::Schema { key, .. }) if key == "format"
        ));
    }

    #[test]
    fn incomplete_table_is_rejected() {
        let text = HW2.replace(r#"{"value": "1", "given": {"H": "0"}, "ratio": 2.0},"#, "");
        assert!(matches!(
            parse_network(&text, BuildOptions::default()),
            Err(EunError::Schema { key, .. }) if key == "w.W"
        ));
    }

    #[test]
    fn non_positive_ratio_is_a_validation_error() {
        let text = HW2.replace("3.0", "-1.0");
        let err = parse_network(&text, BuildOptions::default()).unwrap_err();
        assert_eq!(err.kind(), ErrorKind::Validation);
        assert!(err.to_string().contains("non-positive potential"));
    }

    #[test]
    fn bayes_net_import() {
        let text = r#"{
          "variables": [{"name": "X", "domain": ["0", "1"]}, {"name": "Y", "domain": ["0", "1"]}],
          "dag_edges": [["X", "Y"]],
          "cpts": {
            "X": [{"probs": [0.6, 0.4]}],
            "Y": [{"given": {"X": "0"}, "probs": [0.8, 0.2]},
                  {"given": {"X": "1"}, "probs": [0.3, 0.7]}]
          }
        }"#;
        let net = bn_to_eun(text, BuildOptions::default()).unwrap();
        assert_eq!(
            net.graph().arcs(Layer::Probability),
            vec![(VarId(0), VarId(1))]
        );
        let q = net.potential(Layer::Probability, VarId(1));
        assert!((q.values()[3] - 0.7 / 0.3).abs() < 1e-12);
        let missing = text
            .replace(r#"{"given": {"X": "1"}, "probs": [0.3, 0.7]}"#, "")
            .replace("0.2]},", "0.2]}");
        assert!(matches!(
            bn_to_eun(&missing, BuildOptions::default()),
            Err(EunError::Schema { key, .. }) if key == "cpts.Y"
        ));
    }

    #[test]
    fn events_and_variable_lists() {
        let net = parse_network(HW2, BuildOptions::default()).unwrap();
        let s = net.structure();
        let e = parse_event(s, "H=1, W=0").unwrap();
        assert_eq!(
            e,
            Event::cylinder(PartialAssignment::new().with(VarId(0), 1).with(VarId(1), 0))
        );
        assert!(matches!(
            parse_event(s, "Q=1"),
            Err(EunError::UnknownVariable(_))
        ));
        assert!(matches!(
            parse_event(s, "H=7"),
            Err(EunError::UnknownValue { .. })
        ));
        assert!(parse_event(s, "H").is_err());
        assert!(parse_event(s, "H=1,H=1").is_err());
        assert!(parse_event(s, "").is_err());
        assert_eq!(parse_vars(s, "W,H").unwrap(), vec![VarId(1), VarId(0)]);
        assert!(parse_vars(s, "").unwrap().is_empty());
    }
}
