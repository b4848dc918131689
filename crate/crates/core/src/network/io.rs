use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Context, Network, NetworkError, NodeId, TimeoutTable};
use crate::bitset::BitSet;
use crate::syntax::{parse, ConnectiveDef, ConnectiveTable, Dir, Formula};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeDoc {
    pub id: NodeId,
    /// Closure indices of the label.
    pub atom: Vec<usize>,
}

/// Self-contained JSON form of a network: the formula whose closure labels
/// it, the connectives that formula uses, and the graph.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NetworkDoc {
    pub formula: String,
    #[serde(default)]
    pub defs: Vec<ConnectiveDef>,
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<[NodeId; 2]>,
    #[serde(rename = "satF", default)]
    pub sat_f: Vec<NodeId>,
    #[serde(rename = "satP", default)]
    pub sat_p: Vec<NodeId>,
}

impl NetworkDoc {
    pub fn new(net: &Network, ctx: &Context) -> NetworkDoc {
        let origin = ctx.sigma.origin();
        NetworkDoc {
            formula: origin.to_string(),
            defs: origin
                .connectives()
                .values()
                .map(|c| ConnectiveDef {
                    name: c.name().to_string(),
                    arity: c.arity(),
                    body: c.body().to_string(),
                })
                .collect(),
            nodes: net
                .labels()
                .iter()
                .map(|(&id, a)| NodeDoc { id, atom: a.to_vec() })
                .collect(),
            edges: net.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            sat_f: net.saturated(Dir::F).iter().copied().collect(),
            sat_p: net.saturated(Dir::B).iter().copied().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<NetworkDoc, NetworkError> {
        serde_json::from_str(text).map_err(|e| NetworkError::Format(e.to_string()))
    }

    /// Rebuilds the closure and the network. Labels are taken as given;
    /// whether they are atoms is for [`Network::validate`] to say.
    pub fn load(&self) -> Result<(Context, Network), NetworkError> {
        let mut table = ConnectiveTable::new();
        for d in &self.defs {
            table.define(&d.name, d.arity, &d.body)?;
        }
        let phi: Formula = parse(&self.formula, &table)?;
        let ctx = Context::new(&phi)?;
        let n = ctx.sigma.len();
        let mut net = Network::new();
        for node in &self.nodes {
            if let Some(&i) = node.atom.iter().find(|&&i| i >= n) {
                return Err(NetworkError::Format(format!(
                    "node {}: closure index {i} out of range",
                    node.id
                )));
            }
            if net.contains(node.id) {
                return Err(NetworkError::Format(format!("node {} listed twice", node.id)));
            }
            net.add_node(node.id, BitSet::from_indices(n, node.atom.iter().copied()));
        }
        let known = |u: &NodeId| -> Result<NodeId, NetworkError> {
            if net.contains(*u) {
                Ok(*u)
            } else {
                Err(NetworkError::Format(format!("unknown node {u}")))
            }
        };
        let mut edges = Vec::new();
        for [u, v] in &self.edges {
            edges.push((known(u)?, known(v)?));
        }
        let (mut sf, mut sp) = (Vec::new(), Vec::new());
        for u in &self.sat_f {
            sf.push(known(u)?);
        }
        for u in &self.sat_p {
            sp.push(known(u)?);
        }
        for (u, v) in edges {
            net.add_edge(u, v);
        }
        for u in sf {
            net.mark_saturated(Dir::F, u);
        }
        for u in sp {
            net.mark_saturated(Dir::B, u);
        }
        Ok((ctx, net))
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Nodes in `S_F` get a double border, nodes in `S_P` a
/// grey fill; each node lists its foci and marks the unfinished ones.
pub fn to_dot(net: &Network, ctx: &Context, timeouts: &TimeoutTable) -> String {
    let mut foci: BTreeMap<NodeId, Vec<String>> = BTreeMap::new();
    for ((u, d), t) in timeouts.iter() {
        if !ctx.table.is_focus(d) {
            continue;
        }
        let sharp = ctx.sigma.formula(ctx.table.host(d).sigma_index);
        let mark = match t {
            Some(k) => format!("{sharp} : {k}"),
            None => format!("{sharp} : unfinished"),
        };
        foci.entry(u).or_default().push(mark);
    }
    let mut out = String::from("digraph network {\n  node [shape=box, fontname=\"monospace\"];\n");
    for u in net.nodes() {
        let mut label = format!("{u}");
        for f in foci.get(&u).into_iter().flatten() {
            label.push_str("\\n");
            label.push_str(&escape(f));
        }
        let mut attrs = vec![format!("label=\"{label}\"")];
        if net.is_saturated(Dir::F, u) {
            attrs.push("peripheries=2".into());
        }
        if net.is_saturated(Dir::B, u) {
            attrs.push("style=filled, fillcolor=lightgrey".into());
        }
        let _ = writeln!(out, "  n{u} [{}];", attrs.join(", "));
    }
    for (u, v) in net.edges() {
        let _ = writeln!(out, "  n{u} -> n{v};");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::atoms;
    use crate::network::compute_timeouts;

    #[test]
    fn json_round_trip() {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        let ctx = Context::new(&parse("#r(p) & <B>q", &t).unwrap()).unwrap();
        let all = atoms(&ctx.sigma);
        let mut net = Network::singleton(3, all[0].clone());
        net.add_node(7, all[1].clone());
        net.add_edge(3, 7);
        net.mark_saturated(Dir::B, 3);
        let doc = NetworkDoc::new(&net, &ctx);
        let back = NetworkDoc::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let (ctx2, net2) = back.load().unwrap();
        assert_eq!(net2, net);
        assert_eq!(ctx2.sigma.formulas(), ctx.sigma.formulas());
        let dot = to_dot(&net, &ctx, &compute_timeouts(&net, &ctx));
        assert!(dot.contains("n3 -> n7;"));
        assert!(dot.contains("fillcolor=lightgrey"));
    }

    #[test]
    fn rejects_unknown_nodes() {
        let text = r#"{"formula":"p","nodes":[{"id":0,"atom":[]}],"edges":[[0,1]]}"#;
        let doc = NetworkDoc::from_json(text).unwrap();
        assert!(matches!(doc.load(), Err(NetworkError::Format(_))));
    }
}
