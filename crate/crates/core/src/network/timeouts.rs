use std::collections::BTreeMap;

use serde::Serialize;

use super::{Context, Network, NodeId};
use crate::closure::Host;
use crate::syntax::{Dir, NodeKind};

const INF: u32 = u32::MAX;

/// Timeouts of the deferrals active at each node: `Some(k)` if finished in
/// `k` steps (and not fewer), `None` for a μ-defect.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimeoutTable {
    entries: BTreeMap<(NodeId, usize), Option<u32>>,
}

impl TimeoutTable {
    /// `None` if the deferral is not active at the node.
    pub fn get(&self, u: NodeId, d: usize) -> Option<Option<u32>> {
        self.entries.get(&(u, d)).copied()
    }

    /// Timeout if the deferral is active and finished.
    pub fn finished(&self, u: NodeId, d: usize) -> Option<u32> {
        self.get(u, d).flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, usize), Option<u32>)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Active deferrals that are not eventually finished.
    pub fn unfinished(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.entries.iter().filter(|(_, v)| v.is_none()).map(|(&k, _)| k)
    }
}

struct Solver<'a> {
    net: &'a Network,
    ctx: &'a Context,
    values: BTreeMap<(NodeId, usize), u32>,
}

impl Solver<'_> {
    fn value(&self, u: NodeId, d: usize) -> u32 {
        self.values.get(&(u, d)).copied().unwrap_or(INF)
    }

    /// Cost of tree node `c` of `host` at `u`: infinite unless its instance
    /// is in the label, zero for nodes that are not deferrals.
    fn child(&self, host: &Host, c: usize, u: NodeId) -> u32 {
        if !host.judges[c].holds(self.net.label(u)) {
            return INF;
        }
        match host.deferral_of[c] {
            None => 0,
            Some(e) => self.value(u, e),
        }
    }

    fn step(&self, u: NodeId, d: usize) -> u32 {
        let def = &self.ctx.table.deferrals[d];
        let host = &self.ctx.table.hosts[def.host];
        let label = self.net.label(u);
        match &host.tree.node(def.node).kind {
            NodeKind::X => {
                if label.contains(host.bottom) {
                    0
                } else {
                    let root = host.deferral_of[host.tree.root()].expect("body contains x");
                    self.value(u, root).saturating_add(1)
                }
            }
            NodeKind::Or(a, b) => self.child(host, *a, u).min(self.child(host, *b, u)),
            NodeKind::And(theta, rest) => {
                if host.judges[*theta].holds(label) {
                    self.child(host, *rest, u)
                } else {
                    INF
                }
            }
            NodeKind::Nabla(dir, parts) => {
                if !self.net.is_saturated(*dir, u) {
                    return INF;
                }
                let nb: Vec<NodeId> = self.net.neighbours(u, *dir).iter().copied().collect();
                let cost: Vec<Vec<u32>> = nb
                    .iter()
                    .map(|&v| parts.iter().map(|&g| self.child(host, g, v)).collect())
                    .collect();
                // least k admitting a full relation: every neighbour and every
                // part needs a partner of cost at most k
                let rows = cost
                    .iter()
                    .map(|r| r.iter().copied().min().unwrap_or(INF))
                    .max()
                    .unwrap_or(0);
                let cols = (0..parts.len())
                    .map(|j| cost.iter().map(|r| r[j]).min().unwrap_or(INF))
                    .max()
                    .unwrap_or(0);
                rows.max(cols)
            }
            NodeKind::Free => 0,
        }
    }
}

/// Least timeouts of every active deferral, by iterating the clauses of
/// "finished in k steps" from all-unfinished until nothing changes. Values
/// above `|nodes| · d + 1` are treated as unfinished.
pub fn compute_timeouts(net: &Network, ctx: &Context) -> TimeoutTable {
    let mut keys = Vec::new();
    for (&u, label) in net.labels() {
        for d in 0..ctx.table.len() {
            if ctx.table.active(d, label) {
                keys.push((u, d));
            }
        }
    }
    let cap = (net.len() * ctx.table.len() + 1) as u32;
    let mut solver = Solver {
        net,
        ctx,
        values: BTreeMap::new(),
    };
    loop {
        let mut changed = false;
        for &(u, d) in &keys {
            let v = solver.step(u, d);
            if v <= cap && v < solver.value(u, d) {
                solver.values.insert((u, d), v);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    TimeoutTable {
        entries: keys.into_iter().map(|k| (k, solver.values.get(&k).copied())).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectKind {
    #[serde(rename = "diaF")]
    DiaF,
    #[serde(rename = "diaB")]
    DiaB,
    Mu,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Defect {
    pub node: NodeId,
    pub kind: DefectKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deferral: Option<usize>,
}

/// Nodes outside `S_F`, nodes outside `S_P` and unfinished active
/// deferrals, ordered by node.
pub fn find_defects(net: &Network, ctx: &Context) -> Vec<Defect> {
    defects_with(net, &compute_timeouts(net, ctx))
}

pub(crate) fn defects_with(net: &Network, timeouts: &TimeoutTable) -> Vec<Defect> {
    let mut out = Vec::new();
    for u in net.nodes() {
        if !net.is_saturated(Dir::F, u) {
            out.push(Defect {
                node: u,
                kind: DefectKind::DiaF,
                deferral: None,
            });
        }
        if !net.is_saturated(Dir::B, u) {
            out.push(Defect {
                node: u,
                kind: DefectKind::DiaB,
                deferral: None,
            });
        }
    }
    for (u, d) in timeouts.unfinished() {
        out.push(Defect {
            node: u,
            kind: DefectKind::Mu,
            deferral: Some(d),
        });
    }
    out.sort();
    out
}
