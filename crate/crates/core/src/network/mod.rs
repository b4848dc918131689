//! Networks: finite labelled DAGs over closure atoms with saturation sets,
//! their structural algebra, amalgamation, deferral timeouts and defects.

mod amalgam;
mod io;
mod timeouts;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::closure::{coherent, deferral_table, fl_closure, is_atom, Atom, ClosureError, ClosureSet, DeferralTable};
use crate::syntax::{Dir, Formula, SyntaxError};

pub use amalgam::amalgamate;
pub use io::{to_dot, NetworkDoc, NodeDoc};
pub(crate) use timeouts::defects_with;
pub use timeouts::{compute_timeouts, find_defects, Defect, DefectKind, TimeoutTable};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("node {0} carries different labels in the networks being joined")]
    LabelClash(NodeId),
    #[error("amalgamation precondition {bullet} fails: {detail}")]
    Precondition { bullet: usize, detail: String },
    #[error("amalgamation postcondition fails: {0}")]
    Postcondition(String),
    #[error("invalid network document: {0}")]
    Format(String),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// The closure set and deferral table a network is labelled over.
#[derive(Clone, Debug)]
pub struct Context {
    pub sigma: ClosureSet,
    pub table: DeferralTable,
}

impl Context {
    pub fn new(phi: &Formula) -> Result<Context, ClosureError> {
        let sigma = fl_closure(phi);
        let table = deferral_table(&sigma)?;
        Ok(Context { sigma, table })
    }

    /// Number of same-label witnesses each diamond needs at a saturated
    /// node: the deferral count, at least one.
    pub fn copies(&self) -> usize {
        self.table.copies()
    }
}

/// A condition of the network definition that fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Cycle,
    NotAnAtom(NodeId),
    Incoherent(NodeId, NodeId),
    /// A saturated node lacking private same-label witnesses for the
    /// diamond at closure index `formula`.
    Unsaturated {
        node: NodeId,
        dir: Dir,
        formula: usize,
    },
}

impl Violation {
    pub fn describe(&self, ctx: &Context) -> String {
        match self {
            Violation::Unsaturated { node, dir, formula } => format!(
                "node {node} is in S_{} but lacks {} same-label witnesses for {}",
                if *dir == Dir::F { "F" } else { "P" },
                ctx.copies(),
                ctx.sigma.formula(*formula)
            ),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle => write!(f, "the edge relation has a cycle"),
            Violation::NotAnAtom(u) => write!(f, "label of node {u} is not an atom"),
            Violation::Incoherent(u, v) => write!(f, "edge {u} -> {v} violates label coherence"),
            Violation::Unsaturated { node, dir, formula } => {
                let s = if *dir == Dir::F { "F" } else { "P" };
                write!(f, "node {node} is in S_{s} but diamond #{formula} lacks witnesses")
            }
        }
    }
}

/// A finite labelled graph with saturation sets `S_F` and `S_P`. Without the
/// saturation conditions this is a prenetwork; [`Network::validate`] checks
/// all conditions against a [`Context`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Network {
    labels: BTreeMap<NodeId, Atom>,
    succ: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pred: BTreeMap<NodeId, BTreeSet<NodeId>>,
    sat_f: BTreeSet<NodeId>,
    sat_p: BTreeSet<NodeId>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(u: NodeId, atom: Atom) -> Self {
        let mut n = Network::new();
        n.add_node(u, atom);
        n
    }

    /// Adds `u` with the given label. Re-adding with the same label is a
    /// no-op; a different label panics.
    pub fn add_node(&mut self, u: NodeId, atom: Atom) {
        if let Some(old) = self.labels.get(&u) {
            assert_eq!(old, &atom, "node {u} relabelled");
            return;
        }
        self.labels.insert(u, atom);
        self.succ.insert(u, BTreeSet::new());
        self.pred.insert(u, BTreeSet::new());
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) {
        assert!(
            self.contains(u) && self.contains(v),
            "edge {u} -> {v} between unknown nodes"
        );
        self.succ.get_mut(&u).unwrap().insert(v);
        self.pred.get_mut(&v).unwrap().insert(u);
    }

    pub fn mark_saturated(&mut self, dir: Dir, u: NodeId) {
        assert!(self.contains(u));
        match dir {
            Dir::F => self.sat_f.insert(u),
            Dir::B => self.sat_p.insert(u),
        };
    }

    pub fn is_saturated(&self, dir: Dir, u: NodeId) -> bool {
        self.saturated(dir).contains(&u)
    }

    /// `S_F` for `F`, `S_P` for `B`.
    pub fn saturated(&self, dir: Dir) -> &BTreeSet<NodeId> {
        match dir {
            Dir::F => &self.sat_f,
            Dir::B => &self.sat_p,
        }
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.labels.contains_key(&u)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels.keys().copied()
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.labels.keys().copied().collect()
    }

    pub fn label(&self, u: NodeId) -> &Atom {
        &self.labels[&u]
    }

    pub fn labels(&self) -> &BTreeMap<NodeId, Atom> {
        &self.labels
    }

    pub fn successors(&self, u: NodeId) -> &BTreeSet<NodeId> {
        &self.succ[&u]
    }

    pub fn predecessors(&self, u: NodeId) -> &BTreeSet<NodeId> {
        &self.pred[&u]
    }

    /// Successors for `F`, predecessors for `B`.
    pub fn neighbours(&self, u: NodeId, dir: Dir) -> &BTreeSet<NodeId> {
        match dir {
            Dir::F => &self.succ[&u],
            Dir::B => &self.pred[&u],
        }
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.succ
            .iter()
            .flat_map(|(&u, vs)| vs.iter().map(move |&v| (u, v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.values().map(BTreeSet::len).sum()
    }

    /// Smallest id larger than every node.
    pub fn next_id(&self) -> NodeId {
        self.labels.keys().next_back().map_or(0, |&u| u + 1)
    }

    pub fn is_head(&self, u: NodeId) -> bool {
        self.succ[&u].is_empty()
    }

    pub fn is_tail(&self, u: NodeId) -> bool {
        self.pred[&u].is_empty()
    }

    /// Induced substructure on `x ∩ nodes`, keeping saturation marks.
    pub fn restrict(&self, x: &BTreeSet<NodeId>) -> Network {
        let mut out = Network::new();
        for (&u, a) in &self.labels {
            if x.contains(&u) {
                out.add_node(u, a.clone());
            }
        }
        for (u, v) in self.edges() {
            if x.contains(&u) && x.contains(&v) {
                out.add_edge(u, v);
            }
        }
        out.sat_f = self.sat_f.intersection(x).copied().collect();
        out.sat_p = self.sat_p.intersection(x).copied().collect();
        out
    }

    /// `N \ X`.
    pub fn minus(&self, x: &BTreeSet<NodeId>) -> Network {
        let keep = self.nodes().filter(|u| !x.contains(u)).collect();
        self.restrict(&keep)
    }

    /// `X` together with everything reachable from it in direction `dir`.
    pub fn generated(&self, x: impl IntoIterator<Item = NodeId>, dir: Dir) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut work: Vec<NodeId> = x.into_iter().filter(|&u| self.contains(u)).collect();
        while let Some(u) = work.pop() {
            if seen.insert(u) {
                work.extend(self.neighbours(u, dir).iter().copied());
            }
        }
        seen
    }

    /// `X ∪ {v | u →⁺ v, u ∈ X}`.
    pub fn upgen(&self, x: impl IntoIterator<Item = NodeId>) -> BTreeSet<NodeId> {
        self.generated(x, Dir::F)
    }

    /// `X ∪ {v | v →⁺ u, u ∈ X}`.
    pub fn downgen(&self, x: impl IntoIterator<Item = NodeId>) -> BTreeSet<NodeId> {
        self.generated(x, Dir::B)
    }

    /// Nodes in topological order, or `None` if there is a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indeg: BTreeMap<NodeId, usize> = self.pred.iter().map(|(&u, p)| (u, p.len())).collect();
        let mut queue: VecDeque<NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&u, _)| u).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for v in &self.succ[&u] {
                let d = indeg.get_mut(v).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(*v);
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// No two distinct directed paths join the same pair of nodes. Cyclic
    /// graphs are not anticonfluent.
    pub fn is_anticonfluent(&self) -> bool {
        let Some(order) = self.topological_order() else {
            return false;
        };
        let pos: BTreeMap<NodeId, usize> = order.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        for i in 0..order.len() {
            // path counts from u, saturated at 2
            let mut count = vec![0u8; order.len()];
            count[i] = 1;
            for j in i..order.len() {
                if count[j] == 0 {
                    continue;
                }
                for v in &self.succ[&order[j]] {
                    let k = pos[v];
                    count[k] = (count[k] + count[j]).min(2);
                    if count[k] == 2 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Containment: nodes, labels and saturation sets included, and edges
    /// between nodes of `self` agree with `other`.
    pub fn contained_in(&self, other: &Network) -> bool {
        self.labels.iter().all(|(u, a)| other.labels.get(u) == Some(a))
            && self.sat_f.is_subset(&other.sat_f)
            && self.sat_p.is_subset(&other.sat_p)
            && self.labels.keys().all(|u| {
                let inside = |s: &BTreeSet<NodeId>| -> BTreeSet<NodeId> {
                    s.iter().filter(|v| self.contains(**v)).copied().collect()
                };
                self.succ[u] == inside(&other.succ[u])
            })
    }

    /// Nodes and edges of the saturation conditions, checked against `ctx`.
    pub fn validate(&self, ctx: &Context) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.is_acyclic() {
            out.push(Violation::Cycle);
        }
        for (&u, a) in &self.labels {
            if !is_atom(a, &ctx.sigma) {
                out.push(Violation::NotAnAtom(u));
            }
        }
        for (u, v) in self.edges() {
            if !coherent(self.label(u), self.label(v), &ctx.sigma) {
                out.push(Violation::Incoherent(u, v));
            }
        }
        for dir in [Dir::F, Dir::B] {
            for &u in self.saturated(dir) {
                for (dia, _) in self.missing_witnesses(ctx, u, dir) {
                    out.push(Violation::Unsaturated {
                        node: u,
                        dir,
                        formula: dia,
                    });
                }
            }
        }
        out
    }

    /// Diamonds `◇φ ∈ L(u)` in direction `dir` (as `(◇φ, φ)` closure
    /// indices) that cannot be given `d` private neighbours sharing one label
    /// containing `φ`, after a maximum assignment of the existing neighbours.
    pub fn missing_witnesses(&self, ctx: &Context, u: NodeId, dir: Dir) -> Vec<(usize, usize)> {
        let label = self.label(u);
        let wanted: Vec<(usize, usize)> = ctx.sigma.diamonds(dir).filter(|(d, _)| label.contains(*d)).collect();
        if wanted.is_empty() {
            return wanted;
        }
        let copies = ctx.copies();
        let mut classes: BTreeMap<&Atom, usize> = BTreeMap::new();
        for v in self.neighbours(u, dir) {
            *classes.entry(self.label(*v)).or_default() += 1;
        }
        let slots: Vec<&Atom> = classes
            .iter()
            .flat_map(|(a, &k)| std::iter::repeat(*a).take(k / copies))
            .collect();
        let adj: Vec<Vec<usize>> = wanted
            .iter()
            .map(|&(_, phi)| (0..slots.len()).filter(|&s| slots[s].contains(phi)).collect())
            .collect();
        let matching = max_matching(&adj, slots.len());
        wanted
            .into_iter()
            .zip(matching)
            .filter(|(_, m)| m.is_none())
            .map(|(w, _)| w)
            .collect()
    }

    /// Undirected graph distance from `root` to every node reachable from it.
    pub fn distances_from(&self, root: NodeId) -> BTreeMap<NodeId, usize> {
        let mut dist = BTreeMap::new();
        let mut queue = VecDeque::from([root]);
        dist.insert(root, 0);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for v in self.succ[&u].iter().chain(&self.pred[&u]) {
                if !dist.contains_key(v) {
                    dist.insert(*v, d + 1);
                    queue.push_back(*v);
                }
            }
        }
        dist
    }
}

/// Maximum bipartite matching by augmenting paths; `adj[l]` lists the right
/// vertices adjacent to left vertex `l`.
pub(crate) fn max_matching(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    fn augment(l: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &r in &adj[l] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if owner[r].map_or(true, |o| augment(o, adj, owner, seen)) {
                owner[r] = Some(l);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    for l in 0..adj.len() {
        let mut seen = vec![false; right];
        augment(l, adj, &mut owner, &mut seen);
    }
    let mut out = vec![None; adj.len()];
    for (r, o) in owner.iter().enumerate() {
        if let Some(l) = o {
            out[*l] = Some(r);
        }
    }
    out
}

/// `N ⊑ N'`: containment, and nodes of `S_F` (`S_P`) gain no successors
/// (predecessors).
pub fn is_subnetwork(n: &Network, n2: &Network) -> bool {
    n.contained_in(n2)
        && n.sat_f.iter().all(|u| n.succ[u] == n2.succ[u])
        && n.sat_p.iter().all(|u| n.pred[u] == n2.pred[u])
}

/// Componentwise union. Fails if a shared node carries different labels.
pub fn union(nets: &[Network]) -> Result<Network, NetworkError> {
    let mut out = Network::new();
    for n in nets {
        for (&u, a) in &n.labels {
            match out.labels.get(&u) {
                Some(b) if b != a => return Err(NetworkError::LabelClash(u)),
                _ => out.add_node(u, a.clone()),
            }
        }
        for (u, v) in n.edges() {
            out.add_edge(u, v);
        }
        out.sat_f.extend(&n.sat_f);
        out.sat_p.extend(&n.sat_p);
    }
    Ok(out)
}

/// `N \ upgen(N, U) = N' \ upgen(N', U)`.
pub fn equp_set(n: &Network, n2: &Network, u: &BTreeSet<NodeId>) -> bool {
    n.minus(&n.upgen(u.iter().copied())) == n2.minus(&n2.upgen(u.iter().copied()))
}

/// `N \ downgen(N, U) = N' \ downgen(N', U)`.
pub fn eqdown_set(n: &Network, n2: &Network, u: &BTreeSet<NodeId>) -> bool {
    n.minus(&n.downgen(u.iter().copied())) == n2.minus(&n2.downgen(u.iter().copied()))
}

pub fn equp(n: &Network, n2: &Network, u: NodeId) -> bool {
    equp_set(n, n2, &BTreeSet::from([u]))
}

pub fn eqdown(n: &Network, n2: &Network, u: NodeId) -> bool {
    eqdown_set(n, n2, &BTreeSet::from([u]))
}

/// Every `N'`-successor of a node of `N` is in `N`.
pub fn is_up_cofinal(n: &Network, n2: &Network) -> bool {
    n.nodes()
        .all(|u| n2.succ.get(&u).map_or(true, |s| s.iter().all(|v| n.contains(*v))))
}

/// Every `N'`-predecessor of a node of `N` is in `N`.
pub fn is_down_cofinal(n: &Network, n2: &Network) -> bool {
    n.nodes()
        .all(|u| n2.pred.get(&u).map_or(true, |s| s.iter().all(|v| n.contains(*v))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitset::BitSet;
    use crate::closure::atoms;
    use crate::syntax::{parse, ConnectiveTable};

    fn plain(n: usize, edges: &[(usize, usize)]) -> Network {
        let mut net = Network::new();
        for u in 0..n {
            net.add_node(u, BitSet::new(1));
        }
        for &(u, v) in edges {
            net.add_edge(u, v);
        }
        net
    }

    #[test]
    fn anticonfluence_examples() {
        assert!(plain(5, &[(0, 1), (1, 2), (2, 3), (0, 4)]).is_anticonfluent());
        assert!(!plain(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).is_anticonfluent());
        assert!(!plain(3, &[(0, 1), (1, 2), (0, 2)]).is_anticonfluent());
        // converging tails are fine
        assert!(plain(3, &[(0, 2), (1, 2)]).is_anticonfluent());
        assert!(!plain(2, &[(0, 1), (1, 0)]).is_anticonfluent());
    }

    #[test]
    fn generation() {
        let n = plain(3, &[(0, 1), (1, 2)]);
        assert_eq!(n.upgen([2]), BTreeSet::from([2]));
        assert_eq!(n.downgen([2]), BTreeSet::from([0, 1, 2]));
        assert!(equp(&n, &n, 1));
        assert_eq!(n.restrict(&n.node_set()), n);
    }

    #[test]
    fn subnetwork_examples() {
        let mut n = plain(2, &[(0, 1)]);
        n.mark_saturated(Dir::F, 0);
        assert!(is_subnetwork(&n, &n));
        let mut bigger = n.clone();
        bigger.add_node(2, BitSet::new(1));
        assert!(is_subnetwork(&n, &bigger));
        bigger.add_edge(0, 2);
        assert!(!is_subnetwork(&n, &bigger));
        let mut back = n.clone();
        back.add_node(2, BitSet::new(1));
        back.add_edge(2, 0);
        assert!(is_subnetwork(&n, &back));
        assert!(is_down_cofinal(&n, &bigger) && !is_down_cofinal(&n, &back));
    }

    #[test]
    fn union_clash() {
        let a = Network::singleton(0, BitSet::new(2));
        let b = Network::singleton(0, BitSet::from_indices(2, [1]));
        assert_eq!(union(&[a.clone()]).unwrap(), a);
        assert!(matches!(union(&[a, b]), Err(NetworkError::LabelClash(0))));
    }

    #[test]
    fn validation() {
        let t = ConnectiveTable::new();
        let ctx = Context::new(&parse("<F>p & [F]q", &t).unwrap()).unwrap();
        let dia = ctx.sigma.index_of(&parse("<F>p", &t).unwrap()).unwrap();
        let boxq = ctx.sigma.index_of(&parse("[F]q", &t).unwrap()).unwrap();
        let q = ctx.sigma.index_of(&Formula::var("q")).unwrap();
        let all = atoms(&ctx.sigma);
        let a = all
            .iter()
            .find(|a| a.contains(dia) && a.contains(boxq))
            .unwrap()
            .clone();
        let mut n = Network::singleton(0, a.clone());
        assert!(n.validate(&ctx).is_empty());
        n.mark_saturated(Dir::F, 0);
        assert!(matches!(
            n.validate(&ctx)[..],
            [Violation::Unsaturated {
                node: 0,
                dir: Dir::F,
                ..
            }]
        ));
        let b = all.iter().find(|b| !b.contains(q)).unwrap().clone();
        let mut m = Network::singleton(0, a);
        m.add_node(1, b);
        m.add_edge(0, 1);
        assert!(m.validate(&ctx).contains(&Violation::Incoherent(0, 1)));
    }
}
