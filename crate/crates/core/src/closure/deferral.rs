use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{Atom, ClosureError, ClosureSet, Shape};
use crate::syntax::{param_var, Dir, DisjClass, DisjTree, FixpointConnective, Formula, NodeKind, RECURSION_VAR};

/// Membership test for a formula built from closure members by `¬` and `∨`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Judge {
    Const(bool),
    Member(usize),
    Not(Box<Judge>),
    Or(Box<Judge>, Box<Judge>),
}

impl Judge {
    pub fn compile(f: &Formula, sigma: &ClosureSet) -> Result<Judge, ClosureError> {
        if let Some(i) = sigma.index_of(f) {
            return Ok(Judge::Member(i));
        }
        match f {
            Formula::Bottom => Ok(Judge::Const(false)),
            Formula::Neg(a) => Ok(Judge::Not(Box::new(Judge::compile(a, sigma)?))),
            Formula::Or(a, b) => Ok(Judge::Or(
                Box::new(Judge::compile(a, sigma)?),
                Box::new(Judge::compile(b, sigma)?),
            )),
            other => Err(ClosureError::Uncompilable(other.to_string())),
        }
    }

    pub fn holds(&self, a: &Atom) -> bool {
        match self {
            Judge::Const(b) => *b,
            Judge::Member(i) => a.contains(*i),
            Judge::Not(j) => !j.holds(a),
            Judge::Or(l, r) => l.holds(a) || r.holds(a),
        }
    }
}

/// A fixpoint formula `♯χθ⃗ ∈ Σ` together with the disjunctive reading of
/// `χ` and membership tests for every node instantiated at `♯χθ⃗, θ⃗`.
#[derive(Clone, Debug)]
pub struct Host {
    pub sigma_index: usize,
    pub conn: Arc<FixpointConnective>,
    pub args: Vec<Formula>,
    pub tree: DisjTree,
    pub dir: Dir,
    pub judges: Vec<Judge>,
    /// Deferral id of each tree node containing `x`.
    pub deferral_of: Vec<Option<usize>>,
    /// Index of `χ(⊥, θ⃗)`.
    pub bottom: usize,
}

#[derive(Clone, Debug)]
pub struct Deferral {
    pub host: usize,
    /// First tree node (in preorder) carrying this deferral.
    pub node: usize,
    /// The deferral as a formula over `x, q⃗`.
    pub body: Formula,
}

/// The potential deferrals of a closure set, enumerated by host index and
/// then preorder position in the connective body.
#[derive(Clone, Debug)]
pub struct DeferralTable {
    pub hosts: Vec<Host>,
    pub deferrals: Vec<Deferral>,
    host_by_index: HashMap<usize, usize>,
}

impl DeferralTable {
    pub fn len(&self) -> usize {
        self.deferrals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deferrals.is_empty()
    }

    /// Number of copies used when saturating: `max(d, 1)`.
    pub fn copies(&self) -> usize {
        self.deferrals.len().max(1)
    }

    pub fn host_of(&self, sigma_index: usize) -> Option<&Host> {
        self.host_by_index.get(&sigma_index).map(|&h| &self.hosts[h])
    }

    pub fn host(&self, d: usize) -> &Host {
        &self.hosts[self.deferrals[d].host]
    }

    /// Whether deferral `d` is present in the atom, i.e. its instantiation
    /// belongs to it.
    pub fn active(&self, d: usize, a: &Atom) -> bool {
        let def = &self.deferrals[d];
        self.hosts[def.host].judges[def.node].holds(a)
    }

    /// Deferral id of the recursion variable `x` for the host at closure
    /// index `sigma_index`; this is the focus.
    pub fn focus_of(&self, sigma_index: usize) -> Option<usize> {
        let h = self.host_of(sigma_index)?;
        h.tree
            .nodes
            .iter()
            .position(|n| n.kind == NodeKind::X)
            .and_then(|i| h.deferral_of[i])
    }

    /// Deferral ids that are foci (the deferral `x`).
    pub fn is_focus(&self, d: usize) -> bool {
        let def = &self.deferrals[d];
        self.hosts[def.host].tree.node(def.node).kind == NodeKind::X
    }

    /// Human-readable instance `ψ(♯χθ⃗, θ⃗)`.
    pub fn instance(&self, d: usize, sigma: &ClosureSet) -> Formula {
        let def = &self.deferrals[d];
        let h = &self.hosts[def.host];
        instantiate(&def.body, sigma.formula(h.sigma_index), &h.args)
    }
}

fn instantiate(f: &Formula, sharp: &Formula, args: &[Formula]) -> Formula {
    let mut map = BTreeMap::new();
    map.insert(RECURSION_VAR.to_string(), sharp.clone());
    for (i, a) in args.iter().enumerate() {
        map.insert(param_var(i + 1), a.clone());
    }
    f.substitute(&map)
}

/// Collects the potential deferrals of every fixpoint formula in `sigma`.
/// Fails if some connective is not disjunctive.
pub fn deferral_table(sigma: &ClosureSet) -> Result<DeferralTable, ClosureError> {
    let mut hosts = Vec::new();
    let mut deferrals = Vec::new();
    let mut host_by_index = HashMap::new();
    for i in 0..sigma.len() {
        let Shape::Sharp { bottom, .. } = sigma.shape(i) else {
            continue;
        };
        let Formula::Sharp(conn, args) = sigma.formula(i) else {
            unreachable!()
        };
        let dir = match conn.class() {
            DisjClass::Forward => Dir::F,
            DisjClass::Backward => Dir::B,
            DisjClass::None => return Err(ClosureError::NotDisjunctive(conn.name().to_string())),
        };
        let tree = DisjTree::build(conn.body()).map_err(|_| ClosureError::NotDisjunctive(conn.name().to_string()))?;
        let sharp = sigma.formula(i);
        let judges = tree
            .nodes
            .iter()
            .map(|n| Judge::compile(&instantiate(&n.judge, sharp, args), sigma))
            .collect::<Result<Vec<_>, _>>()?;
        let canon = tree.canonical_ids();
        let mut by_canon: HashMap<usize, usize> = HashMap::new();
        let host_id = hosts.len();
        let mut deferral_of = vec![None; tree.nodes.len()];
        for (n, node) in tree.nodes.iter().enumerate() {
            if !node.has_x {
                continue;
            }
            let id = *by_canon.entry(canon[n]).or_insert_with(|| {
                deferrals.push(Deferral {
                    host: host_id,
                    node: n,
                    body: node.formula.clone(),
                });
                deferrals.len() - 1
            });
            deferral_of[n] = Some(id);
        }
        host_by_index.insert(i, host_id);
        hosts.push(Host {
            sigma_index: i,
            conn: conn.clone(),
            args: args.clone(),
            tree,
            dir,
            judges,
            deferral_of,
            bottom,
        });
    }
    Ok(DeferralTable {
        hosts,
        deferrals,
        host_by_index,
    })
}
