//! Budgeted construction of networks: saturation repairs, finishing
//! deferrals by tree search and amalgamation, repair rounds, reports and
//! model extraction.

mod finish;
mod report;
mod saturate;

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::closure::Atom;
use crate::network::{Context, Network, NetworkError, NodeId};
use crate::syntax::Dir;

pub use finish::{finish_deferral, repair_all};
pub use report::{
    build, build_with, extract_model, root_atoms, truth_failures, ConstructionReport, ResidualDefect, RoundLog, Verdict,
};
pub use saturate::{normalize_heads, saturate_backward, saturate_forward, witnesses_exist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: usize,
    /// Height bound for trees grafted when finishing a deferral.
    pub max_depth: usize,
    pub max_rounds: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 200,
            max_depth: 6,
            max_rounds: 8,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            max_nodes: usize::MAX,
            max_depth: 16,
            max_rounds: usize::MAX,
        }
    }
}

/// Why a repair could not be carried out. None of these is a claim of
/// unsatisfiability.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Stuck {
    #[error("no atom is a coherent {dir} neighbour of node {node} containing {formula}")]
    NoWitness { node: NodeId, dir: Dir, formula: String },
    #[error("no tree of height at most {depth} finishes deferral {deferral} at node {node}")]
    NoTree {
        node: NodeId,
        deferral: usize,
        depth: usize,
    },
    #[error("deferral {deferral} is unfinished at saturated head node {node}")]
    SaturatedHead { node: NodeId, deferral: usize },
    #[error("deferral {deferral} at node {node} depends on itself without a modality")]
    Unguarded { node: NodeId, deferral: usize },
    #[error("no full relation exists for the cover deferral {deferral} at node {node}")]
    Cover { node: NodeId, deferral: usize },
    #[error("deferral {deferral} at node {node} is still unfinished after repair")]
    Unfinished { node: NodeId, deferral: usize },
    #[error("node budget of {0} exhausted")]
    Budget(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// A finite tree in which some deferral is finished at the root. Children
/// hang off in the connective's direction.
#[derive(Debug)]
pub(crate) struct Tree {
    label: Atom,
    saturated: bool,
    children: Vec<Rc<Tree>>,
    size: usize,
    height: usize,
}

impl Tree {
    fn leaf(label: Atom) -> Rc<Tree> {
        Rc::new(Tree {
            label,
            saturated: false,
            children: Vec::new(),
            size: 1,
            height: 0,
        })
    }

    fn node(label: Atom, children: Vec<Rc<Tree>>) -> Rc<Tree> {
        Rc::new(Tree {
            label,
            saturated: true,
            size: 1 + children.iter().map(|c| c.size).sum::<usize>(),
            height: 1 + children.iter().map(|c| c.height).max().unwrap_or(0),
            children,
        })
    }
}

enum Memo {
    Found(Rc<Tree>),
    /// Failed at this height bound (and so at every smaller one).
    Failed(usize),
}

/// State shared by the repair operations of one construction: the fresh-id
/// counter and caches of witness atoms and finished trees.
pub struct Engine<'a> {
    ctx: &'a Context,
    budget: Budget,
    next_id: NodeId,
    witnesses: HashMap<(Atom, Dir, usize), Option<Atom>>,
    viable: HashMap<Atom, bool>,
    trees: HashMap<(Atom, usize), Memo>,
}

impl<'a> Engine<'a> {
    /// Fresh nodes are numbered from `next_id` upwards.
    pub fn new(ctx: &'a Context, budget: Budget, next_id: NodeId) -> Self {
        Engine {
            ctx,
            budget,
            next_id,
            witnesses: HashMap::new(),
            viable: HashMap::new(),
            trees: HashMap::new(),
        }
    }

    pub fn context(&self) -> &Context {
        self.ctx
    }

    fn fresh(&mut self) -> NodeId {
        let u = self.next_id;
        self.next_id += 1;
        u
    }

    fn check_size(&self, net: &Network) -> Result<(), Stuck> {
        if net.len() > self.budget.max_nodes {
            Err(Stuck::Budget(self.budget.max_nodes))
        } else {
            Ok(())
        }
    }
}
