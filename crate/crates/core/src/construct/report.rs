use std::ops::ControlFlow;

use serde::Serialize;

use super::witnesses_exist;
use super::{Budget, Engine, Stuck};
use crate::bitset::BitSet;
use crate::closure::{for_each_atom_within, Atom, Shape};
use crate::network::{compute_timeouts, defects_with, Context, DefectKind, Network, NetworkDoc, NodeId};
use crate::semantics::{eval, KripkeModel};
use crate::syntax::Formula;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub defects_before: usize,
    pub defects_after: usize,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualDefect {
    pub node: NodeId,
    pub kind: DefectKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deferral: Option<usize>,
    /// Undirected distance from the root.
    pub distance: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Perfect,
    /// Every node within `radius` of the root is free of defects.
    PerfectUpToRadius {
        radius: usize,
    },
    Stuck {
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub formula: String,
    /// Closure indices of the root label.
    pub atom: Vec<usize>,
    pub budget: Budget,
    pub rounds: Vec<RoundLog>,
    pub residual: Vec<ResidualDefect>,
    pub verdict: Verdict,
    /// The repair that ended construction early, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopped: Option<String>,
    pub network: NetworkDoc,
    #[serde(skip)]
    pub net: Network,
}

impl ConstructionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn is_perfect(&self) -> bool {
        self.verdict == Verdict::Perfect
    }
}

/// Grows a network from a single node labelled `atom` by repair rounds
/// until it is perfect or the budget runs out.
pub fn build(ctx: &Context, atom: &Atom, budget: Budget) -> ConstructionReport {
    build_with(ctx, atom, budget, |_, _| {})
}

/// [`build`], calling `on_round` with the network after each repair round.
pub fn build_with(
    ctx: &Context,
    atom: &Atom,
    budget: Budget,
    mut on_round: impl FnMut(usize, &Network),
) -> ConstructionReport {
    let mut net = Network::singleton(0, atom.clone());
    let mut engine = Engine::new(ctx, budget, 1);
    let mut rounds = Vec::new();
    let mut stopped: Option<Stuck> = None;
    for round in 1..=budget.max_rounds {
        let before = defects_with(&net, &compute_timeouts(&net, ctx)).len();
        if before == 0 {
            break;
        }
        if let Err(e) = engine.repair_all(&mut net) {
            stopped = Some(e);
        }
        rounds.push(RoundLog {
            round,
            defects_before: before,
            defects_after: defects_with(&net, &compute_timeouts(&net, ctx)).len(),
            nodes: net.len(),
            edges: net.edge_count(),
        });
        on_round(round, &net);
        if stopped.is_some() {
            break;
        }
    }
    let dist = net.distances_from(0);
    let residual: Vec<ResidualDefect> = defects_with(&net, &compute_timeouts(&net, ctx))
        .into_iter()
        .map(|d| ResidualDefect {
            node: d.node,
            kind: d.kind,
            deferral: d.deferral,
            distance: dist.get(&d.node).copied().unwrap_or(usize::MAX),
        })
        .collect();
    let verdict = match residual.iter().map(|d| d.distance).min() {
        None => Verdict::Perfect,
        Some(0) => Verdict::Stuck {
            reason: match &stopped {
                Some(e) => e.to_string(),
                None => format!("defects at the root after {} rounds", rounds.len()),
            },
        },
        Some(k) => Verdict::PerfectUpToRadius { radius: k - 1 },
    };
    ConstructionReport {
        formula: ctx.sigma.origin().to_string(),
        atom: atom.to_vec(),
        budget,
        rounds,
        residual,
        verdict,
        stopped: stopped.map(|e| e.to_string()),
        network: NetworkDoc::new(&net, ctx),
        net,
    }
}

/// Atoms containing `phi` whose diamonds all have witness atoms, in atom
/// order, at most `limit` of them. Empty if `phi` is not in the closure.
pub fn root_atoms(ctx: &Context, phi: &Formula, limit: usize) -> Vec<Atom> {
    let Some(i) = ctx.sigma.index_of(phi) else {
        return Vec::new();
    };
    let must = BitSet::from_indices(ctx.sigma.len(), [i]);
    let mut out = Vec::new();
    for_each_atom_within(&ctx.sigma, &must, &BitSet::new(ctx.sigma.len()), |a| {
        if out.len() >= limit {
            return ControlFlow::Break(());
        }
        if witnesses_exist(ctx, a) {
            out.push(a.clone());
        }
        ControlFlow::Continue(())
    });
    out
}

/// Reads the network as a Kripke model. State `i` is the `i`-th node in
/// ascending id order; variables of the closure hold where their label says.
pub fn extract_model(net: &Network, ctx: &Context) -> (KripkeModel, Vec<NodeId>) {
    let ids: Vec<NodeId> = net.nodes().collect();
    let pos = |u: NodeId| ids.binary_search(&u).expect("node of the network");
    let edges: Vec<(usize, usize)> = net.edges().into_iter().map(|(u, v)| (pos(u), pos(v))).collect();
    let valuation = (0..ctx.sigma.len())
        .filter(|&i| ctx.sigma.shape(i) == Shape::Var)
        .map(|i| {
            let states = ids
                .iter()
                .enumerate()
                .filter(|(_, &u)| net.label(u).contains(i))
                .map(|(s, _)| s)
                .collect();
            (ctx.sigma.formula(i).to_string(), states)
        });
    let model = KripkeModel::new(ids.len().max(1), edges, valuation).expect("edges in range");
    (model, ids)
}

/// Pairs `(node, closure index)` where the label's verdict on the member
/// disagrees with the extracted model. Only members in `members` are
/// checked, and only at the nodes in `at`.
pub fn truth_failures(net: &Network, ctx: &Context, at: &[NodeId], members: &[usize]) -> Vec<(NodeId, usize)> {
    let (model, ids) = extract_model(net, ctx);
    let mut out = Vec::new();
    for &i in members {
        let truth = eval(ctx.sigma.formula(i), &model);
        for &u in at {
            let s = ids.binary_search(&u).expect("node of the network");
            if truth.contains(s) != net.label(u).contains(i) {
                out.push((u, i));
            }
        }
    }
    out
}

impl Verdict {
    /// Members whose truth the verdict vouches for at the root, and whether
    /// it vouches for every node.
    pub fn checked_members(&self, ctx: &Context) -> (Vec<usize>, bool) {
        match self {
            Verdict::Perfect => ((0..ctx.sigma.len()).collect(), true),
            Verdict::PerfectUpToRadius { radius } => (ctx.sigma.bounded_members(*radius), false),
            Verdict::Stuck { .. } => (Vec::new(), false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::atoms;
    use crate::syntax::{parse, ConnectiveTable};

    fn first_atom_with(ctx: &Context, phi: &Formula) -> Atom {
        root_atoms(ctx, phi, 1).pop().unwrap()
    }

    fn check_truth(report: &ConstructionReport, ctx: &Context) {
        let (members, everywhere) = report.verdict.checked_members(ctx);
        let at: Vec<NodeId> = if everywhere {
            report.net.nodes().collect()
        } else {
            vec![0]
        };
        assert_eq!(truth_failures(&report.net, ctx, &at, &members), vec![]);
    }

    #[test]
    fn sharp_free_formula_becomes_perfect() {
        let t = ConnectiveTable::new();
        let phi = parse("<F>p & <B>~p", &t).unwrap();
        let ctx = Context::new(&phi).unwrap();
        let a = first_atom_with(&ctx, &phi);
        let report = build(&ctx, &a, Budget::default());
        assert_eq!(report.verdict, Verdict::Perfect, "{}", report.to_json());
        assert!(report.net.validate(&ctx).is_empty());
        check_truth(&report, &ctx);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        let phi = parse("#r(p) & ~p", &t).unwrap();
        let ctx = Context::new(&phi).unwrap();
        let a = first_atom_with(&ctx, &phi);
        let one = build(&ctx, &a, Budget::default()).to_json();
        let two = build(&ctx, &a, Budget::default()).to_json();
        assert_eq!(one, two);
    }

    #[test]
    fn every_atom_of_a_small_closure_reports() {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        let ctx = Context::new(&parse("#r(p)", &t).unwrap()).unwrap();
        let budget = Budget {
            max_nodes: 60,
            ..Budget::default()
        };
        for a in atoms(&ctx.sigma) {
            let report = build(&ctx, &a, budget);
            assert!(report.net.len() <= budget.max_nodes);
            assert!(report.net.validate(&ctx).is_empty());
            check_truth(&report, &ctx);
        }
    }
}
