//! Brute-force reference implementations written straight from the
//! definitions. They share no evaluation or graph code with the main modules
//! and are only meant for small inputs: tests and acceptance checks compare
//! against them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::network::{Context, Network, NodeId};
use crate::semantics::KripkeModel;
use crate::syntax::{Dir, Formula, NodeKind, RECURSION_VAR};

/// Truth set as a mask, with `♯χθ⃗` read as the intersection of all
/// prefixed points `Z ⊇ χ(Z, θ⃗)` over every subset of the states.
pub fn naive_eval(f: &Formula, m: &KripkeModel) -> u32 {
    assert!(m.states() <= 12, "subset enumeration needs at most 12 states");
    let env: HashMap<String, u32> = m
        .valuation()
        .iter()
        .map(|(p, s)| (p.clone(), s.iter().fold(0, |acc, i| acc | 1 << i)))
        .collect();
    naive_in(f, m, &env)
}

fn naive_in(f: &Formula, m: &KripkeModel, env: &HashMap<String, u32>) -> u32 {
    let n = m.states();
    let all = (1u32 << n) - 1;
    let states = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&s| pred(s)).fold(0, |acc, s| acc | 1 << s);
    match f {
        Formula::Bottom => 0,
        Formula::Var(v) => env.get(v).copied().unwrap_or(0),
        Formula::Neg(a) => all & !naive_in(a, m, env),
        Formula::Or(a, b) => naive_in(a, m, env) | naive_in(b, m, env),
        Formula::DiaF(a) => {
            let z = naive_in(a, m, env);
            states(&|s| m.successors(s).iter().any(|t| z >> t & 1 == 1))
        }
        Formula::DiaB(a) => {
            let z = naive_in(a, m, env);
            states(&|s| m.predecessors(s).iter().any(|t| z >> t & 1 == 1))
        }
        Formula::Sharp(chi, args) => {
            let mut inner: HashMap<String, u32> = HashMap::new();
            for (i, a) in args.iter().enumerate() {
                inner.insert(format!("q{}", i + 1), naive_in(a, m, env));
            }
            let mut meet = all;
            for z in 0..=all {
                inner.insert(RECURSION_VAR.to_string(), z);
                if naive_in(chi.body(), m, &inner) & !z == 0 {
                    meet &= z;
                }
            }
            meet
        }
    }
}

/// Reflexive-transitive reachability by Floyd–Warshall, indexed by position
/// in `ids`.
fn reach(net: &Network) -> (Vec<NodeId>, Vec<Vec<bool>>) {
    let ids: Vec<NodeId> = net.labels().keys().copied().collect();
    let n = ids.len();
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
        for j in 0..n {
            if net.successors(ids[i]).contains(&ids[j]) {
                r[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    (ids, r)
}

fn count_paths(net: &Network, from: NodeId, to: NodeId) -> usize {
    if from == to {
        return 1;
    }
    net.successors(from).iter().map(|&v| count_paths(net, v, to)).sum()
}

/// Acyclic, and no node has two distinct successors that reach a common
/// node; checked by counting paths between all pairs.
pub fn naive_is_anticonfluent(net: &Network) -> bool {
    let (ids, r) = reach(net);
    let n = ids.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && r[i][j] && r[j][i] {
                return false;
            }
        }
        if net.successors(ids[i]).contains(&ids[i]) {
            return false;
        }
    }
    for &a in &ids {
        for &b in &ids {
            if count_paths(net, a, b) > 1 {
                return false;
            }
        }
    }
    true
}

pub fn naive_generated(net: &Network, x: &BTreeSet<NodeId>, dir: Dir) -> BTreeSet<NodeId> {
    let (ids, r) = reach(net);
    let mut out = BTreeSet::new();
    for (i, &a) in ids.iter().enumerate() {
        for (j, &b) in ids.iter().enumerate() {
            let hit = match dir {
                Dir::F => x.contains(&a) && r[i][j],
                Dir::B => x.contains(&b) && r[i][j],
            };
            if hit {
                out.insert(if dir == Dir::F { b } else { a });
            }
        }
    }
    out
}

/// Rebuilds the induced substructure from scratch.
pub fn naive_restrict(net: &Network, x: &BTreeSet<NodeId>) -> Network {
    let mut out = Network::new();
    for (&u, a) in net.labels() {
        if x.contains(&u) {
            out.add_node(u, a.clone());
        }
    }
    for &u in out.node_set().iter() {
        for &v in net.successors(u) {
            if x.contains(&v) {
                out.add_edge(u, v);
            }
        }
        for dir in [Dir::F, Dir::B] {
            if net.is_saturated(dir, u) {
                out.mark_saturated(dir, u);
            }
        }
    }
    out
}

/// `None` on a label clash.
pub fn naive_union(nets: &[Network]) -> Option<Network> {
    let mut labels = BTreeMap::new();
    for n in nets {
        for (&u, a) in n.labels() {
            if labels.insert(u, a.clone()).is_some_and(|old| &old != a) {
                return None;
            }
        }
    }
    let mut out = Network::new();
    for (u, a) in labels {
        out.add_node(u, a);
    }
    for n in nets {
        for u in n.nodes() {
            for &v in n.successors(u) {
                out.add_edge(u, v);
            }
            for dir in [Dir::F, Dir::B] {
                if n.is_saturated(dir, u) {
                    out.mark_saturated(dir, u);
                }
            }
        }
    }
    Some(out)
}

/// `N ⊑ N'` from the definition: labels and saturation marks carried over,
/// edges between old nodes unchanged, and saturated nodes gain no
/// neighbours in their direction.
pub fn naive_is_subnetwork(n: &Network, n2: &Network) -> bool {
    for u in n.nodes() {
        if !n2.contains(u) || n2.label(u) != n.label(u) {
            return false;
        }
        for dir in [Dir::F, Dir::B] {
            if n.is_saturated(dir, u) && (!n2.is_saturated(dir, u) || n2.neighbours(u, dir) != n.neighbours(u, dir)) {
                return false;
            }
        }
        for v in n.nodes() {
            if n.successors(u).contains(&v) != n2.successors(u).contains(&v) {
                return false;
            }
        }
    }
    true
}

/// `N \ gen(N, U) = N' \ gen(N', U)` with generation in direction `dir`.
pub fn naive_same_outside(n: &Network, n2: &Network, u: &BTreeSet<NodeId>, dir: Dir) -> bool {
    let keep = |m: &Network| -> BTreeSet<NodeId> {
        let g = naive_generated(m, u, dir);
        m.node_set().difference(&g).copied().collect()
    };
    naive_restrict(n, &keep(n)) == naive_restrict(n2, &keep(n2))
}

/// Whether deferral `d` is finished in `k` steps at `u`, by direct
/// recursion on the clauses of the definition.
pub fn naive_finished_in(net: &Network, ctx: &Context, u: NodeId, d: usize, k: u32) -> bool {
    let mut memo = HashMap::new();
    finished(net, ctx, u, d, k, &mut memo)
}

/// Least `k <= cap` for which [`naive_finished_in`] holds.
pub fn naive_timeout(net: &Network, ctx: &Context, u: NodeId, d: usize, cap: u32) -> Option<u32> {
    let mut memo = HashMap::new();
    (0..=cap).find(|&k| finished(net, ctx, u, d, k, &mut memo))
}

fn finished(
    net: &Network,
    ctx: &Context,
    u: NodeId,
    d: usize,
    k: u32,
    memo: &mut HashMap<(NodeId, usize, u32), bool>,
) -> bool {
    if let Some(&v) = memo.get(&(u, d, k)) {
        return v;
    }
    let def = &ctx.table.deferrals[d];
    let host = &ctx.table.hosts[def.host];
    let label = net.label(u);
    // a child is fine at v if its instance is in the label and it is either
    // x-free or finished in k steps there
    let fine = |c: usize, v: NodeId, memo: &mut HashMap<_, _>| -> bool {
        host.judges[c].holds(net.label(v))
            && match host.deferral_of[c] {
                None => true,
                Some(e) => finished(net, ctx, v, e, k, memo),
            }
    };
    let v = match &host.tree.node(def.node).kind {
        NodeKind::X => {
            label.contains(host.bottom)
                || (k > 0
                    && finished(
                        net,
                        ctx,
                        u,
                        host.deferral_of[host.tree.root()].expect("root has x"),
                        k - 1,
                        memo,
                    ))
        }
        NodeKind::Or(a, b) => fine(*a, u, memo) || fine(*b, u, memo),
        NodeKind::And(theta, rest) => host.judges[*theta].holds(label) && fine(*rest, u, memo),
        NodeKind::Nabla(dir, parts) => {
            net.is_saturated(*dir, u) && {
                let nb: Vec<NodeId> = net.neighbours(u, *dir).iter().copied().collect();
                let ok: Vec<Vec<bool>> = nb
                    .iter()
                    .map(|&v| parts.iter().map(|&g| fine(g, v, memo)).collect())
                    .collect();
                // a full relation exists iff the relation of all fine pairs is full
                ok.iter().all(|row| row.iter().any(|&b| b)) && (0..parts.len()).all(|j| ok.iter().any(|row| row[j]))
            }
        }
        NodeKind::Free => true,
    };
    memo.insert((u, d, k), v);
    v
}
