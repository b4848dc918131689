use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::rc::Rc;

use super::{Budget, Engine, Memo, Stuck, Tree};
use crate::closure::{for_each_atom_within, Atom, Host, Judge};
use crate::network::{amalgamate, compute_timeouts, max_matching, Context, Network, NodeId};
use crate::syntax::{Dir, NodeKind};

/// Candidate witness atoms tried per diamond during tree search.
const MAX_CANDIDATES: usize = 256;

impl Engine<'_> {
    /// A tree of height at most `depth` whose root is labelled `a` and in
    /// which deferral `d` is finished at the root. `stack` holds the
    /// deferrals being solved at this same root; the flag reports whether
    /// the answer was cut short by it.
    fn solve(&mut self, a: &Atom, d: usize, depth: usize, stack: &mut Vec<usize>) -> (Option<Rc<Tree>>, bool) {
        let key = (a.clone(), d);
        match self.trees.get(&key) {
            Some(Memo::Found(t)) if t.height <= depth => return (Some(t.clone()), false),
            Some(Memo::Failed(k)) if depth <= *k => return (None, false),
            _ => {}
        }
        if stack.contains(&d) {
            return (None, true);
        }
        stack.push(d);
        let (found, cut) = self.solve_step(a, d, depth, stack);
        stack.pop();
        if !cut {
            let memo = match &found {
                Some(t) => Memo::Found(t.clone()),
                None => Memo::Failed(depth),
            };
            self.trees.insert(key, memo);
        }
        (found, cut)
    }

    fn solve_step(&mut self, a: &Atom, d: usize, depth: usize, stack: &mut Vec<usize>) -> (Option<Rc<Tree>>, bool) {
        let ctx = self.ctx;
        let def = &ctx.table.deferrals[d];
        let host = &ctx.table.hosts[def.host];
        match &host.tree.node(def.node).kind {
            NodeKind::Free => (Some(Tree::leaf(a.clone())), false),
            NodeKind::X => {
                if a.contains(host.bottom) {
                    (Some(Tree::leaf(a.clone())), false)
                } else {
                    let root = host.deferral_of[host.tree.root()].expect("body contains x");
                    self.solve(a, root, depth, stack)
                }
            }
            NodeKind::Or(l, r) => {
                let kids = [*l, *r];
                if kids
                    .iter()
                    .any(|&c| host.judges[c].holds(a) && host.deferral_of[c].is_none())
                {
                    return (Some(Tree::leaf(a.clone())), false);
                }
                let mut cut = false;
                for c in kids {
                    if let (true, Some(e)) = (host.judges[c].holds(a), host.deferral_of[c]) {
                        let (t, c2) = self.solve(a, e, depth, stack);
                        if t.is_some() {
                            return (t, false);
                        }
                        cut |= c2;
                    }
                }
                (None, cut)
            }
            NodeKind::And(theta, rest) => {
                if !host.judges[*theta].holds(a) || !host.judges[*rest].holds(a) {
                    return (None, false);
                }
                match host.deferral_of[*rest] {
                    None => (Some(Tree::leaf(a.clone())), false),
                    Some(e) => self.solve(a, e, depth, stack),
                }
            }
            NodeKind::Nabla(dir, parts) => {
                if *dir != host.dir {
                    return (None, false);
                }
                (self.solve_cover(a, host, parts, depth), false)
            }
        }
    }

    /// Saturated root labelled `a` whose children, `d'` per wanted diamond,
    /// stand in a full relation with `parts`.
    fn solve_cover(&mut self, a: &Atom, host: &Host, parts: &[usize], depth: usize) -> Option<Rc<Tree>> {
        let ctx = self.ctx;
        let dir = host.dir;
        let wanted: Vec<usize> = ctx
            .sigma
            .diamonds(dir)
            .filter(|(dia, _)| a.contains(*dia))
            .map(|(_, phi)| phi)
            .collect();
        if wanted.is_empty() {
            return parts.is_empty().then(|| Tree::node(a.clone(), Vec::new()));
        }
        if depth == 0 {
            return None;
        }
        let copies = ctx.copies();
        // each part goes to the diamond its judge names, or else the first
        let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); wanted.len()];
        for &g in parts {
            let k = match &host.judges[g] {
                Judge::Member(i) => wanted.iter().position(|phi| phi == i).unwrap_or(0),
                _ => 0,
            };
            assigned[k].push(g);
        }
        if assigned.iter().any(|v| v.len() > copies) {
            return None;
        }
        let mut children = Vec::new();
        for (k, &phi) in wanted.iter().enumerate() {
            let (mut must, forbid) = self.coherence_bounds(a, dir);
            must.insert(phi);
            for &g in &assigned[k] {
                if let Judge::Member(i) = host.judges[g] {
                    must.insert(i);
                }
            }
            let mut candidates = Vec::new();
            for_each_atom_within(&ctx.sigma, &must, &forbid, |b| {
                if self.viable(b) {
                    candidates.push(b.clone());
                }
                if candidates.len() >= MAX_CANDIDATES {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            let found = candidates
                .iter()
                .find_map(|b| self.cover_children(b, host, parts, &assigned[k], copies, depth - 1));
            children.extend(found?);
        }
        let tree = Tree::node(a.clone(), children);
        (tree.size <= self.budget.max_nodes).then_some(tree)
    }

    /// `copies` subtrees labelled `b`: one per assigned part, the rest
    /// copies of the cheapest subtree for any part.
    fn cover_children(
        &mut self,
        b: &Atom,
        host: &Host,
        parts: &[usize],
        assigned: &[usize],
        copies: usize,
        depth: usize,
    ) -> Option<Vec<Rc<Tree>>> {
        let mut out = Vec::new();
        for &g in assigned {
            out.push(self.part_tree(b, host, g, depth)?);
        }
        if out.len() < copies {
            let filler = parts
                .iter()
                .filter(|&&g| host.judges[g].holds(b))
                .min_by_key(|&&g| host.deferral_of[g].is_some())
                .and_then(|&g| self.part_tree(b, host, g, depth))?;
            out.resize(copies, filler);
        }
        Some(out)
    }

    fn part_tree(&mut self, b: &Atom, host: &Host, g: usize, depth: usize) -> Option<Rc<Tree>> {
        if !host.judges[g].holds(b) {
            return None;
        }
        match host.deferral_of[g] {
            None => Some(Tree::leaf(b.clone())),
            Some(e) => self.solve(b, e, depth, &mut Vec::new()).0,
        }
    }

    /// Hangs fresh copies of the tree's nodes below (or above) `u`.
    fn graft(&mut self, net: &mut Network, u: NodeId, tree: &Tree, dir: Dir) {
        if !tree.saturated {
            return;
        }
        for child in &tree.children {
            let v = self.fresh();
            net.add_node(v, child.label.clone());
            match dir {
                Dir::F => net.add_edge(u, v),
                Dir::B => net.add_edge(v, u),
            }
            self.graft(net, v, child, dir);
        }
        net.mark_saturated(dir, u);
    }

    /// Extends `net` so that deferral `d` is finished at `u`, changing it
    /// only in the part generated from `u` in the deferral's direction.
    /// Unsaturated nodes with neighbours in that direction must not exist
    /// there (see [`Engine::normalize_heads`]).
    pub fn finish(&mut self, net: &Network, u: NodeId, d: usize) -> Result<Network, Stuck> {
        self.finish_at(net, u, d, &mut Vec::new())
    }

    fn finish_at(
        &mut self,
        net: &Network,
        u: NodeId,
        d: usize,
        path: &mut Vec<(NodeId, usize)>,
    ) -> Result<Network, Stuck> {
        let ctx = self.ctx;
        if compute_timeouts(net, ctx).get(u, d) != Some(None) {
            return Ok(net.clone());
        }
        if path.contains(&(u, d)) {
            return Err(Stuck::Unguarded { node: u, deferral: d });
        }
        let host = ctx.table.host(d);
        let dir = host.dir;
        if net.neighbours(u, dir).is_empty() {
            if net.is_saturated(dir, u) {
                return Err(Stuck::SaturatedHead { node: u, deferral: d });
            }
            let depth = self.budget.max_depth;
            let tree = self
                .solve(net.label(u), d, depth, &mut Vec::new())
                .0
                .ok_or(Stuck::NoTree {
                    node: u,
                    deferral: d,
                    depth,
                })?;
            let mut out = net.clone();
            self.graft(&mut out, u, &tree, dir);
            self.check_size(&out)?;
            return self.verified(out, u, d);
        }
        let base = if net.is_saturated(dir, u) {
            net.clone()
        } else {
            self.saturate(net, u, dir)?
        };
        path.push((u, d));
        let result = self.finish_step(&base, u, d, host, path);
        path.pop();
        self.verified(result?, u, d)
    }

    fn finish_step(
        &mut self,
        base: &Network,
        u: NodeId,
        d: usize,
        host: &Host,
        path: &mut Vec<(NodeId, usize)>,
    ) -> Result<Network, Stuck> {
        let label = base.label(u);
        let def = &self.ctx.table.deferrals[d];
        match &host.tree.node(def.node).kind {
            NodeKind::Free => Ok(base.clone()),
            NodeKind::X => {
                let root = host.deferral_of[host.tree.root()].expect("body contains x");
                self.finish_at(base, u, root, path)
            }
            NodeKind::Or(l, r) => {
                let mut last = Stuck::Unfinished { node: u, deferral: d };
                for c in [*l, *r] {
                    if let (true, Some(e)) = (host.judges[c].holds(label), host.deferral_of[c]) {
                        match self.finish_at(base, u, e, path) {
                            Ok(out) => return Ok(out),
                            Err(err) => last = err,
                        }
                    }
                }
                Err(last)
            }
            NodeKind::And(_, rest) => match host.deferral_of[*rest] {
                Some(e) => self.finish_at(base, u, e, path),
                None => Ok(base.clone()),
            },
            NodeKind::Nabla(dir, parts) => {
                if *dir != host.dir {
                    return Err(Stuck::Unfinished { node: u, deferral: d });
                }
                self.finish_cover(base, u, d, host, parts, path)
            }
        }
    }

    /// Picks a full relation between the neighbours of `u` and the parts,
    /// finishes the deferral each neighbour is related to, and amalgamates.
    fn finish_cover(
        &mut self,
        base: &Network,
        u: NodeId,
        d: usize,
        host: &Host,
        parts: &[usize],
        path: &mut Vec<(NodeId, usize)>,
    ) -> Result<Network, Stuck> {
        let dir = host.dir;
        let timeouts = compute_timeouts(base, self.ctx);
        let nb: Vec<NodeId> = base.neighbours(u, dir).iter().copied().collect();
        let cost = |w: NodeId, g: usize| -> Option<u8> {
            if !host.judges[g].holds(base.label(w)) {
                return None;
            }
            match host.deferral_of[g] {
                None => Some(0),
                Some(e) if timeouts.finished(w, e).is_some() => Some(1),
                Some(_) => Some(2),
            }
        };
        let adj: Vec<Vec<usize>> = parts
            .iter()
            .map(|&g| {
                let mut ws: Vec<usize> = (0..nb.len()).filter(|&i| cost(nb[i], g).is_some()).collect();
                ws.sort_by_key(|&i| cost(nb[i], g));
                ws
            })
            .collect();
        let matching = max_matching(&adj, nb.len());
        if matching.iter().any(Option::is_none) {
            return Err(Stuck::Cover { node: u, deferral: d });
        }
        let mut chosen: Vec<Option<usize>> = vec![None; nb.len()];
        for (j, m) in matching.iter().enumerate() {
            chosen[m.expect("checked")] = Some(parts[j]);
        }
        let mut pairs = Vec::new();
        for (i, &w) in nb.iter().enumerate() {
            let g = match chosen[i] {
                Some(g) => g,
                None => *parts
                    .iter()
                    .filter(|&&g| cost(w, g).is_some())
                    .min_by_key(|&&g| cost(w, g))
                    .ok_or(Stuck::Cover { node: u, deferral: d })?,
            };
            if cost(w, g) == Some(2) {
                let e = host.deferral_of[g].expect("cost 2 means deferral");
                pairs.push((w, self.finish_at(base, w, e, path)?));
            }
        }
        let out = amalgamate(base, &pairs, dir)?;
        self.check_size(&out)?;
        Ok(out)
    }

    fn verified(&self, out: Network, u: NodeId, d: usize) -> Result<Network, Stuck> {
        match compute_timeouts(&out, self.ctx).get(u, d) {
            Some(None) => Err(Stuck::Unfinished { node: u, deferral: d }),
            _ => Ok(out),
        }
    }

    /// One repair round: saturates every node of `net` in both directions,
    /// then finishes every unfinished deferral at those nodes. `net` is
    /// updated after each successful repair, so on failure it holds the
    /// progress made so far.
    pub fn repair_all(&mut self, net: &mut Network) -> Result<(), Stuck> {
        let input: BTreeSet<NodeId> = net.node_set();
        for &u in &input {
            for dir in [Dir::F, Dir::B] {
                if !net.is_saturated(dir, u) {
                    *net = self.saturate(net, u, dir)?;
                }
            }
        }
        let pending: Vec<(NodeId, usize)> = compute_timeouts(net, self.ctx)
            .unfinished()
            .filter(|(u, _)| input.contains(u))
            .collect();
        for (u, d) in pending {
            let dir = self.ctx.table.host(d).dir;
            *net = self.normalize_heads(net, dir)?;
            *net = self.finish(net, u, d)?;
        }
        Ok(())
    }
}

pub fn finish_deferral(ctx: &Context, net: &Network, u: NodeId, d: usize, budget: Budget) -> Result<Network, Stuck> {
    let mut engine = Engine::new(ctx, budget, net.next_id());
    let dir = ctx.table.host(d).dir;
    let norm = engine.normalize_heads(net, dir)?;
    engine.finish(&norm, u, d)
}

pub fn repair_all(ctx: &Context, net: &Network, budget: Budget) -> Result<Network, Stuck> {
    let mut out = net.clone();
    Engine::new(ctx, budget, net.next_id()).repair_all(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::atoms;
    use crate::construct::witnesses_exist;
    use crate::network::is_subnetwork;
    use crate::syntax::{parse, ConnectiveTable};

    fn reach(f: &str) -> (ConnectiveTable, Context) {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        t.define("rb", 1, "q1 | <B>x").unwrap();
        (t.clone(), Context::new(&parse(f, &t).unwrap()).unwrap())
    }

    fn atom(ctx: &Context, t: &ConnectiveTable, yes: &[&str], no: &[&str]) -> Atom {
        let ix = |s: &str| ctx.sigma.index_of(&parse(s, t).unwrap()).unwrap();
        atoms(&ctx.sigma)
            .into_iter()
            .find(|a| {
                yes.iter().all(|s| a.contains(ix(s)))
                    && no.iter().all(|s| !a.contains(ix(s)))
                    && witnesses_exist(ctx, a)
            })
            .unwrap()
    }

    #[test]
    fn reachability_is_finished_by_a_path() {
        let (t, ctx) = reach("#r(p)");
        let a = atom(&ctx, &t, &["#r(p)", "~p", "<F>T"], &["<F>_|_"]);
        let net = Network::singleton(0, a);
        let focus = ctx
            .table
            .focus_of(ctx.sigma.index_of(&parse("#r(p)", &t).unwrap()).unwrap())
            .unwrap();
        let out = finish_deferral(&ctx, &net, 0, focus, Budget::default()).unwrap();
        assert!(out.validate(&ctx).is_empty(), "{:?}", out.validate(&ctx));
        assert!(is_subnetwork(&net, &out));
        assert!(out.is_anticonfluent());
        assert!(compute_timeouts(&out, &ctx).finished(0, focus).is_some());
    }

    #[test]
    fn backward_reachability() {
        let (t, ctx) = reach("#rb(p)");
        let a = atom(&ctx, &t, &["#rb(p)", "~p", "<B>T"], &["<B>_|_"]);
        let net = Network::singleton(0, a);
        let out = repair_all(&ctx, &net, Budget::default()).unwrap();
        assert!(out.validate(&ctx).is_empty());
        let tt = compute_timeouts(&out, &ctx);
        assert!(tt.unfinished().all(|(u, _)| u != 0));
    }

    #[test]
    fn finishing_below_an_interior_node() {
        let (t, ctx) = reach("<F>#r(p)");
        let a = atom(&ctx, &t, &["<F>#r(p)", "~p"], &["<F>_|_"]);
        let net = Network::singleton(0, a);
        let mut engine = Engine::new(&ctx, Budget::default(), 1);
        let mut cur = net.clone();
        engine.repair_all(&mut cur).unwrap();
        let tt = compute_timeouts(&cur, &ctx);
        let (w, d) = tt.unfinished().find(|(w, _)| cur.successors(0).contains(w)).unwrap();
        let next = finish_deferral(&ctx, &cur, w, d, Budget::default()).unwrap();
        assert!(is_subnetwork(&cur, &next));
        assert!(next.validate(&ctx).is_empty());
        assert!(compute_timeouts(&next, &ctx).finished(w, d).is_some());
        // nothing changed outside the part generated from w
        let outside: BTreeSet<NodeId> = cur.node_set().difference(&cur.upgen([w])).copied().collect();
        assert_eq!(cur.restrict(&outside), next.restrict(&outside));
    }

    #[test]
    fn tree_depth_limit() {
        let (t, ctx) = reach("#r(p)");
        let a = atom(&ctx, &t, &["#r(p)", "~p", "<F>T"], &["<F>_|_"]);
        let net = Network::singleton(0, a);
        let focus = ctx
            .table
            .focus_of(ctx.sigma.index_of(&parse("#r(p)", &t).unwrap()).unwrap())
            .unwrap();
        let budget = Budget {
            max_depth: 0,
            ..Budget::default()
        };
        assert!(matches!(
            finish_deferral(&ctx, &net, 0, focus, budget),
            Err(Stuck::NoTree { .. })
        ));
    }
}
