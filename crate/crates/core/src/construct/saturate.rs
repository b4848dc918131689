use super::{Budget, Engine, Stuck};
use crate::bitset::BitSet;
use std::ops::ControlFlow;

use crate::closure::{for_each_atom_within, least_atom, Atom};
use crate::network::{Context, Network, NodeId};
use crate::syntax::Dir;

impl Engine<'_> {
    /// Members forced into and out of a `dir`-neighbour of an `a`-labelled
    /// node by coherence.
    pub(crate) fn coherence_bounds(&self, a: &Atom, dir: Dir) -> (BitSet, BitSet) {
        let sigma = &self.ctx.sigma;
        let mut must = BitSet::new(sigma.len());
        let mut forbid = BitSet::new(sigma.len());
        for (dia, psi) in sigma.diamonds(dir.flip()) {
            if a.contains(psi) {
                must.insert(dia);
            }
        }
        for (dia, psi) in sigma.diamonds(dir) {
            if !a.contains(dia) {
                forbid.insert(psi);
            }
        }
        (must, forbid)
    }

    /// Least atom containing closure member `phi` that may label a
    /// `dir`-neighbour of an `a`-labelled node and whose own diamonds can be
    /// witnessed in turn.
    pub(crate) fn witness_atom(&mut self, a: &Atom, dir: Dir, phi: usize) -> Option<Atom> {
        let key = (a.clone(), dir, phi);
        if let Some(w) = self.witnesses.get(&key) {
            return w.clone();
        }
        let (mut must, forbid) = self.coherence_bounds(a, dir);
        must.insert(phi);
        let mut found = None;
        for_each_atom_within(&self.ctx.sigma, &must, &forbid, |b| {
            if self.viable(b) {
                found = Some(b.clone());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        self.witnesses.insert(key, found.clone());
        found
    }

    /// Whether each diamond of `b` has some coherent atom containing its
    /// argument. Only one step is looked ahead.
    pub(crate) fn viable(&mut self, b: &Atom) -> bool {
        if let Some(&v) = self.viable.get(b) {
            return v;
        }
        let sigma = &self.ctx.sigma;
        let v = [Dir::F, Dir::B].into_iter().all(|dir| {
            let (must, forbid) = self.coherence_bounds(b, dir);
            sigma.diamonds(dir).filter(|(dia, _)| b.contains(*dia)).all(|(_, phi)| {
                let mut m = must.clone();
                m.insert(phi);
                least_atom(sigma, &m, &forbid).is_some()
            })
        });
        self.viable.insert(b.clone(), v);
        v
    }

    /// Puts `u` into `S_F` (for `F`) or `S_P` (for `B`). Diamonds that the
    /// existing neighbours cannot witness get `d` fresh neighbours labelled
    /// with the least suitable atom.
    pub fn saturate(&mut self, net: &Network, u: NodeId, dir: Dir) -> Result<Network, Stuck> {
        let mut out = net.clone();
        if net.is_saturated(dir, u) {
            return Ok(out);
        }
        let copies = self.ctx.copies();
        for (dia, phi) in net.missing_witnesses(self.ctx, u, dir) {
            let b = self
                .witness_atom(net.label(u), dir, phi)
                .ok_or_else(|| Stuck::NoWitness {
                    node: u,
                    dir,
                    formula: self.ctx.sigma.formula(dia).to_string(),
                })?;
            for _ in 0..copies {
                let v = self.fresh();
                out.add_node(v, b.clone());
                match dir {
                    Dir::F => out.add_edge(u, v),
                    Dir::B => out.add_edge(v, u),
                }
            }
        }
        out.mark_saturated(dir, u);
        self.check_size(&out)?;
        Ok(out)
    }

    /// Saturates every unsaturated node that already has `dir`-neighbours,
    /// until the only `dir`-defects left are heads (tails for `B`).
    pub fn normalize_heads(&mut self, net: &Network, dir: Dir) -> Result<Network, Stuck> {
        let mut out = net.clone();
        loop {
            let next = out
                .nodes()
                .find(|&u| !out.is_saturated(dir, u) && !out.neighbours(u, dir).is_empty());
            match next {
                Some(u) => out = self.saturate(&out, u, dir)?,
                None => return Ok(out),
            }
        }
    }
}

/// Whether every diamond of `a` has a witness atom. Atoms are only locally
/// consistent, so this can fail (for example with `<F>_|_` in `a`).
pub fn witnesses_exist(ctx: &Context, a: &Atom) -> bool {
    let mut engine = Engine::new(ctx, Budget::unlimited(), 0);
    [Dir::F, Dir::B].into_iter().all(|dir| {
        ctx.sigma
            .diamonds(dir)
            .filter(|(dia, _)| a.contains(*dia))
            .all(|(_, phi)| engine.witness_atom(a, dir, phi).is_some())
    })
}

pub fn saturate_forward(ctx: &Context, net: &Network, u: NodeId) -> Result<Network, Stuck> {
    Engine::new(ctx, Budget::unlimited(), net.next_id()).saturate(net, u, Dir::F)
}

pub fn saturate_backward(ctx: &Context, net: &Network, u: NodeId) -> Result<Network, Stuck> {
    Engine::new(ctx, Budget::unlimited(), net.next_id()).saturate(net, u, Dir::B)
}

pub fn normalize_heads(ctx: &Context, net: &Network, dir: Dir) -> Result<Network, Stuck> {
    Engine::new(ctx, Budget::unlimited(), net.next_id()).normalize_heads(net, dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::atoms;
    use crate::network::is_subnetwork;
    use crate::syntax::{parse, ConnectiveTable};

    fn setup(f: &str) -> (ConnectiveTable, Context) {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        t.define("c1", 1, "[F]x | q1").unwrap();
        let ctx = Context::new(&parse(f, &t).unwrap()).unwrap();
        (t, ctx)
    }

    #[test]
    fn no_diamonds_only_marks() {
        let (t, ctx) = setup("p");
        let bf = ctx.sigma.index_of(&parse("[F]_|_", &t).unwrap()).unwrap();
        let a = atoms(&ctx.sigma).into_iter().find(|a| a.contains(bf)).unwrap();
        let net = Network::singleton(0, a);
        let out = saturate_forward(&ctx, &net, 0).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.is_saturated(Dir::F, 0));
    }

    #[test]
    fn copies_per_diamond() {
        let (t, ctx) = setup("#c1(q) & <F>p");
        assert_eq!(ctx.copies(), 4);
        let dia = ctx.sigma.index_of(&parse("<F>p", &t).unwrap()).unwrap();
        let a = atoms(&ctx.sigma)
            .into_iter()
            .find(|a| a.contains(dia) && witnesses_exist(&ctx, a))
            .unwrap();
        let wanted = ctx.sigma.diamonds(Dir::F).filter(|(d, _)| a.contains(*d)).count();
        let net = Network::singleton(0, a);
        let out = saturate_forward(&ctx, &net, 0).unwrap();
        assert_eq!(out.len(), 1 + 4 * wanted);
        assert!(out.validate(&ctx).is_empty(), "{:?}", out.validate(&ctx));
        assert!(is_subnetwork(&net, &out));
        assert!(out.is_anticonfluent());
        let back = saturate_backward(&ctx, &out, 1).unwrap();
        assert!(back.validate(&ctx).is_empty());
        assert!(is_subnetwork(&out, &back));
    }

    #[test]
    fn normalizing_saturates_interior_nodes() {
        let (t, ctx) = setup("<F><F>p");
        let dd = ctx.sigma.index_of(&parse("<F><F>p", &t).unwrap()).unwrap();
        let a = atoms(&ctx.sigma)
            .into_iter()
            .find(|a| a.contains(dd) && witnesses_exist(&ctx, a))
            .unwrap();
        let net = saturate_forward(&ctx, &Network::singleton(0, a), 0).unwrap();
        let back = saturate_backward(&ctx, &net, 1).unwrap();
        // the fresh tail of node 1 has a successor but is not in S_F
        let tail = back.predecessors(1).iter().copied().find(|&v| v != 0);
        let norm = normalize_heads(&ctx, &back, Dir::F).unwrap();
        assert!(norm
            .nodes()
            .all(|u| norm.is_saturated(Dir::F, u) || norm.successors(u).is_empty()));
        if let Some(v) = tail {
            assert!(norm.is_saturated(Dir::F, v));
        }
        assert!(is_subnetwork(&back, &norm));
    }
}
